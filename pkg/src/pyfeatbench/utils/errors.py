"""Module holding pyfeatbench error types, exit codes and exceptions.

Every failure the library raises derives from `FeatBenchError` and carries an
`ErrorTypes` classification. The `ErrorCodes` registry maps a classification
to an `ErrorInfo` record, which the command line interface uses to choose its
exit code and diagnostic prefix.

Invalid argument values that are programming errors (non-positive sigma, ratio
outside (0, 1], rectangle out of bounds) raise the matching subclass, which
also derives from `ValueError` so generic callers can catch them.

Example:
    ```python
    try:
        load_image('missing.pgm')
    except FeatBenchError as exc:
        info = ErrorCodes.get_error_info(exc)
        # ErrorInfo(name='IMAGE_READ', error_type=ErrorTypes.IMAGE_READ,
        #           message='Image could not be read', exit_code=2)
    ```
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import StrEnum
from pathlib import Path
from types import MappingProxyType

from mashumaro.mixins.orjson import DataClassORJSONMixin

from pyfeatbench.const import ExitCode


class ErrorTypes(StrEnum):
    """Error classifications.

    Attributes:
        IMAGE_READ: File missing or unreadable.
        IMAGE_FORMAT: Unsupported or corrupt raster format.
        IMAGE_SIZE: Image empty or too small for the operation.
        PARAMETER: Argument outside its valid range.
        CONFIG: Invalid configuration, manifest or grid geometry.
        DESCRIPTOR_MISMATCH: Descriptors of different kinds or lengths compared.
        MATCH_INPUT: Match list inconsistent with its keypoint lists.
        PIPELINE: A benchmark stage failed on a named image.
        UNKNOWN: Anything not classified above.
    """

    IMAGE_READ = 'image_read'
    IMAGE_FORMAT = 'image_format'
    IMAGE_SIZE = 'image_size'
    PARAMETER = 'parameter'
    CONFIG = 'config'
    DESCRIPTOR_MISMATCH = 'descriptor_mismatch'
    MATCH_INPUT = 'match_input'
    PIPELINE = 'pipeline'
    UNKNOWN = 'unknown'


@dataclass
class ErrorInfo(DataClassORJSONMixin):
    """Description of an error classification.

    Attributes:
        name (str): Name of the error
        error_type (ErrorTypes): Classification, see `ErrorTypes`
        message (str): Human readable summary
        exit_code (int): Process exit code the CLI returns for it
    """

    name: str
    error_type: ErrorTypes
    message: str
    exit_code: int = ExitCode.PIPELINE_ERROR


class ErrorCodes:
    """Registry of error classifications.

    Configuration problems exit with 1, everything raised while the pipeline
    runs exits with 2.
    """

    errors: MappingProxyType[ErrorTypes, ErrorInfo] = MappingProxyType(
        {
            ErrorTypes.IMAGE_READ: ErrorInfo(
                'IMAGE_READ', ErrorTypes.IMAGE_READ, 'Image could not be read'
            ),
            ErrorTypes.IMAGE_FORMAT: ErrorInfo(
                'IMAGE_FORMAT', ErrorTypes.IMAGE_FORMAT, 'Unsupported image format'
            ),
            ErrorTypes.IMAGE_SIZE: ErrorInfo(
                'IMAGE_SIZE', ErrorTypes.IMAGE_SIZE, 'Image too small'
            ),
            ErrorTypes.PARAMETER: ErrorInfo(
                'PARAMETER',
                ErrorTypes.PARAMETER,
                'Invalid parameter value',
                ExitCode.CONFIG_ERROR,
            ),
            ErrorTypes.CONFIG: ErrorInfo(
                'CONFIG',
                ErrorTypes.CONFIG,
                'Invalid configuration',
                ExitCode.CONFIG_ERROR,
            ),
            ErrorTypes.DESCRIPTOR_MISMATCH: ErrorInfo(
                'DESCRIPTOR_MISMATCH',
                ErrorTypes.DESCRIPTOR_MISMATCH,
                'Descriptors are not comparable',
            ),
            ErrorTypes.MATCH_INPUT: ErrorInfo(
                'MATCH_INPUT', ErrorTypes.MATCH_INPUT, 'Invalid match input'
            ),
            ErrorTypes.PIPELINE: ErrorInfo(
                'PIPELINE', ErrorTypes.PIPELINE, 'Benchmark pipeline failed'
            ),
            ErrorTypes.UNKNOWN: ErrorInfo(
                'UNKNOWN', ErrorTypes.UNKNOWN, 'Unexpected error'
            ),
        }
    )

    @classmethod
    def get_error_info(cls, error: BaseException | ErrorTypes | str | None) -> ErrorInfo:
        """Return the error record for an exception or classification.

        Args:
            error (BaseException | ErrorTypes | str | None): Exception raised by
                the library, or an error type name.

        Returns:
            ErrorInfo: Record for the classification, UNKNOWN when unclassified.
        """
        if isinstance(error, FeatBenchError):
            return cls.errors[error.error_type]
        if isinstance(error, str):
            try:
                return cls.errors[ErrorTypes(error)]
            except ValueError:
                pass
        return cls.errors[ErrorTypes.UNKNOWN]

    @classmethod
    def exit_code(cls, error: BaseException | None) -> int:
        """Exit code for an exception, 0 when there is none."""
        if error is None:
            return ExitCode.SUCCESS
        return cls.get_error_info(error).exit_code


class FeatBenchError(Exception):
    """Base exception for pyfeatbench errors."""

    error_type: ErrorTypes = ErrorTypes.UNKNOWN


class ImageReadError(FeatBenchError, OSError):
    """Exception raised when an image file cannot be read."""

    error_type = ErrorTypes.IMAGE_READ

    def __init__(self, path: str | Path, reason: str = 'file not found') -> None:
        """Initialize the exception with the offending path."""
        self.path = Path(path)
        super().__init__(f'Cannot read image {self.path}: {reason}')


class ImageFormatError(FeatBenchError, ValueError):
    """Exception raised for unsupported or corrupt raster data."""

    error_type = ErrorTypes.IMAGE_FORMAT

    def __init__(self, msg: str, path: str | Path | None = None) -> None:
        """Initialize the exception with a message."""
        self.path = Path(path) if path is not None else None
        if self.path is not None:
            msg = f'{self.path}: {msg}'
        super().__init__(msg)


class ImageSizeError(FeatBenchError, ValueError):
    """Exception raised when an image is empty or too small."""

    error_type = ErrorTypes.IMAGE_SIZE

    def __init__(
        self, width: int, height: int, minimum: tuple[int, int] | None = None
    ) -> None:
        """Initialize the exception with the dimensions involved."""
        message = f'Image of {width}x{height} pixels is empty'
        if minimum is not None:
            message = (
                f'Image of {width}x{height} pixels is smaller than '
                f'{minimum[0]}x{minimum[1]}'
            )
        super().__init__(message)


class ParameterError(FeatBenchError, ValueError):
    """Exception raised for an argument outside its valid range."""

    error_type = ErrorTypes.PARAMETER


class ConfigError(FeatBenchError, ValueError):
    """Exception raised for invalid configuration, manifest or grid geometry."""

    error_type = ErrorTypes.CONFIG


class DescriptorMismatchError(FeatBenchError, ValueError):
    """Exception raised when descriptors of different kinds or lengths are compared."""

    error_type = ErrorTypes.DESCRIPTOR_MISMATCH


class MatchInputError(FeatBenchError, IndexError):
    """Exception raised when matches reference missing descriptors or keypoints."""

    error_type = ErrorTypes.MATCH_INPUT


class PipelineError(FeatBenchError):
    """Exception raised when a benchmark stage fails on an image.

    Attributes:
        path (Path | None): Image being processed when the failure occurred.
    """

    error_type = ErrorTypes.PIPELINE

    def __init__(self, msg: str, path: str | Path | None = None) -> None:
        """Initialize the exception naming the failing image."""
        self.path = Path(path) if path is not None else None
        if self.path is not None:
            msg = f'{msg} ({self.path})'
        super().__init__(msg)


def raise_for_error_type(error_info: ErrorInfo, msg: str | None = None) -> None:
    """Raise the exception class matching an error record.

    Args:
        error_info (ErrorInfo): Record returned by `ErrorCodes.get_error_info`.
        msg (str | None): Message overriding the record's summary.

    Raises:
        ConfigError: Configuration errors
        ParameterError: Parameter errors
        DescriptorMismatchError: Incomparable descriptors
        MatchInputError: Invalid match input
        PipelineError: Everything else
    """
    message = msg if msg is not None else error_info.message
    match error_info.error_type:
        case ErrorTypes.CONFIG:
            raise ConfigError(message)
        case ErrorTypes.PARAMETER:
            raise ParameterError(message)
        case ErrorTypes.DESCRIPTOR_MISMATCH:
            raise DescriptorMismatchError(message)
        case ErrorTypes.MATCH_INPUT:
            raise MatchInputError(message)
        case _:
            raise PipelineError(message)
