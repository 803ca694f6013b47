"""Helper functions for pyfeatbench."""

from __future__ import annotations

import hashlib
import logging
import time
from dataclasses import dataclass, field
from importlib.metadata import PackageNotFoundError, version
from pathlib import Path
from typing import TYPE_CHECKING, Any, TypeVar

import orjson
import yaml
from mashumaro.exceptions import (
    ExtraKeysError,
    InvalidFieldValue,
    MissingField,
    UnserializableField,
)
from mashumaro.mixins.orjson import DataClassORJSONMixin

from pyfeatbench.utils.errors import ConfigError, ParameterError
from pyfeatbench.utils.logs import LibraryLogger

if TYPE_CHECKING:
    from types import TracebackType

    import numpy as np


T_MODEL = TypeVar('T_MODEL', bound=DataClassORJSONMixin)

_LOGGER = logging.getLogger(__name__)

NUMERIC = float | int

HASH_LENGTH = 16

VERSIONED_PACKAGES = ('pyfeatbench', 'numpy', 'scipy', 'pillow', 'mashumaro', 'orjson')


class Validators:
    """Methods to validate input."""

    @staticmethod
    def validate_range(value: NUMERIC | None, minimum: NUMERIC, maximum: NUMERIC) -> bool:
        """Validate number is within the closed range."""
        if value is None:
            return False
        return minimum <= value <= maximum

    @staticmethod
    def require_positive(name: str, value: NUMERIC) -> None:
        """Raise ParameterError unless value is strictly positive."""
        if not value > 0:
            msg = f'{name} must be positive, got {value}'
            raise ParameterError(msg)

    @classmethod
    def require_range(
        cls, name: str, value: NUMERIC, minimum: NUMERIC, maximum: NUMERIC
    ) -> None:
        """Raise ParameterError unless minimum <= value <= maximum."""
        if not cls.validate_range(value, minimum, maximum):
            msg = f'{name} must be within [{minimum}, {maximum}], got {value}'
            raise ParameterError(msg)


class Helpers:
    """pyfeatbench helper functions."""

    @staticmethod
    def model_maker(
        logger: logging.Logger,
        model: type[T_MODEL],
        source: str,
        data: dict[str, Any],
    ) -> T_MODEL | None:
        """Create a model instance from a dictionary.

        This method catches the errors mashumaro raises for malformed data and
        returns None if the data is invalid. Enable debug logging to see the
        expected and supplied fields.

        Args:
            logger (logging.Logger): Logger instance.
            model (type[T_MODEL]): Model class to create an instance of.
            source (str): File or section name used in the log record.
            data (dict[str, Any]): Dictionary to create the model from.

        Returns:
            T_MODEL | None: Instance of the model class.
        """
        try:
            model_instance = model.from_dict(data)
        except (
            MissingField, UnserializableField, InvalidFieldValue, ExtraKeysError
        ) as err:
            LibraryLogger.log_model_error(logger, source, data, err)
            return None
        return model_instance

    @classmethod
    def load_model(cls, model: type[T_MODEL], path: str | Path) -> T_MODEL:
        """Load a JSON or YAML file into a model.

        Raises:
            ConfigError: File missing, unparsable or not matching the model.
        """
        path = Path(path)
        data = cls.load_mapping(path)
        instance = cls.model_maker(_LOGGER, model, str(path), data)
        if instance is None:
            msg = f'{path} does not describe a valid {model.__name__}'
            raise ConfigError(msg)
        return instance

    @staticmethod
    def load_mapping(path: str | Path) -> dict[str, Any]:
        """Read a JSON or YAML mapping, choosing the parser by file suffix.

        Raises:
            ConfigError: File missing, unparsable or not a mapping.
        """
        path = Path(path)
        try:
            raw = path.read_bytes()
        except OSError as exc:
            msg = f'Cannot read {path}: {exc.strerror}'
            raise ConfigError(msg) from exc
        try:
            if path.suffix.lower() in {'.yaml', '.yml'}:
                data = yaml.safe_load(raw)
            else:
                data = orjson.loads(raw)
        except (orjson.JSONDecodeError, yaml.YAMLError) as exc:
            msg = f'Cannot parse {path}: {exc}'
            raise ConfigError(msg) from exc
        if not isinstance(data, dict):
            msg = f'{path} must contain a mapping at top level'
            raise ConfigError(msg)
        return data

    @staticmethod
    def canonical_json(data: Any) -> bytes:
        """Serialize data with sorted keys so equal content hashes equally."""
        return orjson.dumps(
            data, option=orjson.OPT_SORT_KEYS | orjson.OPT_NON_STR_KEYS, default=str
        )

    @classmethod
    def config_hash(cls, data: Any) -> str:
        """Short SHA-256 digest of the canonical JSON form of data."""
        digest = hashlib.sha256(cls.canonical_json(data)).hexdigest()
        return digest[:HASH_LENGTH]

    @staticmethod
    def array_digest(array: np.ndarray) -> str:
        """Short SHA-256 digest of an array's shape, dtype and contents."""
        hasher = hashlib.sha256()
        hasher.update(str(array.shape).encode('ascii'))
        hasher.update(array.dtype.str.encode('ascii'))
        hasher.update(array.tobytes())
        return hasher.hexdigest()[:HASH_LENGTH]

    @staticmethod
    def package_versions() -> dict[str, str]:
        """Installed versions of pyfeatbench and its numeric and model libraries."""
        versions: dict[str, str] = {}
        for name in VERSIONED_PACKAGES:
            try:
                versions[name] = version(name)
            except PackageNotFoundError:
                versions[name] = 'unknown'
        return versions

    @staticmethod
    def write_json(path: str | Path, data: Any) -> Path:
        """Write data as indented JSON, creating parent directories."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(
            orjson.dumps(
                data,
                option=orjson.OPT_INDENT_2
                | orjson.OPT_NON_STR_KEYS
                | orjson.OPT_SERIALIZE_NUMPY,
            )
        )
        return path


@dataclass
class StageTimer:
    """Context manager accumulating monotonic nanoseconds across entries.

    Example:
        >>> timer = StageTimer('decode')
        >>> with timer:
        ...     load_image(path)
        >>> timer.seconds
        0.0123
    """

    name: str
    elapsed_ns: int = 0
    _start: int | None = field(default=None, repr=False)

    def __enter__(self) -> StageTimer:
        """Start timing."""
        self._start = time.perf_counter_ns()
        return self

    def __exit__(
        self,
        exc_type: type[BaseException] | None,
        exc: BaseException | None,
        tb: TracebackType | None,
    ) -> None:
        """Stop timing and accumulate."""
        if self._start is not None:
            self.elapsed_ns += time.perf_counter_ns() - self._start
            self._start = None

    @property
    def seconds(self) -> float:
        """Accumulated time in seconds."""
        return self.elapsed_ns / 1e9
