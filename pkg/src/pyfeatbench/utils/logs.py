"""Logging helpers for pyfeatbench.

Library modules log through `logging.getLogger(__name__)` and never install
handlers on import. `LibraryLogger` configures handlers for applications and
the command line interface, and offers helper methods that keep the records of
recurring benchmark events (query elimination, histogram prefiltering, stage
timing, configuration parsing failures) uniformly formatted.

Usage:
    from pyfeatbench.utils.logs import LibraryLogger

    LibraryLogger.configure_logger(logging.DEBUG, file_name='run.log')
    LibraryLogger.log_stage_time(logger, 'match', 'FAST-SURF', 1.25)
"""

from __future__ import annotations

import logging
from collections.abc import Mapping
from dataclasses import fields, is_dataclass
from pathlib import Path
from typing import TYPE_CHECKING, ClassVar

import orjson
from mashumaro.exceptions import (
    ExtraKeysError,
    InvalidFieldValue,
    MissingField,
    UnserializableField,
)

if TYPE_CHECKING:
    from mashumaro.mixins.orjson import DataClassORJSONMixin

LOG_FORMAT = '%(asctime)s - %(levelname)s - %(name)s - %(message)s'
LOG_DATE_FORMAT = '%Y-%m-%d %H:%M:%S'


class LibraryLogger:
    """Library Logging Interface.

    Attributes:
        debug (bool): Class attribute enabling the detailed model-error dumps.
        verbose (bool): Class attribute enabling per-query and per-pair records.

    Examples:
        Logging a rejected query:
        >>> LibraryLogger.log_elimination(logger, 'q_017.pgm', 12, 40, 4000)
            2025-02-01 12:34:56 - DEBUG - pyfeatbench.bench - Query q_017.pgm
            eliminated: 12 FAST keypoints outside [40, 4000]
    """

    debug = False
    """Class attribute to print expected and supplied fields on parse errors."""
    verbose = False
    """Class attribute to log every query and image pair."""
    _handlers: ClassVar[list[logging.Handler]] = []

    @classmethod
    def config_printer(cls, config: Mapping | DataClassORJSONMixin | None) -> str | None:
        """Render a configuration mapping or model as indented JSON."""
        if config is None:
            return None
        data = config if isinstance(config, Mapping) else config.to_dict()
        if len(data) == 0:
            return None
        try:
            dump = orjson.dumps(
                dict(data),
                option=orjson.OPT_INDENT_2
                | orjson.OPT_NON_STR_KEYS
                | orjson.OPT_SORT_KEYS,
                default=str,
            )
        except orjson.JSONEncodeError:
            return str(data)
        return dump.decode('utf-8')

    @staticmethod
    def set_log_level(level: str | int = logging.WARNING) -> None:
        """Set log level of the root logger."""
        logging.getLogger().setLevel(level)

    @staticmethod
    def configure_logger(
        level: str | int = logging.INFO,
        file_name: str | Path | None = None,
        std_out: bool = True,
    ) -> None:
        """Configure the pyfeatbench loggers with a specific log level.

        Args:
            level (str | int): The log level to set the logger to, can be
                in form of enum `logging.DEBUG` or string `DEBUG`.
            file_name (str | Path | None): The name of the file to log to. If None,
                logs will only be printed to the console.
            std_out (bool): If True, logs will be printed to standard error.

        Note:
            Handlers installed by an earlier call are replaced, so repeated CLI
            invocations in one process do not duplicate records. Handlers
            installed by the application are left alone.
        """
        if level in (logging.DEBUG, 'DEBUG'):
            LibraryLogger.debug = True
        root_logger = logging.getLogger()
        for handler in LibraryLogger._handlers:
            root_logger.removeHandler(handler)
            handler.close()
        LibraryLogger._handlers = []

        formatter = logging.Formatter(fmt=LOG_FORMAT, datefmt=LOG_DATE_FORMAT)
        if std_out is True:
            str_handler = logging.StreamHandler()
            str_handler.setFormatter(formatter)
            root_logger.addHandler(str_handler)
            LibraryLogger._handlers.append(str_handler)
        if file_name is not None:
            file_handler = logging.FileHandler(Path(file_name).resolve())
            file_handler.setFormatter(formatter)
            root_logger.addHandler(file_handler)
            LibraryLogger._handlers.append(file_handler)
        root_logger.setLevel(level)
        for log_name, logger in root_logger.manager.loggerDict.items():
            if isinstance(logger, logging.Logger) and log_name.startswith('pyfeatbench'):
                logger.setLevel(level)

    @classmethod
    def log_model_error(
        cls,
        logger: logging.Logger,
        source: str,
        data: Mapping,
        exc: MissingField | InvalidFieldValue | UnserializableField | ExtraKeysError,
    ) -> None:
        """Log a failure to build a model from a configuration mapping.

        Args:
            logger (logging.Logger): module logger
            source (str): file or section the data came from
            data (Mapping): mapping that failed to parse
            exc (MissingField | InvalidFieldValue | UnserializableField |
                ExtraKeysError): mashumaro exception caught
        """
        if isinstance(exc, ExtraKeysError):
            keys = ', '.join(sorted(exc.extra_keys))
            name = exc.target_type.__name__
            logger.warning(
                'Error parsing %s with data model %s: unknown keys %s', source, name, keys
            )
            return
        msg = f'Error parsing {source} with data model {exc.holder_class_name}: '
        if isinstance(exc, MissingField):
            msg += f'missing field {exc.field_name} of type {exc.field_type_name}'
        elif isinstance(exc, InvalidFieldValue):
            msg += f'invalid value for {exc.field_name} of type {exc.field_type_name}'
        else:
            msg += f'unserializable field {exc.field_name} of type {exc.field_type_name}'
        logger.warning(msg)
        if not cls.debug or not is_dataclass(exc.holder_class):
            return
        expected = sorted(f.name for f in fields(exc.holder_class))
        supplied = sorted(str(key) for key in data)
        logger.debug(
            'Expected fields: (%s)\nSupplied fields: (%s)\nMissing fields: (%s)',
            ', '.join(expected),
            ', '.join(supplied),
            ', '.join(sorted(set(expected) - set(supplied))),
        )

    @classmethod
    def log_elimination(
        cls,
        logger: logging.Logger,
        image: str | Path,
        count: int,
        lower: int,
        upper: int,
    ) -> None:
        """Log a query removed by the keypoint-count hysteresis band."""
        logger.debug(
            'Query %s eliminated: %d FAST keypoints outside [%d, %d]',
            image,
            count,
            lower,
            upper,
        )

    @classmethod
    def log_prefilter(
        cls,
        logger: logging.Logger,
        image: str | Path,
        n_candidates: int,
        n_templates: int,
    ) -> None:
        """Log the number of templates a query keeps after histogram comparison."""
        if not cls.verbose:
            return
        logger.debug(
            'Query %s keeps %d of %d templates after histogram comparison',
            image,
            n_candidates,
            n_templates,
        )

    @classmethod
    def log_stage_time(
        cls,
        logger: logging.Logger,
        stage: str,
        label: str,
        seconds: float,
    ) -> None:
        """Log the wall-clock time of a pipeline stage."""
        logger.info('%s for %s took %.3f s', stage, label, seconds)
