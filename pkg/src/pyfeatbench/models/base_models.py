"""Base data models.

The `BaseModelConfig` class sets the default options for `orjson` and
`mashumaro`. Configuration models inherit `ConfigBaseModel`, which forbids
unknown keys so a misspelt option fails loudly. Records read back from result
files inherit `RecordBaseModel`, which tolerates keys added by newer versions.
"""

from __future__ import annotations

from dataclasses import dataclass

import orjson
from mashumaro.config import BaseConfig
from mashumaro.mixins.orjson import DataClassORJSONMixin


class BaseModelConfig(BaseConfig):
    """Base config for dataclasses."""

    orjson_options = orjson.OPT_NON_STR_KEYS | orjson.OPT_SERIALIZE_NUMPY


@dataclass
class ConfigBaseModel(DataClassORJSONMixin):
    """Base model for configuration files.

    Forbids extra keys in the configuration JSON or YAML.
    """

    class Config(BaseModelConfig):
        """orjson config for dataclasses."""

        forbid_extra_keys = True


@dataclass
class RecordBaseModel(DataClassORJSONMixin):
    """Base model for records written to result files.

    Allows extra keys in the record JSON.
    """

    class Config(BaseModelConfig):
        """Config for dataclasses."""

        forbid_extra_keys = False
