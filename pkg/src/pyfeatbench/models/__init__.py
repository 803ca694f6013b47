"""Data models for pyfeatbench.

Every record that is written to or read from disk is a dataclass using
mashumaro's `DataClassORJSONMixin`, so JSON goes through orjson.

The `base_models` module holds the shared mashumaro configuration. Feature-level
records live in `feature_models`, benchmark records in `bench_models` and run
configuration in `config_models`.
"""

from pyfeatbench.models.bench_models import (
    AccuracyCounts,
    CachedPair,
    CombinationId,
    CombinationResult,
    DatasetManifest,
    LocationCube,
    PairRecord,
    PoseLabel,
    QueryEntry,
    QueryLocalization,
    RunMetadata,
    StatsDump,
    TemplateEntry,
)
from pyfeatbench.models.config_models import (
    AccuracyParams,
    BriskParams,
    DescriptorParams,
    DetectorParams,
    EliminationParams,
    GridGeometry,
    MatcherParams,
    OrbParams,
    RunConfig,
    SiftParams,
    SurfParams,
)
from pyfeatbench.models.feature_models import Keypoint, Match, MatchStats

__all__ = [
    'AccuracyCounts',
    'AccuracyParams',
    'BriskParams',
    'CachedPair',
    'CombinationId',
    'CombinationResult',
    'DatasetManifest',
    'DescriptorParams',
    'DetectorParams',
    'EliminationParams',
    'GridGeometry',
    'Keypoint',
    'LocationCube',
    'Match',
    'MatchStats',
    'MatcherParams',
    'OrbParams',
    'PairRecord',
    'PoseLabel',
    'QueryEntry',
    'QueryLocalization',
    'RunConfig',
    'RunMetadata',
    'SiftParams',
    'StatsDump',
    'SurfParams',
    'TemplateEntry',
]
