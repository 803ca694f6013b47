"""Run configuration models.

A run is described by a `RunConfig`, loaded from JSON or YAML and overridden
by command line flags. Each parameter group validates itself on construction
and raises `ConfigError` for out-of-range values. Defaults come from
[pyfeatbench.const][pyfeatbench.const].

Example:
    ```yaml
    manifest: data/manifest.json
    combinations: [FAST-SURF, ORB-ORB]
    matcher:
      ratio: 0.75
    elimination:
      lower: 30
    workers: 1
    ```
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

from pyfeatbench.const import (
    BRIEF_SMOOTHING_SIGMA,
    BRISK_FAST_THRESHOLD,
    BRISK_OCTAVES,
    DEFAULT_MIN_CORRECT,
    DEFAULT_RATIO,
    FAST_ARC,
    FAST_ARC_RANGE,
    FAST_THRESHOLD,
    HEIGHT_LEVELS,
    HISTOGRAM_THRESHOLD,
    HYSTERESIS_LOWER,
    HYSTERESIS_UPPER,
    MAX_DISTANCE_256,
    MAX_DISTANCE_512,
    MAX_DISTANCE_REAL,
    ORB_LEVELS,
    ORB_N_FEATURES,
    ORB_SCALE_FACTOR,
    PATTERN_SEED,
    SIFT_BASE_SIGMA,
    SIFT_CONTRAST_THRESHOLD,
    SIFT_EDGE_RATIO,
    SIFT_SCALES_PER_OCTAVE,
    SURF_HESSIAN_THRESHOLD,
    SURF_OCTAVES,
    YAW_TOLERANCE,
    AccuracyPolicy,
    CandidatePolicy,
    DescriptorKind,
    HistogramMethod,
    TimingMode,
)
from pyfeatbench.models.base_models import ConfigBaseModel
from pyfeatbench.utils.errors import ConfigError
from pyfeatbench.utils.helpers import Helpers


def _require(condition: bool, msg: str) -> None:
    if not condition:
        raise ConfigError(msg)


@dataclass
class SiftParams(ConfigBaseModel):
    """DoG detector parameters; octaves None derives the count from the image size."""

    octaves: int | None = None
    scales_per_octave: int = SIFT_SCALES_PER_OCTAVE
    base_sigma: float = SIFT_BASE_SIGMA
    contrast_thresh: float = SIFT_CONTRAST_THRESHOLD
    edge_ratio: float = SIFT_EDGE_RATIO

    def __post_init__(self) -> None:
        """Validate thresholds."""
        _require(self.octaves is None or self.octaves > 0, 'sift.octaves must be > 0')
        _require(self.scales_per_octave > 0, 'sift.scales_per_octave must be > 0')
        _require(self.base_sigma > 0, 'sift.base_sigma must be > 0')
        _require(self.contrast_thresh > 0, 'sift.contrast_thresh must be > 0')
        _require(self.edge_ratio > 0, 'sift.edge_ratio must be > 0')


@dataclass
class SurfParams(ConfigBaseModel):
    """Hessian box-filter detector parameters."""

    octaves: int = SURF_OCTAVES
    hessian_thresh: float = SURF_HESSIAN_THRESHOLD

    def __post_init__(self) -> None:
        """Validate thresholds."""
        _require(self.octaves > 0, 'surf.octaves must be > 0')
        _require(self.hessian_thresh > 0, 'surf.hessian_thresh must be > 0')


@dataclass
class OrbParams(ConfigBaseModel):
    """Oriented FAST parameters."""

    n_features: int = ORB_N_FEATURES
    levels: int = ORB_LEVELS
    scale_factor: float = ORB_SCALE_FACTOR

    def __post_init__(self) -> None:
        """Validate thresholds."""
        _require(self.n_features > 0, 'orb.n_features must be > 0')
        _require(self.levels > 0, 'orb.levels must be > 0')
        _require(self.scale_factor > 1, 'orb.scale_factor must be > 1')


@dataclass
class BriskParams(ConfigBaseModel):
    """Scale-space FAST parameters."""

    octaves: int = BRISK_OCTAVES
    fast_threshold: int = BRISK_FAST_THRESHOLD

    def __post_init__(self) -> None:
        """Validate thresholds."""
        _require(self.octaves > 0, 'brisk.octaves must be > 0')
        _require(self.fast_threshold > 0, 'brisk.fast_threshold must be > 0')


@dataclass
class DetectorParams(ConfigBaseModel):
    """Parameters of all five detectors."""

    fast_threshold: int = FAST_THRESHOLD
    fast_arc: int = FAST_ARC
    sift: SiftParams = field(default_factory=SiftParams)
    surf: SurfParams = field(default_factory=SurfParams)
    orb: OrbParams = field(default_factory=OrbParams)
    brisk: BriskParams = field(default_factory=BriskParams)

    def __post_init__(self) -> None:
        """Validate the FAST parameters shared by FAST, ORB and BRISK."""
        _require(self.fast_threshold > 0, 'fast_threshold must be > 0')
        _require(
            FAST_ARC_RANGE[0] <= self.fast_arc <= FAST_ARC_RANGE[1],
            f'fast_arc must be within [{FAST_ARC_RANGE[0]}, {FAST_ARC_RANGE[1]}]',
        )


@dataclass
class DescriptorParams(ConfigBaseModel):
    """Descriptor parameters; the test-pair seed comes from `RunConfig.seed`."""

    brief_smoothing_sigma: float = BRIEF_SMOOTHING_SIGMA

    def __post_init__(self) -> None:
        """Validate smoothing."""
        _require(self.brief_smoothing_sigma > 0, 'brief_smoothing_sigma must be > 0')


@dataclass
class MatcherParams(ConfigBaseModel):
    """Match filtering and the image-pair decision threshold."""

    ratio: float = DEFAULT_RATIO
    max_distance_256: float = MAX_DISTANCE_256
    max_distance_512: float = MAX_DISTANCE_512
    max_distance_real: float = MAX_DISTANCE_REAL
    cross_check: bool = False
    min_correct: int = DEFAULT_MIN_CORRECT

    def __post_init__(self) -> None:
        """Validate thresholds."""
        _require(0 < self.ratio <= 1, 'matcher.ratio must be within (0, 1]')
        _require(
            min(self.max_distance_256, self.max_distance_512, self.max_distance_real)
            > 0,
            'matcher max distances must be > 0',
        )
        _require(self.min_correct >= 0, 'matcher.min_correct must be >= 0')

    def max_distance_for(self, kind: DescriptorKind, length: int) -> float:
        """Absolute distance limit for a descriptor kind and length in bits or dims."""
        if kind is DescriptorKind.REAL:
            return self.max_distance_real
        if length > 256:  # noqa: PLR2004
            return self.max_distance_512
        return self.max_distance_256


@dataclass
class EliminationParams(ConfigBaseModel):
    """Query elimination: FAST keypoint-count band and histogram prefilter."""

    lower: int = HYSTERESIS_LOWER
    upper: int = HYSTERESIS_UPPER
    prefilter_threshold: float = HISTOGRAM_THRESHOLD
    prefilter_method: HistogramMethod = HistogramMethod.CORRELATION

    def __post_init__(self) -> None:
        """Validate the band and threshold."""
        _require(self.lower < self.upper, 'elimination.lower must be < upper')
        _require(
            0 <= self.prefilter_threshold <= 1,
            'elimination.prefilter_threshold must be within [0, 1]',
        )


@dataclass
class AccuracyParams(ConfigBaseModel):
    """Ground-truth labelling and decision acceptance.

    Attributes:
        policy (AccuracyPolicy): Predicate marking a case positive.
        yaw_tolerance (int): Largest yaw difference of a pose-tolerant positive.
        histogram_gate (bool): Accept a matched pair only when its histogram
            score also exceeds `acceptance_threshold`.
        acceptance_threshold (float): Histogram score required by the gate.
    """

    policy: AccuracyPolicy = AccuracyPolicy.POSE_TOLERANT
    yaw_tolerance: int = YAW_TOLERANCE
    histogram_gate: bool = False
    acceptance_threshold: float = HISTOGRAM_THRESHOLD

    def __post_init__(self) -> None:
        """Validate thresholds."""
        _require(self.yaw_tolerance >= 0, 'accuracy.yaw_tolerance must be >= 0')
        _require(
            0 <= self.acceptance_threshold <= 1,
            'accuracy.acceptance_threshold must be within [0, 1]',
        )


@dataclass
class GridGeometry(ConfigBaseModel):
    """Physical layout of the capture grid.

    The camera turns about a vertical axis at each capture point; its optical
    centre sits `lever_arm` metres from the axis, so the camera position
    depends on yaw as well as on point and height.

    Attributes:
        points (dict[str, list[float]]): Point id to (x, y) in metres.
        heights (list[float]): Camera height in metres for each height level.
        lever_arm (float): Optical-centre offset from the rotation axis in metres.
        headings (dict[str, float]): Heading in degrees of the yaw-0 view per
            point, 0 when absent.
        candidate_policy (CandidatePolicy): Candidate-set construction.
    """

    points: dict[str, list[float]] = field(default_factory=dict)
    heights: list[float] = field(default_factory=lambda: [0.5, 1.0, 1.5])
    lever_arm: float = 0.0
    headings: dict[str, float] = field(default_factory=dict)
    candidate_policy: CandidatePolicy = CandidatePolicy.SIX_POINT

    def __post_init__(self) -> None:
        """Validate dimensions."""
        _require(
            len(self.heights) == HEIGHT_LEVELS,
            f'grid.heights must list {HEIGHT_LEVELS} values',
        )
        for point_id, coords in self.points.items():
            _require(
                len(coords) == 2,  # noqa: PLR2004
                f'grid point {point_id} needs (x, y)',
            )
        _require(self.lever_arm >= 0, 'grid.lever_arm must be >= 0')

    def position(
        self, point_id: str, height_level: int, yaw: float
    ) -> tuple[float, float, float]:
        """Camera position in metres for a pose.

        Raises:
            ConfigError: Point or height level absent from the grid.
        """
        if point_id not in self.points:
            msg = f'Point {point_id} is not part of the grid geometry'
            raise ConfigError(msg)
        if not 0 <= height_level < len(self.heights):
            msg = f'Height level {height_level} is not part of the grid geometry'
            raise ConfigError(msg)
        x, y = self.points[point_id]
        heading = math.radians(self.headings.get(point_id, 0.0) + yaw)
        return (
            x + self.lever_arm * math.cos(heading),
            y + self.lever_arm * math.sin(heading),
            self.heights[height_level],
        )


@dataclass
class RunConfig(ConfigBaseModel):
    """Complete configuration of a benchmark run.

    Attributes:
        manifest (str): Dataset manifest path.
        combinations (list[str]): `all` or explicit `DETECTOR-DESCRIPTOR` names.
        detector (DetectorParams): Detector parameter overrides.
        descriptor (DescriptorParams): Descriptor parameter overrides.
        matcher (MatcherParams): Matcher thresholds.
        elimination (EliminationParams): Elimination thresholds.
        accuracy (AccuracyParams): Case labelling and acceptance.
        workers (int): Worker processes, 1 for timing runs.
        output_dir (str): Directory receiving the report files.
        seed (int): Seed of the binary test-pair pattern.
        cache_dir (str | None): Directory of the per-pair stats cache.
        reuse_cache (bool): Read cached pair stats in parallel runs.
        grid (GridGeometry | None): Grid geometry enabling localization output.
    """

    manifest: str = ''
    combinations: list[str] = field(default_factory=lambda: ['all'])
    detector: DetectorParams = field(default_factory=DetectorParams)
    descriptor: DescriptorParams = field(default_factory=DescriptorParams)
    matcher: MatcherParams = field(default_factory=MatcherParams)
    elimination: EliminationParams = field(default_factory=EliminationParams)
    accuracy: AccuracyParams = field(default_factory=AccuracyParams)
    workers: int = 1
    output_dir: str = 'results'
    seed: int = PATTERN_SEED
    cache_dir: str | None = None
    reuse_cache: bool = False
    grid: GridGeometry | None = None

    def __post_init__(self) -> None:
        """Validate scalar settings."""
        _require(self.workers >= 1, 'workers must be >= 1')
        _require(len(self.combinations) > 0, 'combinations must not be empty')

    @property
    def timing_mode(self) -> TimingMode:
        """Sequential runs are timing runs, anything else is a correctness run."""
        return TimingMode.TIMING if self.workers == 1 else TimingMode.PARALLEL

    def result_parameters(self) -> dict[str, Any]:
        """Settings that influence results, excluding paths and worker count."""
        data = self.to_dict()
        for key in ('output_dir', 'workers', 'cache_dir', 'reuse_cache', 'combinations'):
            data.pop(key, None)
        return data

    def config_hash(self) -> str:
        """Digest identifying comparable runs."""
        return Helpers.config_hash(self.result_parameters())
