"""Benchmark records: pose labels, manifests, combination results and dumps.

The manifest describes a pose-grid dataset. Templates and queries carry a
`PoseLabel` (capture point, height level, yaw). A manifest can be written as
JSON, YAML or a whitespace-separated text file, see
[DatasetManifest.from_file][pyfeatbench.models.bench_models.DatasetManifest.from_file].

Result records (`PairRecord`, `CombinationResult`, `StatsDump`, `RunMetadata`)
are written by `cmd_run` and read back by `cmd_report`; they tolerate unknown
keys so dumps of newer versions still load.
"""

from __future__ import annotations

import logging
import math
import shlex
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from mashumaro.mixins.orjson import DataClassORJSONMixin

from pyfeatbench.const import (
    EXCLUDED_COMBINATIONS,
    HEIGHT_LEVELS,
    YAW_RANGE,
    YAW_STEP,
    DescriptorTypes,
    DetectorTypes,
    TimingMode,
)
from pyfeatbench.models.base_models import BaseModelConfig, RecordBaseModel
from pyfeatbench.models.config_models import RunConfig
from pyfeatbench.models.feature_models import MatchStats
from pyfeatbench.utils.errors import ConfigError
from pyfeatbench.utils.helpers import Helpers

logger = logging.getLogger(__name__)

TEXT_MANIFEST_SUFFIXES = frozenset({'.txt', '.lst', '.manifest'})


@dataclass(frozen=True)
class PoseLabel(DataClassORJSONMixin):
    """Capture pose of a grid image.

    Attributes:
        point_id (str): Capture-point identifier.
        height_level (int): Height level index, 0 to 2.
        yaw (int): Camera yaw in degrees, a multiple of 15 within [-30, 30].
    """

    point_id: str
    height_level: int
    yaw: int

    class Config(BaseModelConfig):
        """Config for dataclasses."""

    def __post_init__(self) -> None:
        """Validate the pose against the capture grid."""
        if not 0 <= self.height_level < HEIGHT_LEVELS:
            msg = (
                f'height_level {self.height_level} of point {self.point_id} '
                f'is outside [0, {HEIGHT_LEVELS - 1}]'
            )
            raise ConfigError(msg)
        if self.yaw not in YAW_RANGE:
            msg = (
                f'yaw {self.yaw} of point {self.point_id} is not a multiple of '
                f'{YAW_STEP} within [{YAW_RANGE[0]}, {YAW_RANGE[-1]}]'
            )
            raise ConfigError(msg)

    def yaw_difference(self, other: PoseLabel) -> int:
        """Yaw of this pose minus the yaw of other, in degrees."""
        return self.yaw - other.yaw

    def same_point(self, other: PoseLabel) -> bool:
        """Whether both poses were captured at the same point."""
        return self.point_id == other.point_id


@dataclass
class TemplateEntry(RecordBaseModel):
    """Template image of the dataset.

    Attributes:
        path (str): Image path, relative to the manifest root or absolute.
        pose (PoseLabel): Capture pose.
        object_name (str): Name of the object seen in the template.
    """

    path: str
    pose: PoseLabel
    object_name: str = ''


@dataclass
class QueryEntry(RecordBaseModel):
    """Query image of the dataset."""

    path: str
    pose: PoseLabel


@dataclass
class DatasetManifest(RecordBaseModel):
    """Templates and queries of a pose-grid dataset.

    Attributes:
        templates (list[TemplateEntry]): Template images.
        queries (list[QueryEntry]): Query images.
        root (str): Directory relative paths are resolved against, empty for
            the working directory.
        seed (int | None): Seed of the generator of a synthetic dataset.
    """

    templates: list[TemplateEntry] = field(default_factory=list)
    queries: list[QueryEntry] = field(default_factory=list)
    root: str = ''
    seed: int | None = None

    def __post_init__(self) -> None:
        """Reject duplicate paths within the template and query lists."""
        for label, paths in (
            ('template', [entry.path for entry in self.templates]),
            ('query', [entry.path for entry in self.queries]),
        ):
            seen: set[str] = set()
            for path in paths:
                if path in seen:
                    msg = f'Duplicate {label} path {path} in manifest'
                    raise ConfigError(msg)
                seen.add(path)

    def resolve(self, path: str) -> Path:
        """Absolute location of a manifest path."""
        candidate = Path(path)
        if candidate.is_absolute() or not self.root:
            return candidate
        return Path(self.root) / candidate

    def ground_truth_cases(self) -> list[tuple[int, int]]:
        """(query index, template index) pairs sharing the template's capture point.

        A full grid yields templates * 3 heights * 5 yaws cases. Cases are
        ordered by template, then by query.
        """
        by_point: dict[str, list[int]] = {}
        for q_idx, query in enumerate(self.queries):
            by_point.setdefault(query.pose.point_id, []).append(q_idx)
        return [
            (q_idx, t_idx)
            for t_idx, template in enumerate(self.templates)
            for q_idx in by_point.get(template.pose.point_id, [])
        ]

    @classmethod
    def from_file(cls, path: str | Path) -> DatasetManifest:
        """Load a manifest file.

        JSON and YAML files hold the mapping form of this model. Text files
        hold one image per line, `#` starting a comment:

            template t_p00.pgm p00 1 0 poster
            query q_p00_h0_y-30.pgm p00 0 -30

        The root defaults to the manifest's directory.

        Raises:
            ConfigError: File missing, malformed or with invalid poses.
        """
        path = Path(path)
        if path.suffix.lower() in TEXT_MANIFEST_SUFFIXES:
            manifest = cls._from_text(path)
        else:
            manifest = Helpers.load_model(cls, path)
        if not manifest.root:
            manifest.root = str(path.parent)
        elif not Path(manifest.root).is_absolute():
            manifest.root = str(path.parent / manifest.root)
        logger.debug(
            'Loaded manifest %s: %d templates, %d queries',
            path,
            len(manifest.templates),
            len(manifest.queries),
        )
        return manifest

    @classmethod
    def _from_text(cls, path: Path) -> DatasetManifest:
        try:
            lines = path.read_text(encoding='utf-8').splitlines()
        except OSError as exc:
            msg = f'Cannot read {path}: {exc.strerror}'
            raise ConfigError(msg) from exc
        templates: list[TemplateEntry] = []
        queries: list[QueryEntry] = []
        for line_no, line in enumerate(lines, start=1):
            tokens = shlex.split(line, comments=True)
            if not tokens:
                continue
            if len(tokens) < 5 or tokens[0] not in {'template', 'query'}:  # noqa: PLR2004
                msg = f'{path}:{line_no}: expected "kind path point height yaw [object]"'
                raise ConfigError(msg)
            kind, image_path, point_id, height, yaw = tokens[:5]
            try:
                pose = PoseLabel(point_id, int(height), int(yaw))
            except ValueError as exc:
                msg = f'{path}:{line_no}: {exc}'
                raise ConfigError(msg) from exc
            if kind == 'template':
                templates.append(TemplateEntry(image_path, pose, ' '.join(tokens[5:])))
            else:
                queries.append(QueryEntry(image_path, pose))
        return cls(templates=templates, queries=queries)


@dataclass(frozen=True)
class CombinationId(DataClassORJSONMixin):
    """Detector and descriptor pair under test.

    Example:
        >>> CombinationId.parse('fast-surf').name
        'FAST-SURF'
    """

    detector: DetectorTypes
    descriptor: DescriptorTypes

    class Config(BaseModelConfig):
        """Config for dataclasses."""

    def __post_init__(self) -> None:
        """Coerce names and reject pairs outside the benchmark matrix."""
        try:
            detector = DetectorTypes(self.detector)
            descriptor = DescriptorTypes(self.descriptor)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        object.__setattr__(self, 'detector', detector)
        object.__setattr__(self, 'descriptor', descriptor)
        if (detector, descriptor) in EXCLUDED_COMBINATIONS:
            msg = f'{detector}-{descriptor} is not part of the combination matrix'
            raise ConfigError(msg)

    @property
    def name(self) -> str:
        """`DETECTOR-DESCRIPTOR` name."""
        return f'{self.detector.value}-{self.descriptor.value}'

    @classmethod
    def parse(cls, text: str) -> CombinationId:
        """Parse a `DETECTOR-DESCRIPTOR` name, case-insensitively.

        Raises:
            ConfigError: Unknown method or excluded pair.
        """
        detector, sep, descriptor = text.strip().partition('-')
        if not sep:
            msg = f'Combination {text!r} must be written as DETECTOR-DESCRIPTOR'
            raise ConfigError(msg)
        return cls(detector, descriptor)  # type: ignore[arg-type]

    def __str__(self) -> str:
        """Return the combination name."""
        return self.name


@dataclass
class AccuracyCounts(RecordBaseModel):
    """Confusion counts over the ground-truth cases."""

    tp: int = 0
    tn: int = 0
    fp: int = 0
    fn: int = 0

    @property
    def total(self) -> int:
        """Number of evaluated cases."""
        return self.tp + self.tn + self.fp + self.fn

    @property
    def percent(self) -> float:
        """(tp + tn) / total * 100, 0 for no cases."""
        if self.total == 0:
            return 0.0
        return (self.tp + self.tn) / self.total * 100.0


@dataclass
class PairRecord(RecordBaseModel):
    """Outcome of matching one query against one candidate template.

    Attributes:
        query (str): Query path as listed in the manifest.
        template (str): Template path as listed in the manifest.
        query_pose (PoseLabel): Query capture pose.
        template_pose (PoseLabel): Template capture pose.
        stats (MatchStats): Match-quality metrics of the surviving matches.
        histogram_score (float): Histogram similarity of the two images.
        matched (bool): Result of the correct-match count decision.
        accepted (bool): Final decision after the optional histogram gate.
        pair_time (float): Seconds attributed to this pair.
    """

    query: str
    template: str
    query_pose: PoseLabel
    template_pose: PoseLabel
    stats: MatchStats
    histogram_score: float = 0.0
    matched: bool = False
    accepted: bool = False
    pair_time: float = 0.0

    @property
    def key(self) -> tuple[str, str]:
        """(query, template) key."""
        return (self.query, self.template)


@dataclass
class LocationCube(RecordBaseModel):
    """Axis-aligned box spanning the candidate camera positions of a match.

    Attributes:
        corners (list[list[float]]): 8 corners in metres, x varying fastest.
        center (list[float]): Box centre, the point estimate.
        candidates (list[list[float]]): Candidate positions the box spans.
    """

    corners: list[list[float]]
    center: list[float]
    candidates: list[list[float]]

    @classmethod
    def from_candidates(
        cls, candidates: list[tuple[float, float, float]]
    ) -> LocationCube:
        """Bounding box of candidate positions.

        Raises:
            ConfigError: No candidates.
        """
        if not candidates:
            msg = 'A location cube needs at least one candidate position'
            raise ConfigError(msg)
        lows = [min(c[axis] for c in candidates) for axis in range(3)]
        highs = [max(c[axis] for c in candidates) for axis in range(3)]
        corners = [
            [
                highs[0] if i & 1 else lows[0],
                highs[1] if i & 2 else lows[1],
                highs[2] if i & 4 else lows[2],
            ]
            for i in range(8)
        ]
        center = [(lo + hi) / 2 for lo, hi in zip(lows, highs, strict=True)]
        return cls(corners, center, [list(c) for c in candidates])

    @property
    def size(self) -> tuple[float, float, float]:
        """Edge lengths along x, y and z."""
        low, high = self.corners[0], self.corners[7]
        return (high[0] - low[0], high[1] - low[1], high[2] - low[2])

    def contains(self, point: tuple[float, float, float], tol: float = 1e-9) -> bool:
        """Whether a position lies inside the box."""
        low, high = self.corners[0], self.corners[7]
        return all(
            low[axis] - tol <= point[axis] <= high[axis] + tol for axis in range(3)
        )


@dataclass
class QueryLocalization(RecordBaseModel):
    """Location cube of a query, taken from its best accepted template."""

    query: str
    template: str
    pose: PoseLabel
    cube: LocationCube


@dataclass
class CombinationResult(RecordBaseModel):
    """Benchmark outcome of one detector/descriptor combination.

    Attributes:
        combination (CombinationId): Detector and descriptor.
        total_time (float): Seconds spent detecting, describing, matching and
            deciding, image decoding excluded.
        accuracy (float): Accuracy percentage over the ground-truth cases.
        ground_truth_cases (int): Number of ground-truth cases.
        correct_matches_per_second (float): Surviving matches per second.
        total_matches (int): Surviving matches over all pairs.
        seconds_per_match (float): Seconds per surviving match, 0 without matches.
        counts (AccuracyCounts): Confusion counts.
        cross_point_matches (int): Accepted pairs of different capture points.
        pairs (list[PairRecord]): Per-pair records in processing order.
        localizations (list[QueryLocalization]): Location cube per accepted
            query, empty unless a grid geometry is configured.
    """

    combination: CombinationId
    total_time: float
    accuracy: float
    ground_truth_cases: int
    correct_matches_per_second: float
    total_matches: int = 0
    seconds_per_match: float = 0.0
    counts: AccuracyCounts = field(default_factory=AccuracyCounts)
    cross_point_matches: int = 0
    pairs: list[PairRecord] = field(default_factory=list)
    localizations: list[QueryLocalization] = field(default_factory=list)

    def __post_init__(self) -> None:
        """Check metric ranges."""
        in_range = 0.0 <= self.accuracy <= 100.0  # noqa: PLR2004
        if not in_range or math.isnan(self.accuracy):
            msg = f'Accuracy {self.accuracy} is outside [0, 100]'
            raise ConfigError(msg)

    def pair_stats(self) -> dict[tuple[str, str], MatchStats]:
        """MatchStats keyed by (query, template)."""
        return {pair.key: pair.stats for pair in self.pairs}

    def timeless_dict(self) -> dict[str, Any]:
        """Serialized form with every time-dependent field removed."""
        data = self.to_dict()
        for key in ('total_time', 'correct_matches_per_second', 'seconds_per_match'):
            data.pop(key)
        for pair in data['pairs']:
            pair.pop('pair_time')
        return data

    def comparable(self, other: CombinationResult) -> bool:
        """Whether two results agree in everything but timing."""
        return self.timeless_dict() == other.timeless_dict()


@dataclass
class StatsDump(RecordBaseModel):
    """Full per-pair results of a run, the input of `cmd_report`.

    Attributes:
        config_hash (str): Digest of the result-relevant configuration.
        seed (int): Seed of the binary test-pair pattern.
        mode (TimingMode): Timing or parallel run.
        results (list[CombinationResult]): One entry per combination, in
            matrix order.
        decode_time (float): Seconds spent decoding images.
        elimination_time (float): Seconds spent in query elimination.
    """

    config_hash: str
    seed: int
    mode: TimingMode
    results: list[CombinationResult] = field(default_factory=list)
    decode_time: float = 0.0
    elimination_time: float = 0.0

    @classmethod
    def from_file(cls, path: str | Path) -> StatsDump:
        """Load a dump written by `cmd_run`.

        Raises:
            ConfigError: File missing or not a stats dump.
        """
        return Helpers.load_model(cls, path)


@dataclass
class RunMetadata(RecordBaseModel):
    """Provenance of a run.

    Attributes:
        config_hash (str): Digest of the result-relevant configuration.
        seed (int): Seed of the binary test-pair pattern.
        mode (TimingMode): Timing or parallel run.
        config (RunConfig): Effective configuration.
        versions (dict[str, str]): Package and library versions.
        decode_time (float): Seconds spent decoding images.
        elimination_time (float): Seconds spent in query elimination.
        kept_queries (list[str]): Queries passing the keypoint-count band.
        rejected_queries (list[str]): Queries outside the band.
        combinations (list[str]): Combinations run, in matrix order.
    """

    config_hash: str
    seed: int
    mode: TimingMode
    config: RunConfig
    versions: dict[str, str] = field(default_factory=dict)
    decode_time: float = 0.0
    elimination_time: float = 0.0
    kept_queries: list[str] = field(default_factory=list)
    rejected_queries: list[str] = field(default_factory=list)
    combinations: list[str] = field(default_factory=list)


@dataclass
class CachedPair(RecordBaseModel):
    """Cached outcome of one image pair, one line of the stats cache file.

    Attributes:
        key (str): Query digest, template digest, combination and config hash.
        stats (MatchStats): Match-quality metrics.
        matched (bool): Correct-match count decision.
        pair_time (float): Seconds the pair took when it was computed.
    """

    key: str
    stats: MatchStats
    matched: bool
    pair_time: float = 0.0
