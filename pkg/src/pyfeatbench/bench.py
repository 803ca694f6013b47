"""Benchmark pipeline: query elimination, the combination run loop and metrics.

A run works through the pose-grid dataset described by a `DatasetManifest`:

1. Every image is decoded once (`decode_time`).
2. Queries whose FAST keypoint count lies outside the hysteresis band are
   eliminated, and every kept query keeps only the templates whose histogram
   similarity exceeds the prefilter threshold (`elimination_time`).
3. For each combination the candidate pairs are detected, described, matched
   and decided. The time of these steps is the combination's `total_time`;
   it is attributed to the pairs, so the pair times add up to it. A
   combination left without pairs by elimination is timed by the elimination
   stage instead.
4. Decisions are scored against the ground-truth cases of the manifest.

Timing runs use one worker. With more workers the queries are spread over a
process pool; results are identical, only the times lose their meaning.
"""

from __future__ import annotations

import logging
import math
import time
from collections.abc import Callable, Iterable, Mapping, Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from pyfeatbench.base_features.descriptor_base import DescriptorSet
from pyfeatbench.combination_map import (
    combination_matrix,
    get_descriptor,
    get_detector,
    select_combinations,
)
from pyfeatbench.const import (
    FAST_ARC,
    FAST_THRESHOLD,
    HEIGHT_LEVELS,
    YAW_RANGE,
    YAW_STEP,
    YAW_TOLERANCE,
    AccuracyPolicy,
    CandidatePolicy,
    HistogramMethod,
)
from pyfeatbench.detectors.fast import fast_detect
from pyfeatbench.imgcore import (
    Histogram,
    Image,
    compare_histograms,
    intensity_histogram,
    load_image,
)
from pyfeatbench.match import correct_matches, image_pair_decision, match_stats
from pyfeatbench.models.bench_models import (
    AccuracyCounts,
    CachedPair,
    CombinationId,
    CombinationResult,
    DatasetManifest,
    LocationCube,
    PairRecord,
    PoseLabel,
    QueryLocalization,
    RunMetadata,
    StatsDump,
)
from pyfeatbench.models.config_models import (
    DescriptorParams,
    DetectorParams,
    GridGeometry,
    MatcherParams,
    RunConfig,
)
from pyfeatbench.models.feature_models import Keypoint, MatchStats
from pyfeatbench.stats_cache import PairStatsCache, pair_key
from pyfeatbench.utils.errors import FeatBenchError, ParameterError, PipelineError
from pyfeatbench.utils.helpers import Helpers, StageTimer, Validators
from pyfeatbench.utils.logs import LibraryLogger

logger = logging.getLogger(__name__)

__all__ = [
    'BenchmarkRunner',
    'combination_matrix',
    'compute_accuracy',
    'histogram_prefilter',
    'keypoint_count_filter',
    'localize',
    'matches_per_second',
    'repeatability',
    'run_combination',
]

CandidateBuilder = Callable[[PoseLabel], Iterable[tuple[int, int]]]
"""Maps a matched pose to the (height level, yaw) poses bounding the cube."""

PointMapping = Callable[[np.ndarray, np.ndarray], tuple[np.ndarray, np.ndarray]]
"""Maps (xs, ys) of one image into another."""


def keypoint_count_filter(
    queries: Mapping[str, Image],
    lower: int,
    upper: int,
    threshold: int = FAST_THRESHOLD,
    arc: int = FAST_ARC,
) -> tuple[list[str], list[str]]:
    """Split queries by their FAST keypoint count.

    FAST is used whatever combination is under test. A query is kept when
    its count lies within [lower, upper].

    Args:
        queries (Mapping[str, Image]): Query images by name.
        lower (int): Smallest accepted keypoint count.
        upper (int): Largest accepted keypoint count.
        threshold (int): FAST intensity threshold.
        arc (int): FAST arc length.

    Returns:
        tuple[list[str], list[str]]: Kept and rejected names, in input order.

    Raises:
        ParameterError: lower >= upper.
    """
    if lower >= upper:
        msg = f'Keypoint band needs lower < upper, got [{lower}, {upper}]'
        raise ParameterError(msg)
    kept: list[str] = []
    rejected: list[str] = []
    for name, img in queries.items():
        count = len(fast_detect(img, threshold, arc))
        if lower <= count <= upper:
            kept.append(name)
        else:
            LibraryLogger.log_elimination(logger, name, count, lower, upper)
            rejected.append(name)
    return kept, rejected


def _as_histogram(item: Image | Histogram) -> Histogram:
    return item if isinstance(item, Histogram) else intensity_histogram(item)


def histogram_scores(
    query: Image | Histogram,
    templates: Sequence[Image | Histogram],
    method: HistogramMethod = HistogramMethod.CORRELATION,
) -> np.ndarray:
    """Histogram similarity of a query with every template."""
    query_hist = _as_histogram(query)
    return np.array(
        [compare_histograms(query_hist, _as_histogram(t), method) for t in templates],
        dtype=np.float64,
    )


def histogram_prefilter(
    query: Image | Histogram,
    templates: Sequence[Image | Histogram],
    threshold: float,
    method: HistogramMethod = HistogramMethod.CORRELATION,
) -> list[int]:
    """Indices of the templates whose histogram similarity exceeds threshold.

    Raises:
        ParameterError: Threshold outside [0, 1].
    """
    Validators.require_range('threshold', threshold, 0.0, 1.0)
    scores = histogram_scores(query, templates, method)
    return np.flatnonzero(scores > threshold).tolist()


def matches_per_second(total_matches: int, total_time: float) -> float:
    """Correct matches per second of pipeline time.

    Raises:
        ParameterError: total_time is not positive.
    """
    if not total_time > 0:
        msg = f'total_time must be positive, got {total_time}'
        raise ParameterError(msg)
    return total_matches / total_time


def is_positive_case(
    query: PoseLabel,
    template: PoseLabel,
    policy: AccuracyPolicy = AccuracyPolicy.POSE_TOLERANT,
    yaw_tolerance: int = YAW_TOLERANCE,
) -> bool:
    """Whether a query should be recognised as showing a template."""
    if not query.same_point(template):
        return False
    if AccuracyPolicy(policy) is AccuracyPolicy.STRICT:
        return query.height_level == template.height_level and query.yaw == template.yaw
    return abs(query.yaw_difference(template)) <= yaw_tolerance


def compute_accuracy(
    decisions: Sequence[bool],
    manifest: DatasetManifest,
    policy: AccuracyPolicy = AccuracyPolicy.POSE_TOLERANT,
    yaw_tolerance: int = YAW_TOLERANCE,
) -> tuple[AccuracyCounts, float]:
    """Confusion counts and accuracy percentage over the ground-truth cases.

    Args:
        decisions (Sequence[bool]): One decision per case of
            `manifest.ground_truth_cases()`, in the same order.
        manifest (DatasetManifest): Dataset the decisions refer to.
        policy (AccuracyPolicy): Predicate labelling a case positive.
        yaw_tolerance (int): Yaw tolerance of the pose-tolerant policy.

    Returns:
        tuple[AccuracyCounts, float]: Counts and (tp + tn) / total * 100.

    Raises:
        ParameterError: Decision count differs from the case count.
    """
    cases = manifest.ground_truth_cases()
    if len(decisions) != len(cases):
        msg = f'Expected {len(cases)} decisions, got {len(decisions)}'
        raise ParameterError(msg)
    counts = AccuracyCounts()
    for decision, (q_idx, t_idx) in zip(decisions, cases, strict=True):
        positive = is_positive_case(
            manifest.queries[q_idx].pose,
            manifest.templates[t_idx].pose,
            policy,
            yaw_tolerance,
        )
        if decision and positive:
            counts.tp += 1
        elif decision:
            counts.fp += 1
        elif positive:
            counts.fn += 1
        else:
            counts.tn += 1
    return counts, counts.percent


def candidate_poses(pose: PoseLabel, policy: CandidatePolicy) -> list[tuple[int, int]]:
    """(height level, yaw) poses bounding the location cube of a matched pose."""
    match CandidatePolicy(policy):
        case CandidatePolicy.SIX_POINT:
            neighbour = pose.yaw - YAW_STEP if pose.yaw > 0 else pose.yaw + YAW_STEP
            yaws = [pose.yaw, neighbour]
        case CandidatePolicy.YAW_WINDOW:
            yaws = list(YAW_RANGE)
        case CandidatePolicy.SINGLE:
            yaws = [pose.yaw]
    return [(level, yaw) for level in range(HEIGHT_LEVELS) for yaw in yaws]


def localize(
    pose: PoseLabel,
    grid: GridGeometry,
    policy: CandidatePolicy | CandidateBuilder | None = None,
) -> LocationCube:
    """Location cube of a matched template pose.

    Args:
        pose (PoseLabel): Pose of the matched template.
        grid (GridGeometry): Physical layout of the capture grid.
        policy (CandidatePolicy | CandidateBuilder | None): Candidate-set
            construction, the grid's own policy when None.

    Raises:
        ConfigError: Pose absent from the grid geometry.
    """
    if policy is None:
        policy = grid.candidate_policy
    if callable(policy):
        poses = list(policy(pose))
    else:
        poses = candidate_poses(pose, policy)
    candidates = [grid.position(pose.point_id, level, yaw) for level, yaw in poses]
    return LocationCube.from_candidates(candidates)


def repeatability(
    kps_a: Sequence[Keypoint],
    kps_b: Sequence[Keypoint],
    mapping: np.ndarray | PointMapping,
    tol: float = 1.5,
) -> float:
    """Fraction of keypoints of a that have a counterpart in b.

    Args:
        kps_a (Sequence[Keypoint]): Keypoints of the first image.
        kps_b (Sequence[Keypoint]): Keypoints of the second image.
        mapping: 2x3 affine matrix, or a function of (xs, ys), taking
            positions of the first image into the second.
        tol (float): Largest pixel distance of a counterpart.

    Returns:
        float: Within [0, 1], 0 when a has no keypoints.
    """
    if not kps_a or not kps_b:
        return 0.0
    xs = np.array([kp.x for kp in kps_a], dtype=np.float64)
    ys = np.array([kp.y for kp in kps_a], dtype=np.float64)
    if callable(mapping):
        mx, my = mapping(xs, ys)
    else:
        affine = np.asarray(mapping, dtype=np.float64)
        mx = affine[0, 0] * xs + affine[0, 1] * ys + affine[0, 2]
        my = affine[1, 0] * xs + affine[1, 1] * ys + affine[1, 2]
    tree = cKDTree(np.array([(kp.x, kp.y) for kp in kps_b], dtype=np.float64))
    distances, _ = tree.query(np.column_stack([mx, my]), k=1)
    return float(np.mean(distances <= tol))


@dataclass(frozen=True)
class ImageFeatures:
    """Kept keypoints and descriptors of one image with the time they took."""

    keypoints: list[Keypoint]
    descriptors: DescriptorSet
    seconds: float


@dataclass(frozen=True)
class FeatureSettings:
    """Everything a worker needs to process images for one combination."""

    combination: CombinationId
    detector: DetectorParams
    descriptor: DescriptorParams
    matcher: MatcherParams
    seed: int

    def extract(self, img: Image, path: str) -> ImageFeatures:
        """Detect and describe an image.

        Raises:
            PipelineError: Detection or description failed.
        """
        start = time.perf_counter_ns()
        try:
            detector = get_detector(self.combination.detector, self.detector)
            extractor = get_descriptor(
                self.combination.descriptor, self.descriptor, self.seed
            )
            keypoints, descriptors = extractor.describe(img, detector.detect(img))
        except FeatBenchError as exc:
            msg = f'{self.combination} failed: {exc}'
            raise PipelineError(msg, path) from exc
        seconds = (time.perf_counter_ns() - start) / 1e9
        return ImageFeatures(keypoints, descriptors, seconds)

    def compare(
        self, query: ImageFeatures, template: ImageFeatures
    ) -> tuple[MatchStats, float]:
        """Correct-match statistics of a pair and the seconds they took."""
        start = time.perf_counter_ns()
        matches = correct_matches(query.descriptors, template.descriptors, self.matcher)
        stats = match_stats(matches, query.keypoints, template.keypoints)
        return stats, (time.perf_counter_ns() - start) / 1e9


@dataclass(frozen=True)
class _QueryTask:
    settings: FeatureSettings
    path: str
    image: Image
    templates: list[ImageFeatures]


@dataclass(frozen=True)
class _QueryOutcome:
    seconds: float
    comparisons: list[tuple[MatchStats, float]]


def _extract_template(task: tuple[FeatureSettings, str, Image]) -> ImageFeatures:
    settings, path, image = task
    return settings.extract(image, path)


def _run_query(task: _QueryTask) -> _QueryOutcome:
    query = task.settings.extract(task.image, task.path)
    comparisons = [task.settings.compare(query, template) for template in task.templates]
    return _QueryOutcome(query.seconds, comparisons)


@dataclass
class PreparedDataset:
    """Decoded images and elimination results shared by the combinations of a run.

    Attributes:
        images (dict[str, Image]): Decoded images by manifest path.
        digests (dict[str, str]): Content digest of each image.
        kept (list[int]): Query indices passing the keypoint-count band.
        rejected (list[int]): Query indices outside the band.
        scores (dict[int, np.ndarray]): Histogram similarity of each kept
            query with every template.
        candidates (dict[int, list[int]]): Templates each kept query is
            matched against.
    """

    images: dict[str, Image] = field(default_factory=dict)
    digests: dict[str, str] = field(default_factory=dict)
    kept: list[int] = field(default_factory=list)
    rejected: list[int] = field(default_factory=list)
    scores: dict[int, np.ndarray] = field(default_factory=dict)
    candidates: dict[int, list[int]] = field(default_factory=dict)


class BenchmarkRunner:
    """Runs combinations over a dataset with a fixed configuration.

    Decoding and elimination happen once, on the first combination, and are
    shared by all combinations of the run.

    Args:
        manifest (DatasetManifest): Dataset to evaluate.
        config (RunConfig): Run configuration.

    Attributes:
        manifest (DatasetManifest): Dataset to evaluate.
        config (RunConfig): Run configuration.
        decode_timer (StageTimer): Time spent decoding images.
        elimination_timer (StageTimer): Time spent eliminating queries and
            prefiltering templates.
        cache (PairStatsCache | None): Pair statistics cache, when configured.
    """

    __slots__ = (
        '_config_hash',
        '_prepared',
        'cache',
        'config',
        'decode_timer',
        'elimination_timer',
        'manifest',
    )

    def __init__(self, manifest: DatasetManifest, config: RunConfig) -> None:
        """Initialize the runner."""
        self.manifest = manifest
        self.config = config
        self.decode_timer = StageTimer('decode')
        self.elimination_timer = StageTimer('elimination')
        self.cache = PairStatsCache(config.cache_dir) if config.cache_dir else None
        self._config_hash = config.config_hash()
        self._prepared: PreparedDataset | None = None

    @property
    def config_hash(self) -> str:
        """Digest of the result-relevant configuration."""
        return self._config_hash

    @property
    def kept_queries(self) -> list[str]:
        """Query paths passing the keypoint-count band."""
        prepared = self.prepare()
        return [self.manifest.queries[i].path for i in prepared.kept]

    @property
    def rejected_queries(self) -> list[str]:
        """Query paths outside the keypoint-count band."""
        prepared = self.prepare()
        return [self.manifest.queries[i].path for i in prepared.rejected]

    def _load(self, path: str) -> Image:
        try:
            return load_image(self.manifest.resolve(path))
        except FeatBenchError as exc:
            msg = f'Cannot load image: {exc}'
            raise PipelineError(msg, path) from exc

    def prepare(self) -> PreparedDataset:
        """Decode all images and run both elimination stages, once."""
        if self._prepared is not None:
            return self._prepared
        prepared = PreparedDataset()
        paths = [t.path for t in self.manifest.templates]
        paths += [q.path for q in self.manifest.queries]
        with self.decode_timer:
            for path in paths:
                if path not in prepared.images:
                    prepared.images[path] = self._load(path)
        for path, img in prepared.images.items():
            prepared.digests[path] = Helpers.array_digest(img.data)
        LibraryLogger.log_stage_time(
            logger, 'Decoding', f'{len(paths)} images', self.decode_timer.seconds
        )

        elimination = self.config.elimination
        detector = self.config.detector
        with self.elimination_timer:
            queries = {q.path: prepared.images[q.path] for q in self.manifest.queries}
            kept, _ = keypoint_count_filter(
                queries,
                elimination.lower,
                elimination.upper,
                detector.fast_threshold,
                detector.fast_arc,
            )
            kept_paths = set(kept)
            templates = [
                intensity_histogram(prepared.images[t.path])
                for t in self.manifest.templates
            ]
            for q_idx, query in enumerate(self.manifest.queries):
                if query.path not in kept_paths:
                    prepared.rejected.append(q_idx)
                    continue
                prepared.kept.append(q_idx)
                scores = histogram_scores(
                    prepared.images[query.path], templates, elimination.prefilter_method
                )
                prepared.scores[q_idx] = scores
                candidates = np.flatnonzero(scores > elimination.prefilter_threshold)
                prepared.candidates[q_idx] = candidates.tolist()
                LibraryLogger.log_prefilter(
                    logger, query.path, candidates.size, len(templates)
                )
        logger.info(
            'Kept %d of %d queries, %d candidate pairs',
            len(prepared.kept),
            len(self.manifest.queries),
            sum(len(c) for c in prepared.candidates.values()),
        )
        self._prepared = prepared
        return prepared

    def settings(self, combination: CombinationId) -> FeatureSettings:
        """Feature settings of a combination under this configuration."""
        return FeatureSettings(
            combination,
            self.config.detector,
            self.config.descriptor,
            self.config.matcher,
            self.config.seed,
        )

    def _gate(self, score: float) -> bool:
        accuracy = self.config.accuracy
        return not accuracy.histogram_gate or score > accuracy.acceptance_threshold

    def _key(self, combination: CombinationId, q_idx: int, t_idx: int) -> str:
        prepared = self.prepare()
        return pair_key(
            prepared.digests[self.manifest.queries[q_idx].path],
            prepared.digests[self.manifest.templates[t_idx].path],
            combination,
            self._config_hash,
        )

    def _cached_queries(self, combination: CombinationId) -> dict[int, list[CachedPair]]:
        cache = self.cache
        if cache is None or not self.config.reuse_cache:
            return {}
        if self.config.workers == 1:
            logger.debug('Timing run, cached pair statistics are not reused')
            return {}
        prepared = self.prepare()
        cached: dict[int, list[CachedPair]] = {}
        for q_idx in prepared.kept:
            keys = [self._key(combination, q_idx, t) for t in prepared.candidates[q_idx]]
            if keys and all(key in cache for key in keys):
                cached[q_idx] = [cache[key] for key in keys]
        logger.debug('%d queries served from the stats cache', len(cached))
        return cached

    def _compute(
        self, settings: FeatureSettings, queries: list[int]
    ) -> tuple[dict[int, ImageFeatures], dict[int, _QueryOutcome]]:
        prepared = self.prepare()
        needed = sorted({t for q in queries for t in prepared.candidates[q]})
        paths = [self.manifest.templates[t].path for t in needed]
        template_tasks = [(settings, path, prepared.images[path]) for path in paths]
        if self.config.workers > 1:
            with ProcessPoolExecutor(max_workers=self.config.workers) as pool:
                extracted = list(pool.map(_extract_template, template_tasks))
                features = dict(zip(needed, extracted, strict=True))
                tasks = self._query_tasks(settings, queries, features)
                outcomes = dict(zip(queries, pool.map(_run_query, tasks), strict=True))
        else:
            extracted = [_extract_template(task) for task in template_tasks]
            features = dict(zip(needed, extracted, strict=True))
            tasks = self._query_tasks(settings, queries, features)
            outcomes = dict(zip(queries, map(_run_query, tasks), strict=True))
        return features, outcomes

    def _query_tasks(
        self,
        settings: FeatureSettings,
        queries: list[int],
        features: dict[int, ImageFeatures],
    ) -> list[_QueryTask]:
        prepared = self.prepare()
        return [
            _QueryTask(
                settings,
                self.manifest.queries[q].path,
                prepared.images[self.manifest.queries[q].path],
                [features[t] for t in prepared.candidates[q]],
            )
            for q in queries
        ]

    def run_combination(self, combination: CombinationId) -> CombinationResult:
        """Evaluate one combination.

        Raises:
            PipelineError: An image failed to load, detect or describe; the
                message names its path.
        """
        prepared = self.prepare()
        settings = self.settings(combination)
        cached = self._cached_queries(combination)
        to_compute = [
            q for q in prepared.kept if prepared.candidates[q] and q not in cached
        ]
        features, outcomes = self._compute(settings, to_compute)

        min_correct = self.config.matcher.min_correct
        pairs: list[PairRecord] = []
        accepted: dict[tuple[int, int], PairRecord] = {}
        new_entries: list[CachedPair] = []
        charged: set[int] = set()
        for q_idx in prepared.kept:
            candidates = prepared.candidates[q_idx]
            if not candidates:
                continue
            query = self.manifest.queries[q_idx]
            outcome = outcomes.get(q_idx)
            for position, t_idx in enumerate(candidates):
                template = self.manifest.templates[t_idx]
                key = self._key(combination, q_idx, t_idx)
                if outcome is None:
                    entry = cached[q_idx][position]
                    stats, matched = entry.stats, entry.matched
                    pair_time = entry.pair_time
                else:
                    stats, match_seconds = outcome.comparisons[position]
                    pair_time = match_seconds + outcome.seconds / len(candidates)
                    if t_idx not in charged:
                        charged.add(t_idx)
                        pair_time += features[t_idx].seconds
                    matched = image_pair_decision(stats, min_correct)
                    new_entries.append(CachedPair(key, stats, matched, pair_time))
                score = float(prepared.scores[q_idx][t_idx])
                record = PairRecord(
                    query.path,
                    template.path,
                    query.pose,
                    template.pose,
                    stats,
                    histogram_score=score,
                    matched=matched,
                    accepted=matched and self._gate(score),
                    pair_time=pair_time,
                )
                pairs.append(record)
                if record.accepted:
                    accepted[(q_idx, t_idx)] = record
        if self.cache is not None:
            self.cache.store(new_entries)
        return self._result(combination, pairs, accepted)

    def _result(
        self,
        combination: CombinationId,
        pairs: list[PairRecord],
        accepted: dict[tuple[int, int], PairRecord],
    ) -> CombinationResult:
        accuracy = self.config.accuracy
        decisions = [case in accepted for case in self.manifest.ground_truth_cases()]
        counts, percent = compute_accuracy(
            decisions, self.manifest, accuracy.policy, accuracy.yaw_tolerance
        )
        total_time = math.fsum(pair.pair_time for pair in pairs)
        if not pairs:
            total_time = self.elimination_timer.seconds
            logger.warning(
                'Combination %s compared no pairs, timed by elimination only',
                combination.name,
            )
        total_matches = sum(pair.stats.n_correct for pair in pairs)
        rate = matches_per_second(total_matches, total_time)
        cross_point = sum(
            1
            for pair in accepted.values()
            if not pair.query_pose.same_point(pair.template_pose)
        )
        LibraryLogger.log_stage_time(logger, 'Combination', combination.name, total_time)
        return CombinationResult(
            combination,
            total_time,
            percent,
            counts.total,
            rate,
            total_matches=total_matches,
            seconds_per_match=total_time / total_matches if total_matches else 0.0,
            counts=counts,
            cross_point_matches=cross_point,
            pairs=pairs,
            localizations=self._localizations(accepted),
        )

    def _localizations(
        self, accepted: dict[tuple[int, int], PairRecord]
    ) -> list[QueryLocalization]:
        grid = self.config.grid
        if grid is None:
            return []
        best: dict[int, tuple[int, PairRecord]] = {}
        for (q_idx, t_idx), record in sorted(accepted.items()):
            current = best.get(q_idx)
            if current is None or record.stats.n_correct > current[1].stats.n_correct:
                best[q_idx] = (t_idx, record)
        return [
            QueryLocalization(
                record.query,
                record.template,
                record.template_pose,
                localize(record.template_pose, grid),
            )
            for _, (_, record) in sorted(best.items())
        ]

    def run(self, combinations: Sequence[str | CombinationId] | None = None) -> StatsDump:
        """Evaluate combinations in matrix order.

        Args:
            combinations (Sequence[str | CombinationId] | None): Selection,
                the configured one when None.
        """
        selected = select_combinations(
            combinations if combinations is not None else self.config.combinations
        )
        self.prepare()
        results = [self.run_combination(combination) for combination in selected]
        return StatsDump(
            self._config_hash,
            self.config.seed,
            self.config.timing_mode,
            results,
            decode_time=self.decode_timer.seconds,
            elimination_time=self.elimination_timer.seconds,
        )

    def metadata(self, dump: StatsDump) -> RunMetadata:
        """Provenance record of a finished run."""
        return RunMetadata(
            self._config_hash,
            self.config.seed,
            self.config.timing_mode,
            self.config,
            versions=Helpers.package_versions(),
            decode_time=dump.decode_time,
            elimination_time=dump.elimination_time,
            kept_queries=self.kept_queries,
            rejected_queries=self.rejected_queries,
            combinations=[result.combination.name for result in dump.results],
        )


def run_combination(
    combo: CombinationId, manifest: DatasetManifest, config: RunConfig
) -> CombinationResult:
    """Evaluate one combination over a dataset, eliminating queries first."""
    return BenchmarkRunner(manifest, config).run_combination(combo)
