"""Tests for query elimination, accuracy, localization and the run loop."""
import logging
import math

import numpy as np
import pytest

from pyfeatbench.bench import (
    BenchmarkRunner,
    candidate_poses,
    compute_accuracy,
    histogram_prefilter,
    histogram_scores,
    is_positive_case,
    keypoint_count_filter,
    localize,
    matches_per_second,
    repeatability,
    run_combination,
)

from pyfeatbench.const import (
    MANIFEST_FILE,
    AccuracyPolicy,
    CandidatePolicy,
    HistogramMethod,
    TimingMode,
)
from pyfeatbench.imgcore import save_pgm
from pyfeatbench.models.bench_models import CombinationId, DatasetManifest
from pyfeatbench.models.config_models import (
    AccuracyParams,
    EliminationParams,
    GridGeometry,
    MatcherParams,
    RunConfig,
)
from pyfeatbench.models.feature_models import Keypoint
from pyfeatbench.stats_cache import PairStatsCache
from pyfeatbench.synthetic import generate_pose_grid, synthetic_grid
from pyfeatbench.utils.errors import ConfigError, ParameterError, PipelineError
from base_test_cases import TestBase
from defaults import TestDefaults

logger = logging.getLogger(__name__)

FAST_BRIEF = 'FAST-BRIEF'


class TestElimination(TestBase):
    """Keypoint-count band and histogram prefilter."""

    def test_keypoint_band(self):
        """Queries outside the band are rejected and logged."""
        queries = {'flat.pgm': TestDefaults.constant(), 'busy.pgm': self.textured()}
        kept, rejected = keypoint_count_filter(queries, 1, 10**6)
        assert kept == ['busy.pgm']
        assert rejected == ['flat.pgm']
        assert 'Query flat.pgm eliminated: 0 FAST keypoints' in self.caplog.text

    def test_band_is_inclusive(self):
        """Counts equal to a bound are kept."""
        img = TestDefaults.white_square()
        kept, _ = keypoint_count_filter({'square': img}, 4, 5)
        assert kept == ['square']
        kept, _ = keypoint_count_filter({'square': img}, 0, 4)
        assert kept == ['square']
        kept, _ = keypoint_count_filter({'square': img}, 5, 9)
        assert kept == []

    def test_band_order(self):
        """The lower bound must be below the upper one."""
        with pytest.raises(ParameterError):
            keypoint_count_filter({}, 40, 40)

    def test_wider_band_keeps_more(self):
        """Widening the band never rejects a query that was kept."""
        queries = {
            f'q{i}': TestDefaults.textured(self.rng, 64, 64, sigma=sigma)
            for i, sigma in enumerate((1.0, 1.5, 2.0, 3.0, 4.0))
        }
        queries['flat'] = TestDefaults.constant(64, 64)
        previous: set[str] = set()
        for lower, upper in [(40, 60), (20, 120), (5, 400), (0, 10**6)]:
            kept, rejected = keypoint_count_filter(queries, lower, upper)
            assert set(kept) >= previous
            assert sorted(kept + rejected) == sorted(queries)
            previous = set(kept)
        assert previous == set(queries)

    def test_prefilter(self):
        """Only templates above the threshold are kept."""
        query = self.textured(64, 64)
        templates = [TestDefaults.constant(64, 64, 10), query, self.textured(64, 64)]
        scores = histogram_scores(query, templates, HistogramMethod.INTERSECTION)
        assert scores[1] == pytest.approx(1.0)
        assert scores[0] < scores[2]
        kept = histogram_prefilter(query, templates, 0.9, HistogramMethod.INTERSECTION)
        assert 1 in kept
        assert 0 not in kept
        with pytest.raises(ParameterError):
            histogram_prefilter(query, templates, 1.5)


class TestMetrics(TestBase):
    """Throughput and accuracy."""

    def test_matches_per_second(self):
        """Matches divided by seconds; time must be positive."""
        assert matches_per_second(100, 4.0) == 25.0
        assert matches_per_second(0, 1.0) == 0.0
        with pytest.raises(ParameterError):
            matches_per_second(10, 0.0)

    def test_positive_case(self):
        """Pose-tolerant cases accept any yaw within the tolerance."""
        template = TestDefaults.pose()
        turned = TestDefaults.pose(height_level=0, yaw=30)
        assert is_positive_case(turned, template)
        assert not is_positive_case(turned, template, yaw_tolerance=15)
        assert not is_positive_case(turned, template, AccuracyPolicy.STRICT)
        assert is_positive_case(template, template, AccuracyPolicy.STRICT)
        assert not is_positive_case(TestDefaults.pose('p01'), template)

    def test_accuracy(self):
        """Counts over the template-by-query ground-truth cases."""
        manifest = TestDefaults.grid_manifest()
        cases = manifest.ground_truth_cases()
        assert len(cases) == 30
        counts, percent = compute_accuracy([True] * 30, manifest)
        assert (counts.tp, counts.fp, percent) == (30, 0, 100.0)
        counts, percent = compute_accuracy([True] * 30, manifest, AccuracyPolicy.STRICT)
        assert (counts.tp, counts.fp) == (2, 28)
        assert percent == pytest.approx(200 / 30)
        counts, percent = compute_accuracy([False] * 30, manifest, AccuracyPolicy.STRICT)
        assert (counts.tn, counts.fn) == (28, 2)
        assert percent == pytest.approx(2800 / 30)

    def test_accuracy_needs_one_decision_per_case(self):
        """Decision and case counts must agree."""
        with pytest.raises(ParameterError):
            compute_accuracy([True], TestDefaults.grid_manifest())


class TestLocalization(TestBase):
    """Location cubes and keypoint repeatability."""

    def test_candidate_poses(self):
        """Each policy spans every height with its yaws."""
        pose = TestDefaults.pose(yaw=30)
        assert candidate_poses(pose, CandidatePolicy.SIX_POINT) == [
            (level, yaw) for level in range(3) for yaw in (30, 15)
        ]
        assert candidate_poses(TestDefaults.pose(), CandidatePolicy.SIX_POINT)[:2] == [
            (0, 0),
            (0, 15),
        ]
        assert len(candidate_poses(pose, CandidatePolicy.YAW_WINDOW)) == 15
        single = candidate_poses(pose, CandidatePolicy.SINGLE)
        assert single == [(0, 30), (1, 30), (2, 30)]

    def test_cube_without_lever_arm(self):
        """Without a lever arm the cube is a vertical segment."""
        grid = GridGeometry(points={'p00': [2.0, 3.0]})
        cube = localize(TestDefaults.pose(), grid)
        assert cube.size == pytest.approx((0.0, 0.0, 1.0))
        assert cube.center == pytest.approx([2.0, 3.0, 1.0])
        assert len(cube.candidates) == 6

    def test_cube_with_lever_arm(self):
        """The lever arm spreads the candidates with the yaw."""
        grid = GridGeometry(points={'p00': [0.0, 0.0]}, lever_arm=0.1)
        cube = localize(TestDefaults.pose(), grid)
        low, high = cube.corners[0], cube.corners[7]
        assert low[0] == pytest.approx(0.1 * math.cos(math.radians(15)))
        assert high[0] == pytest.approx(0.1)
        assert (low[1], high[1]) == pytest.approx((0.0, 0.1 * math.sin(math.radians(15))))
        assert cube.contains(grid.position('p00', 1, 0))

    def test_custom_candidates(self):
        """A callable builds the candidate poses."""
        grid = GridGeometry(points={'p00': [0.0, 0.0]})
        cube = localize(TestDefaults.pose(), grid, lambda pose: [(pose.height_level, 0)])
        assert cube.size == pytest.approx((0.0, 0.0, 0.0))
        with pytest.raises(ConfigError):
            localize(TestDefaults.pose('p01'), grid)

    def test_repeatability(self):
        """Share of keypoints with a counterpart after mapping."""
        kps_a = [Keypoint(10.0, 10.0, 7.0), Keypoint(30.0, 30.0, 7.0)]
        kps_b = [Keypoint(15.0, 10.5, 7.0)]
        shift = np.array([[1.0, 0.0, 5.0], [0.0, 1.0, 0.0]])
        assert repeatability(kps_a, kps_b, shift) == 0.5
        assert repeatability(kps_a, kps_b, shift, tol=0.1) == 0.0
        assert repeatability(kps_a, kps_a, lambda xs, ys: (xs, ys)) == 1.0
        assert repeatability([], kps_b, shift) == 0.0


class TestBenchmarkRunner(TestBase):
    """Runs over a small synthetic pose grid."""

    n_points = 2
    image_size = (160, 160)

    def dataset(self) -> DatasetManifest:
        """Generate the dataset and load it back from its manifest."""
        generate_pose_grid(self.tmp / 'data', self.n_points, self.image_size, seed=5)
        return DatasetManifest.from_file(self.tmp / 'data' / MANIFEST_FILE)

    def config(self, **overrides) -> RunConfig:
        """Configuration keeping every query and every template candidate."""
        values = {
            'combinations': [FAST_BRIEF],
            'elimination': EliminationParams(
                lower=0,
                upper=10**6,
                prefilter_threshold=0.0,
                prefilter_method=HistogramMethod.INTERSECTION,
            ),
            'matcher': MatcherParams(min_correct=1),
            'grid': synthetic_grid(self.n_points),
        }
        values.update(overrides)
        return RunConfig(**values)

    def test_run(self):
        """A timing run scores every case and attributes all time to pairs."""
        runner = BenchmarkRunner(self.dataset(), self.config())
        dump = runner.run()
        assert dump.mode is TimingMode.TIMING
        assert dump.decode_time > 0
        [result] = dump.results
        assert result.combination == CombinationId.parse(FAST_BRIEF)
        assert result.ground_truth_cases == 30
        assert result.counts.total == 30
        assert 0.0 <= result.accuracy <= 100.0
        assert result.total_time == pytest.approx(
            math.fsum(pair.pair_time for pair in result.pairs)
        )
        assert result.total_matches == sum(p.stats.n_correct for p in result.pairs)
        if result.total_matches:
            assert result.seconds_per_match == pytest.approx(
                result.total_time / result.total_matches
            )
        assert result.cross_point_matches == sum(
            1
            for p in result.pairs
            if p.accepted and not p.query_pose.same_point(p.template_pose)
        )
        assert dump.elimination_time >= 0.0
        assert len(runner.kept_queries) == 30
        assert runner.rejected_queries == []

    def test_identical_views_match(self):
        """The template-pose query is pixel-identical to its template."""
        result = BenchmarkRunner(self.dataset(), self.config()).run_combination(
            CombinationId.parse(FAST_BRIEF)
        )
        pairs = {pair.key: pair for pair in result.pairs}
        same = pairs[('queries/p00_h1_y+0.pgm', 'templates/p00.pgm')]
        assert same.histogram_score == pytest.approx(1.0)
        assert same.stats.n_correct > 0
        assert same.stats.min_distance == 0.0
        assert same.stats.mean_angle_diff == 0.0
        assert same.accepted
        located = {loc.query: loc for loc in result.localizations}
        cube = located['queries/p00_h1_y+0.pgm'].cube
        assert cube.contains(synthetic_grid(self.n_points).position('p00', 1, 0))

    def test_deterministic(self):
        """Two runs agree in everything but timing."""
        manifest = self.dataset()
        first = BenchmarkRunner(manifest, self.config()).run()
        second = BenchmarkRunner(manifest, self.config()).run()
        assert first.results[0].comparable(second.results[0])

    def test_histogram_gate(self):
        """An unreachable acceptance threshold rejects every matched pair."""
        config = self.config(
            accuracy=AccuracyParams(histogram_gate=True, acceptance_threshold=1.0)
        )
        result = run_combination(CombinationId.parse(FAST_BRIEF), self.dataset(), config)
        assert any(pair.matched for pair in result.pairs)
        assert not any(pair.accepted for pair in result.pairs)
        assert result.counts.tp == 0
        assert result.localizations == []

    def test_min_correct_sweep(self):
        """Raising min_correct only removes accepted pairs."""
        manifest = self.dataset()
        previous = None
        for min_correct in (1, 10, 40):
            config = self.config(matcher=MatcherParams(min_correct=min_correct))
            result = run_combination(CombinationId.parse(FAST_BRIEF), manifest, config)
            accepted = {pair.key for pair in result.pairs if pair.accepted}
            if previous is not None:
                assert accepted <= previous
            previous = accepted

    def test_flat_queries(self):
        """Queries without keypoints leave a combination timed by elimination."""
        manifest = self.dataset()
        flat = TestDefaults.constant(*self.image_size)
        for query in manifest.queries:
            save_pgm(flat, manifest.resolve(query.path))
        elimination = EliminationParams(lower=1, upper=10**6, prefilter_threshold=0.0)
        runner = BenchmarkRunner(manifest, self.config(elimination=elimination))
        dump = runner.run()
        assert runner.kept_queries == []
        [result] = dump.results
        assert result.pairs == []
        assert result.total_time == runner.elimination_timer.seconds > 0
        assert result.correct_matches_per_second == 0.0
        assert result.counts.tp == 0
        assert result.ground_truth_cases == 30
        assert 'compared no pairs' in self.caplog.text

    def test_missing_image(self):
        """A missing image fails the run naming its path."""
        manifest = self.dataset()
        (self.tmp / 'data' / 'queries' / 'p01_h0_y-15.pgm').unlink()
        with pytest.raises(PipelineError, match='p01_h0_y-15.pgm'):
            BenchmarkRunner(manifest, self.config()).prepare()

    def test_metadata(self):
        """Metadata lists the run provenance."""
        runner = BenchmarkRunner(self.dataset(), self.config())
        meta = runner.metadata(runner.run())
        assert meta.config_hash == runner.config_hash
        assert meta.combinations == [FAST_BRIEF]
        assert len(meta.kept_queries) == 30
        assert meta.versions

    def test_stats_cache(self):
        """Pair stats are cached, and timing runs do not read them back."""
        cache_dir = self.tmp / 'cache'
        manifest = self.dataset()
        result = BenchmarkRunner(manifest, self.config(cache_dir=str(cache_dir))).run()
        cache = PairStatsCache(cache_dir)
        assert len(cache) == len(result.results[0].pairs)
        rerun = BenchmarkRunner(
            manifest, self.config(cache_dir=str(cache_dir), reuse_cache=True)
        )
        rerun.run()
        assert 'Timing run, cached pair statistics are not reused' in self.caplog.text

    @pytest.mark.slow
    def test_parallel_run_matches_timing_run(self):
        """Worker processes give the same results as the timing run."""
        manifest = self.dataset()
        timing = BenchmarkRunner(manifest, self.config()).run()
        parallel = BenchmarkRunner(manifest, self.config(workers=2)).run()
        assert parallel.mode is TimingMode.PARALLEL
        assert timing.results[0].comparable(parallel.results[0])

    @pytest.mark.slow
    def test_parallel_run_reuses_cache(self):
        """Parallel runs serve fully cached queries from the stats cache."""
        cache_dir = str(self.tmp / 'cache')
        manifest = self.dataset()
        first = BenchmarkRunner(
            manifest, self.config(workers=2, cache_dir=cache_dir)
        ).run()
        second = BenchmarkRunner(
            manifest, self.config(workers=2, cache_dir=cache_dir, reuse_cache=True)
        ).run()
        assert '30 queries served from the stats cache' in self.caplog.text
        assert first.results[0].comparable(second.results[0])
