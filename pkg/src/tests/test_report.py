"""Tests for the CSV report, scatter files and the combination ranking."""
import logging
import math

import pytest

from pyfeatbench.const import (
    CSV_COLUMNS,
    METADATA_FILE,
    REPORT_FILE,
    STATS_FILE,
    MetricAxis,
    PoseCase,
    TimingMode,
)
from pyfeatbench.models.bench_models import RunMetadata, StatsDump
from pyfeatbench.models.config_models import RunConfig
from pyfeatbench.report import (
    RANKING_FILE,
    ScatterPoint,
    generate_report,
    parse_axes,
    pose_case,
    rank_combinations,
    report_row,
    scatter_point,
    scatter_points,
    write_report_csv,
    write_run_outputs,
)
from pyfeatbench.utils.errors import ConfigError
from base_test_cases import TestBase
from defaults import TestDefaults
from utils import read_table

logger = logging.getLogger(__name__)

SAME = TestDefaults.pose()
TURNED = TestDefaults.pose(height_level=0, yaw=15)
OTHER_POINT = TestDefaults.pose('p01')


def _pairs(n_correct: int, angle: float, distance: float):
    """Same-pose and turned pairs with equal statistics, plus a cross-point pair."""
    return [
        TestDefaults.pair(SAME, SAME, n_correct, angle, distance, accepted=True),
        TestDefaults.pair(TURNED, SAME, n_correct, angle, distance),
        TestDefaults.pair(OTHER_POINT, SAME, 50, 90.0, 40.0),
    ]


def _dump() -> StatsDump:
    return TestDefaults.dump(
        [
            TestDefaults.result('ORB-BRIEF', _pairs(10, 0.0, 1.0)),
            TestDefaults.result('SIFT-SIFT', _pairs(5, -10.0, 3.0)),
            TestDefaults.result('FAST-BRIEF', _pairs(1, 5.0, 2.0)),
        ]
    )


def _metadata() -> RunMetadata:
    return RunMetadata(
        TestDefaults.config_hash, TestDefaults.seed, TimingMode.TIMING, RunConfig()
    )


class TestCsvReport(TestBase):
    """Per-combination CSV rows."""

    def test_row_format(self):
        """Times and rates keep 3 decimals, accuracy 2."""
        total_time, accuracy, rate = TestDefaults.orb_brief_row
        result = TestDefaults.result(
            'ORB-BRIEF', total_time=total_time, accuracy=accuracy, rate=rate
        )
        row = report_row(result)
        assert tuple(row) == CSV_COLUMNS
        assert list(row.values()) == [
            'ORB',
            'BRIEF',
            '21303.299',
            '62.83',
            '30',
            '1457.011',
        ]

    def test_csv_file(self):
        """A comment line, the header and one row per combination."""
        path = write_report_csv(_dump(), self.tmp / 'out' / REPORT_FILE)
        comment, rows = read_table(path, delimiter=',')
        header = f'# config_hash={TestDefaults.config_hash} seed={TestDefaults.seed}'
        assert comment == f'{header} mode=timing'
        assert rows[0] == list(CSV_COLUMNS)
        assert [row[:2] for row in rows[1:]] == [
            ['ORB', 'BRIEF'],
            ['SIFT', 'SIFT'],
            ['FAST', 'BRIEF'],
        ]

    def test_run_outputs(self):
        """Report, stats and metadata files; the stats file loads back."""
        dump = _dump()
        meta = _metadata()
        paths = write_run_outputs(dump, meta, self.tmp / 'run')
        assert [path.name for path in paths] == [REPORT_FILE, STATS_FILE, METADATA_FILE]
        loaded = StatsDump.from_file(self.tmp / 'run' / STATS_FILE)
        assert loaded.mode is TimingMode.TIMING
        assert loaded.to_dict() == dump.to_dict()

    def test_unwritable_directory(self):
        """Report files below a regular file cannot be written."""
        blocker = self.tmp / 'blocker'
        blocker.write_text('file')
        meta = _metadata()
        with pytest.raises(ConfigError):
            write_run_outputs(_dump(), meta, blocker / 'run')


class TestScatter(TestBase):
    """Pose cases and their aggregated metrics."""

    def test_pose_case(self):
        """Pairs fall into the case of their yaw difference."""
        assert pose_case(SAME, SAME) is PoseCase.SAME
        assert pose_case(TestDefaults.pose(height_level=0), SAME) is PoseCase.ZERO
        assert pose_case(TURNED, SAME) is PoseCase.PLUS_15
        assert pose_case(TestDefaults.pose(yaw=-30), SAME) is PoseCase.MINUS_30
        assert pose_case(OTHER_POINT, SAME) is None

    def test_scatter_point(self):
        """Angles average over pairs with matches, distances over measured ones."""
        pairs = [
            TestDefaults.pair(SAME, SAME, 10, 6.0, 2.0),
            TestDefaults.pair(TURNED, SAME),
        ]
        point = scatter_point('ORB-BRIEF', pairs)
        assert point.pairs == 2
        assert point.n_correct == 5.0
        assert point.mean_angle_diff == 6.0
        assert point.min_distance == 2.0
        empty = scatter_point('ORB-BRIEF', [])
        assert math.isnan(empty.n_correct)
        assert not empty.complete(list(MetricAxis))

    def test_case_selection(self):
        """Cross-point pairs never enter a scatter point."""
        points = scatter_points(_dump())
        assert [point.pairs for point in points] == [2, 2, 2]
        assert points[0].n_correct == 10.0
        same = scatter_points(_dump(), PoseCase.SAME)
        assert [point.pairs for point in same] == [1, 1, 1]
        assert [p.pairs for p in scatter_points(_dump(), PoseCase.MINUS_30)] == [0, 0, 0]

    def test_missing_pairs(self):
        """Dumps without results or pair records cannot be analysed."""
        with pytest.raises(ConfigError):
            scatter_points(TestDefaults.dump([]))
        with pytest.raises(ConfigError):
            scatter_points(TestDefaults.dump([TestDefaults.result('ORB-BRIEF')]))


class TestRanking(TestBase):
    """Distance to the best point in normalized metric space."""

    def test_rank_order(self):
        """Hand-computed distances of three combinations."""
        ranking = rank_combinations(scatter_points(_dump()), list(MetricAxis))
        assert [item.point.combination for item in ranking] == [
            'ORB-BRIEF',
            'FAST-BRIEF',
            'SIFT-SIFT',
        ]
        assert ranking[0].distance == 0.0
        assert ranking[1].normalized == pytest.approx((1.0, 0.5, 0.5))
        assert ranking[1].distance == pytest.approx(math.sqrt(1.5))
        assert ranking[2].normalized == pytest.approx((5 / 9, 1.0, 1.0))

    def test_best_combination_reference(self):
        """The worst combination is the farthest from the best one."""
        points = [
            ScatterPoint('ORB-BRIEF', 1, 9.0, 0.0, 0.0),
            ScatterPoint('FAST-BRIEF', 1, 0.0, 0.0, 1.0),
            ScatterPoint('SIFT-SIFT', 1, 10.0, 0.0, 20.0),
        ]
        axes = [MetricAxis.N_CORRECT, MetricAxis.MIN_DISTANCE]
        ranking = rank_combinations(points, axes)
        assert [item.point.combination for item in ranking] == [
            'ORB-BRIEF',
            'FAST-BRIEF',
            'SIFT-SIFT',
        ]
        assert ranking[0].distance == 0.0
        assert ranking[1].normalized == pytest.approx((1.0, 0.05))
        assert ranking[1].distance == pytest.approx(math.hypot(0.9, 0.05))
        assert ranking[2].normalized == pytest.approx((0.0, 1.0))
        assert ranking[2].distance == pytest.approx(math.hypot(0.1, 1.0))

    def test_single_axis(self):
        """Ranking by one metric orders by that metric alone."""
        ranking = rank_combinations(scatter_points(_dump()), [MetricAxis.MIN_DISTANCE])
        assert [item.point.combination for item in ranking] == [
            'ORB-BRIEF',
            'FAST-BRIEF',
            'SIFT-SIFT',
        ]

    def test_incomplete_points(self):
        """Points lacking a metric are skipped with a warning."""
        points = [
            ScatterPoint('ORB-BRIEF', 2, 4.0, 1.0, 2.0),
            ScatterPoint('FAST-BRIEF', 2, 0.0, math.nan, math.nan),
        ]
        ranking = rank_combinations(points, list(MetricAxis))
        assert [item.point.combination for item in ranking] == ['ORB-BRIEF']
        assert ranking[0].normalized == (0.0, 0.0, 0.0)
        assert 'FAST-BRIEF lacks metrics' in self.caplog.text
        with pytest.raises(ConfigError):
            rank_combinations(points[1:], list(MetricAxis))

    def test_parse_axes(self):
        """Axis names are case-insensitive, repeats dropped."""
        assert parse_axes(None) == list(MetricAxis)
        assert parse_axes(['MIN_DISTANCE', 'min_distance', 'n_correct']) == [
            MetricAxis.MIN_DISTANCE,
            MetricAxis.N_CORRECT,
        ]
        with pytest.raises(ConfigError):
            parse_axes(['speed'])
        with pytest.raises(ConfigError):
            parse_axes([])

    def test_generate_report(self):
        """One scatter file per pose case, then the ranking."""
        paths = generate_report(_dump(), self.tmp / 'report')
        assert [path.name for path in paths] == [
            *(f'scatter_{case}.tsv' for case in PoseCase),
            RANKING_FILE,
        ]
        comment, rows = read_table(self.tmp / 'report' / 'scatter_-30.tsv')
        assert comment.endswith('case=-30')
        assert rows[1] == ['ORB-BRIEF', '0', 'nan', 'nan', 'nan']
        comment, rows = read_table(self.tmp / 'report' / RANKING_FILE)
        assert 'case=all' in comment
        assert rows[0] == ['rank', 'combination', 'distance', *MetricAxis]
        assert rows[1][:3] == ['1', 'ORB-BRIEF', '0.000000']
        assert 'Best combination ORB-BRIEF, worst SIFT-SIFT' in self.caplog.text
