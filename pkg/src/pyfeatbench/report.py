"""Report files of a benchmark run and the match-quality analysis.

`cmd_run` writes three files into its output directory:

- `report.csv`: one row per combination with the columns of `CSV_COLUMNS`,
  preceded by a `# config_hash=... seed=... mode=...` comment line.
- `stats.json`: the full `StatsDump`.
- `metadata.json`: the `RunMetadata` record.

`cmd_report` reads a `stats.json` back and writes:

- `scatter_<case>.tsv` per `PoseCase`: one point per combination holding the
  mean correct-match count, mean orientation difference and mean minimum
  keypoint distance of the same-point pairs in that pose case.
- `ranking.tsv`: combinations ordered by their Euclidean distance to the
  best combination in min-max normalized metric space, best first. The best
  combination is the one nearest the ideal point.

Averages skip pairs that have no value for a metric: the orientation
difference only exists for pairs with matches and the minimum distance only
for pairs with a measured distance. A combination with no such pair gets
`nan` for that metric and is left out of the ranking.
"""

from __future__ import annotations

import csv
import logging
import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from pathlib import Path

from pyfeatbench.const import (
    CSV_COLUMNS,
    METADATA_FILE,
    REPORT_FILE,
    STATS_FILE,
    MetricAxis,
    PoseCase,
)
from pyfeatbench.models.bench_models import (
    CombinationResult,
    PairRecord,
    PoseLabel,
    RunMetadata,
    StatsDump,
)
from pyfeatbench.utils.errors import ConfigError
from pyfeatbench.utils.helpers import Helpers

logger = logging.getLogger(__name__)

RANKING_FILE = 'ranking.tsv'
SCATTER_PREFIX = 'scatter_'
ALL_CASES = 'all'
"""Case label of the ranking computed over every same-point pair."""

_MAXIMIZED = frozenset({MetricAxis.N_CORRECT})


def report_row(result: CombinationResult) -> dict[str, str]:
    """Formatted CSV row of a combination result."""
    return {
        'detector': str(result.combination.detector),
        'descriptor': str(result.combination.descriptor),
        'total_time_sec': f'{result.total_time:.3f}',
        'accuracy_pct': f'{result.accuracy:.2f}',
        'ground_truth_cases': str(result.ground_truth_cases),
        'correct_matches_per_sec': f'{result.correct_matches_per_second:.3f}',
    }


def _header(dump: StatsDump, **extra: str) -> str:
    fields = {'config_hash': dump.config_hash, 'seed': str(dump.seed), **extra}
    return '# ' + ' '.join(f'{key}={value}' for key, value in fields.items()) + '\n'


def write_report_csv(dump: StatsDump, path: str | Path) -> Path:
    """Write the per-combination CSV report of a dump."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open('w', newline='', encoding='utf-8') as handle:
        handle.write(_header(dump, mode=str(dump.mode)))
        writer = csv.DictWriter(handle, fieldnames=CSV_COLUMNS, lineterminator='\n')
        writer.writeheader()
        writer.writerows(report_row(result) for result in dump.results)
    return path


def write_run_outputs(
    dump: StatsDump, metadata: RunMetadata, output_dir: str | Path
) -> list[Path]:
    """Write `report.csv`, `stats.json` and `metadata.json`.

    Raises:
        ConfigError: output_dir is not writable.
    """
    root = Path(output_dir)
    try:
        paths = [
            write_report_csv(dump, root / REPORT_FILE),
            Helpers.write_json(root / STATS_FILE, dump.to_dict()),
            Helpers.write_json(root / METADATA_FILE, metadata.to_dict()),
        ]
    except OSError as exc:
        msg = f'Cannot write report files to {root}: {exc.strerror or exc}'
        raise ConfigError(msg) from exc
    logger.info('Wrote %d combination rows to %s', len(dump.results), paths[0])
    return paths


def pose_case(query: PoseLabel, template: PoseLabel) -> PoseCase | None:
    """Pose case of a pair, None for different points or an off-grid yaw step."""
    if not query.same_point(template):
        return None
    difference = query.yaw_difference(template)
    if difference == 0 and query.height_level == template.height_level:
        return PoseCase.SAME
    try:
        return PoseCase(str(difference))
    except ValueError:
        return None


@dataclass(frozen=True)
class ScatterPoint:
    """Aggregated metrics of one combination in one pose case.

    Attributes:
        combination (str): `DETECTOR-DESCRIPTOR` name.
        pairs (int): Pairs aggregated.
        n_correct (float): Mean correct-match count.
        mean_angle_diff (float): Mean orientation difference in degrees.
        min_distance (float): Mean minimum keypoint distance in pixels.
    """

    combination: str
    pairs: int
    n_correct: float
    mean_angle_diff: float
    min_distance: float

    def value(self, axis: MetricAxis) -> float:
        """Metric of an axis."""
        return float(getattr(self, str(axis)))

    def complete(self, axes: Iterable[MetricAxis]) -> bool:
        """Whether every axis holds a finite value."""
        return all(math.isfinite(self.value(axis)) for axis in axes)


def _mean(values: Sequence[float]) -> float:
    return math.fsum(values) / len(values) if values else math.nan


def scatter_point(name: str, pairs: Sequence[PairRecord]) -> ScatterPoint:
    """Aggregate the pairs of a combination into one scatter point."""
    stats = [pair.stats for pair in pairs]
    return ScatterPoint(
        name,
        len(stats),
        _mean([s.n_correct for s in stats]),
        _mean([s.mean_angle_diff for s in stats if s.n_correct > 0]),
        _mean([s.min_distance for s in stats if s.has_distance]),
    )


def _case_pairs(result: CombinationResult, case: PoseCase | None) -> list[PairRecord]:
    selected = []
    for pair in result.pairs:
        pair_case = pose_case(pair.query_pose, pair.template_pose)
        if pair_case is not None and (case is None or pair_case is case):
            selected.append(pair)
    return selected


def scatter_points(dump: StatsDump, case: PoseCase | None = None) -> list[ScatterPoint]:
    """One point per combination of the dump, restricted to a pose case.

    Args:
        dump (StatsDump): Run results.
        case (PoseCase | None): Pose case, every same-point pair when None.

    Raises:
        ConfigError: The dump holds no combination or no pair records.
    """
    if not dump.results:
        msg = 'Stats dump holds no combination results'
        raise ConfigError(msg)
    if not any(result.pairs for result in dump.results):
        msg = 'Stats dump holds no per-pair metrics'
        raise ConfigError(msg)
    return [
        scatter_point(result.combination.name, _case_pairs(result, case))
        for result in dump.results
    ]


def parse_axes(names: Iterable[str | MetricAxis] | None) -> list[MetricAxis]:
    """Resolve metric names in order without repeats, all axes when None.

    Raises:
        ConfigError: Unknown metric or empty selection.
    """
    if names is None:
        return list(MetricAxis)
    axes: list[MetricAxis] = []
    for name in names:
        try:
            axis = MetricAxis(name)
        except ValueError as exc:
            choices = ', '.join(MetricAxis)
            msg = f'Unknown metric {name!r}, expected one of {choices}'
            raise ConfigError(msg) from exc
        if axis not in axes:
            axes.append(axis)
    if not axes:
        msg = 'At least one metric axis is required'
        raise ConfigError(msg)
    return axes


def _badness(point: ScatterPoint, axis: MetricAxis) -> float:
    value = point.value(axis)
    if axis is MetricAxis.MEAN_ANGLE_DIFF:
        return abs(value)
    return -value if axis in _MAXIMIZED else value


@dataclass(frozen=True)
class RankedCombination:
    """Position of a combination in the ranking.

    Attributes:
        point (ScatterPoint): Aggregated metrics.
        normalized (tuple[float, ...]): Normalized badness per axis, 0 best.
        distance (float): Euclidean distance to the best combination.
    """

    point: ScatterPoint
    normalized: tuple[float, ...]
    distance: float


def rank_combinations(
    points: Sequence[ScatterPoint], axes: Sequence[MetricAxis]
) -> list[RankedCombination]:
    """Order combinations by distance to the best combination, best first.

    Every axis is turned into a badness (negated count, absolute angle,
    distance) and min-max normalized over the ranked points. An axis on which
    all points agree contributes 0. The best combination is the one nearest
    the ideal point at the origin, the first one on ties; every combination
    is then ranked by its distance to that best combination. Ties keep the
    input order.

    Raises:
        ConfigError: No point has finite values on every axis.
    """
    ranked_points = [point for point in points if point.complete(axes)]
    for point in points:
        if not point.complete(axes):
            logger.warning('Combination %s lacks metrics, not ranked', point.combination)
    if not ranked_points:
        msg = 'No combination has values for ' + ', '.join(axes)
        raise ConfigError(msg)
    columns = [[_badness(point, axis) for point in ranked_points] for axis in axes]
    spans = [(min(column), max(column) - min(column)) for column in columns]
    vectors = [
        tuple(
            (column[row] - low) / span if span > 0 else 0.0
            for column, (low, span) in zip(columns, spans, strict=True)
        )
        for row in range(len(ranked_points))
    ]
    best = min(vectors, key=lambda vector: math.hypot(*vector))
    ranking = [
        RankedCombination(point, normalized, math.dist(normalized, best))
        for point, normalized in zip(ranked_points, vectors, strict=True)
    ]
    return sorted(ranking, key=lambda item: item.distance)


def _number(value: float) -> str:
    return f'{value:.6f}' if math.isfinite(value) else 'nan'


def write_scatter(
    dump: StatsDump, case: PoseCase, path: str | Path
) -> tuple[Path, list[ScatterPoint]]:
    """Write the scatter data of a pose case as tab-separated text."""
    path = Path(path)
    points = scatter_points(dump, case)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open('w', newline='', encoding='utf-8') as handle:
        handle.write(_header(dump, case=str(case)))
        writer = csv.writer(handle, delimiter='\t', lineterminator='\n')
        writer.writerow(['combination', 'pairs', *MetricAxis])
        for point in points:
            writer.writerow(
                [
                    point.combination,
                    point.pairs,
                    *(_number(point.value(axis)) for axis in MetricAxis),
                ]
            )
    return path, points


def write_ranking(
    dump: StatsDump,
    ranking: Sequence[RankedCombination],
    axes: Sequence[MetricAxis],
    path: str | Path,
    case: PoseCase | None = None,
) -> Path:
    """Write a ranking as tab-separated text, best combination first."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open('w', newline='', encoding='utf-8') as handle:
        handle.write(
            _header(
                dump,
                case=str(case) if case is not None else ALL_CASES,
                axes=','.join(axes),
            )
        )
        writer = csv.writer(handle, delimiter='\t', lineterminator='\n')
        writer.writerow(['rank', 'combination', 'distance', *axes])
        for rank, item in enumerate(ranking, start=1):
            writer.writerow(
                [
                    rank,
                    item.point.combination,
                    _number(item.distance),
                    *(_number(item.point.value(axis)) for axis in axes),
                ]
            )
    return path


def generate_report(
    dump: StatsDump,
    output_dir: str | Path,
    axes: Iterable[str | MetricAxis] | None = None,
    case: PoseCase | None = None,
) -> list[Path]:
    """Write every scatter file and the ranking of a dump.

    Args:
        dump (StatsDump): Run results.
        output_dir (str | Path): Directory receiving the files.
        axes (Iterable[str | MetricAxis] | None): Metrics spanning the ranking
            space, all three when None.
        case (PoseCase | None): Pose case the ranking is computed on, every
            same-point pair when None.

    Returns:
        list[Path]: Scatter files in `PoseCase` order, then the ranking.

    Raises:
        ConfigError: Missing metrics, unknown axis or unwritable directory.
    """
    chosen = parse_axes(axes)
    root = Path(output_dir)
    try:
        paths = [
            write_scatter(dump, pose, root / f'{SCATTER_PREFIX}{pose}.tsv')[0]
            for pose in PoseCase
        ]
        ranking = rank_combinations(scatter_points(dump, case), chosen)
        paths.append(write_ranking(dump, ranking, chosen, root / RANKING_FILE, case))
    except OSError as exc:
        msg = f'Cannot write report files to {root}: {exc.strerror or exc}'
        raise ConfigError(msg) from exc
    logger.info(
        'Best combination %s, worst %s',
        ranking[0].point.combination,
        ranking[-1].point.combination,
    )
    return paths
