"""Command line interface of pyfeatbench.

Subcommands:

- `generate-synthetic`: render a pose-grid dataset with its manifest.
- `run`: evaluate detector/descriptor combinations and write the report files.
- `report`: turn a stats dump into per-pose-case scatter data and a ranking.

The output directory and the worker count default to the
`PYFEATBENCH_OUTPUT_DIR` and `PYFEATBENCH_WORKERS` environment variables.
Exit codes come from `ErrorCodes`: 0 success, 1 configuration error, 2 pipeline
error.

Example:
    ```bash
    pyfeatbench generate-synthetic --output-dir data --points 5
    pyfeatbench run --manifest data/manifest.json --grid data/grid.json
    pyfeatbench run --manifest data/manifest.json --combinations FAST-SURF ORB-ORB
    pyfeatbench report --stats results/stats.json --axes n_correct min_distance
    ```
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from collections.abc import Mapping, Sequence
from pathlib import Path
from typing import Any

from pyfeatbench.bench import BenchmarkRunner
from pyfeatbench.const import (
    OUTPUT_DIR_ENV,
    STATS_FILE,
    WORKERS_ENV,
    AccuracyPolicy,
    ExitCode,
    HistogramMethod,
    MetricAxis,
    PoseCase,
)
from pyfeatbench.models.bench_models import DatasetManifest, StatsDump
from pyfeatbench.models.config_models import RunConfig
from pyfeatbench.report import generate_report, write_run_outputs
from pyfeatbench.synthetic import (
    DEFAULT_IMAGE_SIZE,
    DEFAULT_SYNTHETIC_SEED,
    generate_pose_grid,
)
from pyfeatbench.utils.errors import ConfigError, ErrorCodes, FeatBenchError
from pyfeatbench.utils.helpers import Helpers
from pyfeatbench.utils.logs import LibraryLogger

logger = logging.getLogger(__name__)

DEFAULT_OUTPUT_DIR = 'results'
DEFAULT_POINTS = 5

_RUN_FLAGS: dict[str, tuple[str, ...]] = {
    'manifest': ('manifest',),
    'combinations': ('combinations',),
    'workers': ('workers',),
    'output_dir': ('output_dir',),
    'seed': ('seed',),
    'cache_dir': ('cache_dir',),
    'reuse_cache': ('reuse_cache',),
    'ratio': ('matcher', 'ratio'),
    'min_correct': ('matcher', 'min_correct'),
    'cross_check': ('matcher', 'cross_check'),
    'lower': ('elimination', 'lower'),
    'upper': ('elimination', 'upper'),
    'prefilter_threshold': ('elimination', 'prefilter_threshold'),
    'prefilter_method': ('elimination', 'prefilter_method'),
    'accuracy_policy': ('accuracy', 'policy'),
    'histogram_gate': ('accuracy', 'histogram_gate'),
    'acceptance_threshold': ('accuracy', 'acceptance_threshold'),
}
"""Flag destination -> key path inside the RunConfig mapping."""


def env_output_dir(environ: Mapping[str, str] | None = None) -> str:
    """Output directory from the environment, `results` when unset."""
    environ = os.environ if environ is None else environ
    return environ.get(OUTPUT_DIR_ENV) or DEFAULT_OUTPUT_DIR


def env_workers(environ: Mapping[str, str] | None = None) -> int | None:
    """Worker count from the environment, None when unset.

    Raises:
        ConfigError: The variable is not an integer.
    """
    environ = os.environ if environ is None else environ
    raw = environ.get(WORKERS_ENV)
    if not raw:
        return None
    try:
        return int(raw)
    except ValueError as exc:
        msg = f'{WORKERS_ENV} must be an integer, got {raw!r}'
        raise ConfigError(msg) from exc


def parse_size(text: str) -> tuple[int, int]:
    """Parse `WIDTHxHEIGHT`."""
    try:
        width, height = (int(part) for part in text.lower().split('x'))
    except ValueError as exc:
        msg = f'Expected WIDTHxHEIGHT, got {text!r}'
        raise argparse.ArgumentTypeError(msg) from exc
    return width, height


def cmd_generate_synthetic(
    output_dir: str | Path,
    n_points: int = DEFAULT_POINTS,
    image_size: tuple[int, int] = DEFAULT_IMAGE_SIZE,
    seed: int = DEFAULT_SYNTHETIC_SEED,
) -> DatasetManifest:
    """Render a synthetic pose-grid dataset into output_dir."""
    return generate_pose_grid(output_dir, n_points, image_size, seed)


def build_run_config(
    config_file: str | Path | None = None,
    overrides: Mapping[str, Any] | None = None,
    grid_file: str | Path | None = None,
    environ: Mapping[str, str] | None = None,
) -> RunConfig:
    """Merge a configuration file, environment defaults, a grid file and flags.

    Args:
        config_file (str | Path | None): JSON or YAML `RunConfig` mapping.
        overrides (Mapping[str, Any] | None): Flag values keyed as in
            `_RUN_FLAGS`; None values are ignored.
        grid_file (str | Path | None): JSON or YAML `GridGeometry` mapping.
        environ (Mapping[str, str] | None): Environment supplying the output
            directory and worker count when the file does not, `os.environ`
            when None.

    Raises:
        ConfigError: Unreadable file, unknown key or invalid value.
    """
    data: dict[str, Any] = Helpers.load_mapping(config_file) if config_file else {}
    environ = os.environ if environ is None else environ
    if environ.get(OUTPUT_DIR_ENV):
        data.setdefault('output_dir', env_output_dir(environ))
    workers = env_workers(environ)
    if workers is not None:
        data.setdefault('workers', workers)
    if grid_file is not None:
        data['grid'] = Helpers.load_mapping(grid_file)
    for name, value in (overrides or {}).items():
        if value is None:
            continue
        *parents, leaf = _RUN_FLAGS[name]
        section = data
        for parent in parents:
            section = section.setdefault(parent, {})
        section[leaf] = value
    source = str(config_file) if config_file else 'command line'
    config = Helpers.model_maker(logger, RunConfig, source, data)
    if config is None:
        msg = f'Invalid run configuration from {source}'
        raise ConfigError(msg)
    return config


def cmd_run(config: RunConfig) -> int:
    """Run the benchmark and write `report.csv`, `stats.json` and `metadata.json`.

    Returns:
        int: Exit code, 0 on success.

    Raises:
        ConfigError: Manifest missing or invalid.
        PipelineError: A benchmark stage failed on an image.
    """
    if not config.manifest:
        msg = 'No manifest given'
        raise ConfigError(msg)
    if not Path(config.manifest).is_file():
        msg = f'Manifest {config.manifest} does not exist'
        raise ConfigError(msg)
    if LibraryLogger.verbose:
        logger.debug('Run configuration:\n%s', LibraryLogger.config_printer(config))
    manifest = DatasetManifest.from_file(config.manifest)
    runner = BenchmarkRunner(manifest, config)
    dump = runner.run()
    write_run_outputs(dump, runner.metadata(dump), config.output_dir)
    return ExitCode.SUCCESS


def cmd_report(
    stats_dump: str | Path,
    axes: Sequence[str] | None = None,
    output_dir: str | Path | None = None,
    case: str | None = None,
) -> list[Path]:
    """Write scatter data and the ranking of a stats dump.

    Args:
        stats_dump (str | Path): `stats.json` written by `cmd_run`.
        axes (Sequence[str] | None): Ranking metrics, all when None.
        output_dir (str | Path | None): Target directory, the dump's own
            directory when None.
        case (str | None): Pose case the ranking uses, all same-point pairs
            when None.

    Raises:
        ConfigError: Dump missing, malformed or without metrics.
    """
    path = Path(stats_dump)
    if not path.is_file():
        msg = f'Stats dump {path} does not exist'
        raise ConfigError(msg)
    dump = StatsDump.from_file(path)
    pose = None
    if case is not None:
        try:
            pose = PoseCase(case)
        except ValueError as exc:
            msg = f'Unknown pose case {case!r}'
            raise ConfigError(msg) from exc
    target = Path(output_dir) if output_dir is not None else path.parent
    return generate_report(dump, target, axes, pose)


def build_parser() -> argparse.ArgumentParser:
    """Argument parser of the `pyfeatbench` command."""
    parser = argparse.ArgumentParser(
        prog='pyfeatbench',
        description='Benchmark feature detector and descriptor combinations.',
        epilog='Run a subcommand with --help for more information.',
    )
    parser.add_argument(
        '-v', '--verbose', action='store_true', help='Log debug records'
    )
    parser.add_argument('--log-file', default=None, help='Also write logs to this file')
    subparsers = parser.add_subparsers(dest='command', required=True)

    synthetic = subparsers.add_parser(
        'generate-synthetic', help='Render a synthetic pose-grid dataset'
    )
    synthetic.add_argument('--output-dir', default=None, help='Dataset directory')
    synthetic.add_argument(
        '--points', type=int, default=DEFAULT_POINTS, help='Capture points'
    )
    synthetic.add_argument(
        '--size',
        type=parse_size,
        default=DEFAULT_IMAGE_SIZE,
        help='View size as WIDTHxHEIGHT',
    )
    synthetic.add_argument(
        '--seed', type=int, default=DEFAULT_SYNTHETIC_SEED, help='Scene seed'
    )

    run = subparsers.add_parser('run', help='Evaluate combinations on a dataset')
    run.add_argument('--config', default=None, help='JSON or YAML run configuration')
    run.add_argument('--manifest', default=None, help='Dataset manifest')
    run.add_argument('--grid', default=None, help='Grid geometry for localization')
    run.add_argument(
        '--combinations',
        nargs='+',
        default=None,
        help='"all" or DETECTOR-DESCRIPTOR names',
    )
    run.add_argument('--workers', type=int, default=None, help='Worker processes')
    run.add_argument('--output-dir', default=None, help='Report directory')
    run.add_argument('--seed', type=int, default=None, help='Test-pair pattern seed')
    run.add_argument('--cache-dir', default=None, help='Pair statistics cache')
    run.add_argument(
        '--reuse-cache',
        action='store_true',
        default=None,
        help='Read cached pair statistics in parallel runs',
    )
    run.add_argument('--ratio', type=float, default=None, help='Ratio test threshold')
    run.add_argument(
        '--min-correct', type=int, default=None, help='Matches for a matched pair'
    )
    run.add_argument(
        '--cross-check', action='store_true', default=None, help='Mutual matches only'
    )
    run.add_argument('--lower', type=int, default=None, help='Lower FAST count')
    run.add_argument('--upper', type=int, default=None, help='Upper FAST count')
    run.add_argument(
        '--prefilter-threshold', type=float, default=None, help='Histogram threshold'
    )
    run.add_argument(
        '--prefilter-method',
        choices=list(HistogramMethod),
        default=None,
        help='Histogram comparison',
    )
    run.add_argument(
        '--accuracy-policy',
        choices=list(AccuracyPolicy),
        default=None,
        help='Positive-case definition',
    )
    run.add_argument(
        '--histogram-gate',
        action='store_true',
        default=None,
        help='Require the acceptance histogram score for matched pairs',
    )
    run.add_argument(
        '--acceptance-threshold',
        type=float,
        default=None,
        help='Histogram score of the acceptance gate',
    )

    report = subparsers.add_parser('report', help='Write scatter data and a ranking')
    report.add_argument('--stats', default=None, help='stats.json of a run')
    report.add_argument(
        '--axes',
        nargs='+',
        choices=list(MetricAxis),
        default=None,
        help='Metrics spanning the ranking space',
    )
    report.add_argument('--case', choices=list(PoseCase), default=None)
    report.add_argument('--output-dir', default=None, help='Report directory')
    return parser


def _dispatch(args: argparse.Namespace) -> int:
    if args.command == 'generate-synthetic':
        cmd_generate_synthetic(
            args.output_dir or env_output_dir(), args.points, args.size, args.seed
        )
        return ExitCode.SUCCESS
    if args.command == 'report':
        stats = args.stats or str(Path(env_output_dir()) / STATS_FILE)
        cmd_report(stats, args.axes, args.output_dir, args.case)
        return ExitCode.SUCCESS
    overrides = {name: getattr(args, name) for name in _RUN_FLAGS}
    return cmd_run(build_run_config(args.config, overrides, args.grid))


def main(argv: Sequence[str] | None = None) -> int:
    """Entry point of the `pyfeatbench` console script."""
    args = build_parser().parse_args(argv)
    level = logging.DEBUG if args.verbose else logging.INFO
    LibraryLogger.verbose = args.verbose
    LibraryLogger.configure_logger(level, args.log_file)
    try:
        return _dispatch(args)
    except FeatBenchError as exc:
        info = ErrorCodes.get_error_info(exc)
        logger.error('%s: %s', info.message, exc)  # noqa: TRY400
        print(f'pyfeatbench: error: {exc}', file=sys.stderr)  # noqa: T201
        return info.exit_code


if __name__ == '__main__':
    sys.exit(main())
