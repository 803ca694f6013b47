"""Tests for the pyfeatbench command line."""
import argparse
import logging

import pytest

from pyfeatbench.cli import (
    build_run_config,
    env_output_dir,
    env_workers,
    main,
    parse_size,
)
from pyfeatbench.const import (
    GRID_FILE,
    MANIFEST_FILE,
    METADATA_FILE,
    OUTPUT_DIR_ENV,
    REPORT_FILE,
    STATS_FILE,
    WORKERS_ENV,
    AccuracyPolicy,
    ExitCode,
    HistogramMethod,
)
from pyfeatbench.report import RANKING_FILE
from pyfeatbench.utils.errors import ConfigError
from base_test_cases import TestBase
from utils import read_table

logger = logging.getLogger(__name__)

# Keeps every query and template candidate of a small grid
RUN_FLAGS = [
    '--combinations',
    'FAST-BRIEF',
    '--lower',
    '0',
    '--upper',
    '1000000',
    '--prefilter-threshold',
    '0',
    '--prefilter-method',
    'intersection',
    '--min-correct',
    '1',
]


class TestCommandLine(TestBase):
    """Subcommands run through `main`."""

    def generate(self) -> int:
        """Render a two-point grid of 160x160 views below tmp/data."""
        return main(
            [
                'generate-synthetic',
                '--output-dir',
                str(self.tmp / 'data'),
                '--points',
                '2',
                '--size',
                '160x160',
                '--seed',
                '5',
            ]
        )

    def test_end_to_end(self):
        """Generate, run and report in sequence."""
        data = self.tmp / 'data'
        out = self.tmp / 'out'
        assert self.generate() == ExitCode.SUCCESS
        assert (data / MANIFEST_FILE).is_file()
        code = main(
            [
                'run',
                '--manifest',
                str(data / MANIFEST_FILE),
                '--grid',
                str(data / GRID_FILE),
                '--output-dir',
                str(out),
                *RUN_FLAGS,
            ]
        )
        assert code == ExitCode.SUCCESS
        for name in (REPORT_FILE, STATS_FILE, METADATA_FILE):
            assert (out / name).is_file()
        comment, rows = read_table(out / REPORT_FILE, delimiter=',')
        assert comment.endswith('mode=timing')
        assert rows[1][:2] == ['FAST', 'BRIEF']
        assert rows[1][4] == '30'

        code = main(['report', '--stats', str(out / STATS_FILE), '--axes', 'n_correct'])
        assert code == ExitCode.SUCCESS
        _, rows = read_table(out / RANKING_FILE)
        assert rows[0] == ['rank', 'combination', 'distance', 'n_correct']
        assert rows[1][:2] == ['1', 'FAST-BRIEF']

    def test_missing_manifest(self, capsys):
        """A run without a manifest is a configuration error."""
        code = main(['run', '--manifest', str(self.tmp / 'nothing.json')])
        assert code == ExitCode.CONFIG_ERROR
        assert 'does not exist' in capsys.readouterr().err

    def test_invalid_combination(self):
        """Excluded pairs are configuration errors."""
        assert self.generate() == ExitCode.SUCCESS
        manifest = str(self.tmp / 'data' / MANIFEST_FILE)
        code = main(['run', '--manifest', manifest, '--combinations', 'SIFT-ORB'])
        assert code == ExitCode.CONFIG_ERROR

    def test_missing_image(self):
        """An unreadable dataset image is a pipeline error."""
        assert self.generate() == ExitCode.SUCCESS
        (self.tmp / 'data' / 'templates' / 'p01.pgm').unlink()
        code = main(
            [
                'run',
                '--manifest',
                str(self.tmp / 'data' / MANIFEST_FILE),
                '--output-dir',
                str(self.tmp / 'out'),
                *RUN_FLAGS,
            ]
        )
        assert code == ExitCode.PIPELINE_ERROR
        assert 'p01.pgm' in self.caplog.text

    def test_missing_stats(self):
        """Reports need an existing stats dump."""
        code = main(['report', '--stats', str(self.tmp / STATS_FILE)])
        assert code == ExitCode.CONFIG_ERROR

    def test_bad_points(self):
        """Zero capture points cannot be rendered."""
        code = main(
            ['generate-synthetic', '--output-dir', str(self.tmp), '--points', '0']
        )
        assert code == ExitCode.CONFIG_ERROR


class TestRunConfiguration(TestBase):
    """Configuration file, environment and flag precedence."""

    def test_parse_size(self):
        """Sizes are WIDTHxHEIGHT."""
        assert parse_size('320x240') == (320, 240)
        assert parse_size('64X48') == (64, 48)
        with pytest.raises(argparse.ArgumentTypeError):
            parse_size('320')

    def test_environment(self):
        """Output directory and worker count come from the environment."""
        assert env_output_dir({}) == 'results'
        assert env_output_dir({OUTPUT_DIR_ENV: 'elsewhere'}) == 'elsewhere'
        assert env_workers({}) is None
        assert env_workers({WORKERS_ENV: '3'}) == 3
        with pytest.raises(ConfigError):
            env_workers({WORKERS_ENV: 'many'})

    def test_flags_override_file(self):
        """Flags win over the file, the file over the environment."""
        path = self.tmp / 'run.yaml'
        path.write_text(
            'workers: 2\n'
            'matcher:\n'
            '  ratio: 0.7\n'
            '  min_correct: 4\n'
            'accuracy:\n'
            '  policy: strict\n'
        )
        environ = {OUTPUT_DIR_ENV: 'env_out', WORKERS_ENV: '6'}
        config = build_run_config(
            path,
            {'min_correct': 9, 'prefilter_method': 'chi_square', 'ratio': None},
            environ=environ,
        )
        assert config.workers == 2
        assert config.output_dir == 'env_out'
        assert config.matcher.ratio == 0.7
        assert config.matcher.min_correct == 9
        assert config.accuracy.policy is AccuracyPolicy.STRICT
        assert config.elimination.prefilter_method is HistogramMethod.CHI_SQUARE

    def test_environment_defaults(self):
        """Without a file the environment fills in the defaults."""
        config = build_run_config(environ={WORKERS_ENV: '4'})
        assert config.workers == 4
        assert config.output_dir == 'results'
        assert build_run_config(environ={}).workers == 1

    def test_invalid_configuration(self):
        """Unknown keys, bad values and unreadable files are rejected."""
        path = self.tmp / 'run.json'
        path.write_text('{"matcher": {"ratio": 0.8, "speed": 1}}')
        with pytest.raises(ConfigError):
            build_run_config(path, environ={})
        path.write_text('{"workers": 0}')
        with pytest.raises(ConfigError):
            build_run_config(path, environ={})
        with pytest.raises(ConfigError):
            build_run_config(self.tmp / 'absent.yaml', environ={})
        with pytest.raises(ConfigError):
            build_run_config(overrides={'lower': 50, 'upper': 10}, environ={})
