"""Contains the base test case shared by the pyfeatbench test modules."""

from __future__ import annotations

import logging

import numpy as np
import pytest

from defaults import TestDefaults


class TestBase:
    """Base class for tests.

    Attributes:
        caplog (LogCaptureFixture): Pytest fixture for capturing logs.
        rng (np.random.Generator): Generator seeded with `seed`.
        tmp (Path): Per-test temporary directory.
    """

    seed = TestDefaults.seed

    @pytest.fixture(autouse=True, scope='function')
    def setup(self, caplog, tmp_path):
        """Fixture to start log capture and seed the random generator.

        Yields:
            self: Class instance with `caplog`, `rng` and `tmp` set.
        """
        self.caplog = caplog
        self.caplog.set_level(logging.DEBUG)
        self.rng = np.random.default_rng(self.seed)
        self.tmp = tmp_path
        yield

    def textured(self, width: int = 128, height: int = 128):
        """Smoothed noise image drawn from the test generator."""
        return TestDefaults.textured(self.rng, width, height)
