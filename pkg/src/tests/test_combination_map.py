"""Tests for method lookup and the combination matrix."""
import logging
from dataclasses import fields

import pytest

from pyfeatbench.base_features.descriptor_base import DESCRIPTOR_LAYOUT
from pyfeatbench.combination_map import (
    combination_matrix,
    get_descriptor,
    get_descriptor_map,
    get_detector,
    get_detector_map,
    select_combinations,
)
from pyfeatbench.const import DescriptorTypes, DetectorTypes
from pyfeatbench.models.bench_models import CombinationId
from pyfeatbench.utils.errors import ConfigError
from base_test_cases import TestBase

logger = logging.getLogger(__name__)


class TestCombinationMatrix(TestBase):
    """The 23 benchmarked pairs."""

    def test_matrix(self):
        """Matrix order with the two excluded pairs left out."""
        names = [combo.name for combo in combination_matrix()]
        assert len(names) == 23
        assert names[:5] == ['ORB-BRIEF', 'ORB-BRISK', 'ORB-SIFT', 'ORB-SURF', 'ORB-ORB']
        assert names[-1] == 'BRISK-ORB'
        assert 'SIFT-ORB' not in names
        assert 'BRISK-BRISK' not in names
        assert len(set(names)) == 23

    def test_select(self):
        """Selections come back in matrix order without repeats."""
        assert len(select_combinations(['all'])) == 23
        chosen = select_combinations(['fast-brief', 'ORB-ORB', 'Fast-Brief'])
        assert [combo.name for combo in chosen] == ['ORB-ORB', 'FAST-BRIEF']

    @pytest.mark.parametrize('name', ['SIFT-ORB', 'brisk-brisk', 'HARRIS-BRIEF', 'ORB'])
    def test_invalid_selection(self, name):
        """Excluded, unknown and malformed names are rejected."""
        with pytest.raises(ConfigError):
            select_combinations([name])

    def test_empty_selection(self):
        """Something must be selected."""
        with pytest.raises(ConfigError):
            select_combinations([])

    def test_combination_names(self):
        """Parsed names are canonical."""
        combo = CombinationId.parse(' surf-sift ')
        assert combo.detector is DetectorTypes.SURF
        assert combo.descriptor is DescriptorTypes.SIFT
        assert str(combo) == 'SURF-SIFT'


class TestMethodLookup(TestBase):
    """Detector and descriptor lookup by name."""

    detectors = list(DetectorTypes)
    descriptors = list(DescriptorTypes)

    def test_detector(self, detector):
        """Every detector name resolves, whatever its case."""
        assert get_detector(str(detector).lower()).method is detector
        assert get_detector_map(detector) is not None

    def test_descriptor(self, descriptor):
        """Every descriptor name resolves, its layout from the descriptor table."""
        extractor = get_descriptor(str(descriptor).lower(), seed=7)
        assert extractor.method is descriptor
        assert extractor.seed == 7
        assert (extractor.kind, extractor.length) == DESCRIPTOR_LAYOUT[descriptor]
        mapping = get_descriptor_map(descriptor)
        assert mapping is not None
        assert {f.name for f in fields(mapping)} == {'class_name', 'module', 'method'}

    def test_unknown_methods(self):
        """Unknown names raise configuration errors."""
        assert get_detector_map('HARRIS') is None
        with pytest.raises(ConfigError):
            get_detector('HARRIS')
        with pytest.raises(ConfigError):
            get_descriptor('FREAK')
