"""Detector and descriptor mappings.

**To add a method: write its module under `detectors/` or `descriptors/` and
append a map entry to `detector_modules` or `descriptor_modules`.**

Each map names the module and the class implementing a method, so the bench
can build a detector or an extractor from a `DetectorTypes` or
`DescriptorTypes` value. The order of both lists is the order of the
benchmark matrix: detectors ORB, SURF, SIFT, FAST, BRISK, and within each
detector the descriptors BRIEF, BRISK, SIFT, SURF, ORB, less the excluded
pairs.

Attributes:
    detector_modules (list[DetectorMap]): Detector mappings.
    descriptor_modules (list[DescriptorMap]): Descriptor mappings.

Functions:
    get_detector_map: Get the mapping of a detector method.
    get_descriptor_map: Get the mapping of a descriptor method.
    get_detector: Instantiate the detector of a method.
    get_descriptor: Instantiate the descriptor extractor of a method.
    combination_matrix: The 23 detector/descriptor pairs in matrix order.
    select_combinations: Resolve a combination selection to matrix entries.
"""

from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import dataclass
from types import ModuleType
from typing import TYPE_CHECKING

from pyfeatbench.const import (
    EXCLUDED_COMBINATIONS,
    PATTERN_SEED,
    DescriptorTypes,
    DetectorTypes,
)
from pyfeatbench.descriptors import brief as brief_descriptor
from pyfeatbench.descriptors import brisk as brisk_descriptor
from pyfeatbench.descriptors import orb as orb_descriptor
from pyfeatbench.descriptors import sift as sift_descriptor
from pyfeatbench.descriptors import surf as surf_descriptor
from pyfeatbench.detectors import brisk as brisk_detector
from pyfeatbench.detectors import fast as fast_detector
from pyfeatbench.detectors import orb as orb_detector
from pyfeatbench.detectors import sift as sift_detector
from pyfeatbench.detectors import surf as surf_detector
from pyfeatbench.models.bench_models import CombinationId
from pyfeatbench.utils.errors import ConfigError

if TYPE_CHECKING:
    from pyfeatbench.base_features.descriptor_base import DescriptorExtractor
    from pyfeatbench.base_features.detector_base import FeatureDetector
    from pyfeatbench.models.config_models import DescriptorParams, DetectorParams

logger = logging.getLogger(__name__)

ALL_COMBINATIONS = 'all'


@dataclass(kw_only=True)
class FeatureMapTemplate:
    """Template for method mappings.

    Attributes:
        class_name (str): Class implementing the method.
        module (ModuleType): Module holding the class.
    """

    class_name: str
    module: ModuleType


@dataclass(kw_only=True)
class DetectorMap(FeatureMapTemplate):
    """Template for detector mappings.

    Attributes:
        method (DetectorTypes): Detector method.
    """

    method: DetectorTypes


@dataclass(kw_only=True)
class DescriptorMap(FeatureMapTemplate):
    """Template for descriptor mappings.

    Attributes:
        method (DescriptorTypes): Descriptor method.
    """

    method: DescriptorTypes


detector_modules = [
    DetectorMap(
        method=DetectorTypes.ORB,
        class_name='OrbDetector',
        module=orb_detector,
    ),
    DetectorMap(
        method=DetectorTypes.SURF,
        class_name='SurfDetector',
        module=surf_detector,
    ),
    DetectorMap(
        method=DetectorTypes.SIFT,
        class_name='SiftDetector',
        module=sift_detector,
    ),
    DetectorMap(
        method=DetectorTypes.FAST,
        class_name='FastDetector',
        module=fast_detector,
    ),
    DetectorMap(
        method=DetectorTypes.BRISK,
        class_name='BriskDetector',
        module=brisk_detector,
    ),
]
"""Detector mappings in matrix order."""

descriptor_modules = [
    DescriptorMap(
        method=DescriptorTypes.BRIEF,
        class_name='BriefExtractor',
        module=brief_descriptor,
    ),
    DescriptorMap(
        method=DescriptorTypes.BRISK,
        class_name='BriskExtractor',
        module=brisk_descriptor,
    ),
    DescriptorMap(
        method=DescriptorTypes.SIFT,
        class_name='SiftExtractor',
        module=sift_descriptor,
    ),
    DescriptorMap(
        method=DescriptorTypes.SURF,
        class_name='SurfExtractor',
        module=surf_descriptor,
    ),
    DescriptorMap(
        method=DescriptorTypes.ORB,
        class_name='OrbExtractor',
        module=orb_descriptor,
    ),
]
"""Descriptor mappings in matrix order."""


def get_detector_map(method: str) -> DetectorMap | None:
    """Get the detector mapping of a method.

    Args:
        method (str): Detector name, case-insensitive.

    Returns:
        DetectorMap | None: Mapping, or None if the method is unknown.
    """
    try:
        detector = DetectorTypes(method)
    except ValueError:
        return None
    for module in detector_modules:
        if module.method is detector:
            return module
    return None


def get_descriptor_map(method: str) -> DescriptorMap | None:
    """Get the descriptor mapping of a method.

    Args:
        method (str): Descriptor name, case-insensitive.

    Returns:
        DescriptorMap | None: Mapping, or None if the method is unknown.
    """
    try:
        descriptor = DescriptorTypes(method)
    except ValueError:
        return None
    for module in descriptor_modules:
        if module.method is descriptor:
            return module
    return None


def get_detector(method: str, params: DetectorParams | None = None) -> FeatureDetector:
    """Instantiate the detector of a method.

    Raises:
        ConfigError: Unknown method.
    """
    mapping = get_detector_map(method)
    if mapping is None:
        msg = f'Unknown detector {method!r}'
        raise ConfigError(msg)
    cls = getattr(mapping.module, mapping.class_name)
    return cls(params)  # type: ignore[no-any-return]


def get_descriptor(
    method: str, params: DescriptorParams | None = None, seed: int = PATTERN_SEED
) -> DescriptorExtractor:
    """Instantiate the descriptor extractor of a method.

    Raises:
        ConfigError: Unknown method.
    """
    mapping = get_descriptor_map(method)
    if mapping is None:
        msg = f'Unknown descriptor {method!r}'
        raise ConfigError(msg)
    cls = getattr(mapping.module, mapping.class_name)
    return cls(params, seed)  # type: ignore[no-any-return]


def combination_matrix() -> list[CombinationId]:
    """All 23 detector/descriptor pairs in matrix order."""
    return [
        CombinationId(detector.method, descriptor.method)
        for detector in detector_modules
        for descriptor in descriptor_modules
        if (detector.method, descriptor.method) not in EXCLUDED_COMBINATIONS
    ]


def select_combinations(names: Sequence[str | CombinationId]) -> list[CombinationId]:
    """Resolve a selection to matrix entries, in matrix order without repeats.

    Args:
        names (Sequence[str | CombinationId]): `all` or `DETECTOR-DESCRIPTOR`
            names, case-insensitive.

    Raises:
        ConfigError: Empty selection, unknown method or excluded pair.
    """
    if not names:
        msg = 'No combination selected'
        raise ConfigError(msg)
    matrix = combination_matrix()
    if any(
        isinstance(name, str) and name.strip().lower() == ALL_COMBINATIONS
        for name in names
    ):
        return matrix
    chosen = {
        name if isinstance(name, CombinationId) else CombinationId.parse(name)
        for name in names
    }
    return [combo for combo in matrix if combo in chosen]
