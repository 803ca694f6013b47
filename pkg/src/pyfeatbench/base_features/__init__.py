"""Base classes shared by the detectors and descriptor extractors."""

from pyfeatbench.base_features.descriptor_base import (
    DESCRIPTOR_LAYOUT,
    Descriptor,
    DescriptorExtractor,
    DescriptorSet,
)
from pyfeatbench.base_features.detector_base import (
    FeatureDetector,
    keypoint_arrays,
    normalize_angle,
)

__all__ = [
    'DESCRIPTOR_LAYOUT',
    'Descriptor',
    'DescriptorExtractor',
    'DescriptorSet',
    'FeatureDetector',
    'keypoint_arrays',
    'normalize_angle',
]
