"""Unsteered BRIEF descriptor.

The image is smoothed once and each of the 256 test pairs of the seeded
pattern compares two smoothed intensities around the keypoint, ignoring its
scale and orientation.
"""

from __future__ import annotations

import logging
from collections.abc import Sequence

import numpy as np

from pyfeatbench.base_features.descriptor_base import DescriptorExtractor, DescriptorSet
from pyfeatbench.base_features.detector_base import keypoint_arrays
from pyfeatbench.const import BRIEF_BITS, PATTERN_SEED, DescriptorTypes
from pyfeatbench.descriptors.patterns import BRIEF_HALF_PATCH, brief_pattern
from pyfeatbench.imgcore import Image, smooth_array
from pyfeatbench.models.config_models import DescriptorParams
from pyfeatbench.models.feature_models import Keypoint

logger = logging.getLogger(__name__)


def binary_tests(
    smoothed: np.ndarray, cols: np.ndarray, rows: np.ndarray, pattern: np.ndarray
) -> np.ndarray:
    """Bits `I(p) < I(q)` for sample offsets already added to integer centres.

    Args:
        smoothed (np.ndarray): Smoothed image.
        cols (np.ndarray): (n,) or (n, 1) centre columns.
        rows (np.ndarray): (n,) or (n, 1) centre rows.
        pattern (np.ndarray): (n_bits, 4) or (n, n_bits, 4) integer offsets.

    Returns:
        np.ndarray: (n, n_bits) boolean array.
    """
    cols = np.asarray(cols).reshape(-1, 1)
    rows = np.asarray(rows).reshape(-1, 1)
    first = smoothed[rows + pattern[..., 1], cols + pattern[..., 0]]
    second = smoothed[rows + pattern[..., 3], cols + pattern[..., 2]]
    return first < second


class BriefExtractor(DescriptorExtractor):
    """256-bit BRIEF on a 31x31 patch."""

    __slots__ = ()

    method = DescriptorTypes.BRIEF

    def _describe(
        self, img: Image, keypoints: list[Keypoint]
    ) -> tuple[list[Keypoint], np.ndarray]:
        pattern = brief_pattern(self.seed)
        xs, ys, _, _ = keypoint_arrays(keypoints)
        cols = np.floor(xs + 0.5).astype(np.intp)
        rows = np.floor(ys + 0.5).astype(np.intp)
        half = BRIEF_HALF_PATCH
        inside = (
            (cols >= half)
            & (cols <= img.width - 1 - half)
            & (rows >= half)
            & (rows <= img.height - 1 - half)
        )
        kept = [kp for kp, keep in zip(keypoints, inside.tolist(), strict=True) if keep]
        if not kept:
            return [], np.zeros((0, BRIEF_BITS // 8), dtype=np.uint8)
        smoothed = smooth_array(img.data, self.params.brief_smoothing_sigma)
        bits = binary_tests(smoothed, cols[inside], rows[inside], pattern)
        return kept, np.packbits(bits, axis=1)


def brief_describe(
    img: Image,
    keypoints: Sequence[Keypoint],
    params: DescriptorParams | None = None,
    seed: int = PATTERN_SEED,
) -> tuple[list[Keypoint], DescriptorSet]:
    """Describe keypoints with BRIEF, dropping those whose patch leaves the image."""
    return BriefExtractor(params, seed).describe(img, keypoints)
