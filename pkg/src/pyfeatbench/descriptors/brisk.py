"""BRISK binary descriptor.

The 60-point concentric pattern is scaled by `max(scale, 7) / 7`. Every point
is read from the smoothing-ladder level nearest to its own smoothing sigma,
bilinearly interpolated. Keypoints with orientation 0 are oriented by the mean
local gradient over the long pairs; the pattern is then rotated and each
short pair yields the bit `I(a) > I(b)`.
"""

from __future__ import annotations

import dataclasses
import logging
from collections.abc import Sequence

import numpy as np

from pyfeatbench.base_features.descriptor_base import DescriptorExtractor, DescriptorSet
from pyfeatbench.base_features.detector_base import keypoint_arrays, normalize_angle
from pyfeatbench.const import FAST_KEYPOINT_SCALE, PATTERN_SEED, DescriptorTypes
from pyfeatbench.descriptors.patterns import BriskPattern, brisk_pattern
from pyfeatbench.imgcore import Image, SmoothingLadder, sample_bilinear
from pyfeatbench.models.config_models import DescriptorParams
from pyfeatbench.models.feature_models import Keypoint

logger = logging.getLogger(__name__)

BORDER_MARGIN = 1.0


def pattern_intensities(
    ladder: SmoothingLadder, xs: np.ndarray, ys: np.ndarray, sigmas: np.ndarray
) -> np.ndarray:
    """Smoothed intensities at pattern points.

    Args:
        ladder (SmoothingLadder): Ladder of the described image.
        xs (np.ndarray): (n, 60) columns.
        ys (np.ndarray): (n, 60) rows.
        sigmas (np.ndarray): (n, 60) smoothing of each point.

    Returns:
        np.ndarray: (n, 60) float intensities.
    """
    levels = SmoothingLadder.level_indices(sigmas)
    values = np.empty(xs.shape, dtype=np.float64)
    for level in np.unique(levels).tolist():
        mask = levels == level
        values[mask] = sample_bilinear(ladder.level(level), xs[mask], ys[mask])
    return values


def long_pair_orientation(
    values: np.ndarray, offsets: np.ndarray, pattern: BriskPattern
) -> np.ndarray:
    """Direction of the mean long-pair gradient.

    Args:
        values (np.ndarray): (n, 60) intensities of the unrotated pattern.
        offsets (np.ndarray): (n, 60, 2) scaled pattern offsets.
        pattern (BriskPattern): Pattern providing the long pairs.

    Returns:
        np.ndarray: (n,) radians in [0, 2*pi), 0 where the gradient vanishes.
    """
    first, second = pattern.long_pairs[:, 0], pattern.long_pairs[:, 1]
    delta = offsets[:, second] - offsets[:, first]
    norm2 = np.sum(delta * delta, axis=2)
    contrast = values[:, second] - values[:, first]
    gradient = np.sum(delta * (contrast / norm2)[..., None], axis=1)
    angles = normalize_angle(np.arctan2(gradient[:, 1], gradient[:, 0]))
    return np.where(np.any(gradient != 0, axis=1), angles, 0.0)


class BriskExtractor(DescriptorExtractor):
    """512-bit BRISK on the 60-point pattern."""

    __slots__ = ()

    method = DescriptorTypes.BRISK

    def _describe(
        self, img: Image, keypoints: list[Keypoint]
    ) -> tuple[list[Keypoint], np.ndarray]:
        pattern = brisk_pattern()
        xs, ys, scales, orientations = keypoint_arrays(keypoints)
        factors = np.maximum(scales, FAST_KEYPOINT_SCALE) / FAST_KEYPOINT_SCALE
        reach = pattern.radius * factors + BORDER_MARGIN
        inside = (
            (xs - reach >= 0)
            & (xs + reach <= img.width - 1)
            & (ys - reach >= 0)
            & (ys + reach <= img.height - 1)
        )
        index = np.flatnonzero(inside)
        if index.size == 0:
            return [], np.zeros((0, pattern.short_pairs.shape[0] // 8), dtype=np.uint8)
        xs, ys = xs[index], ys[index]
        factors, orientations = factors[index], orientations[index]
        ladder = SmoothingLadder(img)
        offsets = pattern.points[None] * factors[:, None, None]
        sigmas = pattern.sigmas[None] * factors[:, None]

        missing = orientations == 0.0
        if np.any(missing):
            values = pattern_intensities(
                ladder,
                xs[missing, None] + offsets[missing, :, 0],
                ys[missing, None] + offsets[missing, :, 1],
                sigmas[missing],
            )
            orientations = orientations.copy()
            orientations[missing] = long_pair_orientation(
                values, offsets[missing], pattern
            )

        cos = np.cos(orientations)[:, None]
        sin = np.sin(orientations)[:, None]
        rot_x = cos * offsets[..., 0] - sin * offsets[..., 1]
        rot_y = sin * offsets[..., 0] + cos * offsets[..., 1]
        values = pattern_intensities(
            ladder, xs[:, None] + rot_x, ys[:, None] + rot_y, sigmas
        )
        first, second = pattern.short_pairs[:, 0], pattern.short_pairs[:, 1]
        bits = values[:, first] > values[:, second]

        kept = [
            dataclasses.replace(keypoints[i], orientation=float(theta))
            for i, theta in zip(index.tolist(), orientations.tolist(), strict=True)
        ]
        return kept, np.packbits(bits, axis=1)


def brisk_describe(
    img: Image,
    keypoints: Sequence[Keypoint],
    params: DescriptorParams | None = None,
    seed: int = PATTERN_SEED,
) -> tuple[list[Keypoint], DescriptorSet]:
    """Describe keypoints with BRISK, dropping those whose pattern leaves the image."""
    return BriskExtractor(params, seed).describe(img, keypoints)
