"""Steered BRIEF as used by ORB.

The BRIEF test pairs are rotated by the keypoint orientation, quantized to
2*pi/30 steps, and scaled by `max(scale, 31) / 31`, quantized to powers of 1.2.
The smoothing grows with the same factor. At orientation 0 and scale 31 the
descriptor equals BRIEF.

Keypoints carrying orientation 0 at most the FAST circle size first receive
an intensity-centroid orientation.
"""

from __future__ import annotations

import dataclasses
import logging
import math
from collections.abc import Sequence
from functools import lru_cache

import numpy as np

from pyfeatbench.base_features.descriptor_base import DescriptorExtractor, DescriptorSet
from pyfeatbench.base_features.detector_base import TWO_PI, keypoint_arrays
from pyfeatbench.const import (
    BRIEF_BITS,
    FAST_KEYPOINT_SCALE,
    ORB_ANGLE_STEPS,
    ORB_PATCH_SIZE,
    ORB_SCALE_FACTOR,
    PATTERN_SEED,
    DescriptorTypes,
)
from pyfeatbench.descriptors.brief import binary_tests
from pyfeatbench.descriptors.patterns import brief_pattern
from pyfeatbench.detectors.orb import intensity_centroid_angle
from pyfeatbench.imgcore import Image, smooth_array
from pyfeatbench.models.config_models import DescriptorParams
from pyfeatbench.models.feature_models import Keypoint

logger = logging.getLogger(__name__)

ANGLE_STEP = TWO_PI / ORB_ANGLE_STEPS


def angle_step(theta: np.ndarray) -> np.ndarray:
    """Nearest of the 30 orientation steps."""
    steps = np.floor(np.asarray(theta) / ANGLE_STEP + 0.5).astype(np.intp)
    return steps % ORB_ANGLE_STEPS


def scale_level(scale: np.ndarray) -> np.ndarray:
    """Nearest power of 1.2 of `max(scale, 31) / 31`."""
    scale = np.asarray(scale, dtype=np.float64)
    factor = np.maximum(scale, ORB_PATCH_SIZE) / ORB_PATCH_SIZE
    return np.floor(np.log(factor) / math.log(ORB_SCALE_FACTOR) + 0.5).astype(np.intp)


@lru_cache(maxsize=512)
def steered_pattern(seed: int, step: int, level: int) -> np.ndarray:
    """BRIEF pairs rotated by `step` orientation steps and scaled by 1.2**level.

    Returns:
        np.ndarray: Read-only (256, 4) intp offsets, rounded half up.
    """
    pattern = brief_pattern(seed).astype(np.float64)
    theta = step * ANGLE_STEP
    cos, sin = math.cos(theta), math.sin(theta)
    factor = ORB_SCALE_FACTOR**level
    steered = np.empty_like(pattern)
    for x_col, y_col in ((0, 1), (2, 3)):
        px, py = pattern[:, x_col], pattern[:, y_col]
        steered[:, x_col] = (cos * px - sin * py) * factor
        steered[:, y_col] = (sin * px + cos * py) * factor
    result = np.floor(steered + 0.5).astype(np.intp)
    result.setflags(write=False)
    return result


def backfill_orientation(img: Image, keypoints: list[Keypoint]) -> list[Keypoint]:
    """Give orientation-0 keypoints of FAST size an intensity-centroid angle."""
    missing = [
        i
        for i, kp in enumerate(keypoints)
        if kp.orientation == 0.0 and kp.scale <= FAST_KEYPOINT_SCALE
    ]
    if not missing:
        return keypoints
    xs, ys, _, _ = keypoint_arrays([keypoints[i] for i in missing])
    angles = intensity_centroid_angle(
        img.data, np.floor(xs + 0.5).astype(np.intp), np.floor(ys + 0.5).astype(np.intp)
    )
    filled = list(keypoints)
    for index, angle in zip(missing, angles.tolist(), strict=True):
        filled[index] = dataclasses.replace(filled[index], orientation=float(angle))
    return filled


class OrbExtractor(DescriptorExtractor):
    """256-bit steered BRIEF."""

    __slots__ = ()

    method = DescriptorTypes.ORB

    def _describe(
        self, img: Image, keypoints: list[Keypoint]
    ) -> tuple[list[Keypoint], np.ndarray]:
        keypoints = backfill_orientation(img, keypoints)
        xs, ys, scales, orientations = keypoint_arrays(keypoints)
        cols = np.floor(xs + 0.5).astype(np.intp)
        rows = np.floor(ys + 0.5).astype(np.intp)
        steps = angle_step(orientations)
        levels = scale_level(scales)
        patterns = np.stack(
            [
                steered_pattern(self.seed, step, level)
                for step, level in zip(steps.tolist(), levels.tolist(), strict=True)
            ]
        )
        sample_x = cols[:, None, None] + patterns[..., 0::2]
        sample_y = rows[:, None, None] + patterns[..., 1::2]
        inside = (
            (sample_x.min(axis=(1, 2)) >= 0)
            & (sample_x.max(axis=(1, 2)) <= img.width - 1)
            & (sample_y.min(axis=(1, 2)) >= 0)
            & (sample_y.max(axis=(1, 2)) <= img.height - 1)
        )
        kept_index = np.flatnonzero(inside)
        bits = np.zeros((kept_index.size, BRIEF_BITS), dtype=bool)
        for level in np.unique(levels[kept_index]).tolist():
            sigma = self.params.brief_smoothing_sigma * ORB_SCALE_FACTOR**level
            smoothed = smooth_array(img.data, sigma)
            group = np.flatnonzero(levels[kept_index] == level)
            chosen = kept_index[group]
            bits[group] = binary_tests(
                smoothed, cols[chosen], rows[chosen], patterns[chosen]
            )
        kept = [keypoints[i] for i in kept_index.tolist()]
        return kept, np.packbits(bits, axis=1)


def orb_describe(
    img: Image,
    keypoints: Sequence[Keypoint],
    params: DescriptorParams | None = None,
    seed: int = PATTERN_SEED,
) -> tuple[list[Keypoint], DescriptorSet]:
    """Describe keypoints with steered BRIEF, dropping those sampled off the image."""
    return OrbExtractor(params, seed).describe(img, keypoints)
