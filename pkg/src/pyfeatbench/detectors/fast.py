"""FAST segment-test corner detector.

A pixel is a corner at threshold t when `arc` contiguous pixels of the
16-pixel Bresenham circle of radius 3 are all brighter than centre + t or all
darker than centre - t. Its score is the largest t for which this holds.

Non-maximum suppression ranks pixels by the score, then by the longest
contiguous circle run exceeding the score, and breaks exact ties in raster
order: a pixel must beat its earlier 8-neighbours strictly and its later ones
or equal them. The ranking does not depend on the threshold, so raising the
threshold only ever removes keypoints.
"""

from __future__ import annotations

import logging

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from pyfeatbench.base_features.detector_base import FeatureDetector
from pyfeatbench.const import (
    FAST_ARC,
    FAST_ARC_RANGE,
    FAST_CIRCLE_RADIUS,
    FAST_KEYPOINT_SCALE,
    FAST_THRESHOLD,
    DetectorTypes,
)
from pyfeatbench.imgcore import Image
from pyfeatbench.models.feature_models import Keypoint
from pyfeatbench.utils.helpers import Validators

logger = logging.getLogger(__name__)

CIRCLE_OFFSETS: tuple[tuple[int, int], ...] = (
    (0, -3),
    (1, -3),
    (2, -2),
    (3, -1),
    (3, 0),
    (3, 1),
    (2, 2),
    (1, 3),
    (0, 3),
    (-1, 3),
    (-2, 2),
    (-3, 1),
    (-3, 0),
    (-3, -1),
    (-2, -2),
    (-1, -3),
)
"""(dx, dy) of the 16 circle pixels, clockwise from the top."""

CIRCLE_SIZE = len(CIRCLE_OFFSETS)
MIN_FAST_SIDE = 2 * FAST_CIRCLE_RADIUS + 1
_KEY_STRIDE = 32
_NO_KEY = np.iinfo(np.int32).min

# Earlier raster neighbours must be beaten strictly, later ones at least tied.
_EARLIER = ((-1, -1), (-1, 0), (-1, 1), (0, -1))
_LATER = ((0, 1), (1, -1), (1, 0), (1, 1))


def circle_differences(array: np.ndarray) -> np.ndarray:
    """Circle pixel minus centre, shape (16, h - 6, w - 6), int16."""
    r = FAST_CIRCLE_RADIUS
    height, width = array.shape
    data = array.astype(np.int16)
    centre = data[r : height - r, r : width - r]
    return np.stack(
        [
            data[r + dy : height - r + dy, r + dx : width - r + dx] - centre
            for dx, dy in CIRCLE_OFFSETS
        ]
    )


def _longest_run(mask: np.ndarray) -> np.ndarray:
    """Longest circular run of True along axis 0, capped at 16."""
    run = np.zeros(mask.shape[1:], dtype=np.int32)
    best = np.zeros_like(run)
    for index in range(2 * CIRCLE_SIZE):
        run = (run + 1) * mask[index % CIRCLE_SIZE]
        np.maximum(best, run, out=best)
    return np.minimum(best, CIRCLE_SIZE)


def fast_scores(array: np.ndarray, arc: int = FAST_ARC) -> tuple[np.ndarray, np.ndarray]:
    """Segment-test scores and suppression keys of every pixel.

    Args:
        array (np.ndarray): uint8 image of at least 7x7 pixels.
        arc (int): Contiguous circle pixels required.

    Returns:
        tuple[np.ndarray, np.ndarray]: int32 score map, 0 within 3 pixels of
            the border, and the int32 ranking key `score * 32 + run`.
    """
    height, width = array.shape
    scores = np.zeros((height, width), dtype=np.int32)
    keys = np.zeros((height, width), dtype=np.int32)
    r = FAST_CIRCLE_RADIUS
    if height < MIN_FAST_SIDE or width < MIN_FAST_SIDE:
        return scores, keys
    diffs = circle_differences(array)
    best = []
    for polarity in (diffs, -diffs):
        wrapped = np.concatenate([polarity, polarity[: arc - 1]], axis=0)
        arc_min = sliding_window_view(wrapped, arc, axis=0).min(axis=-1)
        best.append(arc_min.max(axis=0).astype(np.int32))
    bright, dark = best
    raw = np.maximum(bright, dark) - 1
    polarity = np.where(bright >= dark, 1, -1).astype(np.int16)
    run = _longest_run(diffs * polarity[None] > raw[None])
    interior = np.maximum(raw, 0)
    scores[r : height - r, r : width - r] = interior
    keys[r : height - r, r : width - r] = interior * _KEY_STRIDE + run
    return scores, keys


def nonmax_mask(keys: np.ndarray) -> np.ndarray:
    """Pixels whose key wins against all 8 neighbours under raster tie-breaking."""
    padded = np.pad(keys, 1, mode='constant', constant_values=_NO_KEY)
    height, width = keys.shape
    mask = np.ones((height, width), dtype=bool)
    for dy, dx in _EARLIER:
        mask &= keys > padded[1 + dy : 1 + dy + height, 1 + dx : 1 + dx + width]
    for dy, dx in _LATER:
        mask &= keys >= padded[1 + dy : 1 + dy + height, 1 + dx : 1 + dx + width]
    return mask


def fast_corner_mask(
    array: np.ndarray,
    threshold: int = FAST_THRESHOLD,
    arc: int = FAST_ARC,
    nonmax: bool = True,
) -> tuple[np.ndarray, np.ndarray]:
    """Boolean corner mask and score map of an image array."""
    scores, keys = fast_scores(array, arc)
    mask = scores >= threshold
    if nonmax:
        mask &= nonmax_mask(keys)
    return mask, scores


def fast_detect(
    img: Image,
    threshold: int = FAST_THRESHOLD,
    arc: int = FAST_ARC,
    nonmax: bool = True,
) -> list[Keypoint]:
    """Detect FAST corners.

    Args:
        img (Image): Input image, at least 7x7.
        threshold (int): Intensity delta, > 0.
        arc (int): Contiguous circle pixels, within [9, 12].
        nonmax (bool): Keep only 3x3 score maxima.

    Returns:
        list[Keypoint]: Corners in raster order with scale 7, orientation 0,
            octave 0 and the segment-test score as response.

    Raises:
        ImageSizeError: Image smaller than 7x7.
        ParameterError: Threshold or arc out of range.
    """
    Validators.require_positive('threshold', threshold)
    Validators.require_range('arc', arc, *FAST_ARC_RANGE)
    img.require_size(MIN_FAST_SIDE)
    mask, scores = fast_corner_mask(img.data, threshold, arc, nonmax)
    ys, xs = np.nonzero(mask)
    return [
        Keypoint(float(x), float(y), FAST_KEYPOINT_SCALE, 0.0, float(scores[y, x]), 0)
        for y, x in zip(ys.tolist(), xs.tolist(), strict=True)
    ]


class FastDetector(FeatureDetector):
    """Single-scale FAST corners with non-maximum suppression."""

    __slots__ = ()

    method = DetectorTypes.FAST
    min_size = MIN_FAST_SIDE

    def _detect(self, img: Image) -> list[Keypoint]:
        return fast_detect(img, self.params.fast_threshold, self.params.fast_arc)
