"""Oriented FAST on a Gaussian pyramid.

FAST corners are found on every pyramid level, ranked by the Harris corner
measure and the strongest `n_features` kept over all levels. Each keypoint is
oriented by the intensity centroid of a radius-15 disk around it.
"""

from __future__ import annotations

import logging
import math
from functools import lru_cache

import numpy as np
from scipy import ndimage

from pyfeatbench.base_features.detector_base import FeatureDetector, normalize_angle
from pyfeatbench.const import (
    HARRIS_K,
    HARRIS_WINDOW,
    MIN_PYRAMID_SIDE,
    ORB_CENTROID_RADIUS,
    ORB_PATCH_SIZE,
    DetectorTypes,
)
from pyfeatbench.detectors.fast import fast_corner_mask
from pyfeatbench.imgcore import Image, build_pyramid
from pyfeatbench.models.config_models import DetectorParams
from pyfeatbench.models.feature_models import Keypoint

logger = logging.getLogger(__name__)

ORB_BORDER = ORB_CENTROID_RADIUS + 1


@lru_cache(maxsize=8)
def disk_offsets(radius: int) -> tuple[np.ndarray, np.ndarray]:
    """(dx, dy) integer offsets with dx**2 + dy**2 <= radius**2."""
    span = np.arange(-radius, radius + 1)
    dy, dx = np.meshgrid(span, span, indexing='ij')
    inside = dx * dx + dy * dy <= radius * radius
    offsets = (dx[inside].astype(np.intp), dy[inside].astype(np.intp))
    for array in offsets:
        array.setflags(write=False)
    return offsets


def intensity_centroid_angle(
    array: np.ndarray, xs: np.ndarray, ys: np.ndarray, radius: int = ORB_CENTROID_RADIUS
) -> np.ndarray:
    """Intensity-centroid orientation atan2(m01, m10) at integer positions.

    Positions closer than `radius` to the border are clamped to the image.
    The y axis points down, so a patch brighter above its centre yields 3*pi/2.

    Returns:
        np.ndarray: Radians in [0, 2*pi).
    """
    dx, dy = disk_offsets(radius)
    height, width = array.shape
    cols = np.clip(np.asarray(xs, dtype=np.intp)[:, None] + dx[None], 0, width - 1)
    rows = np.clip(np.asarray(ys, dtype=np.intp)[:, None] + dy[None], 0, height - 1)
    patch = np.asarray(array, dtype=np.float64)[rows, cols]
    m10 = patch @ dx.astype(np.float64)
    m01 = patch @ dy.astype(np.float64)
    return normalize_angle(np.arctan2(m01, m10))


def harris_response(array: np.ndarray, k: float = HARRIS_K) -> np.ndarray:
    """Harris measure det(M) - k * trace(M)**2 with a 7x7 box window."""
    data = np.asarray(array, dtype=np.float64)
    ix = ndimage.sobel(data, axis=1, mode='nearest')
    iy = ndimage.sobel(data, axis=0, mode='nearest')
    sxx = ndimage.uniform_filter(ix * ix, HARRIS_WINDOW, mode='nearest')
    syy = ndimage.uniform_filter(iy * iy, HARRIS_WINDOW, mode='nearest')
    sxy = ndimage.uniform_filter(ix * iy, HARRIS_WINDOW, mode='nearest')
    trace = sxx + syy
    return sxx * syy - sxy * sxy - k * trace * trace


def orb_detect(img: Image, params: DetectorParams | None = None) -> list[Keypoint]:
    """Detect oriented FAST keypoints over a Gaussian pyramid.

    Args:
        img (Image): Input image, at least 32x32.
        params (DetectorParams | None): FAST threshold and arc plus the `orb` group.

    Returns:
        list[Keypoint]: Up to `n_features` keypoints by decreasing Harris
            response, positions in base pixels, scale `31 * factor**level`.
    """
    params = params if params is not None else DetectorParams()
    orb = params.orb
    pyramid = build_pyramid(img, orb.levels, orb.scale_factor)
    xs_all: list[np.ndarray] = []
    ys_all: list[np.ndarray] = []
    harris_all: list[np.ndarray] = []
    angles_all: list[np.ndarray] = []
    levels_all: list[np.ndarray] = []
    for index, level in enumerate(pyramid):
        data = level.image.data
        mask, _ = fast_corner_mask(data, params.fast_threshold, params.fast_arc)
        mask[:ORB_BORDER] = False
        mask[-ORB_BORDER:] = False
        mask[:, :ORB_BORDER] = False
        mask[:, -ORB_BORDER:] = False
        ys, xs = np.nonzero(mask)
        if xs.size == 0:
            continue
        harris = harris_response(data)[ys, xs]
        angles = intensity_centroid_angle(data, xs, ys)
        base_x, base_y = level.to_base(xs.astype(np.float64), ys.astype(np.float64), img)
        xs_all.append(base_x)
        ys_all.append(base_y)
        harris_all.append(harris)
        angles_all.append(angles)
        levels_all.append(np.full(xs.size, index, dtype=np.intp))
        logger.debug(
            'ORB level %d (%dx%d): %d candidates', index, *data.shape[::-1], xs.size
        )
    if not xs_all:
        return []
    harris = np.concatenate(harris_all)
    order = np.argsort(-harris, kind='stable')[: orb.n_features]
    base_x = np.concatenate(xs_all)[order]
    base_y = np.concatenate(ys_all)[order]
    angles = np.concatenate(angles_all)[order]
    levels = np.concatenate(levels_all)[order]
    harris = harris[order]
    max_x = math.nextafter(img.width, 0)
    max_y = math.nextafter(img.height, 0)
    return [
        Keypoint(
            x=min(max(float(x), 0.0), max_x),
            y=min(max(float(y), 0.0), max_y),
            scale=ORB_PATCH_SIZE * orb.scale_factor**lvl,
            orientation=float(angle),
            response=max(float(score), 0.0),
            octave=int(lvl),
        )
        for x, y, angle, lvl, score in zip(
            base_x.tolist(),
            base_y.tolist(),
            angles.tolist(),
            levels.tolist(),
            harris.tolist(),
            strict=True,
        )
    ]


class OrbDetector(FeatureDetector):
    """oFAST keypoints ranked by Harris response."""

    __slots__ = ()

    method = DetectorTypes.ORB
    min_size = MIN_PYRAMID_SIDE

    def _detect(self, img: Image) -> list[Keypoint]:
        return orb_detect(img, self.params)
