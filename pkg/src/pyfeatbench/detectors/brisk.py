"""Scale-space FAST detector.

FAST scores are computed on octave layers (factor `2**i`) and intra-octave
layers (factor `1.5 * 2**i`) of the base image. A layer maximum survives when
its score is at least the largest score in the matching window of each
adjacent layer. Survivors are refined by a 2-D quadratic fit of the score in
their layer and a parabola across the three layers, and duplicates of the same
structure found on several layers are collapsed in base coordinates.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage
from scipy.spatial import cKDTree

from pyfeatbench.base_features.detector_base import FeatureDetector
from pyfeatbench.const import (
    FAST_KEYPOINT_SCALE,
    MIN_PYRAMID_SIDE,
    DetectorTypes,
)
from pyfeatbench.detectors.fast import fast_scores, nonmax_mask
from pyfeatbench.imgcore import (
    BASE_SIGMA,
    Image,
    Pyramid,
    PyramidLevel,
    downsampled_size,
    scaled_level,
)
from pyfeatbench.models.config_models import DetectorParams
from pyfeatbench.models.feature_models import Keypoint

logger = logging.getLogger(__name__)

MIN_BRISK_SIDE = 64
INTRA_OCTAVE_FACTOR = 1.5
COLLAPSE_RADIUS = 1.5
MAX_SUBPIXEL_OFFSET = 0.5


@dataclass(frozen=True)
class _Candidate:
    layer: int
    x: int
    y: int
    score: int
    base_x: float
    base_y: float


def layer_factors(octaves: int) -> list[float]:
    """Downsampling factors of the octave and intra-octave layers, ascending."""
    factors: list[float] = []
    for octave in range(octaves):
        factors.extend((2.0**octave, INTRA_OCTAVE_FACTOR * 2.0**octave))
    return factors


def brisk_pyramid(img: Image, octaves: int) -> Pyramid:
    """Octave and intra-octave layers down to 32 pixels.

    Layer 0 is the base image. Each other layer is the base smoothed and
    resampled to `floor(base / factor)`.
    """
    img.require_size(MIN_PYRAMID_SIDE)
    levels = [PyramidLevel(img, 1.0, BASE_SIGMA)]
    for factor in layer_factors(octaves)[1:]:
        width, height = downsampled_size(img.width, img.height, factor)
        if min(width, height) < MIN_PYRAMID_SIDE:
            break
        image, sigma = scaled_level(img, factor)
        levels.append(PyramidLevel(image, 1.0 / factor, sigma))
    return Pyramid(tuple(levels))


def window_maxima(
    scores: np.ndarray, xs: np.ndarray, ys: np.ndarray, ratio: float
) -> np.ndarray:
    """Largest score of a layer around positions given in another layer.

    Args:
        scores (np.ndarray): Score map of the layer searched.
        xs (np.ndarray): Columns in the source layer.
        ys (np.ndarray): Rows in the source layer.
        ratio (float): Source factor divided by the searched layer factor.

    Returns:
        np.ndarray: Maxima over windows of half-width
            `max(1, ceil(1.5 * ratio - 0.5))` centred on the mapped positions.
    """
    half = max(1, math.ceil(COLLAPSE_RADIUS * ratio - 0.5))
    pooled = ndimage.maximum_filter(scores, size=2 * half + 1, mode='constant', cval=0)
    height, width = scores.shape
    # Nearest pixel of (x + 0.5) * ratio - 0.5.
    cols = np.clip(np.floor((xs + 0.5) * ratio).astype(np.intp), 0, width - 1)
    rows = np.clip(np.floor((ys + 0.5) * ratio).astype(np.intp), 0, height - 1)
    return pooled[rows, cols]


def subpixel_offset(scores: np.ndarray, x: int, y: int) -> tuple[float, float]:
    """Vertex of the quadratic through the 3x3 score patch, clamped to +-0.5."""
    patch = scores[y - 1 : y + 2, x - 1 : x + 2].astype(np.float64)
    gx = (patch[1, 2] - patch[1, 0]) / 2.0
    gy = (patch[2, 1] - patch[0, 1]) / 2.0
    hxx = patch[1, 2] - 2.0 * patch[1, 1] + patch[1, 0]
    hyy = patch[2, 1] - 2.0 * patch[1, 1] + patch[0, 1]
    hxy = (patch[2, 2] - patch[2, 0] - patch[0, 2] + patch[0, 0]) / 4.0
    det = hxx * hyy - hxy * hxy
    if det <= 0 or hxx >= 0:
        return 0.0, 0.0
    ox = -(hyy * gx - hxy * gy) / det
    oy = -(hxx * gy - hxy * gx) / det
    limit = MAX_SUBPIXEL_OFFSET
    return float(np.clip(ox, -limit, limit)), float(np.clip(oy, -limit, limit))


def scale_offset(below: float | None, score: float, above: float | None) -> float:
    """Parabola vertex across three layers, in layer steps within +-0.5.

    A missing neighbour or a non-concave profile leaves the layer scale as is.
    """
    if below is None or above is None:
        return 0.0
    curvature = below - 2.0 * score + above
    if curvature >= 0:
        return 0.0
    delta = 0.5 * (below - above) / curvature
    return float(np.clip(delta, -MAX_SUBPIXEL_OFFSET, MAX_SUBPIXEL_OFFSET))


def fitted_factor(factors: list[float], layer: int, delta: float) -> float:
    """Layer factor moved by delta layers, interpolated on a log scale."""
    own = math.log2(factors[layer])
    step = 1 if delta >= 0 else -1
    if not 0 <= layer + step < len(factors):
        return factors[layer]
    neighbour = math.log2(factors[layer + step])
    return 2.0 ** (own + abs(delta) * (neighbour - own))


def _priority(candidate: _Candidate) -> tuple[int, int, int, int]:
    return (-candidate.score, candidate.layer, candidate.y, candidate.x)


def collapse_duplicates(
    candidates: list[_Candidate], factors: list[float]
) -> list[_Candidate]:
    """Keep the strongest of candidates closer than 1.5 times the larger layer scale.

    Candidates are visited by decreasing score, then by layer and raster order.
    """
    if not candidates:
        return []
    order = sorted(range(len(candidates)), key=lambda i: _priority(candidates[i]))
    points = np.array([(c.base_x, c.base_y) for c in candidates], dtype=np.float64)
    layer_scale = np.array([factors[c.layer] for c in candidates], dtype=np.float64)
    tree = cKDTree(points)
    reach = COLLAPSE_RADIUS * float(layer_scale.max())
    suppressed = np.zeros(len(candidates), dtype=bool)
    kept: list[int] = []
    for index in order:
        if suppressed[index]:
            continue
        kept.append(index)
        for other in tree.query_ball_point(points[index], reach):
            if other == index:
                continue
            limit = COLLAPSE_RADIUS * max(layer_scale[index], layer_scale[other])
            if np.hypot(*(points[other] - points[index])) < limit:
                suppressed[other] = True
    kept.sort(key=lambda i: (candidates[i].layer, candidates[i].y, candidates[i].x))
    return [candidates[i] for i in kept]


def brisk_detect(img: Image, params: DetectorParams | None = None) -> list[Keypoint]:
    """Detect scale-space FAST keypoints.

    Args:
        img (Image): Input image, at least 64x64.
        params (DetectorParams | None): Parameters; the `brisk` group and the
            shared `fast_arc` are used.

    Returns:
        list[Keypoint]: Keypoints by layer and raster order, scale
            `7 * fitted factor`, orientation 0, the layer FAST score as
            response and the layer index as octave.
    """
    img.require_size(MIN_BRISK_SIDE)
    params = params if params is not None else DetectorParams()
    brisk = params.brisk
    pyramid = brisk_pyramid(img, brisk.octaves)
    factors = layer_factors(brisk.octaves)[: len(pyramid)]
    layer_scores: list[np.ndarray] = []
    layer_masks: list[np.ndarray] = []
    for level in pyramid:
        scores, keys = fast_scores(level.image.data, params.fast_arc)
        layer_scores.append(scores)
        layer_masks.append((scores >= brisk.fast_threshold) & nonmax_mask(keys))

    candidates: list[_Candidate] = []
    refinement: dict[tuple[int, int, int], tuple[float | None, float | None]] = {}
    for k, level in enumerate(pyramid):
        ys, xs = np.nonzero(layer_masks[k])
        if xs.size == 0:
            continue
        scores = layer_scores[k][ys, xs]
        keep = np.ones(xs.size, dtype=bool)
        neighbours: list[np.ndarray | None] = []
        for j in (k - 1, k + 1):
            if not 0 <= j < len(pyramid):
                neighbours.append(None)
                continue
            maxima = window_maxima(layer_scores[j], xs, ys, factors[k] / factors[j])
            keep &= scores >= maxima
            neighbours.append(maxima)
        below, above = neighbours
        base_x, base_y = level.to_base(xs.astype(np.float64), ys.astype(np.float64), img)
        for i in np.flatnonzero(keep).tolist():
            candidate = _Candidate(
                k,
                int(xs[i]),
                int(ys[i]),
                int(scores[i]),
                float(base_x[i]),
                float(base_y[i]),
            )
            candidates.append(candidate)
            refinement[(k, candidate.x, candidate.y)] = (
                None if below is None else float(below[i]),
                None if above is None else float(above[i]),
            )
        logger.debug(
            'BRISK layer %d (x%.2f): %d candidates', k, factors[k], int(keep.sum())
        )

    max_x = math.nextafter(img.width, 0)
    max_y = math.nextafter(img.height, 0)
    keypoints: list[Keypoint] = []
    for candidate in collapse_duplicates(candidates, factors):
        k = candidate.layer
        ox, oy = subpixel_offset(layer_scores[k], candidate.x, candidate.y)
        x, y = pyramid[k].to_base(candidate.x + ox, candidate.y + oy, img)
        below, above = refinement[(k, candidate.x, candidate.y)]
        delta = scale_offset(below, float(candidate.score), above)
        keypoints.append(
            Keypoint(
                x=min(max(float(x), 0.0), max_x),
                y=min(max(float(y), 0.0), max_y),
                scale=FAST_KEYPOINT_SCALE * fitted_factor(factors, k, delta),
                orientation=0.0,
                response=float(candidate.score),
                octave=k,
            )
        )
    return keypoints


class BriskDetector(FeatureDetector):
    """FAST maxima across octave and intra-octave layers."""

    __slots__ = ()

    method = DetectorTypes.BRISK
    min_size = MIN_BRISK_SIDE

    def _detect(self, img: Image) -> list[Keypoint]:
        return brisk_detect(img, self.params)
