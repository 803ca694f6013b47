"""SIFT gradient-histogram descriptor.

A 16x16 grid of samples spaced `0.75 * sigma` apart, rotated to the keypoint
orientation, reads the gradient of the image smoothed to the keypoint scale.
Each sample votes its Gaussian-weighted magnitude into a 4x4 grid of 8-bin
orientation histograms with trilinear interpolation. The 128-vector is
normalized, clamped at 0.2 and normalized again; a patch without gradient
gives the zero vector.

Keypoint scales are read as the Gaussian sigma and clamped to
[1, min(width, height) / 48] so the window stays meaningful for any detector.
Sampling clamps at the image border, so no keypoint is dropped.
"""

from __future__ import annotations

import dataclasses
import logging
from collections.abc import Sequence

import numpy as np

from pyfeatbench.base_features.descriptor_base import DescriptorExtractor, DescriptorSet
from pyfeatbench.base_features.detector_base import TWO_PI, keypoint_arrays
from pyfeatbench.const import (
    PATTERN_SEED,
    SIFT_DESCRIPTOR_CLAMP,
    SIFT_DESCRIPTOR_SIZE,
    DescriptorTypes,
)
from pyfeatbench.detectors.sift import dominant_orientation, gradient_polar
from pyfeatbench.imgcore import Image, SmoothingLadder, sample_bilinear
from pyfeatbench.models.config_models import DescriptorParams
from pyfeatbench.models.feature_models import Keypoint

logger = logging.getLogger(__name__)

CELLS = 4
SAMPLES_PER_CELL = 4
ORIENTATION_BINS = 8
SAMPLE_SPACING = 0.75
WEIGHT_SIGMA = CELLS * SAMPLES_PER_CELL / 2.0
MAX_SIGMA_DIVISOR = 48.0
_NORM_EPS = 1e-12

_SIDE = CELLS * SAMPLES_PER_CELL
_OFFSETS = np.arange(_SIDE, dtype=np.float64) - (_SIDE - 1) / 2.0
_V, _U = np.meshgrid(_OFFSETS, _OFFSETS, indexing='ij')
_U = _U.ravel()
_V = _V.ravel()
_WEIGHTS = np.exp(-(_U * _U + _V * _V) / (2.0 * WEIGHT_SIGMA**2))
_CELL_U = (_U + _SIDE / 2.0) / SAMPLES_PER_CELL - 0.5
_CELL_V = (_V + _SIDE / 2.0) / SAMPLES_PER_CELL - 0.5


def normalize_descriptor(vectors: np.ndarray, clamp: float | None = None) -> np.ndarray:
    """L2-normalize rows, optionally clamping and renormalizing; zero rows stay zero."""
    vectors = np.asarray(vectors, dtype=np.float64)
    norms = np.linalg.norm(vectors, axis=1, keepdims=True)
    unit = np.divide(vectors, norms, out=np.zeros_like(vectors), where=norms > _NORM_EPS)
    if clamp is None:
        return unit
    unit = np.minimum(unit, clamp)
    norms = np.linalg.norm(unit, axis=1, keepdims=True)
    return np.divide(unit, norms, out=np.zeros_like(unit), where=norms > _NORM_EPS)


def orientation_histograms(
    magnitude: np.ndarray, angle: np.ndarray
) -> np.ndarray:
    """Trilinear votes of (n, 256) samples into (n, 128) histograms.

    Args:
        magnitude (np.ndarray): Weighted gradient magnitudes.
        angle (np.ndarray): Gradient directions relative to the keypoint, radians.
    """
    count = magnitude.shape[0]
    hist = np.zeros((count, CELLS + 2, CELLS + 2, ORIENTATION_BINS), dtype=np.float64)
    obin = np.mod(angle, TWO_PI) * (ORIENTATION_BINS / TWO_PI)
    row0 = np.floor(_CELL_V).astype(np.intp)
    col0 = np.floor(_CELL_U).astype(np.intp)
    ori0 = np.floor(obin).astype(np.intp)
    frac_r = _CELL_V - row0
    frac_c = _CELL_U - col0
    frac_o = obin - ori0
    index = np.broadcast_to(np.arange(count)[:, None], magnitude.shape)
    for dr in (0, 1):
        w_r = frac_r if dr else 1.0 - frac_r
        for dc in (0, 1):
            w_c = frac_c if dc else 1.0 - frac_c
            for do in (0, 1):
                w_o = frac_o if do else 1.0 - frac_o
                np.add.at(
                    hist,
                    (
                        index,
                        np.broadcast_to(row0 + dr + 1, magnitude.shape),
                        np.broadcast_to(col0 + dc + 1, magnitude.shape),
                        (ori0 + do) % ORIENTATION_BINS,
                    ),
                    magnitude * (w_r * w_c) * w_o,
                )
    return hist[:, 1:-1, 1:-1, :].reshape(count, SIFT_DESCRIPTOR_SIZE)


class SiftExtractor(DescriptorExtractor):
    """128-dimensional SIFT descriptor."""

    __slots__ = ()

    method = DescriptorTypes.SIFT

    def _describe(
        self, img: Image, keypoints: list[Keypoint]
    ) -> tuple[list[Keypoint], np.ndarray]:
        xs, ys, scales, orientations = keypoint_arrays(keypoints)
        upper = max(1.0, min(img.width, img.height) / MAX_SIGMA_DIVISOR)
        sigmas = np.clip(scales, 1.0, upper)
        ladder = SmoothingLadder(img)
        levels = SmoothingLadder.level_indices(sigmas)

        kept = list(keypoints)
        polar: dict[int, tuple[np.ndarray, np.ndarray]] = {}
        for i in np.flatnonzero(orientations == 0.0).tolist():
            level = int(levels[i])
            if level not in polar:
                polar[level] = gradient_polar(ladder.level(level))
            magnitude, direction = polar[level]
            theta = dominant_orientation(magnitude, direction, xs[i], ys[i], sigmas[i])
            orientations[i] = theta
            kept[i] = dataclasses.replace(kept[i], orientation=theta)

        values = np.zeros((len(keypoints), SIFT_DESCRIPTOR_SIZE), dtype=np.float64)
        for level in np.unique(levels).tolist():
            group = np.flatnonzero(levels == level)
            gy, gx = np.gradient(ladder.level(level))
            spacing = (SAMPLE_SPACING * sigmas[group])[:, None]
            cos = np.cos(orientations[group])[:, None]
            sin = np.sin(orientations[group])[:, None]
            px = xs[group, None] + spacing * (cos * _U - sin * _V)
            py = ys[group, None] + spacing * (sin * _U + cos * _V)
            sx = sample_bilinear(gx, px, py)
            sy = sample_bilinear(gy, px, py)
            magnitude = np.hypot(sx, sy) * _WEIGHTS
            angle = np.arctan2(sy, sx) - orientations[group, None]
            values[group] = orientation_histograms(magnitude, angle)
        descriptors = normalize_descriptor(values, SIFT_DESCRIPTOR_CLAMP)
        return kept, descriptors.astype(np.float32)


def sift_describe(
    img: Image,
    keypoints: Sequence[Keypoint],
    params: DescriptorParams | None = None,
    seed: int = PATTERN_SEED,
) -> tuple[list[Keypoint], DescriptorSet]:
    """Describe keypoints with SIFT; every keypoint is kept."""
    return SiftExtractor(params, seed).describe(img, keypoints)
