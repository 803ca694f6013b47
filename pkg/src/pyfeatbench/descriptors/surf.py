"""SURF Haar-wavelet descriptor.

A 20s x 20s window rotated to the keypoint orientation is sampled on a 20x20
grid of step s. Haar responses of side 2s, taken on the integral image and
rotated into the keypoint frame, are weighted by a Gaussian of 3.3s and summed
per 5x5-sample subregion as (sum dx, sum dy, sum |dx|, sum |dy|). The
64-vector is L2-normalized.

The scale s is the keypoint scale clamped to [1, min(width, height) / 80].
Keypoints with orientation 0 are oriented by the sliding-sector method first.
Wavelets reaching past the border only sum the pixels inside, so no keypoint
is dropped.
"""

from __future__ import annotations

import dataclasses
import logging
from collections.abc import Sequence

import numpy as np

from pyfeatbench.base_features.descriptor_base import DescriptorExtractor, DescriptorSet
from pyfeatbench.base_features.detector_base import keypoint_arrays
from pyfeatbench.const import PATTERN_SEED, SURF_DESCRIPTOR_SIZE, DescriptorTypes
from pyfeatbench.descriptors.sift import normalize_descriptor
from pyfeatbench.detectors.surf import haar_responses, surf_orientation
from pyfeatbench.imgcore import Image, integral
from pyfeatbench.models.config_models import DescriptorParams
from pyfeatbench.models.feature_models import Keypoint

logger = logging.getLogger(__name__)

SUBREGIONS = 4
SAMPLES_PER_SUBREGION = 5
WEIGHT_SIGMA = 3.3
MAX_SCALE_DIVISOR = 80.0

_SIDE = SUBREGIONS * SAMPLES_PER_SUBREGION
_OFFSETS = np.arange(_SIDE, dtype=np.float64) - (_SIDE - 1) / 2.0
_V, _U = np.meshgrid(_OFFSETS, _OFFSETS, indexing='ij')
_WEIGHTS = np.exp(-(_U * _U + _V * _V) / (2.0 * WEIGHT_SIGMA**2)).ravel()
_U = _U.ravel()
_V = _V.ravel()


def subregion_sums(dx: np.ndarray, dy: np.ndarray) -> np.ndarray:
    """(n, 400) rotated responses to (n, 64) subregion sums.

    Subregions are ordered row by row, each contributing
    (sum dx, sum dy, sum |dx|, sum |dy|).
    """
    count = dx.shape[0]
    shape = (count, SUBREGIONS, SAMPLES_PER_SUBREGION, SUBREGIONS, SAMPLES_PER_SUBREGION)
    blocks = [
        part.reshape(shape).sum(axis=(2, 4))
        for part in (dx, dy, np.abs(dx), np.abs(dy))
    ]
    return np.stack(blocks, axis=-1).reshape(count, SURF_DESCRIPTOR_SIZE)


class SurfExtractor(DescriptorExtractor):
    """64-dimensional SURF descriptor."""

    __slots__ = ()

    method = DescriptorTypes.SURF

    def _describe(
        self, img: Image, keypoints: list[Keypoint]
    ) -> tuple[list[Keypoint], np.ndarray]:
        ii = integral(img)
        xs, ys, scales, orientations = keypoint_arrays(keypoints)
        upper = max(1.0, min(img.width, img.height) / MAX_SCALE_DIVISOR)
        steps = np.clip(scales, 1.0, upper)

        kept = list(keypoints)
        for i in np.flatnonzero(orientations == 0.0).tolist():
            theta = surf_orientation(ii, xs[i], ys[i], steps[i])
            orientations[i] = theta
            kept[i] = dataclasses.replace(kept[i], orientation=theta)

        cos = np.cos(orientations)[:, None]
        sin = np.sin(orientations)[:, None]
        step = steps[:, None]
        px = np.floor(xs[:, None] + step * (cos * _U - sin * _V) + 0.5)
        py = np.floor(ys[:, None] + step * (sin * _U + cos * _V) + 0.5)
        half = np.maximum(1, np.floor(steps + 0.5)).astype(np.intp)[:, None]
        dx, dy = haar_responses(ii, px, py, half)
        rot_dx = (cos * dx + sin * dy) * _WEIGHTS
        rot_dy = (-sin * dx + cos * dy) * _WEIGHTS
        values = normalize_descriptor(subregion_sums(rot_dx, rot_dy))
        return kept, values.astype(np.float32)


def surf_describe(
    img: Image,
    keypoints: Sequence[Keypoint],
    params: DescriptorParams | None = None,
    seed: int = PATTERN_SEED,
) -> tuple[list[Keypoint], DescriptorSet]:
    """Describe keypoints with SURF; every keypoint is kept."""
    return SurfExtractor(params, seed).describe(img, keypoints)
