"""Box-filter Hessian detector.

The second derivatives Dxx, Dyy and Dxy are approximated by box filters
evaluated on the integral image. Octave o uses filter sizes
`3 * (2**(o + 1) * (i + 1) + 1)` for i in 0..3 (9, 15, 21, 27 for the first
octave) sampled every `2**o` pixels. The response is
`Dxx * Dyy - (0.9 * Dxy)**2` with each derivative divided by the filter area.

Orientation is the direction of the largest summed Haar response vector within
a sliding pi/3 sector over a radius-6s disk.
"""

from __future__ import annotations

import logging
import math
from functools import lru_cache

import numpy as np
from scipy import ndimage

from pyfeatbench.base_features.detector_base import (
    TWO_PI,
    FeatureDetector,
    normalize_angle,
)
from pyfeatbench.const import (
    SURF_DXY_WEIGHT,
    SURF_LAYERS_PER_OCTAVE,
    DetectorTypes,
)
from pyfeatbench.detectors.sift import scale_space_derivatives
from pyfeatbench.imgcore import Image, IntegralImage, integral
from pyfeatbench.models.config_models import DetectorParams
from pyfeatbench.models.feature_models import Keypoint
from pyfeatbench.utils.errors import ParameterError

logger = logging.getLogger(__name__)

MIN_SURF_SIDE = 64
SURF_SCALE_PER_SIZE = 1.2 / 9.0
ORIENTATION_RADIUS = 6
ORIENTATION_WINDOWS = 72
ORIENTATION_SECTOR = math.pi / 3.0
ORIENTATION_SIGMA = 2.0
MAX_INTERPOLATION_OFFSET = 1.0


def filter_size(octave: int, interval: int) -> int:
    """Side of the box filter for an octave and interval."""
    return 3 * (2 ** (octave + 1) * (interval + 1) + 1)


def surf_kernel(size: int, kind: str) -> np.ndarray:
    """Dense box kernel of a derivative, for reference correlation.

    Args:
        size (int): Filter side, 9, 15, 21, ...
        kind (str): `xx`, `yy` or `xy`.

    Returns:
        np.ndarray: (size, size) float kernel, rows indexed by dy.
    """
    if size % 6 != 3 or size < 9:  # noqa: PLR2004
        msg = f'SURF filter size must be 9, 15, 21, ..., got {size}'
        raise ParameterError(msg)
    lobe = size // 3
    half = size // 2
    kernel = np.zeros((size, size), dtype=np.float64)
    mid = (lobe - 1) // 2
    match kind:
        case 'yy':
            kernel[:, half - (lobe - 1) : half + lobe] = 1.0
            kernel[half - mid : half + mid + 1, half - (lobe - 1) : half + lobe] -= 3.0
        case 'xx':
            kernel = surf_kernel(size, 'yy').T.copy()
        case 'xy':
            kernel[half - lobe : half, half - lobe : half] = 1.0
            kernel[half + 1 : half + lobe + 1, half + 1 : half + lobe + 1] = 1.0
            kernel[half - lobe : half, half + 1 : half + lobe + 1] = -1.0
            kernel[half + 1 : half + lobe + 1, half - lobe : half] = -1.0
        case _:
            msg = f'Unknown derivative {kind!r}'
            raise ParameterError(msg)
    return kernel


def hessian_box_responses(
    ii: IntegralImage, xs: np.ndarray, ys: np.ndarray, size: int
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Unnormalized Dxx, Dyy and Dxy box responses at pixel centres.

    The filter must fit: `(size - 1) / 2` pixels on every side of each centre.
    """
    xs = np.asarray(xs, dtype=np.intp)
    ys = np.asarray(ys, dtype=np.intp)
    lobe = size // 3
    half = (size - 1) // 2
    mid = (lobe - 1) // 2
    band = lobe - 1
    dyy = ii.box_sums(xs - band, ys - half, xs + band, ys + half) - 3 * ii.box_sums(
        xs - band, ys - mid, xs + band, ys + mid
    )
    dxx = ii.box_sums(xs - half, ys - band, xs + half, ys + band) - 3 * ii.box_sums(
        xs - mid, ys - band, xs + mid, ys + band
    )
    dxy = (
        ii.box_sums(xs - lobe, ys - lobe, xs - 1, ys - 1)
        + ii.box_sums(xs + 1, ys + 1, xs + lobe, ys + lobe)
        - ii.box_sums(xs + 1, ys - lobe, xs + lobe, ys - 1)
        - ii.box_sums(xs - lobe, ys + 1, xs - 1, ys + lobe)
    )
    return dxx, dyy, dxy


def hessian_determinant(
    ii: IntegralImage, xs: np.ndarray, ys: np.ndarray, size: int
) -> np.ndarray:
    """Area-normalized Hessian determinant approximation."""
    dxx, dyy, dxy = hessian_box_responses(ii, xs, ys, size)
    area = float(size * size)
    dxx = dxx / area
    dyy = dyy / area
    dxy = dxy / area
    return dxx * dyy - (SURF_DXY_WEIGHT * dxy) ** 2


def haar_responses(
    ii: IntegralImage, xs: np.ndarray, ys: np.ndarray, half: int | np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Haar wavelet responses of side `2 * half` centred on integer positions.

    dx is the right half minus the left half, dy the lower half minus the upper
    half. `half` may be an array broadcasting against the positions. Parts of a
    wavelet outside the image contribute nothing.
    """
    xs = np.asarray(xs, dtype=np.intp)
    ys = np.asarray(ys, dtype=np.intp)
    left = ii.box_sums_clipped(xs - half, ys - half, xs - 1, ys + half - 1)
    right = ii.box_sums_clipped(xs, ys - half, xs + half - 1, ys + half - 1)
    top = ii.box_sums_clipped(xs - half, ys - half, xs + half - 1, ys - 1)
    bottom = ii.box_sums_clipped(xs - half, ys, xs + half - 1, ys + half - 1)
    return (right - left).astype(np.float64), (bottom - top).astype(np.float64)


@lru_cache(maxsize=1)
def _orientation_samples() -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    span = np.arange(-ORIENTATION_RADIUS, ORIENTATION_RADIUS + 1)
    j, i = np.meshgrid(span, span, indexing='ij')
    inside = i * i + j * j < ORIENTATION_RADIUS * ORIENTATION_RADIUS
    i, j = i[inside].astype(np.float64), j[inside].astype(np.float64)
    weights = np.exp(-(i * i + j * j) / (2.0 * ORIENTATION_SIGMA**2))
    return i, j, weights


def surf_orientation(ii: IntegralImage, x: float, y: float, scale: float) -> float:
    """Dominant orientation by the sliding-sector method.

    Haar responses of side 4s are sampled every s pixels within radius 6s,
    weighted by a Gaussian of 2s, and summed within each pi/3 sector of 72
    evenly spaced starts; the longest sum vector gives the orientation.

    Returns:
        float: Radians in [0, 2*pi), 0 for a response-free neighbourhood.
    """
    i, j, weights = _orientation_samples()
    xs = np.floor(x + i * scale + 0.5)
    ys = np.floor(y + j * scale + 0.5)
    half = max(1, round(2.0 * scale))
    dx, dy = haar_responses(ii, xs, ys, half)
    dx *= weights
    dy *= weights
    if not np.any(dx) and not np.any(dy):
        return 0.0
    angles = normalize_angle(np.arctan2(dy, dx))
    starts = np.arange(ORIENTATION_WINDOWS) * (TWO_PI / ORIENTATION_WINDOWS)
    inside = np.mod(angles[None, :] - starts[:, None], TWO_PI) < ORIENTATION_SECTOR
    sum_x = inside @ dx
    sum_y = inside @ dy
    best = int(np.argmax(sum_x * sum_x + sum_y * sum_y))
    return float(normalize_angle(math.atan2(sum_y[best], sum_x[best])))


def octave_responses(
    ii: IntegralImage, octave: int
) -> tuple[np.ndarray, list[int], int] | None:
    """Determinant maps of the four layers of an octave on its sampling grid.

    Returns:
        tuple[np.ndarray, list[int], int] | None: (layers, grid rows, grid
            columns) array, the filter sizes and the sampling step; None when
            even the smallest filter does not fit.
    """
    step = 2**octave
    sizes = [filter_size(octave, i) for i in range(SURF_LAYERS_PER_OCTAVE)]
    grid_x = np.arange(0, ii.width, step)
    grid_y = np.arange(0, ii.height, step)
    responses = np.zeros((len(sizes), grid_y.size, grid_x.size), dtype=np.float64)
    any_valid = False
    for layer, size in enumerate(sizes):
        half = (size - 1) // 2
        cols = np.flatnonzero((grid_x >= half) & (grid_x <= ii.width - 1 - half))
        rows = np.flatnonzero((grid_y >= half) & (grid_y <= ii.height - 1 - half))
        if cols.size == 0 or rows.size == 0:
            continue
        any_valid = True
        yy, xx = np.meshgrid(grid_y[rows], grid_x[cols], indexing='ij')
        det = hessian_determinant(ii, xx.ravel(), yy.ravel(), size)
        responses[layer][np.ix_(rows, cols)] = det.reshape(rows.size, cols.size)
    if not any_valid:
        return None
    return responses, sizes, step


def surf_detect(img: Image, params: DetectorParams | None = None) -> list[Keypoint]:
    """Detect Hessian-determinant blobs.

    Args:
        img (Image): Input image, at least 64x64.
        params (DetectorParams | None): Parameters; the `surf` group is used.

    Returns:
        list[Keypoint]: Keypoints by octave, layer and raster order with
            scale `1.2 * size / 9` and the determinant as response.
    """
    img.require_size(MIN_SURF_SIDE)
    params = params if params is not None else DetectorParams()
    surf = params.surf
    ii = integral(img)
    max_x = math.nextafter(img.width, 0)
    max_y = math.nextafter(img.height, 0)
    keypoints: list[Keypoint] = []
    for octave in range(surf.octaves):
        computed = octave_responses(ii, octave)
        if computed is None:
            break
        responses, sizes, step = computed
        maxima = responses == ndimage.maximum_filter(
            responses, size=3, mode='constant', cval=-np.inf
        )
        candidates = maxima & (responses >= surf.hessian_thresh)
        candidates[0] = candidates[-1] = False
        grid_x = np.arange(responses.shape[2]) * step
        grid_y = np.arange(responses.shape[1]) * step
        for layer in range(1, len(sizes) - 1):
            # Neighbours one grid step away must fit the next larger filter.
            half = (sizes[layer + 1] - 1) // 2 + step
            outside_x = (grid_x < half) | (grid_x > img.width - 1 - half)
            outside_y = (grid_y < half) | (grid_y > img.height - 1 - half)
            candidates[layer][:, outside_x] = False
            candidates[layer][outside_y, :] = False
        found = 0
        positions = (a.tolist() for a in np.nonzero(candidates))
        for layer, gy, gx in zip(*positions, strict=True):
            gradient, hessian = scale_space_derivatives(responses, layer, gy, gx)
            try:
                offset = -np.linalg.solve(hessian, gradient)
            except np.linalg.LinAlgError:
                continue
            if np.any(np.abs(offset) >= MAX_INTERPOLATION_OFFSET):
                continue
            x = min(max((gx + float(offset[0])) * step, 0.0), max_x)
            y = min(max((gy + float(offset[1])) * step, 0.0), max_y)
            size = sizes[layer] + float(offset[2]) * (sizes[layer + 1] - sizes[layer])
            scale = SURF_SCALE_PER_SIZE * size
            keypoints.append(
                Keypoint(
                    x=x,
                    y=y,
                    scale=scale,
                    orientation=surf_orientation(ii, x, y, scale),
                    response=float(responses[layer, gy, gx]),
                    octave=octave,
                )
            )
            found += 1
        logger.debug('SURF octave %d (step %d): %d keypoints', octave, step, found)
    return keypoints


class SurfDetector(FeatureDetector):
    """Box-filter Hessian blobs."""

    __slots__ = ()

    method = DetectorTypes.SURF
    min_size = MIN_SURF_SIDE

    def _detect(self, img: Image) -> list[Keypoint]:
        return surf_detect(img, self.params)
