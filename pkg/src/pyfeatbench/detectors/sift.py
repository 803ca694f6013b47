"""Difference-of-Gaussian scale-space extrema.

Intensities are scaled to [0, 1] so the contrast threshold keeps its usual
meaning. Each octave holds `scales_per_octave + 3` Gaussian images and their
adjacent differences; the next octave starts from the image at twice the base
blur, decimated by two. Extrema of the middle difference layers are refined by
a quadratic fit in (x, y, scale), then filtered by contrast and by the ratio
of principal curvatures. Every orientation histogram peak of at least 80 % of
the maximum yields a keypoint.
"""

from __future__ import annotations

import logging
import math

import numpy as np
from scipy import ndimage

from pyfeatbench.base_features.detector_base import (
    TWO_PI,
    FeatureDetector,
    normalize_angle,
)
from pyfeatbench.const import (
    SIFT_ASSUMED_BLUR,
    SIFT_BORDER,
    SIFT_MAX_REFINE_STEPS,
    SIFT_ORIENTATION_BINS,
    SIFT_PEAK_RATIO,
    DetectorTypes,
)
from pyfeatbench.imgcore import Image, smooth_array
from pyfeatbench.models.config_models import DetectorParams, SiftParams
from pyfeatbench.models.feature_models import Keypoint

logger = logging.getLogger(__name__)

MIN_SIFT_SIDE = 64
ORIENTATION_SIGMA_FACTOR = 1.5
ORIENTATION_RADIUS_FACTOR = 3.0
MIN_OCTAVE_SIDE = 2 * SIFT_BORDER + 3
_HIST_SMOOTHING = np.array([1.0, 4.0, 6.0, 4.0, 1.0]) / 16.0


def gradient_polar(array: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Gradient magnitude and direction in [0, 2*pi) of a float image, y pointing down."""
    gy, gx = np.gradient(np.asarray(array, dtype=np.float64))
    return np.hypot(gx, gy), normalize_angle(np.arctan2(gy, gx))


def orientation_histogram(
    magnitude: np.ndarray,
    direction: np.ndarray,
    x: float,
    y: float,
    sigma: float,
) -> np.ndarray:
    """Smoothed 36-bin gradient orientation histogram around a point.

    Directions are weighted by magnitude and by a Gaussian of `1.5 * sigma`
    within a radius of three weighting sigmas.

    Args:
        magnitude (np.ndarray): Gradient magnitudes.
        direction (np.ndarray): Gradient directions in radians.
        x (float): Column of the point in the gradient image.
        y (float): Row of the point in the gradient image.
        sigma (float): Scale of the point in the gradient image's pixels.

    Returns:
        np.ndarray: 36 non-negative bin weights.
    """
    height, width = magnitude.shape
    weight_sigma = ORIENTATION_SIGMA_FACTOR * sigma
    radius = max(1, round(ORIENTATION_RADIUS_FACTOR * weight_sigma))
    cx, cy = round(x), round(y)
    rows = np.arange(max(cy - radius, 0), min(cy + radius, height - 1) + 1)
    cols = np.arange(max(cx - radius, 0), min(cx + radius, width - 1) + 1)
    if rows.size == 0 or cols.size == 0:
        return np.zeros(SIFT_ORIENTATION_BINS, dtype=np.float64)
    yy, xx = np.meshgrid(rows, cols, indexing='ij')
    dist2 = (xx - x) ** 2 + (yy - y) ** 2
    inside = dist2 <= radius * radius
    weights = np.exp(-dist2[inside] / (2.0 * weight_sigma**2)) * magnitude[yy, xx][inside]
    bins = np.floor(
        direction[yy, xx][inside] * SIFT_ORIENTATION_BINS / TWO_PI + 0.5
    ).astype(np.intp) % SIFT_ORIENTATION_BINS
    hist = np.bincount(bins, weights=weights, minlength=SIFT_ORIENTATION_BINS)
    return sum(
        weight * np.roll(hist, shift)
        for weight, shift in zip(_HIST_SMOOTHING, (2, 1, 0, -1, -2), strict=True)
    )


def _peak_angle(hist: np.ndarray, index: int) -> float:
    left = hist[index - 1]
    right = hist[(index + 1) % SIFT_ORIENTATION_BINS]
    denom = left - 2.0 * hist[index] + right
    offset = 0.5 * (left - right) / denom if denom != 0 else 0.0
    return float(normalize_angle((index + offset) * TWO_PI / SIFT_ORIENTATION_BINS))


def orientation_peaks(
    magnitude: np.ndarray,
    direction: np.ndarray,
    x: float,
    y: float,
    sigma: float,
) -> list[float]:
    """Every local histogram peak of at least 80 % of the maximum, parabola-refined.

    Returns:
        list[float]: Orientations in [0, 2*pi), [0.0] for a gradient-free region.
    """
    hist = orientation_histogram(magnitude, direction, x, y, sigma)
    peak = float(hist.max())
    if peak <= 0.0:
        return [0.0]
    mask = (
        (hist > np.roll(hist, 1))
        & (hist > np.roll(hist, -1))
        & (hist >= SIFT_PEAK_RATIO * peak)
    )
    return [_peak_angle(hist, index) for index in np.flatnonzero(mask).tolist()] or [0.0]


def dominant_orientation(
    magnitude: np.ndarray,
    direction: np.ndarray,
    x: float,
    y: float,
    sigma: float,
) -> float:
    """Highest histogram peak, 0 for a gradient-free region."""
    hist = orientation_histogram(magnitude, direction, x, y, sigma)
    if float(hist.max()) <= 0.0:
        return 0.0
    return _peak_angle(hist, int(np.argmax(hist)))


def octave_count(width: int, height: int, params: SiftParams) -> int:
    """Octaves searched for an image, automatic when `params.octaves` is None."""
    limit = max(1, math.floor(math.log2(min(width, height) / MIN_OCTAVE_SIDE)) + 1)
    if params.octaves is None:
        return max(1, min(limit, math.floor(math.log2(min(width, height))) - 4))
    return min(params.octaves, limit)


def gaussian_octaves(img: Image, params: SiftParams) -> list[list[np.ndarray]]:
    """Gaussian scale space, `scales_per_octave + 3` images per octave."""
    s = params.scales_per_octave
    k = 2.0 ** (1.0 / s)
    sigma0 = params.base_sigma
    increments = [
        sigma0 * math.sqrt(k ** (2 * i) - k ** (2 * (i - 1))) for i in range(1, s + 3)
    ]
    initial = math.sqrt(max(sigma0**2 - SIFT_ASSUMED_BLUR**2, 1e-2))
    current = smooth_array(img.as_float() / 255.0, initial)
    octaves = []
    for _ in range(octave_count(img.width, img.height, params)):
        images = [current]
        for inc in increments:
            images.append(smooth_array(images[-1], inc))
        octaves.append(images)
        current = images[s][::2, ::2]
    return octaves


def scale_space_derivatives(
    dog: np.ndarray, layer: int, y: int, x: int
) -> tuple[np.ndarray, np.ndarray]:
    """Gradient and Hessian in (x, y, scale) by central differences."""
    c = dog[layer, y, x]
    dx = (dog[layer, y, x + 1] - dog[layer, y, x - 1]) / 2.0
    dy = (dog[layer, y + 1, x] - dog[layer, y - 1, x]) / 2.0
    ds = (dog[layer + 1, y, x] - dog[layer - 1, y, x]) / 2.0
    dxx = dog[layer, y, x + 1] + dog[layer, y, x - 1] - 2.0 * c
    dyy = dog[layer, y + 1, x] + dog[layer, y - 1, x] - 2.0 * c
    dss = dog[layer + 1, y, x] + dog[layer - 1, y, x] - 2.0 * c
    dxy = (
        dog[layer, y + 1, x + 1]
        - dog[layer, y + 1, x - 1]
        - dog[layer, y - 1, x + 1]
        + dog[layer, y - 1, x - 1]
    ) / 4.0
    dxs = (
        dog[layer + 1, y, x + 1]
        - dog[layer + 1, y, x - 1]
        - dog[layer - 1, y, x + 1]
        + dog[layer - 1, y, x - 1]
    ) / 4.0
    dys = (
        dog[layer + 1, y + 1, x]
        - dog[layer + 1, y - 1, x]
        - dog[layer - 1, y + 1, x]
        + dog[layer - 1, y - 1, x]
    ) / 4.0
    gradient = np.array([dx, dy, ds])
    hessian = np.array([[dxx, dxy, dxs], [dxy, dyy, dys], [dxs, dys, dss]])
    return gradient, hessian


def refine_extremum(
    dog: np.ndarray, layer: int, y: int, x: int, params: SiftParams
) -> tuple[float, float, float, float] | None:
    """Quadratic refinement of a DoG extremum.

    Returns:
        tuple[float, float, float, float] | None: (x, y, layer, |D|) with
            subpixel offsets applied, None when the fit does not converge or
            the point fails the contrast or edge test.
    """
    n_layers, height, width = dog.shape
    for _ in range(SIFT_MAX_REFINE_STEPS):
        gradient, hessian = scale_space_derivatives(dog, layer, y, x)
        try:
            offset = -np.linalg.solve(hessian, gradient)
        except np.linalg.LinAlgError:
            return None
        if np.all(np.abs(offset) < 0.5):  # noqa: PLR2004
            break
        x += round(float(offset[0]))
        y += round(float(offset[1]))
        layer += round(float(offset[2]))
        if (
            layer < 1
            or layer > n_layers - 2
            or x < SIFT_BORDER
            or x >= width - SIFT_BORDER
            or y < SIFT_BORDER
            or y >= height - SIFT_BORDER
        ):
            return None
    else:
        return None
    value = float(dog[layer, y, x] + 0.5 * gradient @ offset)
    if abs(value) < params.contrast_thresh:
        return None
    dxx, dyy, dxy = hessian[0, 0], hessian[1, 1], hessian[0, 1]
    trace = dxx + dyy
    det = dxx * dyy - dxy * dxy
    ratio = params.edge_ratio
    if det <= 0 or trace * trace * ratio >= (ratio + 1.0) ** 2 * det:
        return None
    dx, dy, ds = (float(v) for v in offset)
    return (x + dx, y + dy, layer + ds, abs(value))


def sift_detect(img: Image, params: DetectorParams | None = None) -> list[Keypoint]:
    """Detect DoG keypoints.

    Args:
        img (Image): Input image, at least 64x64.
        params (DetectorParams | None): Parameters; the `sift` group is used.

    Returns:
        list[Keypoint]: Keypoints by octave, then layer and raster order, scale
            being the Gaussian sigma at the fitted level in base pixels.
    """
    img.require_size(MIN_SIFT_SIDE)
    params = params if params is not None else DetectorParams()
    sift = params.sift
    s = sift.scales_per_octave
    prefilter = 0.5 * sift.contrast_thresh / s
    max_x = math.nextafter(img.width, 0)
    max_y = math.nextafter(img.height, 0)
    keypoints: list[Keypoint] = []
    for octave, gauss in enumerate(gaussian_octaves(img, sift)):
        dog = np.stack([b - a for a, b in zip(gauss[:-1], gauss[1:], strict=True)])
        _, height, width = dog.shape
        if min(height, width) < MIN_OCTAVE_SIDE:
            break
        footprint = np.ones((3, 3, 3), dtype=bool)
        is_max = dog == ndimage.maximum_filter(dog, footprint=footprint, mode='nearest')
        is_min = dog == ndimage.minimum_filter(dog, footprint=footprint, mode='nearest')
        candidates = (is_max | is_min) & (np.abs(dog) > prefilter)
        candidates[0] = candidates[-1] = False
        candidates[:, :SIFT_BORDER] = candidates[:, -SIFT_BORDER:] = False
        candidates[:, :, :SIFT_BORDER] = candidates[:, :, -SIFT_BORDER:] = False
        gradients: dict[int, tuple[np.ndarray, np.ndarray]] = {}
        factor = 2.0**octave
        found = 0
        positions = (a.tolist() for a in np.nonzero(candidates))
        for layer, y, x in zip(*positions, strict=True):
            refined = refine_extremum(dog, layer, y, x, sift)
            if refined is None:
                continue
            fx, fy, flayer, response = refined
            octave_sigma = sift.base_sigma * 2.0 ** (flayer / s)
            gauss_index = min(max(round(flayer), 0), len(gauss) - 1)
            if gauss_index not in gradients:
                gradients[gauss_index] = gradient_polar(gauss[gauss_index])
            magnitude, direction = gradients[gauss_index]
            for angle in orientation_peaks(magnitude, direction, fx, fy, octave_sigma):
                keypoints.append(
                    Keypoint(
                        x=min(max(fx * factor, 0.0), max_x),
                        y=min(max(fy * factor, 0.0), max_y),
                        scale=octave_sigma * factor,
                        orientation=angle,
                        response=response,
                        octave=octave,
                    )
                )
                found += 1
        logger.debug('SIFT octave %d (%dx%d): %d keypoints', octave, width, height, found)
    return keypoints


class SiftDetector(FeatureDetector):
    """Difference-of-Gaussian keypoints."""

    __slots__ = ()

    method = DetectorTypes.SIFT
    min_size = MIN_SIFT_SIDE

    def _detect(self, img: Image) -> list[Keypoint]:
        return sift_detect(img, self.params)
