"""Image representation, I/O, integral images, smoothing, pyramids and histograms.

Every detector and descriptor consumes the types defined here. All of them are
immutable once constructed: the numpy buffers are flagged read-only, so they can
be shared between threads.

Binary PGM (P5) files are parsed natively. PNG files are decoded with Pillow
and converted to gray with Rec.601 luma weights, rounded to nearest.

Convolutions clamp to the edge (`scipy.ndimage` mode `nearest`) and use
normalized Gaussian kernels of radius `ceil(3 * sigma)`.
"""

from __future__ import annotations

import io
import logging
import math
from collections.abc import Iterator
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image as PILImage
from PIL import UnidentifiedImageError
from scipy import ndimage

from pyfeatbench.const import HISTOGRAM_BINS, MIN_PYRAMID_SIDE, HistogramMethod
from pyfeatbench.utils.errors import (
    ImageFormatError,
    ImageReadError,
    ImageSizeError,
    ParameterError,
)

logger = logging.getLogger(__name__)

PGM_MAGIC = b'P5'
PNG_SIGNATURE = b'\x89PNG\r\n\x1a\n'
LUMA_WEIGHTS = (0.299, 0.587, 0.114)
BASE_SIGMA = 0.5
"""Blur assumed present in a camera image, in pixels."""

_WHITESPACE = b' \t\r\n\v\f'
_DIGITS = b'0123456789'
_FLOOR_EPS = 1e-9


@dataclass(frozen=True)
class Image:
    """8-bit grayscale raster.

    Attributes:
        data (np.ndarray): Read-only `uint8` array of shape (height, width).
    """

    data: np.ndarray

    def __post_init__(self) -> None:
        """Validate the buffer and make it read-only."""
        if self.data.ndim != 2:  # noqa: PLR2004
            msg = f'Image data must be 2-D, got shape {self.data.shape}'
            raise ImageFormatError(msg)
        if self.data.dtype != np.uint8:
            msg = f'Image data must be uint8, got {self.data.dtype}'
            raise ImageFormatError(msg)
        if self.data.size == 0:
            raise ImageSizeError(self.data.shape[1], self.data.shape[0])
        self.data.setflags(write=False)

    @classmethod
    def from_array(cls, array: np.ndarray) -> Image:
        """Build an image from any numeric 2-D array with values in [0, 255].

        Float values are rounded to nearest.

        Raises:
            ImageFormatError: Wrong dimensionality or values out of range.
        """
        array = np.asarray(array)
        if array.dtype == np.uint8:
            return cls(array.copy())
        if array.ndim != 2:  # noqa: PLR2004
            msg = f'Image data must be 2-D, got shape {array.shape}'
            raise ImageFormatError(msg)
        if array.size and (array.min() < 0 or array.max() > 255):  # noqa: PLR2004
            msg = 'Image intensities must lie within [0, 255]'
            raise ImageFormatError(msg)
        if np.issubdtype(array.dtype, np.floating):
            array = np.floor(array + 0.5)
        return cls(array.astype(np.uint8))

    @property
    def width(self) -> int:
        """Columns."""
        return int(self.data.shape[1])

    @property
    def height(self) -> int:
        """Rows."""
        return int(self.data.shape[0])

    @property
    def shape(self) -> tuple[int, int]:
        """(height, width)."""
        return (self.height, self.width)

    def as_float(self) -> np.ndarray:
        """Intensities as a writable float64 array."""
        return self.data.astype(np.float64)

    def require_size(self, min_width: int, min_height: int | None = None) -> None:
        """Raise ImageSizeError unless the image is at least the given size."""
        min_height = min_width if min_height is None else min_height
        if self.width < min_width or self.height < min_height:
            raise ImageSizeError(self.width, self.height, (min_width, min_height))


@dataclass(frozen=True)
class IntegralImage:
    """Summed-area table.

    Entry (i, j) holds the sum of all pixels strictly above row i and left of
    column j, so row 0 and column 0 are zero.

    Attributes:
        data (np.ndarray): Read-only `int64` array of shape (height + 1, width + 1).
    """

    data: np.ndarray

    def __post_init__(self) -> None:
        """Make the table read-only."""
        self.data.setflags(write=False)

    @property
    def width(self) -> int:
        """Columns of the source image."""
        return int(self.data.shape[1] - 1)

    @property
    def height(self) -> int:
        """Rows of the source image."""
        return int(self.data.shape[0] - 1)

    def box_sum(self, x0: int, y0: int, x1: int, y1: int) -> int:
        """Sum over the inclusive rectangle [x0, x1] x [y0, y1].

        Raises:
            ParameterError: Rectangle empty or outside the image.
        """
        if not (0 <= x0 <= x1 < self.width and 0 <= y0 <= y1 < self.height):
            msg = (
                f'Rectangle ({x0}, {y0})-({x1}, {y1}) is outside the '
                f'{self.width}x{self.height} image'
            )
            raise ParameterError(msg)
        table = self.data
        return int(
            table[y1 + 1, x1 + 1] - table[y0, x1 + 1] - table[y1 + 1, x0] + table[y0, x0]
        )

    def box_sums(
        self, x0: np.ndarray, y0: np.ndarray, x1: np.ndarray, y1: np.ndarray
    ) -> np.ndarray:
        """Vectorized inclusive rectangle sums; rectangles must lie inside the image."""
        table = self.data
        return (
            table[y1 + 1, x1 + 1] - table[y0, x1 + 1] - table[y1 + 1, x0] + table[y0, x0]
        )

    def box_sums_clipped(
        self, x0: np.ndarray, y0: np.ndarray, x1: np.ndarray, y1: np.ndarray
    ) -> np.ndarray:
        """Inclusive rectangle sums with rectangles clipped to the image.

        The part of a rectangle outside the image contributes 0.
        """
        a0 = np.clip(np.asarray(x0), 0, self.width)
        b0 = np.clip(np.asarray(y0), 0, self.height)
        a1 = np.maximum(np.clip(np.asarray(x1) + 1, 0, self.width), a0)
        b1 = np.maximum(np.clip(np.asarray(y1) + 1, 0, self.height), b0)
        table = self.data
        return table[b1, a1] - table[b0, a1] - table[b1, a0] + table[b0, a0]


@dataclass(frozen=True)
class PyramidLevel:
    """One level of an image pyramid.

    Attributes:
        image (Image): Level raster.
        scale (float): Level resolution relative to the base, `1 / factor**k`.
        sigma (float): Effective blur in base-image pixels.
    """

    image: Image
    scale: float
    sigma: float

    def to_base(self, x: np.ndarray | float, y: np.ndarray | float, base: Image) -> tuple:
        """Map level pixel coordinates to base-image pixel coordinates."""
        ratio_x = base.width / self.image.width
        ratio_y = base.height / self.image.height
        return ((x + 0.5) * ratio_x - 0.5, (y + 0.5) * ratio_y - 0.5)


@dataclass(frozen=True)
class Pyramid:
    """Levels of decreasing resolution, level 0 being the base image."""

    levels: tuple[PyramidLevel, ...]

    def __len__(self) -> int:
        """Number of levels."""
        return len(self.levels)

    def __getitem__(self, index: int) -> PyramidLevel:
        """Level by index."""
        return self.levels[index]

    def __iter__(self) -> Iterator[PyramidLevel]:
        """Iterate from the base level down."""
        return iter(self.levels)

    @property
    def base(self) -> Image:
        """Level 0 image."""
        return self.levels[0].image


@dataclass(frozen=True)
class Histogram:
    """Normalized 256-bin intensity histogram.

    Attributes:
        bins (np.ndarray): Read-only float64 frequencies summing to 1.
    """

    bins: np.ndarray

    def __post_init__(self) -> None:
        """Validate shape and sign."""
        if self.bins.shape != (HISTOGRAM_BINS,):
            msg = f'Histogram must have {HISTOGRAM_BINS} bins, got {self.bins.shape}'
            raise ParameterError(msg)
        if np.any(self.bins < 0):
            msg = 'Histogram bins must be non-negative'
            raise ParameterError(msg)
        self.bins.setflags(write=False)

    @classmethod
    def from_counts(cls, counts: np.ndarray) -> Histogram:
        """Normalize raw bin counts."""
        counts = np.asarray(counts, dtype=np.float64)
        total = counts.sum()
        if total <= 0:
            msg = 'Histogram counts must not all be zero'
            raise ParameterError(msg)
        return cls(counts / total)


def _decode_pgm(raw: bytes, path: Path) -> np.ndarray:
    if len(raw) < 3 or raw[2] not in _WHITESPACE:  # noqa: PLR2004
        msg = 'malformed PGM header'
        raise ImageFormatError(msg, path)
    fields: list[int] = []
    pos, end = 2, len(raw)
    while len(fields) < 3:  # noqa: PLR2004
        while pos < end:
            if raw[pos] in _WHITESPACE:
                pos += 1
            elif raw[pos] == ord('#'):
                newline = raw.find(b'\n', pos)
                pos = end if newline < 0 else newline + 1
            else:
                break
        start = pos
        while pos < end and raw[pos] in _DIGITS:
            pos += 1
        if start == pos:
            msg = 'malformed PGM header'
            raise ImageFormatError(msg, path)
        fields.append(int(raw[start:pos]))
    if pos >= end or raw[pos] not in _WHITESPACE:
        msg = 'malformed PGM header'
        raise ImageFormatError(msg, path)
    pos += 1
    width, height, maxval = fields
    if width == 0 or height == 0:
        raise ImageSizeError(width, height)
    if not 0 < maxval < 65536:  # noqa: PLR2004
        msg = f'PGM maxval {maxval} outside [1, 65535]'
        raise ImageFormatError(msg, path)
    dtype = np.dtype(np.uint8) if maxval < 256 else np.dtype('>u2')  # noqa: PLR2004
    count = width * height
    if len(raw) - pos < count * dtype.itemsize:
        msg = f'PGM data truncated, expected {count} samples'
        raise ImageFormatError(msg, path)
    samples = np.frombuffer(raw, dtype=dtype, count=count, offset=pos).reshape(
        height, width
    )
    if np.any(samples > maxval):
        msg = f'PGM sample exceeds maxval {maxval}'
        raise ImageFormatError(msg, path)
    if maxval == 255:  # noqa: PLR2004
        return samples.copy()
    scaled = np.floor(samples.astype(np.float64) * 255.0 / maxval + 0.5)
    return scaled.astype(np.uint8)


def luma(rgb: np.ndarray) -> np.ndarray:
    """Rec.601 luma of an (..., 3) array, rounded to nearest, as uint8."""
    rgb = np.asarray(rgb, dtype=np.float64)
    weighted = (
        LUMA_WEIGHTS[0] * rgb[..., 0]
        + LUMA_WEIGHTS[1] * rgb[..., 1]
        + LUMA_WEIGHTS[2] * rgb[..., 2]
    )
    return np.clip(np.floor(weighted + 0.5), 0, 255).astype(np.uint8)


def _decode_png(raw: bytes, path: Path) -> np.ndarray:
    try:
        with PILImage.open(io.BytesIO(raw)) as pil:
            pil.load()
            mode = pil.mode
            if mode == '1':
                pil_gray = pil.convert('L')
                return np.asarray(pil_gray, dtype=np.uint8)
            if mode == 'P':
                return luma(np.asarray(pil.convert('RGB')))
            array = np.asarray(pil)
    except (UnidentifiedImageError, OSError, SyntaxError) as exc:
        msg = f'corrupt PNG data ({exc})'
        raise ImageFormatError(msg, path) from exc
    match mode:
        case 'L':
            return array.astype(np.uint8)
        case 'LA':
            return array[..., 0].astype(np.uint8)
        case 'RGB' | 'RGBA':
            return luma(array[..., :3])
        case _:
            msg = f'unsupported PNG mode {mode}, expected 8-bit gray or RGB'
            raise ImageFormatError(msg, path)


def load_image(path: str | Path) -> Image:
    """Read a PGM (P5) or PNG file as a grayscale image.

    Args:
        path (str | Path): Image file.

    Returns:
        Image: Grayscale raster; color is converted with Rec.601 luma weights.

    Raises:
        ImageReadError: File missing or unreadable.
        ImageFormatError: Unsupported or corrupt raster data.
        ImageSizeError: Zero-dimension image.
    """
    path = Path(path)
    try:
        raw = path.read_bytes()
    except FileNotFoundError as exc:
        raise ImageReadError(path) from exc
    except OSError as exc:
        raise ImageReadError(path, exc.strerror or str(exc)) from exc
    if raw.startswith(PGM_MAGIC):
        array = _decode_pgm(raw, path)
    elif raw.startswith(PNG_SIGNATURE):
        array = _decode_png(raw, path)
    else:
        msg = 'unsupported raster format, expected binary PGM or PNG'
        raise ImageFormatError(msg, path)
    if array.size == 0:
        raise ImageSizeError(array.shape[1] if array.ndim > 1 else 0, array.shape[0])
    return Image(np.ascontiguousarray(array))


def save_pgm(img: Image, path: str | Path) -> Path:
    """Write an image as binary PGM, creating parent directories."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    header = f'P5\n{img.width} {img.height}\n255\n'.encode('ascii')
    path.write_bytes(header + img.data.tobytes())
    return path


def integral(img: Image) -> IntegralImage:
    """Summed-area table of an image."""
    table = np.zeros((img.height + 1, img.width + 1), dtype=np.int64)
    np.cumsum(np.cumsum(img.data, axis=0, dtype=np.int64), axis=1, out=table[1:, 1:])
    return IntegralImage(table)


def box_sum(ii: IntegralImage, x0: int, y0: int, x1: int, y1: int) -> int:
    """Exact sum over an inclusive pixel rectangle, see `IntegralImage.box_sum`."""
    return ii.box_sum(x0, y0, x1, y1)


def gaussian_kernel(sigma: float) -> np.ndarray:
    """Sampled Gaussian of radius ceil(3 * sigma), normalized to sum 1.

    Raises:
        ParameterError: Non-positive sigma.
    """
    if not sigma > 0:
        msg = f'sigma must be positive, got {sigma}'
        raise ParameterError(msg)
    radius = math.ceil(3.0 * sigma)
    offsets = np.arange(-radius, radius + 1, dtype=np.float64)
    kernel = np.exp(-(offsets**2) / (2.0 * sigma * sigma))
    return kernel / kernel.sum()


def smooth_array(array: np.ndarray, sigma: float) -> np.ndarray:
    """Separable Gaussian smoothing of a float array with clamp-to-edge borders."""
    kernel = gaussian_kernel(sigma)
    data = np.asarray(array, dtype=np.float64)
    out = ndimage.convolve1d(data, kernel, axis=0, mode='nearest')
    return ndimage.convolve1d(out, kernel, axis=1, mode='nearest')


def requantize(array: np.ndarray) -> Image:
    """Round a float array to nearest and clip to [0, 255]."""
    return Image(np.clip(np.floor(array + 0.5), 0, 255).astype(np.uint8))


def gaussian_blur(img: Image, sigma: float) -> Image:
    """Gaussian blur, requantized to 8 bits.

    Raises:
        ParameterError: Non-positive sigma.
    """
    return requantize(smooth_array(img.data, sigma))


def resample(array: np.ndarray, width: int, height: int) -> np.ndarray:
    """Bilinear resampling of a float array to width x height, pixel centres aligned."""
    src_h, src_w = array.shape
    ys = (np.arange(height, dtype=np.float64) + 0.5) * (src_h / height) - 0.5
    xs = (np.arange(width, dtype=np.float64) + 0.5) * (src_w / width) - 0.5
    grid_y, grid_x = np.meshgrid(ys, xs, indexing='ij')
    return ndimage.map_coordinates(
        np.asarray(array, dtype=np.float64), [grid_y, grid_x], order=1, mode='nearest'
    )


def sample_bilinear(array: np.ndarray, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """Bilinear samples at (x, y) positions, clamping outside the array."""
    return ndimage.map_coordinates(
        np.asarray(array, dtype=np.float64),
        [np.asarray(ys, dtype=np.float64), np.asarray(xs, dtype=np.float64)],
        order=1,
        mode='nearest',
    )


def downsampled_size(width: int, height: int, factor: float) -> tuple[int, int]:
    """floor(width / factor) x floor(height / factor), robust to float noise."""
    return (
        math.floor(width / factor + _FLOOR_EPS),
        math.floor(height / factor + _FLOOR_EPS),
    )


def scaled_level(img: Image, factor: float) -> tuple[Image, float]:
    """Image reduced by factor with anti-alias smoothing.

    Returns:
        tuple[Image, float]: Reduced image and its effective blur in base pixels.
    """
    width, height = downsampled_size(img.width, img.height, factor)
    sigma = BASE_SIGMA * factor
    extra = math.sqrt(max(sigma * sigma - BASE_SIGMA * BASE_SIGMA, 0.0))
    source = smooth_array(img.data, extra) if extra > 0 else img.as_float()
    return requantize(resample(source, width, height)), sigma


def build_pyramid(img: Image, n_levels: int, scale_factor: float) -> Pyramid:
    """Gaussian pyramid.

    Level 0 is the base image itself. Level k is the base smoothed to an
    effective blur of `0.5 * scale_factor**k` and resampled bilinearly to
    `floor(base / scale_factor**k)`. Levels smaller than 32x32 are dropped.

    Args:
        img (Image): Base image.
        n_levels (int): Levels requested.
        scale_factor (float): Resolution ratio between consecutive levels.

    Raises:
        ParameterError: n_levels < 1 or scale_factor <= 1.
        ImageSizeError: Base image smaller than 32x32.
    """
    if n_levels < 1:
        msg = f'n_levels must be >= 1, got {n_levels}'
        raise ParameterError(msg)
    if not scale_factor > 1:
        msg = f'scale_factor must be > 1, got {scale_factor}'
        raise ParameterError(msg)
    img.require_size(MIN_PYRAMID_SIDE)
    levels = [PyramidLevel(img, 1.0, BASE_SIGMA)]
    for k in range(1, n_levels):
        factor = scale_factor**k
        width, height = downsampled_size(img.width, img.height, factor)
        if min(width, height) < MIN_PYRAMID_SIDE:
            logger.debug('Pyramid stops at level %d (%dx%d)', k, width, height)
            break
        level_img, sigma = scaled_level(img, factor)
        levels.append(PyramidLevel(level_img, 1.0 / factor, sigma))
    return Pyramid(tuple(levels))


class SmoothingLadder:
    """Float copies of an image at half-octave blur levels, built on demand.

    Level k has a total blur of `0.5 * 2**(k / 2)` pixels, level 0 being the
    image itself. A ladder belongs to one call and is not shared.
    """

    __slots__ = ('_levels',)

    def __init__(self, img: Image) -> None:
        """Start the ladder from the unsmoothed image."""
        self._levels: dict[int, np.ndarray] = {0: img.as_float()}

    @staticmethod
    def level_index(sigma: float) -> int:
        """Nearest level to a total blur, on a log scale."""
        if sigma <= BASE_SIGMA:
            return 0
        return math.floor(2.0 * math.log2(sigma / BASE_SIGMA) + 0.5)

    @staticmethod
    def level_indices(sigmas: np.ndarray) -> np.ndarray:
        """Vectorized `level_index`."""
        ratio = np.maximum(np.asarray(sigmas, dtype=np.float64), BASE_SIGMA) / BASE_SIGMA
        return np.floor(2.0 * np.log2(ratio) + 0.5).astype(np.intp)

    @staticmethod
    def level_sigma(index: int) -> float:
        """Total blur of a level."""
        return BASE_SIGMA * 2.0 ** (index / 2.0)

    def level(self, index: int) -> np.ndarray:
        """Array of a level."""
        if index not in self._levels:
            sigma = self.level_sigma(index)
            extra = math.sqrt(sigma * sigma - BASE_SIGMA * BASE_SIGMA)
            self._levels[index] = smooth_array(self._levels[0], extra)
        return self._levels[index]

    def at(self, sigma: float) -> np.ndarray:
        """Array of the level nearest to a total blur."""
        return self.level(self.level_index(sigma))


def intensity_histogram(img: Image) -> Histogram:
    """Normalized 256-bin intensity histogram.

    Raises:
        ImageSizeError: Empty image.
    """
    if img.data.size == 0:
        raise ImageSizeError(img.width, img.height)
    counts = np.bincount(img.data.ravel(), minlength=HISTOGRAM_BINS)
    return Histogram(counts / img.data.size)


def histogram_correlation(a: Histogram, b: Histogram) -> float:
    """Pearson correlation of two histograms, within [-1, 1].

    Identical histograms give 1.0. When either histogram has zero variance
    the result is 1.0 for equal histograms and 0.0 otherwise.
    """
    if np.array_equal(a.bins, b.bins):
        return 1.0
    x = a.bins - a.bins.mean()
    y = b.bins - b.bins.mean()
    sxx = float(np.dot(x, x))
    syy = float(np.dot(y, y))
    if sxx == 0.0 or syy == 0.0:
        return 0.0
    score = float(np.dot(x, y)) / math.sqrt(sxx * syy)
    return min(1.0, max(-1.0, score))


def compare_histograms(
    a: Histogram, b: Histogram, method: HistogramMethod = HistogramMethod.CORRELATION
) -> float:
    """Histogram similarity, higher meaning more alike.

    Correlation lies in [-1, 1], the other methods in [0, 1].
    """
    match HistogramMethod(method):
        case HistogramMethod.CORRELATION:
            return histogram_correlation(a, b)
        case HistogramMethod.INTERSECTION:
            return min(1.0, float(np.minimum(a.bins, b.bins).sum()))
        case HistogramMethod.CHI_SQUARE:
            total = a.bins + b.bins
            mask = total > 0
            diff = a.bins[mask] - b.bins[mask]
            chi2 = float(np.sum(diff * diff / total[mask]))
            return 1.0 / (1.0 + chi2)
        case HistogramMethod.BHATTACHARYYA:
            return min(1.0, float(np.sqrt(a.bins * b.bins).sum()))
    msg = f'Unknown histogram method {method}'
    raise ParameterError(msg)
