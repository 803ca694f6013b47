"""Descriptor containers and the base class for descriptor extractors.

Binary descriptors are stored bit-packed (`numpy.packbits`, most significant
bit first), so a 256-bit descriptor is 32 bytes and a 512-bit one 64 bytes.
Real descriptors are float32 vectors and serialize as little-endian float32.
"""

from __future__ import annotations

import logging
from abc import ABC, abstractmethod
from collections.abc import Iterator, Sequence
from dataclasses import dataclass
from types import MappingProxyType
from typing import TYPE_CHECKING, ClassVar

import numpy as np

from pyfeatbench.const import (
    BRIEF_BITS,
    BRISK_BITS,
    PATTERN_SEED,
    SIFT_DESCRIPTOR_SIZE,
    SURF_DESCRIPTOR_SIZE,
    DescriptorKind,
    DescriptorTypes,
)
from pyfeatbench.models.config_models import DescriptorParams
from pyfeatbench.utils.errors import DescriptorMismatchError

if TYPE_CHECKING:
    from pyfeatbench.imgcore import Image
    from pyfeatbench.models.feature_models import Keypoint

logger = logging.getLogger(__name__)

DESCRIPTOR_LAYOUT: MappingProxyType[DescriptorTypes, tuple[DescriptorKind, int]] = (
    MappingProxyType(
        {
            DescriptorTypes.BRIEF: (DescriptorKind.BINARY, BRIEF_BITS),
            DescriptorTypes.ORB: (DescriptorKind.BINARY, BRIEF_BITS),
            DescriptorTypes.BRISK: (DescriptorKind.BINARY, BRISK_BITS),
            DescriptorTypes.SIFT: (DescriptorKind.REAL, SIFT_DESCRIPTOR_SIZE),
            DescriptorTypes.SURF: (DescriptorKind.REAL, SURF_DESCRIPTOR_SIZE),
        }
    )
)
"""Value domain and length (bits or dimensions) of each descriptor method."""

REAL_DTYPE = np.dtype('<f4')


def _row_width(method: DescriptorTypes) -> tuple[np.dtype, int]:
    kind, length = DESCRIPTOR_LAYOUT[method]
    if kind is DescriptorKind.BINARY:
        return np.dtype(np.uint8), length // 8
    return REAL_DTYPE, length


@dataclass(frozen=True, eq=False)
class Descriptor:
    """Single descriptor.

    Attributes:
        method (DescriptorTypes): Extractor that produced it.
        values (np.ndarray): Packed bits (uint8) or float32 components.
    """

    method: DescriptorTypes
    values: np.ndarray

    @property
    def kind(self) -> DescriptorKind:
        """Binary or real."""
        return DESCRIPTOR_LAYOUT[self.method][0]

    @property
    def length(self) -> int:
        """Bits for binary descriptors, dimensions for real ones."""
        return DESCRIPTOR_LAYOUT[self.method][1]

    def bits(self) -> np.ndarray:
        """Unpacked bits of a binary descriptor."""
        if self.kind is not DescriptorKind.BINARY:
            msg = f'{self.method} descriptors are not binary'
            raise DescriptorMismatchError(msg)
        return np.unpackbits(self.values)

    def to_bytes(self) -> bytes:
        """Packed bits, or little-endian float32 components."""
        if self.kind is DescriptorKind.BINARY:
            return self.values.astype(np.uint8).tobytes()
        return self.values.astype(REAL_DTYPE).tobytes()

    @classmethod
    def from_bytes(cls, method: DescriptorTypes, raw: bytes) -> Descriptor:
        """Decode a descriptor written by `to_bytes`.

        Raises:
            DescriptorMismatchError: Byte count does not fit the method.
        """
        method = DescriptorTypes(method)
        dtype, width = _row_width(method)
        if len(raw) != width * dtype.itemsize:
            msg = (
                f'{method} descriptor needs {width * dtype.itemsize} bytes, '
                f'got {len(raw)}'
            )
            raise DescriptorMismatchError(msg)
        return cls(method, np.frombuffer(raw, dtype=dtype).copy())

    def __eq__(self, other: object) -> bool:
        """Equal method and values."""
        if not isinstance(other, Descriptor):
            return NotImplemented
        return self.method == other.method and np.array_equal(self.values, other.values)

    def __hash__(self) -> int:
        """Hash of method and raw bytes."""
        return hash((self.method, self.to_bytes()))


@dataclass(frozen=True, eq=False)
class DescriptorSet:
    """Descriptors of one image, index-aligned with the kept keypoints.

    Attributes:
        method (DescriptorTypes): Extractor that produced them.
        values (np.ndarray): Read-only (n, 32 | 64) uint8 packed bits or
            (n, 64 | 128) float32 rows.
    """

    method: DescriptorTypes
    values: np.ndarray

    def __post_init__(self) -> None:
        """Validate the row layout and make the array read-only."""
        dtype, width = _row_width(self.method)
        values = np.ascontiguousarray(self.values, dtype=dtype)
        if values.ndim != 2 or values.shape[1] != width:  # noqa: PLR2004
            msg = f'{self.method} rows need {width} columns, got shape {values.shape}'
            raise DescriptorMismatchError(msg)
        values.setflags(write=False)
        object.__setattr__(self, 'values', values)

    @classmethod
    def empty(cls, method: DescriptorTypes) -> DescriptorSet:
        """Set without descriptors."""
        dtype, width = _row_width(method)
        return cls(method, np.zeros((0, width), dtype=dtype))

    @classmethod
    def from_bits(cls, method: DescriptorTypes, bits: np.ndarray) -> DescriptorSet:
        """Pack an (n, n_bits) boolean array."""
        return cls(method, np.packbits(np.asarray(bits, dtype=bool), axis=1))

    @property
    def kind(self) -> DescriptorKind:
        """Binary or real."""
        return DESCRIPTOR_LAYOUT[self.method][0]

    @property
    def length(self) -> int:
        """Bits for binary descriptors, dimensions for real ones."""
        return DESCRIPTOR_LAYOUT[self.method][1]

    def __len__(self) -> int:
        """Number of descriptors."""
        return int(self.values.shape[0])

    def __getitem__(self, index: int) -> Descriptor:
        """Descriptor at index."""
        return Descriptor(self.method, self.values[index])

    def __iter__(self) -> Iterator[Descriptor]:
        """Iterate over descriptors."""
        for index in range(len(self)):
            yield self[index]

    def compatible_with(self, other: DescriptorSet) -> bool:
        """Whether both sets share kind and length."""
        return self.kind is other.kind and self.length == other.length


class DescriptorExtractor(ABC):
    """Abstract descriptor extractor.

    Subclasses set `method` and implement `_describe`, returning the kept
    keypoints and one descriptor row per kept keypoint. Keypoints whose
    sampling window leaves the image are dropped.

    Attributes:
        params (DescriptorParams): Descriptor parameters.
        seed (int): Seed of the binary test-pair pattern.
    """

    __slots__ = ('params', 'seed')

    method: ClassVar[DescriptorTypes]

    def __init__(
        self, params: DescriptorParams | None = None, seed: int = PATTERN_SEED
    ) -> None:
        """Initialize the extractor."""
        self.params = params if params is not None else DescriptorParams()
        self.seed = seed

    @property
    def kind(self) -> DescriptorKind:
        """Binary or real."""
        return DESCRIPTOR_LAYOUT[self.method][0]

    @property
    def length(self) -> int:
        """Bits for binary descriptors, dimensions for real ones."""
        return DESCRIPTOR_LAYOUT[self.method][1]

    def describe(
        self, img: Image, keypoints: Sequence[Keypoint]
    ) -> tuple[list[Keypoint], DescriptorSet]:
        """Describe keypoints.

        Returns:
            tuple[list[Keypoint], DescriptorSet]: Kept keypoints, a subsequence
                of the input with back-filled orientations, and their descriptors.
        """
        keypoints = list(keypoints)
        if not keypoints:
            return [], DescriptorSet.empty(self.method)
        kept, values = self._describe(img, keypoints)
        logger.debug(
            '%s kept %d of %d keypoints', self.method, len(kept), len(keypoints)
        )
        return kept, DescriptorSet(self.method, values)

    @abstractmethod
    def _describe(
        self, img: Image, keypoints: list[Keypoint]
    ) -> tuple[list[Keypoint], np.ndarray]:
        """Extractor-specific description of a non-empty keypoint list."""

    def __repr__(self) -> str:
        """Return the extractor name."""
        return f'{type(self).__name__}({self.method})'
