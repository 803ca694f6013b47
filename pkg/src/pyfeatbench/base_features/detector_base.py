"""Base class for keypoint detectors.

Each detector module exposes a plain function (`fast_detect`, `orb_detect`, ...)
and a `FeatureDetector` subclass wrapping it, which the combination map
instantiates by class name.
"""

from __future__ import annotations

import logging
import math
from abc import ABC, abstractmethod
from collections.abc import Sequence
from typing import TYPE_CHECKING, ClassVar

import numpy as np

from pyfeatbench.models.config_models import DetectorParams

if TYPE_CHECKING:
    from pyfeatbench.const import DetectorTypes
    from pyfeatbench.imgcore import Image
    from pyfeatbench.models.feature_models import Keypoint

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi


def normalize_angle(theta: np.ndarray | float) -> np.ndarray:
    """Wrap radians into [0, 2*pi)."""
    wrapped = np.mod(np.asarray(theta, dtype=np.float64), TWO_PI)
    return np.where(wrapped >= TWO_PI, 0.0, wrapped)


def keypoint_arrays(
    keypoints: Sequence[Keypoint],
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Positions, scales and orientations of keypoints as float64 arrays."""
    if not keypoints:
        empty = np.zeros(0, dtype=np.float64)
        return empty, empty.copy(), empty.copy(), empty.copy()
    table = np.array(
        [(kp.x, kp.y, kp.scale, kp.orientation) for kp in keypoints], dtype=np.float64
    )
    return table[:, 0], table[:, 1], table[:, 2], table[:, 3]


class FeatureDetector(ABC):
    """Abstract keypoint detector.

    Subclasses set `method` and `min_size` and implement `_detect`.

    Attributes:
        params (DetectorParams): Parameters of all detectors; each subclass
            reads its own group.
    """

    __slots__ = ('params',)

    method: ClassVar[DetectorTypes]
    min_size: ClassVar[int] = 64

    def __init__(self, params: DetectorParams | None = None) -> None:
        """Initialize the detector."""
        self.params = params if params is not None else DetectorParams()

    def detect(self, img: Image) -> list[Keypoint]:
        """Detect keypoints in base-image coordinates.

        Raises:
            ImageSizeError: Image smaller than `min_size` on either side.
        """
        img.require_size(self.min_size)
        keypoints = self._detect(img)
        logger.debug(
            '%s found %d keypoints on %dx%d image',
            self.method,
            len(keypoints),
            img.width,
            img.height,
        )
        return keypoints

    @abstractmethod
    def _detect(self, img: Image) -> list[Keypoint]:
        """Detector-specific keypoint search."""

    def __repr__(self) -> str:
        """Return the detector name."""
        return f'{type(self).__name__}({self.method})'
