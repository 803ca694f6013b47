"""Feature-level records: keypoints, matches and per-pair match statistics.

These are immutable so they can be shared between threads and worker
processes; descriptors keep their numeric arrays in
`pyfeatbench.base_features.descriptor_base` instead.
"""

from __future__ import annotations

from dataclasses import dataclass

from mashumaro.mixins.orjson import DataClassORJSONMixin

from pyfeatbench.const import DISTANCE_SENTINEL
from pyfeatbench.models.base_models import BaseModelConfig


@dataclass(frozen=True)
class Keypoint(DataClassORJSONMixin):
    """Interest point emitted by every detector.

    Attributes:
        x (float): Subpixel column in base-image pixels.
        y (float): Subpixel row in base-image pixels.
        scale (float): Characteristic size in base-image pixels, detector-defined.
        orientation (float): Radians in [0, 2*pi), 0 when the detector assigns none.
        response (float): Non-negative detector score.
        octave (int): Pyramid level or layer index the keypoint was found on.
    """

    x: float
    y: float
    scale: float
    orientation: float = 0.0
    response: float = 0.0
    octave: int = 0

    class Config(BaseModelConfig):
        """Config for dataclasses."""

    @property
    def position(self) -> tuple[float, float]:
        """The (x, y) position."""
        return (self.x, self.y)


@dataclass(frozen=True)
class Match(DataClassORJSONMixin):
    """Nearest-neighbour correspondence of a query descriptor.

    Attributes:
        query_idx (int): Index into the query descriptors.
        train_idx (int): Index into the train descriptors.
        distance (float): Hamming bit count or L2 distance.
        second_distance (float): Distance of the runner-up train descriptor,
            `DISTANCE_SENTINEL` when there is none.
    """

    query_idx: int
    train_idx: int
    distance: float
    second_distance: float = DISTANCE_SENTINEL

    class Config(BaseModelConfig):
        """Config for dataclasses."""


@dataclass(frozen=True)
class MatchStats(DataClassORJSONMixin):
    """Match-quality metrics of one image pair.

    Attributes:
        n_correct (int): Surviving matches.
        mean_angle_diff (float): Mean wrapped orientation difference in degrees,
            within [-180, 180).
        min_distance (float): Minimum pixel distance between matched keypoint
            positions, `DISTANCE_SENTINEL` when there are no matches.
    """

    n_correct: int = 0
    mean_angle_diff: float = 0.0
    min_distance: float = DISTANCE_SENTINEL

    class Config(BaseModelConfig):
        """Config for dataclasses."""

    @property
    def has_distance(self) -> bool:
        """Whether min_distance holds a measured value."""
        return self.min_distance < DISTANCE_SENTINEL
