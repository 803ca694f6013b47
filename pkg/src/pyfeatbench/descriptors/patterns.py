"""Fixed sampling patterns of the binary descriptors.

Patterns are built once per process and cached; the arrays are read-only so
every thread and worker shares the same copy.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from pyfeatbench.const import (
    BRIEF_BITS,
    BRISK_BITS,
    BRISK_LONG_PAIR_DISTANCE,
    BRISK_RADII,
    BRISK_RING_POINTS,
    BRISK_SHORT_PAIR_DISTANCE,
    ORB_PATCH_SIZE,
)

BRIEF_HALF_PATCH = ORB_PATCH_SIZE // 2
BRIEF_PATTERN_SIGMA = ORB_PATCH_SIZE / 5.0
BRISK_CENTRE_SIGMA = 0.5
_DRAW_BATCH = 2 * BRIEF_BITS


def _frozen(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


@lru_cache(maxsize=8)
def brief_pattern(seed: int) -> np.ndarray:
    """Test pairs of BRIEF and ORB.

    Offsets are drawn from an isotropic Gaussian of sigma 31/5 with
    `numpy.random.default_rng(seed)`, clipped to +-15 and rounded half up;
    pairs whose two points coincide are redrawn.

    Args:
        seed (int): Generator seed.

    Returns:
        np.ndarray: Read-only (256, 4) intp array of (px, py, qx, qy).
    """
    rng = np.random.default_rng(seed)
    pairs: list[np.ndarray] = []
    count = 0
    while count < BRIEF_BITS:
        draw = rng.normal(0.0, BRIEF_PATTERN_SIGMA, size=(_DRAW_BATCH, 4))
        draw = np.floor(np.clip(draw, -BRIEF_HALF_PATCH, BRIEF_HALF_PATCH) + 0.5)
        valid = draw[np.any(draw[:, :2] != draw[:, 2:], axis=1)]
        pairs.append(valid)
        count += len(valid)
    return _frozen(np.concatenate(pairs)[:BRIEF_BITS].astype(np.intp))


@dataclass(frozen=True)
class BriskPattern:
    """Concentric sampling pattern of BRISK in units of a 7-pixel keypoint.

    Attributes:
        points (np.ndarray): (60, 2) offsets, ring by ring.
        sigmas (np.ndarray): (60,) smoothing of each point.
        short_pairs (np.ndarray): (512, 2) point indices compared for the bits.
        long_pairs (np.ndarray): (m, 2) point indices used for the orientation.
    """

    points: np.ndarray
    sigmas: np.ndarray
    short_pairs: np.ndarray
    long_pairs: np.ndarray

    @property
    def radius(self) -> float:
        """Outer ring radius."""
        return float(BRISK_RADII[-1])


@lru_cache(maxsize=1)
def brisk_pattern() -> BriskPattern:
    """Build the 60-point pattern.

    Ring i holds `BRISK_RING_POINTS[i]` points on radius `BRISK_RADII[i]`,
    odd rings turned by half a point spacing. A point is smoothed with sigma
    `pi * r / n`, half the distance to its ring neighbours, and 0.5 at the
    centre. Short pairs are the 512 shortest pairs closer than 9.75, long
    pairs all pairs further apart than 13.67.
    """
    points: list[tuple[float, float]] = []
    sigmas: list[float] = []
    rings = zip(BRISK_RADII, BRISK_RING_POINTS, strict=True)
    for ring, (radius, count) in enumerate(rings):
        turn = math.pi / count if ring % 2 else 0.0
        for k in range(count):
            angle = 2.0 * math.pi * k / count + turn
            points.append((radius * math.cos(angle), radius * math.sin(angle)))
            sigmas.append(math.pi * radius / count if radius > 0 else BRISK_CENTRE_SIGMA)
    coords = np.array(points, dtype=np.float64)
    pairs = np.array(list(itertools.combinations(range(len(points)), 2)), dtype=np.intp)
    distances = np.hypot(*(coords[pairs[:, 1]] - coords[pairs[:, 0]]).T)
    order = np.argsort(distances, kind='stable')
    short = order[distances[order] < BRISK_SHORT_PAIR_DISTANCE][:BRISK_BITS]
    long_ = np.flatnonzero(distances > BRISK_LONG_PAIR_DISTANCE)
    return BriskPattern(
        points=_frozen(coords),
        sigmas=_frozen(np.array(sigmas, dtype=np.float64)),
        short_pairs=_frozen(pairs[np.sort(short)]),
        long_pairs=_frozen(pairs[long_]),
    )
