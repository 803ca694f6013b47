"""Brute-force descriptor matching and match-quality statistics.

Binary descriptors are compared with the Hamming distance (popcount of the
XOR of the packed bytes), real descriptors with the Euclidean distance. Every
query descriptor is paired with its nearest train descriptor; ties go to the
lowest train index, so the result does not depend on how the queries are split
between worker threads.

A match is *correct* when it survives `filter_matches`: its distance is below
`ratio` times the runner-up distance and not above an absolute limit. The
statistics of an image pair are computed over the correct matches only.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor

import numpy as np
from scipy.spatial.distance import cdist

from pyfeatbench.base_features.descriptor_base import Descriptor, DescriptorSet
from pyfeatbench.const import DISTANCE_SENTINEL, DescriptorKind
from pyfeatbench.models.config_models import MatcherParams
from pyfeatbench.models.feature_models import Keypoint, Match, MatchStats
from pyfeatbench.utils.errors import (
    DescriptorMismatchError,
    MatchInputError,
    ParameterError,
)

logger = logging.getLogger(__name__)

CHUNK_ROWS = 256
"""Query descriptors compared per block of the distance matrix."""

_POPCOUNT = np.unpackbits(np.arange(256, dtype=np.uint8)[:, None], axis=1).sum(
    axis=1, dtype=np.uint8
)
"""Set bits of every byte value."""


def _as_array(value: Descriptor | np.ndarray, kind: DescriptorKind) -> np.ndarray:
    if isinstance(value, Descriptor):
        if value.kind is not kind:
            msg = f'Expected a {kind} descriptor, got {value.method} ({value.kind})'
            raise DescriptorMismatchError(msg)
        value = value.values
    array = np.asarray(value)
    if kind is DescriptorKind.BINARY:
        return array.astype(np.uint8, copy=False).ravel()
    return array.astype(np.float64, copy=False).ravel()


def hamming(a: Descriptor | np.ndarray, b: Descriptor | np.ndarray) -> int:
    """Number of differing bits between two packed binary descriptors.

    Raises:
        DescriptorMismatchError: Lengths differ or a descriptor is not binary.
    """
    first = _as_array(a, DescriptorKind.BINARY)
    second = _as_array(b, DescriptorKind.BINARY)
    if first.shape != second.shape:
        msg = f'Cannot compare {first.size * 8}-bit and {second.size * 8}-bit descriptors'
        raise DescriptorMismatchError(msg)
    return int(_POPCOUNT[np.bitwise_xor(first, second)].sum())


def l2(a: Descriptor | np.ndarray, b: Descriptor | np.ndarray) -> float:
    """Euclidean distance between two real descriptors.

    Raises:
        DescriptorMismatchError: Lengths differ or a descriptor is not real.
    """
    first = _as_array(a, DescriptorKind.REAL)
    second = _as_array(b, DescriptorKind.REAL)
    if first.shape != second.shape:
        msg = f'Cannot compare {first.size}- and {second.size}-dimensional descriptors'
        raise DescriptorMismatchError(msg)
    diff = first - second
    return math.sqrt(float(np.dot(diff, diff)))


def distance_matrix(
    queries: np.ndarray, trains: np.ndarray, kind: DescriptorKind
) -> np.ndarray:
    """All pairwise distances between two descriptor blocks.

    Args:
        queries (np.ndarray): (n, w) packed bits or real rows.
        trains (np.ndarray): (m, w) rows of the same layout.
        kind (DescriptorKind): Selects the Hamming or Euclidean kernel.

    Returns:
        np.ndarray: (n, m) float64 distances.
    """
    if kind is DescriptorKind.BINARY:
        xor = np.bitwise_xor(queries[:, None, :], trains[None, :, :])
        return _POPCOUNT[xor].sum(axis=2, dtype=np.uint16).astype(np.float64)
    return cdist(
        queries.astype(np.float64, copy=False),
        trains.astype(np.float64, copy=False),
        'euclidean',
    )


def _nearest_block(
    queries: np.ndarray, trains: np.ndarray, kind: DescriptorKind
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    distances = distance_matrix(queries, trains, kind)
    best = np.argmin(distances, axis=1)
    best_distance = distances[np.arange(distances.shape[0]), best]
    if distances.shape[1] < 2:  # noqa: PLR2004
        second = np.full(distances.shape[0], DISTANCE_SENTINEL)
    else:
        second = np.partition(distances, 1, axis=1)[:, 1]
    return best, best_distance, second


def nearest_neighbours(
    queries: np.ndarray, trains: np.ndarray, kind: DescriptorKind, workers: int = 1
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Nearest train row of every query row with its runner-up distance.

    Query rows are split into blocks of `CHUNK_ROWS`; with several workers the
    blocks are processed by a thread pool and concatenated in block order.

    Returns:
        tuple[np.ndarray, np.ndarray, np.ndarray]: Nearest train index, its
            distance and the runner-up distance per query row.
    """
    starts = range(0, queries.shape[0], CHUNK_ROWS)
    blocks = [queries[start : start + CHUNK_ROWS] for start in starts]
    if workers > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(
                pool.map(lambda block: _nearest_block(block, trains, kind), blocks)
            )
    else:
        parts = [_nearest_block(block, trains, kind) for block in blocks]
    best, best_distance, second = zip(*parts, strict=True)
    return np.concatenate(best), np.concatenate(best_distance), np.concatenate(second)


def brute_force_match(
    queries: DescriptorSet,
    trains: DescriptorSet,
    cross_check: bool = False,
    workers: int = 1,
) -> list[Match]:
    """Match every query descriptor to its nearest train descriptor.

    Args:
        queries (DescriptorSet): Descriptors of the query image.
        trains (DescriptorSet): Descriptors of the template image.
        cross_check (bool): Keep only mutual nearest neighbours.
        workers (int): Threads sharing the query blocks.

    Returns:
        list[Match]: Matches sorted by query index. `second_distance` is the
            distance of the runner-up train descriptor, `DISTANCE_SENTINEL`
            when there is a single train descriptor.

    Raises:
        DescriptorMismatchError: Binary and real descriptors, or different
            lengths.
        MatchInputError: Either set is empty.
    """
    if not queries.compatible_with(trains):
        msg = (
            f'Cannot match {queries.method} ({queries.kind}, {queries.length}) '
            f'against {trains.method} ({trains.kind}, {trains.length})'
        )
        raise DescriptorMismatchError(msg)
    if len(queries) == 0 or len(trains) == 0:
        msg = f'Cannot match {len(queries)} query against {len(trains)} train descriptors'
        raise MatchInputError(msg)
    kind = queries.kind
    best, best_distance, second = nearest_neighbours(
        queries.values, trains.values, kind, workers
    )
    keep = np.ones(best.shape[0], dtype=bool)
    if cross_check:
        back, _, _ = nearest_neighbours(trains.values, queries.values, kind, workers)
        keep = back[best] == np.arange(best.shape[0])
    return [
        Match(q_idx, t_idx, dist, runner_up)
        for q_idx, t_idx, dist, runner_up in zip(
            np.flatnonzero(keep).tolist(),
            best[keep].tolist(),
            best_distance[keep].tolist(),
            second[keep].tolist(),
            strict=True,
        )
    ]


def filter_matches(
    matches: Sequence[Match], ratio: float, max_distance: float = math.inf
) -> list[Match]:
    """Keep the correct matches, preserving order.

    A match survives when `distance < ratio * second_distance` and
    `distance <= max_distance`. A ratio of 1.0 disables the ratio test.

    Raises:
        ParameterError: Ratio outside (0, 1] or negative max_distance.
    """
    if not 0.0 < ratio <= 1.0:
        msg = f'ratio must be within (0, 1], got {ratio}'
        raise ParameterError(msg)
    if max_distance < 0:
        msg = f'max_distance must be >= 0, got {max_distance}'
        raise ParameterError(msg)
    if ratio == 1.0:
        return [m for m in matches if m.distance <= max_distance]
    return [
        m
        for m in matches
        if m.distance < ratio * m.second_distance and m.distance <= max_distance
    ]


def wrap_degrees(angles: np.ndarray) -> np.ndarray:
    """Wrap degrees into [-180, 180)."""
    wrapped = np.mod(np.asarray(angles, dtype=np.float64) + 180.0, 360.0) - 180.0
    return np.where(wrapped >= 180.0, -180.0, wrapped)  # noqa: PLR2004


def match_stats(
    matches: Sequence[Match],
    query_kps: Sequence[Keypoint],
    train_kps: Sequence[Keypoint],
) -> MatchStats:
    """Correct-match count, mean orientation difference and minimum distance.

    The orientation difference of a match is the query orientation minus the
    train orientation in degrees, wrapped into [-180, 180); the mean of the
    wrapped values stays in that range. The minimum distance compares the
    keypoint positions, each in its own image frame.

    Raises:
        MatchInputError: A match index is outside its keypoint list.
    """
    if not matches:
        return MatchStats()
    q_idx = np.fromiter((m.query_idx for m in matches), dtype=np.intp, count=len(matches))
    t_idx = np.fromiter((m.train_idx for m in matches), dtype=np.intp, count=len(matches))
    for label, index, size in (
        ('query', q_idx, len(query_kps)),
        ('train', t_idx, len(train_kps)),
    ):
        if index.min() < 0 or index.max() >= size:
            msg = f'Match {label} index outside [0, {size})'
            raise MatchInputError(msg)
    query = np.array([(kp.x, kp.y, kp.orientation) for kp in query_kps], dtype=np.float64)
    train = np.array([(kp.x, kp.y, kp.orientation) for kp in train_kps], dtype=np.float64)
    q_rows, t_rows = query[q_idx], train[t_idx]
    diffs = wrap_degrees(np.degrees(q_rows[:, 2] - t_rows[:, 2]))
    mean_diff = float(diffs.mean())
    distances = np.hypot(q_rows[:, 0] - t_rows[:, 0], q_rows[:, 1] - t_rows[:, 1])
    return MatchStats(len(matches), mean_diff, float(distances.min()))


def image_pair_decision(stats: MatchStats, min_correct: int) -> bool:
    """Whether an image pair counts as matched; the boundary is inclusive."""
    return stats.n_correct >= min_correct


def correct_matches(
    queries: DescriptorSet,
    trains: DescriptorSet,
    params: MatcherParams | None = None,
    workers: int = 1,
) -> list[Match]:
    """Match and filter with the thresholds of a matcher configuration.

    Empty descriptor sets give no matches.
    """
    params = params if params is not None else MatcherParams()
    if len(queries) == 0 or len(trains) == 0:
        return []
    matches = brute_force_match(queries, trains, params.cross_check, workers)
    limit = params.max_distance_for(queries.kind, queries.length)
    return filter_matches(matches, params.ratio, limit)
