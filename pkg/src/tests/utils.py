"""Reference implementations the tests compare the library against.

Routine Listings
----------------

naive_box_sum: function
    Rectangle sum by looping over pixels
naive_fast_corners: function
    Segment test evaluated pixel by pixel
exhaustive_match: function
    Nearest and runner-up train row of every query row
read_table: function
    Comment line and rows of a report file written by pyfeatbench
rotate_image: function
    Image turned about a centre with cubic interpolation
rotate_keypoints: function
    Keypoints carried along by `rotate_image`
lit_texture: function
    Smooth texture under a linear illumination ramp
"""
from __future__ import annotations

import csv
import math
from pathlib import Path

import numpy as np
from scipy import ndimage

from pyfeatbench.detectors.fast import CIRCLE_OFFSETS
from pyfeatbench.imgcore import Image, smooth_array
from pyfeatbench.models.feature_models import Keypoint

_CIRCLE = len(CIRCLE_OFFSETS)


def naive_box_sum(data: np.ndarray, x0: int, y0: int, x1: int, y1: int) -> int:
    """Inclusive rectangle sum."""
    total = 0
    for y in range(y0, y1 + 1):
        for x in range(x0, x1 + 1):
            total += int(data[y, x])
    return total


def naive_fast_corners(
    data: np.ndarray, threshold: int, arc: int
) -> set[tuple[int, int]]:
    """(x, y) of every pixel passing the segment test, without suppression."""
    height, width = data.shape
    corners = set()
    for y in range(3, height - 3):
        for x in range(3, width - 3):
            centre = int(data[y, x])
            ring = [int(data[y + dy, x + dx]) - centre for dx, dy in CIRCLE_OFFSETS]
            for start in range(_CIRCLE):
                run = [ring[(start + i) % _CIRCLE] for i in range(arc)]
                if all(d > threshold for d in run) or all(d < -threshold for d in run):
                    corners.add((x, y))
                    break
    return corners


def exhaustive_match(
    queries: np.ndarray, trains: np.ndarray, distance
) -> list[tuple[int, int, float, float]]:
    """(query, train, distance, runner-up distance), lowest train index on ties."""
    matches = []
    for q_idx, query in enumerate(queries):
        dists = [distance(query, train) for train in trains]
        best = min(range(len(dists)), key=lambda i: (dists[i], i))
        others = [d for i, d in enumerate(dists) if i != best]
        second = min(others) if others else math.inf
        matches.append((q_idx, best, float(dists[best]), float(second)))
    return matches


def read_table(path: str | Path, delimiter: str = '\t') -> tuple[str, list[list[str]]]:
    """Comment line and rows, header row included, of a report file."""
    with Path(path).open(encoding='utf-8', newline='') as handle:
        comment = handle.readline().rstrip('\n')
        rows = list(csv.reader(handle, delimiter=delimiter))
    return comment, rows


def rotate_image(img: Image, degrees: float, centre: tuple[float, float]) -> Image:
    """Turn an image by `degrees` about `centre` = (x, y).

    Angles follow the keypoint convention (x right, y down): content found in
    direction `a` from the centre ends up in direction `a + degrees`.
    """
    theta = math.radians(degrees)
    cos, sin = math.cos(theta), math.sin(theta)
    cx, cy = centre
    ys, xs = np.mgrid[0 : img.height, 0 : img.width].astype(np.float64)
    dx, dy = xs - cx, ys - cy
    src_x = cx + cos * dx + sin * dy
    src_y = cy - sin * dx + cos * dy
    turned = ndimage.map_coordinates(
        img.as_float(), [src_y, src_x], order=3, mode='nearest'
    )
    return Image.from_array(np.clip(turned, 0.0, 255.0))


def rotate_keypoints(
    keypoints: list[Keypoint], degrees: float, centre: tuple[float, float]
) -> list[Keypoint]:
    """Positions and orientations of keypoints in the `rotate_image` result."""
    theta = math.radians(degrees)
    cos, sin = math.cos(theta), math.sin(theta)
    cx, cy = centre
    turned = []
    for kp in keypoints:
        dx, dy = kp.x - cx, kp.y - cy
        turned.append(
            Keypoint(
                cx + cos * dx - sin * dy,
                cy + sin * dx + cos * dy,
                kp.scale,
                (kp.orientation + theta) % (2 * math.pi),
            )
        )
    return turned


def lit_texture(
    rng: np.random.Generator, size: int, slope: float = 2.5, contrast: float = 40.0
) -> Image:
    """Smooth noise of the given contrast over a ramp brightening to the right.

    The ramp gives every patch a dominant gradient, so orientation estimates
    follow a rotation of the image.
    """
    noise = smooth_array(rng.uniform(-1.0, 1.0, (size, size)), 2.5)
    noise *= contrast / max(float(np.abs(noise).max()), 1e-9)
    ramp = slope * (np.arange(size, dtype=np.float64) - size / 2)[None, :]
    return Image.from_array(np.clip(128.0 + ramp + noise, 0.0, 255.0))
