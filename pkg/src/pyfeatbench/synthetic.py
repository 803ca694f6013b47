"""Synthetic pose-grid dataset generator.

Every capture point gets its own textured scene: a noisy gray background with
random rectangles, polygons, blurred blobs and letter glyphs drawn by Pillow.
The scene canvas is larger than a view, so rotated and shifted views never
reach past its edge.

A view is taken for each of the 3 height levels and 5 yaw angles:

- the height level shifts the view centre vertically by `height_step` pixels,
  level 0 being the lowest camera and so the lowest part of the scene;
- the yaw rotates the scene about the view centre, counter-clockwise for
  positive angles, with bilinear resampling.

The template of a point is the middle-height, 0 degree view. The query with
the same pose is cut from the scene by the same code path, so it is
pixel-identical to the template. All images are written as binary PGM.

Example:
    >>> manifest = generate_pose_grid('data/synthetic', n_points=5, seed=7)
    >>> len(manifest.templates), len(manifest.queries)
    (5, 75)
"""

from __future__ import annotations

import logging
import math
import string
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image as PILImage
from PIL import ImageDraw, ImageFilter, ImageFont

from pyfeatbench.const import GRID_FILE, HEIGHT_LEVELS, MANIFEST_FILE, YAW_RANGE
from pyfeatbench.imgcore import Image, save_pgm
from pyfeatbench.models.bench_models import (
    DatasetManifest,
    PoseLabel,
    QueryEntry,
    TemplateEntry,
)
from pyfeatbench.models.config_models import GridGeometry
from pyfeatbench.utils.errors import ConfigError
from pyfeatbench.utils.helpers import Helpers

logger = logging.getLogger(__name__)

DEFAULT_IMAGE_SIZE = (555, 480)
DEFAULT_SYNTHETIC_SEED = 2024
TEMPLATE_HEIGHT_LEVEL = 1
TEMPLATE_YAW = 0
CANVAS_MARGIN = 8
POINT_SPACING = 1.0
"""Metres between neighbouring capture points of the generated grid."""
CAMERA_HEIGHTS = (0.5, 1.0, 1.5)
LEVER_ARM = 0.1

_GLYPHS = string.ascii_uppercase + string.digits


@dataclass(frozen=True)
class SceneSettings:
    """Rendering parameters of a synthetic dataset.

    Attributes:
        width (int): View width in pixels.
        height (int): View height in pixels.
        seed (int): Seed of every random draw.
        noise_sigma (float): Standard deviation of the background noise.
        height_step (int): Vertical view shift between height levels, in
            pixels; 0 selects an eighth of the view height.
        rectangles (int): Rectangles per scene.
        polygons (int): Polygons per scene.
        blobs (int): Blurred ellipses per scene.
        glyphs (int): Letters per scene.
    """

    width: int = DEFAULT_IMAGE_SIZE[0]
    height: int = DEFAULT_IMAGE_SIZE[1]
    seed: int = DEFAULT_SYNTHETIC_SEED
    noise_sigma: float = 4.0
    height_step: int = 0
    rectangles: int = 18
    polygons: int = 10
    blobs: int = 8
    glyphs: int = 24

    def __post_init__(self) -> None:
        """Validate dimensions."""
        if self.width < 64 or self.height < 64:  # noqa: PLR2004
            size = f'{self.width}x{self.height}'
            msg = f'Synthetic views need at least 64x64 pixels, got {size}'
            raise ConfigError(msg)
        if self.noise_sigma < 0 or self.height_step < 0:
            msg = 'noise_sigma and height_step must be >= 0'
            raise ConfigError(msg)

    @property
    def step(self) -> int:
        """Effective vertical shift between height levels."""
        return self.height_step or self.height // 8

    @property
    def canvas_side(self) -> int:
        """Even side of the square scene canvas."""
        reach = math.hypot(self.width, self.height) / 2 + self.step + CANVAS_MARGIN
        return 2 * math.ceil(reach)


def render_scene(settings: SceneSettings, point_index: int) -> PILImage.Image:
    """Draw the scene of one capture point on a gray 'L' canvas."""
    rng = np.random.default_rng([settings.seed, point_index])
    side = settings.canvas_side
    background = rng.normal(rng.uniform(60, 190), settings.noise_sigma, (side, side))
    pixels = np.clip(np.floor(background + 0.5), 0, 255).astype(np.uint8)
    canvas = PILImage.fromarray(pixels)
    draw = ImageDraw.Draw(canvas)

    def shade() -> int:
        return int(rng.integers(0, 256))

    def extent(low: float, high: float) -> int:
        return int(rng.uniform(low, high) * settings.width)

    for _ in range(settings.rectangles):
        x, y = rng.integers(0, side, 2).tolist()
        draw.rectangle((x, y, x + extent(0.04, 0.2), y + extent(0.04, 0.2)), fill=shade())
    for _ in range(settings.polygons):
        cx, cy = rng.uniform(0, side, 2)
        count = int(rng.integers(3, 7))
        angles = np.sort(rng.uniform(0, 2 * math.pi, count))
        radii = rng.uniform(0.03, 0.1, count) * settings.width
        vertices = [
            (float(cx + r * math.cos(a)), float(cy + r * math.sin(a)))
            for a, r in zip(angles.tolist(), radii.tolist(), strict=True)
        ]
        draw.polygon(vertices, fill=shade())

    blobs = PILImage.new('L', (side, side), 0)
    blob_draw = ImageDraw.Draw(blobs)
    for _ in range(settings.blobs):
        x, y = rng.integers(0, side, 2).tolist()
        rx, ry = extent(0.02, 0.08), extent(0.02, 0.08)
        blob_draw.ellipse((x - rx, y - ry, x + rx, y + ry), fill=255)
    blobs = blobs.filter(ImageFilter.GaussianBlur(3))
    canvas = PILImage.composite(PILImage.new('L', (side, side), shade()), canvas, blobs)

    draw = ImageDraw.Draw(canvas)
    for _ in range(settings.glyphs):
        font = ImageFont.load_default(size=int(rng.integers(14, 40)))
        x, y = rng.integers(0, side, 2).tolist()
        draw.text((x, y), str(rng.choice(list(_GLYPHS))), fill=shade(), font=font)
    return canvas


def view_centre(settings: SceneSettings, height_level: int) -> tuple[int, int]:
    """Canvas pixel the view of a height level is centred on."""
    centre = settings.canvas_side // 2
    return centre, centre + (TEMPLATE_HEIGHT_LEVEL - height_level) * settings.step


def render_view(
    scene: PILImage.Image, settings: SceneSettings, height_level: int, yaw: float
) -> Image:
    """Cut the view of a pose out of a scene.

    The crop is aligned to whole pixels and the rotation centre is the centre
    of the crop, so rotating the unrotated view about its own centre
    reproduces the rotated view wherever both have content.
    """
    cx, cy = view_centre(settings, height_level)
    left = cx - settings.width // 2
    top = cy - settings.height // 2
    box = (left, top, left + settings.width, top + settings.height)
    if yaw:
        centre = (left + settings.width / 2, top + settings.height / 2)
        scene = scene.rotate(yaw, resample=PILImage.Resampling.BILINEAR, center=centre)
    return Image(np.asarray(scene.crop(box), dtype=np.uint8).copy())


def point_name(index: int) -> str:
    """Identifier of the capture point at an index."""
    return f'p{index:02d}'


def query_name(point_id: str, height_level: int, yaw: int) -> str:
    """File name of a query image."""
    return f'{point_id}_h{height_level}_y{yaw:+d}.pgm'


def synthetic_grid(n_points: int) -> GridGeometry:
    """Grid geometry of a generated dataset: points on a line along x."""
    return GridGeometry(
        points={point_name(i): [i * POINT_SPACING, 0.0] for i in range(n_points)},
        heights=list(CAMERA_HEIGHTS),
        lever_arm=LEVER_ARM,
    )


def generate_pose_grid(
    output_dir: str | Path,
    n_points: int,
    image_size: tuple[int, int] = DEFAULT_IMAGE_SIZE,
    seed: int = DEFAULT_SYNTHETIC_SEED,
    settings: SceneSettings | None = None,
) -> DatasetManifest:
    """Render a pose-grid dataset and write it with its manifest and grid.

    Args:
        output_dir (str | Path): Directory receiving `templates/`, `queries/`,
            `manifest.json` and `grid.json`.
        n_points (int): Capture points, each giving 1 template and 15 queries.
        image_size (tuple[int, int]): View (width, height) in pixels.
        seed (int): Seed of every random draw.
        settings (SceneSettings | None): Full rendering parameters, overriding
            image_size and seed.

    Returns:
        DatasetManifest: Manifest with paths relative to output_dir.

    Raises:
        ConfigError: n_points below 1, views below 64x64 or output_dir not
            writable.
    """
    if n_points < 1:
        msg = f'n_points must be >= 1, got {n_points}'
        raise ConfigError(msg)
    if settings is None:
        settings = SceneSettings(width=image_size[0], height=image_size[1], seed=seed)
    root = Path(output_dir)
    templates: list[TemplateEntry] = []
    queries: list[QueryEntry] = []
    try:
        for index in range(n_points):
            point_id = point_name(index)
            scene = render_scene(settings, index)
            template_path = f'templates/{point_id}.pgm'
            save_pgm(
                render_view(scene, settings, TEMPLATE_HEIGHT_LEVEL, TEMPLATE_YAW),
                root / template_path,
            )
            templates.append(
                TemplateEntry(
                    template_path,
                    PoseLabel(point_id, TEMPLATE_HEIGHT_LEVEL, TEMPLATE_YAW),
                    f'scene {point_id}',
                )
            )
            for level in range(HEIGHT_LEVELS):
                for yaw in YAW_RANGE:
                    path = f'queries/{query_name(point_id, level, yaw)}'
                    save_pgm(render_view(scene, settings, level, yaw), root / path)
                    queries.append(QueryEntry(path, PoseLabel(point_id, level, yaw)))
            logger.debug('Rendered point %s', point_id)
        manifest = DatasetManifest(
            templates=templates, queries=queries, seed=settings.seed
        )
        Helpers.write_json(root / MANIFEST_FILE, manifest.to_dict())
        Helpers.write_json(root / GRID_FILE, synthetic_grid(n_points).to_dict())
    except OSError as exc:
        msg = f'Cannot write synthetic dataset to {root}: {exc.strerror or exc}'
        raise ConfigError(msg) from exc
    logger.info(
        'Wrote %d templates and %d queries to %s', len(templates), len(queries), root
    )
    return manifest
