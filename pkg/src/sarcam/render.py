"""Publication-style rendering: heatmaps, overlays, boxes, montages.

Everything here is pinned to exact integer arithmetic so renders are
byte-reproducible golden-file material: the heat colormap is a fixed
piecewise-linear table, and rounding to 8-bit happens once, half-up, at
the final stage of each render.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from PIL import Image

from .errors import OutOfBounds, ShapeMismatch
from .localize import BBox

__all__ = ["RenderSpec", "colorize", "overlay", "draw_bbox", "panel", "save_png"]

# Heat colormap control points: value -> (R, G, B), linearly interpolated.
_HEAT_STOPS = np.array([0.0, 0.125, 0.375, 0.625, 0.875, 1.0])
_HEAT_RGB = np.array(
    [
        (0, 0, 128),
        (0, 0, 255),
        (0, 255, 255),
        (255, 255, 0),
        (255, 0, 0),
        (128, 0, 0),
    ],
    dtype=np.float64,
)

GUTTER_PX = 4
LABEL_STRIP_PX = 12
BOX_COLOR = (0, 255, 0)


@dataclass
class RenderSpec:
    """Rendering knobs for the report path.

    ``colormap`` names the heat palette; "jet" is the only one built in
    (perceptually-uniform palettes are a deliberate extension point).
    """

    colormap: str = "jet"
    alpha: float = 0.5
    draw_bbox: bool = False
    panel_columns: int = 1

    def validate(self) -> None:
        if self.colormap != "jet":
            raise ValueError(f"unknown colormap {self.colormap!r}")
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must be in [0, 1], got {self.alpha}")
        if self.panel_columns < 1:
            raise ValueError(f"panel columns must be >= 1, got {self.panel_columns}")


def _round_half_up_u8(values: np.ndarray) -> np.ndarray:
    return np.clip(np.floor(values + 0.5), 0, 255).astype(np.uint8)


def colorize(saliency: np.ndarray) -> np.ndarray:
    """Map a [0, 1] grid to an (H, W, 3) uint8 heat image."""
    saliency = np.asarray(saliency, dtype=np.float64)
    channels = [
        np.interp(saliency, _HEAT_STOPS, _HEAT_RGB[:, c]) for c in range(3)
    ]
    return _round_half_up_u8(np.stack(channels, axis=-1))


def overlay(image: np.ndarray, heat: np.ndarray, alpha: float = 0.5) -> np.ndarray:
    """Alpha-blend a heat image over the grayscale input.

    ``alpha=0`` reproduces the grayscale input exactly, ``alpha=1`` the
    heatmap; blending happens in float and rounds half-up once at the end.
    """
    image = np.asarray(image, dtype=np.float64)
    heat = np.asarray(heat, dtype=np.float64)
    if heat.shape[:2] != image.shape or heat.ndim != 3 or heat.shape[2] != 3:
        raise ShapeMismatch(f"overlay: image {image.shape} vs heat {heat.shape}")
    gray = (image * 255.0)[:, :, None]
    return _round_half_up_u8(alpha * heat + (1.0 - alpha) * gray)


def draw_bbox(rgb: np.ndarray, bbox: BBox, thickness: int = 1) -> np.ndarray:
    """Copy of the image with a green rectangle on the box perimeter.

    Thickness grows inward from the perimeter and stops when the rings
    collapse, so the drawing never leaves the box.
    """
    rgb = np.asarray(rgb)
    h, w = rgb.shape[:2]
    if not (0 <= bbox.row_min <= bbox.row_max < h and 0 <= bbox.col_min <= bbox.col_max < w):
        raise OutOfBounds(f"bbox {bbox} does not fit in image {h}x{w}")
    if thickness < 1:
        raise ValueError(f"thickness must be >= 1, got {thickness}")
    out = rgb.copy()
    color = np.array(BOX_COLOR, dtype=out.dtype)
    for t in range(thickness):
        top, bottom = bbox.row_min + t, bbox.row_max - t
        left, right = bbox.col_min + t, bbox.col_max - t
        if top > bottom or left > right:
            break
        out[top, left : right + 1] = color
        out[bottom, left : right + 1] = color
        out[top : bottom + 1, left] = color
        out[top : bottom + 1, right] = color
    return out


def _label_strip(width: int, text: str) -> np.ndarray:
    """White strip with the label text; blank if font rendering fails."""
    strip = np.full((LABEL_STRIP_PX, width, 3), 255, dtype=np.uint8)
    try:
        from PIL import ImageDraw, ImageFont

        img = Image.fromarray(strip)
        draw = ImageDraw.Draw(img)
        draw.text((2, 0), text, fill=(0, 0, 0), font=ImageFont.load_default())
        return np.asarray(img)
    except Exception:
        return strip


def panel(
    images: list[np.ndarray],
    labels: list[str] | None = None,
    columns: int = 1,
) -> np.ndarray:
    """Row-major montage with uniform white gutters.

    All tiles must share one size. With labels, each tile gets a text
    strip underneath; trailing empty cells stay white.
    """
    if not images:
        raise ShapeMismatch("panel: need at least one image")
    if columns < 1:
        raise ValueError(f"panel columns must be >= 1, got {columns}")
    if labels is not None and len(labels) != len(images):
        raise ShapeMismatch(f"panel: {len(images)} images but {len(labels)} labels")
    tiles = [np.asarray(img) for img in images]
    shape = tiles[0].shape
    for i, tile in enumerate(tiles):
        if tile.shape != shape:
            raise ShapeMismatch(f"panel: image {i} has shape {tile.shape}, expected {shape}")

    h, w = shape[:2]
    strip = LABEL_STRIP_PX if labels is not None else 0
    cell_h = h + strip
    rows = -(-len(tiles) // columns)
    out_h = rows * cell_h + (rows + 1) * GUTTER_PX
    out_w = columns * w + (columns + 1) * GUTTER_PX
    out = np.full((out_h, out_w, 3), 255, dtype=np.uint8)

    for i, tile in enumerate(tiles):
        r, c = divmod(i, columns)
        top = GUTTER_PX + r * (cell_h + GUTTER_PX)
        left = GUTTER_PX + c * (w + GUTTER_PX)
        if tile.ndim == 2:
            tile = np.repeat(tile[:, :, None], 3, axis=2)
        out[top : top + h, left : left + w] = tile
        if labels is not None:
            out[top + h : top + h + strip, left : left + w] = _label_strip(w, labels[i])
    return out


def save_png(rgb: np.ndarray, path) -> None:
    """Write an 8-bit RGB PNG with default chunks only."""
    Image.fromarray(np.asarray(rgb, dtype=np.uint8)).save(path, format="PNG")
