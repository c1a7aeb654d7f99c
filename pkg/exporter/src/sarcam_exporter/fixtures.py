"""Synthetic activation bundles with geometry known by construction.

Each pattern builds an image, a feature stack, and a gradient stack whose
spatial story is decided up front, so downstream localization results can
be checked against exact pixel boxes instead of eyeballed heatmaps:

- BLOB: one bright square near the center; gradients are positive on
  exactly the grid cells under the square and zero elsewhere. The square's
  pixel box is the ground truth.
- TWO_BLOBS: a larger and a smaller bright square separated by at least
  one empty grid cell, equally bright and equally weighted in features and
  gradients, so only area distinguishes them. Ground truth is the larger
  square's box.
- ZERO_GRADS: speckled image and features, gradients exactly zero; the
  degenerate all-zero saliency case.
- RANDOM: unstructured noise everywhere, signed gradients, with a logit
  vector recorded; no ground truth exists.

All randomness comes from one numpy default_rng(seed) with a fixed draw
order, and every byte written (NPY payloads, manifest, ground-truth JSON)
is a pure function of (seed, n, g, k, pattern): rerunning an invocation
reproduces the directory bit for bit.

Ground truth, when it exists, is written as ``gt.json`` inside the bundle
directory: an inclusive pixel box {row_min, col_min, row_max, col_max}.
"""

from __future__ import annotations

import json
from enum import Enum
from pathlib import Path

import numpy as np

from .bundle_writer import write_bundle
from .errors import BadShape

__all__ = ["Pattern", "make_fixture", "GT_NAME"]

GT_NAME = "gt.json"


class Pattern(str, Enum):
    BLOB = "blob"
    TWO_BLOBS = "two_blobs"
    ZERO_GRADS = "zero_grads"
    RANDOM = "random"


def _cells_to_pixels(c0: int, c1: int, n: int, g: int) -> tuple[int, int]:
    """Half-open pixel range covered by the half-open cell range [c0, c1)."""
    return (c0 * n) // g, (c1 * n) // g


def _blob_cells(g: int) -> tuple[int, int]:
    """Cell range of the single central blob: roughly the middle quarter."""
    c0 = (3 * g) // 8
    c1 = max(c0 + 1, -(-5 * g // 8))
    return c0, c1


def _two_blob_cells(g: int) -> tuple[tuple[int, int], tuple[int, int]]:
    """Cell ranges (big, small) with at least one empty cell between them."""
    b0 = g // 8
    b1 = b0 + max(2, (3 * g) // 8)
    s1 = g - max(1, g // 8)
    s0 = s1 - max(1, g // 4)
    if s0 - b1 < 1 or (b1 - b0) <= (s1 - s0):
        raise BadShape(
            f"pattern two_blobs needs grid side >= 5 to separate two targets, got {g}"
        )
    return (b0, b1), (s0, s1)


def _gt_dict(r0: int, c0: int, r1: int, c1: int) -> dict:
    """Inclusive pixel box from a half-open pixel rectangle."""
    return {"row_min": r0, "col_min": c0, "row_max": r1 - 1, "col_max": c1 - 1}


def _paint_square(
    image: np.ndarray,
    features: np.ndarray,
    grads: np.ndarray,
    cells: tuple[int, int],
    n: int,
    g: int,
    rng: np.random.Generator,
) -> dict:
    """Stamp one bright square into image/features/grads; return its gt box."""
    c0, c1 = cells
    p0, p1 = _cells_to_pixels(c0, c1, n, g)
    side_px = p1 - p0
    side_cells = c1 - c0
    image[p0:p1, p0:p1] = 0.82 + 0.18 * rng.random((side_px, side_px))
    k = features.shape[0]
    features[:, c0:c1, c0:c1] += 0.9 + 0.3 * rng.random((k, side_cells, side_cells))
    grads[:, c0:c1, c0:c1] = 0.5 + 0.5 * rng.random((k, side_cells, side_cells))
    return _gt_dict(p0, p0, p1, p1)


def make_fixture(
    seed: int, n: int, g: int, k: int, pattern: Pattern, out_dir: str | Path
) -> Path:
    """Write one synthetic bundle directory and return its path.

    Requires n >= g >= 1 and k >= 1 (BadShape otherwise); TWO_BLOBS
    additionally needs g >= 5 so the two squares do not touch.
    """
    if n < g or g < 1 or k < 1:
        raise BadShape(
            f"need image side >= grid side >= 1 and channels >= 1, got n={n} g={g} k={k}"
        )
    pattern = Pattern(pattern)
    rng = np.random.default_rng(seed)

    gt: dict | None = None
    class_name: str | None = None
    logits: list[float] | None = None
    class_id = 0

    if pattern in (Pattern.BLOB, Pattern.TWO_BLOBS):
        image = 0.04 + 0.08 * rng.random((n, n))
        features = 0.05 * rng.random((k, g, g))
        grads = np.zeros((k, g, g))
        if pattern is Pattern.BLOB:
            gt = _paint_square(image, features, grads, _blob_cells(g), n, g, rng)
        else:
            big, small = _two_blob_cells(g)
            gt = _paint_square(image, features, grads, big, n, g, rng)
            _paint_square(image, features, grads, small, n, g, rng)
    elif pattern is Pattern.ZERO_GRADS:
        image = 0.2 + 0.6 * rng.random((n, n))
        features = rng.random((k, g, g))
        grads = np.zeros((k, g, g))
    else:
        image = rng.random((n, n))
        features = rng.normal(0.0, 1.0, (k, g, g))
        grads = rng.normal(0.0, 1.0, (k, g, g))
        logits = [float(v) for v in rng.normal(0.0, 1.0, 10)]
        class_id = int(np.argmax(logits))
        class_name = "noise"

    bundle_dir = write_bundle(
        out_dir,
        image=image,
        features=features,
        grads=grads,
        model_name="synthetic",
        layer_name=pattern.value,
        class_id=class_id,
        class_name=class_name,
        logits=logits,
    )
    if gt is not None:
        text = json.dumps(gt, indent=2, sort_keys=True) + "\n"
        (bundle_dir / GT_NAME).write_text(text, encoding="utf-8")
    return bundle_dir
