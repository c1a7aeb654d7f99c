"""Shared dense-grid kernels: bilinear resampling and min-max rescaling.

Conventions pinned here and relied on everywhere else in the package:

* One resampling kernel serves both shrinking and enlarging. Source
  coordinates follow the half-pixel-center rule
  ``src = (i + 0.5) * src_side / dst_side - 0.5`` clamped to
  ``[0, src_side - 1]``, then the four nearest samples are blended.
* Grids are float32 at module boundaries; blending weights and reductions
  are carried in float64 before the final cast back.
* ``normalize_minmax`` maps a constant grid to all zeros: a featureless
  grid claims no salience, and zeros pass through downstream ReLU and
  fusion untouched.
"""

from __future__ import annotations

import numpy as np

from .errors import ShapeMismatch

__all__ = ["resize_bilinear", "normalize_minmax", "hadamard", "relu_grid"]


def _axis_weights(src_side: int, dst_side: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per-output-pixel source indices and blend fractions for one axis."""
    coords = (np.arange(dst_side, dtype=np.float64) + 0.5) * (src_side / dst_side) - 0.5
    coords = np.clip(coords, 0.0, float(src_side - 1))
    lo = np.floor(coords).astype(np.intp)
    hi = np.minimum(lo + 1, src_side - 1)
    frac = coords - lo
    return lo, hi, frac


def resize_bilinear(grid: np.ndarray, dst_side: int) -> np.ndarray:
    """Resample a square grid to ``dst_side`` x ``dst_side``.

    Bilinear with half-pixel centers and edge clamping; the same kernel is
    used whether ``dst_side`` is smaller or larger than the source. Output
    values are convex combinations of input values, so the output range is
    contained in the input range.
    """
    grid = np.asarray(grid)
    if grid.ndim != 2 or grid.shape[0] != grid.shape[1]:
        raise ShapeMismatch(f"resize_bilinear expects a square grid, got shape {grid.shape}")
    if dst_side < 1:
        raise ValueError(f"dst_side must be >= 1, got {dst_side}")
    src_side = grid.shape[0]
    if dst_side == src_side:
        return grid.astype(np.float32, copy=True)

    lo, hi, frac = _axis_weights(src_side, dst_side)
    g = grid.astype(np.float64)
    # Separable blend: rows first, then columns.
    rows = g[lo, :] * (1.0 - frac)[:, None] + g[hi, :] * frac[:, None]
    out = rows[:, lo] * (1.0 - frac)[None, :] + rows[:, hi] * frac[None, :]
    return out.astype(np.float32)


def normalize_minmax(grid: np.ndarray) -> np.ndarray:
    """Rescale a grid to [0, 1] by its own min and max.

    A constant grid (max == min) comes back as all zeros. On non-constant
    grids the operation is exactly idempotent: the minimum maps to 0.0 and
    the maximum to 1.0, so a second pass is the identity.
    """
    grid = np.asarray(grid)
    lo = float(grid.min())
    hi = float(grid.max())
    if hi == lo:
        return np.zeros(grid.shape, dtype=np.float32)
    out = (grid.astype(np.float64) - lo) / (hi - lo)
    return out.astype(np.float32)


def hadamard(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Elementwise product of two equally shaped grids."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise ShapeMismatch(f"hadamard shapes differ: {a.shape} vs {b.shape}")
    return (a * b).astype(np.float32)


def relu_grid(a: np.ndarray) -> np.ndarray:
    """Elementwise max(x, 0)."""
    return np.maximum(np.asarray(a), 0).astype(np.float32)
