"""Weakly-supervised object localization from a saliency map.

Workflow: threshold the map at a fraction of its maximum, group the
surviving pixels into 8-connected components, and box the largest one.
A sweep evaluates several fractions and, when a ground-truth box is
supplied, flags the best report by IoU.

Connectivity is 8-way: diagonal neighbors join the same component, the
more inclusive choice for speckled masks. Largest-component ties break by
the lexicographically smallest (row_min, col_min) of the component's box,
so results are deterministic across implementations.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BadFraction

__all__ = [
    "BBox",
    "LocalizationReport",
    "binarize",
    "connected_components",
    "localize",
    "iou",
    "sweep",
    "DEFAULT_FRACTIONS",
]

# Canonical sweep ladder: 0.45 is the reference operating point, 0.30 the
# permissive one, 0.60 represents the tightened regime.
DEFAULT_FRACTIONS = (0.30, 0.45, 0.60)


@dataclass(frozen=True)
class BBox:
    """Inclusive pixel bounding box."""

    row_min: int
    col_min: int
    row_max: int
    col_max: int

    def area(self) -> int:
        return (self.row_max - self.row_min + 1) * (self.col_max - self.col_min + 1)

    def to_dict(self) -> dict:
        return {
            "row_min": self.row_min,
            "col_min": self.col_min,
            "row_max": self.row_max,
            "col_max": self.col_max,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "BBox":
        return cls(int(d["row_min"]), int(d["col_min"]), int(d["row_max"]), int(d["col_max"]))


@dataclass
class LocalizationReport:
    """Outcome of one threshold: mask stats, box, and optional IoU."""

    threshold_fraction: float
    mask: np.ndarray
    component_count: int
    largest_component_area: int
    bbox: BBox | None
    iou: float | None

    def to_dict(self) -> dict:
        """JSON-ready view; the mask itself is summarized, not serialized."""
        return {
            "threshold_fraction": self.threshold_fraction,
            "mask_pixels": int(self.mask.sum()),
            "component_count": self.component_count,
            "largest_component_area": self.largest_component_area,
            "bbox": self.bbox.to_dict() if self.bbox is not None else None,
            "iou": self.iou,
        }


def binarize(saliency: np.ndarray, fraction: float) -> np.ndarray:
    """Mask of pixels at or above fraction * max(map); empty if max is 0."""
    if not 0.0 < fraction <= 1.0:
        raise BadFraction(f"threshold fraction must be in (0, 1], got {fraction}")
    saliency = np.asarray(saliency, dtype=np.float64)
    peak = saliency.max()
    if peak <= 0.0:
        return np.zeros(saliency.shape, dtype=bool)
    return saliency >= float(fraction) * peak


def connected_components(mask: np.ndarray) -> list[np.ndarray]:
    """Partition true pixels into 8-connected components.

    Returns one (n_i, 2) int array of (row, col) pairs per component, rows
    in scan order within a component, components ordered by their first
    pixel in scan order. Union-find over vectorized neighbor edges; no
    recursion, mask size is the only limit.
    """
    mask = np.asarray(mask, dtype=bool)
    h, w = mask.shape
    flat = mask.ravel()
    pixels = np.flatnonzero(flat)
    if pixels.size == 0:
        return []

    parent = np.arange(h * w, dtype=np.intp)

    def find(i: int) -> int:
        root = i
        while parent[root] != root:
            root = parent[root]
        while parent[i] != root:
            parent[i], i = root, parent[i]
        return root

    # Edges to the E, S, SE, SW neighbors cover all 8-adjacencies once.
    edge_specs = (
        (mask[:, :-1] & mask[:, 1:], 1),
        (mask[:-1, :] & mask[1:, :], w),
        (mask[:-1, :-1] & mask[1:, 1:], w + 1),
        (mask[:-1, 1:] & mask[1:, :-1], w - 1),
    )
    for pair_mask, offset in edge_specs:
        rows, cols = np.nonzero(pair_mask)
        if offset == w - 1:
            cols = cols + 1  # SW edges start one column right
        starts = rows * w + cols
        for a in starts:
            ra, rb = find(a), find(a + offset)
            if ra != rb:
                parent[max(ra, rb)] = min(ra, rb)

    groups: dict[int, list[int]] = {}
    for p in pixels:
        groups.setdefault(find(p), []).append(p)

    components = []
    for root in sorted(groups):
        idx = np.asarray(groups[root], dtype=np.intp)
        components.append(np.stack([idx // w, idx % w], axis=1))
    return components


def _component_bbox(component: np.ndarray) -> BBox:
    rows = component[:, 0]
    cols = component[:, 1]
    return BBox(int(rows.min()), int(cols.min()), int(rows.max()), int(cols.max()))


def iou(a: BBox, b: BBox) -> float:
    """Intersection over union with inclusive pixel counts."""
    inter_rows = min(a.row_max, b.row_max) - max(a.row_min, b.row_min) + 1
    inter_cols = min(a.col_max, b.col_max) - max(a.col_min, b.col_min) + 1
    inter = max(inter_rows, 0) * max(inter_cols, 0)
    union = a.area() + b.area() - inter
    return inter / union


def localize(saliency: np.ndarray, fraction: float, gt: BBox | None = None) -> LocalizationReport:
    """Threshold, box the largest 8-connected component, score against gt.

    An empty mask yields a report without a box (and without IoU). Ties on
    component size go to the component whose box corner (row_min, col_min)
    is lexicographically smallest.
    """
    mask = binarize(saliency, fraction)
    components = connected_components(mask)
    if not components:
        return LocalizationReport(
            threshold_fraction=float(fraction),
            mask=mask,
            component_count=0,
            largest_component_area=0,
            bbox=None,
            iou=None,
        )

    best_component = None
    best_key = None
    for component in components:
        box = _component_bbox(component)
        key = (-len(component), box.row_min, box.col_min)
        if best_key is None or key < best_key:
            best_key = key
            best_component = component
    assert best_component is not None
    box = _component_bbox(best_component)
    return LocalizationReport(
        threshold_fraction=float(fraction),
        mask=mask,
        component_count=len(components),
        largest_component_area=int(len(best_component)),
        bbox=box,
        iou=iou(box, gt) if gt is not None else None,
    )


def sweep(
    saliency: np.ndarray,
    fractions: list[float] | tuple[float, ...] = DEFAULT_FRACTIONS,
    gt: BBox | None = None,
) -> tuple[list[LocalizationReport], int | None]:
    """One report per fraction, in input order, plus the best index.

    Best = IoU argmax when ground truth is given, ties going to the lower
    fraction; None without ground truth. Reports with no box never win.
    """
    fractions = list(fractions)
    if not fractions:
        raise BadFraction("fractions list must not be empty")
    reports = [localize(saliency, f, gt) for f in fractions]
    if gt is None:
        return reports, None
    best_index: int | None = None
    best_key = None
    for i, report in enumerate(reports):
        if report.iou is None:
            continue
        key = (report.iou, -report.threshold_fraction)
        if best_key is None or key > best_key:
            best_key = key
            best_index = i
    return reports, best_index
