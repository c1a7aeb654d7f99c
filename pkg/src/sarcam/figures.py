"""Matplotlib report figures written alongside the delimited reports.

These are analyst-facing summaries (threshold sweeps, localization
walkthroughs), distinct from the pixel-exact renders in ``render``. All
figures use the Agg backend and pin their PNG metadata so repeated runs
produce identical bytes.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .localize import BBox, LocalizationReport

__all__ = ["sweep_figure", "localization_figure"]

_SAVE_KW = dict(dpi=120, metadata={"Software": "sarcam"})


def sweep_figure(reports: list[LocalizationReport], best_index: int | None, path) -> None:
    """Box area (and IoU when present) versus threshold fraction."""
    fractions = [r.threshold_fraction for r in reports]
    areas = [r.bbox.area() if r.bbox is not None else 0 for r in reports]

    fig, ax = plt.subplots(figsize=(5.0, 3.2))
    ax.plot(fractions, areas, "o-", color="tab:blue", label="box area (px)")
    ax.set_xlabel("threshold fraction of map maximum")
    ax.set_ylabel("box area (px)", color="tab:blue")
    ax.tick_params(axis="y", labelcolor="tab:blue")

    ious = [r.iou for r in reports]
    if any(v is not None for v in ious):
        ax2 = ax.twinx()
        ax2.plot(fractions, [v if v is not None else np.nan for v in ious],
                 "s--", color="tab:red", label="IoU")
        ax2.set_ylabel("IoU", color="tab:red")
        ax2.set_ylim(0.0, 1.0)
        ax2.tick_params(axis="y", labelcolor="tab:red")
        if best_index is not None:
            ax2.annotate(
                "best",
                xy=(fractions[best_index], ious[best_index]),
                xytext=(0, 12),
                textcoords="offset points",
                ha="center",
                color="tab:red",
            )
    ax.set_title("threshold sweep")
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)


def localization_figure(
    image: np.ndarray,
    saliency: np.ndarray,
    report: LocalizationReport,
    annotated: np.ndarray,
    path,
    gt: BBox | None = None,
) -> None:
    """Four-panel walkthrough: input, saliency, mask, annotated overlay."""
    fig, axes = plt.subplots(1, 4, figsize=(10.0, 2.9))
    axes[0].imshow(image, cmap="gray", vmin=0.0, vmax=1.0)
    axes[0].set_title("input")
    axes[1].imshow(saliency, cmap="jet", vmin=0.0, vmax=1.0)
    axes[1].set_title("saliency")
    axes[2].imshow(report.mask, cmap="gray", vmin=0, vmax=1)
    axes[2].set_title(f"mask @ {report.threshold_fraction:g}")
    axes[3].imshow(annotated)
    title = "box"
    if report.iou is not None:
        title = f"box (IoU {report.iou:.2f})"
    axes[3].set_title(title)
    if gt is not None:
        width = gt.col_max - gt.col_min + 1
        height = gt.row_max - gt.row_min + 1
        axes[3].add_patch(
            plt.Rectangle((gt.col_min - 0.5, gt.row_min - 0.5), width, height,
                          fill=False, edgecolor="white", linestyle="--", linewidth=1.0)
        )
    for ax in axes:
        ax.set_xticks([])
        ax.set_yticks([])
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)
