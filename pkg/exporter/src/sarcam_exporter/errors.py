"""Error taxonomy for the activation exporter.

Every failure the exporter can signal derives from ExporterError so callers
(and the CLI) can catch one type. Subclasses name the failing stage.
"""

from __future__ import annotations

__all__ = [
    "ExporterError",
    "CheckpointLoadError",
    "LayerNotFound",
    "ImageLoadError",
    "BadShape",
]


class ExporterError(Exception):
    """Base class for every exporter failure."""


class CheckpointLoadError(ExporterError):
    """Checkpoint file is missing, unreadable, or holds no torch module."""


class LayerNotFound(ExporterError):
    """Requested layer name is not a module of the loaded model.

    The message lists the available layer names so the caller can pick one
    without opening the checkpoint in a debugger.
    """


class ImageLoadError(ExporterError):
    """Input image is missing or in a format the exporter cannot read."""


class BadShape(ExporterError):
    """Geometry violates the bundle contract (image side < grid side,
    non-square grids, empty channel axis, or infeasible fixture layout)."""
