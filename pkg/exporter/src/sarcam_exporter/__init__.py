"""Activation exporter: turn a trained CNN plus one image into an
activation bundle (image, features, gradients, manifest) for the
downstream saliency engine, or generate synthetic bundles with known
geometry for testing. The two artifacts share only the on-disk bundle
format; this package never imports the engine."""

from .bundle_writer import MANIFEST_NAME, SCHEMA_VERSION, write_bundle
from .errors import (
    BadShape,
    CheckpointLoadError,
    ExporterError,
    ImageLoadError,
    LayerNotFound,
)
from .fixtures import GT_NAME, Pattern, make_fixture
from .hooks import ExportRequest, export_bundle, load_image_gray, load_model
from .toy import TinyConvNet, build_toy_model, save_toy_checkpoint

__version__ = "0.1.0"

__all__ = [
    "BadShape",
    "CheckpointLoadError",
    "ExportRequest",
    "ExporterError",
    "GT_NAME",
    "ImageLoadError",
    "LayerNotFound",
    "MANIFEST_NAME",
    "Pattern",
    "SCHEMA_VERSION",
    "TinyConvNet",
    "build_toy_model",
    "export_bundle",
    "load_image_gray",
    "load_model",
    "make_fixture",
    "save_toy_checkpoint",
    "write_bundle",
    "__version__",
]
