"""Saliency maps from serialized CNN activations.

The package turns a feature bundle (input image, one convolutional
activation stack, and the matching class-score gradients) into a
class-discriminative saliency map, then localizes and renders it.
Five methods share one engine; the multi-stage variant re-weights each
activation channel by its rectified gradient, matches it against the
input at an intermediate resolution, and fuses the channels under
gradient-pooled weights.
"""

from .bundle import FeatureBundle, load_bundle, load_image, save_bundle
from .engine import (
    CamConfig,
    ChannelStrategy,
    Method,
    apply_element_weights,
    auto_intermediate_side,
    channel_weights_gradcam,
    channel_weights_gradcampp,
    compute_cam,
    element_weights,
    fuse,
    self_match,
    uniform_channel_weights,
)
from .errors import (
    BadFraction,
    BadIntermediateSize,
    BundleError,
    InvalidManifest,
    IoFailure,
    MissingFile,
    NonFiniteValue,
    OutOfBounds,
    SarcamError,
    ShapeMismatch,
    UnsupportedDType,
    UnsupportedFormat,
)
from .gridops import hadamard, normalize_minmax, relu_grid, resize_bilinear
from .localize import (
    DEFAULT_FRACTIONS,
    BBox,
    LocalizationReport,
    binarize,
    connected_components,
    iou,
    localize,
    sweep,
)
from .render import RenderSpec, colorize, draw_bbox, overlay, panel, save_png

__version__ = "0.1.0"

__all__ = [
    "BBox",
    "BadFraction",
    "BadIntermediateSize",
    "BundleError",
    "CamConfig",
    "ChannelStrategy",
    "DEFAULT_FRACTIONS",
    "FeatureBundle",
    "InvalidManifest",
    "IoFailure",
    "LocalizationReport",
    "Method",
    "MissingFile",
    "NonFiniteValue",
    "OutOfBounds",
    "RenderSpec",
    "SarcamError",
    "ShapeMismatch",
    "UnsupportedDType",
    "UnsupportedFormat",
    "apply_element_weights",
    "auto_intermediate_side",
    "binarize",
    "channel_weights_gradcam",
    "channel_weights_gradcampp",
    "colorize",
    "compute_cam",
    "connected_components",
    "draw_bbox",
    "element_weights",
    "fuse",
    "hadamard",
    "iou",
    "load_bundle",
    "load_image",
    "localize",
    "normalize_minmax",
    "overlay",
    "panel",
    "relu_grid",
    "resize_bilinear",
    "save_bundle",
    "save_png",
    "self_match",
    "sweep",
    "uniform_channel_weights",
]
