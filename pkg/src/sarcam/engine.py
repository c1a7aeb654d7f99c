"""Saliency-map computation.

The flagship method combines two weightings of a layer's feature stack:

* element weights: per-cell ReLU of the class gradient, damping spatial
  positions whose gradient points away from the class;
* channel weights: one scalar per channel (globally average-pooled
  gradients by default) applied when the stack is fused.

Between the two, each weighted channel is matched against the input: both
are resampled to a shared intermediate side M (between the feature grid
side G and the image side N), min-max rescaled, and multiplied, so the
saliency inherits the image's own energy structure. The fused map is the
channel-weighted sum, ReLU, then min-max rescale, at image resolution.

Also provides the classic baselines (Grad-CAM, Grad-CAM++, Layer-CAM) and
the matching-only preset (uniform channel weights, no element weights).

All methods are pure functions of the bundle: two runs over the same
inputs are bit-identical, and permuting channels of features and grads
together leaves results unchanged (the cross-channel sum canonicalizes
per-pixel term order before reducing).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .bundle import FeatureBundle
from .errors import BadIntermediateSize, ShapeMismatch
from .gridops import normalize_minmax, relu_grid, resize_bilinear

__all__ = [
    "Method",
    "ChannelStrategy",
    "CamConfig",
    "auto_intermediate_side",
    "element_weights",
    "apply_element_weights",
    "channel_weights_gradcam",
    "channel_weights_gradcampp",
    "uniform_channel_weights",
    "self_match",
    "fuse",
    "compute_cam",
]

# Grad-CAM++ cell weights are zeroed where the closed-form denominator is
# smaller than this, to avoid division blowups.
GRADCAMPP_DENOM_EPS = 1e-8


class Method(str, Enum):
    MS_CAM = "ms-cam"
    GRAD_CAM = "grad-cam"
    GRAD_CAM_PP = "grad-cam-pp"
    LAYER_CAM = "layer-cam"
    SELF_MATCHING_CAM = "self-matching-cam"


class ChannelStrategy(str, Enum):
    GRADCAM_GAP = "gradcam-gap"
    GRADCAMPP = "gradcampp"
    UNIFORM = "uniform"


@dataclass
class CamConfig:
    """Method selection and strategy knobs.

    ``intermediate_side=None`` means AUTO: the geometric mean of the grid
    and image sides, rounded half-up and clamped into [G, N]. An explicit
    value must already lie in that interval.
    """

    method: Method = Method.MS_CAM
    intermediate_side: int | None = None
    channel_strategy: ChannelStrategy = ChannelStrategy.GRADCAM_GAP
    channel_subset: list[int] | None = None


def auto_intermediate_side(grid_side: int, image_side: int) -> int:
    """Geometric-mean intermediate side, round-half-up, clamped to [G, N]."""
    m = int(math.floor(math.sqrt(grid_side * image_side) + 0.5))
    return min(max(m, grid_side), image_side)


def element_weights(grads: np.ndarray) -> np.ndarray:
    """Per-cell weights: ReLU of the gradient stack, channel by channel."""
    return relu_grid(grads)


def apply_element_weights(features: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """Hadamard-weight each feature channel; shape is preserved."""
    features = np.asarray(features)
    weights = np.asarray(weights)
    if features.shape != weights.shape:
        raise ShapeMismatch(
            f"element weights: shape {weights.shape} does not match features {features.shape}"
        )
    return (features * weights).astype(np.float32)


def channel_weights_gradcam(grads: np.ndarray) -> np.ndarray:
    """One weight per channel: the spatial mean of that channel's gradient."""
    return np.asarray(grads).mean(axis=(1, 2), dtype=np.float64)


def channel_weights_gradcampp(features: np.ndarray, grads: np.ndarray) -> np.ndarray:
    """Closed-form higher-order channel weights.

    Per cell, alpha = g^2 / (2 g^2 + sum_over_channel(A * g^3)), taken as 0
    where the denominator magnitude is below GRADCAMPP_DENOM_EPS; the
    channel weight is sum(alpha * ReLU(g)). Not homogeneous in the
    gradient scale, unlike the plain pooled weights.
    """
    features = np.asarray(features)
    grads = np.asarray(grads)
    if features.shape != grads.shape:
        raise ShapeMismatch(
            f"grad-cam++ weights: features {features.shape} vs grads {grads.shape}"
        )
    g = grads.astype(np.float64)
    g2 = g * g
    g3 = g2 * g
    denom = 2.0 * g2 + (features.astype(np.float64) * g3).sum(axis=(1, 2), keepdims=True)
    small = np.abs(denom) < GRADCAMPP_DENOM_EPS
    alpha = np.where(small, 0.0, g2 / np.where(small, 1.0, denom))
    return (alpha * np.maximum(g, 0.0)).sum(axis=(1, 2))


def uniform_channel_weights(channels: int, subset: list[int] | None = None) -> np.ndarray:
    """Weight 1.0 on each selected channel, 0.0 elsewhere (default: all)."""
    weights = np.ones(channels, dtype=np.float64)
    return _mask_subset(weights, subset, channels)


def _mask_subset(weights: np.ndarray, subset: list[int] | None, channels: int) -> np.ndarray:
    if subset is None:
        return weights
    if len(subset) == 0:
        raise ValueError("channel_subset: must not be empty")
    mask = np.zeros(channels, dtype=bool)
    for idx in subset:
        if not 0 <= idx < channels:
            raise ValueError(f"channel_subset: index {idx} out of range for {channels} channels")
        mask[idx] = True
    return np.where(mask, weights, 0.0)


def self_match(image: np.ndarray, weighted: np.ndarray, intermediate_side: int) -> np.ndarray:
    """Match each weighted channel against the input at a shared side M.

    The image is resampled down to M x M and rescaled; each channel is
    resampled up to M x M and rescaled independently; the pair is then
    multiplied. Zero regions of the rescaled image annihilate every
    channel there.
    """
    image = np.asarray(image)
    weighted = np.asarray(weighted)
    grid_side = weighted.shape[-1]
    image_side = image.shape[0]
    if not grid_side <= intermediate_side <= image_side:
        raise BadIntermediateSize(
            f"intermediate side {intermediate_side} outside [{grid_side}, {image_side}]"
        )
    image_m = normalize_minmax(resize_bilinear(image, intermediate_side))
    matched = np.empty((weighted.shape[0], intermediate_side, intermediate_side), dtype=np.float32)
    for k in range(weighted.shape[0]):
        channel_m = normalize_minmax(resize_bilinear(weighted[k], intermediate_side))
        matched[k] = image_m * channel_m
    return matched


def _weighted_channel_sum(stack_f64: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """Sum weights[k] * stack[k] with a canonical per-pixel term order.

    Terms are sorted before the reduction so the result depends only on
    the multiset of products, making identical channel permutations of the
    inputs bit-exact no-ops.
    """
    products = stack_f64 * np.asarray(weights, dtype=np.float64)[:, None, None]
    products.sort(axis=0)
    return products.sum(axis=0)


def fuse(matched: np.ndarray, weights: np.ndarray, out_side: int) -> np.ndarray:
    """Channel-weighted fusion to the output side.

    Each matched channel is resampled to out_side, weighted, summed across
    channels, ReLU'd, then min-max rescaled into [0, 1].
    """
    matched = np.asarray(matched)
    weights = np.asarray(weights, dtype=np.float64)
    if matched.ndim != 3:
        raise ShapeMismatch(f"fuse: expected a (channels, side, side) stack, got {matched.shape}")
    if weights.shape != (matched.shape[0],):
        raise ShapeMismatch(
            f"fuse: {matched.shape[0]} channels but {weights.shape} channel weights"
        )
    up = np.empty((matched.shape[0], out_side, out_side), dtype=np.float64)
    for k in range(matched.shape[0]):
        up[k] = resize_bilinear(matched[k], out_side).astype(np.float64)
    summed = _weighted_channel_sum(up, weights)
    return normalize_minmax(np.maximum(summed, 0.0))


def _resolve_channel_weights(bundle: FeatureBundle, config: CamConfig) -> np.ndarray:
    if config.channel_strategy is ChannelStrategy.GRADCAM_GAP:
        weights = channel_weights_gradcam(bundle.grads)
    elif config.channel_strategy is ChannelStrategy.GRADCAMPP:
        weights = channel_weights_gradcampp(bundle.features, bundle.grads)
    else:
        weights = np.ones(bundle.channels, dtype=np.float64)
    return _mask_subset(weights, config.channel_subset, bundle.channels)


def _resolve_intermediate(bundle: FeatureBundle, config: CamConfig) -> int:
    if config.intermediate_side is None:
        return auto_intermediate_side(bundle.grid_side, bundle.image_side)
    m = int(config.intermediate_side)
    if not bundle.grid_side <= m <= bundle.image_side:
        raise BadIntermediateSize(
            f"intermediate side {m} outside [{bundle.grid_side}, {bundle.image_side}]"
        )
    return m


def _grad_cam_style(bundle: FeatureBundle, weights: np.ndarray) -> np.ndarray:
    """Weighted feature sum at grid resolution, ReLU, rescale, then upsample."""
    summed = _weighted_channel_sum(bundle.features.astype(np.float64), weights)
    cam = normalize_minmax(np.maximum(summed, 0.0))
    return resize_bilinear(cam, bundle.image_side)


def compute_cam(bundle: FeatureBundle, config: CamConfig | None = None) -> np.ndarray:
    """Compute the saliency map selected by ``config.method``.

    Returns an (N, N) float32 grid with every value in [0, 1], N being the
    bundle's image side. Deterministic: equal inputs give bit-identical
    maps.
    """
    config = config or CamConfig()
    method = Method(config.method)

    if method is Method.MS_CAM:
        weighted = apply_element_weights(bundle.features, element_weights(bundle.grads))
        matched = self_match(bundle.image, weighted, _resolve_intermediate(bundle, config))
        return fuse(matched, _resolve_channel_weights(bundle, config), bundle.image_side)

    if method is Method.SELF_MATCHING_CAM:
        # Matching-only preset: element weights forced to ones, uniform
        # channel weights over the configured subset. Gradients never
        # enter this path.
        matched = self_match(bundle.image, bundle.features, _resolve_intermediate(bundle, config))
        weights = uniform_channel_weights(bundle.channels, config.channel_subset)
        return fuse(matched, weights, bundle.image_side)

    if method is Method.GRAD_CAM:
        weights = _mask_subset(
            channel_weights_gradcam(bundle.grads), config.channel_subset, bundle.channels
        )
        return _grad_cam_style(bundle, weights)

    if method is Method.GRAD_CAM_PP:
        weights = _mask_subset(
            channel_weights_gradcampp(bundle.features, bundle.grads),
            config.channel_subset,
            bundle.channels,
        )
        return _grad_cam_style(bundle, weights)

    if method is Method.LAYER_CAM:
        # Per-cell gradient gating at grid resolution, summed across
        # channels, ReLU, upsample, then rescale.
        gated = bundle.features.astype(np.float64) * np.maximum(bundle.grads.astype(np.float64), 0.0)
        if config.channel_subset is not None:
            keep = _mask_subset(np.ones(bundle.channels, dtype=np.float64),
                                config.channel_subset, bundle.channels)
            gated = gated * keep[:, None, None]
        gated.sort(axis=0)
        summed = gated.sum(axis=0)
        up = resize_bilinear(np.maximum(summed, 0.0), bundle.image_side)
        return normalize_minmax(up)

    raise ValueError(f"unknown method {config.method!r}")
