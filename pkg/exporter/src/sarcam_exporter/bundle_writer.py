"""Writer for activation-bundle directories.

The downstream saliency engine consumes a directory of the form::

    <bundle>/
        manifest.json
        image.npy           # (N, N) float32
        features.npy        # (K, G, G) float32
        grads.npy           # (K, G, G) float32, signed

All tensors are NPY v1.0, little-endian float32, C-order. The manifest is a
flat JSON object with a fixed key set (schema_version 1); its consumer
rejects unknown keys, so this writer emits exactly the agreed fields and
nothing else. Output bytes are a pure function of the inputs: JSON keys are
sorted and NPY serialization is deterministic, so writing the same payload
twice yields identical files.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import BadShape

__all__ = ["write_bundle", "MANIFEST_NAME", "SCHEMA_VERSION"]

MANIFEST_NAME = "manifest.json"
SCHEMA_VERSION = 1


def _check_payload(image: np.ndarray, features: np.ndarray, grads: np.ndarray) -> None:
    if image.ndim != 2 or image.shape[0] != image.shape[1]:
        raise BadShape(f"image must be a square 2-D grid, got shape {image.shape}")
    if features.ndim != 3 or features.shape[-1] != features.shape[-2]:
        raise BadShape(f"features must have shape (channels, side, side), got {features.shape}")
    if features.shape != grads.shape:
        raise BadShape(f"features and grads shapes differ: {features.shape} vs {grads.shape}")
    if features.shape[0] < 1:
        raise BadShape("features must have at least one channel")
    if image.shape[0] < features.shape[-1]:
        raise BadShape(
            f"image side {image.shape[0]} is smaller than feature grid side {features.shape[-1]}"
        )
    for name, arr in (("image", image), ("features", features), ("grads", grads)):
        if not np.isfinite(arr).all():
            raise BadShape(f"{name} contains NaN or Inf")


def write_bundle(
    out_dir: str | Path,
    *,
    image: np.ndarray,
    features: np.ndarray,
    grads: np.ndarray,
    model_name: str,
    layer_name: str,
    class_id: int,
    class_name: str | None = None,
    logits: list[float] | None = None,
) -> Path:
    """Write one bundle directory and return its path.

    Tensors are cast to little-endian float32 C-order on the way out. The
    payload is validated first (square image, matching feature/gradient
    stacks, image side >= grid side, everything finite); violations raise
    BadShape and nothing is written.
    """
    image = np.asarray(image)
    features = np.asarray(features)
    grads = np.asarray(grads)
    _check_payload(image, features, grads)
    if class_id < 0:
        raise BadShape(f"class_id must be >= 0, got {class_id}")

    manifest: dict = {
        "schema_version": SCHEMA_VERSION,
        "model": str(model_name),
        "layer": str(layer_name),
        "class_id": int(class_id),
        "image_file": "image.npy",
        "features_file": "features.npy",
        "grads_file": "grads.npy",
        "image_size": int(image.shape[0]),
        "grid_size": int(features.shape[-1]),
        "channels": int(features.shape[0]),
    }
    if class_name is not None:
        manifest["class_name"] = str(class_name)
    if logits is not None:
        values = [float(v) for v in logits]
        if not all(np.isfinite(v) for v in values):
            raise BadShape("logits contain NaN or Inf")
        manifest["logits"] = values

    bundle_dir = Path(out_dir)
    bundle_dir.mkdir(parents=True, exist_ok=True)
    for name, arr in (("image.npy", image), ("features.npy", features), ("grads.npy", grads)):
        np.save(bundle_dir / name, np.ascontiguousarray(arr, dtype="<f4"))
    text = json.dumps(manifest, indent=2, sort_keys=True) + "\n"
    (bundle_dir / MANIFEST_NAME).write_text(text, encoding="utf-8")
    return bundle_dir
