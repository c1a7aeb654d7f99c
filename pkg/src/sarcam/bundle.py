"""Activation-bundle I/O.

A bundle is a directory holding one explanation request: the input image,
the feature stack of a chosen network layer, the matching gradient stack
for one class, and a manifest tying them together. Tensor payloads are NPY
v1.0 files, little-endian float32, C-order, so they can be produced and
consumed bit-exactly by any ecosystem with an NPY writer.

Directory layout::

    <bundle>/
        manifest.json
        image.npy | image.png
        features.npy        # (channels, grid_size, grid_size)
        grads.npy           # same shape as features, signed

The manifest key set is fixed; unknown keys are rejected so that format
drift is caught at the boundary rather than deep in the pipeline.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import (
    InvalidManifest,
    IoFailure,
    MissingFile,
    NonFiniteValue,
    ShapeMismatch,
    UnsupportedDType,
    UnsupportedFormat,
)

__all__ = ["FeatureBundle", "load_bundle", "save_bundle", "load_image", "MANIFEST_NAME"]

MANIFEST_NAME = "manifest.json"
SCHEMA_VERSION = 1

_REQUIRED_KEYS = {
    "schema_version": int,
    "model": str,
    "layer": str,
    "class_id": int,
    "image_file": str,
    "features_file": str,
    "grads_file": str,
    "image_size": int,
    "grid_size": int,
    "channels": int,
}
_OPTIONAL_KEYS = {"class_name": str, "logits": list}


@dataclass
class FeatureBundle:
    """One explanation request: image + feature stack + gradient stack.

    ``features`` and ``grads`` are (K, G, G) float32 arrays; ``image`` is
    (N, N) float32 with N >= G. Gradients may be negative; everything must
    be finite.
    """

    image: np.ndarray
    features: np.ndarray
    grads: np.ndarray
    class_id: int
    layer_name: str
    model_name: str
    class_name: str | None = None
    logits: list[float] | None = None

    @property
    def image_side(self) -> int:
        return self.image.shape[0]

    @property
    def grid_side(self) -> int:
        return self.features.shape[-1]

    @property
    def channels(self) -> int:
        return self.features.shape[0]

    def validate(self) -> None:
        """Check every structural invariant; raises a BundleError subclass."""
        if self.image.ndim != 2 or self.image.shape[0] != self.image.shape[1]:
            raise ShapeMismatch(f"image: expected a square 2-D grid, got shape {self.image.shape}")
        if self.features.ndim != 3 or self.features.shape[-1] != self.features.shape[-2]:
            raise ShapeMismatch(
                f"features: expected shape (channels, side, side), got {self.features.shape}"
            )
        if self.features.shape != self.grads.shape:
            raise ShapeMismatch(
                f"features vs grads: shapes differ, {self.features.shape} vs {self.grads.shape}"
            )
        if self.image.shape[0] < self.features.shape[-1]:
            raise ShapeMismatch(
                f"image: side {self.image.shape[0]} is smaller than feature grid side "
                f"{self.features.shape[-1]}"
            )
        if self.features.shape[0] < 1:
            raise ShapeMismatch("features: channel count must be >= 1")
        if self.class_id < 0:
            raise InvalidManifest(f"class_id: must be >= 0, got {self.class_id}")
        for key, arr in (("image", self.image), ("features", self.features), ("grads", self.grads)):
            if not np.isfinite(arr).all():
                raise NonFiniteValue(f"{key}: contains NaN or Inf")
        if self.logits is not None and not all(np.isfinite(v) for v in self.logits):
            raise NonFiniteValue("logits: contains NaN or Inf")


def _load_npy(path: Path, key: str) -> np.ndarray:
    try:
        arr = np.load(path, allow_pickle=False)
    except (ValueError, OSError) as exc:
        raise UnsupportedDType(f"{key}: {path.name} is not a readable NPY file ({exc})") from exc
    if not isinstance(arr, np.ndarray) or arr.dtype != np.dtype("<f4"):
        raise UnsupportedDType(
            f"{key}: expected little-endian float32 NPY payload, got dtype {getattr(arr, 'dtype', type(arr))}"
        )
    if not arr.flags["C_CONTIGUOUS"]:
        raise UnsupportedDType(f"{key}: NPY payload must be C-order")
    return arr


def load_image(path: str | Path) -> np.ndarray:
    """Load a grayscale intensity grid from a PNG or an NPY tensor file.

    PNG integer samples are divided by their maximum sample value (255 for
    8-bit, 65535 for 16-bit); RGB collapses to one channel by the plain
    arithmetic mean. NPY files must hold a 2-D float or 8/16-bit unsigned
    integer array.
    """
    path = Path(path)
    if not path.is_file():
        raise MissingFile(f"image: no such file {path}")
    if path.suffix.lower() == ".npy":
        try:
            arr = np.load(path, allow_pickle=False)
        except (ValueError, OSError) as exc:
            raise UnsupportedFormat(f"image: {path.name} is not a readable NPY file ({exc})") from exc
        if arr.ndim != 2:
            raise UnsupportedFormat(f"image: expected a 2-D array, got shape {arr.shape}")
        if arr.dtype == np.uint8:
            return (arr.astype(np.float64) / 255.0).astype(np.float32)
        if arr.dtype == np.uint16:
            return (arr.astype(np.float64) / 65535.0).astype(np.float32)
        if np.issubdtype(arr.dtype, np.floating):
            return arr.astype(np.float32)
        raise UnsupportedFormat(f"image: unsupported NPY dtype {arr.dtype}")

    try:
        with Image.open(path) as img:
            img.load()
            mode = img.mode
            if mode == "L":
                return (np.asarray(img, dtype=np.float64) / 255.0).astype(np.float32)
            if mode in ("I", "I;16"):
                return (np.asarray(img, dtype=np.float64) / 65535.0).astype(np.float32)
            if mode == "RGB":
                rgb = np.asarray(img, dtype=np.float64)
                return (rgb.mean(axis=2) / 255.0).astype(np.float32)
            raise UnsupportedFormat(f"image: unsupported PNG mode {mode!r} in {path.name}")
    except UnidentifiedImageError as exc:
        raise UnsupportedFormat(f"image: {path.name} is not a PNG or NPY file") from exc


def _read_manifest(bundle_dir: Path) -> dict:
    manifest_path = bundle_dir / MANIFEST_NAME
    if not manifest_path.is_file():
        raise MissingFile(f"manifest: no {MANIFEST_NAME} in {bundle_dir}")
    try:
        manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise InvalidManifest(f"manifest: {MANIFEST_NAME} is not valid UTF-8 JSON ({exc})") from exc
    if not isinstance(manifest, dict):
        raise InvalidManifest("manifest: top-level value must be a JSON object")

    for key, typ in _REQUIRED_KEYS.items():
        if key not in manifest:
            raise InvalidManifest(f"manifest: missing required key {key!r}")
        if not isinstance(manifest[key], typ) or isinstance(manifest[key], bool):
            raise InvalidManifest(
                f"manifest: key {key!r} must be {typ.__name__}, got {type(manifest[key]).__name__}"
            )
    for key in manifest:
        if key not in _REQUIRED_KEYS and key not in _OPTIONAL_KEYS:
            raise InvalidManifest(f"manifest: unexpected key {key!r}")
    for key, typ in _OPTIONAL_KEYS.items():
        if key in manifest and not isinstance(manifest[key], typ):
            raise InvalidManifest(f"manifest: key {key!r} must be {typ.__name__}")
    if manifest["schema_version"] != SCHEMA_VERSION:
        raise InvalidManifest(
            f"manifest: schema_version {manifest['schema_version']} is not supported "
            f"(expected {SCHEMA_VERSION})"
        )
    if "logits" in manifest and not all(isinstance(v, (int, float)) for v in manifest["logits"]):
        raise InvalidManifest("manifest: logits must be a list of numbers")
    return manifest


def load_bundle(path: str | Path) -> FeatureBundle:
    """Load and fully validate a bundle directory.

    Either returns a bundle with every invariant checked or raises one of
    MissingFile / InvalidManifest / ShapeMismatch / NonFiniteValue /
    UnsupportedDType naming the offending key; never a partially built
    bundle.
    """
    bundle_dir = Path(path)
    if not bundle_dir.is_dir():
        raise MissingFile(f"bundle: no such directory {bundle_dir}")
    manifest = _read_manifest(bundle_dir)

    def resolve(key: str) -> Path:
        file_path = bundle_dir / manifest[key]
        if not file_path.is_file():
            raise MissingFile(f"{key}: no such file {file_path}")
        return file_path

    image_path = resolve("image_file")
    if image_path.suffix.lower() == ".npy":
        image = _load_npy(image_path, "image_file")
    else:
        image = load_image(image_path)
    features = _load_npy(resolve("features_file"), "features_file")
    grads = _load_npy(resolve("grads_file"), "grads_file")

    n = manifest["image_size"]
    g = manifest["grid_size"]
    k = manifest["channels"]
    if image.shape != (n, n):
        raise ShapeMismatch(f"image_file: shape {image.shape} does not match manifest image_size {n}")
    if features.shape != (k, g, g):
        raise ShapeMismatch(
            f"features_file: shape {features.shape} does not match manifest (channels, grid_size) "
            f"= ({k}, {g}, {g})"
        )
    if grads.shape != (k, g, g):
        raise ShapeMismatch(
            f"grads_file: shape {grads.shape} does not match manifest (channels, grid_size) "
            f"= ({k}, {g}, {g})"
        )

    bundle = FeatureBundle(
        image=image,
        features=features,
        grads=grads,
        class_id=manifest["class_id"],
        layer_name=manifest["layer"],
        model_name=manifest["model"],
        class_name=manifest.get("class_name"),
        logits=list(manifest["logits"]) if "logits" in manifest else None,
    )
    bundle.validate()
    return bundle


def save_bundle(bundle: FeatureBundle, path: str | Path) -> None:
    """Write a bundle directory; load_bundle(save_bundle(b)) is bit-exact.

    Tensors are written as NPY v1.0 little-endian float32 C-order. The
    image is always materialized as image.npy regardless of how the bundle
    was originally loaded.
    """
    bundle.validate()
    bundle_dir = Path(path)
    manifest: dict = {
        "schema_version": SCHEMA_VERSION,
        "model": bundle.model_name,
        "layer": bundle.layer_name,
        "class_id": bundle.class_id,
        "image_file": "image.npy",
        "features_file": "features.npy",
        "grads_file": "grads.npy",
        "image_size": bundle.image_side,
        "grid_size": bundle.grid_side,
        "channels": bundle.channels,
    }
    if bundle.class_name is not None:
        manifest["class_name"] = bundle.class_name
    if bundle.logits is not None:
        manifest["logits"] = [float(v) for v in bundle.logits]

    try:
        bundle_dir.mkdir(parents=True, exist_ok=True)
        for name, arr in (
            ("image.npy", bundle.image),
            ("features.npy", bundle.features),
            ("grads.npy", bundle.grads),
        ):
            np.save(bundle_dir / name, np.ascontiguousarray(arr, dtype="<f4"))
        tmp = json.dumps(manifest, indent=2, sort_keys=True) + "\n"
        (bundle_dir / MANIFEST_NAME).write_text(tmp, encoding="utf-8")
    except OSError as exc:
        raise IoFailure(f"bundle: cannot write to {bundle_dir} ({exc})") from exc


def describe_bundle(path: str | Path) -> str:
    """Human-readable shape/dtype summary used by the validate command."""
    bundle = load_bundle(path)
    lines = [
        f"bundle: {Path(path).name}",
        f"model: {bundle.model_name}  layer: {bundle.layer_name}  class_id: {bundle.class_id}",
        f"image: ({bundle.image_side}, {bundle.image_side}) float32",
        f"features: ({bundle.channels}, {bundle.grid_side}, {bundle.grid_side}) float32",
        f"grads: ({bundle.channels}, {bundle.grid_side}, {bundle.grid_side}) float32",
    ]
    if bundle.logits is not None:
        lines.append(f"logits: {len(bundle.logits)} values")
    return "\n".join(lines)
