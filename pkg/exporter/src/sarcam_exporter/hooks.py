"""Single-pass activation and gradient capture from a trained CNN.

One export is one forward pass plus one backward pass. A forward hook on
the named layer keeps that layer's output tensor; backpropagating the
pre-softmax score of the target class (the logit, not the probability)
fills in the gradient of that score with respect to the captured
activation. Both stacks land on disk in the bundle directory layout that
the downstream saliency engine consumes.

The exporter deliberately does no resampling and no value normalization:
image samples are only rescaled by their format's sample depth (8-bit PNG
by 255, 16-bit by 65535) and tensors are dumped exactly as the network
produced them. All grid alignment and range shaping belongs downstream.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch
from PIL import Image, UnidentifiedImageError
from torch import nn

from .bundle_writer import write_bundle
from .errors import (
    BadShape,
    CheckpointLoadError,
    ExporterError,
    ImageLoadError,
    LayerNotFound,
)

__all__ = ["ExportRequest", "export_bundle", "load_model", "load_image_gray"]


@dataclass
class ExportRequest:
    """Everything one export needs.

    ``class_id`` of None means "explain the predicted class": the argmax
    of the logit vector is used and recorded in the manifest.
    """

    checkpoint: str | Path
    layer: str
    image: str | Path
    out_dir: str | Path
    class_id: int | None = None


def load_model(path: str | Path) -> nn.Module:
    """Load a serialized torch module from ``path``.

    Accepts a checkpoint holding either the module itself or a dict with
    the module under the "model" key. Anything else, or any deserializer
    failure, raises CheckpointLoadError. Checkpoints are trusted local
    files; they are unpickled with full code loading enabled.
    """
    path = Path(path)
    if not path.is_file():
        raise CheckpointLoadError(f"no such checkpoint file: {path}")
    try:
        obj = torch.load(path, map_location="cpu", weights_only=False)
    except Exception as exc:
        raise CheckpointLoadError(f"cannot load checkpoint {path}: {exc}") from exc
    if isinstance(obj, nn.Module):
        model = obj
    elif isinstance(obj, dict) and isinstance(obj.get("model"), nn.Module):
        model = obj["model"]
    else:
        raise CheckpointLoadError(
            f"checkpoint {path} holds {type(obj).__name__}, expected a torch module "
            "(or a dict with one under the 'model' key)"
        )
    model.eval()
    return model


def load_image_gray(path: str | Path) -> np.ndarray:
    """Load a square grayscale intensity grid as float32.

    PNG integer samples are divided by their sample-depth maximum (255 or
    65535); RGB collapses to one channel by the arithmetic mean. NPY files
    must hold a 2-D float or 8/16-bit unsigned integer array. Non-square
    images are rejected because the bundle format requires N x N.
    """
    path = Path(path)
    if not path.is_file():
        raise ImageLoadError(f"no such image file: {path}")

    if path.suffix.lower() == ".npy":
        try:
            arr = np.load(path, allow_pickle=False)
        except (ValueError, OSError) as exc:
            raise ImageLoadError(f"{path.name} is not a readable NPY file ({exc})") from exc
        if arr.ndim != 2:
            raise ImageLoadError(f"expected a 2-D image array, got shape {arr.shape}")
        if arr.dtype == np.uint8:
            gray = (arr.astype(np.float64) / 255.0).astype(np.float32)
        elif arr.dtype == np.uint16:
            gray = (arr.astype(np.float64) / 65535.0).astype(np.float32)
        elif np.issubdtype(arr.dtype, np.floating):
            gray = arr.astype(np.float32)
        else:
            raise ImageLoadError(f"unsupported NPY image dtype {arr.dtype}")
    else:
        try:
            with Image.open(path) as img:
                img.load()
                mode = img.mode
                if mode == "L":
                    gray = (np.asarray(img, dtype=np.float64) / 255.0).astype(np.float32)
                elif mode in ("I", "I;16"):
                    gray = (np.asarray(img, dtype=np.float64) / 65535.0).astype(np.float32)
                elif mode == "RGB":
                    rgb = np.asarray(img, dtype=np.float64)
                    gray = (rgb.mean(axis=2) / 255.0).astype(np.float32)
                else:
                    raise ImageLoadError(f"unsupported image mode {mode!r} in {path.name}")
        except UnidentifiedImageError as exc:
            raise ImageLoadError(f"{path.name} is not a PNG or NPY file") from exc

    if gray.shape[0] != gray.shape[1]:
        raise BadShape(f"image must be square, got shape {gray.shape}")
    return gray


def _input_channels(model: nn.Module) -> int:
    """Channel count the model's first convolution expects (1 if none)."""
    for module in model.modules():
        if isinstance(module, nn.Conv2d):
            return module.in_channels
    return 1


def export_bundle(req: ExportRequest) -> Path:
    """Run one forward+backward pass and write the activation bundle.

    The named layer's output A is captured during the forward pass; the
    backward pass from the pre-softmax class score y fills dy/dA. The
    bundle records the full logit vector and the explained class id. If a
    module executes more than once per forward (a shared block), the last
    execution's activation is the one exported.

    Returns the bundle directory path.
    """
    model = load_model(req.checkpoint)
    modules = dict(model.named_modules())
    modules.pop("", None)
    if req.layer not in modules:
        available = ", ".join(sorted(modules))
        raise LayerNotFound(f"layer {req.layer!r} not in model; available layers: {available}")
    target = modules[req.layer]

    gray = load_image_gray(req.image)
    n = gray.shape[0]
    x = torch.from_numpy(np.ascontiguousarray(gray, dtype=np.float32))
    x = x[None, None].repeat(1, _input_channels(model), 1, 1)
    x.requires_grad_(True)

    captured: list[torch.Tensor] = []

    def grab(_module: nn.Module, _inputs: tuple, output: object) -> None:
        if not isinstance(output, torch.Tensor):
            raise BadShape(
                f"layer {req.layer!r} produced {type(output).__name__}, expected one tensor"
            )
        output.retain_grad()
        captured.append(output)

    handle = target.register_forward_hook(grab)
    try:
        with torch.enable_grad():
            logits = model(x)
    finally:
        handle.remove()

    if not captured:
        raise LayerNotFound(f"layer {req.layer!r} was never executed by the forward pass")
    activation = captured[-1]
    if activation.ndim != 4 or activation.shape[0] != 1:
        raise BadShape(
            f"layer {req.layer!r} output has shape {tuple(activation.shape)}, "
            "expected (1, channels, side, side)"
        )
    if activation.shape[2] != activation.shape[3]:
        raise BadShape(
            f"layer {req.layer!r} produced a non-square grid {tuple(activation.shape[2:])}"
        )
    if activation.shape[2] > n:
        raise BadShape(
            f"feature grid side {activation.shape[2]} exceeds image side {n}; "
            "pick a deeper layer"
        )

    if logits.ndim != 2 or logits.shape[0] != 1 or logits.shape[1] < 1:
        raise ExporterError(
            f"model output has shape {tuple(logits.shape)}, expected (1, classes)"
        )
    logit_row = logits[0]
    class_count = logit_row.shape[0]
    class_id = int(torch.argmax(logit_row).item()) if req.class_id is None else req.class_id
    if not 0 <= class_id < class_count:
        raise ExporterError(f"class id {class_id} out of range for {class_count} logits")

    score = logit_row[class_id]
    model.zero_grad(set_to_none=True)
    score.backward()
    if activation.grad is None:
        raise ExporterError(
            f"layer {req.layer!r} received no gradient from the class score; "
            "it is not on the path to the model output"
        )

    features = activation.detach()[0].cpu().numpy()
    grads = activation.grad[0].cpu().numpy()
    return write_bundle(
        req.out_dir,
        image=gray,
        features=features,
        grads=grads,
        model_name=type(model).__name__,
        layer_name=req.layer,
        class_id=class_id,
        logits=[float(v) for v in logit_row.detach().cpu().tolist()],
    )
