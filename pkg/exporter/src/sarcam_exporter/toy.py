"""A small two-convolution CNN for demo exports and gradient checks.

The network is deliberately tiny so a forward pass takes milliseconds and
finite-difference probing of its gradients is cheap::

    conv1 (1 -> 16, 3x3) -> relu -> avgpool(4) -> conv2 (16 -> K, 3x3)
        -> relu -> global average pool -> linear head (K -> classes)

Hooking ``conv2`` on a square side-N grayscale input captures a
(K, N // 4, N // 4) feature stack, e.g. an 8x8 grid for a 32x32 image.

Weights are drawn from a named numpy generator rather than torch's global
RNG so the same seed rebuilds bit-identical parameters on any platform.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
import torch
from torch import nn

__all__ = ["TinyConvNet", "build_toy_model", "save_toy_checkpoint"]


class TinyConvNet(nn.Module):
    """Two-conv classifier producing one logit vector per image."""

    def __init__(self, channels: int = 8, classes: int = 4):
        super().__init__()
        self.conv1 = nn.Conv2d(1, 16, kernel_size=3, padding=1)
        self.pool = nn.AvgPool2d(4)
        self.conv2 = nn.Conv2d(16, channels, kernel_size=3, padding=1)
        self.act = nn.ReLU()
        self.head = nn.Linear(channels, classes)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        h = self.act(self.conv1(x))
        h = self.pool(h)
        h = self.act(self.conv2(h))
        return self.head(h.mean(dim=(2, 3)))


def build_toy_model(seed: int = 0, channels: int = 8, classes: int = 4) -> TinyConvNet:
    """Build the toy network with deterministic weights for ``seed``."""
    rng = np.random.default_rng(seed)
    model = TinyConvNet(channels=channels, classes=classes)
    with torch.no_grad():
        for param in model.parameters():
            values = rng.normal(0.0, 0.25, size=tuple(param.shape))
            param.copy_(torch.from_numpy(values).to(param.dtype))
    model.eval()
    return model


def save_toy_checkpoint(
    path: str | Path, seed: int = 0, channels: int = 8, classes: int = 4
) -> Path:
    """Serialize a freshly built toy model as a full-module checkpoint."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    torch.save(build_toy_model(seed=seed, channels=channels, classes=classes), path)
    return path
