"""Helpers shared by the engine test modules."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from sarcam import FeatureBundle

FIXTURES = Path(__file__).parent / "fixtures"


def random_bundle(rng: np.random.Generator, n: int = 32, g: int = 8, k: int = 8,
                  zero_grads: bool = False) -> FeatureBundle:
    """In-memory bundle with uniform image and gaussian features/grads."""
    grads = np.zeros((k, g, g), dtype=np.float32) if zero_grads \
        else rng.standard_normal((k, g, g)).astype(np.float32)
    return FeatureBundle(
        image=rng.random((n, n), dtype=np.float32),
        features=rng.standard_normal((k, g, g)).astype(np.float32),
        grads=grads,
        class_id=int(rng.integers(0, 10)),
        layer_name="layer4",
        model_name="resnet50",
    )
