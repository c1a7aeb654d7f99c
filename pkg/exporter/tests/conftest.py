"""Shared exporter test fixtures.

The downstream engine is exercised only through its command line
(subprocess), never imported: the two packages share nothing but the
on-disk bundle format.
"""

from __future__ import annotations

import shutil
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest
from PIL import Image

from sarcam_exporter import save_toy_checkpoint


def _run_validate(bundle_dir: Path) -> subprocess.CompletedProcess:
    exe = shutil.which("sarcam")
    if exe:
        cmd = [exe, "validate", "--bundle", str(bundle_dir)]
    else:
        cmd = [sys.executable, "-m", "sarcam.cli", "validate", "--bundle", str(bundle_dir)]
    return subprocess.run(cmd, capture_output=True, text=True)


@pytest.fixture
def validate_bundle():
    """Callable running the consumer's validate command on a bundle dir."""
    return _run_validate


@pytest.fixture(scope="session")
def toy_checkpoint(tmp_path_factory) -> Path:
    """One seed-0 toy checkpoint shared by the whole session."""
    return save_toy_checkpoint(tmp_path_factory.mktemp("toy") / "toy.pt", seed=0)


@pytest.fixture(scope="session")
def square_png(tmp_path_factory) -> Path:
    """32x32 grayscale PNG: a bright center square on dim speckle."""
    rng = np.random.default_rng(5)
    img = 0.05 + 0.1 * rng.random((32, 32))
    img[12:20, 12:20] = 0.9
    path = tmp_path_factory.mktemp("img") / "square.png"
    Image.fromarray(np.clip(img * 255.0, 0, 255).astype(np.uint8)).save(path)
    return path
