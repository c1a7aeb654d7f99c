"""Synthetic fixture bundles: geometry by construction and determinism.

The 32-pixel / 8-cell layout used throughout maps grid cell c to the
pixel block [4c, 4c+4). The single blob occupies cells 3..4 (pixels
12..19 inclusive); the two-blob pattern puts the larger square on cells
1..3 (pixels 4..15) and the smaller on cells 5..6 (pixels 20..27).
"""

from __future__ import annotations

import json

import numpy as np
import pytest

from sarcam_exporter import GT_NAME, BadShape, Pattern, make_fixture

FILES = ("manifest.json", "image.npy", "features.npy", "grads.npy")


def test_repeat_invocation_is_byte_deterministic(tmp_path):
    a = make_fixture(7, 32, 8, 4, Pattern.BLOB, tmp_path / "a")
    b = make_fixture(7, 32, 8, 4, Pattern.BLOB, tmp_path / "b")
    for name in FILES + (GT_NAME,):
        assert (a / name).read_bytes() == (b / name).read_bytes(), name


def test_different_seeds_differ(tmp_path):
    a = make_fixture(7, 32, 8, 4, Pattern.BLOB, tmp_path / "a")
    b = make_fixture(8, 32, 8, 4, Pattern.BLOB, tmp_path / "b")
    assert (a / "features.npy").read_bytes() != (b / "features.npy").read_bytes()


def test_blob_ground_truth_box(tmp_path):
    out = make_fixture(7, 32, 8, 4, Pattern.BLOB, tmp_path / "b")
    gt = json.loads((out / GT_NAME).read_text())
    assert gt == {"row_min": 12, "col_min": 12, "row_max": 19, "col_max": 19}


def test_blob_image_bright_inside_dim_outside(tmp_path):
    out = make_fixture(7, 32, 8, 4, Pattern.BLOB, tmp_path / "b")
    image = np.load(out / "image.npy")
    inside = image[12:20, 12:20]
    outside = image.copy()
    outside[12:20, 12:20] = np.nan
    assert inside.min() > 0.8
    assert np.nanmax(outside) < 0.2


def test_blob_gradients_concentrated_on_blob_cells(tmp_path):
    out = make_fixture(7, 32, 8, 4, Pattern.BLOB, tmp_path / "b")
    grads = np.load(out / "grads.npy")
    inside = grads[:, 3:5, 3:5]
    outside = grads.copy()
    outside[:, 3:5, 3:5] = np.nan
    assert (inside > 0).all()
    assert np.nansum(np.abs(outside)) == 0.0


def test_blob_features_boosted_on_blob_cells(tmp_path):
    out = make_fixture(7, 32, 8, 4, Pattern.BLOB, tmp_path / "b")
    features = np.load(out / "features.npy")
    assert features[:, 3:5, 3:5].min() > 0.8
    assert features[:, 0, 0].max() < 0.1


def test_two_blobs_ground_truth_is_larger_box(tmp_path):
    out = make_fixture(11, 32, 8, 6, Pattern.TWO_BLOBS, tmp_path / "b")
    gt = json.loads((out / GT_NAME).read_text())
    assert gt == {"row_min": 4, "col_min": 4, "row_max": 15, "col_max": 15}


def test_two_blobs_have_two_separated_supports(tmp_path):
    out = make_fixture(11, 32, 8, 6, Pattern.TWO_BLOBS, tmp_path / "b")
    grads = np.load(out / "grads.npy")
    big = grads[:, 1:4, 1:4]
    small = grads[:, 5:7, 5:7]
    rest = grads.copy()
    rest[:, 1:4, 1:4] = np.nan
    rest[:, 5:7, 5:7] = np.nan
    assert (big > 0).all()
    assert (small > 0).all()
    assert np.nansum(np.abs(rest)) == 0.0
    assert big[0].size > small[0].size


def test_two_blobs_equal_brightness(tmp_path):
    out = make_fixture(11, 32, 8, 6, Pattern.TWO_BLOBS, tmp_path / "b")
    image = np.load(out / "image.npy")
    assert image[4:16, 4:16].min() > 0.8
    assert image[20:28, 20:28].min() > 0.8


def test_zero_grads_pattern_grads_all_zero(tmp_path):
    out = make_fixture(13, 16, 4, 3, Pattern.ZERO_GRADS, tmp_path / "b")
    grads = np.load(out / "grads.npy")
    assert not grads.any()
    assert np.load(out / "features.npy").any()


def test_random_pattern_records_logits(tmp_path):
    out = make_fixture(17, 24, 6, 5, Pattern.RANDOM, tmp_path / "b")
    manifest = json.loads((out / "manifest.json").read_text())
    assert len(manifest["logits"]) == 10
    assert manifest["class_id"] == int(np.argmax(manifest["logits"]))
    assert manifest["class_name"] == "noise"
    grads = np.load(out / "grads.npy")
    assert (grads < 0).any() and (grads > 0).any()


@pytest.mark.parametrize("pattern", [Pattern.ZERO_GRADS, Pattern.RANDOM])
def test_patterns_without_ground_truth(tmp_path, pattern):
    out = make_fixture(1, 16, 4, 2, pattern, tmp_path / "b")
    assert not (out / GT_NAME).exists()


@pytest.mark.parametrize("pattern", list(Pattern))
def test_all_patterns_pass_consumer_validation(tmp_path, validate_bundle, pattern):
    args = (2, 32, 8, 4) if pattern is Pattern.TWO_BLOBS else (2, 16, 4, 3)
    out = make_fixture(*args, pattern, tmp_path / pattern.value)
    proc = validate_bundle(out)
    assert proc.returncode == 0, proc.stderr


def test_pattern_accepts_plain_string(tmp_path):
    out = make_fixture(3, 16, 4, 2, "blob", tmp_path / "b")
    assert (out / GT_NAME).exists()


@pytest.mark.parametrize(
    "n,g,k,pattern,match",
    [
        (4, 8, 2, Pattern.BLOB, "image side >= grid side"),
        (16, 0, 2, Pattern.BLOB, "image side >= grid side"),
        (16, 4, 0, Pattern.BLOB, "channels >= 1"),
        (32, 4, 2, Pattern.TWO_BLOBS, "grid side >= 5"),
    ],
)
def test_bad_shapes_rejected(tmp_path, n, g, k, pattern, match):
    with pytest.raises(BadShape, match=match):
        make_fixture(1, n, g, k, pattern, tmp_path / "b")


def test_non_divisible_grid_still_well_formed(tmp_path):
    out = make_fixture(21, 30, 7, 3, Pattern.BLOB, tmp_path / "b")
    gt = json.loads((out / GT_NAME).read_text())
    assert 0 <= gt["row_min"] <= gt["row_max"] <= 29
    assert 0 <= gt["col_min"] <= gt["col_max"] <= 29
    image = np.load(out / "image.npy")
    center = (gt["row_min"] + gt["row_max"]) // 2
    assert image[center, center] > 0.8
    assert image.shape == (30, 30)


def test_degenerate_single_cell_grid(tmp_path):
    out = make_fixture(5, 8, 1, 2, Pattern.BLOB, tmp_path / "b")
    gt = json.loads((out / GT_NAME).read_text())
    assert gt == {"row_min": 0, "col_min": 0, "row_max": 7, "col_max": 7}
    assert np.load(out / "grads.npy").shape == (2, 1, 1)
