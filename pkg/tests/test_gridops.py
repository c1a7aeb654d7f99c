import numpy as np
import pytest

from sarcam import ShapeMismatch, hadamard, normalize_minmax, relu_grid, resize_bilinear

from oracles import oracle_normalize, oracle_resize_bilinear


class TestResizeBilinear:
    def test_identity_is_exact_copy(self):
        rng = np.random.default_rng(0)
        grid = rng.random((9, 9), dtype=np.float32)
        out = resize_bilinear(grid, 9)
        assert out.dtype == np.float32
        np.testing.assert_array_equal(out, grid)
        assert out is not grid

    def test_constant_grid_stays_constant(self):
        grid = np.full((5, 5), 3.25, dtype=np.float32)
        out = resize_bilinear(grid, 17)
        np.testing.assert_array_equal(out, np.full((17, 17), 3.25, dtype=np.float32))

    def test_2x2_to_4x4_known_values(self):
        grid = np.array([[0.0, 1.0], [2.0, 3.0]], dtype=np.float32)
        out = resize_bilinear(grid, 4)
        expected = np.asarray(oracle_resize_bilinear(grid, 4), dtype=np.float64)
        np.testing.assert_allclose(out, expected, atol=1e-6)
        # corners clamp to the corner samples
        assert out[0, 0] == 0.0 and out[3, 3] == 3.0

    def test_single_pixel_source_broadcasts(self):
        grid = np.array([[7.5]], dtype=np.float32)
        out = resize_bilinear(grid, 6)
        np.testing.assert_array_equal(out, np.full((6, 6), 7.5, dtype=np.float32))

    def test_collapse_to_single_pixel(self):
        rng = np.random.default_rng(1)
        grid = rng.random((8, 8), dtype=np.float32)
        out = resize_bilinear(grid, 1)
        expected = np.asarray(oracle_resize_bilinear(grid, 1))
        np.testing.assert_allclose(out, expected, atol=1e-6)

    def test_matches_scalar_reference_both_directions(self):
        rng = np.random.default_rng(42)
        for _ in range(10):
            src = int(rng.integers(1, 33))
            dst = int(rng.integers(1, 33))
            grid = rng.standard_normal((src, src)).astype(np.float32)
            out = resize_bilinear(grid, dst)
            expected = np.asarray(oracle_resize_bilinear(grid, dst))
            assert out.shape == (dst, dst)
            np.testing.assert_allclose(out, expected, atol=1e-6)

    def test_output_range_contained_in_input_range(self):
        rng = np.random.default_rng(3)
        grid = rng.standard_normal((12, 12)).astype(np.float32)
        out = resize_bilinear(grid, 30)
        assert out.min() >= grid.min() - 1e-6
        assert out.max() <= grid.max() + 1e-6

    def test_rejects_non_square(self):
        with pytest.raises(ShapeMismatch):
            resize_bilinear(np.zeros((3, 4), dtype=np.float32), 8)

    def test_rejects_bad_destination(self):
        with pytest.raises(ValueError):
            resize_bilinear(np.zeros((3, 3), dtype=np.float32), 0)


class TestNormalizeMinmax:
    def test_constant_maps_to_zeros(self):
        grid = np.full((4, 4), 9.0, dtype=np.float32)
        np.testing.assert_array_equal(normalize_minmax(grid), np.zeros((4, 4), np.float32))

    def test_known_values(self):
        grid = np.array([[1.0, 3.0], [5.0, 2.0]], dtype=np.float32)
        out = normalize_minmax(grid)
        np.testing.assert_allclose(out, [[0.0, 0.5], [1.0, 0.25]], atol=1e-7)

    def test_exactly_idempotent(self):
        rng = np.random.default_rng(4)
        grid = rng.standard_normal((16, 16)).astype(np.float32)
        once = normalize_minmax(grid)
        twice = normalize_minmax(once)
        np.testing.assert_array_equal(once, twice)

    def test_matches_scalar_reference(self):
        rng = np.random.default_rng(5)
        for _ in range(5):
            grid = (rng.standard_normal((7, 7)) * rng.random() * 10).astype(np.float32)
            out = normalize_minmax(grid)
            expected = np.asarray(oracle_normalize(grid))
            np.testing.assert_allclose(out, expected, atol=1e-6)

    def test_range_and_extremes(self):
        rng = np.random.default_rng(6)
        grid = rng.random((10, 10)).astype(np.float32)
        out = normalize_minmax(grid)
        assert out.min() == 0.0
        assert out.max() == 1.0


class TestHadamardAndRelu:
    def test_hadamard_basic(self):
        a = np.array([[1.0, 2.0], [3.0, 4.0]], dtype=np.float32)
        b = np.array([[2.0, 0.5], [0.0, -1.0]], dtype=np.float32)
        np.testing.assert_allclose(hadamard(a, b), [[2.0, 1.0], [0.0, -4.0]])

    def test_hadamard_shape_mismatch(self):
        with pytest.raises(ShapeMismatch):
            hadamard(np.zeros((2, 2)), np.zeros((3, 3)))

    def test_relu_zeroes_negatives(self):
        a = np.array([[-1.5, 0.0], [2.0, -0.0]], dtype=np.float32)
        out = relu_grid(a)
        np.testing.assert_array_equal(out, [[0.0, 0.0], [2.0, 0.0]])
        assert out.dtype == np.float32
