import numpy as np
import pytest
from PIL import Image

from sarcam import (
    BBox,
    OutOfBounds,
    RenderSpec,
    ShapeMismatch,
    colorize,
    draw_bbox,
    overlay,
    panel,
    save_png,
)
from sarcam.render import GUTTER_PX, LABEL_STRIP_PX


class TestColorize:
    @pytest.mark.parametrize("value,rgb", [
        (0.0, (0, 0, 128)),
        (0.125, (0, 0, 255)),
        (0.375, (0, 255, 255)),
        (0.625, (255, 255, 0)),
        (0.875, (255, 0, 0)),
        (1.0, (128, 0, 0)),
    ])
    def test_pinned_control_points(self, value, rgb):
        out = colorize(np.array([[value]], dtype=np.float32))
        assert tuple(out[0, 0]) == rgb

    def test_interpolation_rounds_half_up(self):
        # midway between 0.0 and 0.125: blue = (128+255)/2 = 191.5 -> 192
        out = colorize(np.array([[0.0625]], dtype=np.float64))
        assert tuple(out[0, 0]) == (0, 0, 192)

    def test_output_is_uint8_rgb(self):
        out = colorize(np.random.default_rng(0).random((5, 7)))
        assert out.shape == (5, 7, 3)
        assert out.dtype == np.uint8

    def test_deterministic(self):
        grid = np.random.default_rng(1).random((8, 8)).astype(np.float32)
        np.testing.assert_array_equal(colorize(grid), colorize(grid))


class TestOverlay:
    def test_alpha_zero_reproduces_grayscale(self):
        image = np.array([[0.0, 0.5], [1.0, 0.25]], dtype=np.float32)
        heat = np.zeros((2, 2, 3), dtype=np.uint8)
        out = overlay(image, heat, alpha=0.0)
        expected = np.clip(np.floor(image * 255.0 + 0.5), 0, 255).astype(np.uint8)
        np.testing.assert_array_equal(out, np.repeat(expected[:, :, None], 3, axis=2))

    def test_alpha_one_reproduces_heat(self):
        rng = np.random.default_rng(2)
        image = rng.random((3, 3)).astype(np.float32)
        heat = rng.integers(0, 256, (3, 3, 3)).astype(np.uint8)
        np.testing.assert_array_equal(overlay(image, heat, alpha=1.0), heat)

    def test_blend_formula_single_pixel(self):
        image = np.array([[0.5]], dtype=np.float32)
        heat = np.array([[[100, 200, 30]]], dtype=np.uint8)
        out = overlay(image, heat, alpha=0.5)
        gray = 0.5 * 255.0
        expected = tuple(
            int(np.floor(0.5 * h + 0.5 * gray + 0.5)) for h in (100, 200, 30)
        )
        assert tuple(out[0, 0]) == expected

    def test_shape_mismatch_rejected(self):
        with pytest.raises(ShapeMismatch):
            overlay(np.zeros((4, 4)), np.zeros((5, 5, 3), dtype=np.uint8))

    def test_single_rounding_stage(self):
        # values that would drift under double rounding stay exact
        image = np.full((1, 1), 0.001, dtype=np.float64)
        heat = np.array([[[1, 1, 1]]], dtype=np.uint8)
        out = overlay(image, heat, alpha=0.5)
        expected = int(np.floor(0.5 * 1 + 0.5 * 0.255 + 0.5))
        assert out[0, 0, 0] == expected


class TestDrawBbox:
    def test_perimeter_is_green(self):
        rgb = np.zeros((8, 8, 3), dtype=np.uint8)
        out = draw_bbox(rgb, BBox(2, 2, 5, 5))
        green = (0, 255, 0)
        for c in range(2, 6):
            assert tuple(out[2, c]) == green
            assert tuple(out[5, c]) == green
            assert tuple(out[c, 2]) == green
            assert tuple(out[c, 5]) == green
        assert tuple(out[3, 3]) == (0, 0, 0)  # interior untouched
        assert tuple(out[1, 1]) == (0, 0, 0)  # exterior untouched

    def test_input_not_mutated(self):
        rgb = np.zeros((6, 6, 3), dtype=np.uint8)
        draw_bbox(rgb, BBox(1, 1, 4, 4))
        assert rgb.sum() == 0

    def test_thickness_two_draws_inner_ring(self):
        rgb = np.zeros((10, 10, 3), dtype=np.uint8)
        out = draw_bbox(rgb, BBox(1, 1, 8, 8), thickness=2)
        assert tuple(out[2, 4]) == (0, 255, 0)
        assert tuple(out[4, 4]) == (0, 0, 0)

    def test_thickness_collapses_gracefully_on_small_box(self):
        rgb = np.zeros((6, 6, 3), dtype=np.uint8)
        out = draw_bbox(rgb, BBox(2, 2, 3, 3), thickness=5)
        assert tuple(out[2, 2]) == (0, 255, 0)
        # nothing outside the box painted
        assert out[:2].sum() == 0 and out[4:].sum() == 0

    def test_single_pixel_box(self):
        rgb = np.zeros((4, 4, 3), dtype=np.uint8)
        out = draw_bbox(rgb, BBox(1, 1, 1, 1))
        assert tuple(out[1, 1]) == (0, 255, 0)

    def test_out_of_bounds_rejected(self):
        rgb = np.zeros((4, 4, 3), dtype=np.uint8)
        with pytest.raises(OutOfBounds):
            draw_bbox(rgb, BBox(0, 0, 4, 4))
        with pytest.raises(OutOfBounds):
            draw_bbox(rgb, BBox(-1, 0, 2, 2))


class TestPanel:
    def test_two_tiles_one_row_geometry(self):
        tiles = [np.zeros((10, 10, 3), dtype=np.uint8),
                 np.full((10, 10, 3), 50, dtype=np.uint8)]
        out = panel(tiles, labels=None, columns=2)
        assert out.shape == (10 + 2 * GUTTER_PX, 20 + 3 * GUTTER_PX, 3)
        # gutters are white
        assert np.all(out[:GUTTER_PX] == 255)
        assert np.all(out[:, :GUTTER_PX] == 255)
        middle = GUTTER_PX + 10
        assert np.all(out[:, middle:middle + GUTTER_PX] == 255)
        # tiles landed where expected
        assert out[GUTTER_PX, GUTTER_PX, 0] == 0
        assert out[GUTTER_PX, 2 * GUTTER_PX + 10, 0] == 50

    def test_rows_round_up(self):
        tiles = [np.zeros((4, 4, 3), dtype=np.uint8)] * 5
        out = panel(tiles, columns=2)  # 3 rows
        assert out.shape[0] == 3 * 4 + 4 * GUTTER_PX

    def test_labels_add_strip(self):
        tiles = [np.zeros((6, 6, 3), dtype=np.uint8)]
        out = panel(tiles, labels=["a"], columns=1)
        assert out.shape[0] == 6 + LABEL_STRIP_PX + 2 * GUTTER_PX

    def test_grayscale_tiles_replicate_to_rgb(self):
        tiles = [np.full((5, 5), 77, dtype=np.uint8)]
        out = panel(tiles, columns=1)
        assert tuple(out[GUTTER_PX, GUTTER_PX]) == (77, 77, 77)

    def test_mismatched_tile_shapes_rejected(self):
        with pytest.raises(ShapeMismatch):
            panel([np.zeros((4, 4, 3), dtype=np.uint8),
                   np.zeros((5, 5, 3), dtype=np.uint8)])

    def test_label_count_must_match(self):
        with pytest.raises(ShapeMismatch):
            panel([np.zeros((4, 4, 3), dtype=np.uint8)], labels=["a", "b"])

    def test_empty_panel_rejected(self):
        with pytest.raises(ShapeMismatch):
            panel([])


class TestSavePng:
    def test_round_trip_pixels(self, tmp_path):
        rgb = np.random.default_rng(3).integers(0, 256, (9, 9, 3)).astype(np.uint8)
        save_png(rgb, tmp_path / "x.png")
        back = np.asarray(Image.open(tmp_path / "x.png").convert("RGB"))
        np.testing.assert_array_equal(back, rgb)

    def test_bytes_deterministic(self, tmp_path):
        rgb = np.random.default_rng(4).integers(0, 256, (16, 16, 3)).astype(np.uint8)
        save_png(rgb, tmp_path / "a.png")
        save_png(rgb, tmp_path / "b.png")
        assert (tmp_path / "a.png").read_bytes() == (tmp_path / "b.png").read_bytes()


class TestRenderSpec:
    def test_defaults_valid(self):
        spec = RenderSpec()
        spec.validate()
        assert spec.alpha == 0.5
        assert spec.colormap == "jet"

    def test_bad_alpha_rejected(self):
        with pytest.raises(ValueError):
            RenderSpec(alpha=1.5).validate()

    def test_bad_colormap_rejected(self):
        with pytest.raises(ValueError):
            RenderSpec(colormap="viridis").validate()
