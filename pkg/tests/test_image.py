import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays
from numpy.testing import assert_allclose, assert_array_equal
from PIL import Image

from fusegrad import kernels
from fusegrad.image import (
    ImageIOError,
    YCrCb,
    load_image,
    resize_bilinear,
    resize_bilinear_adjoint,
    rgb_to_ycrcb,
    save_image,
    scaled_shape,
    ycrcb_to_rgb,
)
from oracles import resize_loop

unit = st.floats(0.0, 1.0, allow_nan=False)


class TestYCrCb:
    def test_white_and_black(self):
        for level in (0.0, 1.0):
            y, cr, cb = rgb_to_ycrcb(np.full((1, 1, 3), level))
            assert_allclose([y[0, 0], cr[0, 0], cb[0, 0]], [level, 0.5, 0.5], atol=1e-15)

    def test_pure_red(self):
        y, cr, cb = rgb_to_ycrcb(np.array([[[1.0, 0.0, 0.0]]]))
        # Y = Kr, Cr = 0.5 + (1 - Kr) / (2 (1 - Kr)) = 1, Cb = 0.5 - Kr / (2 (1 - Kb))
        assert_allclose(y[0, 0], 0.299, atol=1e-15)
        assert_allclose(cr[0, 0], 1.0, atol=1e-15)
        assert_allclose(cb[0, 0], 0.5 - 0.299 / 1.772, atol=1e-15)

    def test_neutral_chroma_gives_gray(self):
        rgb = ycrcb_to_rgb(YCrCb(np.full((2, 2), 0.5), np.full((2, 2), 0.5), np.full((2, 2), 0.5)))
        assert_allclose(rgb, 0.5, atol=1e-15)

    @settings(max_examples=200, deadline=None)
    @given(arrays(np.float64, (3, 4, 3), elements=unit))
    def test_round_trip(self, rgb):
        # Cr/Cb stay inside [0, 1] for any RGB in the unit cube, so no clamping occurs
        assert_allclose(ycrcb_to_rgb(rgb_to_ycrcb(rgb)), rgb, atol=1e-6)

    def test_rejects_non_rgb(self):
        with pytest.raises(ValueError, match="RGB"):
            rgb_to_ycrcb(np.zeros((4, 4)))


class TestResize:
    def test_identity_at_unit_scale(self, rng):
        x = rng.random((7, 9))
        out = resize_bilinear(x, 1.0)
        assert_array_equal(out, x)
        assert out is not x

    def test_half_scale_ramp(self):
        ramp = np.arange(16.0).reshape(4, 4) / 15.0
        # samples land at 0.5 and 2.5 on both axes: the mean of each 2x2 block
        expected = np.array([[2.5, 4.5], [10.5, 12.5]]) / 15.0
        assert_allclose(kernels.resize(ramp, 2, 2, 0.5), expected, atol=1e-15)
        assert_allclose(resize_loop(ramp, 0.5), expected, atol=1e-15)
        with pytest.raises(ValueError, match=">= 3"):
            resize_bilinear(ramp, 0.5)  # the public entry point refuses a 2x2 output

    @pytest.mark.parametrize("shape,scale", [((8, 8), 0.5), ((13, 9), 0.37), ((20, 31), 0.25), ((6, 6), 0.75)])
    def test_matches_loop_oracle(self, rng, shape, scale):
        x = rng.random(shape)
        assert_allclose(resize_bilinear(x, scale), resize_loop(x, scale), atol=1e-14)

    def test_ramp_at_half_scale_on_8x8(self):
        ramp = np.add.outer(np.arange(8.0), np.arange(8.0) * 0.1)
        # rows/cols sample at 0.5, 2.5, 4.5, 6.5, and bilinear is exact on linear data
        c = np.array([0.5, 2.5, 4.5, 6.5])
        assert_allclose(resize_bilinear(ramp, 0.5), np.add.outer(c, 0.1 * c), atol=1e-14)

    @settings(max_examples=50, deadline=None)
    @given(st.floats(0.05, 1.0), st.floats(-2.0, 2.0))
    def test_constant_preserved(self, scale, value):
        x = np.full((40, 40), value)
        try:
            out = resize_bilinear(x, scale)
        except ValueError:
            return
        assert_allclose(out, value, rtol=0, atol=1e-13)

    @settings(max_examples=50, deadline=None)
    @given(arrays(np.float64, (12, 10), elements=unit), st.sampled_from([0.3, 0.5, 0.75, 0.9]))
    def test_output_within_input_range(self, x, scale):
        out = resize_bilinear(x, scale)
        assert out.min() >= x.min() - 1e-15 and out.max() <= x.max() + 1e-15

    def test_output_shape_rounding(self):
        assert scaled_shape((64, 64), 0.25) == (16, 16)
        assert scaled_shape((7, 10), 0.5) == (4, 5)  # floor(3.5 + 0.5), floor(5.5)

    @pytest.mark.parametrize("scale", [0.0, -0.5, 1.5])
    def test_bad_scale(self, scale):
        with pytest.raises(ValueError, match="scale"):
            resize_bilinear(np.zeros((8, 8)), scale)

    def test_too_small_output_names_sizes(self):
        with pytest.raises(ValueError, match="6x6 to 2x2"):
            resize_bilinear(np.zeros((6, 6)), 0.25)

    def test_adjoint_identity(self, rng):
        for _ in range(20):
            h, w = rng.integers(6, 30, size=2)
            scale = rng.uniform(0.3, 0.95)
            oh, ow = scaled_shape((h, w), scale)
            u, v = rng.standard_normal((h, w)), rng.standard_normal((oh, ow))
            lhs = np.vdot(resize_bilinear(u, scale), v)
            rhs = np.vdot(u, resize_bilinear_adjoint(v, (h, w), scale))
            assert abs(lhs - rhs) <= 1e-12 * max(abs(lhs), 1.0)


class TestPngIO:
    def test_gray_round_trip(self, tmp_path, rng):
        x = rng.random((9, 11))
        save_image(tmp_path / "a.png", x)
        y = load_image(tmp_path / "a.png")
        assert y.shape == x.shape
        assert np.max(np.abs(y - x)) <= 1 / 510 + 1e-12

    def test_constant_level(self, tmp_path):
        Image.fromarray(np.full((5, 5), 128, np.uint8)).save(tmp_path / "c.png")
        assert_array_equal(load_image(tmp_path / "c.png"), 128 / 255)

    def test_rgb_channel_order_matches_opencv(self, tmp_path, rng):
        cv2 = pytest.importorskip("cv2")
        data = rng.integers(0, 256, size=(6, 7, 3), dtype=np.uint8)
        Image.fromarray(data).save(tmp_path / "rgb.png")
        ref = cv2.cvtColor(cv2.imread(str(tmp_path / "rgb.png"), cv2.IMREAD_COLOR), cv2.COLOR_BGR2RGB)
        assert_array_equal(load_image(tmp_path / "rgb.png"), ref / 255.0)

    def test_rgb_save_load(self, tmp_path, rng):
        x = rng.random((4, 5, 3))
        save_image(tmp_path / "x.png", x)
        assert np.max(np.abs(load_image(tmp_path / "x.png") - x)) <= 1 / 510 + 1e-12

    def test_missing_file(self, tmp_path):
        with pytest.raises(ImageIOError, match="nope.png.*not found"):
            load_image(tmp_path / "nope.png")

    def test_not_png(self, tmp_path):
        Image.fromarray(np.zeros((4, 4), np.uint8)).save(tmp_path / "a.bmp")
        with pytest.raises(ImageIOError, match="only PNG"):
            load_image(tmp_path / "a.bmp")

    def test_garbage_file(self, tmp_path):
        (tmp_path / "junk.png").write_bytes(b"not an image")
        with pytest.raises(ImageIOError, match="junk.png"):
            load_image(tmp_path / "junk.png")

    def test_sixteen_bit_rejected(self, tmp_path):
        Image.fromarray(np.full((4, 4), 40000, np.uint16)).save(tmp_path / "deep.png")
        with pytest.raises(ImageIOError, match="bit depth"):
            load_image(tmp_path / "deep.png")

    def test_save_clips_and_rounds(self, tmp_path):
        save_image(tmp_path / "q.png", np.array([[-0.2, 0.5, 1.3], [0.0, 1.0, 0.002]]))
        raw = np.asarray(Image.open(tmp_path / "q.png"))
        assert_array_equal(raw, [[0, 128, 255], [0, 255, 1]])
