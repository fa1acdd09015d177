import numpy as np
import pytest
import scipy.stats
from PIL import Image

from abench.beamform import ImageGrid, RfImage
from abench.bmode import (
    BModeImage,
    NetTensor,
    TransformMeta,
    bmode,
    downsample_grid,
    downsample_lateral,
    envelope,
    fit_transform_meta,
    fit_yeojohnson_lambda,
    from_net_domain,
    log_compress,
    render_png,
    to_net_domain,
    yeojohnson,
    yeojohnson_inverse,
    yeojohnson_llf,
)
from abench.errors import DataError, DegenerateImageError, ShapeError, TransformError


def _random_image(seed=0, shape=(64, 32)):
    rng = np.random.default_rng(seed)
    return rng.standard_normal(shape)


class TestEnvelope:
    def test_cosine_window_envelope_is_one(self):
        # cos burst in the middle of a long record: envelope ~ 1 inside
        t = np.arange(256)
        col = np.zeros(256)
        col[64:192] = np.cos(2 * np.pi * 0.25 * t[64:192])
        env = envelope(col[:, None])
        inner = env[96:160, 0]
        assert np.abs(inner - 1.0).max() < 0.02

    def test_zero_image(self):
        assert np.all(envelope(np.zeros((32, 4))) == 0.0)

    def test_scaling(self):
        img = _random_image(1)
        np.testing.assert_allclose(envelope(-3.0 * img), 3.0 * envelope(img), rtol=1e-12)

    def test_needs_16_rows(self):
        with pytest.raises(ShapeError):
            envelope(np.zeros((8, 4)))


class TestBmode:
    def test_standardized(self):
        b = bmode(_random_image(2))
        assert abs(b.data.mean()) < 1e-5
        assert abs(b.data.std() - 1.0) < 1e-5

    def test_scale_invariance(self):
        img = _random_image(3)
        np.testing.assert_allclose(bmode(img).data, bmode(7.5 * img).data, atol=1e-9)

    def test_all_zero_errors(self):
        with pytest.raises(DegenerateImageError):
            bmode(np.zeros((32, 8)))

    def test_carries_grid(self):
        grid = ImageGrid(np.linspace(-1e-3, 1e-3, 8), 1e-3 + np.arange(32) * 1e-4)
        rf = RfImage(_random_image(4, (32, 8)).astype(np.float32), grid)
        assert bmode(rf).grid is grid


class TestYeoJohnson:
    def test_lambda1_identity(self):
        x = np.linspace(-3, 3, 101)
        np.testing.assert_allclose(yeojohnson(x, 1.0), x, atol=1e-12)

    def test_lambda0_positive_is_log1p(self):
        x = np.linspace(0, 5, 50)
        np.testing.assert_allclose(yeojohnson(x, 0.0), np.log1p(x), atol=1e-12)

    def test_negative_branch_lambda3_scalar_oracle(self):
        for x in (-0.1, -0.9, -2.5):
            expected = -((((-x) + 1.0) ** (-1.0)) - 1.0) / (-1.0)
            assert yeojohnson(np.array([x]), 3.0)[0] == pytest.approx(expected, rel=1e-12)

    def test_matches_scipy(self):
        rng = np.random.default_rng(5)
        x = rng.standard_normal(200)
        for lam in (-1.5, -0.3, 0.0, 0.7, 1.0, 2.0, 3.2):
            np.testing.assert_allclose(
                yeojohnson(x, lam), scipy.stats.yeojohnson(x, lam), atol=1e-10
            )

    def test_inverse_roundtrip(self):
        rng = np.random.default_rng(6)
        x = rng.standard_normal(500) * 2
        for lam in (-1.2, 0.0, 0.5, 1.0, 2.0, 3.5):
            np.testing.assert_allclose(
                yeojohnson_inverse(yeojohnson(x, lam), lam), x, atol=1e-9
            )

    def test_strictly_monotonic(self):
        rng = np.random.default_rng(7)
        for lam in rng.uniform(-2, 4, 16):
            x = np.sort(rng.standard_normal(256) * 3)
            y = yeojohnson(x, lam)
            assert np.all(np.diff(y) > 0)

    def test_llf_matches_scipy(self):
        rng = np.random.default_rng(8)
        x = rng.standard_normal(300)
        for lam in (-0.5, 0.3, 1.1):
            assert yeojohnson_llf(lam, x) == pytest.approx(
                scipy.stats.yeojohnson_llf(lam, x), rel=1e-9
            )

    def test_fit_recovers_gaussianizing_lambda(self):
        rng = np.random.default_rng(9)
        gauss = rng.standard_normal(5000)
        skewed = yeojohnson_inverse(gauss, 0.3)  # data whose best lambda ~ 0.3
        lam = fit_yeojohnson_lambda(skewed)
        assert lam == pytest.approx(0.3, abs=0.05)

    def test_fit_agrees_with_scipy_mle(self):
        rng = np.random.default_rng(10)
        x = np.abs(rng.standard_normal(2000)) ** 1.5 * np.sign(rng.standard_normal(2000))
        ours = fit_yeojohnson_lambda(x)
        _, theirs = scipy.stats.yeojohnson(x)
        assert ours == pytest.approx(theirs, abs=0.02)

    def test_fit_needs_samples(self):
        with pytest.raises(TransformError):
            fit_yeojohnson_lambda(np.array([1.0]))


class TestNetDomain:
    def test_downsample_means_adjacent_columns(self):
        img = np.arange(12, dtype=float).reshape(2, 6)
        d = downsample_lateral(img)
        np.testing.assert_allclose(d, [[0.5, 2.5, 4.5], [6.5, 8.5, 10.5]])

    def test_downsample_needs_even_columns(self):
        with pytest.raises(ShapeError):
            downsample_lateral(np.zeros((4, 5)))

    def test_roundtrip_lambda1(self):
        img = _random_image(11, (64, 32))
        meta = fit_transform_meta([img], lam=1.0)
        t = to_net_domain(img, meta)
        back = from_net_domain(t)
        np.testing.assert_allclose(back, downsample_lateral(img), rtol=1e-6, atol=1e-9)

    def test_roundtrip_fitted_lambda(self):
        img = _random_image(12, (64, 32))
        meta = fit_transform_meta([img])
        t = to_net_domain(img, meta)
        back = from_net_domain(t)
        ref = downsample_lateral(img)
        err = np.abs(back - ref).max() / np.abs(ref).max()
        assert err < 1e-5

    def test_values_in_unit_interval(self):
        imgs = [_random_image(s, (32, 16)) for s in range(4)]
        meta = fit_transform_meta(imgs)
        for img in imgs:
            t = to_net_domain(img, meta)
            assert t.data.min() >= 0.0 and t.data.max() <= 1.0

    def test_meta_json_roundtrip(self):
        meta = TransformMeta(max=2.5, lam=0.7, lo=-1.2, hi=0.9)
        assert TransformMeta.from_json(meta.to_json()) == meta

    def test_grid_downsampled(self):
        grid = ImageGrid(np.linspace(-1e-3, 1e-3, 8), 1e-3 + np.arange(64) * 1e-4)
        rf = RfImage(_random_image(13, (64, 8)).astype(np.float32), grid)
        meta = fit_transform_meta([rf])
        t = to_net_domain(rf, meta)
        assert t.grid.x.size == 4
        np.testing.assert_allclose(t.grid.x, 0.5 * (grid.x[0::2] + grid.x[1::2]))
        back = from_net_domain(t)
        assert isinstance(back, RfImage)
        assert back.grid is t.grid

    def test_all_zero_rejected(self):
        meta = TransformMeta(max=1.0, lam=1.0, lo=-1.0, hi=1.0)
        with pytest.raises(DegenerateImageError):
            to_net_domain(np.zeros((16, 4)), meta)


class TestRenderPng:
    def test_uniform_image_renders_white(self, tmp_path):
        p = tmp_path / "flat.png"
        render_png(np.full((8, 8), 3.7), 50.0, p)
        img = np.asarray(Image.open(p))
        assert img.shape == (8, 8)
        assert np.all(img == 255)

    def test_minus50db_pixel_is_black_at_dr50(self, tmp_path):
        env = np.ones((8, 8))
        env[4, 4] = 10 ** (-50 / 20)
        p = tmp_path / "dr.png"
        render_png(env, 50.0, p)
        img = np.asarray(Image.open(p))
        assert img[4, 4] == 0
        assert img[0, 0] == 255

    def test_60db_renders(self, tmp_path):
        env = np.ones((8, 8))
        env[2, 2] = 10 ** (-30 / 20)
        p = tmp_path / "dr60.png"
        render_png(env, 60.0, p)
        img = np.asarray(Image.open(p))
        assert img[2, 2] == round((60 - 30) / 60 * 255)

    def test_bad_dynamic_range(self, tmp_path):
        with pytest.raises(DataError):
            render_png(np.ones((4, 4)), 0.0, tmp_path / "x.png")

    def test_unwritable_path_raises(self, tmp_path):
        with pytest.raises(OSError):
            render_png(np.ones((4, 4)), 50.0, tmp_path / "no_dir" / "x.png")


def test_log_compress_floor():
    env = np.ones((4, 4))
    env[0, 0] = 1e-9  # -180 dB, below the floor
    db = log_compress(env)
    assert db[0, 0] == pytest.approx(-120.0, abs=1e-3)
    assert db[1, 1] == pytest.approx(0.0, abs=1e-6)
