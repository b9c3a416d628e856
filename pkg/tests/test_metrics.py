import numpy as np
import pytest

from dmalign.errors import (
    DegenerateCovariance,
    DimensionMismatch,
    EmptyMaskRegion,
    ZeroVector,
)
from dmalign.imaging import write_dmg1
from dmalign.metrics import (
    FileFeatureProvider,
    IdentityFeatureProvider,
    MetricProviders,
    PixelStatsFeatureProvider,
    RawPyramidFeatureProvider,
    background_report,
    batch_fid,
    clipscore,
    fid,
    image_report,
    lpips,
    pwmse,
    reports_to_csv,
)


class ScalarFeatureProvider:
    """Images ARE their features (1-element arrays) for closed-form tests."""

    name = "scalar"

    def features(self, image):
        return np.atleast_1d(np.asarray(image, dtype=float)).reshape(-1)


class TestPwmse:
    def test_identity_zero(self):
        img = np.random.default_rng(0).uniform(size=(3, 4, 4))
        assert pwmse(img, img) == 0.0

    def test_hand_value(self):
        a = np.zeros((1, 2, 2))
        b = np.zeros((1, 2, 2))
        b[0, 0, 0] = 2.0
        assert pwmse(a, b) == pytest.approx(1.0)

    def test_mask_selecting_equal_pixels(self):
        a = np.zeros((1, 2, 2))
        b = np.array(a)
        b[0, 1, 1] = 5.0
        mask = np.array([[1, 1], [1, 0]])
        assert pwmse(a, b, mask) == 0.0

    def test_symmetry(self):
        rng = np.random.default_rng(1)
        a, b = rng.uniform(size=(3, 4, 4)), rng.uniform(size=(3, 4, 4))
        assert pwmse(a, b) == pwmse(b, a)

    def test_empty_mask_rejected(self):
        with pytest.raises(EmptyMaskRegion):
            pwmse(np.zeros((1, 2, 2)), np.zeros((1, 2, 2)), np.zeros((2, 2)))

    def test_shape_mismatch(self):
        with pytest.raises(DimensionMismatch):
            pwmse(np.zeros((1, 2, 2)), np.zeros((1, 3, 3)))


class TestFid:
    def test_identical_sets_zero(self):
        rng = np.random.default_rng(2)
        images = [rng.uniform(size=(3, 8, 8)) for _ in range(4)]
        assert fid(images, list(images), PixelStatsFeatureProvider(4)) == pytest.approx(0.0, abs=1e-8)

    def test_one_dimensional_unit_case(self):
        # means 0 and 1, variances exactly 1 on both sides -> distance 1
        d = np.sqrt(0.5)
        set_a = [np.array(-d), np.array(d)]
        set_b = [np.array(1 - d), np.array(1 + d)]
        assert fid(set_a, set_b, ScalarFeatureProvider()) == pytest.approx(1.0, abs=1e-9)

    def test_commuting_diagonal_case(self):
        # equal means, variances 4 and 1 -> 4 + 1 - 2*2 = 1
        a = np.sqrt(2.0)
        b = np.sqrt(0.5)
        set_a = [np.array(-a), np.array(a)]
        set_b = [np.array(-b), np.array(b)]
        assert fid(set_a, set_b, ScalarFeatureProvider()) == pytest.approx(1.0, abs=1e-9)

    def test_symmetric_and_nonnegative(self):
        rng = np.random.default_rng(3)
        xs = [rng.uniform(size=(3, 8, 8)) for _ in range(5)]
        ys = [rng.uniform(size=(3, 8, 8)) for _ in range(5)]
        provider = PixelStatsFeatureProvider(4)
        ab = fid(xs, ys, provider)
        ba = fid(ys, xs, provider)
        assert ab == pytest.approx(ba, rel=1e-9)
        assert ab >= 0.0

    def test_degenerate_covariance_warns_on_clipping(self):
        from dmalign.metrics import _sqrt_psd

        # symmetric matrix with one slightly negative eigenvalue
        theta = 0.3
        rot = np.array([[np.cos(theta), -np.sin(theta)], [np.sin(theta), np.cos(theta)]])
        matrix = rot @ np.diag([1.0, -1e-6]) @ rot.T
        with pytest.warns(DegenerateCovariance):
            root = _sqrt_psd(matrix)
        # clipped at zero: the root is PSD
        assert np.linalg.eigvalsh(root).min() >= -1e-12

    def test_too_few_images(self):
        with pytest.raises(ValueError):
            fid([np.zeros((3, 4, 4))], [np.zeros((3, 4, 4))], PixelStatsFeatureProvider(2))


class TestLpips:
    def test_identity_zero(self):
        img = np.random.default_rng(4).uniform(size=(3, 4, 4))
        assert lpips(img, img, RawPyramidFeatureProvider()) == 0.0

    def test_identity_layer_equals_normalized_pixel_distance(self):
        rng = np.random.default_rng(5)
        a, b = rng.uniform(size=(3, 2, 2)), rng.uniform(size=(3, 2, 2))
        direct = float(((a - b) ** 2).sum() / 4)
        assert lpips(a, b, IdentityFeatureProvider()) == pytest.approx(direct, abs=1e-9)

    def test_extra_identical_layer_adds_nothing(self):
        class DoubledIdentity:
            name = "doubled"

            def layers(self, image):
                return [np.array(image), np.ones_like(image)]

        rng = np.random.default_rng(6)
        a, b = rng.uniform(size=(3, 2, 2)), rng.uniform(size=(3, 2, 2))
        base = lpips(a, b, IdentityFeatureProvider())
        assert lpips(a, b, DoubledIdentity()) == pytest.approx(base, abs=1e-12)

    def test_shape_mismatch(self):
        with pytest.raises(DimensionMismatch):
            lpips(np.zeros((3, 4, 4)), np.zeros((3, 2, 2)), IdentityFeatureProvider())


class TestClipscore:
    def test_identical_unit_vectors(self):
        v = np.array([1.0, 0.0])
        assert clipscore(v, v) == pytest.approx(2.5)

    def test_orthogonal(self):
        assert clipscore(np.array([1.0, 0.0]), np.array([0.0, 1.0])) == 0.0

    def test_opposite_clamped(self):
        assert clipscore(np.array([1.0, 0.0]), np.array([-1.0, 0.0])) == 0.0

    def test_scale_invariance(self):
        rng = np.random.default_rng(7)
        a, b = rng.normal(size=5), rng.normal(size=5)
        assert clipscore(a, b) == pytest.approx(clipscore(3.7 * a, 0.2 * b), abs=1e-12)

    def test_zero_vector_rejected(self):
        with pytest.raises(ZeroVector):
            clipscore(np.zeros(3), np.ones(3))


class TestReports:
    def test_identity_reports_zero(self):
        img = np.random.default_rng(8).uniform(size=(3, 8, 8))
        refined = np.zeros((8, 8), dtype=np.uint8)
        refined[2:4, 2:4] = 1
        report = background_report(img, img, refined)
        assert report.pwmse == 0.0 and report.lpips == 0.0
        assert report.scope == "background"
        assert report.clipscore is None

    def test_empty_refined_matches_full_image_report(self):
        rng = np.random.default_rng(9)
        a, b = rng.uniform(size=(3, 8, 8)), rng.uniform(size=(3, 8, 8))
        refined = np.zeros((8, 8), dtype=np.uint8)
        bg = background_report(a, b, refined)
        full = image_report(a, b)
        assert bg.pwmse == pytest.approx(full.pwmse, abs=1e-12)
        assert bg.lpips == pytest.approx(full.lpips, abs=1e-9)

    def test_full_coverage_rejected(self):
        img = np.zeros((3, 4, 4))
        with pytest.raises(EmptyMaskRegion):
            background_report(img, img, np.ones((4, 4), dtype=np.uint8))

    def test_image_report_has_clipscore_with_caption(self):
        from dmalign.captions import analyze
        from dmalign.diffusion import embed_caption

        img = np.random.default_rng(10).uniform(size=(3, 8, 8))
        report = image_report(img, img, embed_caption(analyze("a red square")))
        assert report.clipscore is not None and 0.0 <= report.clipscore <= 2.5

    def test_batch_fid_runs_over_sets(self):
        rng = np.random.default_rng(11)
        ins = [rng.uniform(size=(3, 8, 8)) for _ in range(3)]
        outs = [img + 0.01 for img in ins]
        value = batch_fid(ins, outs, MetricProviders.default())
        assert value >= 0.0

    def test_csv_rendering(self):
        img = np.random.default_rng(12).uniform(size=(3, 8, 8))
        report = image_report(img, img)
        text = reports_to_csv([report.to_dict()])
        assert text.splitlines()[0].startswith("scope,")


def test_file_feature_provider_round_trip(tmp_path):
    vec = np.arange(6, dtype=float).reshape(1, 1, 6)
    write_dmg1(vec, tmp_path / "img1.dmg1")
    manifest = tmp_path / "features.json"
    manifest.write_text('{"features": {"img1.png": "img1.dmg1"}}')
    provider = FileFeatureProvider(manifest)
    assert np.allclose(provider.features("somewhere/img1.png"), np.arange(6))
    [layer] = provider.layers("img1.png")
    assert layer.shape == (1, 1, 6)
