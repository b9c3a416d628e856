import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dmalign.captions import analyze
from dmalign.diffusion import ConvDenoiser, DenoiserConfig, make_schedule
from dmalign.errors import DimensionMismatch
from dmalign.grounding import RegionMask
from dmalign.masks import (
    binarize,
    cancellation_map,
    diffusion_mask,
    refine,
    upsample_mask,
)


class ConditionalConstantDenoiser:
    """Predicts 0 without a condition and 1 with any condition set."""

    class config:
        cond_dim = 32

    def predict(self, x_t, t, condition):
        return np.full(x_t.shape, 1.0 if condition.any() else 0.0)


def rmask(bits):
    return RegionMask(np.asarray(bits, dtype=np.uint8))


class TestDiffusionMask:
    def setup_method(self):
        self.schedule = make_schedule(10, 0.05, 0.3)
        self.image = np.random.default_rng(0).uniform(size=(3, 8, 8))
        from dmalign.diffusion import IdentityCodec

        self.codec = IdentityCodec()

    def test_identical_captions_zero_mask(self):
        denoiser = ConvDenoiser.create(DenoiserConfig(channels=3, hidden=4), seed=1)
        cap = analyze("a red cat")
        soft = diffusion_mask(self.image, cap, cap, self.schedule, denoiser, self.codec, seed=7)
        assert np.all(soft == 0.0)

    def test_condition_dependent_stub_gives_all_ones(self):
        # the stub predicts constants 0 / 1 by condition, so |diff| = 1
        # everywhere and the rescaled mask saturates
        from dmalign.captions import TokenizedCaption

        denoiser = ConditionalConstantDenoiser()
        c1 = analyze("a red cat")
        c2 = TokenizedCaption("", [])  # zero vector: unconditional branch
        soft = diffusion_mask(self.image, c1, c2, self.schedule, denoiser, self.codec, seed=3)
        assert np.all(soft == 1.0)

    def test_seed_determinism(self):
        denoiser = ConvDenoiser.create(DenoiserConfig(channels=3, hidden=4), seed=1)
        c1, c2 = analyze("a red cat"), analyze("a blue cat")
        a = diffusion_mask(self.image, c1, c2, self.schedule, denoiser, self.codec, seed=5)
        b = diffusion_mask(self.image, c1, c2, self.schedule, denoiser, self.codec, seed=5)
        assert np.array_equal(a, b)

    def test_values_in_unit_interval_and_extremes_hit(self):
        denoiser = ConvDenoiser.create(DenoiserConfig(channels=3, hidden=4), seed=2)
        c1, c2 = analyze("a red cat"), analyze("a blue dog")
        soft = diffusion_mask(self.image, c1, c2, self.schedule, denoiser, self.codec, seed=9)
        assert soft.min() == 0.0 and soft.max() == 1.0


class TestBinarize:
    def test_boundary_inclusive(self):
        soft = np.array([[0.2, 0.5, 0.8]])
        assert binarize(soft, 0.5).tolist() == [[0, 1, 1]]

    def test_all_zero(self):
        assert binarize(np.zeros((3, 3))).sum() == 0

    def test_threshold_zero_all_ones(self):
        assert binarize(np.random.default_rng(0).uniform(size=(4, 4)), 0.0).sum() == 16

    def test_invalid_threshold(self):
        with pytest.raises(ValueError):
            binarize(np.zeros((2, 2)), 1.5)

    @settings(max_examples=30)
    @given(st.integers(0, 2**16))
    def test_monotone_in_threshold(self, seed):
        soft = np.random.default_rng(seed).uniform(size=(8, 8))
        low = binarize(soft, 0.3)
        high = binarize(soft, 0.7)
        assert np.all(high <= low)


class TestRefine:
    def test_set_algebra_by_definition(self):
        diffusion = np.array([[1, 1], [0, 0]], dtype=np.uint8)
        alter = rmask([[0, 0], [0, 1]])
        keep = rmask([[0, 0], [0, 0]])
        refined = refine(diffusion, alter, keep, factor=1)
        assert refined.bits.tolist() == [[1, 1], [0, 1]]

    def test_keep_wins_over_diffusion(self):
        diffusion = np.array([[1, 1], [1, 1]], dtype=np.uint8)
        keep = rmask([[1, 0], [0, 0]])
        refined = refine(diffusion, rmask(np.zeros((2, 2))), keep)
        assert refined.bits[0, 0] == 0
        assert refined.provenance_histogram()["removed_by_keep"] == 1

    def test_upsampling_factor(self):
        diffusion = np.array([[1, 0], [0, 0]], dtype=np.uint8)
        alter = rmask(np.zeros((4, 4)))
        keep = rmask(np.zeros((4, 4)))
        refined = refine(diffusion, alter, keep, factor=2)
        assert refined.bits[:2, :2].sum() == 4 and refined.popcount() == 4

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            refine(np.zeros((2, 2), dtype=np.uint8), rmask(np.zeros((3, 3))), rmask(np.zeros((3, 3))))

    @settings(max_examples=50)
    @given(st.integers(0, 2**16))
    def test_never_intersects_keep_and_covers_alter(self, seed):
        rng = np.random.default_rng(seed)
        diffusion = rng.integers(0, 2, (6, 6)).astype(np.uint8)
        alter = rmask(rng.integers(0, 2, (6, 6)))
        keep = rmask(rng.integers(0, 2, (6, 6)))
        refined = refine(diffusion, alter, keep)
        assert not np.any(refined.bits & keep.bits)
        wanted = alter.bits & (1 - keep.bits)
        assert np.all(refined.bits >= wanted)

    @settings(max_examples=25)
    @given(st.integers(0, 2**16))
    def test_idempotent(self, seed):
        rng = np.random.default_rng(seed)
        diffusion = rng.integers(0, 2, (5, 5)).astype(np.uint8)
        alter = rmask(rng.integers(0, 2, (5, 5)))
        keep = rmask(rng.integers(0, 2, (5, 5)))
        once = refine(diffusion, alter, keep)
        twice = refine(once.bits, alter, keep)
        assert np.array_equal(once.bits, twice.bits)


class TestCancellationMap:
    def test_all_keep_cancels_everywhere(self):
        assert cancellation_map(rmask(np.ones((4, 4))), 2).sum() == 4

    def test_no_keep_cancels_nowhere(self):
        assert cancellation_map(rmask(np.zeros((4, 4))), 2).sum() == 0

    def test_exact_quadrant(self):
        keep = np.zeros((4, 4), dtype=np.uint8)
        keep[:2, :2] = 1
        cancel = cancellation_map(rmask(keep), 2)
        assert cancel.tolist() == [[1, 0], [0, 0]]

    def test_partial_block_does_not_cancel(self):
        keep = np.zeros((4, 4), dtype=np.uint8)
        keep[0, 0] = 1
        assert cancellation_map(rmask(keep), 2).sum() == 0


def test_upsample_mask_identity_factor():
    bits = np.array([[1, 0]], dtype=np.uint8)
    out = upsample_mask(bits, 1)
    assert np.array_equal(out, bits)
    out[0, 0] = 0
    assert bits[0, 0] == 1
