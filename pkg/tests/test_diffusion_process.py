import numpy as np
import pytest

from dmalign.diffusion import (
    NoiseSchedule,
    forward_sample,
    guided_noise,
    make_schedule,
    reverse_mean_variance,
    reverse_step,
    schedule_from_arrays,
)
from dmalign.errors import DimensionMismatch


class StubDenoiser:
    """Returns one constant for the conditional branch, another for the
    unconditional one."""

    def __init__(self, conditional, unconditional, shape=(1, 2, 2)):
        self.conditional = conditional
        self.unconditional = unconditional
        self.shape = shape

    def predict(self, x_t, t, condition):
        value = self.unconditional if not condition.any() else self.conditional
        return np.full(x_t.shape, float(value))


class TestForwardSample:
    def test_cancel_everywhere_is_pure_scaling(self):
        sched = make_schedule(10, 0.05, 0.3)
        x0 = np.arange(12, dtype=float).reshape(3, 2, 2)
        cancel = np.ones((2, 2))
        x_t, eps = forward_sample(x0, 7, sched, cancel=cancel, rng_seed=5)
        assert np.array_equal(x_t, np.sqrt(sched.alphas_cumprod[7]) * x0)
        assert np.all(eps == 0)

    def test_scalar_hand_value(self):
        # alpha 0.25 with unit noise: 0.5*1 + sqrt(0.75)*1
        sched = NoiseSchedule(betas=np.array([0.75]), alphas_cumprod=np.array([0.25]))
        x0 = np.ones((1, 1, 1))
        x_t, _ = forward_sample(x0, 0, sched, noise=np.ones((1, 1, 1)))
        assert x_t[0, 0, 0] == pytest.approx(1.36603, abs=1e-5)

    def test_terminal_statistics_converge_to_standard_normal(self):
        sched = make_schedule(1000)
        x0 = np.full((1, 1, 1), 0.7)
        draws = np.empty(10_000)
        for seed in range(draws.size):
            x_t, _ = forward_sample(x0, 999, sched, rng_seed=seed)
            draws[seed] = x_t[0, 0, 0]
        assert abs(draws.mean()) < 0.05
        assert abs(draws.var() - 1.0) < 0.1

    def test_deterministic_under_seed(self):
        sched = make_schedule(50)
        x0 = np.random.default_rng(3).uniform(size=(3, 4, 4))
        a, ea = forward_sample(x0, 20, sched, rng_seed=42)
        b, eb = forward_sample(x0, 20, sched, rng_seed=42)
        assert np.array_equal(a, b) and np.array_equal(ea, eb)

    def test_cancel_shape_mismatch(self):
        sched = make_schedule(10)
        with pytest.raises(DimensionMismatch):
            forward_sample(np.zeros((1, 4, 4)), 5, sched, cancel=np.ones((2, 2)))

    def test_step_out_of_range(self):
        sched = make_schedule(10)
        with pytest.raises(ValueError):
            forward_sample(np.zeros((1, 2, 2)), 10, sched)


class TestGuidedNoise:
    def test_scale_one_is_bitwise_conditional(self):
        stub = StubDenoiser(0.37, -5.0)
        x = np.zeros((1, 2, 2))
        cond = np.ones(4)
        out = guided_noise(x, 0, cond, 1.0, stub)
        assert np.array_equal(out, stub.predict(x, 0, cond))

    def test_scale_two_hand_value(self):
        stub = StubDenoiser(1.0, 0.0)
        out = guided_noise(np.zeros((1, 2, 2)), 0, np.ones(4), 2.0, stub)
        assert np.all(out == 2.0)

    def test_below_one_warns(self):
        stub = StubDenoiser(1.0, 0.0)
        with pytest.warns(UserWarning):
            guided_noise(np.zeros((1, 1, 1)), 0, np.ones(2), 0.5, stub)

    def test_negative_rejected(self):
        stub = StubDenoiser(1.0, 0.0)
        with pytest.raises(ValueError):
            guided_noise(np.zeros((1, 1, 1)), 0, np.ones(2), -1.0, stub)


class TestReverseStep:
    def test_hand_mean_and_variance(self):
        # scalar case beta=0.1, cumulative alphas (0.5556, 0.5):
        # mean = (1/sqrt(0.9)) * (1 - 0.1/sqrt(0.5)), evaluated independently
        sched = NoiseSchedule(
            betas=np.array([0.4444, 0.1]), alphas_cumprod=np.array([0.5556, 0.5])
        )
        mean, variance = reverse_mean_variance(
            np.ones((1, 1, 1)), 1, np.ones((1, 1, 1)), sched
        )
        hand_mean = (1.0 / 0.9**0.5) * (1.0 - 0.1 / 0.5**0.5)  # = 0.9050213...
        hand_variance = 0.1 * (1.0 - 0.5556) / (1.0 - 0.5)  # = 0.08888
        assert mean[0, 0, 0] == pytest.approx(hand_mean, abs=1e-5)
        assert variance == pytest.approx(hand_variance, abs=1e-5)
        assert hand_variance == pytest.approx(0.08888, abs=1e-9)

    def test_degenerate_beta_keeps_sample(self):
        sched = NoiseSchedule(
            betas=np.array([0.3, 1e-8]),
            alphas_cumprod=np.array([0.7, 0.7 * (1 - 1e-8)]),
        )
        x_t = np.random.default_rng(0).normal(size=(1, 3, 3))
        out = reverse_step(x_t, 1, np.zeros_like(x_t), sched)
        assert np.allclose(out, x_t, atol=1e-6)

    def test_single_step_consistency_with_forward(self):
        # with the true noise and zero variance, the reverse step undoes
        # one tiny-beta forward step
        rng = np.random.default_rng(11)
        for _ in range(25):
            beta0 = rng.uniform(0.2, 0.8)
            a0 = 1 - beta0
            sched = NoiseSchedule(
                betas=np.array([beta0, 1e-8]),
                alphas_cumprod=np.array([a0, a0 * (1 - 1e-8)]),
            )
            x0 = rng.normal(size=(1, 1, 1))
            eps = rng.normal(size=(1, 1, 1))
            x1, _ = forward_sample(x0, 1, sched, noise=eps)
            expected, _ = forward_sample(x0, 0, sched, noise=eps)
            reconstructed = reverse_step(x1, 1, eps, sched)  # t=1 returns the mean
            assert np.allclose(reconstructed, expected, atol=1e-5)

    def test_deterministic_under_seed(self):
        sched = make_schedule(50)
        x_t = np.random.default_rng(1).normal(size=(3, 4, 4))
        eps = np.random.default_rng(2).normal(size=(3, 4, 4))
        a = reverse_step(x_t, 30, eps, sched, rng_seed=9)
        b = reverse_step(x_t, 30, eps, sched, rng_seed=9)
        assert np.array_equal(a, b)

    def test_step_bounds(self):
        sched = make_schedule(10)
        with pytest.raises(ValueError):
            reverse_step(np.zeros((1, 1, 1)), 0, np.zeros((1, 1, 1)), sched)
