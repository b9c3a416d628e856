"""Forward noising, guided prediction and the reverse sampling step."""

from __future__ import annotations

import warnings

import numpy as np

from ..errors import DimensionMismatch
from .schedule import NoiseSchedule


def forward_sample(
    x0: np.ndarray,
    t: int,
    schedule: NoiseSchedule,
    cancel: np.ndarray | None = None,
    rng_seed: int = 0,
    noise: np.ndarray | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Closed-form jump to step t; returns (x_t, the noise actually used).

    Where the cancellation map is 1 the noise is forced to zero, so those
    cells follow the deterministic sqrt(alpha)*x0 trajectory. A noise
    array can be passed in to reuse one draw across several steps;
    otherwise it is drawn from the seed.
    """
    if not (0 <= t < schedule.steps):
        raise ValueError(f"step {t} outside schedule of {schedule.steps}")
    eps = np.random.default_rng(rng_seed).standard_normal(x0.shape) if noise is None else np.array(noise)
    if cancel is not None:
        if cancel.shape != x0.shape[-2:]:
            raise DimensionMismatch(
                f"cancellation map {cancel.shape} does not match latents {x0.shape}"
            )
        eps = eps * (1.0 - cancel[None, :, :])
    alpha = schedule.alphas_cumprod[t]
    return np.sqrt(alpha) * x0 + np.sqrt(1.0 - alpha) * eps, eps


def guided_noise(
    x_t: np.ndarray,
    t: int,
    condition: np.ndarray,
    guidance_scale: float,
    denoiser,
) -> np.ndarray:
    """Classifier-free combination of conditional and unconditional noise.

    scale * eps(x|c) + (1 - scale) * eps(x|0); at scale 1 the conditional
    prediction is returned untouched (bit-exact identity).
    """
    if guidance_scale < 0:
        raise ValueError(f"guidance scale must be nonnegative, got {guidance_scale}")
    if guidance_scale < 1:
        warnings.warn(f"guidance scale {guidance_scale} < 1 weakens conditioning")
    conditional = denoiser.predict(x_t, t, condition)
    if guidance_scale == 1.0:
        return conditional
    unconditional = denoiser.predict(x_t, t, np.zeros_like(condition))
    return guidance_scale * conditional + (1.0 - guidance_scale) * unconditional


def reverse_mean_variance(
    x_t: np.ndarray, t: int, noise_estimate: np.ndarray, schedule: NoiseSchedule
) -> tuple[np.ndarray, float]:
    """Posterior mean and variance of the single denoising step t -> t-1."""
    if not (1 <= t < schedule.steps):
        raise ValueError(f"reverse step needs 1 <= t < {schedule.steps}, got {t}")
    beta = schedule.betas[t]
    alpha = schedule.alphas_cumprod[t]
    alpha_prev = schedule.alphas_cumprod[t - 1]
    mean = (x_t - beta / np.sqrt(1.0 - alpha) * noise_estimate) / np.sqrt(1.0 - beta)
    variance = (1.0 - alpha_prev) / (1.0 - alpha) * beta
    return mean, float(variance)


def reverse_step(
    x_t: np.ndarray,
    t: int,
    noise_estimate: np.ndarray,
    schedule: NoiseSchedule,
    rng_seed: int = 0,
) -> np.ndarray:
    """Sample x_{t-1}; the final step (t == 1) returns the mean unjittered."""
    mean, variance = reverse_mean_variance(x_t, t, noise_estimate, schedule)
    if t == 1:
        return mean
    z = np.random.default_rng(rng_seed).standard_normal(x_t.shape)
    return mean + np.sqrt(variance) * z
