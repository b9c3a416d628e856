"""Noise schedules for the forward/reverse processes.

Conventions used throughout: ``betas[t]`` is the per-step noise variance
at 0-based step t, and ``alphas_cumprod[t]`` is the running product of
(1 - beta) up to and including t, so the forward closed form reads
x_t = sqrt(alphas_cumprod[t]) * x0 + sqrt(1 - alphas_cumprod[t]) * eps.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import InvalidScheduleBounds

DEFAULT_BETA_START = 1e-4
DEFAULT_BETA_END = 2e-2
DEFAULT_INFERENCE_STEPS = 50
DEFAULT_TRAINING_STEPS = 1000


@dataclass(frozen=True)
class NoiseSchedule:
    betas: np.ndarray
    alphas_cumprod: np.ndarray

    @property
    def steps(self) -> int:
        return len(self.betas)

    def __post_init__(self):
        if len(self.betas) != len(self.alphas_cumprod):
            raise InvalidScheduleBounds("betas and alphas_cumprod must have equal length")


def make_schedule(
    steps: int = DEFAULT_INFERENCE_STEPS,
    beta_start: float = DEFAULT_BETA_START,
    beta_end: float = DEFAULT_BETA_END,
) -> NoiseSchedule:
    """Linear beta ramp with the exact running alpha product."""
    if steps < 1:
        raise InvalidScheduleBounds(f"need at least one step, got {steps}")
    if not (0.0 < beta_start <= beta_end < 1.0):
        raise InvalidScheduleBounds(
            f"betas must satisfy 0 < start <= end < 1, got ({beta_start}, {beta_end})"
        )
    betas = np.linspace(beta_start, beta_end, steps)
    alphas_cumprod = np.cumprod(1.0 - betas)
    return NoiseSchedule(betas=betas, alphas_cumprod=alphas_cumprod)


def schedule_from_arrays(betas) -> NoiseSchedule:
    """Build a schedule from explicit betas (used by tests and fixtures)."""
    betas = np.asarray(betas, dtype=np.float64)
    if betas.ndim != 1 or not np.all((betas > 0) & (betas < 1)):
        raise InvalidScheduleBounds("betas must be a 1-D array inside (0, 1)")
    return NoiseSchedule(betas=betas, alphas_cumprod=np.cumprod(1.0 - betas))


def subsampled_schedule(
    inference_steps: int = DEFAULT_INFERENCE_STEPS,
    train_steps: int = DEFAULT_TRAINING_STEPS,
    beta_start: float = DEFAULT_BETA_START,
    beta_end: float = DEFAULT_BETA_END,
) -> NoiseSchedule:
    """Inference schedule that strides through the full training ramp.

    Picks evenly spaced alpha products from the train_steps linear
    schedule so a short chain still ends in (almost) pure noise, and
    derives the per-step betas that realize those products.
    """
    if inference_steps < 1 or inference_steps > train_steps:
        raise InvalidScheduleBounds(
            f"need 1 <= inference steps <= {train_steps}, got {inference_steps}"
        )
    full = make_schedule(train_steps, beta_start, beta_end)
    picks = np.linspace(0, train_steps - 1, inference_steps).round().astype(int)
    alphas = full.alphas_cumprod[picks]
    prev = np.concatenate([[1.0], alphas[:-1]])
    betas = 1.0 - alphas / prev
    return NoiseSchedule(betas=betas, alphas_cumprod=alphas)
