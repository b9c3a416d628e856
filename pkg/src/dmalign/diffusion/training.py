"""Noise-prediction training for the toy denoiser."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from ..captions import TokenizedCaption, analyze
from ..errors import NonFiniteLoss
from .conditioning import embed_caption
from .denoiser import ConvDenoiser, DenoiserConfig
from .schedule import DEFAULT_TRAINING_STEPS, NoiseSchedule, make_schedule

logger = logging.getLogger(__name__)


@dataclass
class TrainConfig:
    epochs: int = 30
    learning_rate: float = 1e-3
    seed: int = 0
    batch_size: int = 8
    steps: int = DEFAULT_TRAINING_STEPS
    # probability of replacing the caption with the zero vector so the
    # unconditional branch of guided prediction is trained too
    uncond_probability: float = 0.15


@dataclass
class DenoiserAdam:
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0
    m: list = field(default_factory=list)
    v: list = field(default_factory=list)

    def update(self, denoiser: ConvDenoiser, grads: list[dict]) -> None:
        if not self.m:
            self.m = [{k: np.zeros_like(a) for k, a in layer.arrays().items()} for layer in denoiser.layers]
            self.v = [{k: np.zeros_like(a) for k, a in layer.arrays().items()} for layer in denoiser.layers]
        self.step += 1
        for layer, g, m, v in zip(denoiser.layers, grads, self.m, self.v):
            for name, arr in layer.arrays().items():
                grad = g[name]
                m[name] = self.beta1 * m[name] + (1 - self.beta1) * grad
                v[name] = self.beta2 * v[name] + (1 - self.beta2) * grad * grad
                m_hat = m[name] / (1 - self.beta1**self.step)
                v_hat = v[name] / (1 - self.beta2**self.step)
                setattr(layer, name, arr - self.lr * m_hat / (np.sqrt(v_hat) + self.eps))


def _prepare(dataset, codec):
    prepared = []
    for image, caption in dataset:
        if isinstance(caption, str):
            caption = analyze(caption)
        prepared.append((codec.encode(image), caption))
    return prepared


def train_denoiser(
    dataset: list[tuple[np.ndarray, TokenizedCaption | str]],
    config: TrainConfig = TrainConfig(),
    codec=None,
    denoiser: ConvDenoiser | None = None,
    denoiser_config: DenoiserConfig | None = None,
    schedule: NoiseSchedule | None = None,
) -> tuple[ConvDenoiser, list[float]]:
    """Minimize the squared error between drawn and predicted noise.

    Per sample the loss is the summed squared error over latent elements
    (so a zero predictor scores around the element count); the reported
    epoch loss averages over samples. Deterministic for a fixed seed.
    """
    if not dataset:
        raise ValueError("dataset must not be empty")
    if codec is None:
        from .codec import IdentityCodec

        codec = IdentityCodec()
    schedule = schedule or make_schedule(config.steps)
    prepared = _prepare(dataset, codec)
    channels = prepared[0][0].shape[0]
    if denoiser is None:
        cfg = denoiser_config or DenoiserConfig(channels=channels)
        denoiser = ConvDenoiser.create(cfg, seed=config.seed)
    conditions = [embed_caption(cap, denoiser.config.cond_dim) for _, cap in prepared]

    rng = np.random.default_rng(config.seed)
    optimizer = DenoiserAdam(lr=config.learning_rate)
    history = []
    for epoch in range(config.epochs):
        order = rng.permutation(len(prepared))
        epoch_loss = 0.0
        for start in range(0, len(order), config.batch_size):
            batch = order[start : start + config.batch_size]
            batch_grads = None
            batch_loss = 0.0
            for k in batch:
                x0, _ = prepared[k]
                t = int(rng.integers(0, schedule.steps))
                eps = rng.standard_normal(x0.shape)
                alpha = schedule.alphas_cumprod[t]
                x_t = np.sqrt(alpha) * x0 + np.sqrt(1.0 - alpha) * eps
                condition = conditions[k]
                if rng.uniform() < config.uncond_probability:
                    condition = np.zeros_like(condition)
                loss, grads = denoiser.loss_and_grads(x_t, t, condition, eps)
                batch_loss += loss
                if batch_grads is None:
                    batch_grads = grads
                else:
                    for acc, g in zip(batch_grads, grads):
                        for name in g:
                            acc[name] = acc[name] + g[name]
            if not np.isfinite(batch_loss):
                raise NonFiniteLoss(f"denoiser loss became {batch_loss}")
            scale = 1.0 / len(batch)
            for g in batch_grads:
                for name in g:
                    g[name] = g[name] * scale
            optimizer.update(denoiser, batch_grads)
            epoch_loss += batch_loss
        epoch_loss /= len(prepared)
        history.append(epoch_loss)
        logger.info("denoiser epoch %d: loss %.3f", epoch + 1, epoch_loss)
    return denoiser, history
