"""Masked reverse-diffusion inpainting.

The masked region regenerates under the target caption while the rest of
the latents are re-pinned every step to the forward-noised source; a
final pixel-level composite makes the background guarantee exact: pixels
outside the refined mask are bit-equal to the input image.
"""

from __future__ import annotations

import numpy as np

from .captions import TokenizedCaption
from .diffusion import embed_caption, forward_sample, guided_noise, reverse_step
from .errors import DimensionMismatch
from .masks import RefinedMask
from .seeds import derive_seed


def downsample_majority(bits: np.ndarray, factor: int) -> np.ndarray:
    """Majority vote per f x f block; exact ties count as edit."""
    if factor == 1:
        return np.array(bits, copy=True)
    h, w = bits.shape
    if h % factor or w % factor:
        raise DimensionMismatch(f"mask {h}x{w} not divisible by factor {factor}")
    blocks = bits.reshape(h // factor, factor, w // factor, factor).mean(axis=(1, 3))
    return (blocks >= 0.5).astype(np.uint8)


def inpaint(
    image: np.ndarray,
    refined: RefinedMask,
    cancel: np.ndarray | None,
    c2: TokenizedCaption,
    schedule,
    denoiser,
    codec,
    guidance_scale: float = 7.5,
    seed: int = 0,
    latent_sink=None,
) -> np.ndarray:
    """Regenerate the refined-mask region of the image under caption c2."""
    if refined.bits.shape != image.shape[-2:]:
        raise DimensionMismatch(
            f"refined mask {refined.bits.shape} does not match image {image.shape}"
        )
    if refined.popcount() == 0:
        return np.array(image, copy=True)

    latents0 = codec.encode(image)
    mask_latent = downsample_majority(refined.bits, codec.factor)[None, :, :].astype(float)
    condition = embed_caption(c2, denoiser.config.cond_dim)
    steps = schedule.steps

    x_t, _ = forward_sample(
        latents0, steps - 1, schedule, cancel=cancel, rng_seed=derive_seed(seed, "init")
    )
    if latent_sink is not None:
        latent_sink(f"x_{steps - 1}", x_t)
    for t in range(steps - 1, 0, -1):
        estimate = guided_noise(x_t, t, condition, guidance_scale, denoiser)
        x_prev = reverse_step(x_t, t, estimate, schedule, rng_seed=derive_seed(seed, "rev", t))
        pinned, _ = forward_sample(
            latents0, t - 1, schedule, cancel=cancel, rng_seed=derive_seed(seed, "fwd", t - 1)
        )
        x_t = mask_latent * x_prev + (1.0 - mask_latent) * pinned
        if latent_sink is not None:
            latent_sink(f"x_{t - 1}", x_t)

    decoded = np.clip(codec.decode(x_t), 0.0, 1.0)
    mask_pixel = refined.bits[None, :, :].astype(float)
    return mask_pixel * decoded + (1.0 - mask_pixel) * image
