"""Diffusion-mask computation and region-based refinement.

The soft mask is the channel-mean absolute difference between two
caption-conditioned noise estimates at one shared noised state, min-max
rescaled into [0, 1]; binarization is inclusive at the threshold. The
refinement extends the binarized mask with the regions to alter and
subtracts the regions to keep (keep wins on conflicts); the cancellation
map marks latent cells whose covered pixels are all keep.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .captions import TokenizedCaption
from .diffusion import embed_caption, forward_sample, guided_noise
from .errors import DimensionMismatch
from .grounding import RegionMask

DEFAULT_THRESHOLD = 0.5
DEFAULT_GUIDANCE = 7.5

# provenance codes for the refined mask debug channel
OFF = 0
FROM_DIFFUSION = 1
FROM_ALTER_UNION = 2
REMOVED_BY_KEEP = 3


@dataclass
class RefinedMask:
    bits: np.ndarray  # uint8 {0,1} at image resolution
    provenance: np.ndarray | None = None  # uint8 codes above

    def popcount(self) -> int:
        return int(self.bits.sum())

    def provenance_histogram(self) -> dict[str, int]:
        if self.provenance is None:
            return {}
        names = {
            OFF: "off",
            FROM_DIFFUSION: "from_diffusion",
            FROM_ALTER_UNION: "from_alter_union",
            REMOVED_BY_KEEP: "removed_by_keep",
        }
        values, counts = np.unique(self.provenance, return_counts=True)
        return {names[int(v)]: int(c) for v, c in zip(values, counts)}

    def provenance_json(self) -> str:
        return json.dumps(self.provenance_histogram(), indent=2)


def diffusion_mask(
    image: np.ndarray,
    c1: TokenizedCaption,
    c2: TokenizedCaption,
    schedule,
    denoiser,
    codec,
    t_noise: int | None = None,
    seed: int = 0,
    guidance_scale: float = DEFAULT_GUIDANCE,
) -> np.ndarray:
    """Soft edit-evidence mask in [0, 1] at latent resolution.

    One shared noise draw produces the noised latents; both captions then
    predict the noise and the rescaled per-pixel difference is returned.
    Identical captions therefore give an exactly zero field.
    """
    if t_noise is None:
        t_noise = int(np.ceil(0.5 * schedule.steps))
    latents = codec.encode(image)
    x_t, _ = forward_sample(latents, t_noise, schedule, rng_seed=seed)
    cond1 = embed_caption(c1, denoiser.config.cond_dim)
    cond2 = embed_caption(c2, denoiser.config.cond_dim)
    est1 = guided_noise(x_t, t_noise, cond1, guidance_scale, denoiser)
    est2 = guided_noise(x_t, t_noise, cond2, guidance_scale, denoiser)
    soft = np.abs(est1 - est2).mean(axis=0)
    lo, hi = float(soft.min()), float(soft.max())
    if hi <= lo:
        # degenerate range: a zero field carries no edit signal at all,
        # a nonzero constant says "everything differs equally"
        return np.zeros_like(soft) if hi == 0.0 else np.ones_like(soft)
    return (soft - lo) / (hi - lo)


def binarize(soft: np.ndarray, threshold: float = DEFAULT_THRESHOLD) -> np.ndarray:
    """Inclusive thresholding: pixel >= threshold -> 1."""
    if not (0.0 <= threshold <= 1.0):
        raise ValueError(f"threshold must be in [0,1], got {threshold}")
    return (soft >= threshold).astype(np.uint8)


def upsample_mask(bits: np.ndarray, factor: int) -> np.ndarray:
    """Nearest-neighbor upsampling by an integer factor."""
    if factor == 1:
        return np.array(bits, copy=True)
    return np.kron(bits, np.ones((factor, factor), dtype=bits.dtype))


def refine(
    diffusion_bin: np.ndarray,
    alter: RegionMask,
    keep: RegionMask,
    factor: int = 1,
    with_provenance: bool = True,
) -> RefinedMask:
    """(upsampled diffusion mask ∪ alter) \\ keep, keep taking precedence."""
    up = upsample_mask(diffusion_bin, factor)
    if up.shape != alter.bits.shape or up.shape != keep.bits.shape:
        raise DimensionMismatch(
            f"shapes differ: diffusion {up.shape}, alter {alter.bits.shape}, keep {keep.bits.shape}"
        )
    union = up | alter.bits
    refined = union & (1 - keep.bits)
    provenance = None
    if with_provenance:
        provenance = np.zeros(refined.shape, dtype=np.uint8)
        provenance[up == 1] = FROM_DIFFUSION
        provenance[(alter.bits == 1) & (up == 0)] = FROM_ALTER_UNION
        provenance[(union == 1) & (keep.bits == 1)] = REMOVED_BY_KEEP
    return RefinedMask(bits=refined.astype(np.uint8), provenance=provenance)


def cancellation_map(keep: RegionMask, factor: int = 1) -> np.ndarray:
    """Latent-resolution cancellation: a cell cancels only when every
    image pixel it covers is keep."""
    bits = keep.bits
    if factor == 1:
        return np.array(bits, dtype=np.uint8)
    h, w = bits.shape
    if h % factor or w % factor:
        raise DimensionMismatch(f"keep mask {h}x{w} not divisible by factor {factor}")
    blocks = bits.reshape(h // factor, factor, w // factor, factor)
    return blocks.all(axis=(1, 3)).astype(np.uint8)
