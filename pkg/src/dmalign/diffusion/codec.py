"""Image <-> latent codecs.

Images and latents are float64 arrays of shape (C, H, W) in [0, 1]. The
identity codec is the default: it makes every exactness guarantee in the
pipeline trivial to honor. The pooling codec averages f x f blocks on the
way down and upsamples bilinearly on the way up, for cheaper sampling at
larger image sizes.
"""

from __future__ import annotations

import numpy as np

from ..errors import BadDimensions


class IdentityCodec:
    """Latents are the image itself."""

    factor = 1
    name = "identity"

    def encode(self, image: np.ndarray) -> np.ndarray:
        return np.array(image, copy=True)

    def decode(self, latents: np.ndarray) -> np.ndarray:
        return np.clip(latents, 0.0, 1.0)


class PoolingCodec:
    """f x f average-pool down, bilinear up.

    The upsampled field gets a per-block mean correction so that pooling
    it again recovers the latents exactly; decode therefore leaves values
    unclipped and the caller clamps before display if needed.
    """

    name = "pooling"

    def __init__(self, factor: int = 4):
        if factor < 1:
            raise BadDimensions(f"pooling factor must be positive, got {factor}")
        self.factor = factor

    def encode(self, image: np.ndarray) -> np.ndarray:
        c, h, w = image.shape
        f = self.factor
        if h % f or w % f:
            raise BadDimensions(f"image {h}x{w} not divisible by codec factor {f}")
        return image.reshape(c, h // f, f, w // f, f).mean(axis=(2, 4))

    def decode(self, latents: np.ndarray) -> np.ndarray:
        f = self.factor
        up = _bilinear_upsample(latents, f)
        residual = latents - self.encode(up)
        return up + np.kron(residual, np.ones((f, f)))


def _bilinear_upsample(grid: np.ndarray, factor: int) -> np.ndarray:
    """Upsample (C, h, w) by an integer factor, aligning cell centers."""
    if factor == 1:
        return np.array(grid, copy=True)
    c, h, w = grid.shape
    out_h, out_w = h * factor, w * factor
    # source coordinates of each output pixel center
    ys = (np.arange(out_h) + 0.5) / factor - 0.5
    xs = (np.arange(out_w) + 0.5) / factor - 0.5
    y0 = np.clip(np.floor(ys).astype(int), 0, h - 1)
    x0 = np.clip(np.floor(xs).astype(int), 0, w - 1)
    y1 = np.clip(y0 + 1, 0, h - 1)
    x1 = np.clip(x0 + 1, 0, w - 1)
    wy = np.clip(ys - y0, 0.0, 1.0)[None, :, None]
    wx = np.clip(xs - x0, 0.0, 1.0)[None, None, :]
    top = grid[:, y0][:, :, x0] * (1 - wx) + grid[:, y0][:, :, x1] * wx
    bottom = grid[:, y1][:, :, x0] * (1 - wx) + grid[:, y1][:, :, x1] * wx
    return top * (1 - wy) + bottom * wy
