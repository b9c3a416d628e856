"""Toy convolutional noise predictor with hand-written backprop.

The network maps latents (C, H, W) plus a timestep and a caption vector
to a noise estimate of the same shape: a stack of same-padded 3x3 convs
with ReLU between them, where each hidden layer receives the sinusoidal
timestep features and the caption embedding as learned per-channel
biases. Two hidden layers give a 7-pixel receptive field.

Everything is float64 numpy; gradients come from an explicit backward
pass (finite differences arbitrate in the tests).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .conditioning import DEFAULT_CONDITION_DIM


@dataclass(frozen=True)
class DenoiserConfig:
    channels: int = 3
    hidden: int = 16
    depth: int = 2  # hidden conv layers; receptive field = 3 + 2*depth
    cond_dim: int = DEFAULT_CONDITION_DIM
    time_dim: int = 16
    time_base: float = 50.0  # wavelength scale of the timestep features


def timestep_features(t: int, dim: int, base: float) -> np.ndarray:
    half = dim // 2
    freqs = base ** (-np.arange(half) / max(half - 1, 1))
    angles = t * freqs
    return np.concatenate([np.sin(angles), np.cos(angles)])


def _conv_forward(x, kernel, bias):
    xp = np.pad(x, ((0, 0), (1, 1), (1, 1)))
    patches = sliding_window_view(xp, (3, 3), axis=(1, 2))  # (Cin, H, W, 3, 3)
    out = np.einsum("ihwkl,oikl->ohw", patches, kernel) + bias[:, None, None]
    return out, patches


def _conv_backward(dout, patches, kernel):
    dkernel = np.einsum("ohw,ihwkl->oikl", dout, patches)
    dbias = dout.sum(axis=(1, 2))
    dout_p = np.pad(dout, ((0, 0), (2, 2), (2, 2)))
    dpatches = sliding_window_view(dout_p, (3, 3), axis=(1, 2))
    flipped = kernel[:, :, ::-1, ::-1]
    dxp = np.einsum("ohwkl,oikl->ihw", dpatches, flipped)
    return dxp[:, 1:-1, 1:-1], dkernel, dbias


@dataclass
class ConvLayer:
    kernel: np.ndarray  # (Cout, Cin, 3, 3)
    bias: np.ndarray  # (Cout,)
    w_time: np.ndarray | None = None  # (Cout, time_dim)
    w_cond: np.ndarray | None = None  # (Cout, cond_dim)

    def arrays(self):
        out = {"kernel": self.kernel, "bias": self.bias}
        if self.w_time is not None:
            out["w_time"] = self.w_time
        if self.w_cond is not None:
            out["w_cond"] = self.w_cond
        return out


@dataclass
class ConvDenoiser:
    config: DenoiserConfig
    layers: list[ConvLayer]
    _grads: list[dict] | None = field(default=None, repr=False)

    @classmethod
    def create(cls, config: DenoiserConfig = DenoiserConfig(), seed: int = 0) -> "ConvDenoiser":
        rng = np.random.default_rng(seed)
        c, f = config.channels, config.hidden
        sizes = [c] + [f] * config.depth + [c]
        layers = []
        for i in range(len(sizes) - 1):
            cin, cout = sizes[i], sizes[i + 1]
            kernel = rng.normal(0.0, 1.0 / np.sqrt(cin * 9), size=(cout, cin, 3, 3))
            hidden = i < len(sizes) - 2  # the output projection is uninjected
            layers.append(
                ConvLayer(
                    kernel=kernel,
                    bias=np.zeros(cout),
                    w_time=rng.normal(0.0, 0.05, (cout, config.time_dim)) if hidden else None,
                    w_cond=rng.normal(0.0, 0.05, (cout, config.cond_dim)) if hidden else None,
                )
            )
        return cls(config=config, layers=layers)

    def parameter_count(self) -> int:
        return sum(arr.size for layer in self.layers for arr in layer.arrays().values())

    def predict(self, x_t: np.ndarray, t: int, condition: np.ndarray) -> np.ndarray:
        out, _ = self._forward(x_t, t, condition)
        return out

    def _forward(self, x_t, t, condition):
        t_feat = timestep_features(t, self.config.time_dim, self.config.time_base)
        caches = []
        h = x_t
        last = len(self.layers) - 1
        for i, layer in enumerate(self.layers):
            pre, patches = _conv_forward(h, layer.kernel, layer.bias)
            if layer.w_time is not None:
                pre = pre + (layer.w_time @ t_feat)[:, None, None]
            if layer.w_cond is not None:
                pre = pre + (layer.w_cond @ condition)[:, None, None]
            post = np.maximum(pre, 0.0) if i != last else pre
            caches.append((patches, pre, t_feat, condition))
            h = post
        return h, caches

    def loss_and_grads(self, x_t, t, condition, target_noise):
        """Summed squared error against the target plus parameter grads."""
        out, caches = self._forward(x_t, t, condition)
        diff = out - target_noise
        loss = float(np.sum(diff * diff))
        grads = []
        dh = 2.0 * diff
        last = len(self.layers) - 1
        for i in range(last, -1, -1):
            patches, pre, t_feat, cond = caches[i]
            dpre = dh if i == last else dh * (pre > 0)
            layer_grads = {}
            if self.layers[i].w_time is not None:
                layer_grads["w_time"] = np.outer(dpre.sum(axis=(1, 2)), t_feat)
            if self.layers[i].w_cond is not None:
                layer_grads["w_cond"] = np.outer(dpre.sum(axis=(1, 2)), cond)
            dh, dkernel, dbias = _conv_backward(dpre, patches, self.layers[i].kernel)
            layer_grads["kernel"] = dkernel
            layer_grads["bias"] = dbias
            grads.append(layer_grads)
        grads.reverse()
        return loss, grads


def save_denoiser(denoiser: ConvDenoiser, path) -> None:
    """Flat little-endian float32 blob plus a JSON sidecar of shapes."""
    path = Path(path)
    chunks = []
    shapes = []
    for idx, layer in enumerate(denoiser.layers):
        for name, arr in layer.arrays().items():
            chunks.append(np.ascontiguousarray(arr, dtype="<f4").tobytes())
            shapes.append([idx, name, list(arr.shape)])
    path.write_bytes(b"".join(chunks))
    cfg = denoiser.config
    sidecar = {
        "config": {
            "channels": cfg.channels,
            "hidden": cfg.hidden,
            "depth": cfg.depth,
            "cond_dim": cfg.cond_dim,
            "time_dim": cfg.time_dim,
            "time_base": cfg.time_base,
        },
        "arrays": shapes,
    }
    path.with_suffix(".json").write_text(json.dumps(sidecar, indent=2), "utf-8")


def load_denoiser(path) -> ConvDenoiser:
    path = Path(path)
    sidecar = json.loads(path.with_suffix(".json").read_text("utf-8"))
    config = DenoiserConfig(**sidecar["config"])
    denoiser = ConvDenoiser.create(config)
    raw = np.frombuffer(path.read_bytes(), dtype="<f4").astype(np.float64)
    offset = 0
    for idx, name, shape in sidecar["arrays"]:
        count = int(np.prod(shape))
        setattr(denoiser.layers[idx], name, raw[offset : offset + count].reshape(shape))
        offset += count
    return denoiser


def snap_denoiser_to_float32(denoiser: ConvDenoiser) -> None:
    for layer in denoiser.layers:
        for name, arr in layer.arrays().items():
            setattr(layer, name, np.asarray(arr.astype("<f4"), dtype=np.float64))
