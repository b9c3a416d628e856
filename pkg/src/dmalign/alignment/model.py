"""Aligner parameters: similarity head, transition weight, null score.

The similarity head maps a concatenated (source, target) span-embedding
pair through two affine layers, each followed by a parametric rectifier
with its own learnable slope. All trainable values live in float64 while
training; serialization snaps them to float32 so that a save/load cycle
is byte-stable.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .embeddings import DEFAULT_DIMENSION, HashEmbedder, SpanEmbeddingProvider

DEFAULT_MAX_SPAN = 3

# (name, shape builder) for the flat serialization order
_ARRAY_FIELDS = (
    ("w1", lambda d: (d, 2 * d)),
    ("b1", lambda d: (d,)),
    ("slope1", lambda d: ()),
    ("w2", lambda d: (d,)),
    ("b2", lambda d: ()),
    ("slope2", lambda d: ()),
    ("w_tr", lambda d: ()),
    ("null_score", lambda d: ()),
)


def prelu(z: np.ndarray, slope: float) -> np.ndarray:
    return np.where(z > 0, z, slope * z)


@dataclass
class AlignerParams:
    embedder: SpanEmbeddingProvider
    w1: np.ndarray
    b1: np.ndarray
    slope1: np.ndarray  # 0-d arrays so the optimizer can update in place
    w2: np.ndarray
    b2: np.ndarray
    slope2: np.ndarray
    w_tr: np.ndarray
    null_score: np.ndarray
    max_span: int = DEFAULT_MAX_SPAN
    _sim_cache: dict = field(default_factory=dict, repr=False)

    @property
    def dimension(self) -> int:
        return self.w1.shape[0]

    def arrays(self) -> dict[str, np.ndarray]:
        return {name: getattr(self, name) for name, _ in _ARRAY_FIELDS}

    def invalidate_cache(self) -> None:
        self._sim_cache.clear()

    def similarity(self, pairs: np.ndarray) -> tuple[np.ndarray, tuple]:
        """Score (P, 2d) concatenated span-embedding pairs; returns the
        scores plus the cache needed for a backward pass."""
        z1 = pairs @ self.w1.T + self.b1
        h = prelu(z1, float(self.slope1))
        z2 = h @ self.w2 + float(self.b2)
        out = prelu(z2, float(self.slope2))
        return out, (pairs, z1, h, z2)

    def similarity_backward(self, cache: tuple, dout: np.ndarray) -> dict[str, np.ndarray]:
        """Gradients of sum(dout * scores) w.r.t. every head parameter."""
        pairs, z1, h, z2 = cache
        s1, s2 = float(self.slope1), float(self.slope2)
        dz2 = dout * np.where(z2 > 0, 1.0, s2)
        dslope2 = np.sum(dout * np.where(z2 > 0, 0.0, z2))
        dw2 = h.T @ dz2
        db2 = np.sum(dz2)
        dh = np.outer(dz2, self.w2)
        dz1 = dh * np.where(z1 > 0, 1.0, s1)
        dslope1 = np.sum(dh * np.where(z1 > 0, 0.0, z1))
        dw1 = dz1.T @ pairs
        db1 = dz1.sum(axis=0)
        return {
            "w1": dw1,
            "b1": db1,
            "slope1": np.asarray(dslope1),
            "w2": dw2,
            "b2": np.asarray(db2),
            "slope2": np.asarray(dslope2),
            "w_tr": np.asarray(0.0),
            "null_score": np.asarray(0.0),
        }


def init_params(
    embedder: SpanEmbeddingProvider | None = None,
    max_span: int = DEFAULT_MAX_SPAN,
    seed: int = 0,
) -> AlignerParams:
    """Small random head; slopes start at the usual 0.25."""
    embedder = embedder or HashEmbedder()
    d = embedder.dimension
    rng = np.random.default_rng(seed)
    return AlignerParams(
        embedder=embedder,
        w1=rng.normal(0.0, 1.0 / np.sqrt(2 * d), size=(d, 2 * d)),
        b1=np.zeros(d),
        slope1=np.asarray(0.25),
        w2=rng.normal(0.0, 1.0 / np.sqrt(d), size=d),
        b2=np.asarray(0.0),
        slope2=np.asarray(0.25),
        w_tr=np.asarray(1.0),
        null_score=np.asarray(0.0),
        max_span=max_span,
    )


def init_difference_params(
    embedder: SpanEmbeddingProvider | None = None,
    max_span: int = DEFAULT_MAX_SPAN,
    scale: float = 0.5,
    offset: float = 4.0,
) -> AlignerParams:
    """Head initialized as an exact embedding-difference detector.

    With w1 = [I | -I] the hidden layer computes x - y, and a rectifier
    slope of -1 turns it into |x - y| elementwise, so the output starts as
    offset - scale * l1(x, y): maximal for identical spans, lower the
    further apart two spans are. Training then calibrates the scales and
    the transition/null trade-off instead of having to discover identity
    matching from scratch.
    """
    embedder = embedder or HashEmbedder()
    d = embedder.dimension
    eye = np.eye(d)
    return AlignerParams(
        embedder=embedder,
        w1=np.concatenate([eye, -eye], axis=1),
        b1=np.zeros(d),
        slope1=np.asarray(-1.0),
        w2=np.full(d, -scale),
        b2=np.asarray(offset),
        slope2=np.asarray(1.0),
        w_tr=np.asarray(1.0),
        null_score=np.asarray(0.0),
        max_span=max_span,
    )


def save_params(params: AlignerParams, path) -> None:
    """Write the flat little-endian float32 blob plus its JSON sidecar."""
    path = Path(path)
    blob = b"".join(
        np.ascontiguousarray(arr, dtype="<f4").tobytes()
        for arr in params.arrays().values()
    )
    path.write_bytes(blob)
    sidecar = {
        "dimension": params.dimension,
        "max_span": params.max_span,
        "embedder": params.embedder.name,
        "arrays": [[name, list(np.shape(getattr(params, name)))] for name, _ in _ARRAY_FIELDS],
    }
    path.with_suffix(".json").write_text(json.dumps(sidecar, indent=2), "utf-8")


def load_params(path, embedder: SpanEmbeddingProvider | None = None) -> AlignerParams:
    path = Path(path)
    sidecar = json.loads(path.with_suffix(".json").read_text("utf-8"))
    d = int(sidecar["dimension"])
    if embedder is None:
        if sidecar["embedder"] != "trigram-hash-v1":
            raise ValueError(
                f"params were trained with embedder {sidecar['embedder']!r}; pass it explicitly"
            )
        embedder = HashEmbedder(d)
    raw = np.frombuffer(path.read_bytes(), dtype="<f4").astype(np.float64)
    values = {}
    offset = 0
    for name, shape in sidecar["arrays"]:
        count = int(np.prod(shape)) if shape else 1
        arr = raw[offset : offset + count].reshape(shape)
        values[name] = arr if shape else np.asarray(arr.reshape(()))
        offset += count
    return AlignerParams(embedder=embedder, max_span=int(sidecar["max_span"]), **values)


def snap_to_float32(params: AlignerParams) -> None:
    """Round every trainable value to its float32 representation so a
    subsequent save/load round-trip is bit-exact."""
    for name, _ in _ARRAY_FIELDS:
        arr = getattr(params, name)
        setattr(params, name, np.asarray(arr.astype("<f4"), dtype=np.float64))
    params.invalidate_cache()
