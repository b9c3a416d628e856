"""Span embedding providers for the aligner.

The default provider hashes character trigrams so tests never depend on
pretrained weights; a file-backed provider ingests precomputed embeddings
(e.g. exported from a contextual encoder) keyed by caption text and span.
"""

from __future__ import annotations

import hashlib
import json
from typing import Protocol

import numpy as np

from ..captions import TokenizedCaption
from ..errors import DimensionMismatch, MissingEmbedding
from .types import Span

DEFAULT_DIMENSION = 64


class SpanEmbeddingProvider(Protocol):
    name: str
    dimension: int

    def embed(self, caption: TokenizedCaption, span: Span) -> np.ndarray: ...


class HashEmbedder:
    """Deterministic trigram-hash embeddings; byte-stable across runs.

    Every character trigram maps to a dense random-sign vector seeded by
    its digest, and a token embeds as the normalized sum over its
    trigrams. Dense codes keep distances between unrelated tokens tightly
    concentrated, which the aligner's score calibration relies on.
    """

    def __init__(self, dimension: int = DEFAULT_DIMENSION):
        self.dimension = dimension
        self.name = "trigram-hash-v1"
        self._token_cache: dict[str, np.ndarray] = {}
        self._trigram_cache: dict[str, np.ndarray] = {}

    def _trigram_vector(self, trigram: str) -> np.ndarray:
        vec = self._trigram_cache.get(trigram)
        if vec is None:
            digest = hashlib.sha256(trigram.encode("utf-8")).digest()
            seed = int.from_bytes(digest[:8], "little")
            bits = np.random.default_rng(seed).integers(0, 2, size=self.dimension)
            vec = bits * 2.0 - 1.0
            self._trigram_cache[trigram] = vec
        return vec

    def _token_vector(self, token: str) -> np.ndarray:
        vec = self._token_cache.get(token)
        if vec is not None:
            return vec
        padded = f"^{token}$"
        vec = np.zeros(self.dimension)
        for k in range(len(padded) - 2):
            vec = vec + self._trigram_vector(padded[k : k + 3])
        norm = np.linalg.norm(vec)
        if norm > 0:
            vec = vec / norm
        self._token_cache[token] = vec
        return vec

    def embed(self, caption: TokenizedCaption, span: Span) -> np.ndarray:
        tokens = caption.tokens[span.start : span.end]
        mean = np.mean([self._token_vector(tok) for tok in tokens], axis=0)
        # renormalize so multi-token spans are not systematically closer
        # to everything than single tokens are
        norm = np.linalg.norm(mean)
        return mean / norm if norm > 0 else mean


class FileEmbedder:
    """Passthrough provider backed by a JSON file of precomputed vectors.

    File layout: {"dimension": d, "captions": {"<text>": {"<start>:<end>":
    [floats]}}} where <text> is the raw caption string.
    """

    def __init__(self, path):
        with open(path, encoding="utf-8") as fh:
            payload = json.load(fh)
        self.dimension = int(payload["dimension"])
        self.name = payload.get("name", "file-embeddings")
        self._table = payload["captions"]

    def embed(self, caption: TokenizedCaption, span: Span) -> np.ndarray:
        spans = self._table.get(caption.text)
        key = f"{span.start}:{span.end}"
        if spans is None or key not in spans:
            raise MissingEmbedding(f"no embedding for {caption.text!r} span {key}")
        vec = np.asarray(spans[key], dtype=np.float64)
        if vec.shape != (self.dimension,):
            raise DimensionMismatch(
                f"stored vector has {vec.shape[0]} dims, file declares {self.dimension}"
            )
        return vec


def embed_span(
    caption: TokenizedCaption,
    span: Span,
    provider: SpanEmbeddingProvider,
    expected_dimension: int | None = None,
) -> np.ndarray:
    """Embed one span, checking bounds and provider dimension."""
    if not (0 <= span.start < span.end <= len(caption.tokens)):
        raise ValueError(f"span {span} outside caption of {len(caption.tokens)} tokens")
    vec = np.asarray(provider.embed(caption, span), dtype=np.float64)
    if vec.shape != (provider.dimension,):
        raise DimensionMismatch(
            f"provider returned {vec.shape}, declared dimension {provider.dimension}"
        )
    if expected_dimension is not None and provider.dimension != expected_dimension:
        raise DimensionMismatch(
            f"provider dimension {provider.dimension} != expected {expected_dimension}"
        )
    return vec
