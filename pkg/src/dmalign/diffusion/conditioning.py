"""Caption conditioning vectors.

A caption embeds as an L2-normalized bag of hashed tokens; the zero
vector is reserved for the unconditional branch of guided prediction.
Order-insensitive by construction.
"""

from __future__ import annotations

import hashlib

import numpy as np

from ..captions import TokenizedCaption

DEFAULT_CONDITION_DIM = 32


def embed_caption(caption: TokenizedCaption | None, dimension: int = DEFAULT_CONDITION_DIM) -> np.ndarray:
    """Bag-of-hashed-tokens vector; None or empty caption gives zeros."""
    vec = np.zeros(dimension)
    if caption is None or not caption.tokens:
        return vec
    for token in caption.tokens:
        digest = hashlib.sha256(token.encode("utf-8")).digest()
        index = int.from_bytes(digest[:8], "little") % dimension
        sign = 1.0 if digest[8] & 1 else -1.0
        vec[index] += sign
    norm = np.linalg.norm(vec)
    return vec / norm if norm > 0 else vec


def unconditional(dimension: int = DEFAULT_CONDITION_DIM) -> np.ndarray:
    return np.zeros(dimension)
