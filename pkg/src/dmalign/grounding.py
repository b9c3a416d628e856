"""Noun-to-region grounding via pluggable providers.

The fixture provider serves pre-segmented masks from a directory of
``<lemma>.pgm`` files, keyed by stemmed noun lemma, for bit-exact tests.
The remote provider posts to a segmentation service speaking a minimal
HTTP contract: POST /ground with JSON {image_b64 (PNG), prompt} returning
{mask_b64 (PGM), confidence}. Grounding misses are not fatal; they come
back as empty masks with zero confidence so the diffusion mask alone
drives those edits.
"""

from __future__ import annotations

import base64
import logging
import os
from dataclasses import dataclass
from pathlib import Path

import httpx
import numpy as np

from .captions import stem
from .errors import DimensionMismatch, ProviderUnavailable
from .imaging import image_to_bytes, pgm_bytes, pgm_from_bytes

logger = logging.getLogger(__name__)

DEFAULT_MIN_CONFIDENCE = 0.5
GROUNDING_URL_ENV = "DM_ALIGN_GROUNDING_URL"


@dataclass
class RegionMask:
    bits: np.ndarray  # uint8 {0,1}, shape (H, W)

    @property
    def height(self) -> int:
        return self.bits.shape[0]

    @property
    def width(self) -> int:
        return self.bits.shape[1]

    def popcount(self) -> int:
        return int(self.bits.sum())

    @classmethod
    def empty(cls, height: int, width: int) -> "RegionMask":
        return cls(np.zeros((height, width), dtype=np.uint8))


@dataclass(frozen=True)
class GroundingRequest:
    prompt: str
    lemma: str


@dataclass
class GroundingResult:
    noun: str
    mask: RegionMask
    confidence: float


class FixtureGroundingProvider:
    """Serves masks from a directory of <stemmed lemma>.pgm files."""

    def __init__(self, directory):
        self.directory = Path(directory)

    def ground(self, image: np.ndarray, request: GroundingRequest) -> GroundingResult:
        height, width = image.shape[1], image.shape[2]
        path = self.directory / f"{stem(request.lemma)}.pgm"
        if not path.exists():
            logger.warning("no grounding fixture for %r (looked at %s)", request.lemma, path)
            return GroundingResult(request.lemma, RegionMask.empty(height, width), 0.0)
        bits = pgm_from_bytes(path.read_bytes())
        return GroundingResult(request.lemma, RegionMask(bits.astype(np.uint8)), 1.0)


class RemoteGroundingProvider:
    """Client for an external segmentation service."""

    def __init__(self, url: str | None = None, timeout: float = 30.0):
        self.url = url or os.environ.get(GROUNDING_URL_ENV)
        if not self.url:
            raise ProviderUnavailable(
                f"no grounding service URL; set {GROUNDING_URL_ENV} or pass url="
            )
        self.timeout = timeout

    def ground(self, image: np.ndarray, request: GroundingRequest) -> GroundingResult:
        payload = {
            "image_b64": base64.b64encode(image_to_bytes(image)).decode("ascii"),
            "prompt": request.prompt,
        }
        try:
            response = httpx.post(f"{self.url}/ground", json=payload, timeout=self.timeout)
            response.raise_for_status()
        except httpx.HTTPError as exc:
            raise ProviderUnavailable(f"grounding service failed: {exc}") from exc
        body = response.json()
        bits = pgm_from_bytes(base64.b64decode(body["mask_b64"]))
        confidence = float(body.get("confidence", 0.0))
        return GroundingResult(request.lemma, RegionMask(bits.astype(np.uint8)), confidence)


def ground_nouns(
    image: np.ndarray, requests: list[GroundingRequest], provider
) -> list[GroundingResult]:
    """One result per request, in order; the image is never modified."""
    if not requests:
        raise ValueError("ground_nouns needs at least one noun")
    return [provider.ground(image, request) for request in requests]


def union_regions(
    results: list[GroundingResult],
    min_confidence: float = DEFAULT_MIN_CONFIDENCE,
    height: int | None = None,
    width: int | None = None,
) -> RegionMask:
    """Pixelwise OR over sufficiently confident masks."""
    kept = [r.mask.bits for r in results if r.confidence >= min_confidence]
    if not kept:
        if height is None or width is None:
            if not results:
                raise ValueError("cannot size an empty union without dimensions")
            height, width = results[0].mask.bits.shape
        return RegionMask.empty(height, width)
    shape = kept[0].shape
    for bits in kept[1:]:
        if bits.shape != shape:
            raise DimensionMismatch(f"mask shapes differ: {bits.shape} vs {shape}")
    out = np.zeros(shape, dtype=np.uint8)
    for bits in kept:
        out |= bits.astype(np.uint8)
    return RegionMask(out)


def mask_to_pgm_bytes(mask: RegionMask) -> bytes:
    return pgm_bytes(mask.bits)
