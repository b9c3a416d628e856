"""Evaluation metrics and report assembly.

Feature extraction is pluggable so real pretrained networks can be
swapped in through precomputed-feature files; the bundled desk-scale
providers are deterministic functions of the pixels. Set-level distance
(distribution distance over feature vectors) needs at least two images
per side; single-pair reports leave that field empty and the batch
evaluator fills it over the whole manifest.
"""

from __future__ import annotations

import csv
import io
import json
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DegenerateCovariance, DimensionMismatch, EmptyMaskRegion, ZeroVector
from .imaging import read_dmg1

EIGENVALUE_CLIP_WARN = 1e-8


# ---------------------------------------------------------------------------
# feature providers

class PixelStatsFeatureProvider:
    """Flattened average-pooled pixels; one vector per image."""

    def __init__(self, grid: int = 8):
        self.grid = grid
        self.name = f"pixel-stats-{grid}x{grid}-v1"

    def features(self, image: np.ndarray) -> np.ndarray:
        c, h, w = image.shape
        gh, gw = min(self.grid, h), min(self.grid, w)
        bh, bw = h // gh, w // gw
        pooled = image[:, : gh * bh, : gw * bw].reshape(c, gh, bh, gw, bw).mean(axis=(2, 4))
        return pooled.reshape(-1)


class RawPyramidFeatureProvider:
    """Two-level average pyramid with per-position channel normalization."""

    def __init__(self, levels: int = 2, eps: float = 1e-8):
        self.levels = levels
        self.eps = eps
        self.name = f"raw-pyramid-{levels}-v1"

    def layers(self, image: np.ndarray) -> list[np.ndarray]:
        out = []
        current = image
        for level in range(self.levels):
            norms = np.sqrt((current * current).sum(axis=0, keepdims=True))
            out.append(current / (norms + self.eps))
            if level + 1 < self.levels:
                c, h, w = current.shape
                if h % 2 or w % 2:
                    raise DimensionMismatch(f"level {level} size {h}x{w} not halvable")
                current = current.reshape(c, h // 2, 2, w // 2, 2).mean(axis=(2, 4))
        return out


class IdentityFeatureProvider:
    """Raw pixels as a single layer; the reference point for the
    perceptual distance definition."""

    name = "identity-v1"

    def layers(self, image: np.ndarray) -> list[np.ndarray]:
        return [np.array(image, copy=True)]


class HashProjectionImageEmbedder:
    """Image embedding comparable with hashed caption embeddings: pooled
    pixels through a fixed seeded projection, L2-normalized."""

    def __init__(self, dimension: int = 32, grid: int = 8, seed: int = 1234):
        self.dimension = dimension
        self.pixels = PixelStatsFeatureProvider(grid)
        self.name = f"hash-projection-{dimension}-v1"
        self._seed = seed
        self._projection: np.ndarray | None = None

    def embed(self, image: np.ndarray) -> np.ndarray:
        feats = self.pixels.features(image)
        if self._projection is None or self._projection.shape[1] != feats.size:
            rng = np.random.default_rng(self._seed)
            self._projection = rng.normal(size=(self.dimension, feats.size))
        vec = self._projection @ feats
        norm = np.linalg.norm(vec)
        return vec / norm if norm > 0 else vec


class FileFeatureProvider:
    """Precomputed features from DMG1 files listed in a manifest JSON.

    Manifest layout: {"name": ..., "features": {"<image filename>":
    "<path to .dmg1>"}}. A (1, 1, N) grid serves as a vector feature;
    multi-entry lists are stored as several files "a.dmg1;b.dmg1".
    """

    def __init__(self, manifest_path):
        manifest_path = Path(manifest_path)
        payload = json.loads(manifest_path.read_text("utf-8"))
        self.name = payload.get("name", "file-features")
        self.base = manifest_path.parent
        self.table = payload["features"]

    def _paths(self, key: str) -> list[Path]:
        entry = self.table[Path(key).name]
        return [self.base / p for p in entry.split(";")]

    def features(self, key: str) -> np.ndarray:
        [path] = self._paths(key)
        return read_dmg1(path).reshape(-1)

    def layers(self, key: str) -> list[np.ndarray]:
        return [read_dmg1(p) for p in self._paths(key)]


# ---------------------------------------------------------------------------
# metric definitions

def pwmse(a: np.ndarray, b: np.ndarray, mask: np.ndarray | None = None) -> float:
    """Mean squared difference over (masked) pixels and channels."""
    if a.shape != b.shape:
        raise DimensionMismatch(f"images differ in shape: {a.shape} vs {b.shape}")
    diff = (a - b) ** 2
    if mask is None:
        return float(diff.mean())
    if mask.shape != a.shape[-2:]:
        raise DimensionMismatch(f"mask {mask.shape} does not fit image {a.shape}")
    selected = mask.astype(bool)
    if not selected.any():
        raise EmptyMaskRegion("mask selects no pixels")
    return float(diff[:, selected].mean())


def _mean_covariance(features: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    mu = features.mean(axis=0)
    centered = features - mu
    cov = centered.T @ centered / (features.shape[0] - 1)
    return mu, cov


def _sqrt_psd(matrix: np.ndarray) -> np.ndarray:
    values, vectors = np.linalg.eigh((matrix + matrix.T) / 2.0)
    if values.min() < -EIGENVALUE_CLIP_WARN:
        warnings.warn(
            f"covariance eigenvalues clipped at zero (min {values.min():.3e})",
            DegenerateCovariance,
        )
    values = np.clip(values, 0.0, None)
    return (vectors * np.sqrt(values)) @ vectors.T


def fid(set_a: list[np.ndarray], set_b: list[np.ndarray], provider) -> float:
    """Distribution distance between two image sets in feature space:
    |mu1-mu2|^2 + Tr(C1 + C2 - 2 (C1 C2)^(1/2))."""
    if len(set_a) < 2 or len(set_b) < 2:
        raise ValueError("need at least two images per set for a covariance")
    feats_a = np.stack([provider.features(img) for img in set_a])
    feats_b = np.stack([provider.features(img) for img in set_b])
    mu_a, cov_a = _mean_covariance(feats_a)
    mu_b, cov_b = _mean_covariance(feats_b)
    root_a = _sqrt_psd(cov_a)
    cross = _sqrt_psd(root_a @ cov_b @ root_a)
    value = float(np.sum((mu_a - mu_b) ** 2) + np.trace(cov_a + cov_b - 2.0 * cross))
    return max(value, 0.0)


def lpips(a: np.ndarray, b: np.ndarray, provider) -> float:
    """Layerwise mean squared feature distance, (1/(H*W)) per layer."""
    if a.shape != b.shape:
        raise DimensionMismatch(f"images differ in shape: {a.shape} vs {b.shape}")
    total = 0.0
    for fa, fb in zip(provider.layers(a), provider.layers(b)):
        if fa.shape != fb.shape:
            raise DimensionMismatch("feature layers differ in shape")
        _, h, w = fa.shape
        total += float(((fa - fb) ** 2).sum() / (h * w))
    return total


def clipscore(caption_embedding: np.ndarray, image_embedding: np.ndarray) -> float:
    """2.5 * max(cosine similarity, 0)."""
    nc = np.linalg.norm(caption_embedding)
    nv = np.linalg.norm(image_embedding)
    if nc == 0 or nv == 0:
        raise ZeroVector("clipscore needs two non-zero embeddings")
    cos = float(np.dot(caption_embedding, image_embedding) / (nc * nv))
    return 2.5 * max(cos, 0.0)


# ---------------------------------------------------------------------------
# reports

@dataclass
class MetricProviders:
    lpips: RawPyramidFeatureProvider | IdentityFeatureProvider
    fid: PixelStatsFeatureProvider
    image_embedder: HashProjectionImageEmbedder

    @classmethod
    def default(cls) -> "MetricProviders":
        return cls(
            lpips=RawPyramidFeatureProvider(),
            fid=PixelStatsFeatureProvider(),
            image_embedder=HashProjectionImageEmbedder(),
        )

    def names(self) -> dict[str, str]:
        return {
            "lpips": self.lpips.name,
            "fid": self.fid.name,
            "clipscore": self.image_embedder.name,
        }


@dataclass
class MetricReport:
    scope: str  # "image" or "background"
    pwmse: float
    lpips: float
    clipscore: float | None
    fid: float | None
    providers: dict[str, str]

    def __post_init__(self):
        assert self.pwmse >= 0 and self.lpips >= 0
        if self.clipscore is not None:
            assert 0.0 <= self.clipscore <= 2.5

    def to_dict(self) -> dict:
        return {
            "scope": self.scope,
            "pwmse": self.pwmse,
            "lpips": self.lpips,
            "clipscore": self.clipscore,
            "fid": self.fid,
            "providers": self.providers,
        }


def image_report(
    input_image: np.ndarray,
    output_image: np.ndarray,
    caption_embedding: np.ndarray | None = None,
    providers: MetricProviders | None = None,
) -> MetricReport:
    """Whole-image metrics for one edit; set-level distance left to the
    batch evaluator."""
    providers = providers or MetricProviders.default()
    score = None
    if caption_embedding is not None:
        score = clipscore(caption_embedding, providers.image_embedder.embed(output_image))
    return MetricReport(
        scope="image",
        pwmse=pwmse(input_image, output_image),
        lpips=lpips(input_image, output_image, providers.lpips),
        clipscore=score,
        fid=None,
        providers=providers.names(),
    )


def background_report(
    input_image: np.ndarray,
    output_image: np.ndarray,
    refined_bits: np.ndarray,
    providers: MetricProviders | None = None,
) -> MetricReport:
    """Metrics restricted to the complement of the refined mask.

    The edited region is zeroed identically in both images before the
    layerwise distance so both sides get the same treatment; the
    pixelwise error masks exactly.
    """
    providers = providers or MetricProviders.default()
    background = 1 - refined_bits
    if not background.any():
        raise EmptyMaskRegion("refined mask covers the whole image")
    zeroed_in = input_image * background[None, :, :]
    zeroed_out = output_image * background[None, :, :]
    return MetricReport(
        scope="background",
        pwmse=pwmse(input_image, output_image, mask=background),
        lpips=lpips(zeroed_in, zeroed_out, providers.lpips),
        clipscore=None,
        fid=None,
        providers=providers.names(),
    )


def batch_fid(
    inputs: list[np.ndarray],
    outputs: list[np.ndarray],
    providers: MetricProviders | None = None,
    background_bits: list[np.ndarray] | None = None,
) -> float:
    providers = providers or MetricProviders.default()
    if background_bits is not None:
        inputs = [img * bg[None, :, :] for img, bg in zip(inputs, background_bits)]
        outputs = [img * bg[None, :, :] for img, bg in zip(outputs, background_bits)]
    return fid(inputs, outputs, providers.fid)


def reports_to_json(reports: list[dict]) -> str:
    return json.dumps(reports, indent=2)


def reports_to_csv(reports: list[dict]) -> str:
    if not reports:
        return ""
    keys = list(reports[0].keys())
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=keys)
    writer.writeheader()
    for row in reports:
        writer.writerow(row)
    return buf.getvalue()
