"""The end-to-end edit: align, plan, ground, mask, refine, inpaint, score.

Each stage's failures are wrapped with the stage name; artifacts are
handed to the writer as soon as they exist so a failed run still leaves
its partial outputs on disk for inspection.
"""

from __future__ import annotations

import io
import json
import logging
import os
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from ..alignment import align_bidirectional_merge, load_params, viterbi_decode
from ..captions import analyze, stem
from ..diffusion import IdentityCodec, embed_caption, load_denoiser, subsampled_schedule
from ..errors import EmptyMaskRegion, StageError
from ..grounding import (
    GROUNDING_URL_ENV,
    FixtureGroundingProvider,
    GroundingRequest,
    RegionMask,
    ground_nouns,
    union_regions,
)
from ..imaging import image_to_bytes, pgm_bytes
from ..inpaint import inpaint
from ..masks import RefinedMask, binarize, cancellation_map, diffusion_mask, refine
from ..metrics import MetricProviders, background_report, image_report
from ..planner import KeepItem, Verdict, classify, plan_to_dict
from ..seeds import derive_seed
from .config import EditConfig

logger = logging.getLogger(__name__)


class EmptyGroundingProvider:
    """Used when no fixtures or service are configured: every noun misses."""

    def ground(self, image, request):
        from ..grounding import GroundingResult

        height, width = image.shape[1], image.shape[2]
        return GroundingResult(request.lemma, RegionMask.empty(height, width), 0.0)


@dataclass
class EditRun:
    run_id: str
    source_caption: str
    target_caption: str
    config: EditConfig
    plan: object = None
    alignment: object = None
    soft_mask: np.ndarray | None = None
    refined: RefinedMask | None = None
    cancel: np.ndarray | None = None
    output_image: np.ndarray | None = None
    reports: dict = field(default_factory=dict)
    artifact_names: list[str] = field(default_factory=list)


@dataclass
class EditEngine:
    """Holds the models and providers shared across runs (read-only)."""

    aligner_params: object
    denoiser: object
    codec: object
    grounding: object
    metric_providers: MetricProviders

    @classmethod
    def default(cls, fixtures_dir=None, grounding_provider=None) -> "EditEngine":
        models = resources.files("dmalign").joinpath("data/models")
        with resources.as_file(models.joinpath("aligner.bin")) as p:
            aligner_params = load_params(p)
        with resources.as_file(models.joinpath("denoiser.bin")) as p:
            denoiser = load_denoiser(p)
        if grounding_provider is None:
            if fixtures_dir is not None:
                grounding_provider = FixtureGroundingProvider(fixtures_dir)
            elif os.environ.get(GROUNDING_URL_ENV):
                from ..grounding import RemoteGroundingProvider

                grounding_provider = RemoteGroundingProvider()
            else:
                grounding_provider = EmptyGroundingProvider()
        return cls(
            aligner_params=aligner_params,
            denoiser=denoiser,
            codec=IdentityCodec(),
            grounding=grounding_provider,
            metric_providers=MetricProviders.default(),
        )

    def run_edit(
        self,
        image: np.ndarray,
        source_caption: str,
        target_caption: str,
        config: EditConfig = EditConfig(),
        run_id: str = "run",
        artifact_writer=None,
        latent_sink=None,
    ) -> EditRun:
        run = EditRun(run_id, source_caption, target_caption, config)
        flags = config.ablations
        height, width = image.shape[1], image.shape[2]
        factor = self.codec.factor

        def emit(name: str, payload: bytes):
            run.artifact_names.append(name)
            if artifact_writer is not None:
                artifact_writer(name, payload)

        def stage(name, fn):
            try:
                return fn()
            except StageError:
                raise
            except Exception as exc:
                raise StageError(name, exc) from exc

        c1, c2 = stage("analyze", lambda: (analyze(source_caption), analyze(target_caption)))

        def _align():
            s2t = viterbi_decode(c1, c2, self.aligner_params, "s2t")
            t2s = viterbi_decode(c2, c1, self.aligner_params, "t2s")
            return s2t, t2s, align_bidirectional_merge(s2t, t2s)

        s2t, t2s, alignment = stage("align", _align)
        run.alignment = alignment
        emit(
            "alignment.json",
            json.dumps(
                {
                    "pairs": alignment.sorted_pairs(),
                    "score_s2t": s2t.score,
                    "score_t2s": t2s.score,
                },
                indent=2,
            ).encode(),
        )

        def _plan():
            plan = classify(c1, c2, alignment)
            if flags.no_modifiers:
                moved = [i for i in plan.alter if i.verdict == Verdict.MODIFIER_CHANGED]
                plan.alter = [i for i in plan.alter if i.verdict != Verdict.MODIFIER_CHANGED]
                plan.keep.extend(KeepItem(i.source, Verdict.IDENTICAL) for i in moved)
                plan.keep.sort(key=lambda item: item.source.head_index)
            if flags.no_nonshared_keep:
                plan.keep = [i for i in plan.keep if i.verdict != Verdict.DELETED]
            return plan

        plan = stage("plan", _plan)
        run.plan = plan
        emit("plan.json", json.dumps(plan_to_dict(plan, alignment), indent=2).encode())

        def _ground():
            def prompt(caption, phrase):
                words = [caption.tokens[m] for m in phrase.modifier_indices]
                words.append(caption.tokens[phrase.head_index])
                return " ".join(words)

            def region(phrases, caption):
                if not phrases:
                    return RegionMask.empty(height, width)
                requests = [
                    GroundingRequest(prompt(caption, p), stem(caption.tokens[p.head_index]))
                    for p in phrases
                ]
                results = ground_nouns(image, requests, self.grounding)
                return union_regions(
                    results, config.min_confidence, height=height, width=width
                )

            return region(plan.alter_phrases(), c1), region(plan.keep_phrases(), c1)

        alter_region, keep_region = stage("ground", _ground)

        schedule = subsampled_schedule(config.steps)

        def _soft():
            if flags.no_diffusion_mask:
                latent_h, latent_w = height // factor, width // factor
                return np.zeros((latent_h, latent_w))
            return diffusion_mask(
                image,
                c1,
                c2,
                schedule,
                self.denoiser,
                self.codec,
                t_noise=config.resolved_t_noise(),
                seed=derive_seed(config.seed, "mask"),
                guidance_scale=config.guidance,
            )

        soft = stage("mask", _soft)
        run.soft_mask = soft
        emit("soft_mask.pgm", _pgm16_bytes(soft))

        def _refine():
            base = binarize(soft, config.threshold)
            if flags.no_refinement:
                from ..masks import upsample_mask

                return RefinedMask(upsample_mask(base, factor))
            return refine(base, alter_region, keep_region, factor)

        refined = stage("refine", _refine)
        run.refined = refined
        emit("refined_mask.pgm", pgm_bytes(refined.bits))
        emit("refined_mask_provenance.json", refined.provenance_json().encode())

        def _cancel():
            if flags.no_noise_cancellation:
                return np.zeros((height // factor, width // factor), dtype=np.uint8)
            return cancellation_map(keep_region, factor)

        cancel = stage("cancel", _cancel)
        run.cancel = cancel

        def _inpaint():
            return inpaint(
                image,
                refined,
                cancel,
                c2,
                schedule,
                self.denoiser,
                self.codec,
                guidance_scale=config.guidance,
                seed=derive_seed(config.seed, "inpaint"),
                latent_sink=latent_sink,
            )

        output = stage("inpaint", _inpaint)
        run.output_image = output
        emit("output.png", image_to_bytes(output))

        def _metrics():
            caption_vec = embed_caption(c2, self.denoiser.config.cond_dim)
            reports = {
                "image": image_report(
                    image * 255.0, output * 255.0, caption_vec, self.metric_providers
                ).to_dict()
            }
            try:
                reports["background"] = background_report(
                    image * 255.0, output * 255.0, refined.bits, self.metric_providers
                ).to_dict()
            except EmptyMaskRegion:
                logger.warning("refined mask covers the whole image; no background scope")
                reports["background"] = None
            return reports

        run.reports = stage("metrics", _metrics)
        emit("metrics.json", json.dumps(run.reports, indent=2).encode())
        return run


def _pgm16_bytes(soft: np.ndarray) -> bytes:
    buf = io.BytesIO()
    h, w = soft.shape
    buf.write(b"P5\n%d %d\n65535\n" % (w, h))
    buf.write(np.round(np.clip(soft, 0, 1) * 65535).astype(">u2").tobytes())
    return buf.getvalue()
