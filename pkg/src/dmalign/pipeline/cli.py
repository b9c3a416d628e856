"""Command-line interface."""

from __future__ import annotations

import json
import logging
import sys
from pathlib import Path

import click
import numpy as np

from ..alignment import (
    align_bidirectional_merge,
    bidirectional_nll,
    init_difference_params,
    load_corpus,
    load_params,
    save_params,
    snap_to_float32,
    train,
    viterbi_decode,
)
from ..captions import analyze
from ..diffusion import (
    DenoiserConfig,
    TrainConfig,
    save_denoiser,
    snap_denoiser_to_float32,
    subsampled_schedule,
    train_denoiser,
)
from ..imaging import load_image, read_pgm, save_image, write_dmg1
from ..metrics import (
    FileFeatureProvider,
    MetricProviders,
    background_report,
    batch_fid,
    image_report,
    reports_to_csv,
    reports_to_json,
)
from ..planner import plan_to_dict
from .config import AblationFlags, EditConfig, load_config_file
from .runner import EditEngine
from .sessions import SessionStore


def _config_from_options(config_path, steps, guidance, threshold, seed, ablate) -> EditConfig:
    config = load_config_file(config_path) if config_path else EditConfig()
    overrides = {}
    if steps is not None:
        overrides["steps"] = steps
    if guidance is not None:
        overrides["guidance"] = guidance
    if threshold is not None:
        overrides["threshold"] = threshold
    if seed is not None:
        overrides["seed"] = seed
    if ablate:
        overrides["ablations"] = [f for part in ablate for f in part.split(",")]
    return config.merged(overrides)


def _engine(fixtures) -> EditEngine:
    return EditEngine.default(fixtures_dir=fixtures)


@click.group()
@click.option("-v", "--verbose", is_flag=True, help="Enable info logging.")
def main(verbose):
    """Text-guided image editing with word-alignment-driven masks."""
    logging.basicConfig(level=logging.INFO if verbose else logging.WARNING)


@main.command()
@click.option("--image", "image_path", required=True, type=click.Path(exists=True))
@click.option("--source", required=True, help="Caption describing the image.")
@click.option("--target", required=True, help="Caption describing the desired result.")
@click.option("--steps", type=int, default=None)
@click.option("--guidance", type=float, default=None)
@click.option("--threshold", type=float, default=None)
@click.option("--seed", type=int, default=None)
@click.option("--ablate", multiple=True, help="Comma-separated ablation flags.")
@click.option("--fixtures", type=click.Path(exists=True), default=None)
@click.option("--out", "out_dir", type=click.Path(), default="dmalign_out")
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--dump-plan", is_flag=True, help="Print the edit plan JSON to stdout.")
@click.option("--dump-latents", is_flag=True, help="Write intermediate latents as DMG1 files.")
def edit(image_path, source, target, steps, guidance, threshold, seed, ablate,
         fixtures, out_dir, config_path, dump_plan, dump_latents):
    """Run one edit and write all artifacts to --out."""
    config = _config_from_options(config_path, steps, guidance, threshold, seed, ablate)
    engine = _engine(fixtures)
    image = load_image(image_path)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    def writer(name, payload):
        (out / name).write_bytes(payload)

    latent_sink = None
    if dump_latents:
        latents_dir = out / "latents"
        latents_dir.mkdir(exist_ok=True)

        def latent_sink(name, grid):
            write_dmg1(grid, latents_dir / f"{name}.dmg1")

    run = engine.run_edit(
        image, source, target, config,
        artifact_writer=writer, latent_sink=latent_sink,
    )
    if dump_plan:
        click.echo(json.dumps(plan_to_dict(run.plan, run.alignment), indent=2))
    click.echo(f"wrote {len(run.artifact_names)} artifacts to {out}")


@main.command()
@click.option("--source", required=True)
@click.option("--target", required=True)
@click.option("--params", "params_path", type=click.Path(exists=True), default=None)
@click.option("--out", "out_path", type=click.Path(), default=None)
def align(source, target, params_path, out_path):
    """Print the word alignment between two captions as JSON."""
    if params_path:
        params = load_params(params_path)
    else:
        params = EditEngine.default().aligner_params
    c1, c2 = analyze(source), analyze(target)
    s2t = viterbi_decode(c1, c2, params, "s2t")
    t2s = viterbi_decode(c2, c1, params, "t2s")
    merged = align_bidirectional_merge(s2t, t2s)
    payload = json.dumps(
        {
            "source_tokens": c1.tokens,
            "target_tokens": c2.tokens,
            "pairs": merged.sorted_pairs(),
            "score_s2t": s2t.score,
            "score_t2s": t2s.score,
        },
        indent=2,
    )
    if out_path:
        Path(out_path).write_text(payload + "\n", "utf-8")
    else:
        click.echo(payload)


@main.command()
@click.option("--image", "image_path", required=True, type=click.Path(exists=True))
@click.option("--source", required=True)
@click.option("--target", required=True)
@click.option("--steps", type=int, default=None)
@click.option("--threshold", type=float, default=None)
@click.option("--seed", type=int, default=None)
@click.option("--fixtures", type=click.Path(exists=True), default=None)
@click.option("--out", "out_dir", type=click.Path(), default="dmalign_out")
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
def mask(image_path, source, target, steps, threshold, seed, fixtures, out_dir, config_path):
    """Compute and write the soft and refined masks without inpainting."""
    config = _config_from_options(config_path, steps, None, threshold, seed, ())
    engine = _engine(fixtures)
    image = load_image(image_path)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    wanted = {"soft_mask.pgm", "refined_mask.pgm", "refined_mask_provenance.json",
              "alignment.json", "plan.json"}

    def writer(name, payload):
        if name in wanted:
            (out / name).write_bytes(payload)

    try:
        engine.run_edit(image, source, target, config, artifact_writer=writer)
    except Exception:
        # masks may already be on disk even if a later stage failed
        if not (out / "refined_mask.pgm").exists():
            raise
    click.echo(f"wrote masks to {out}")


@main.command("eval")
@click.option("--pairs", "pairs_path", required=True, type=click.Path(exists=True),
              help="Manifest JSON: [{input, output, caption?, source_caption?, refined_mask?}, ...]")
@click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default="json")
@click.option("--features", "features_path", type=click.Path(exists=True), default=None,
              help="Precomputed-feature manifest (DMG1 files) for the set-level distance.")
@click.option("--min-rouge", "min_rouge", type=float, default=None,
              help="Keep only pairs whose captions overlap at least this much "
                   f"(the usual subset cut is {0.75}).")
@click.option("--out", "out_path", type=click.Path(), default=None)
def eval_pairs(pairs_path, fmt, features_path, min_rouge, out_path):
    """Score edited images against their inputs."""
    from ..captions import rouge_similarity

    manifest = json.loads(Path(pairs_path).read_text("utf-8"))
    if min_rouge is not None:
        kept = []
        for entry in manifest:
            if entry.get("caption") and entry.get("source_caption"):
                overlap = rouge_similarity(
                    analyze(entry["source_caption"]), analyze(entry["caption"])
                )
                if overlap < min_rouge:
                    continue
            kept.append(entry)
        manifest = kept
    providers = MetricProviders.default()
    rows = []
    inputs, outputs, backgrounds = [], [], []
    for entry in manifest:
        input_image = load_image(entry["input"])
        output_image = load_image(entry["output"])
        inputs.append(input_image)
        outputs.append(output_image)
        caption_vec = None
        if entry.get("caption"):
            from ..diffusion import embed_caption

            caption_vec = embed_caption(analyze(entry["caption"]))
        report = image_report(input_image * 255.0, output_image * 255.0, caption_vec, providers)
        row = {"input": entry["input"], "output": entry["output"], **report.to_dict()}
        if entry.get("refined_mask"):
            bits = read_pgm(entry["refined_mask"])
            backgrounds.append(1 - bits)
            bg = background_report(input_image * 255.0, output_image * 255.0, bits, providers)
            row["background_pwmse"] = bg.pwmse
            row["background_lpips"] = bg.lpips
        rows.append(row)
    summary = {"pairs": len(rows)}
    if features_path:
        provider = FileFeatureProvider(features_path)
        from ..metrics import fid as fid_metric

        summary["fid"] = fid_metric(
            [entry["input"] for entry in manifest],
            [entry["output"] for entry in manifest],
            provider,
        )
    elif len(rows) >= 2:
        summary["fid"] = batch_fid([img * 255.0 for img in inputs],
                                   [img * 255.0 for img in outputs], providers)
        if len(backgrounds) == len(rows):
            summary["background_fid"] = batch_fid(
                [img * 255.0 for img in inputs], [img * 255.0 for img in outputs],
                providers, background_bits=backgrounds,
            )
    payload = reports_to_csv(rows) if fmt == "csv" else reports_to_json([summary, *rows])
    if out_path:
        Path(out_path).write_text(payload, "utf-8")
        click.echo(f"wrote report to {out_path}")
    else:
        click.echo(payload)


@main.command("train-denoiser")
@click.option("--data", "data_dir", required=True, type=click.Path(exists=True),
              help="Directory of <name>.png + <name>.txt caption pairs.")
@click.option("--out", "out_path", type=click.Path(), default="denoiser.bin")
@click.option("--epochs", type=int, default=40)
@click.option("--lr", type=float, default=2e-3)
@click.option("--seed", type=int, default=7)
@click.option("--steps", type=int, default=50)
@click.option("--hidden", type=int, default=16)
def train_denoiser_cmd(data_dir, out_path, epochs, lr, seed, steps, hidden):
    """Train the toy noise predictor on an image/caption directory."""
    from ..toydata import load_image_caption_dir

    dataset = load_image_caption_dir(data_dir)
    schedule = subsampled_schedule(steps)
    config = TrainConfig(epochs=epochs, learning_rate=lr, seed=seed, steps=steps)
    denoiser, history = train_denoiser(
        dataset, config,
        denoiser_config=DenoiserConfig(channels=3, hidden=hidden),
        schedule=schedule,
    )
    snap_denoiser_to_float32(denoiser)
    save_denoiser(denoiser, out_path)
    click.echo(f"trained on {len(dataset)} images; loss {history[0]:.1f} -> {history[-1]:.1f}")
    click.echo(f"saved weights to {out_path}")


@main.command("train-aligner")
@click.option("--data", "data_path", required=True, type=click.Path(exists=True),
              help="Gold-alignment corpus JSON.")
@click.option("--out", "out_path", type=click.Path(), default="aligner.bin")
@click.option("--epochs", type=int, default=150)
@click.option("--lr", type=float, default=0.1)
def train_aligner_cmd(data_path, out_path, epochs, lr):
    """Train the span aligner on a gold-alignment corpus."""
    corpus = load_corpus(data_path)
    params = init_difference_params()
    before = bidirectional_nll(corpus, params)
    train(corpus, params, epochs=epochs, lr=lr, log=click.echo)
    after = bidirectional_nll(corpus, params)
    snap_to_float32(params)
    save_params(params, out_path)
    click.echo(f"NLL {before:.1f} -> {after:.1f}; saved weights to {out_path}")


@main.command()
@click.option("--port", type=int, default=8000)
@click.option("--host", default="127.0.0.1")
@click.option("--data-dir", "data_dir_opt", type=click.Path(), default=None)
@click.option("--fixtures", type=click.Path(exists=True), default=None)
@click.option("--ui", "ui_dir", type=click.Path(exists=True), default=None,
              help="Directory with the built browser UI (served under /ui).")
def serve(port, host, data_dir_opt, fixtures, ui_dir):
    """Serve the HTTP API (and the edit UI, if built alongside)."""
    import uvicorn

    from .api import create_app

    store = SessionStore(data_dir_opt)
    engine = EditEngine.default(fixtures_dir=fixtures)
    uvicorn.run(create_app(store, engine, ui_dir=ui_dir), host=host, port=port)


if __name__ == "__main__":
    sys.exit(main())
