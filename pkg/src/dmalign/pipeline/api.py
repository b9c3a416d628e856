"""HTTP front for edit sessions.

POST /sessions                      {image_b64, source_caption} -> {id}
POST /sessions/{id}/edits           {target_caption, config?}   -> {run_id}
GET  /sessions/{id}                 -> session history
GET  /sessions/{id}/runs/{rid}/artifacts -> artifact URL manifest
GET  /sessions/{id}/runs/{rid}/artifacts/{name} -> the artifact itself
GET  /healthz

Masks are stored as PGM; requesting soft_mask.png / refined_mask.png
converts on the fly so browsers can render them.
"""

from __future__ import annotations

import io

import numpy as np
from fastapi import FastAPI, HTTPException, Response
from pydantic import BaseModel

from ..errors import EmptyCaption, ProviderUnavailable, StageError
from ..imaging import pgm_from_bytes
from .config import EditConfig
from .runner import EditEngine
from .sessions import SessionStore, decode_image_payload

MEDIA_TYPES = {".json": "application/json", ".png": "image/png", ".pgm": "image/x-portable-graymap"}


class CreateSessionBody(BaseModel):
    image_b64: str
    source_caption: str


class PostEditBody(BaseModel):
    target_caption: str
    config: dict | None = None


def create_app(
    store: SessionStore | None = None,
    engine: EditEngine | None = None,
    base_config: EditConfig | None = None,
    ui_dir=None,
) -> FastAPI:
    store = store or SessionStore()
    engine = engine or EditEngine.default()
    base_config = base_config or EditConfig()
    app = FastAPI(title="dmalign")

    if ui_dir is not None:
        from pathlib import Path

        from fastapi.staticfiles import StaticFiles

        ui_path = Path(ui_dir)
        if not (ui_path / "index.html").exists():
            raise FileNotFoundError(f"no index.html under {ui_path}; build the UI first")
        app.mount("/ui", StaticFiles(directory=ui_path, html=True), name="ui")

    @app.get("/healthz")
    def healthz():
        return {"status": "ok"}

    @app.post("/sessions", status_code=201)
    def create_session(body: CreateSessionBody):
        if not body.source_caption.strip():
            raise HTTPException(422, "source caption is empty")
        try:
            raw, _ = decode_image_payload(body.image_b64)
        except ValueError as exc:
            raise HTTPException(422, str(exc))
        record = store.create_session(raw, body.source_caption)
        return {"id": record.id}

    @app.post("/sessions/{session_id}/edits")
    def post_edit(session_id: str, body: PostEditBody):
        record = store.get_session(session_id)
        if record is None:
            raise HTTPException(404, f"unknown session {session_id}")
        if not body.target_caption.strip():
            raise HTTPException(422, "target caption is empty")
        try:
            config = base_config.merged(body.config or {})
        except (ValueError, TypeError) as exc:
            raise HTTPException(422, f"bad config: {exc}")
        image = store.session_image(session_id)
        with store.lock(session_id):  # one edit at a time per session
            run_id = store.new_run_id()
            writer = store.start_run(session_id, run_id, body.target_caption, config)
            try:
                engine.run_edit(
                    image,
                    record.source_caption,
                    body.target_caption,
                    config,
                    run_id=run_id,
                    artifact_writer=writer,
                )
            except StageError as exc:
                if isinstance(exc.cause, ProviderUnavailable):
                    raise HTTPException(503, f"grounding unavailable: {exc.cause}")
                if isinstance(exc.cause, EmptyCaption):
                    raise HTTPException(422, str(exc.cause))
                raise HTTPException(500, str(exc))
            store.finish_run(session_id, run_id)
        return {"run_id": run_id}

    @app.get("/sessions/{session_id}")
    def get_history(session_id: str):
        record = store.get_session(session_id)
        if record is None:
            raise HTTPException(404, f"unknown session {session_id}")
        return {
            "id": record.id,
            "source_caption": record.source_caption,
            "created": record.created,
            "image_url": f"/sessions/{session_id}/image.png",
            "runs": store.history(session_id),
        }

    @app.get("/sessions/{session_id}/image.png")
    def get_session_image(session_id: str):
        if store.get_session(session_id) is None:
            raise HTTPException(404, f"unknown session {session_id}")
        return Response(store.session_image_bytes(session_id), media_type="image/png")

    @app.get("/sessions/{session_id}/runs/{run_id}/artifacts")
    def get_artifact_manifest(session_id: str, run_id: str):
        if store.get_session(session_id) is None:
            raise HTTPException(404, f"unknown session {session_id}")
        manifest = store.run_manifest(session_id, run_id)
        if manifest is None:
            raise HTTPException(404, f"unknown run {run_id}")
        base = f"/sessions/{session_id}/runs/{run_id}/artifacts"
        names = store.list_artifacts(session_id, run_id)
        urls = {name: f"{base}/{name}" for name in names}
        for mask in ("soft_mask", "refined_mask"):
            if f"{mask}.pgm" in urls:
                urls[f"{mask}.png"] = f"{base}/{mask}.png"
        return {"run": manifest, "artifacts": urls}

    @app.get("/sessions/{session_id}/runs/{run_id}/artifacts/{name}")
    def get_artifact(session_id: str, run_id: str, name: str):
        if store.get_session(session_id) is None:
            raise HTTPException(404, f"unknown session {session_id}")
        path = store.artifact_path(session_id, run_id, name)
        if path is None and name in ("soft_mask.png", "refined_mask.png"):
            pgm = store.artifact_path(session_id, run_id, name[:-4] + ".pgm")
            if pgm is not None:
                return Response(_pgm_to_png(pgm.read_bytes()), media_type="image/png")
        if path is None:
            raise HTTPException(404, f"no artifact {name}")
        suffix = path.suffix.lower()
        return Response(path.read_bytes(), media_type=MEDIA_TYPES.get(suffix, "application/octet-stream"))

    return app


def _pgm_to_png(pgm_data: bytes) -> bytes:
    from PIL import Image

    grid = pgm_from_bytes(pgm_data)
    if grid.dtype == np.uint8:
        pixels = grid * 255
    else:
        pixels = np.round(grid * 255).astype(np.uint8)
    buf = io.BytesIO()
    Image.fromarray(pixels, mode="L").save(buf, format="PNG")
    return buf.getvalue()
