"""Disk-backed edit sessions: one directory per session, JSON manifests,
append-only run history."""

from __future__ import annotations

import datetime as dt
import json
import threading
import uuid
from dataclasses import dataclass
from pathlib import Path

from ..imaging import image_from_bytes, load_image
from .config import EditConfig, data_dir

ARTIFACT_KINDS = (
    "alignment.json",
    "plan.json",
    "soft_mask.pgm",
    "refined_mask.pgm",
    "output.png",
    "metrics.json",
)


def _now() -> str:
    return dt.datetime.now(dt.timezone.utc).isoformat()


@dataclass
class SessionRecord:
    id: str
    source_caption: str
    created: str
    runs: list[str]


class SessionStore:
    """Filesystem layout:

    <root>/<session>/session.json + image.png
    <root>/<session>/runs/<run>/run.json + artifact files
    """

    def __init__(self, root=None):
        self.root = Path(root if root is not None else data_dir())
        self.root.mkdir(parents=True, exist_ok=True)
        self._locks: dict[str, threading.Lock] = {}
        self._locks_guard = threading.Lock()

    def lock(self, session_id: str) -> threading.Lock:
        with self._locks_guard:
            return self._locks.setdefault(session_id, threading.Lock())

    # -- sessions ----------------------------------------------------------
    def create_session(self, image_bytes: bytes, source_caption: str) -> SessionRecord:
        session_id = uuid.uuid4().hex[:12]
        session_dir = self.root / session_id
        session_dir.mkdir(parents=True)
        (session_dir / "image.png").write_bytes(image_bytes)
        record = SessionRecord(session_id, source_caption, _now(), [])
        self._write_manifest(record)
        return record

    def _write_manifest(self, record: SessionRecord) -> None:
        manifest = {
            "id": record.id,
            "source_caption": record.source_caption,
            "created": record.created,
            "runs": record.runs,
        }
        (self.root / record.id / "session.json").write_text(
            json.dumps(manifest, indent=2), "utf-8"
        )

    def get_session(self, session_id: str) -> SessionRecord | None:
        manifest = self.root / session_id / "session.json"
        if not manifest.exists():
            return None
        payload = json.loads(manifest.read_text("utf-8"))
        return SessionRecord(
            payload["id"], payload["source_caption"], payload["created"], payload["runs"]
        )

    def session_image(self, session_id: str):
        return load_image(self.root / session_id / "image.png")

    def session_image_bytes(self, session_id: str) -> bytes:
        return (self.root / session_id / "image.png").read_bytes()

    # -- runs ---------------------------------------------------------------
    def new_run_id(self) -> str:
        return uuid.uuid4().hex[:12]

    def run_dir(self, session_id: str, run_id: str) -> Path:
        return self.root / session_id / "runs" / run_id

    def start_run(
        self, session_id: str, run_id: str, target_caption: str, config: EditConfig
    ):
        run_dir = self.run_dir(session_id, run_id)
        run_dir.mkdir(parents=True)
        (run_dir / "run.json").write_text(
            json.dumps(
                {
                    "run_id": run_id,
                    "target_caption": target_caption,
                    "config": config.snapshot(),
                    "created": _now(),
                    "complete": False,
                },
                indent=2,
            ),
            "utf-8",
        )

        def writer(name: str, payload: bytes):
            (run_dir / name).write_bytes(payload)

        return writer

    def finish_run(self, session_id: str, run_id: str) -> None:
        run_dir = self.run_dir(session_id, run_id)
        payload = json.loads((run_dir / "run.json").read_text("utf-8"))
        payload["complete"] = True
        (run_dir / "run.json").write_text(json.dumps(payload, indent=2), "utf-8")
        record = self.get_session(session_id)
        record.runs.append(run_id)
        self._write_manifest(record)

    def run_manifest(self, session_id: str, run_id: str) -> dict | None:
        path = self.run_dir(session_id, run_id) / "run.json"
        if not path.exists():
            return None
        return json.loads(path.read_text("utf-8"))

    def artifact_path(self, session_id: str, run_id: str, name: str) -> Path | None:
        if "/" in name or "\\" in name or name.startswith("."):
            return None
        path = self.run_dir(session_id, run_id) / name
        return path if path.exists() else None

    def list_artifacts(self, session_id: str, run_id: str) -> list[str]:
        run_dir = self.run_dir(session_id, run_id)
        if not run_dir.exists():
            return []
        return sorted(p.name for p in run_dir.iterdir() if p.name != "run.json")

    def history(self, session_id: str) -> list[dict]:
        record = self.get_session(session_id)
        if record is None:
            return []
        return [self.run_manifest(session_id, run_id) for run_id in record.runs]


def decode_image_payload(image_b64: str):
    import base64
    import binascii

    try:
        raw = base64.b64decode(image_b64, validate=True)
        return raw, image_from_bytes(raw)
    except (binascii.Error, ValueError, OSError) as exc:
        raise ValueError(f"invalid image payload: {exc}") from exc
