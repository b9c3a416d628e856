import base64

import numpy as np
import pytest
from fastapi.testclient import TestClient

from dmalign.imaging import pgm_from_bytes
from dmalign.pipeline import EditConfig, EditEngine, SessionStore
from dmalign.pipeline.api import create_app

from .conftest import SCENES

BEACH_SOURCE = "a clear sky and a ship landed on the sand"
BEACH_TARGET = "a clear sky and a ship landed on the ocean"


@pytest.fixture(scope="module")
def client(tmp_path_factory):
    store = SessionStore(tmp_path_factory.mktemp("sessions"))
    engine = EditEngine.default(fixtures_dir=SCENES / "beach")
    app = create_app(store, engine, EditConfig(steps=10))
    with TestClient(app) as client:
        yield client


def beach_b64():
    return base64.b64encode((SCENES / "beach" / "image.png").read_bytes()).decode()


def make_session(client):
    response = client.post(
        "/sessions", json={"image_b64": beach_b64(), "source_caption": BEACH_SOURCE}
    )
    assert response.status_code == 201
    return response.json()["id"]


class TestSessionLifecycle:
    def test_healthz(self, client):
        assert client.get("/healthz").json() == {"status": "ok"}

    def test_create_edit_fetch_artifacts(self, client):
        session_id = make_session(client)
        response = client.post(
            f"/sessions/{session_id}/edits",
            json={"target_caption": BEACH_TARGET, "config": {"seed": 3}},
        )
        assert response.status_code == 200
        run_id = response.json()["run_id"]

        manifest = client.get(f"/sessions/{session_id}/runs/{run_id}/artifacts").json()
        urls = manifest["artifacts"]
        for kind in (
            "alignment.json", "plan.json", "soft_mask.pgm",
            "refined_mask.pgm", "output.png", "metrics.json",
        ):
            assert kind in urls
            fetched = client.get(urls[kind])
            assert fetched.status_code == 200

        plan = client.get(urls["plan.json"]).json()
        assert plan["schema_version"] == 1
        assert any(item["verdict"] == "SUBSTITUTED" for item in plan["alter"])

    def test_two_edits_keep_order(self, client):
        session_id = make_session(client)
        first = client.post(
            f"/sessions/{session_id}/edits", json={"target_caption": BEACH_TARGET}
        ).json()["run_id"]
        second = client.post(
            f"/sessions/{session_id}/edits",
            json={"target_caption": "a clear sky and a ship landed on the grass"},
        ).json()["run_id"]
        history = client.get(f"/sessions/{session_id}").json()
        assert [run["run_id"] for run in history["runs"]] == [first, second]
        assert history["runs"][0]["complete"] and history["runs"][1]["complete"]

    def test_unknown_session_404(self, client):
        assert client.get("/sessions/nope").status_code == 404
        assert client.post(
            "/sessions/nope/edits", json={"target_caption": "x"}
        ).status_code == 404

    def test_invalid_payloads_422(self, client):
        bad_image = client.post(
            "/sessions", json={"image_b64": "@@not-base64@@", "source_caption": "a cat"}
        )
        assert bad_image.status_code == 422
        empty_caption = client.post(
            "/sessions", json={"image_b64": beach_b64(), "source_caption": "  "}
        )
        assert empty_caption.status_code == 422
        session_id = make_session(client)
        bad_config = client.post(
            f"/sessions/{session_id}/edits",
            json={"target_caption": BEACH_TARGET, "config": {"stepz": 4}},
        )
        assert bad_config.status_code == 422

    def test_grounding_outage_maps_to_503(self, tmp_path):
        from dmalign.errors import ProviderUnavailable

        class DownProvider:
            def ground(self, image, request):
                raise ProviderUnavailable("it is down")

        store = SessionStore(tmp_path / "s")
        engine = EditEngine.default(grounding_provider=DownProvider())
        app = create_app(store, engine, EditConfig(steps=5))
        with TestClient(app) as client:
            session_id = make_session(client)
            response = client.post(
                f"/sessions/{session_id}/edits", json={"target_caption": BEACH_TARGET}
            )
            assert response.status_code == 503

    def test_mask_png_conversion(self, client):
        session_id = make_session(client)
        run_id = client.post(
            f"/sessions/{session_id}/edits", json={"target_caption": BEACH_TARGET}
        ).json()["run_id"]
        urls = client.get(f"/sessions/{session_id}/runs/{run_id}/artifacts").json()["artifacts"]
        png = client.get(urls["refined_mask.png"])
        assert png.status_code == 200
        assert png.headers["content-type"] == "image/png"

    def test_determinism_across_identical_edits(self, client):
        session_id = make_session(client)
        hashes = []
        for _ in range(2):
            run_id = client.post(
                f"/sessions/{session_id}/edits",
                json={"target_caption": BEACH_TARGET, "config": {"seed": 123}},
            ).json()["run_id"]
            urls = client.get(
                f"/sessions/{session_id}/runs/{run_id}/artifacts"
            ).json()["artifacts"]
            hashes.append(hash(client.get(urls["output.png"]).content))
        assert hashes[0] == hashes[1]

    def test_refined_mask_popcount_matches_server_mask(self, client):
        session_id = make_session(client)
        run_id = client.post(
            f"/sessions/{session_id}/edits", json={"target_caption": BEACH_TARGET}
        ).json()["run_id"]
        urls = client.get(f"/sessions/{session_id}/runs/{run_id}/artifacts").json()["artifacts"]
        bits = pgm_from_bytes(client.get(urls["refined_mask.pgm"]).content)
        assert int(np.asarray(bits).sum()) > 0
