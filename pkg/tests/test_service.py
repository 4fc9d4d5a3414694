import json
import time

import pytest
from fastapi.testclient import TestClient

from railrecover import presets, service


@pytest.fixture()
def client(tmp_path):
    config = service.ServiceConfig(store_path=str(tmp_path), worker_cap=2)
    app = service.create_app(config)
    with TestClient(app) as c:
        yield c


def wait_done(client, jid, timeout=60.0):
    deadline = time.time() + timeout
    while time.time() < deadline:
        job = client.get(f"/jobs/{jid}").json()
        if job["state"] in ("done", "failed", "cancelled"):
            return job
        time.sleep(0.05)
    raise TimeoutError(jid)


def submit(client, doc, body=None):
    sid = client.post("/scenarios", json=doc).json()["id"]
    r = client.post(f"/scenarios/{sid}/solve", json=body or {})
    assert r.status_code == 202
    return sid, r.json()["job_id"]


class TestScenarios:
    def test_upload_returns_id(self, client):
        r = client.post("/scenarios", json=presets.mini_line_document())
        assert r.status_code == 201
        assert r.json()["id"]

    def test_duplicate_upload_same_id(self, client):
        doc = presets.mini_line_document()
        a = client.post("/scenarios", json=doc).json()["id"]
        b = client.post("/scenarios", json=doc).json()["id"]
        assert a == b

    def test_invalid_reference_diagnostic(self, client):
        doc = presets.mini_line_document()
        doc["disruption"]["from"] = "Zed"
        r = client.post("/scenarios", json=doc)
        assert r.status_code == 422
        detail = r.json()["detail"]
        assert "Zed" in detail["message"]
        assert detail["path"].startswith("$.disruption")

    def test_document_echo(self, client):
        doc = presets.mini_line_document()
        sid = client.post("/scenarios", json=doc).json()["id"]
        assert client.get(f"/scenarios/{sid}").json() == doc

    def test_unknown_scenario_404(self, client):
        assert client.post("/scenarios/deadbeef/solve", json={}).status_code == 404


class TestJobs:
    def test_solve_verified_and_summary(self, client):
        doc = presets.mini_line_document()
        sid, jid = submit(client, doc)
        job = wait_done(client, jid)
        assert job["state"] == "done"
        summary = client.get(f"/jobs/{jid}/solution?format=summary").json()
        assert summary["ok"] is True
        assert summary["objective"] == 2.0
        assert summary["counts"]["served"] == 2
        document = client.get(f"/jobs/{jid}/solution?format=document").json()
        assert document["report"]["objective"] == summary["objective"]
        assert len(document["trips"]) == 4

    def test_diagram_content_type(self, client):
        _, jid = submit(client, presets.mini_line_document())
        wait_done(client, jid)
        r = client.get(f"/jobs/{jid}/solution?format=diagram")
        assert r.headers["content-type"].startswith("image/svg+xml")
        assert r.text.startswith("<svg")

    def test_idempotent_job_submission(self, client):
        doc = presets.mini_line_document()
        sid = client.post("/scenarios", json=doc).json()["id"]
        a = client.post(f"/scenarios/{sid}/solve", json={}).json()
        b = client.post(f"/scenarios/{sid}/solve", json={}).json()
        assert a["job_id"] == b["job_id"]
        assert b["existing"] is True

    def test_not_done_job_is_retriable(self, client):
        doc = presets.u6_like_document(cycle_time=300, blockage_minutes=30)
        sid, jid = submit(client, doc, {"params": {"time_limit": 30}})
        r = client.get(f"/jobs/{jid}/solution")
        assert r.status_code == 409
        client.post(f"/jobs/{jid}/cancel")
        wait_done(client, jid)

    def test_cancel_yields_cancelled_state(self, client):
        doc = presets.u6_like_document(cycle_time=300, blockage_minutes=30)
        sid, jid = submit(client, doc, {"params": {"time_limit": 120}})
        time.sleep(0.3)
        r = client.post(f"/jobs/{jid}/cancel")
        assert r.status_code == 200
        job = wait_done(client, jid, timeout=120)
        assert job["state"] in ("cancelled", "done")

    def test_unknown_override_rejected(self, client):
        doc = presets.mini_line_document()
        sid = client.post("/scenarios", json=doc).json()["id"]
        r = client.post(
            f"/scenarios/{sid}/solve", json={"overrides": {"bogus": 1}}
        )
        assert r.status_code == 422

    def test_override_derives_new_scenario(self, client):
        doc = presets.mini_line_document(turn_at_middle=True, block_section=("B", "C"), block_both_tags=True)
        sid = client.post("/scenarios", json=doc).json()["id"]
        r = client.post(
            f"/scenarios/{sid}/solve",
            json={"overrides": {"turn_penalty": 5.0}, "extended_objective": True},
        ).json()
        assert r["scenario"] != sid
        # the original document is untouched
        assert client.get(f"/scenarios/{sid}").json() == doc
        job = wait_done(client, r["job_id"])
        assert job["state"] == "done"

    def test_blockage_interval_override_rebuilds(self, client):
        doc = presets.mini_line_document()
        sid, jid = submit(client, doc)
        wait_done(client, jid)
        base = client.get(f"/jobs/{jid}/solution?format=document").json()
        r = client.post(
            f"/scenarios/{sid}/solve",
            json={"overrides": {"blockage_interval": [0, 200]}},
        ).json()
        job = wait_done(client, r["job_id"])
        assert job["state"] == "done"
        short = client.get(
            f"/jobs/{r['job_id']}/solution?format=document"
        ).json()
        # a short closure needs no rerouting: the rebuilt network has no
        # headway binaries at all
        assert short["stats"]["binaries_reduced"] < base["stats"]["binaries_reduced"]


class TestEvents:
    def test_stream_monotone_and_terminal(self, client):
        doc = presets.mini_line_document()
        sid, jid = submit(client, doc)
        events = []
        with client.stream("GET", f"/jobs/{jid}/events") as response:
            for line in response.iter_lines():
                if line.startswith("data: "):
                    events.append(json.loads(line[len("data: "):]))
        assert events
        assert events[-1]["state"] == "done"
        elapsed = [e.get("elapsed", 0) for e in events if "elapsed" in e]
        assert elapsed == sorted(elapsed)

    def test_dual_bound_never_increases(self, client):
        doc = presets.u6_like_document(cycle_time=600, blockage_minutes=10)
        sid, jid = submit(client, doc, {"params": {"time_limit": 60}})
        duals = []
        with client.stream("GET", f"/jobs/{jid}/events") as response:
            for line in response.iter_lines():
                if line.startswith("data: "):
                    payload = json.loads(line[len("data: "):])
                    if payload.get("dual") is not None:
                        duals.append(payload["dual"])
        assert duals
        assert all(a >= b - 1e-9 for a, b in zip(duals, duals[1:]))


class TestPersistence:
    def test_history_survives_restart(self, tmp_path):
        config = service.ServiceConfig(store_path=str(tmp_path), worker_cap=1)
        with TestClient(service.create_app(config)) as client:
            _, jid = submit(client, presets.mini_line_document())
            wait_done(client, jid)
        # a fresh app over the same store sees the finished job
        with TestClient(service.create_app(config)) as client2:
            job = client2.get(f"/jobs/{jid}").json()
            assert job["state"] == "done"
            summary = client2.get(f"/jobs/{jid}/solution?format=summary").json()
            assert summary["objective"] == 2.0


class TestZeroLengthBlockage:
    def test_override_to_zero_length_gives_undisturbed_solution(self, client):
        doc = presets.mini_line_document()
        sid = client.post("/scenarios", json=doc).json()["id"]
        r = client.post(
            f"/scenarios/{sid}/solve",
            json={"overrides": {"blockage_interval": [0, 0]}},
        ).json()
        wait_done(client, r["job_id"])
        summary = client.get(
            f"/jobs/{r['job_id']}/solution?format=summary"
        ).json()
        # identical to the undisturbed optimum: every trip on time
        assert summary["counts"]["served"] == 4
        assert summary["counts"]["cancelled"] == 0
        assert summary["objective"] == 4.0


class TestParamValidation:
    def test_bad_params_rejected_at_submission(self, client):
        doc = presets.mini_line_document()
        sid = client.post("/scenarios", json=doc).json()["id"]
        r = client.post(
            f"/scenarios/{sid}/solve", json={"params": {"time_limit": -1}}
        )
        assert r.status_code == 422
        r = client.post(
            f"/scenarios/{sid}/solve", json={"params": {"walltime": 5}}
        )
        assert r.status_code == 422

    def test_null_time_limit_uses_default(self, client):
        doc = presets.mini_line_document()
        sid = client.post("/scenarios", json=doc).json()["id"]
        r = client.post(
            f"/scenarios/{sid}/solve", json={"params": {"time_limit": None}}
        )
        assert r.status_code == 202
        job = wait_done(client, r.json()["job_id"])
        assert job["state"] == "done"
