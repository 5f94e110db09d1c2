"""Trial service: counterbalancing, blinding, durability, and reports."""
import json
from pathlib import Path

import pytest
from fastapi.testclient import TestClient

from voebench.service import (Study, StudyError, build_report, create_app,
                              study_report_from_log)


@pytest.fixture()
def study(desk_dataset, tmp_path):
    return Study(dataset=desk_dataset.root, out_dir=tmp_path / "study",
                 n_trials=10, seed=0)


@pytest.fixture()
def client(desk_dataset, tmp_path):
    app = create_app(dataset=desk_dataset.root, out_dir=tmp_path / "study",
                     n_trials=10, seed=0)
    return TestClient(app)


def run_rater(client, alias, rating_fn, elapsed=1500):
    """Drive one scripted session; rating_fn(version, trial_id) -> int."""
    app_study = client.app.state.study
    s = client.post("/api/v1/session", json={"alias": alias}).json()
    idx = s["n_familiarization"]
    for _ in range(s["n_trials"]):
        entry = app_study.sessions[s["session_id"]].assignment[idx - s["n_familiarization"]]
        rating = rating_fn(entry["version"], entry["trial_id"])
        r = client.post("/api/v1/response", json={
            "session_id": s["session_id"], "index": idx,
            "rating": rating, "elapsed_ms": elapsed})
        assert r.status_code == 200, r.text
        nxt = r.json()["next_index"]
        if nxt is None:
            break
        idx = nxt
    return s["session_id"]


def good_rater(version, trial_id):
    return 85 + (hash(trial_id) % 10) if version == "surprising" else 5 + (hash(trial_id) % 10)


def test_two_sessions_split_versions_evenly(study):
    s1 = study.create_session("p1")
    s2 = study.create_session("p2")
    for trial_id in study.pool:
        versions = set()
        for session in (s1, s2):
            for entry in session.assignment:
                if entry["trial_id"] == trial_id and not entry["is_catch"]:
                    versions.add(entry["version"])
        assert versions == {"expected", "surprising"}


def test_session_never_sees_both_versions_of_one_trial(study):
    session = study.create_session("p")
    seen = {}
    for entry in session.assignment:
        if entry["is_catch"]:
            continue
        assert entry["trial_id"] not in seen
        seen[entry["trial_id"]] = entry["version"]


def test_per_session_version_counts_balanced(study):
    session = study.create_session("p")
    versions = [e["version"] for e in session.assignment if not e["is_catch"]]
    assert abs(versions.count("expected") - versions.count("surprising")) <= 1


def test_counterbalance_many_sessions(study):
    for i in range(20):
        study.create_session(f"p{i}")
    for trial_id, counts in study.version_counts.items():
        assert abs(counts["expected"] - counts["surprising"]) <= 1


def test_familiarization_payload_is_labeled(client):
    s = client.post("/api/v1/session", json={"alias": "x"}).json()
    assert s["n_familiarization"] == 12   # one per sub-type
    payload = client.get(f"/api/v1/session/{s['session_id']}/trial/0").json()
    assert payload["stage"] == "familiarization"
    assert "expected" in payload and "surprising" in payload
    assert payload["expected"]["trajectory"]["frames"] != payload["surprising"]["trajectory"]["frames"]


def test_testing_payload_never_leaks_version(client):
    s = client.post("/api/v1/session", json={"alias": "x"}).json()
    sid = s["session_id"]
    schema_keys = set()
    for i in range(s["n_trials"]):
        payload = client.get(f"/api/v1/session/{sid}/trial/{s['n_familiarization'] + i}").json()
        assert payload["stage"] == "testing"
        text = json.dumps(payload)
        assert '"expected"' not in text and '"surprising"' not in text
        assert "version" not in payload["scene"]
        schema_keys.add(tuple(sorted(payload["scene"].keys())))
    assert len(schema_keys) == 1   # identical schema for both versions


def test_out_of_range_index_rejected(client):
    s = client.post("/api/v1/session", json={"alias": "x"}).json()
    r = client.get(f"/api/v1/session/{s['session_id']}/trial/9999")
    assert r.status_code == 404
    r = client.get("/api/v1/session/nope/trial/0")
    assert r.status_code == 404


def test_rating_bounds_and_duplicates(client):
    s = client.post("/api/v1/session", json={"alias": "x"}).json()
    sid, first = s["session_id"], s["n_familiarization"]
    assert client.post("/api/v1/response", json={
        "session_id": sid, "index": first, "rating": 101,
        "elapsed_ms": 100}).status_code == 400
    assert client.post("/api/v1/response", json={
        "session_id": sid, "index": first, "rating": 100,
        "elapsed_ms": 100}).status_code == 200
    assert client.post("/api/v1/response", json={
        "session_id": sid, "index": first, "rating": 50,
        "elapsed_ms": 100}).status_code == 409   # duplicate, original kept
    assert client.post("/api/v1/response", json={
        "session_id": sid, "index": first + 5, "rating": 50,
        "elapsed_ms": 100}).status_code == 409   # out of order


def test_durable_log_replay(desk_dataset, tmp_path):
    out = tmp_path / "study"
    study = Study(dataset=desk_dataset.root, out_dir=out, n_trials=10, seed=0)
    session = study.create_session("p")
    first = study.n_familiarization
    study.submit_response(session.session_id, first, 80, 1200.0)
    study.submit_response(session.session_id, first + 1, 20, 1100.0)
    # a fresh process over the same directory reconstructs everything
    revived = Study(dataset=desk_dataset.root, out_dir=out, n_trials=10, seed=0)
    again = revived.sessions[session.session_id]
    assert again.assignment == session.assignment
    assert set(again.responses) == {first, first + 1}
    assert again.next_pending(revived.n_familiarization) == first + 2
    # counterbalance counters also replay: next session complements the first
    follow = revived.create_session("q")
    for e1, e2 in zip(sorted(session.assignment, key=lambda e: e["trial_id"]),
                      sorted(follow.assignment, key=lambda e: e["trial_id"])):
        if not e1["is_catch"] and not e2["is_catch"]:
            assert e1["version"] != e2["version"]


def test_report_matches_offline_command(client, tmp_path):
    for i in range(4):
        run_rater(client, f"p{i}", good_rater)
    live = client.get("/api/v1/report")
    assert live.status_code == 200
    out_dir = Path(client.app.state.study.out_dir)
    offline = study_report_from_log(out_dir / "responses.jsonl")
    assert offline == live.json()
    assert live.json()["analysis"]["human_hit_rate"] == 1.0


def test_catch_failures_are_excluded(client):
    def lazy_rater(version, trial_id):
        return 50 if version == "surprising" else 45   # fails the catches

    run_rater(client, "good0", good_rater)
    run_rater(client, "good1", good_rater)
    run_rater(client, "lazy", lazy_rater)
    report = client.get("/api/v1/report").json()
    assert report["excluded"]["catch"] == ["s0002"]
    assert report["sessions_analyzed"] == 2


def test_fast_raters_are_excluded(client):
    run_rater(client, "good0", good_rater)
    run_rater(client, "good1", good_rater)
    run_rater(client, "speedy", good_rater, elapsed=200)
    report = client.get("/api/v1/report").json()
    assert report["excluded"]["fast"] == ["s0002"]


def test_fifty_raters_enumerate_1225_kappa_pairs(desk_dataset, tmp_path):
    study = Study(dataset=desk_dataset.root, out_dir=tmp_path / "study",
                  n_trials=10, seed=0)
    first = study.n_familiarization
    for i in range(50):
        session = study.create_session(f"p{i}")
        for offset, entry in enumerate(session.assignment):
            rating = good_rater(entry["version"], entry["trial_id"])
            study.submit_response(session.session_id, first + offset,
                                  rating, 1500.0)
    report = study.report()
    assert report["sessions_analyzed"] == 50
    assert report["analysis"]["kappa_pairs_enumerated"] == 1225
    assert report["analysis"]["human_hit_rate"] == 1.0


def test_empty_study_report_is_an_error(client):
    assert client.get("/api/v1/report").status_code == 409


def test_health(client):
    assert client.get("/api/v1/health").json()["status"] == "ok"
