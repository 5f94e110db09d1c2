"""Human-trial back end: counterbalanced session assignment, trial delivery,
durable response persistence, and live study reports.

Sessions get a familiarization block (both versions of one trial per sub-type,
labeled) followed by a testing block in which each pooled trial appears in
exactly one version, greedily counterbalanced across sessions (the version
shown fewer times so far wins; ties break on trial-index parity).  Two catch
trials with scripted extreme outcomes are inserted into every testing block.

All mutations are serialized through one lock and appended to line-delimited
logs (fsynced before the ack), so replaying the logs reconstructs the full
study state.  Reports apply the declared exclusion criteria and then reuse the
metrics module, so the live endpoint and the offline report command agree
exactly.
"""
from __future__ import annotations

import json
import os
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .core import EventCategory, rng_stream
from .dataset import load_manifest, iter_records
from .metrics import RaterRecord, analyze_ratings

API_PREFIX = "/api/v1"

CATCH_SURPRISING_MIN = 70   # surprising catch must be rated at least this
CATCH_EXPECTED_MAX = 30     # expected catch must be rated at most this
MIN_MEDIAN_ELAPSED_MS = 1000


class StudyError(Exception):
    def __init__(self, status: int, detail: str):
        super().__init__(detail)
        self.status = status
        self.detail = detail


@dataclass
class Session:
    session_id: str
    alias: str
    index: int
    assignment: list[dict]       # testing entries: {trial_id, version, is_catch}
    responses: dict[int, dict] = field(default_factory=dict)   # test index -> record

    def next_pending(self, n_familiarization: int) -> Optional[int]:
        for offset in range(len(self.assignment)):
            idx = n_familiarization + offset
            if idx not in self.responses:
                return idx
        return None

    def stage(self, n_familiarization: int) -> str:
        if self.next_pending(n_familiarization) is None:
            return "done"
        return "familiarization" if not self.responses else "testing"


class Study:
    """In-memory study state backed by append-only logs."""

    def __init__(self, dataset: Path, out_dir: Path, n_trials: int,
                 seed: int = 0):
        self.out_dir = Path(out_dir)
        self.out_dir.mkdir(parents=True, exist_ok=True)
        self.lock = threading.Lock()
        self.manifest = load_manifest(dataset)
        self.seed = seed
        self.records: dict[str, dict] = {}
        self.familiarization: list[str] = []
        self.pool: list[str] = []
        self.catches: list[dict] = []
        self._build_trial_sets(n_trials)
        self.sessions: dict[str, Session] = {}
        self.version_counts: dict[str, dict[str, int]] = {
            tid: {"expected": 0, "surprising": 0} for tid in self.pool}
        self._write_study_config()
        self._replay_logs()

    # -- construction ------------------------------------------------------

    def _build_trial_sets(self, n_trials: int) -> None:
        categories = [EventCategory(c) for c in sorted(self.manifest.counts)]
        per_cat = max(1, n_trials // len(categories))
        seen_subtypes: set[str] = set()
        for cat in categories:
            test_ids = self.manifest.split_ids(cat, "test")[:per_cat]
            needed = set(test_ids)
            train_ids = self.manifest.split_ids(cat, "train")
            wanted_train: list[str] = list(train_ids)
            for rec in iter_records(self.manifest, cat):
                tid = rec["trial_id"]
                if tid in needed:
                    self.records[tid] = rec
                    self.pool.append(tid)
                elif tid in wanted_train:
                    if rec["subtype"] not in seen_subtypes:
                        seen_subtypes.add(rec["subtype"])
                        self.records[tid] = rec
                        self.familiarization.append(tid)
                    elif len(self.catches) < 2 and tid not in self.familiarization:
                        self.records[tid] = rec
                        if len(self.catches) == 0:
                            self.catches.append({"trial_id": tid,
                                                 "version": "surprising",
                                                 "is_catch": True})
                        else:
                            self.catches.append({"trial_id": tid,
                                                 "version": "expected",
                                                 "is_catch": True})
        self.pool.sort()
        if len(self.catches) < 2:
            raise ValueError("dataset too small to designate catch trials")

    def _write_study_config(self) -> None:
        cfg = {
            "seed": self.seed,
            "dataset": str(self.manifest.root),
            "familiarization": self.familiarization,
            "pool": self.pool,
            "catches": self.catches,
            "exclusions": {
                "catch_surprising_min": CATCH_SURPRISING_MIN,
                "catch_expected_max": CATCH_EXPECTED_MAX,
                "min_median_elapsed_ms": MIN_MEDIAN_ELAPSED_MS,
            },
        }
        path = self.out_dir / "study.json"
        if not path.exists():
            path.write_text(json.dumps(cfg, sort_keys=True, indent=2) + "\n")

    # -- persistence -------------------------------------------------------

    def _append(self, name: str, record: dict) -> None:
        path = self.out_dir / name
        with open(path, "a") as fh:
            fh.write(json.dumps(record, sort_keys=True, separators=(",", ":")) + "\n")
            fh.flush()
            os.fsync(fh.fileno())

    def _replay_logs(self) -> None:
        spath = self.out_dir / "sessions.jsonl"
        if spath.exists():
            for line in spath.read_text().splitlines():
                rec = json.loads(line)
                session = Session(session_id=rec["session_id"], alias=rec["alias"],
                                  index=rec["index"], assignment=rec["assignment"])
                self.sessions[session.session_id] = session
                for entry in session.assignment:
                    if not entry["is_catch"]:
                        self.version_counts[entry["trial_id"]][entry["version"]] += 1
        rpath = self.out_dir / "responses.jsonl"
        if rpath.exists():
            for line in rpath.read_text().splitlines():
                rec = json.loads(line)
                self.sessions[rec["session_id"]].responses[rec["index"]] = rec

    # -- operations --------------------------------------------------------

    @property
    def n_familiarization(self) -> int:
        return len(self.familiarization)

    def create_session(self, alias: str) -> Session:
        with self.lock:
            index = len(self.sessions)
            entries = []
            for i, tid in enumerate(self.pool):
                counts = self.version_counts[tid]
                if counts["expected"] < counts["surprising"]:
                    version = "expected"
                elif counts["surprising"] < counts["expected"]:
                    version = "surprising"
                else:
                    version = "expected" if i % 2 == 0 else "surprising"
                counts[version] += 1
                entries.append({"trial_id": tid, "version": version,
                                "is_catch": False})
            rng = rng_stream(self.seed, "session-order", index)
            order = rng.permutation(len(entries))
            entries = [entries[i] for i in order]
            third = max(1, len(entries) // 3)
            entries.insert(third, dict(self.catches[0]))
            entries.insert(2 * third, dict(self.catches[1]))
            session = Session(session_id=f"s{index:04d}", alias=alias,
                              index=index, assignment=entries)
            self.sessions[session.session_id] = session
            self._append("sessions.jsonl", {
                "session_id": session.session_id, "alias": alias,
                "index": index, "assignment": entries})
            return session

    def _session(self, session_id: str) -> Session:
        session = self.sessions.get(session_id)
        if session is None:
            raise StudyError(404, f"unknown session {session_id}")
        return session

    def _scene_payload(self, record: dict, version: str) -> dict:
        return {
            "trial_id": record["trial_id"],
            "bodies": record["bodies"],
            "trajectory": record[version],
            "spec_extras": {
                "barrier_kind": record["spec"].get("barrier_kind"),
                "opening_height": record["spec"].get("h_bar"),
                "opening_width": record["spec"].get("w_bar"),
                "container_height": record["spec"].get("h_con"),
                "container_width": record["spec"].get("w_con"),
                "occluder_mid_frac": record["spec"].get("h_occ"),
            },
        }

    def get_trial(self, session_id: str, index: int) -> dict:
        session = self._session(session_id)
        total = self.n_familiarization + len(session.assignment)
        if not 0 <= index < total:
            raise StudyError(404, f"trial index {index} out of range (0..{total - 1})")
        if index < self.n_familiarization:
            tid = self.familiarization[index]
            record = self.records[tid]
            return {
                "stage": "familiarization",
                "index": index,
                "subtype": record["subtype"],
                "expected": self._scene_payload(record, "expected"),
                "surprising": self._scene_payload(record, "surprising"),
            }
        entry = session.assignment[index - self.n_familiarization]
        record = self.records[entry["trial_id"]]
        # testing payloads never carry the version label
        return {
            "stage": "testing",
            "index": index,
            "scene": self._scene_payload(record, entry["version"]),
        }

    def submit_response(self, session_id: str, index: int, rating: int,
                        elapsed_ms: float, client_ts: Optional[str] = None) -> dict:
        if not (isinstance(rating, int) and 0 <= rating <= 100):
            raise StudyError(400, f"rating must be an integer in [0, 100], got {rating!r}")
        with self.lock:
            session = self._session(session_id)
            pending = session.next_pending(self.n_familiarization)
            if pending is None:
                raise StudyError(409, "session already complete")
            if index in session.responses:
                raise StudyError(409, f"duplicate response for index {index}")
            if index != pending:
                raise StudyError(409, f"expected response for index {pending}, got {index}")
            entry = session.assignment[index - self.n_familiarization]
            record = {
                "session_id": session_id,
                "index": index,
                "trial_id": entry["trial_id"],
                "version": entry["version"],
                "is_catch": entry["is_catch"],
                "rating": rating,
                "elapsed_ms": float(elapsed_ms),
                "client_ts": client_ts,
            }
            self._append("responses.jsonl", record)   # durable before ack
            session.responses[index] = record
            return {"ok": True,
                    "next_index": session.next_pending(self.n_familiarization),
                    "stage": session.stage(self.n_familiarization)}

    def report(self) -> dict:
        with self.lock:
            responses = [r for s in self.sessions.values()
                         for r in s.responses.values()]
        if not responses:
            raise StudyError(409, "no responses collected yet")
        study_cfg = json.loads((self.out_dir / "study.json").read_text())
        try:
            return build_report(responses, study_cfg)
        except ValueError as exc:
            raise StudyError(409, str(exc))


# ---------------------------------------------------------------------------
# Report construction (shared by the live endpoint and the CLI)
# ---------------------------------------------------------------------------

def build_report(responses: list[dict], study_cfg: dict) -> dict:
    """Apply exclusion criteria and compute the study statistics."""
    exclusions = study_cfg["exclusions"]
    by_session: dict[str, list[dict]] = {}
    for rec in responses:
        by_session.setdefault(rec["session_id"], []).append(rec)

    n_test = len(study_cfg["pool"]) + len(study_cfg["catches"])
    excluded = {"incomplete": [], "catch": [], "zero_variance": [], "fast": []}
    raters: list[RaterRecord] = []
    for sid in sorted(by_session):
        recs = by_session[sid]
        if len(recs) < n_test:
            excluded["incomplete"].append(sid)
            continue
        catch_ok = True
        for rec in recs:
            if not rec["is_catch"]:
                continue
            if rec["version"] == "surprising" and rec["rating"] < exclusions["catch_surprising_min"]:
                catch_ok = False
            if rec["version"] == "expected" and rec["rating"] > exclusions["catch_expected_max"]:
                catch_ok = False
        if not catch_ok:
            excluded["catch"].append(sid)
            continue
        test_recs = [r for r in recs if not r["is_catch"]]
        if float(np.median([r["elapsed_ms"] for r in test_recs])) < exclusions["min_median_elapsed_ms"]:
            excluded["fast"].append(sid)
            continue
        ratings = [r["rating"] for r in test_recs]
        if len(set(ratings)) < 2:
            excluded["zero_variance"].append(sid)
            continue
        raters.append(RaterRecord(
            rater_id=sid,
            items=[(r["trial_id"], r["version"], r["rating"]) for r in test_recs]))
    if not raters:
        raise StudyError(409, "no sessions pass the exclusion criteria")

    analysis = analyze_ratings(raters)
    return {
        "sessions_total": len(by_session),
        "sessions_analyzed": len(raters),
        "excluded": excluded,
        "analysis": analysis.to_dict(),
    }


def study_report_from_log(responses_path: Path) -> dict:
    """Recompute the study report from the exported logs on disk."""
    responses_path = Path(responses_path)
    study_dir = responses_path.parent
    study_cfg = json.loads((study_dir / "study.json").read_text())
    responses = []
    for line in responses_path.read_text().splitlines():
        if line.strip():
            responses.append(json.loads(line))
    if not responses:
        raise ValueError("response log is empty")
    return build_report(responses, study_cfg)


# ---------------------------------------------------------------------------
# HTTP layer
# ---------------------------------------------------------------------------

def create_app(dataset: Path, out_dir: Path, n_trials: int = 250,
               seed: int = 0, frontend_dir: Optional[Path] = None):
    from fastapi import FastAPI, Request
    from fastapi.responses import JSONResponse

    study = Study(dataset=dataset, out_dir=out_dir, n_trials=n_trials, seed=seed)
    app = FastAPI(title="voebench trial service")
    app.state.study = study

    @app.exception_handler(StudyError)
    async def study_error_handler(_request: Request, exc: StudyError):
        return JSONResponse(status_code=exc.status, content={"detail": exc.detail})

    @app.get(f"{API_PREFIX}/health")
    async def health():
        return {"status": "ok", "sessions": len(study.sessions)}

    @app.post(f"{API_PREFIX}/session")
    async def create_session(payload: dict):
        alias = str(payload.get("alias", "anonymous"))
        session = study.create_session(alias)
        return {
            "session_id": session.session_id,
            "alias": session.alias,
            "n_familiarization": study.n_familiarization,
            "n_trials": len(session.assignment),
            "stage": session.stage(study.n_familiarization),
        }

    @app.get(f"{API_PREFIX}/session/{{session_id}}/trial/{{index}}")
    async def get_trial(session_id: str, index: int):
        return study.get_trial(session_id, index)

    @app.post(f"{API_PREFIX}/response")
    async def submit_response(payload: dict):
        try:
            rating = payload["rating"]
            index = int(payload["index"])
            session_id = str(payload["session_id"])
        except (KeyError, TypeError, ValueError) as exc:
            raise StudyError(400, f"malformed response payload: {exc}")
        if isinstance(rating, bool) or not isinstance(rating, int):
            raise StudyError(400, "rating must be an integer")
        return study.submit_response(
            session_id, index, rating,
            elapsed_ms=float(payload.get("elapsed_ms", 0.0)),
            client_ts=payload.get("client_ts"))

    @app.get(f"{API_PREFIX}/report")
    async def report():
        return study.report()

    if frontend_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=str(frontend_dir), html=True))
    return app
