"""Dataset generation and on-disk format.

Layout: a manifest (metadata, splits, seed, and the full feature/rule catalog
schema) plus one line-delimited record file per category, one trial pair per
line.  Floats serialize with full round-trip precision (shortest-repr JSON),
keys are sorted, and writes go through temp-file renames, so regeneration with
the same seed is byte-identical.

Trajectory records store, per frame, one 7-tuple per entity in the manifest's
documented entity order: x, y, z, qw, qx, qy, qz.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, Optional

import numpy as np

from .catalog import PosteriorRule, catalog_schema
from .core import (Body, BodyKind, EventCategory, Frame, ScenarioSpec,
                   Trajectory, build_bodies)
from .scenarios import TrialPair, choose_violation, sample_trial, subtype_allocation

FORMAT_VERSION = 1
TRAJECTORY_FIELD_ORDER = "x,y,z,qw,qx,qy,qz"

SPLIT_FRACTIONS = (0.75, 0.15, 0.10)


def split_counts(n: int) -> tuple[int, int, int]:
    """75/15/10 split; train and val round down, test takes the remainder."""
    train = int(n * SPLIT_FRACTIONS[0])
    val = int(n * SPLIT_FRACTIONS[1])
    return train, val, n - train - val


@dataclass
class DatasetManifest:
    root: Path
    seed: int
    counts: dict[str, int]
    splits: dict[str, dict[str, list[str]]]   # category -> split -> trial ids
    files: dict[str, str]
    catalog: dict
    format_version: int = FORMAT_VERSION

    def category_file(self, category: EventCategory) -> Path:
        return self.root / self.files[category.value]

    def split_ids(self, category: EventCategory, split: str) -> list[str]:
        return self.splits[category.value][split]


def trajectory_to_dict(traj: Trajectory, entity_order: list[str]) -> dict:
    frames = []
    visible = []
    for frame in traj.frames:
        frames.append([list(frame.poses[e]) for e in entity_order])
        visible.append([1 if frame.visible[e] else 0 for e in entity_order])
    return {"entities": entity_order, "frames": frames, "visible": visible}


def trajectory_from_dict(d: dict) -> Trajectory:
    entities = d["entities"]
    frames = []
    for i, (poses, vis) in enumerate(zip(d["frames"], d["visible"])):
        frames.append(Frame(
            index=i,
            poses={e: tuple(p) for e, p in zip(entities, poses)},
            visible={e: bool(v) for e, v in zip(entities, vis)},
        ))
    return Trajectory(frames=frames)


def trial_to_record(trial: TrialPair) -> dict:
    bodies = build_bodies(trial.spec)
    order = [b.id for b in bodies]
    return {
        "trial_id": trial.trial_id,
        "category": trial.spec.category.value,
        "subtype": trial.spec.subtype.value,
        "spec": trial.spec.to_dict(),
        "violation": choose_violation(trial.spec).name.lower(),
        "violated_rules": sorted(r.name.lower() for r in trial.violated_rules),
        "features": trial.features.tolist(),
        "prior": trial.prior.tolist(),
        "posterior_expected": trial.posterior_expected.tolist(),
        "posterior_surprising": trial.posterior_surprising.tolist(),
        "bodies": [{"id": b.id, "kind": b.kind.value, "shape": b.shape,
                    "height": b.height, "width": b.width} for b in bodies],
        "expected": trajectory_to_dict(trial.expected, order),
        "surprising": trajectory_to_dict(trial.surprising, order),
    }


def record_to_trial(record: dict) -> TrialPair:
    spec = ScenarioSpec.from_dict(record["spec"])
    return TrialPair(
        trial_id=record["trial_id"],
        spec=spec,
        expected=trajectory_from_dict(record["expected"]),
        surprising=trajectory_from_dict(record["surprising"]),
        violated_rules=frozenset(PosteriorRule[name.upper()]
                                 for name in record["violated_rules"]),
        features=np.asarray(record["features"], dtype=np.float64),
        prior=np.asarray(record["prior"], dtype=np.int8),
        posterior_expected=np.asarray(record["posterior_expected"], dtype=np.int8),
        posterior_surprising=np.asarray(record["posterior_surprising"], dtype=np.int8),
    )


def _dump(obj: dict) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def _atomic_write(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text)
    tmp.replace(path)


def generate_dataset(out_dir: str | Path, counts: dict[EventCategory, int],
                     seed: int) -> DatasetManifest:
    """Generate trials for every requested category and write the dataset.

    Counts must be >= 10 per category.  Trial content depends only on
    (seed, category, index), never on generation order.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for cat, n in counts.items():
        if n < 10:
            raise ValueError(f"need at least 10 trials per category, got {n} for {cat}")

    splits: dict[str, dict[str, list[str]]] = {}
    files: dict[str, str] = {}
    for cat in sorted(counts, key=lambda c: c.value):
        n = counts[cat]
        alloc = subtype_allocation(cat, n)
        lines = []
        ids = []
        for index, subtype in enumerate(alloc):
            trial = sample_trial(seed, cat, subtype, index)
            ids.append(trial.trial_id)
            lines.append(_dump(trial_to_record(trial)))
        fname = f"trials_{cat.value}.jsonl"
        try:
            _atomic_write(out / fname, "\n".join(lines) + "\n")
        except OSError as exc:
            raise OSError(f"failed writing {out / fname}: {exc}") from exc
        files[cat.value] = fname
        n_train, n_val, _ = split_counts(n)
        splits[cat.value] = {
            "train": ids[:n_train],
            "val": ids[n_train:n_train + n_val],
            "test": ids[n_train + n_val:],
        }

    manifest = DatasetManifest(root=out, seed=seed,
                               counts={c.value: n for c, n in counts.items()},
                               splits=splits, files=files,
                               catalog=catalog_schema())
    payload = {
        "format_version": manifest.format_version,
        "seed": seed,
        "counts": manifest.counts,
        "splits": splits,
        "files": files,
        "trajectory_field_order": TRAJECTORY_FIELD_ORDER,
        "catalog": manifest.catalog,
    }
    try:
        _atomic_write(out / "manifest.json", _dump(payload) + "\n")
    except OSError as exc:
        raise OSError(f"failed writing {out / 'manifest.json'}: {exc}") from exc
    return manifest


def load_manifest(path: str | Path) -> DatasetManifest:
    root = Path(path)
    if root.is_file():
        root = root.parent
    d = json.loads((root / "manifest.json").read_text())
    if d["format_version"] != FORMAT_VERSION:
        raise ValueError(f"unsupported dataset format {d['format_version']}")
    return DatasetManifest(root=root, seed=d["seed"], counts=d["counts"],
                           splits=d["splits"], files=d["files"],
                           catalog=d["catalog"], format_version=d["format_version"])


def iter_records(manifest: DatasetManifest, category: EventCategory,
                 split: Optional[str] = None) -> Iterator[dict]:
    """Yield trial records of a category, optionally restricted to one split."""
    wanted = set(manifest.split_ids(category, split)) if split else None
    with open(manifest.category_file(category)) as fh:
        for line in fh:
            record = json.loads(line)
            if wanted is None or record["trial_id"] in wanted:
                yield record


def load_label_arrays(manifest: DatasetManifest, category: EventCategory,
                      split: str) -> dict[str, np.ndarray]:
    """Feature and label matrices for a split (used by training and eval)."""
    feats, priors, post_e, post_s, ids = [], [], [], [], []
    for rec in iter_records(manifest, category, split):
        ids.append(rec["trial_id"])
        feats.append(rec["features"])
        priors.append(rec["prior"])
        post_e.append(rec["posterior_expected"])
        post_s.append(rec["posterior_surprising"])
    return {
        "trial_ids": np.asarray(ids),
        "features": np.asarray(feats, dtype=np.float64),
        "prior": np.asarray(priors, dtype=np.int8),
        "posterior_expected": np.asarray(post_e, dtype=np.int8),
        "posterior_surprising": np.asarray(post_s, dtype=np.int8),
    }
