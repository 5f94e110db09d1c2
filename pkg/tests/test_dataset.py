"""On-disk dataset format: determinism, splits, round-trips, schema embed."""
import hashlib
import json
from pathlib import Path

import numpy as np
import pytest

from voebench.catalog import catalog_schema
from voebench.core import EventCategory
from voebench.dataset import (generate_dataset, iter_records, load_manifest,
                              load_label_arrays, record_to_trial, split_counts,
                              trial_to_record, trajectory_from_dict,
                              trajectory_to_dict)
from voebench.core import build_bodies
from voebench.scenarios import sample_trial
from voebench.core import SubType


def dir_checksums(root: Path) -> dict[str, str]:
    return {p.name: hashlib.sha256(p.read_bytes()).hexdigest()
            for p in sorted(root.iterdir()) if p.is_file()}


def test_split_counts():
    assert split_counts(100) == (75, 15, 10)
    assert split_counts(500) == (375, 75, 50)
    assert split_counts(10) == (7, 1, 2)


def test_regeneration_is_byte_identical(tmp_path):
    counts = {EventCategory.SUPPORT: 12, EventCategory.BARRIER: 12}
    generate_dataset(tmp_path / "a", counts, seed=5)
    generate_dataset(tmp_path / "b", counts, seed=5)
    assert dir_checksums(tmp_path / "a") == dir_checksums(tmp_path / "b")
    generate_dataset(tmp_path / "c", counts, seed=6)
    assert dir_checksums(tmp_path / "a") != dir_checksums(tmp_path / "c")


def test_split_partition_and_proportions(desk_dataset):
    for cat in EventCategory:
        splits = desk_dataset.splits[cat.value]
        train, val, test = splits["train"], splits["val"], splits["test"]
        assert len(train) == 15 and len(val) == 3 and len(test) == 2
        ids = train + val + test
        assert len(set(ids)) == len(ids) == 20


def test_two_scenes_per_trial_on_disk(desk_dataset):
    records = list(iter_records(desk_dataset, EventCategory.SUPPORT))
    assert len(records) == 20
    for rec in records:
        assert len(rec["expected"]["frames"]) == 50
        assert len(rec["surprising"]["frames"]) == 50


def test_manifest_embeds_catalog(desk_dataset):
    assert desk_dataset.catalog == catalog_schema()
    raw = json.loads((desk_dataset.root / "manifest.json").read_text())
    assert raw["trajectory_field_order"] == "x,y,z,qw,qx,qy,qz"


def test_record_round_trip_preserves_floats():
    trial = sample_trial(3, EventCategory.CONTAINMENT, SubType.C2, 0)
    rec = json.loads(json.dumps(trial_to_record(trial)))
    clone = record_to_trial(rec)
    assert clone.spec == trial.spec
    assert np.array_equal(clone.features, trial.features)
    assert np.array_equal(clone.posterior_surprising, trial.posterior_surprising)
    for i in range(50):
        assert clone.expected.frames[i].poses == trial.expected.frames[i].poses
        assert clone.expected.frames[i].visible == trial.expected.frames[i].visible


def test_trajectory_dict_round_trip():
    trial = sample_trial(4, EventCategory.OCCLUSION, SubType.B1, 1)
    order = [b.id for b in build_bodies(trial.spec)]
    d = trajectory_to_dict(trial.expected, order)
    back = trajectory_from_dict(d)
    for i in range(50):
        assert back.frames[i].poses == trial.expected.frames[i].poses


def test_label_arrays_shapes(desk_dataset):
    arrays = load_label_arrays(desk_dataset, EventCategory.COLLISION, "train")
    assert arrays["features"].shape == (15, 24)
    assert arrays["prior"].shape == (15, 13)
    assert arrays["posterior_expected"].shape == (15, 9)
    assert arrays["posterior_surprising"].shape == (15, 9)


def test_minimum_count_enforced(tmp_path):
    with pytest.raises(ValueError):
        generate_dataset(tmp_path / "x", {EventCategory.SUPPORT: 5}, seed=1)


def test_load_manifest_rejects_unknown_version(tmp_path, desk_dataset):
    target = tmp_path / "broken"
    target.mkdir()
    data = json.loads((desk_dataset.root / "manifest.json").read_text())
    data["format_version"] = 99
    (target / "manifest.json").write_text(json.dumps(data))
    with pytest.raises(ValueError):
        load_manifest(target)
