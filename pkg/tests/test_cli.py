"""CLI behavior: determinism of artifacts, exit codes, reality modes."""
import hashlib
import json
from pathlib import Path

import pytest

from voebench.cli import main


def checksums(root: Path) -> dict[str, str]:
    return {str(p.relative_to(root)): hashlib.sha256(p.read_bytes()).hexdigest()
            for p in sorted(root.rglob("*")) if p.is_file()}


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    return tmp_path_factory.mktemp("cli")


def test_gen_twice_identical(workdir, capsys):
    for name in ("d1", "d2"):
        rc = main(["gen", "--trials", "20", "--seed", "3", "--out",
                   str(workdir / name)])
        assert rc == 0
    out = capsys.readouterr().out
    assert "75%/15%/10%" in out
    assert checksums(workdir / "d1") == checksums(workdir / "d2")


def test_gen_single_category(workdir):
    rc = main(["gen", "--trials", "10", "--seed", "3", "--category", "C",
               "--out", str(workdir / "conly")])
    assert rc == 0
    files = {p.name for p in (workdir / "conly").iterdir()}
    assert files == {"manifest.json", "trials_C.jsonl"}


def test_full_run_deterministic(workdir, capsys):
    main(["gen", "--trials", "20", "--seed", "3", "--out", str(workdir / "ds")])
    for name in ("r1", "r2"):
        rc = main(["train", "--dataset", str(workdir / "ds"), "--out",
                   str(workdir / name), "--seeds", "0,1"])
        assert rc == 0
        rc = main(["eval", "--dataset", str(workdir / "ds"), "--out",
                   str(workdir / name), "--seeds", "0,1"])
        assert rc == 0
    capsys.readouterr()
    assert checksums(workdir / "r1") == checksums(workdir / "r2")


def test_normal_mode_trains_on_expected_labels_only(workdir):
    # models trained in normal vs flipped mode differ (labels differ), which
    # shows the mode filter reaches the training data
    main(["gen", "--trials", "20", "--seed", "4", "--out", str(workdir / "ds2")])
    main(["train", "--dataset", str(workdir / "ds2"), "--out",
          str(workdir / "norm"), "--seeds", "0"])
    main(["train", "--dataset", str(workdir / "ds2"), "--out",
          str(workdir / "flip"), "--seeds", "0", "--reality", "flipped"])
    norm = (workdir / "norm" / "models" / "A_ofpr_seed0.json").read_text()
    flip = (workdir / "flip" / "models" / "A_ofpr_seed0.json").read_text()
    assert norm != flip


def test_eval_without_models_exits_3(workdir, capsys):
    rc = main(["eval", "--dataset", str(workdir / "ds"), "--out",
               str(workdir / "nomodels"), "--seeds", "9"])
    capsys.readouterr()
    assert rc == 3


def test_missing_dataset_exits_3(workdir, capsys):
    rc = main(["train", "--dataset", str(workdir / "nowhere"), "--out",
               str(workdir / "x"), "--seeds", "0"])
    capsys.readouterr()
    assert rc == 3


def test_bad_config_exits_2(workdir, capsys):
    rc = main(["eval", "--dataset", str(workdir / "ds"), "--out",
               str(workdir / "x"), "--category", "Z"])
    capsys.readouterr()
    assert rc == 2


def test_flip_reports_above_chance(workdir, capsys):
    rc = main(["flip", "--dataset", str(workdir / "ds"), "--out",
               str(workdir / "flipped"), "--seeds", "0,1"])
    assert rc == 0
    capsys.readouterr()
    report = json.loads((workdir / "flipped" / "report_flipped.json").read_text())
    assert report["metric"] == "1 - hit_rate"
    for cat, rows in report["per_category"].items():
        assert rows["baseline"]["mean"] == 0.5
        assert rows["ofpr"]["mean"] >= 0.5
    assert report["average"]["ofpr"] > 0.5


def test_config_file_sets_flags(workdir, capsys):
    cfg = workdir / "exp.json"
    cfg.write_text(json.dumps({"dataset": str(workdir / "ds"),
                               "out": str(workdir / "fromcfg"),
                               "seeds": "0"}))
    rc = main(["train", "--config", str(cfg)])
    capsys.readouterr()
    assert rc == 0
    assert (workdir / "fromcfg" / "models" / "A_ofpr_seed0.json").exists()
