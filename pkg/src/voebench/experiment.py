"""Experiment orchestration: per-task training, evaluation, and report shaping.

Tasks run per event category.  In the normal reality, models train on the
expected scenes' labels only; in the flipped reality, on the surprising
scenes' labels only, and the reported metric becomes 1 - hit rate.  Feature
noise is applied at inference through the perception stage; every random draw
comes from a stream keyed by (seed, category, trial, version), so results
never depend on evaluation order.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .core import EventCategory, rng_stream
from .dataset import DatasetManifest, load_label_arrays, load_manifest
from .models import (OFModel, OFPRModel, OFPRTrainConfig, baseline_score,
                     load_model, random_score, save_model, score_surprise,
                     train_of, train_ofpr)
from .perception import PerceptionConfig, perceive

MODEL_KINDS = ("ofpr", "of")
SCORER_ROWS = ("ofpr", "of", "baseline", "random")


@dataclass
class ExperimentConfig:
    dataset: Path
    out: Path
    categories: list[EventCategory] = field(
        default_factory=lambda: list(EventCategory))
    reality: str = "normal"                  # "normal" | "flipped"
    seeds: list[int] = field(default_factory=lambda: list(range(10)))
    perception: PerceptionConfig = field(default_factory=PerceptionConfig)
    train: OFPRTrainConfig = field(default_factory=OFPRTrainConfig)
    train_noise: bool = False                # corrupt training features too

    def __post_init__(self) -> None:
        if self.reality not in ("normal", "flipped"):
            raise ValueError("reality must be 'normal' or 'flipped'")
        if not self.seeds:
            raise ValueError("seeds must be non-empty")

    def model_path(self, category: EventCategory, kind: str, seed: int) -> Path:
        return Path(self.out) / "models" / f"{category.value}_{kind}_seed{seed}.json"


def _training_features(arrays: dict, cfg: ExperimentConfig,
                       category: EventCategory, seed: int) -> np.ndarray:
    feats = arrays["features"]
    if not cfg.train_noise:
        return feats
    out = np.empty_like(feats)
    for i, tid in enumerate(arrays["trial_ids"]):
        rng = rng_stream(seed, "train-noise", category.value, tid)
        out[i] = perceive(feats[i], cfg.perception, rng)
    return out


def train_models(cfg: ExperimentConfig,
                 manifest: Optional[DatasetManifest] = None) -> list[Path]:
    """Fit and save one OFPR and one OF model per (category, seed)."""
    manifest = manifest or load_manifest(cfg.dataset)
    label_key = ("posterior_expected" if cfg.reality == "normal"
                 else "posterior_surprising")
    written: list[Path] = []
    for category in cfg.categories:
        arrays = load_label_arrays(manifest, category, "train")
        for seed in cfg.seeds:
            feats = _training_features(arrays, cfg, category, seed)
            ofpr = train_ofpr(feats, arrays["prior"], arrays[label_key], cfg.train)
            of = train_of(feats, arrays[label_key], cfg.train)
            for kind, model in (("ofpr", ofpr), ("of", of)):
                path = cfg.model_path(category, kind, seed)
                save_model(model, path)
                written.append(path)
    return written


def _pair_scores(model, feats_e: np.ndarray, feats_s: np.ndarray,
                 post_e: np.ndarray, post_s: np.ndarray) -> tuple[int, int]:
    pred_e = model.predict_posterior(feats_e)
    pred_s = model.predict_posterior(feats_s)
    return score_surprise(pred_e, post_e), score_surprise(pred_s, post_s)


def evaluate(cfg: ExperimentConfig,
             manifest: Optional[DatasetManifest] = None,
             split: str = "test") -> dict:
    """Hit-rate table for OFPR, OF, baseline and random on the given split."""
    from .metrics import hit_rate

    manifest = manifest or load_manifest(cfg.dataset)
    per_category: dict[str, dict[str, dict]] = {}
    for category in cfg.categories:
        arrays = load_label_arrays(manifest, category, split)
        if len(arrays["trial_ids"]) == 0:
            raise ValueError(f"no {split} trials for category {category.value}")
        rows: dict[str, list[float]] = {row: [] for row in SCORER_ROWS}
        for seed in cfg.seeds:
            models = {}
            for kind in MODEL_KINDS:
                path = cfg.model_path(category, kind, seed)
                if not path.exists():
                    raise FileNotFoundError(f"missing model file {path}")
                models[kind] = load_model(path)
            pairs: dict[str, list[tuple[float, float]]] = {
                row: [] for row in SCORER_ROWS}
            for i, tid in enumerate(arrays["trial_ids"]):
                feats = arrays["features"][i]
                rng_e = rng_stream(seed, "eval", category.value, tid, "e")
                rng_s = rng_stream(seed, "eval", category.value, tid, "s")
                f_e = perceive(feats, cfg.perception, rng_e)
                f_s = perceive(feats, cfg.perception, rng_s)
                post_e = arrays["posterior_expected"][i]
                post_s = arrays["posterior_surprising"][i]
                for kind in MODEL_KINDS:
                    pairs[kind].append(_pair_scores(
                        models[kind], f_e, f_s, post_e, post_s))
                pairs["baseline"].append((baseline_score(), baseline_score()))
                rng_r = rng_stream(seed, "random", category.value, tid)
                pairs["random"].append((random_score(rng_r), random_score(rng_r)))
            for row in SCORER_ROWS:
                hr = hit_rate(pairs[row])
                rows[row].append(1.0 - hr if cfg.reality == "flipped" else hr)
        per_category[category.value] = {
            row: {"mean": float(np.mean(vals)), "std": float(np.std(vals)),
                  "per_seed": vals}
            for row, vals in rows.items()
        }

    averages = {
        row: float(np.mean([per_category[c.value][row]["mean"]
                            for c in cfg.categories]))
        for row in SCORER_ROWS
    }
    return {
        "reality": cfg.reality,
        "metric": "hit_rate" if cfg.reality == "normal" else "1 - hit_rate",
        "split": split,
        "seeds": list(cfg.seeds),
        "perception": cfg.perception.to_dict(),
        "categories": [c.value for c in cfg.categories],
        "per_category": per_category,
        "average": averages,
    }


def format_report_table(report: dict) -> str:
    """Human-readable table mirroring the per-category hit-rate layout."""
    cats = report["categories"]
    label = {"ofpr": "OFPR", "of": "OF (ablation)",
             "baseline": "Baseline", "random": "Random"}
    header = f"{report['metric']} ({report['reality']} reality, split={report['split']})"
    lines = [header, ""]
    head = ["Method".ljust(15)] + [c.center(15) for c in cats] + ["Average".center(9)]
    lines.append(" ".join(head))
    for row in SCORER_ROWS:
        cells = [label[row].ljust(15)]
        for c in cats:
            entry = report["per_category"][c][row]
            cells.append(f"{entry['mean']:.3f} ± {entry['std']:.3f}".center(15))
        cells.append(f"{report['average'][row]:.3f}".center(9))
        lines.append(" ".join(cells))
    return "\n".join(lines) + "\n"


def write_report(report: dict, out_dir: str | Path) -> tuple[Path, Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    name = f"report_{report['reality']}"
    json_path = out / f"{name}.json"
    txt_path = out / f"{name}.txt"
    tmp = json_path.with_suffix(".json.tmp")
    tmp.write_text(json.dumps(report, sort_keys=True, separators=(",", ":")) + "\n")
    tmp.replace(json_path)
    tmp = txt_path.with_suffix(".txt.tmp")
    tmp.write_text(format_report_table(report))
    tmp.replace(txt_path)
    return json_path, txt_path
