"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
lines.  Criteria 1-10 exercise the benchmark engine itself; criterion 11
drives the trial service with scripted clients (the rating frontend has its
own end-to-end suite for criterion 12).
"""
import hashlib
import json
import time
from pathlib import Path

import numpy as np
import pytest

from voebench.catalog import PriorRule
from voebench.cli import main as cli_main
from voebench.core import EventCategory, rng_stream
from voebench.dataset import generate_dataset
from voebench.metrics import (TrialScores, auc_roc, cohens_kappa, hit_rate,
                              human_hit_rate, z_normalize)
from voebench.models import (baseline_score, random_score, score_surprise,
                             train_of, train_ofpr)
from voebench.perception import PerceptionConfig, perceive
from voebench.physics import extract_outcome, simulate_expected
from voebench.rules import eval_posterior, eval_prior, extract_features
from voebench.scenarios import sample_spec, sample_trial, subtype_allocation
from voebench.service import Study
from voebench.trees import fit_tree

from test_trees import brute_force_cart

TRAIN_SEED = 11       # generation stream for training scenes
EVAL_SEED = 99        # generation stream for held-out pairs
N_TRAIN = 375
N_EVAL = 100
EVAL_NOISE_SEEDS = list(range(10))


def _report(number: int, description: str, ok: bool) -> None:
    print(f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {description}")
    assert ok, f"criterion {number} failed: {description}"


@pytest.fixture(scope="module")
def bench():
    """Training/eval trials and fitted models for every category."""
    data = {}
    t0 = time.monotonic()
    for cat in EventCategory:
        train = [sample_trial(TRAIN_SEED, cat, st, i)
                 for i, st in enumerate(subtype_allocation(cat, N_TRAIN))]
        test = [sample_trial(EVAL_SEED, cat, st, i)
                for i, st in enumerate(subtype_allocation(cat, N_EVAL))]
        F = np.stack([t.features for t in train])
        P = np.stack([t.prior for t in train])
        Y = np.stack([t.posterior_expected for t in train])
        Yf = np.stack([t.posterior_surprising for t in train])
        data[cat] = {
            "test": test,
            "ofpr": train_ofpr(F, P, Y),
            "of": train_of(F, Y),
            "ofpr_flipped": train_ofpr(F, P, Yf),
        }
    data["build_seconds"] = time.monotonic() - t0
    return data


def _model_pairs(model, trials, cfg=None, seed=0):
    pairs = []
    for t in trials:
        if cfg is None:
            fe = fs = t.features
        else:
            fe = perceive(t.features, cfg, rng_stream(seed, "e", t.trial_id))
            fs = perceive(t.features, cfg, rng_stream(seed, "s", t.trial_id))
        pairs.append((score_surprise(model.predict_posterior(fe), t.posterior_expected),
                      score_surprise(model.predict_posterior(fs), t.posterior_surprising)))
    return pairs


def test_criterion_1_oracle_closure():
    t0 = time.monotonic()
    mismatches = 0
    n_checked = 0
    for cat in EventCategory:
        for i, st in enumerate(subtype_allocation(cat, 1000)):
            rng = rng_stream(2024, "closure", cat.value, i)
            spec = sample_spec(cat, st, rng)
            by_frames = extract_outcome(simulate_expected(spec), spec)
            f = extract_features(spec)
            by_rules = eval_posterior(f, eval_prior(f))
            mismatches += int(not np.array_equal(by_frames, by_rules))
            n_checked += 1
    elapsed = time.monotonic() - t0
    _report(1, f"oracle closure on {n_checked} specs, {mismatches} mismatches, "
               f"{elapsed:.1f}s (< 60s)",
            mismatches == 0 and elapsed < 60.0 and n_checked == 5000)


def test_criterion_2_noise_free_ceiling(bench):
    t0 = time.monotonic()
    rates = {}
    for cat in EventCategory:
        rates[cat.value] = hit_rate(_model_pairs(bench[cat]["ofpr"], bench[cat]["test"]))
    elapsed = bench["build_seconds"] + (time.monotonic() - t0)
    detail = " ".join(f"{c}={r:.3f}" for c, r in rates.items())
    _report(2, f"noise-free OFPR ceiling {detail}, {elapsed:.0f}s (< 300s)",
            all(r >= 0.98 for r in rates.values()) and elapsed < 300.0)


def test_criterion_3_baseline_exactness(bench):
    rates = {}
    for cat in EventCategory:
        pairs = [(baseline_score(), baseline_score()) for _ in bench[cat]["test"]]
        rates[cat.value] = hit_rate(pairs)
    _report(3, f"constant baseline H_r = {sorted(set(rates.values()))} in every category",
            all(r == 0.5 for r in rates.values()))


def test_criterion_4_random_scorer(bench):
    means = {}
    for cat in EventCategory:
        per_seed = []
        for seed in EVAL_NOISE_SEEDS:
            pairs = []
            for t in bench[cat]["test"]:
                rng = rng_stream(seed, "rand", cat.value, t.trial_id)
                pairs.append((random_score(rng), random_score(rng)))
            per_seed.append(hit_rate(pairs))
        means[cat.value] = float(np.mean(per_seed))
    detail = " ".join(f"{c}={m:.3f}" for c, m in means.items())
    _report(4, f"random scorer mean H_r {detail} (0.50 +/- 0.03)",
            all(abs(m - 0.5) <= 0.03 for m in means.values()))


def test_criterion_5_ablation_ordering_under_noise(bench):
    cfg = PerceptionConfig(sigma_scalar=0.1)
    gaps = []
    for cat in EventCategory:
        ofpr_rates, of_rates = [], []
        for seed in EVAL_NOISE_SEEDS:
            ofpr_rates.append(hit_rate(_model_pairs(bench[cat]["ofpr"],
                                                    bench[cat]["test"], cfg, seed)))
            of_rates.append(hit_rate(_model_pairs(bench[cat]["of"],
                                                  bench[cat]["test"], cfg, seed)))
        gaps.append(float(np.mean(ofpr_rates) - np.mean(of_rates)))
    mean_gap = float(np.mean(gaps))
    _report(5, f"sigma=0.1 OFPR-vs-OF mean gap {mean_gap:+.4f} across categories (>= 0)",
            mean_gap >= 0.0)


def test_criterion_6_flipped_reality(bench):
    flipped = {}
    for cat in EventCategory:
        per_seed = []
        for _seed in EVAL_NOISE_SEEDS:
            pairs = _model_pairs(bench[cat]["ofpr_flipped"], bench[cat]["test"])
            per_seed.append(1.0 - hit_rate(pairs))
        flipped[cat.value] = float(np.mean(per_seed))
    detail = " ".join(f"{c}={v:.3f}" for c, v in flipped.items())
    _report(6, f"flipped-reality 1-H_r {detail} (> 0.55 everywhere)",
            all(v > 0.55 for v in flipped.values()))


def test_criterion_7_combination_estimator_equivalence():
    rng = np.random.default_rng(2718)
    ok = True
    for _ in range(20):
        trials = []
        for i in range(rng.integers(1, 6)):
            n_e = int(rng.integers(1, 26))
            n_s = int(rng.integers(1, 26))
            trials.append(TrialScores(
                trial_id=f"t{i}",
                e_list=[float(x) for x in rng.normal(size=n_e)],
                s_list=[float(x) for x in rng.normal(size=n_s)]))
        got = human_hit_rate(trials).value
        # brute-force enumeration of every rating combination
        per_trial = []
        for t in trials:
            combos = []
            for e in t.e_list:
                for s in t.s_list:
                    combos.append(1.0 if e < s else (0.5 if e == s else 0.0))
            per_trial.append(sum(combos) / len(combos))
        expected = sum(per_trial) / len(per_trial)
        ok = ok and got == expected
    # the full 25 x 25 = 625 combination case
    t625 = TrialScores("x", e_list=list(np.linspace(-1, 1, 25)),
                       s_list=list(np.linspace(-0.5, 1.5, 25)))
    combos = [1.0 if e < s else (0.5 if e == s else 0.0)
              for e in t625.e_list for s in t625.s_list]
    ok = ok and len(combos) == 625
    ok = ok and human_hit_rate([t625]).value == sum(combos) / 625
    _report(7, "human hit rate equals brute-force enumeration exactly", ok)


def test_criterion_8_metric_unit_checks():
    a = [1] * 20 + [1] * 5 + [0] * 10 + [0] * 15
    b = [1] * 20 + [0] * 5 + [1] * 10 + [0] * 15
    kappa = cohens_kappa(a, b)
    auc = auc_roc([0.1, 0.4, 0.35, 0.8], [0, 0, 1, 1])
    z = z_normalize([0, 50, 100])
    ok = (abs(kappa - 0.4) <= 1e-9
          and abs(auc - 0.75) <= 1e-9
          and np.allclose(z, [-1.2247, 0.0, 1.2247], atol=1e-4))
    _report(8, f"kappa={kappa:.10f} auc={auc:.10f} z={np.round(z, 4).tolist()}", ok)


def test_criterion_9_full_run_determinism(tmp_path):
    def run(tag: str) -> dict[str, str]:
        ds = tmp_path / f"ds_{tag}"
        out = tmp_path / f"run_{tag}"
        assert cli_main(["gen", "--trials", "20", "--seed", "5",
                         "--out", str(ds)]) == 0
        assert cli_main(["train", "--dataset", str(ds), "--out", str(out),
                         "--seeds", "0,1"]) == 0
        assert cli_main(["eval", "--dataset", str(ds), "--out", str(out),
                         "--seeds", "0,1"]) == 0
        sums = {}
        for root in (ds, out):
            for p in sorted(root.rglob("*")):
                if p.is_file():
                    rel = f"{root.name.split('_')[0]}/{p.relative_to(root)}"
                    sums[rel] = hashlib.sha256(p.read_bytes()).hexdigest()
        return sums
    first = run("a")
    second = run("b")
    _report(9, f"gen->train->eval byte-identical across runs "
               f"({len(first)} artifacts)", first == second and len(first) > 10)


def test_criterion_10_tree_matches_bruteforce_cart():
    rng = np.random.default_rng(31415)
    failures = 0
    for _ in range(50):
        n = int(rng.integers(4, 51))
        p = int(rng.integers(1, 5))
        kinds = tuple(rng.choice(["scalar", "categorical"]) for _ in range(p))
        X = np.empty((n, p))
        for j, kind in enumerate(kinds):
            if kind == "scalar":
                X[:, j] = np.round(rng.uniform(-1, 1, n), 2)
            else:
                X[:, j] = rng.integers(0, 4, n).astype(float)
        y = rng.choice([-1, 0, 1], n)
        tree = fit_tree(X, y, kinds)
        oracle = brute_force_cart(X, y, kinds)
        mine = tree.predict_batch(X)[:, 0]
        theirs = np.array([oracle(row) for row in X])
        failures += int(not np.array_equal(mine, theirs))
    _report(10, f"single-target tree == brute-force CART on 50 datasets "
                f"({failures} mismatches)", failures == 0)


@pytest.mark.secondary
def test_criterion_11_counterbalance(tmp_path):
    ds = tmp_path / "big"
    generate_dataset(ds, {cat: 500 for cat in EventCategory}, seed=21)
    study = Study(dataset=ds, out_dir=tmp_path / "study", n_trials=250, seed=0)
    assert len(study.pool) == 250
    for i in range(50):
        study.create_session(f"p{i}")
    counts = [study.version_counts[tid]["expected"] for tid in study.pool]
    lo, hi = min(counts), max(counts)
    _report(11, f"50 sessions x 250 trials: expected-version counts in "
                f"[{lo}, {hi}] (25 +/- 1)", lo >= 24 and hi <= 26)
