"""Evaluation metrics: pairwise hit rate, the rating-combination estimator for
human data, per-rater Z-normalization, Cohen's kappa, and AUC-ROC.

Conventions pinned here (and exercised by the acceptance suite):
  * the hit rate is the mean over trials of 1 / 0.5 / 0 for E<S / E==S / E>S;
  * Z-scores use the population standard deviation over one rater's ratings;
  * kappa's degenerate case (chance agreement exactly 1) is defined as 1 when
    observed agreement is 1, else 0;
  * AUC uses midranks, so ties contribute 0.5.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np


class ZeroVarianceError(ValueError):
    """A rater used a single slider value; Z-scores are undefined."""


@dataclass
class TrialScores:
    """Surprise scores for one trial: single pair (model) or rating lists (human)."""

    trial_id: str
    e: Optional[float] = None
    s: Optional[float] = None
    e_list: Optional[list[float]] = None
    s_list: Optional[list[float]] = None


@dataclass
class RaterRecord:
    """One participant's raw ratings: (trial_id, version, integer in [0, 100])."""

    rater_id: str
    items: list[tuple[str, str, int]] = field(default_factory=list)

    def raw_values(self) -> list[int]:
        return [raw for _, _, raw in self.items]


def eq1_score(e: float, s: float) -> float:
    """Per-trial hit: 1 if the expected scene scored lower, 0.5 on ties, else 0."""
    if e < s:
        return 1.0
    if e == s:
        return 0.5
    return 0.0


def _as_pairs(pairs: Iterable) -> list[tuple[float, float]]:
    out = []
    for p in pairs:
        if isinstance(p, TrialScores):
            if p.e is None or p.s is None:
                raise ValueError(f"trial {p.trial_id} lacks paired scores")
            out.append((p.e, p.s))
        else:
            e, s = p
            out.append((float(e), float(s)))
    return out


def hit_rate(pairs: Iterable) -> float:
    """Mean per-trial hit over (expected, surprising) score pairs."""
    rows = _as_pairs(pairs)
    if not rows:
        raise ValueError("hit_rate needs at least one trial")
    return float(np.mean([eq1_score(e, s) for e, s in rows]))


def flipped_hit_rate(pairs: Iterable) -> float:
    """Complement of the hit rate, used when training on surprising scenes."""
    return 1.0 - hit_rate(pairs)


@dataclass
class HumanHitRate:
    value: float
    n_trials: int
    n_excluded: int     # trials missing ratings for one version


def human_hit_rate(trials: Iterable[TrialScores]) -> HumanHitRate:
    """Average the per-trial hit over the full expected x surprising rating
    cross product, then average across trials."""
    per_trial = []
    excluded = 0
    for t in trials:
        if not t.e_list or not t.s_list:
            excluded += 1
            continue
        combos = [eq1_score(e, s) for e in t.e_list for s in t.s_list]
        per_trial.append(float(np.mean(combos)))
    if not per_trial:
        raise ValueError("no trial has ratings for both versions")
    return HumanHitRate(value=float(np.mean(per_trial)),
                        n_trials=len(per_trial), n_excluded=excluded)


def z_normalize(ratings: Sequence[float]) -> np.ndarray:
    """Standardize one rater's ratings with the population std."""
    arr = np.asarray(ratings, dtype=np.float64)
    if arr.size < 2:
        raise ZeroVarianceError("need at least two ratings")
    std = float(arr.std())
    if std == 0.0:
        raise ZeroVarianceError("constant ratings cannot be Z-normalized")
    return (arr - arr.mean()) / std


def cohens_kappa(a: Sequence[int], b: Sequence[int]) -> float:
    """Cohen's kappa for paired binary labels."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape or a.size == 0:
        raise ValueError("kappa needs equal-length non-empty label vectors")
    n = a.size
    po = float(np.mean(a == b))
    pa1 = float(np.mean(a == 1))
    pb1 = float(np.mean(b == 1))
    pe = pa1 * pb1 + (1.0 - pa1) * (1.0 - pb1)
    if pe == 1.0:
        return 1.0 if po == 1.0 else 0.0
    return (po - pe) / (1.0 - pe)


@dataclass
class KappaSummary:
    values: list[float]
    pairs: list[tuple[str, str]]
    mean: float
    n_skipped: int      # rater pairs with no common scenes


def pairwise_kappa(labels_by_rater: dict[str, dict], min_common: int = 1) -> KappaSummary:
    """Kappa for every rater pair over the scenes both rated."""
    raters = sorted(labels_by_rater)
    if len(raters) < 2:
        raise ValueError("need at least two raters")
    values, pairs, skipped = [], [], 0
    for r1, r2 in itertools.combinations(raters, 2):
        common = sorted(set(labels_by_rater[r1]) & set(labels_by_rater[r2]))
        if len(common) < min_common:
            skipped += 1
            continue
        a = [labels_by_rater[r1][key] for key in common]
        b = [labels_by_rater[r2][key] for key in common]
        values.append(cohens_kappa(a, b))
        pairs.append((r1, r2))
    if not values:
        raise ValueError("no rater pair shares a scene")
    return KappaSummary(values=values, pairs=pairs,
                        mean=float(np.mean(values)), n_skipped=skipped)


def auc_roc(scores: Sequence[float], labels: Sequence[int]) -> float:
    """Rank-based (Mann-Whitney) AUC with midrank tie handling."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    n_pos = int(np.sum(labels == 1))
    n_neg = int(np.sum(labels == 0))
    if n_pos == 0 or n_neg == 0:
        raise ValueError("AUC needs both classes")
    order = np.argsort(scores, kind="stable")
    ranks = np.empty(len(scores), dtype=np.float64)
    sorted_scores = scores[order]
    i = 0
    while i < len(scores):
        j = i
        while j + 1 < len(scores) and sorted_scores[j + 1] == sorted_scores[i]:
            j += 1
        ranks[order[i:j + 1]] = (i + j) / 2.0 + 1.0   # midrank, 1-based
        i = j + 1
    rank_sum_pos = float(ranks[labels == 1].sum())
    return (rank_sum_pos - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)


# ---------------------------------------------------------------------------
# Human-study analysis (shared by the trial service and the report command)
# ---------------------------------------------------------------------------

@dataclass
class StudyAnalysis:
    n_raters: int
    n_trials: int
    human_hit_rate: float
    trials_excluded: int
    kappa_mean: float
    kappa_values: list[float]
    kappa_pairs: int                 # pairs sharing at least one scene
    kappa_pairs_enumerated: int      # all C(n_raters, 2) pairs
    auc: float
    excluded_zero_variance: list[str]

    def to_dict(self) -> dict:
        import math

        return {
            "n_raters": self.n_raters,
            "n_trials": self.n_trials,
            "human_hit_rate": self.human_hit_rate,
            "trials_excluded": self.trials_excluded,
            "kappa_mean": None if math.isnan(self.kappa_mean) else self.kappa_mean,
            "kappa_values": self.kappa_values,
            "kappa_pairs": self.kappa_pairs,
            "kappa_pairs_enumerated": self.kappa_pairs_enumerated,
            "auc": self.auc,
            "excluded_zero_variance": self.excluded_zero_variance,
        }


def analyze_ratings(records: Iterable[RaterRecord]) -> StudyAnalysis:
    """Z-normalize each rater, then compute the human hit rate, the pairwise
    kappa distribution (Z thresholded at 0), and the AUC of mean scene ratings.

    Raters with zero rating variance are excluded and reported.
    """
    z_by_rater: dict[str, dict[tuple[str, str], float]] = {}
    excluded: list[str] = []
    for rec in records:
        for _, version, raw in rec.items:
            if not (isinstance(raw, (int, np.integer)) and 0 <= raw <= 100):
                raise ValueError(f"rating {raw!r} outside integer [0, 100]")
        try:
            z = z_normalize(rec.raw_values())
        except ZeroVarianceError:
            excluded.append(rec.rater_id)
            continue
        z_by_rater[rec.rater_id] = {
            (trial, version): float(zv)
            for (trial, version, _), zv in zip(rec.items, z)
        }
    if not z_by_rater:
        raise ValueError("no usable raters")

    scene_z: dict[tuple[str, str], list[float]] = {}
    for mapping in z_by_rater.values():
        for key, zv in mapping.items():
            scene_z.setdefault(key, []).append(zv)

    trial_ids = sorted({trial for trial, _ in scene_z})
    trials = [TrialScores(trial_id=t,
                          e_list=scene_z.get((t, "expected")),
                          s_list=scene_z.get((t, "surprising")))
              for t in trial_ids]
    hr = human_hit_rate(trials)

    labels_by_rater = {
        rater: {key: (1 if zv >= 0.0 else 0) for key, zv in mapping.items()}
        for rater, mapping in z_by_rater.items()
    }
    n_raters = len(labels_by_rater)
    kappa_mean, kappa_values, kappa_pairs = float("nan"), [], 0
    kappa_enumerated = n_raters * (n_raters - 1) // 2
    if n_raters >= 2:
        try:
            ks = pairwise_kappa(labels_by_rater)
        except ValueError:
            pass   # no pair shares a scene; kappa stays undefined
        else:
            kappa_mean, kappa_values, kappa_pairs = ks.mean, ks.values, len(ks.pairs)

    mean_scores = [float(np.mean(zs)) for zs in scene_z.values()]
    scene_labels = [1 if version == "surprising" else 0 for _, version in scene_z]
    auc = auc_roc(mean_scores, scene_labels)

    return StudyAnalysis(
        n_raters=len(z_by_rater),
        n_trials=len(trial_ids),
        human_hit_rate=hr.value,
        trials_excluded=hr.n_excluded,
        kappa_mean=kappa_mean,
        kappa_values=kappa_values,
        kappa_pairs=kappa_pairs,
        kappa_pairs_enumerated=kappa_enumerated,
        auc=auc,
        excluded_zero_variance=sorted(excluded),
    )
