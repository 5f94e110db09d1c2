"""Reasoning models: the two-stage tree model, its single-stage ablation, and
the constant/random reference scorers.

The two-stage model (OFPR) predicts 13 prior verdicts from features, then 9
posterior verdicts from features concatenated with prior verdicts.  Training
uses teacher forcing by default (ground-truth priors feed the second tree);
inference always feeds the predicted priors.  The ablation (OF) maps features
to posterior verdicts with a single tree.

A scene is scored surprising (1) when the predicted posterior disagrees with
the observed posterior oracle on any rule that is relevant on either side.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .catalog import (IRRELEVANT, N_FEATURES, N_POSTERIOR_RULES,
                      N_PRIOR_RULES, SLOT_KINDS, SLOT_NAMES, PriorRule)
from .trees import MultiTargetTree, TrainConfig, fit_tree

PRIOR_SLOT_KINDS = tuple(["categorical"] * N_PRIOR_RULES)
PRIOR_SLOT_NAMES = tuple(f"prior_{r.name.lower()}" for r in PriorRule)


@dataclass(frozen=True)
class OFPRTrainConfig:
    tree: TrainConfig = field(default_factory=TrainConfig)
    posterior_inputs: str = "teacher"      # "teacher" | "predicted"

    def __post_init__(self) -> None:
        if self.posterior_inputs not in ("teacher", "predicted"):
            raise ValueError("posterior_inputs must be 'teacher' or 'predicted'")


@dataclass
class OFPRModel:
    tree_prior: MultiTargetTree     # features (24) -> 13 prior verdicts
    tree_post: MultiTargetTree      # features + priors (37) -> 9 posterior verdicts

    def predict_prior(self, f: np.ndarray) -> np.ndarray:
        return self.tree_prior.predict(f).astype(np.int8)

    def predict_posterior(self, f: np.ndarray) -> np.ndarray:
        prior = self.predict_prior(f)
        stacked = np.concatenate([f, prior.astype(np.float64)])
        return self.tree_post.predict(stacked).astype(np.int8)

    def to_dict(self) -> dict:
        return {"kind": "ofpr", "tree_prior": self.tree_prior.to_dict(),
                "tree_post": self.tree_post.to_dict()}


@dataclass
class OFModel:
    tree_direct: MultiTargetTree    # features (24) -> 9 posterior verdicts

    def predict_posterior(self, f: np.ndarray) -> np.ndarray:
        return self.tree_direct.predict(f).astype(np.int8)

    def to_dict(self) -> dict:
        return {"kind": "of", "tree_direct": self.tree_direct.to_dict()}


def train_ofpr(features: np.ndarray, priors: np.ndarray, posteriors: np.ndarray,
               cfg: OFPRTrainConfig = OFPRTrainConfig()) -> OFPRModel:
    """Fit both stages on (features, prior, posterior) rows of expected scenes."""
    _check_rows(features, priors, posteriors)
    tree_prior = fit_tree(features, priors, SLOT_KINDS, cfg.tree, SLOT_NAMES)
    if cfg.posterior_inputs == "teacher":
        prior_in = priors.astype(np.float64)
    else:
        prior_in = tree_prior.predict_batch(features).astype(np.float64)
    stacked = np.concatenate([features, prior_in], axis=1)
    tree_post = fit_tree(stacked, posteriors, SLOT_KINDS + PRIOR_SLOT_KINDS,
                         cfg.tree, SLOT_NAMES + PRIOR_SLOT_NAMES)
    return OFPRModel(tree_prior=tree_prior, tree_post=tree_post)


def train_of(features: np.ndarray, posteriors: np.ndarray,
             cfg: OFPRTrainConfig = OFPRTrainConfig()) -> OFModel:
    """Fit the single-stage ablation: features straight to posterior verdicts."""
    if len(features) == 0:
        raise ValueError("empty training set")
    tree = fit_tree(features, posteriors, SLOT_KINDS, cfg.tree, SLOT_NAMES)
    return OFModel(tree_direct=tree)


def _check_rows(features, priors, posteriors) -> None:
    if len(features) == 0:
        raise ValueError("empty training set")
    if features.shape[1] != N_FEATURES or priors.shape[1] != N_PRIOR_RULES \
            or posteriors.shape[1] != N_POSTERIOR_RULES:
        raise ValueError("label arity mismatch")
    if not (len(features) == len(priors) == len(posteriors)):
        raise ValueError("row count mismatch")


def score_surprise(predicted: np.ndarray, observed: np.ndarray) -> int:
    """1 iff prediction and observation differ on a rule relevant to either."""
    differs = predicted != observed
    both_irrelevant = (predicted == IRRELEVANT) & (observed == IRRELEVANT)
    return int(bool(np.any(differs & ~both_irrelevant)))


def score_surprise_ofpr(model: OFPRModel, f_perceived: np.ndarray,
                        observed: np.ndarray) -> int:
    return score_surprise(model.predict_posterior(f_perceived), observed)


def score_surprise_of(model: OFModel, f_perceived: np.ndarray,
                      observed: np.ndarray) -> int:
    return score_surprise(model.predict_posterior(f_perceived), observed)


def baseline_score(*_args) -> float:
    """Constant scorer: every scene looks expected."""
    return 0.0


def random_score(rng: np.random.Generator) -> float:
    """Uniform surprise rating in [0, 1]."""
    return float(rng.uniform(0.0, 1.0))


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

def save_model(model: OFPRModel | OFModel, path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(json.dumps(model.to_dict(), sort_keys=True,
                              separators=(",", ":")) + "\n")
    tmp.replace(path)


def load_model(path: str | Path) -> OFPRModel | OFModel:
    d = json.loads(Path(path).read_text())
    if d["kind"] == "ofpr":
        return OFPRModel(tree_prior=MultiTargetTree.from_dict(d["tree_prior"]),
                         tree_post=MultiTargetTree.from_dict(d["tree_post"]))
    if d["kind"] == "of":
        return OFModel(tree_direct=MultiTargetTree.from_dict(d["tree_direct"]))
    raise ValueError(f"unknown model kind {d.get('kind')!r}")
