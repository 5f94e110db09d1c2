"""Noisy feature oracle standing in for a learned perception stage.

Takes a ground-truth engineered feature vector and corrupts it with
configurable relative scalar noise, categorical label flips, and relevance
errors, while preserving the -1/Irrelevant protocol: every output scalar is
non-negative or exactly -1.

Velocity-derived slots (speed magnitudes and the momentum proxy) receive
doubled noise so collision stays the hardest category, mirroring where a
frame-based perceiver struggles most.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .catalog import FEATURE_SLOTS, Feat, N_FEATURES, SENTINEL

VELOCITY_SLOTS = frozenset(
    {Feat.SPEED_MAG, Feat.SECOND_SPEED_MAG, Feat.MOMENTUM_PROXY})


@dataclass(frozen=True)
class PerceptionConfig:
    sigma_scalar: float = 0.0        # relative noise std dev on scalar slots
    p_flip: float = 0.0              # categorical flip probability
    p_irrelevance_error: float = 0.0  # probability of corrupting relevance
    seed: int = 0

    def __post_init__(self) -> None:
        if self.sigma_scalar < 0:
            raise ValueError("sigma_scalar must be >= 0")
        for name in ("p_flip", "p_irrelevance_error"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must be in [0, 1]")

    def to_dict(self) -> dict:
        return {"sigma_scalar": self.sigma_scalar, "p_flip": self.p_flip,
                "p_irrelevance_error": self.p_irrelevance_error, "seed": self.seed}

    @staticmethod
    def from_dict(d: dict) -> "PerceptionConfig":
        return PerceptionConfig(
            sigma_scalar=d.get("sigma_scalar", 0.0),
            p_flip=d.get("p_flip", 0.0),
            p_irrelevance_error=d.get("p_irrelevance_error", 0.0),
            seed=d.get("seed", 0))


def _noise_free(cfg: PerceptionConfig) -> bool:
    return cfg.sigma_scalar == 0.0 and cfg.p_flip == 0.0 and cfg.p_irrelevance_error == 0.0


def perceive(truth: np.ndarray, cfg: PerceptionConfig,
             rng: np.random.Generator) -> np.ndarray:
    """Corrupted copy of a ground-truth feature vector.

    Noise-free configs return the input bit-for-bit.  Draws happen in slot
    order, so output is deterministic for a fixed (truth, cfg, rng state).
    """
    if truth.shape != (N_FEATURES,):
        raise ValueError(f"expected a {N_FEATURES}-slot vector")
    if _noise_free(cfg):
        return truth.copy()

    out = truth.copy()
    for slot in FEATURE_SLOTS:
        i = slot.index
        relevant = out[i] != SENTINEL
        if cfg.p_irrelevance_error > 0 and rng.random() < cfg.p_irrelevance_error:
            if relevant:
                out[i] = SENTINEL
                continue
            # spuriously "perceive" an absent feature
            if slot.kind == "scalar":
                out[i] = rng.uniform(slot.lo, slot.hi)
            else:
                out[i] = float(rng.integers(len(slot.labels)))
            continue
        if not relevant:
            continue
        if slot.kind == "scalar":
            sigma = cfg.sigma_scalar * (2.0 if i in VELOCITY_SLOTS else 1.0)
            if sigma > 0:
                out[i] = max(0.0, out[i] * (1.0 + rng.normal(0.0, sigma)))
        else:
            if cfg.p_flip > 0 and rng.random() < cfg.p_flip and len(slot.labels) > 1:
                others = [c for c in range(len(slot.labels)) if c != int(out[i])]
                out[i] = float(others[int(rng.integers(len(others)))])
    return out
