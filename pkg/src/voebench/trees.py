"""Multi-target decision tree with a mean-Gini split criterion.

Greedy top-down induction over mixed scalar/categorical slots.  At each node
the split maximizing the mean Gini impurity reduction across all targets wins;
scalar candidates are midpoints between consecutive distinct sorted values,
categorical candidates are one-vs-rest on a single label code.  The -1
sentinel participates as an ordinary scalar value, so irrelevance is learnable.

Determinism: candidates are scanned slots-ascending, thresholds/labels
ascending, and ties keep the first best, so identical data yields identical
trees.  Target classes are fixed to {-1, 0, 1} (Irrelevant / No / Yes).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

CLASSES = (-1, 0, 1)
_GAIN_EPS = 1e-12


@dataclass(frozen=True)
class TrainConfig:
    max_depth: int = 12
    min_samples_leaf: int = 2

    def __post_init__(self) -> None:
        if self.max_depth < 1:
            raise ValueError("max_depth must be >= 1")
        if self.min_samples_leaf < 1:
            raise ValueError("min_samples_leaf must be >= 1")


@dataclass
class Leaf:
    counts: np.ndarray        # (targets, 3) class counts, columns = class value + 1
    majority: np.ndarray      # (targets,) class values

    def to_dict(self) -> dict:
        return {"leaf": True, "counts": self.counts.tolist(),
                "majority": self.majority.tolist()}


@dataclass
class Internal:
    slot: int
    kind: str                            # "scalar" | "categorical"
    value: float                         # threshold, or label code
    left: Union["Internal", Leaf] = None
    right: Union["Internal", Leaf] = None

    def to_dict(self) -> dict:
        return {"leaf": False, "slot": self.slot, "kind": self.kind,
                "value": self.value, "left": self.left.to_dict(),
                "right": self.right.to_dict()}


@dataclass
class MultiTargetTree:
    root: Union[Internal, Leaf]
    n_slots: int
    n_targets: int
    slot_kinds: tuple[str, ...]
    slot_names: tuple[str, ...] = ()

    def predict(self, x: np.ndarray) -> np.ndarray:
        if x.shape != (self.n_slots,):
            raise ValueError(f"expected {self.n_slots} slots, got {x.shape}")
        node = self.root
        while isinstance(node, Internal):
            if node.kind == "scalar":
                node = node.left if x[node.slot] <= node.value else node.right
            else:
                node = node.left if x[node.slot] == node.value else node.right
        return node.majority.copy()

    def predict_batch(self, X: np.ndarray) -> np.ndarray:
        return np.stack([self.predict(row) for row in X])

    def depth(self) -> int:
        def walk(node, d):
            if isinstance(node, Leaf):
                return d
            return max(walk(node.left, d + 1), walk(node.right, d + 1))

        return walk(self.root, 0)

    def to_dict(self) -> dict:
        return {"n_slots": self.n_slots, "n_targets": self.n_targets,
                "slot_kinds": list(self.slot_kinds),
                "slot_names": list(self.slot_names),
                "root": self.root.to_dict()}

    @staticmethod
    def from_dict(d: dict) -> "MultiTargetTree":
        def walk(nd: dict):
            if nd["leaf"]:
                return Leaf(counts=np.asarray(nd["counts"], dtype=np.int64),
                            majority=np.asarray(nd["majority"], dtype=np.int8))
            return Internal(slot=nd["slot"], kind=nd["kind"], value=nd["value"],
                            left=walk(nd["left"]), right=walk(nd["right"]))

        return MultiTargetTree(root=walk(d["root"]), n_slots=d["n_slots"],
                               n_targets=d["n_targets"],
                               slot_kinds=tuple(d["slot_kinds"]),
                               slot_names=tuple(d.get("slot_names", ())))


def _one_hot(Y: np.ndarray) -> np.ndarray:
    """(n, T) class values in {-1,0,1} -> (n, T, 3) int64 one-hot."""
    idx = (Y + 1).astype(np.int64)
    oh = np.zeros((*Y.shape, 3), dtype=np.int64)
    n_idx = np.arange(Y.shape[0])[:, None]
    t_idx = np.arange(Y.shape[1])[None, :]
    oh[n_idx, t_idx, idx] = 1
    return oh


def _weighted_gini(counts: np.ndarray, sizes: np.ndarray) -> np.ndarray:
    """size * Gini for count blocks.

    counts: (..., T, 3), sizes: broadcastable to (...); result (..., T).
    Uses size*g = size - sum(c^2)/size, exact for integer counts.
    """
    sumsq = np.einsum("...tc,...tc->...t", counts.astype(np.float64),
                      counts.astype(np.float64))
    sizes = np.asarray(sizes, dtype=np.float64)
    return sizes[..., None] - sumsq / sizes[..., None]


def _make_leaf(oh: np.ndarray) -> Leaf:
    counts = oh.sum(axis=0)                       # (T, 3)
    majority = (np.argmax(counts, axis=1) - 1).astype(np.int8)
    return Leaf(counts=counts, majority=majority)


def _best_split(X: np.ndarray, oh: np.ndarray, slot_kinds: tuple[str, ...],
                min_leaf: int) -> Optional[tuple[float, int, str, float]]:
    """(gain, slot, kind, value) of the best candidate or None.

    Scanned slots-ascending / values-ascending with strict improvement, so the
    first best wins ties.
    """
    n, T = oh.shape[0], oh.shape[1]
    total = oh.sum(axis=0)                        # (T, 3)
    parent = float(_weighted_gini(total[None], np.array([n]))[0].mean()) / n
    best: Optional[tuple[float, int, str, float]] = None

    for slot, kind in enumerate(slot_kinds):
        x = X[:, slot]
        if kind == "scalar":
            order = np.argsort(x, kind="stable")
            xs = x[order]
            cum = np.cumsum(oh[order], axis=0)    # (n, T, 3)
            ks = np.arange(1, n)
            valid = (xs[1:] > xs[:-1]) & (ks >= min_leaf) & (n - ks >= min_leaf)
            if not valid.any():
                continue
            ks = ks[valid]
            left = cum[ks - 1]                    # (K, T, 3)
            right = total[None] - left
            child = (_weighted_gini(left, ks) + _weighted_gini(right, n - ks)) / n
            gains = parent - child.mean(axis=1)   # (K,)
            k_best = int(np.argmax(gains))
            gain = float(gains[k_best])
            if best is None or gain > best[0] + _GAIN_EPS:
                k = int(ks[k_best])
                threshold = (xs[k - 1] + xs[k]) / 2.0
                best = (gain, slot, "scalar", float(threshold))
        else:
            for label in np.unique(x):
                mask = x == label
                n_l = int(mask.sum())
                if n_l < min_leaf or n - n_l < min_leaf:
                    continue
                left = oh[mask].sum(axis=0)[None]
                right = (total - left[0])[None]
                child = float((_weighted_gini(left, np.array([n_l]))
                               + _weighted_gini(right, np.array([n - n_l]))).mean()) / n
                gain = parent - child
                if best is None or gain > best[0] + _GAIN_EPS:
                    best = (gain, slot, "categorical", float(label))
    if best is None or best[0] <= _GAIN_EPS:
        return None
    return best


def fit_tree(X: np.ndarray, Y: np.ndarray, slot_kinds: tuple[str, ...],
             cfg: TrainConfig = TrainConfig(),
             slot_names: tuple[str, ...] = ()) -> MultiTargetTree:
    """Fit a multi-target tree on rows X and class labels Y (values in {-1,0,1})."""
    X = np.asarray(X, dtype=np.float64)
    Y = np.asarray(Y, dtype=np.int64)
    if Y.ndim == 1:
        Y = Y[:, None]
    if X.ndim != 2 or Y.ndim != 2 or X.shape[0] != Y.shape[0]:
        raise ValueError(f"arity mismatch: X {X.shape} vs Y {Y.shape}")
    if X.shape[0] == 0:
        raise ValueError("empty training set")
    if X.shape[1] != len(slot_kinds):
        raise ValueError("slot_kinds does not match X columns")

    oh = _one_hot(Y)

    def grow(idx: np.ndarray, depth: int):
        sub_oh = oh[idx]
        counts = sub_oh.sum(axis=0)
        pure = bool(np.all(counts.max(axis=1) == len(idx)))
        if pure or depth >= cfg.max_depth or len(idx) < 2 * cfg.min_samples_leaf:
            return _make_leaf(sub_oh)
        split = _best_split(X[idx], sub_oh, slot_kinds, cfg.min_samples_leaf)
        if split is None:
            return _make_leaf(sub_oh)
        _, slot, kind, value = split
        if kind == "scalar":
            go_left = X[idx, slot] <= value
        else:
            go_left = X[idx, slot] == value
        return Internal(slot=slot, kind=kind, value=value,
                        left=grow(idx[go_left], depth + 1),
                        right=grow(idx[~go_left], depth + 1))

    root = grow(np.arange(X.shape[0]), 0)
    return MultiTargetTree(root=root, n_slots=X.shape[1], n_targets=Y.shape[1],
                           slot_kinds=tuple(slot_kinds), slot_names=tuple(slot_names))
