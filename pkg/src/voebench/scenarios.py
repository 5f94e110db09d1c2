"""Seeded procedural sampling of scenario specs and trial-pair assembly.

All stimulus parameters are drawn uniformly from their legal ranges, with
sub-type constraints enforced by bounded rejection resampling.  Contrasts are
sampled as stark, well-separated clusters (a clearly-containable object vs a
clearly-protruding one, a clearly heavier collision partner, and so on): the
benchmark wants unambiguous outcomes, and well-separated stimuli keep every
rule cleanly readable both by the outcome extractor and by threshold models.

Each trial owns an RNG stream derived from (global seed, category, index), so
generation order never changes content.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import physics, rules
from .catalog import PosteriorRule
from .core import (COLLISION_HEIGHT_RANGE, CON_RANGE, CONTACT_RANGE,
                   DISPLACEMENT_THRESHOLD, OBJ_HEIGHT_RANGE, OBJ_WIDTH_RANGE,
                   OCC_MID_RANGE, OPENING_RANGE, POST_CONTACT_WINDOW,
                   SPEED_RANGE, SUBTYPES_BY_CATEGORY, BarrierKind,
                   ContainerShape, EventCategory, ObjectShape, ScenarioSpec,
                   SubType, Trajectory, UnsatisfiableSubtypeError,
                   container_interior_depth, container_interior_width,
                   elastic_collision, middle_segment_height, rng_stream)

MAX_RESAMPLES = 1000

# --- contrast cluster boxes -------------------------------------------------
# Every comparison a rule makes lands far from its decision boundary: the two
# sides of each contrast are drawn from disjoint sub-ranges of the legal
# stimulus intervals.
EDGE_MARGIN = 0.02                    # A: |c_obj - 0.5| floor
B_SHORT_H = (0.4, 0.75)               # B1 object heights
B_TALL_H = (1.05, 1.6)                # B2 object heights
B_HIGH_MID = (0.5, 0.9)               # B1 middle-segment fractions (mid >= 1.0)
B_LOW_MID = (0.1, 0.4)                # B2 middle-segment fractions (mid <= 0.8)
C_SHORT_H = (0.4, 0.65)               # C1 object heights
C_TALL_H = (1.1, 1.6)                 # C2 object heights
C_DEEP_CON = (1.0, 1.5)               # C1 container heights (depth >= 0.9)
C_SHALLOW_CON = (0.5, 0.95)           # C2 container heights (depth <= 0.85)
D_BIG_H = (1.2, 1.5)                  # D1 heavy object heights
D_SMALL_H = (0.5, 0.73)               # D1 light object heights (>3x mass gap)
D_EQUAL_H = (0.8, 1.1)                # D2/D3 equal heights (clear of D1 boxes)
D_EQUAL_V = (1.15, 1.45)              # D1/D2 shared speeds (clear of D3 boxes)
D_FAST_V = (1.6, 2.5)                 # D3 fast speeds
D_SLOW_V = (0.5, 1.1)                 # D3 slow speeds
E_FIT_OBJ = (0.4, 0.75)               # E3 object extent that fits
E_FIT_OPENING = (1.05, 1.4)           # E3 opening extent it fits through
E_UNFIT_OBJ = (1.05, 1.6)             # E3 object extent that does not fit
E_UNFIT_OPENING = (0.4, 0.75)         # E3 opening extent it cannot pass
WIDTH_FIT_MARGIN = 0.05               # C: object vs interior width clearance
V1_POST_MARGIN = 0.05                 # |post-contact v1'| floor (readability)
DISPLACEMENT_FLOOR = 0.1              # obj2 ends clearly past the threshold


def _uniform(rng: np.random.Generator, lo_hi: tuple[float, float]) -> float:
    return float(rng.uniform(lo_hi[0], lo_hi[1]))


def sample_spec(category: EventCategory, subtype: SubType,
                rng: np.random.Generator, seed: int = 0) -> ScenarioSpec:
    """Draw one scenario spec for the sub-type from its stimulus ranges."""
    if subtype.category is not category:
        raise ValueError(f"{subtype} does not belong to {category}")
    for _ in range(MAX_RESAMPLES):
        spec = _draw(category, subtype, rng, seed)
        if spec is not None:
            spec.validate()
            return spec
    raise UnsatisfiableSubtypeError(f"could not satisfy constraints for {subtype}")


def _draw(category: EventCategory, subtype: SubType,
          rng: np.random.Generator, seed: int) -> ScenarioSpec | None:
    shape = ObjectShape(rng.choice([s.value for s in ObjectShape]))

    if category is EventCategory.SUPPORT:
        h = _uniform(rng, OBJ_HEIGHT_RANGE)
        w = _uniform(rng, OBJ_WIDTH_RANGE)
        c = _uniform(rng, CONTACT_RANGE)
        if abs(c - 0.5) < EDGE_MARGIN:
            return None
        if subtype is SubType.A1 and c <= 0.5:
            return None
        if subtype is SubType.A2 and c >= 0.5:
            return None
        return ScenarioSpec(category, subtype, seed, shape, h, w, c_obj=c)

    if category is EventCategory.OCCLUSION:
        w = _uniform(rng, OBJ_WIDTH_RANGE)
        if subtype is SubType.B1:
            h = _uniform(rng, B_SHORT_H)
            h_occ = _uniform(rng, B_HIGH_MID)
        else:
            h = _uniform(rng, B_TALL_H)
            h_occ = _uniform(rng, B_LOW_MID)
        return ScenarioSpec(category, subtype, seed, shape, h, w, h_occ=h_occ)

    if category is EventCategory.CONTAINMENT:
        con_shape = ContainerShape(rng.choice([s.value for s in ContainerShape]))
        if subtype is SubType.C1:
            h = _uniform(rng, C_SHORT_H)
            h_con = _uniform(rng, C_DEEP_CON)
        else:
            h = _uniform(rng, C_TALL_H)
            h_con = _uniform(rng, C_SHALLOW_CON)
        w_con = _uniform(rng, CON_RANGE)
        w = _uniform(rng, OBJ_WIDTH_RANGE)
        if w > container_interior_width(w_con) - WIDTH_FIT_MARGIN:
            return None
        return ScenarioSpec(category, subtype, seed, shape, h, w,
                            s_con=con_shape, h_con=h_con, w_con=w_con)

    if category is EventCategory.COLLISION:
        if subtype is SubType.D1:
            v1 = _uniform(rng, D_EQUAL_V)
            big = _uniform(rng, D_BIG_H)
            small = _uniform(rng, D_SMALL_H)
            h1, h2 = (big, small) if rng.random() < 0.5 else (small, big)
            v2 = v1
        elif subtype is SubType.D2:
            v1 = _uniform(rng, D_EQUAL_V)
            h1 = _uniform(rng, D_EQUAL_H)
            h2, v2 = h1, v1
        else:  # D3: same size, clearly different speeds
            h1 = _uniform(rng, D_EQUAL_H)
            h2 = h1
            fast = _uniform(rng, D_FAST_V)
            slow = _uniform(rng, D_SLOW_V)
            v1, v2 = (fast, slow) if rng.random() < 0.5 else (slow, fast)
        v1p, v2p = elastic_collision(h1 ** 3, v1, h2 ** 3, -v2)
        if abs(v1p) < V1_POST_MARGIN:
            return None
        if abs(v2p) * POST_CONTACT_WINDOW < DISPLACEMENT_THRESHOLD + DISPLACEMENT_FLOOR:
            return None
        return ScenarioSpec(category, subtype, seed, shape, h1, h1,
                            h_obj2=h2, v_obj=v1, v_obj2=v2)

    # barrier
    w = _uniform(rng, OBJ_WIDTH_RANGE)
    h = _uniform(rng, OBJ_HEIGHT_RANGE)
    kind = {SubType.E1: BarrierKind.SOFT, SubType.E2: BarrierKind.SOLID,
            SubType.E3: BarrierKind.OPENING}[subtype]
    if kind is not BarrierKind.OPENING:
        return ScenarioSpec(category, subtype, seed, shape, h, w, barrier_kind=kind)
    fit_h = rng.random() < 0.5
    fit_w = rng.random() < 0.5
    h = _uniform(rng, E_FIT_OBJ if fit_h else E_UNFIT_OBJ)
    h_bar = _uniform(rng, E_FIT_OPENING if fit_h else E_UNFIT_OPENING)
    w = _uniform(rng, E_FIT_OBJ if fit_w else E_UNFIT_OBJ)
    w_bar = _uniform(rng, E_FIT_OPENING if fit_w else E_UNFIT_OPENING)
    return ScenarioSpec(category, subtype, seed, shape, h, w,
                        barrier_kind=kind, h_bar=h_bar, w_bar=w_bar)


def choose_violation(spec: ScenarioSpec) -> PosteriorRule:
    """The sub-type's signature outcome rule (the one the surprising scene flips)."""
    return {
        EventCategory.SUPPORT: PosteriorRule.FALLS_TO_GROUND,
        EventCategory.OCCLUSION: PosteriorRule.VISIBLE_ABOVE_MIDDLE,
        EventCategory.CONTAINMENT: PosteriorRule.PROTRUDES_ABOVE_RIM,
        EventCategory.COLLISION: PosteriorRule.OBJ1_REVERSES,
        EventCategory.BARRIER: PosteriorRule.PASSES_BEYOND_BARRIER,
    }[spec.category]


@dataclass
class TrialPair:
    """Expected + surprising trajectories plus all ground-truth labels."""

    trial_id: str
    spec: ScenarioSpec
    expected: Trajectory
    surprising: Trajectory
    violated_rules: frozenset[PosteriorRule]
    features: np.ndarray             # engineered, 24 slots
    prior: np.ndarray                # 13 verdicts
    posterior_expected: np.ndarray   # 9 verdicts
    posterior_surprising: np.ndarray


def build_trial(spec: ScenarioSpec, trial_id: str = "") -> TrialPair:
    """Simulate both versions of a spec and label them."""
    expected = physics.simulate_expected(spec)
    violation = choose_violation(spec)
    surprising = physics.simulate_surprising(spec, violation)

    features = rules.extract_features(spec)
    prior = rules.eval_prior(features)
    posterior_expected = physics.extract_outcome(expected, spec)
    by_rules = rules.eval_posterior(features, prior)
    if not np.array_equal(posterior_expected, by_rules):
        raise AssertionError(
            f"oracle closure violated for {spec}: "
            f"extracted={posterior_expected.tolist()} rules={by_rules.tolist()}")
    posterior_surprising = physics.extract_outcome(surprising, spec)

    diff = np.flatnonzero(posterior_expected != posterior_surprising)
    violated = frozenset(PosteriorRule(int(i)) for i in diff)
    if violation not in violated:
        raise AssertionError(f"violation {violation.name} not realized for {spec}")
    return TrialPair(
        trial_id=trial_id,
        spec=spec,
        expected=expected,
        surprising=surprising,
        violated_rules=violated,
        features=features,
        prior=prior,
        posterior_expected=posterior_expected,
        posterior_surprising=posterior_surprising,
    )


def trial_rng(global_seed: int, category: EventCategory, index: int) -> np.random.Generator:
    return rng_stream(global_seed, "trial", category.value, index)


def sample_trial(global_seed: int, category: EventCategory, subtype: SubType,
                 index: int) -> TrialPair:
    """Sample and build trial `index` of a category, order-independently."""
    rng = trial_rng(global_seed, category, index)
    spec = sample_spec(category, subtype, rng, seed=global_seed)
    return build_trial(spec, trial_id=f"{category.value}{index:05d}")


def subtype_allocation(category: EventCategory, count: int) -> list[SubType]:
    """Even split across the category's sub-types; remainder to the earliest."""
    subtypes = SUBTYPES_BY_CATEGORY[category]
    base = count // len(subtypes)
    rem = count % len(subtypes)
    out: list[SubType] = []
    for i, st in enumerate(subtypes):
        out.extend([st] * (base + (1 if i < rem else 0)))
    return out
