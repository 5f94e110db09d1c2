"""Ground-truth feature extraction and the deterministic rule engine.

The pipeline is raw features (20, three of them signed) -> engineered features
(24, all scalars non-negative or -1) -> 13 prior verdicts -> 9 posterior
verdicts.  The posterior map is the engine's physical law table for the normal
reality; `physics.extract_outcome` on an expected trajectory must agree with it
for every valid spec (the oracle-closure property tested in the suite).

The evaluators are total over noisy inputs: sentinel values take part in
comparisons as ordinary numbers, and the event category is inferred from the
relevance pattern (ties resolve to the lowest category index).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .catalog import (CATEGORY_SLOT_MASKS, FEATURE_SLOTS, Feat, IRRELEVANT,
                      N_FEATURES, N_POSTERIOR_RULES, N_PRIOR_RULES,
                      N_RAW_FEATURES, NO, SENTINEL, YES, BARRIER_KIND_LABELS,
                      DIRECTION_LABELS, OFFSET_LABELS, PosteriorRule,
                      PriorRule, RawFeat, label_code,
                      posterior_rule_mask, prior_rule_mask)
from .core import (B_SPEED, CENTROID_HEIGHT_FRACTION, DISPLACEMENT_THRESHOLD,
                   E_SPEED, OCCLUDER_HALF_WIDTH, POST_CONTACT_WINDOW,
                   BarrierKind, EventCategory, ScenarioSpec,
                   com_lateral_offset, container_interior_depth,
                   container_interior_width, elastic_collision, fits_opening,
                   middle_segment_height)

RIGHT = DIRECTION_LABELS.index("Right")
LEFT = DIRECTION_LABELS.index("Left")
OUTWARD = OFFSET_LABELS.index("Outward")
INWARD = OFFSET_LABELS.index("Inward")

_CATEGORY_ORDER = tuple(EventCategory)


@dataclass
class RawFeatures:
    """The 20 pre-engineering feature values plus their relevance mask."""

    values: np.ndarray          # float64 (20,); signed slots may be negative
    relevant: np.ndarray        # bool (20,)

    def __post_init__(self) -> None:
        assert self.values.shape == (N_RAW_FEATURES,)
        assert self.relevant.shape == (N_RAW_FEATURES,)


def extract_raw_features(spec: ScenarioSpec) -> RawFeatures:
    """Ground-truth raw features; slots outside the category are masked off."""
    spec.validate()
    v = np.zeros(N_RAW_FEATURES)
    rel = np.zeros(N_RAW_FEATURES, dtype=bool)

    def put(slot: RawFeat, value: float) -> None:
        v[slot] = value
        rel[slot] = True

    put(RawFeat.OBJECT_SHAPE, label_code(Feat.OBJECT_SHAPE, spec.s_obj.value))
    put(RawFeat.OBJECT_HEIGHT, spec.h_obj)
    put(RawFeat.OBJECT_WIDTH, spec.w_obj)
    cat = spec.category
    if cat is EventCategory.SUPPORT:
        put(RawFeat.CONTACT_FRACTION, spec.c_obj)
        put(RawFeat.COM_HEIGHT_FRAC, CENTROID_HEIGHT_FRACTION[spec.s_obj])
        put(RawFeat.COM_OFFSET, com_lateral_offset(spec.c_obj, spec.w_obj))
    elif cat is EventCategory.OCCLUSION:
        put(RawFeat.INITIAL_VELOCITY, B_SPEED)
        put(RawFeat.MOTION_DIRECTION, RIGHT)
        put(RawFeat.OCCLUDER_MID_FRAC, spec.h_occ)
        put(RawFeat.OCCLUDER_WIDTH, 2.0 * OCCLUDER_HALF_WIDTH)
    elif cat is EventCategory.CONTAINMENT:
        put(RawFeat.CONTAINER_SHAPE, label_code(Feat.CONTAINER_SHAPE, spec.s_con.value))
        put(RawFeat.CONTAINER_HEIGHT, spec.h_con)
        put(RawFeat.CONTAINER_WIDTH, spec.w_con)
        put(RawFeat.INTERIOR_DEPTH, container_interior_depth(spec.h_con))
    elif cat is EventCategory.COLLISION:
        put(RawFeat.INITIAL_VELOCITY, spec.v_obj)
        put(RawFeat.MOTION_DIRECTION, RIGHT)
        put(RawFeat.SECOND_HEIGHT, spec.h_obj2)
        put(RawFeat.SECOND_WIDTH, spec.h_obj2)
        put(RawFeat.SECOND_VELOCITY, -spec.v_obj2)
    else:  # barrier
        put(RawFeat.INITIAL_VELOCITY, E_SPEED)
        put(RawFeat.MOTION_DIRECTION, RIGHT)
        put(RawFeat.BARRIER_KIND, label_code(Feat.BARRIER_KIND, spec.barrier_kind.value))
        if spec.barrier_kind is BarrierKind.OPENING:
            put(RawFeat.OPENING_HEIGHT, spec.h_bar)
            put(RawFeat.OPENING_WIDTH, spec.w_bar)
    return RawFeatures(values=v, relevant=rel)


def engineer(raw: RawFeatures) -> np.ndarray:
    """Map 20 raw features to the 24-slot engineered vector.

    Signed raws (initial velocity, CoM offset, second velocity) split into a
    magnitude slot and a direction label; a redundant momentum proxy
    (mass x speed of the focal object) is appended.  Every scalar comes out
    non-negative or exactly -1.
    """
    f = np.full(N_FEATURES, SENTINEL)
    v, rel = raw.values, raw.relevant

    def copy(dst: Feat, src: RawFeat) -> None:
        if rel[src]:
            f[dst] = v[src]

    def split(mag: Feat, direction: Feat, src: RawFeat, pos: int, neg: int) -> None:
        if rel[src]:
            f[mag] = abs(v[src])
            f[direction] = pos if v[src] > 0 else neg

    copy(Feat.OBJECT_SHAPE, RawFeat.OBJECT_SHAPE)
    copy(Feat.OBJECT_HEIGHT, RawFeat.OBJECT_HEIGHT)
    copy(Feat.OBJECT_WIDTH, RawFeat.OBJECT_WIDTH)
    split(Feat.SPEED_MAG, Feat.SPEED_DIR, RawFeat.INITIAL_VELOCITY, RIGHT, LEFT)
    copy(Feat.MOTION_DIRECTION, RawFeat.MOTION_DIRECTION)
    copy(Feat.CONTACT_FRACTION, RawFeat.CONTACT_FRACTION)
    copy(Feat.COM_HEIGHT_FRAC, RawFeat.COM_HEIGHT_FRAC)
    split(Feat.COM_OFFSET_MAG, Feat.COM_OFFSET_DIR, RawFeat.COM_OFFSET, OUTWARD, INWARD)
    copy(Feat.OCCLUDER_MID_FRAC, RawFeat.OCCLUDER_MID_FRAC)
    copy(Feat.OCCLUDER_WIDTH, RawFeat.OCCLUDER_WIDTH)
    copy(Feat.CONTAINER_SHAPE, RawFeat.CONTAINER_SHAPE)
    copy(Feat.CONTAINER_HEIGHT, RawFeat.CONTAINER_HEIGHT)
    copy(Feat.CONTAINER_WIDTH, RawFeat.CONTAINER_WIDTH)
    copy(Feat.INTERIOR_DEPTH, RawFeat.INTERIOR_DEPTH)
    copy(Feat.BARRIER_KIND, RawFeat.BARRIER_KIND)
    copy(Feat.OPENING_HEIGHT, RawFeat.OPENING_HEIGHT)
    copy(Feat.OPENING_WIDTH, RawFeat.OPENING_WIDTH)
    copy(Feat.SECOND_HEIGHT, RawFeat.SECOND_HEIGHT)
    copy(Feat.SECOND_WIDTH, RawFeat.SECOND_WIDTH)
    split(Feat.SECOND_SPEED_MAG, Feat.SECOND_SPEED_DIR, RawFeat.SECOND_VELOCITY,
          RIGHT, LEFT)
    if rel[RawFeat.INITIAL_VELOCITY] and rel[RawFeat.OBJECT_HEIGHT]:
        f[Feat.MOMENTUM_PROXY] = v[RawFeat.OBJECT_HEIGHT] ** 3 * abs(v[RawFeat.INITIAL_VELOCITY])
    return f


def extract_features(spec: ScenarioSpec) -> np.ndarray:
    """Ground-truth engineered feature vector for a spec."""
    return engineer(extract_raw_features(spec))


def infer_category(f: np.ndarray) -> EventCategory:
    """Category whose relevance pattern best matches the vector.

    Score = number of slots agreeing with the category's mask; ties go to the
    lowest category index (A before B before ...).
    """
    present = f != SENTINEL
    best, best_score = _CATEGORY_ORDER[0], -1
    for cat in _CATEGORY_ORDER:
        score = int(np.sum(present == CATEGORY_SLOT_MASKS[cat]))
        if score > best_score:
            best, best_score = cat, score
    return best


def eval_prior(f: np.ndarray) -> np.ndarray:
    """All 13 prior verdicts for a (possibly noisy) feature vector."""
    cat = infer_category(f)
    p = np.full(N_PRIOR_RULES, IRRELEVANT, dtype=np.int8)

    def yn(rule: PriorRule, truth: bool) -> None:
        p[rule] = YES if truth else NO

    if cat is EventCategory.SUPPORT:
        yn(PriorRule.COM_BEYOND_EDGE, f[Feat.COM_OFFSET_DIR] == OUTWARD)
        yn(PriorRule.RESTING_ON_SUPPORT, f[Feat.CONTACT_FRACTION] < 1.0)
    elif cat is EventCategory.OCCLUSION:
        yn(PriorRule.TALLER_THAN_MIDDLE,
           f[Feat.OBJECT_HEIGHT] > middle_segment_height(f[Feat.OCCLUDER_MID_FRAC]))
        yn(PriorRule.PATH_BEHIND_OCCLUDER, True)
    elif cat is EventCategory.CONTAINMENT:
        yn(PriorRule.TALLER_THAN_INTERIOR,
           f[Feat.OBJECT_HEIGHT] > f[Feat.INTERIOR_DEPTH])
        yn(PriorRule.WIDER_THAN_OPENING,
           f[Feat.OBJECT_WIDTH] > container_interior_width(f[Feat.CONTAINER_WIDTH]))
    elif cat is EventCategory.COLLISION:
        m1 = f[Feat.OBJECT_HEIGHT] ** 3
        m2 = f[Feat.SECOND_HEIGHT] ** 3
        yn(PriorRule.OBJ1_HEAVIER, m1 > m2)
        yn(PriorRule.OBJ1_FASTER, f[Feat.SPEED_MAG] > f[Feat.SECOND_SPEED_MAG])
        yn(PriorRule.OBJ1_MOMENTUM_GREATER,
           m1 * f[Feat.SPEED_MAG] > m2 * f[Feat.SECOND_SPEED_MAG])
    else:  # barrier
        soft = f[Feat.BARRIER_KIND] == BARRIER_KIND_LABELS.index("Soft")
        opening = f[Feat.BARRIER_KIND] == BARRIER_KIND_LABELS.index("Opening")
        yn(PriorRule.BARRIER_SOFT, soft)
        yn(PriorRule.OPENING_PRESENT, opening)
        if opening:
            yn(PriorRule.FITS_OPENING_HEIGHT,
               fits_opening(f[Feat.OBJECT_HEIGHT], f[Feat.OPENING_HEIGHT]))
            yn(PriorRule.FITS_OPENING_WIDTH,
               fits_opening(f[Feat.OBJECT_WIDTH], f[Feat.OPENING_WIDTH]))
    return p


def _signed_speed(f: np.ndarray, mag: Feat, direction: Feat) -> float:
    return f[mag] if f[direction] != LEFT else -f[mag]


def eval_posterior(f: np.ndarray, p: np.ndarray) -> np.ndarray:
    """All 9 outcome verdicts from features plus prior verdicts.

    This is the ground-truth law table of the normal reality.
    """
    cat = _category_from_prior(p, f)
    out = np.full(N_POSTERIOR_RULES, IRRELEVANT, dtype=np.int8)

    def yn(rule: PosteriorRule, truth: bool) -> None:
        out[rule] = YES if truth else NO

    if cat is EventCategory.SUPPORT:
        yn(PosteriorRule.FALLS_TO_GROUND, p[PriorRule.COM_BEYOND_EDGE] == YES)
    elif cat is EventCategory.OCCLUSION:
        yn(PosteriorRule.VISIBLE_ABOVE_MIDDLE, p[PriorRule.TALLER_THAN_MIDDLE] == YES)
        yn(PosteriorRule.REAPPEARS_BEYOND_OCCLUDER, True)
    elif cat is EventCategory.CONTAINMENT:
        contained = (p[PriorRule.TALLER_THAN_INTERIOR] == NO
                     and p[PriorRule.WIDER_THAN_OPENING] == NO)
        yn(PosteriorRule.FULLY_CONTAINED, contained)
        yn(PosteriorRule.PROTRUDES_ABOVE_RIM, p[PriorRule.TALLER_THAN_INTERIOR] == YES)
    elif cat is EventCategory.COLLISION:
        v1 = _signed_speed(f, Feat.SPEED_MAG, Feat.SPEED_DIR)
        v2 = _signed_speed(f, Feat.SECOND_SPEED_MAG, Feat.SECOND_SPEED_DIR)
        v1p, v2p = elastic_collision(f[Feat.OBJECT_HEIGHT] ** 3, v1,
                                     f[Feat.SECOND_HEIGHT] ** 3, v2)
        yn(PosteriorRule.OBJ1_REVERSES, (v1 > 0.0) != (v1p > 0.0))
        yn(PosteriorRule.OBJ2_DISPLACED,
           abs(v2p) * POST_CONTACT_WINDOW > DISPLACEMENT_THRESHOLD)
    else:  # barrier
        passes = (p[PriorRule.BARRIER_SOFT] == YES
                  or (p[PriorRule.OPENING_PRESENT] == YES
                      and p[PriorRule.FITS_OPENING_HEIGHT] == YES
                      and p[PriorRule.FITS_OPENING_WIDTH] == YES))
        yn(PosteriorRule.PASSES_BEYOND_BARRIER, passes)
        yn(PosteriorRule.STOPS_AT_BARRIER, not passes)
    return out


def _category_from_prior(p: np.ndarray, f: np.ndarray) -> EventCategory:
    for cat in _CATEGORY_ORDER:
        if np.any(p[prior_rule_mask(cat)] != IRRELEVANT):
            return cat
    return infer_category(f)
