"""Feature and rule catalog.

The engine labels every trial with 24 engineered features (from 20 raw ones),
13 prior-rule verdicts and 9 posterior-rule verdicts.  Scalar slots hold
non-negative values or the sentinel -1 for "irrelevant"; categorical slots hold
the label code (position in the slot's label list) or -1.  Rule verdicts are
YES/NO/IRRELEVANT.

Slot and rule order is frozen: downstream serialization, trees and the rating
frontend all resolve indices through this module (or through the schema dict it
exports into dataset manifests).
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum
from typing import Optional

import numpy as np

from .core import BarrierKind, ContainerShape, EventCategory, ObjectShape

YES = 1
NO = 0
IRRELEVANT = -1

VERDICT_NAMES = {YES: "Yes", NO: "No", IRRELEVANT: "Irrelevant"}

SENTINEL = -1.0

DIRECTION_LABELS = ("Right", "Left")
OFFSET_LABELS = ("Outward", "Inward")
OBJECT_SHAPE_LABELS = tuple(s.value for s in ObjectShape)
CONTAINER_SHAPE_LABELS = tuple(s.value for s in ContainerShape)
BARRIER_KIND_LABELS = tuple(k.value for k in BarrierKind)

ALL = (EventCategory.SUPPORT, EventCategory.OCCLUSION, EventCategory.CONTAINMENT,
       EventCategory.COLLISION, EventCategory.BARRIER)
MOVING = (EventCategory.OCCLUSION, EventCategory.COLLISION, EventCategory.BARRIER)


class Feat(IntEnum):
    """Engineered feature slots, in frozen order."""

    OBJECT_SHAPE = 0
    OBJECT_HEIGHT = 1
    OBJECT_WIDTH = 2
    SPEED_MAG = 3
    SPEED_DIR = 4
    MOTION_DIRECTION = 5
    CONTACT_FRACTION = 6
    COM_HEIGHT_FRAC = 7
    COM_OFFSET_MAG = 8
    COM_OFFSET_DIR = 9
    OCCLUDER_MID_FRAC = 10
    OCCLUDER_WIDTH = 11
    CONTAINER_SHAPE = 12
    CONTAINER_HEIGHT = 13
    CONTAINER_WIDTH = 14
    INTERIOR_DEPTH = 15
    BARRIER_KIND = 16
    OPENING_HEIGHT = 17
    OPENING_WIDTH = 18
    SECOND_HEIGHT = 19
    SECOND_WIDTH = 20
    SECOND_SPEED_MAG = 21
    SECOND_SPEED_DIR = 22
    MOMENTUM_PROXY = 23


class RawFeat(IntEnum):
    """Raw feature slots (pre-engineering); three of them are signed."""

    OBJECT_SHAPE = 0
    OBJECT_HEIGHT = 1
    OBJECT_WIDTH = 2
    INITIAL_VELOCITY = 3     # signed, + is rightward
    MOTION_DIRECTION = 4
    CONTACT_FRACTION = 5
    COM_HEIGHT_FRAC = 6
    COM_OFFSET = 7           # signed, + is beyond the support edge
    OCCLUDER_MID_FRAC = 8
    OCCLUDER_WIDTH = 9
    CONTAINER_SHAPE = 10
    CONTAINER_HEIGHT = 11
    CONTAINER_WIDTH = 12
    INTERIOR_DEPTH = 13
    BARRIER_KIND = 14
    OPENING_HEIGHT = 15
    OPENING_WIDTH = 16
    SECOND_HEIGHT = 17
    SECOND_WIDTH = 18
    SECOND_VELOCITY = 19     # signed


N_RAW_FEATURES = len(RawFeat)
N_FEATURES = len(Feat)


@dataclass(frozen=True)
class FeatureSlot:
    index: int
    name: str
    kind: str                                  # "scalar" | "categorical"
    categories: tuple[EventCategory, ...]
    labels: Optional[tuple[str, ...]] = None   # categorical only
    lo: float = 0.0                            # plausible scalar range (for
    hi: float = 1.0                            # perception's relevance errors)
    raw_source: int = -1                       # RawFeat the slot traces to


def _slot(idx, name, kind, cats, labels=None, lo=0.0, hi=1.0, raw=-1):
    return FeatureSlot(int(idx), name, kind, cats, labels, lo, hi, int(raw))


FEATURE_SLOTS: tuple[FeatureSlot, ...] = (
    _slot(Feat.OBJECT_SHAPE, "object_shape", "categorical", ALL,
          OBJECT_SHAPE_LABELS, raw=RawFeat.OBJECT_SHAPE),
    _slot(Feat.OBJECT_HEIGHT, "object_height", "scalar", ALL, lo=0.4, hi=1.6,
          raw=RawFeat.OBJECT_HEIGHT),
    _slot(Feat.OBJECT_WIDTH, "object_width", "scalar", ALL, lo=0.4, hi=1.6,
          raw=RawFeat.OBJECT_WIDTH),
    _slot(Feat.SPEED_MAG, "initial_speed_mag", "scalar", MOVING, lo=0.5, hi=3.6,
          raw=RawFeat.INITIAL_VELOCITY),
    _slot(Feat.SPEED_DIR, "initial_speed_dir", "categorical", MOVING,
          DIRECTION_LABELS, raw=RawFeat.INITIAL_VELOCITY),
    _slot(Feat.MOTION_DIRECTION, "motion_direction", "categorical", MOVING,
          DIRECTION_LABELS, raw=RawFeat.MOTION_DIRECTION),
    _slot(Feat.CONTACT_FRACTION, "contact_fraction", "scalar",
          (EventCategory.SUPPORT,), lo=0.2, hi=0.8, raw=RawFeat.CONTACT_FRACTION),
    _slot(Feat.COM_HEIGHT_FRAC, "com_height_frac", "scalar",
          (EventCategory.SUPPORT,), lo=0.0, hi=1.0, raw=RawFeat.COM_HEIGHT_FRAC),
    _slot(Feat.COM_OFFSET_MAG, "com_offset_mag", "scalar",
          (EventCategory.SUPPORT,), lo=0.0, hi=0.5, raw=RawFeat.COM_OFFSET),
    _slot(Feat.COM_OFFSET_DIR, "com_offset_dir", "categorical",
          (EventCategory.SUPPORT,), OFFSET_LABELS, raw=RawFeat.COM_OFFSET),
    _slot(Feat.OCCLUDER_MID_FRAC, "occluder_mid_frac", "scalar",
          (EventCategory.OCCLUSION,), lo=0.1, hi=0.9, raw=RawFeat.OCCLUDER_MID_FRAC),
    _slot(Feat.OCCLUDER_WIDTH, "occluder_width", "scalar",
          (EventCategory.OCCLUSION,), lo=1.0, hi=5.0, raw=RawFeat.OCCLUDER_WIDTH),
    _slot(Feat.CONTAINER_SHAPE, "container_shape", "categorical",
          (EventCategory.CONTAINMENT,), CONTAINER_SHAPE_LABELS,
          raw=RawFeat.CONTAINER_SHAPE),
    _slot(Feat.CONTAINER_HEIGHT, "container_height", "scalar",
          (EventCategory.CONTAINMENT,), lo=0.5, hi=1.5, raw=RawFeat.CONTAINER_HEIGHT),
    _slot(Feat.CONTAINER_WIDTH, "container_width", "scalar",
          (EventCategory.CONTAINMENT,), lo=0.5, hi=1.5, raw=RawFeat.CONTAINER_WIDTH),
    _slot(Feat.INTERIOR_DEPTH, "container_interior_depth", "scalar",
          (EventCategory.CONTAINMENT,), lo=0.4, hi=1.4, raw=RawFeat.INTERIOR_DEPTH),
    _slot(Feat.BARRIER_KIND, "barrier_kind", "categorical",
          (EventCategory.BARRIER,), BARRIER_KIND_LABELS, raw=RawFeat.BARRIER_KIND),
    _slot(Feat.OPENING_HEIGHT, "opening_height", "scalar",
          (EventCategory.BARRIER,), lo=0.4, hi=1.4, raw=RawFeat.OPENING_HEIGHT),
    _slot(Feat.OPENING_WIDTH, "opening_width", "scalar",
          (EventCategory.BARRIER,), lo=0.4, hi=1.4, raw=RawFeat.OPENING_WIDTH),
    _slot(Feat.SECOND_HEIGHT, "second_height", "scalar",
          (EventCategory.COLLISION,), lo=0.5, hi=1.5, raw=RawFeat.SECOND_HEIGHT),
    _slot(Feat.SECOND_WIDTH, "second_width", "scalar",
          (EventCategory.COLLISION,), lo=0.5, hi=1.5, raw=RawFeat.SECOND_WIDTH),
    _slot(Feat.SECOND_SPEED_MAG, "second_speed_mag", "scalar",
          (EventCategory.COLLISION,), lo=0.5, hi=2.5, raw=RawFeat.SECOND_VELOCITY),
    _slot(Feat.SECOND_SPEED_DIR, "second_speed_dir", "categorical",
          (EventCategory.COLLISION,), DIRECTION_LABELS, raw=RawFeat.SECOND_VELOCITY),
    _slot(Feat.MOMENTUM_PROXY, "momentum_proxy", "scalar", MOVING, lo=0.0, hi=15.0,
          raw=RawFeat.INITIAL_VELOCITY),
)

assert len(FEATURE_SLOTS) == N_FEATURES == 24
assert len({s.raw_source for s in FEATURE_SLOTS}) == N_RAW_FEATURES == 20

SLOT_KINDS: tuple[str, ...] = tuple(s.kind for s in FEATURE_SLOTS)
SLOT_NAMES: tuple[str, ...] = tuple(s.name for s in FEATURE_SLOTS)


class PriorRule(IntEnum):
    COM_BEYOND_EDGE = 0          # A
    RESTING_ON_SUPPORT = 1       # A
    TALLER_THAN_MIDDLE = 2       # B
    PATH_BEHIND_OCCLUDER = 3     # B
    TALLER_THAN_INTERIOR = 4     # C
    WIDER_THAN_OPENING = 5       # C
    OBJ1_HEAVIER = 6             # D
    OBJ1_FASTER = 7              # D
    OBJ1_MOMENTUM_GREATER = 8    # D
    BARRIER_SOFT = 9             # E
    OPENING_PRESENT = 10         # E
    FITS_OPENING_HEIGHT = 11     # E
    FITS_OPENING_WIDTH = 12      # E


class PosteriorRule(IntEnum):
    FALLS_TO_GROUND = 0          # A
    VISIBLE_ABOVE_MIDDLE = 1     # B
    REAPPEARS_BEYOND_OCCLUDER = 2  # B
    FULLY_CONTAINED = 3          # C
    PROTRUDES_ABOVE_RIM = 4      # C
    OBJ1_REVERSES = 5            # D
    OBJ2_DISPLACED = 6           # D
    PASSES_BEYOND_BARRIER = 7    # E
    STOPS_AT_BARRIER = 8         # E


N_PRIOR_RULES = len(PriorRule)
N_POSTERIOR_RULES = len(PosteriorRule)
assert N_PRIOR_RULES == 13 and N_POSTERIOR_RULES == 9

PRIOR_RULE_CATEGORY: dict[PriorRule, EventCategory] = {
    PriorRule.COM_BEYOND_EDGE: EventCategory.SUPPORT,
    PriorRule.RESTING_ON_SUPPORT: EventCategory.SUPPORT,
    PriorRule.TALLER_THAN_MIDDLE: EventCategory.OCCLUSION,
    PriorRule.PATH_BEHIND_OCCLUDER: EventCategory.OCCLUSION,
    PriorRule.TALLER_THAN_INTERIOR: EventCategory.CONTAINMENT,
    PriorRule.WIDER_THAN_OPENING: EventCategory.CONTAINMENT,
    PriorRule.OBJ1_HEAVIER: EventCategory.COLLISION,
    PriorRule.OBJ1_FASTER: EventCategory.COLLISION,
    PriorRule.OBJ1_MOMENTUM_GREATER: EventCategory.COLLISION,
    PriorRule.BARRIER_SOFT: EventCategory.BARRIER,
    PriorRule.OPENING_PRESENT: EventCategory.BARRIER,
    PriorRule.FITS_OPENING_HEIGHT: EventCategory.BARRIER,
    PriorRule.FITS_OPENING_WIDTH: EventCategory.BARRIER,
}

POSTERIOR_RULE_CATEGORY: dict[PosteriorRule, EventCategory] = {
    PosteriorRule.FALLS_TO_GROUND: EventCategory.SUPPORT,
    PosteriorRule.VISIBLE_ABOVE_MIDDLE: EventCategory.OCCLUSION,
    PosteriorRule.REAPPEARS_BEYOND_OCCLUDER: EventCategory.OCCLUSION,
    PosteriorRule.FULLY_CONTAINED: EventCategory.CONTAINMENT,
    PosteriorRule.PROTRUDES_ABOVE_RIM: EventCategory.CONTAINMENT,
    PosteriorRule.OBJ1_REVERSES: EventCategory.COLLISION,
    PosteriorRule.OBJ2_DISPLACED: EventCategory.COLLISION,
    PosteriorRule.PASSES_BEYOND_BARRIER: EventCategory.BARRIER,
    PosteriorRule.STOPS_AT_BARRIER: EventCategory.BARRIER,
}


def category_slot_mask(category: EventCategory) -> np.ndarray:
    """Boolean mask of the slots that can be relevant in a category."""
    return np.array([category in s.categories for s in FEATURE_SLOTS], dtype=bool)


CATEGORY_SLOT_MASKS = {c: category_slot_mask(c) for c in EventCategory}


def prior_rule_mask(category: EventCategory) -> np.ndarray:
    return np.array([PRIOR_RULE_CATEGORY[r] is category for r in PriorRule], dtype=bool)


def posterior_rule_mask(category: EventCategory) -> np.ndarray:
    return np.array([POSTERIOR_RULE_CATEGORY[r] is category for r in PosteriorRule],
                    dtype=bool)


def label_code(slot: Feat, label: str) -> int:
    labels = FEATURE_SLOTS[slot].labels
    return labels.index(label)


def catalog_schema() -> dict:
    """Machine-readable catalog, embedded in dataset manifests."""
    return {
        "features": [
            {
                "index": s.index,
                "name": s.name,
                "kind": s.kind,
                "categories": [c.value for c in s.categories],
                "labels": list(s.labels) if s.labels else None,
                "range": [s.lo, s.hi] if s.kind == "scalar" else None,
                "raw_source": RawFeat(s.raw_source).name.lower(),
            }
            for s in FEATURE_SLOTS
        ],
        "raw_features": [r.name.lower() for r in RawFeat],
        "prior_rules": [
            {"index": int(r), "name": r.name.lower(),
             "category": PRIOR_RULE_CATEGORY[r].value}
            for r in PriorRule
        ],
        "posterior_rules": [
            {"index": int(r), "name": r.name.lower(),
             "category": POSTERIOR_RULE_CATEGORY[r].value}
            for r in PosteriorRule
        ],
        "verdicts": {"yes": YES, "no": NO, "irrelevant": IRRELEVANT},
        "sentinel": SENTINEL,
    }
