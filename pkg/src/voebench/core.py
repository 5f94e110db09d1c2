"""Core domain model: units, event taxonomy, scenario specs, and scene geometry.

Everything downstream (simulation, feature extraction, rule evaluation) builds on
the constants and helpers here, so simulated outcomes and rule verdicts share one
source of geometric truth.

Conventions:
  * one scene unit = 2 m; x is the lateral (motion) axis, z is up, y is depth.
  * poses are 7-tuples (x, y, z, qw, qx, qy, qz); position is the body-center,
    orientation a unit quaternion.
  * each clip is exactly 50 frames spanning 2.0 s (dt = 0.04 s).
"""
from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field, asdict
from enum import Enum
from typing import Optional

import numpy as np

# ---------------------------------------------------------------------------
# Units and clip timing
# ---------------------------------------------------------------------------

METERS_PER_UNIT = 2.0
GRAVITY = 9.81 / METERS_PER_UNIT        # 4.905 units/s^2
N_FRAMES = 50
CLIP_SECONDS = 2.0
DT = CLIP_SECONDS / N_FRAMES            # 0.04 s
FRAME_TIMES = tuple(i * DT for i in range(N_FRAMES))
T_LAST = FRAME_TIMES[-1]                # 1.96 s

Pose = tuple[float, float, float, float, float, float, float]

IDENTITY_QUAT = (1.0, 0.0, 0.0, 0.0)


class EventCategory(str, Enum):
    SUPPORT = "A"
    OCCLUSION = "B"
    CONTAINMENT = "C"
    COLLISION = "D"
    BARRIER = "E"


class SubType(str, Enum):
    A1 = "A1"
    A2 = "A2"
    B1 = "B1"
    B2 = "B2"
    C1 = "C1"
    C2 = "C2"
    D1 = "D1"
    D2 = "D2"
    D3 = "D3"
    E1 = "E1"
    E2 = "E2"
    E3 = "E3"

    @property
    def category(self) -> EventCategory:
        return EventCategory(self.value[0])


SUBTYPES_BY_CATEGORY: dict[EventCategory, tuple[SubType, ...]] = {
    EventCategory.SUPPORT: (SubType.A1, SubType.A2),
    EventCategory.OCCLUSION: (SubType.B1, SubType.B2),
    EventCategory.CONTAINMENT: (SubType.C1, SubType.C2),
    EventCategory.COLLISION: (SubType.D1, SubType.D2, SubType.D3),
    EventCategory.BARRIER: (SubType.E1, SubType.E2, SubType.E3),
}


class ObjectShape(str, Enum):
    CUBE = "Cube"
    CYLINDER = "Cylinder"
    TORUS = "Torus"
    SPHERE = "Sphere"
    CONE = "Cone"
    SIDE_CYLINDER = "SideCylinder"
    INVERTED_CONE = "InvertedCone"


class ContainerShape(str, Enum):
    MUG = "Mug"
    BOX = "Box"


class BarrierKind(str, Enum):
    SOFT = "Soft"
    SOLID = "Solid"
    OPENING = "Opening"


class BodyKind(str, Enum):
    FOCAL_OBJECT = "FocalObject"
    SECOND_OBJECT = "SecondObject"
    SUPPORT = "Support"
    OCCLUDER = "Occluder"
    CONTAINER = "Container"
    BARRIER = "Barrier"
    GROUND = "Ground"


# Uniform-density centroid height as a fraction of body height.  Cones are the
# only vertically asymmetric solids in the set; all footprints are symmetric.
CENTROID_HEIGHT_FRACTION: dict[ObjectShape, float] = {
    ObjectShape.CUBE: 0.5,
    ObjectShape.CYLINDER: 0.5,
    ObjectShape.TORUS: 0.5,
    ObjectShape.SPHERE: 0.5,
    ObjectShape.CONE: 0.25,
    ObjectShape.SIDE_CYLINDER: 0.5,
    ObjectShape.INVERTED_CONE: 0.75,
}

# ---------------------------------------------------------------------------
# Sampled stimulus ranges
# ---------------------------------------------------------------------------

OBJ_HEIGHT_RANGE = (0.4, 1.6)
OBJ_WIDTH_RANGE = (0.4, 1.6)
CONTACT_RANGE = (0.2, 0.8)          # A: fraction of object width over the edge
OCC_MID_RANGE = (0.1, 0.9)          # B: middle-segment height fraction
CON_RANGE = (0.5, 1.5)              # C: container height and width
COLLISION_HEIGHT_RANGE = (0.5, 1.5)  # D: both objects
SPEED_RANGE = (0.5, 2.5)            # D: both objects
OPENING_RANGE = (0.4, 1.4)          # E3: opening height and width

# ---------------------------------------------------------------------------
# Scene staging constants (fixed, not sampled)
# ---------------------------------------------------------------------------

GROUND_HALF_W = 6.0
GROUND_THICKNESS = 0.1

SUPPORT_WIDTH = 2.0                  # support spans x in [-2, 0]; edge at x = 0
SUPPORT_HEIGHT = 1.0
A_DROP_GAP = 0.5                     # drop height above the support top
A_TIP_RATE = (math.pi / 2) / 0.4     # scripted tipping: 90 deg in 0.4 s

OCCLUDER_HALF_WIDTH = 2.5            # B screen spans x in [-2.5, 2.5]
OCCLUDER_FULL_HEIGHT = 2.0
MIDDLE_HALF_WIDTH = 0.5              # lowered middle segment spans [-0.5, 0.5]
B_SPEED = 3.6                        # units/s, rightward
B_START_RIGHT_EDGE = -2.7            # object's leading edge at t = 0
B_RAMP = 0.1                         # seconds for the surprising z-offset ramp
B_CLEARANCE = 0.15                   # how far tops are pushed past the segment

CONTAINER_WALL = 0.1
C_DROP_GAP = 0.5                     # drop height above the container rim
C_REVEAL_T = 1.2                     # front panel starts sinking
C_REVEAL_DURATION = 0.3
C_SINK_DURATION = 0.5                # surprising containment sink time
C_PANEL_MARGIN = 0.3                 # panel oversize vs the container

D_CONTACT_T = 0.8                    # facing surfaces meet exactly here
DISPLACEMENT_THRESHOLD = 0.25        # obj2 post-contact displacement rule
POST_CONTACT_WINDOW = T_LAST - D_CONTACT_T   # 1.16 s

BARRIER_X = 1.0                      # near face of the barrier
BARRIER_THICKNESS = 0.1
BARRIER_HEIGHT = 2.0
E_SPEED = 2.2
E_START_RIGHT_EDGE = BARRIER_X - E_SPEED * D_CONTACT_T   # contact at 0.8 s
E_PANEL_X = (0.3, 1.8)               # static front panel over the barrier zone
E_PANEL_HEIGHT = 1.7


class InvalidSpecError(ValueError):
    """Scenario parameters are out of range or geometrically degenerate."""


class UnsatisfiableSubtypeError(RuntimeError):
    """Rejection sampling could not satisfy a sub-type's constraints."""


# ---------------------------------------------------------------------------
# Scenario specification
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ScenarioSpec:
    """One sampled physical configuration.

    Fields that do not apply to the sub-type are None.  All lengths are scene
    units, speeds are units/s.
    """

    category: EventCategory
    subtype: SubType
    seed: int
    s_obj: ObjectShape
    h_obj: float
    w_obj: float
    c_obj: Optional[float] = None        # A: fraction of width over the edge
    h_occ: Optional[float] = None        # B: middle-segment height fraction
    s_con: Optional[ContainerShape] = None
    h_con: Optional[float] = None
    w_con: Optional[float] = None
    h_obj2: Optional[float] = None       # D
    v_obj: Optional[float] = None        # D: initial speed of object 1
    v_obj2: Optional[float] = None       # D: initial speed of object 2
    barrier_kind: Optional[BarrierKind] = None
    h_bar: Optional[float] = None        # E3 opening height
    w_bar: Optional[float] = None        # E3 opening width

    def validate(self) -> None:
        cat = self.category
        if self.subtype.category is not cat:
            raise InvalidSpecError(f"subtype {self.subtype} outside category {cat}")
        if cat is EventCategory.COLLISION:
            _check_range("h_obj", self.h_obj, COLLISION_HEIGHT_RANGE)
        else:
            _check_range("h_obj", self.h_obj, OBJ_HEIGHT_RANGE)
            _check_range("w_obj", self.w_obj, OBJ_WIDTH_RANGE)
        if cat is EventCategory.SUPPORT:
            _check_range("c_obj", self.c_obj, CONTACT_RANGE)
            if self.c_obj == 0.5:
                raise InvalidSpecError("c_obj = 0.5 leaves stability undefined")
            if (1.0 - self.c_obj) * self.w_obj >= SUPPORT_WIDTH:
                raise InvalidSpecError("object overhangs the far support edge")
        elif cat is EventCategory.OCCLUSION:
            _check_range("h_occ", self.h_occ, OCC_MID_RANGE)
        elif cat is EventCategory.CONTAINMENT:
            if self.s_con is None:
                raise InvalidSpecError("containment spec needs a container shape")
            _check_range("h_con", self.h_con, CON_RANGE)
            _check_range("w_con", self.w_con, CON_RANGE)
            depth = container_interior_depth(self.h_con)
            if self.w_obj >= container_interior_width(self.w_con):
                raise InvalidSpecError("object cannot enter the container")
            if self.subtype is SubType.C1 and self.h_obj > depth:
                raise InvalidSpecError("C1 requires a fully containable object")
            if self.subtype is SubType.C2 and self.h_obj <= depth:
                raise InvalidSpecError("C2 requires an object taller than the interior")
        elif cat is EventCategory.COLLISION:
            _check_range("h_obj2", self.h_obj2, COLLISION_HEIGHT_RANGE)
            _check_range("v_obj", self.v_obj, SPEED_RANGE)
            _check_range("v_obj2", self.v_obj2, SPEED_RANGE)
        elif cat is EventCategory.BARRIER:
            if self.barrier_kind is None:
                raise InvalidSpecError("barrier spec needs a barrier kind")
            expected = {SubType.E1: BarrierKind.SOFT,
                        SubType.E2: BarrierKind.SOLID,
                        SubType.E3: BarrierKind.OPENING}[self.subtype]
            if self.barrier_kind is not expected:
                raise InvalidSpecError(f"{self.subtype} requires {expected} barrier")
            if self.barrier_kind is BarrierKind.OPENING:
                _check_range("h_bar", self.h_bar, OPENING_RANGE)
                _check_range("w_bar", self.w_bar, OPENING_RANGE)

    def to_dict(self) -> dict:
        d = asdict(self)
        for key, value in d.items():
            if isinstance(value, Enum):
                d[key] = value.value
        return d

    @staticmethod
    def from_dict(d: dict) -> "ScenarioSpec":
        return ScenarioSpec(
            category=EventCategory(d["category"]),
            subtype=SubType(d["subtype"]),
            seed=int(d["seed"]),
            s_obj=ObjectShape(d["s_obj"]),
            h_obj=d["h_obj"],
            w_obj=d["w_obj"],
            c_obj=d.get("c_obj"),
            h_occ=d.get("h_occ"),
            s_con=ContainerShape(d["s_con"]) if d.get("s_con") else None,
            h_con=d.get("h_con"),
            w_con=d.get("w_con"),
            h_obj2=d.get("h_obj2"),
            v_obj=d.get("v_obj"),
            v_obj2=d.get("v_obj2"),
            barrier_kind=BarrierKind(d["barrier_kind"]) if d.get("barrier_kind") else None,
            h_bar=d.get("h_bar"),
            w_bar=d.get("w_bar"),
        )


def _check_range(name: str, value: Optional[float], rng: tuple[float, float]) -> None:
    if value is None:
        raise InvalidSpecError(f"{name} is required for this sub-type")
    if not (rng[0] <= value <= rng[1]) or not math.isfinite(value):
        raise InvalidSpecError(f"{name}={value} outside {rng}")


# ---------------------------------------------------------------------------
# Bodies and frames
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Body:
    """A scene entity; the bounding box is width x width x height about center."""

    id: str
    kind: BodyKind
    shape: str
    height: float
    width: float

    @property
    def mass(self) -> float:
        # unit density, mass proportional to height^3
        return self.height ** 3


@dataclass
class Frame:
    index: int
    poses: dict[str, Pose]
    visible: dict[str, bool]


@dataclass
class Trajectory:
    frames: list[Frame]
    duration_s: float = CLIP_SECONDS

    def pose(self, entity: str, i: int) -> Pose:
        return self.frames[i].poses[entity]


def build_bodies(spec: ScenarioSpec) -> list[Body]:
    """Scene entity list for a spec, in the canonical serialization order."""
    ground = Body("ground", BodyKind.GROUND, "Box", GROUND_THICKNESS, 2 * GROUND_HALF_W)
    obj = Body("object", BodyKind.FOCAL_OBJECT, spec.s_obj.value, spec.h_obj, spec.w_obj)
    cat = spec.category
    if cat is EventCategory.SUPPORT:
        support = Body("support", BodyKind.SUPPORT, "Box", SUPPORT_HEIGHT, SUPPORT_WIDTH)
        return [ground, support, obj]
    if cat is EventCategory.OCCLUSION:
        side_w = OCCLUDER_HALF_WIDTH - MIDDLE_HALF_WIDTH
        left = Body("occluder_left", BodyKind.OCCLUDER, "Panel", OCCLUDER_FULL_HEIGHT, side_w)
        mid = Body("occluder_mid", BodyKind.OCCLUDER, "Panel",
                   OCCLUDER_FULL_HEIGHT * spec.h_occ, 2 * MIDDLE_HALF_WIDTH)
        right = Body("occluder_right", BodyKind.OCCLUDER, "Panel", OCCLUDER_FULL_HEIGHT, side_w)
        return [ground, left, mid, right, obj]
    if cat is EventCategory.CONTAINMENT:
        container = Body("container", BodyKind.CONTAINER, spec.s_con.value, spec.h_con, spec.w_con)
        panel = Body("occluder", BodyKind.OCCLUDER, "Panel",
                     spec.h_con + C_PANEL_MARGIN, spec.w_con + 2 * C_PANEL_MARGIN)
        return [ground, container, obj, panel]
    if cat is EventCategory.COLLISION:
        obj1 = Body("object", BodyKind.FOCAL_OBJECT, spec.s_obj.value, spec.h_obj, spec.h_obj)
        obj2 = Body("object2", BodyKind.SECOND_OBJECT, ObjectShape.CUBE.value,
                    spec.h_obj2, spec.h_obj2)
        return [ground, obj1, obj2]
    # barrier
    barrier = Body("barrier", BodyKind.BARRIER, spec.barrier_kind.value,
                   BARRIER_HEIGHT, BARRIER_THICKNESS)
    panel = Body("occluder", BodyKind.OCCLUDER, "Panel",
                 E_PANEL_HEIGHT, E_PANEL_X[1] - E_PANEL_X[0])
    return [ground, barrier, obj, panel]


# ---------------------------------------------------------------------------
# Shared geometric truths (used by both the simulator and the rule engine)
# ---------------------------------------------------------------------------

def container_interior_depth(h_con: float) -> float:
    return h_con - CONTAINER_WALL


def container_interior_width(w_con: float) -> float:
    return w_con - 2 * CONTAINER_WALL


def com_lateral_offset(c_obj: float, w_obj: float) -> float:
    """Signed offset of the footprint centroid past the support edge (+ = beyond)."""
    return (c_obj - 0.5) * w_obj


def middle_segment_height(h_occ: float) -> float:
    return OCCLUDER_FULL_HEIGHT * h_occ


def elastic_collision(m1: float, v1: float, m2: float, v2: float) -> tuple[float, float]:
    """1-D perfectly elastic post-contact velocities."""
    total = m1 + m2
    v1p = ((m1 - m2) * v1 + 2.0 * m2 * v2) / total
    v2p = ((m2 - m1) * v2 + 2.0 * m1 * v1) / total
    return v1p, v2p


def fits_opening(extent: float, opening: float) -> bool:
    """Ties (within 1e-9) count as fitting."""
    return extent <= opening + 1e-9


# ---------------------------------------------------------------------------
# Quaternion / bounding-box helpers
# ---------------------------------------------------------------------------

def quat_about_y(theta: float) -> tuple[float, float, float, float]:
    return (math.cos(theta / 2.0), 0.0, math.sin(theta / 2.0), 0.0)


def quat_norm(q: tuple[float, float, float, float]) -> float:
    return math.sqrt(q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3])


def quat_to_matrix(q: tuple[float, float, float, float]) -> list[list[float]]:
    w, x, y, z = q
    return [
        [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
        [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
        [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
    ]


def world_extents(pose: Pose, body: Body) -> tuple[tuple[float, float], tuple[float, float]]:
    """Axis-aligned (x interval, z interval) of the oriented bounding box."""
    x, _, z, qw, qx, qy, qz = pose
    hx = body.width / 2.0
    hy = body.width / 2.0
    hz = body.height / 2.0
    if (qw, qx, qy, qz) == IDENTITY_QUAT:
        return (x - hx, x + hx), (z - hz, z + hz)
    r = quat_to_matrix((qw, qx, qy, qz))
    ex = abs(r[0][0]) * hx + abs(r[0][1]) * hy + abs(r[0][2]) * hz
    ez = abs(r[2][0]) * hx + abs(r[2][1]) * hy + abs(r[2][2]) * hz
    return (x - ex, x + ex), (z - ez, z + ez)


def intervals_overlap(a: tuple[float, float], b: tuple[float, float]) -> bool:
    """Strict overlap; touching endpoints do not count."""
    return a[0] < b[1] and b[0] < a[1]


# ---------------------------------------------------------------------------
# Deterministic per-key RNG streams
# ---------------------------------------------------------------------------

def rng_stream(seed: int, *key: object) -> np.random.Generator:
    """Independent generator derived from (seed, key...) by hashing.

    Streams are order-independent: trial i's draw never depends on whether
    trial j was generated first.
    """
    material = f"{seed}|" + "/".join(str(k) for k in key)
    digest = hashlib.sha256(material.encode("utf-8")).digest()
    return np.random.Generator(np.random.PCG64(int.from_bytes(digest[:8], "little")))
