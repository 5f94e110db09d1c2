"""Closed-form kinematic simulation of the five event categories.

Expected trajectories follow the engine's physics model (gravity for
unsupported bodies, uniform velocity for inert movers, 1-D elastic collision,
hard stops at solid barriers, pass-through at soft barriers and fitting
openings, scripted tipping for unbalanced support objects).  Surprising
trajectories share the expected frames until the causal interaction begins and
then realize the flipped outcome with smooth scripted motion; no attempt is
made to model how the impossible happens.

Every pose is computed from the frame time by closed-form expressions in a
fixed order, so trajectories are bit-identical across runs for the same spec.
"""
from __future__ import annotations

import math
from typing import Callable, Optional

import numpy as np

from . import core
from .catalog import (IRRELEVANT, NO, YES, N_POSTERIOR_RULES, PosteriorRule,
                      posterior_rule_mask)
from .core import (BARRIER_HEIGHT, BARRIER_THICKNESS, BARRIER_X, B_CLEARANCE,
                   B_RAMP, B_SPEED, B_START_RIGHT_EDGE, A_DROP_GAP, A_TIP_RATE,
                   C_DROP_GAP, C_PANEL_MARGIN, C_REVEAL_DURATION, C_REVEAL_T,
                   C_SINK_DURATION, CONTAINER_WALL, D_CONTACT_T,
                   DISPLACEMENT_THRESHOLD, DT, E_PANEL_HEIGHT, E_PANEL_X,
                   E_SPEED, E_START_RIGHT_EDGE, FRAME_TIMES, GRAVITY,
                   IDENTITY_QUAT, MIDDLE_HALF_WIDTH, N_FRAMES,
                   OCCLUDER_FULL_HEIGHT, OCCLUDER_HALF_WIDTH, SUPPORT_HEIGHT,
                   SUPPORT_WIDTH, BarrierKind, Body, BodyKind, EventCategory,
                   Frame, InvalidSpecError, Pose, ScenarioSpec, Trajectory,
                   build_bodies, com_lateral_offset, container_interior_depth,
                   elastic_collision, fits_opening, intervals_overlap,
                   middle_segment_height, world_extents)

PoseFn = Callable[[float], Pose]


class InvalidViolationError(ValueError):
    """The requested violation is irrelevant to the spec's category."""


def _static(x: float, z: float) -> PoseFn:
    pose = (x, 0.0, z, *IDENTITY_QUAT)

    def fn(t: float) -> Pose:
        return pose

    return fn


# ---------------------------------------------------------------------------
# Per-category expected outcomes (single source of truth with rules.py, which
# derives the same booleans from features through core's shared helpers)
# ---------------------------------------------------------------------------

def _support_falls(spec: ScenarioSpec) -> bool:
    return com_lateral_offset(spec.c_obj, spec.w_obj) > 0.0


def _occlusion_visible(spec: ScenarioSpec) -> bool:
    return spec.h_obj > middle_segment_height(spec.h_occ)


def _containment_contained(spec: ScenarioSpec) -> bool:
    return spec.h_obj <= container_interior_depth(spec.h_con)


def _collision_outcome(spec: ScenarioSpec) -> tuple[float, float, float, float]:
    """(v1, v2, v1', v2') with signed velocities (+ is rightward)."""
    v1, v2 = spec.v_obj, -spec.v_obj2
    v1p, v2p = elastic_collision(spec.h_obj ** 3, v1, spec.h_obj2 ** 3, v2)
    return v1, v2, v1p, v2p


def _barrier_passes(spec: ScenarioSpec) -> bool:
    if spec.barrier_kind is BarrierKind.SOFT:
        return True
    if spec.barrier_kind is BarrierKind.OPENING:
        return fits_opening(spec.h_obj, spec.h_bar) and fits_opening(spec.w_obj, spec.w_bar)
    return False


# ---------------------------------------------------------------------------
# Pose programs
# ---------------------------------------------------------------------------

def _support_object_fn(spec: ScenarioSpec, falls: bool) -> PoseFn:
    h, w = spec.h_obj, spec.w_obj
    x_c = com_lateral_offset(spec.c_obj, spec.w_obj)
    z_top = SUPPORT_HEIGHT + A_DROP_GAP
    t_land = math.sqrt(2.0 * A_DROP_GAP / GRAVITY)
    # distance from the pivot (support edge) to the outer bottom corner; the
    # lowest point of the tipping box sits at SUPPORT_HEIGHT - cw*sin(theta)
    cw = spec.c_obj * w
    if cw < 1.0:
        theta_star = math.pi / 2.0
    else:
        theta_star = math.asin(SUPPORT_HEIGHT / cw)
    t_tipped = t_land + theta_star / A_TIP_RATE
    fall_dist = SUPPORT_HEIGHT - cw  # only used when theta_star == pi/2
    t_ground = t_tipped + (math.sqrt(2.0 * fall_dist / GRAVITY) if cw < 1.0 else 0.0)

    def tip_pose(theta: float, drop: float) -> Pose:
        sin_t, cos_t = math.sin(theta), math.cos(theta)
        dx, dz = x_c, h / 2.0
        cx = dx * cos_t + dz * sin_t
        cz = SUPPORT_HEIGHT - dx * sin_t + dz * cos_t - drop
        return (cx, 0.0, cz, *core.quat_about_y(theta))

    def fn(t: float) -> Pose:
        if t < t_land:
            bottom = z_top - 0.5 * GRAVITY * t * t
            return (x_c, 0.0, bottom + h / 2.0, *IDENTITY_QUAT)
        if not falls:
            return (x_c, 0.0, SUPPORT_HEIGHT + h / 2.0, *IDENTITY_QUAT)
        if t < t_tipped:
            return tip_pose(A_TIP_RATE * (t - t_land), 0.0)
        if cw >= 1.0:
            return tip_pose(theta_star, 0.0)  # rests leaning, corner grounded
        drop = min(fall_dist, 0.5 * GRAVITY * (t - t_tipped) ** 2) if t < t_ground else fall_dist
        return tip_pose(theta_star, drop)

    return fn


def _occlusion_object_fn(spec: ScenarioSpec, visible_above: bool) -> PoseFn:
    h, w = spec.h_obj, spec.w_obj
    mid_h = middle_segment_height(spec.h_occ)
    x0 = B_START_RIGHT_EDGE - w / 2.0
    t_in = (-MIDDLE_HALF_WIDTH - B_START_RIGHT_EDGE) / B_SPEED
    t_out = (MIDDLE_HALF_WIDTH - (B_START_RIGHT_EDGE - w)) / B_SPEED
    if visible_above == _occlusion_visible(spec):
        delta = 0.0
    else:
        # hoist a short object above the segment, or sink a tall one below it
        delta = (mid_h - h) + (B_CLEARANCE if visible_above else -B_CLEARANCE)

    def z_offset(t: float) -> float:
        if delta == 0.0 or t <= t_in - B_RAMP or t >= t_out + B_RAMP:
            return 0.0
        if t < t_in:
            return delta * (t - (t_in - B_RAMP)) / B_RAMP
        if t <= t_out:
            return delta
        return delta * (1.0 - (t - t_out) / B_RAMP)

    def fn(t: float) -> Pose:
        return (x0 + B_SPEED * t, 0.0, h / 2.0 + z_offset(t), *IDENTITY_QUAT)

    return fn


def _containment_object_fn(spec: ScenarioSpec, contained: bool) -> PoseFn:
    h = spec.h_obj
    rim = spec.h_con
    z_bottom0 = rim + C_DROP_GAP
    expected = _containment_contained(spec)
    if contained == expected:
        rest_bottom = CONTAINER_WALL
        sink_target = None
    elif contained:
        # taller object magically swallowed: settle normally, then sink until
        # the top sits just under the rim
        rest_bottom = CONTAINER_WALL
        sink_target = rim - 0.05 - h
    else:
        # containable object magically held up: stop with the top proud of the rim
        rest_bottom = rim + 0.25 - h
        sink_target = None
    t_rest = math.sqrt(2.0 * (z_bottom0 - rest_bottom) / GRAVITY)

    def fn(t: float) -> Pose:
        if t < t_rest:
            bottom = z_bottom0 - 0.5 * GRAVITY * t * t
        elif sink_target is None:
            bottom = rest_bottom
        else:
            frac = min(1.0, (t - t_rest) / C_SINK_DURATION)
            bottom = rest_bottom + (sink_target - rest_bottom) * frac
        return (0.0, 0.0, bottom + h / 2.0, *IDENTITY_QUAT)

    return fn


def _containment_panel_fn(spec: ScenarioSpec) -> PoseFn:
    height = spec.h_con + C_PANEL_MARGIN

    def fn(t: float) -> Pose:
        off = 0.0
        if t > C_REVEAL_T:
            off = -(height + 0.1) * min(1.0, (t - C_REVEAL_T) / C_REVEAL_DURATION)
        return (0.0, 0.0, height / 2.0 + off, *IDENTITY_QUAT)

    return fn


def _collision_object_fns(spec: ScenarioSpec, flip_obj1: bool) -> tuple[PoseFn, PoseFn]:
    w1, w2 = spec.h_obj, spec.h_obj2
    v1, v2, v1p, v2p = _collision_outcome(spec)
    if flip_obj1:
        v1p = -v1p
    x1_0 = -(w1 / 2.0 + spec.v_obj * D_CONTACT_T)
    x2_0 = w2 / 2.0 + spec.v_obj2 * D_CONTACT_T

    def make(x0: float, v_pre: float, v_post: float, h: float) -> PoseFn:
        def fn(t: float) -> Pose:
            x = x0 + v_pre * min(t, D_CONTACT_T) + v_post * max(0.0, t - D_CONTACT_T)
            return (x, 0.0, h / 2.0, *IDENTITY_QUAT)

        return fn

    return make(x1_0, v1, v1p, spec.h_obj), make(x2_0, v2, v2p, spec.h_obj2)


def _barrier_object_fn(spec: ScenarioSpec, passes: bool) -> PoseFn:
    w, h = spec.w_obj, spec.h_obj
    x0 = E_START_RIGHT_EDGE - w / 2.0

    def fn(t: float) -> Pose:
        x = x0 + E_SPEED * (t if passes else min(t, D_CONTACT_T))
        return (x, 0.0, h / 2.0, *IDENTITY_QUAT)

    return fn


def _pose_fns(spec: ScenarioSpec, outcome_flipped: bool) -> dict[str, PoseFn]:
    cat = spec.category
    ground = _static(0.0, -core.GROUND_THICKNESS / 2.0)
    if cat is EventCategory.SUPPORT:
        return {
            "ground": ground,
            "support": _static(-SUPPORT_WIDTH / 2.0, SUPPORT_HEIGHT / 2.0),
            "object": _support_object_fn(spec, _support_falls(spec) ^ outcome_flipped),
        }
    if cat is EventCategory.OCCLUSION:
        side_w = OCCLUDER_HALF_WIDTH - MIDDLE_HALF_WIDTH
        mid_h = middle_segment_height(spec.h_occ)
        return {
            "ground": ground,
            "occluder_left": _static(-(MIDDLE_HALF_WIDTH + side_w / 2.0),
                                     OCCLUDER_FULL_HEIGHT / 2.0),
            "occluder_mid": _static(0.0, mid_h / 2.0),
            "occluder_right": _static(MIDDLE_HALF_WIDTH + side_w / 2.0,
                                      OCCLUDER_FULL_HEIGHT / 2.0),
            "object": _occlusion_object_fn(
                spec, _occlusion_visible(spec) ^ outcome_flipped),
        }
    if cat is EventCategory.CONTAINMENT:
        return {
            "ground": ground,
            "container": _static(0.0, spec.h_con / 2.0),
            "object": _containment_object_fn(
                spec, _containment_contained(spec) ^ outcome_flipped),
            "occluder": _containment_panel_fn(spec),
        }
    if cat is EventCategory.COLLISION:
        fn1, fn2 = _collision_object_fns(spec, outcome_flipped)
        return {"ground": ground, "object": fn1, "object2": fn2}
    # barrier
    return {
        "ground": ground,
        "barrier": _static(BARRIER_X + BARRIER_THICKNESS / 2.0, BARRIER_HEIGHT / 2.0),
        "object": _barrier_object_fn(spec, _barrier_passes(spec) ^ outcome_flipped),
        "occluder": _static((E_PANEL_X[0] + E_PANEL_X[1]) / 2.0, E_PANEL_HEIGHT / 2.0),
    }


# ---------------------------------------------------------------------------
# Visibility (occluded-from-camera flags)
# ---------------------------------------------------------------------------

def _compute_visibility(bodies: list[Body], poses: dict[str, Pose]) -> dict[str, bool]:
    occluding = [b for b in bodies if b.kind in (BodyKind.OCCLUDER, BodyKind.CONTAINER)]
    visible: dict[str, bool] = {}
    for body in bodies:
        if body.kind in (BodyKind.GROUND, BodyKind.OCCLUDER):
            visible[body.id] = True
            continue
        x_int, z_int = world_extents(poses[body.id], body)
        top = z_int[1]
        covers = []
        for occ in occluding:
            if occ.id == body.id:
                continue
            ox, oz = world_extents(poses[occ.id], occ)
            if oz[1] >= top - 1e-9:
                covers.append(ox)
        visible[body.id] = not _interval_covered(x_int, covers)
    return visible


def _interval_covered(target: tuple[float, float], covers: list[tuple[float, float]]) -> bool:
    lo, hi = target
    reach = lo
    for c_lo, c_hi in sorted(covers):
        if c_lo > reach + 1e-12:
            return False
        reach = max(reach, c_hi)
        if reach >= hi - 1e-12:
            return True
    return reach >= hi - 1e-12


# ---------------------------------------------------------------------------
# Public operations
# ---------------------------------------------------------------------------

def _simulate(spec: ScenarioSpec, outcome_flipped: bool) -> Trajectory:
    spec.validate()
    bodies = build_bodies(spec)
    fns = _pose_fns(spec, outcome_flipped)
    frames = []
    for i in range(N_FRAMES):
        t = FRAME_TIMES[i]
        poses = {b.id: fns[b.id](t) for b in bodies}
        frames.append(Frame(index=i, poses=poses,
                            visible=_compute_visibility(bodies, poses)))
    return Trajectory(frames=frames)


def simulate_expected(spec: ScenarioSpec) -> Trajectory:
    """Simulate the lawful outcome for a spec."""
    return _simulate(spec, outcome_flipped=False)


def simulate_surprising(spec: ScenarioSpec, violation: PosteriorRule) -> Trajectory:
    """Simulate the scene with the given outcome rule flipped.

    The trajectory matches the expected one until the causal interaction
    begins.  Raises InvalidViolationError when the rule does not belong to the
    spec's category or is not the category's scripted violation.
    """
    from .scenarios import choose_violation  # local import avoids a cycle

    if violation is not choose_violation(spec):
        raise InvalidViolationError(
            f"{violation.name} is not the scripted violation for {spec.subtype.value}")
    return _simulate(spec, outcome_flipped=True)


def extract_outcome(traj: Trajectory, spec: ScenarioSpec) -> np.ndarray:
    """Ternary verdict per posterior rule, read purely from frame geometry.

    Rules outside the spec's category are IRRELEVANT.
    """
    out = np.full(N_POSTERIOR_RULES, IRRELEVANT, dtype=np.int8)
    bodies = {b.id: b for b in build_bodies(spec)}
    obj = bodies["object"]
    final = traj.frames[-1]
    cat = spec.category

    if cat is EventCategory.SUPPORT:
        _, z_int = world_extents(final.poses["object"], obj)
        out[PosteriorRule.FALLS_TO_GROUND] = YES if z_int[0] < SUPPORT_HEIGHT / 2.0 else NO

    elif cat is EventCategory.OCCLUSION:
        mid_h = middle_segment_height(spec.h_occ)
        mid_zone = (-MIDDLE_HALF_WIDTH, MIDDLE_HALF_WIDTH)
        visible_above = False
        reappears = False
        for frame in traj.frames:
            x_int, z_int = world_extents(frame.poses["object"], obj)
            if intervals_overlap(x_int, mid_zone) and z_int[1] > mid_h:
                visible_above = True
            if x_int[0] > OCCLUDER_HALF_WIDTH:
                reappears = True
        out[PosteriorRule.VISIBLE_ABOVE_MIDDLE] = YES if visible_above else NO
        out[PosteriorRule.REAPPEARS_BEYOND_OCCLUDER] = YES if reappears else NO

    elif cat is EventCategory.CONTAINMENT:
        interior_half = core.container_interior_width(spec.w_con) / 2.0
        x_int, z_int = world_extents(final.poses["object"], obj)
        inside_x = x_int[0] >= -interior_half - 1e-9 and x_int[1] <= interior_half + 1e-9
        below_rim = z_int[1] < spec.h_con
        out[PosteriorRule.FULLY_CONTAINED] = YES if (inside_x and below_rim) else NO
        out[PosteriorRule.PROTRUDES_ABOVE_RIM] = YES if (inside_x and not below_rim) else NO

    elif cat is EventCategory.COLLISION:
        xs1 = [f.poses["object"][0] for f in traj.frames]
        xs2 = [f.poses["object2"][0] for f in traj.frames]
        contact_frame = int(round(D_CONTACT_T / DT))
        pre = xs1[contact_frame - 1] - xs1[0]
        post = xs1[-1] - xs1[contact_frame + 1]
        out[PosteriorRule.OBJ1_REVERSES] = YES if (pre > 0.0) != (post > 0.0) else NO
        displaced = abs(xs2[-1] - xs2[contact_frame])
        out[PosteriorRule.OBJ2_DISPLACED] = (
            YES if displaced > DISPLACEMENT_THRESHOLD else NO)

    else:  # barrier
        far_face = BARRIER_X + BARRIER_THICKNESS
        x_int, _ = world_extents(final.poses["object"], obj)
        passes = x_int[0] > far_face
        stops = (not passes) and abs(x_int[1] - BARRIER_X) < 1e-6
        out[PosteriorRule.PASSES_BEYOND_BARRIER] = YES if passes else NO
        out[PosteriorRule.STOPS_AT_BARRIER] = YES if stops else NO

    return out
