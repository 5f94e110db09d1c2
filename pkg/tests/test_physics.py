"""Simulation behavior: spec'd examples, conservation laws, determinism."""
import json
import math

import numpy as np
import pytest

from voebench.catalog import NO, YES, PosteriorRule
from voebench.core import (DT, GRAVITY, N_FRAMES, SUPPORT_HEIGHT, BarrierKind,
                           ContainerShape, EventCategory, ObjectShape,
                           ScenarioSpec, SubType, InvalidSpecError, quat_norm,
                           world_extents, build_bodies)
from voebench.physics import (InvalidViolationError, extract_outcome,
                              simulate_expected, simulate_surprising)
from voebench.scenarios import choose_violation, sample_trial, subtype_allocation


def support_spec(c_obj, shape=ObjectShape.CUBE, h=1.0, w=1.0, seed=0):
    return ScenarioSpec(EventCategory.SUPPORT,
                        SubType.A1 if c_obj > 0.5 else SubType.A2,
                        seed, shape, h, w, c_obj=c_obj)


def footprint_centroid_fraction(samples=20001):
    """Independent oracle: centroid of a symmetric footprint via integration.

    depth(x) is symmetric in x for every object shape in the catalog (squares
    and circles), so the lateral centroid sits at half the width regardless of
    shape.  Integrate a circular footprint as the worst case.
    """
    xs = np.linspace(-0.5, 0.5, samples)
    depth = np.sqrt(np.clip(0.25 - xs ** 2, 0.0, None))
    centroid = float(np.trapezoid(xs * depth, xs) / np.trapezoid(depth, xs))
    return centroid + 0.5   # as a fraction of width from the left edge


def test_com_over_edge_object_falls():
    # 80% of the width over the edge puts the centroid past the support edge
    centroid_frac = footprint_centroid_fraction()
    assert abs(centroid_frac - 0.5) < 1e-9   # oracle: symmetric footprint
    assert 0.8 > centroid_frac               # CoM beyond edge for c_obj = 0.8
    spec = support_spec(0.8)
    traj = simulate_expected(spec)
    obj = [b for b in build_bodies(spec) if b.id == "object"][0]
    _, z_int = world_extents(traj.frames[-1].poses["object"], obj)
    assert z_int[0] == pytest.approx(0.0, abs=1e-9)   # resting on the ground


def test_balanced_object_stays_on_support():
    spec = support_spec(0.3)
    traj = simulate_expected(spec)
    obj = [b for b in build_bodies(spec) if b.id == "object"][0]
    _, z_int = world_extents(traj.frames[-1].poses["object"], obj)
    assert z_int[0] == pytest.approx(SUPPORT_HEIGHT, abs=1e-9)


def test_stationary_resting_phase_has_constant_pose():
    # after settling, the pose stays bit-identical frame to frame
    spec = support_spec(0.3)
    traj = simulate_expected(spec)
    t_land = math.sqrt(2 * 0.5 / GRAVITY)
    first_settled = int(t_land / DT) + 1
    poses = [traj.frames[i].poses["object"] for i in range(first_settled, N_FRAMES)]
    assert all(p == poses[0] for p in poses)


def collision_spec(h1, v1, h2, v2, subtype=SubType.D1):
    return ScenarioSpec(EventCategory.COLLISION, subtype, 0, ObjectShape.CUBE,
                        h1, h1, h_obj2=h2, v_obj=v1, v_obj2=v2)


def test_equal_collision_exchanges_speeds_exactly():
    spec = collision_spec(1.0, 1.3, 1.0, 1.3, subtype=SubType.D2)
    traj = simulate_expected(spec)
    xs1 = [f.poses["object"][0] for f in traj.frames]
    xs2 = [f.poses["object2"][0] for f in traj.frames]
    v1_post = (xs1[-1] - xs1[-2]) / DT
    v2_post = (xs2[-1] - xs2[-2]) / DT
    assert v1_post == pytest.approx(-1.3, abs=1e-9)
    assert v2_post == pytest.approx(1.3, abs=1e-9)


def test_momentum_conserved_in_expected_collisions():
    cat = EventCategory.COLLISION
    for i, st in enumerate(subtype_allocation(cat, 30)):
        trial = sample_trial(5, cat, st, i)
        traj = trial.expected
        m1 = trial.spec.h_obj ** 3
        m2 = trial.spec.h_obj2 ** 3
        xs1 = [f.poses["object"][0] for f in traj.frames]
        xs2 = [f.poses["object2"][0] for f in traj.frames]
        p_pre = m1 * (xs1[1] - xs1[0]) / DT + m2 * (xs2[1] - xs2[0]) / DT
        p_post = m1 * (xs1[-1] - xs1[-2]) / DT + m2 * (xs2[-1] - xs2[-2]) / DT
        assert abs(p_pre - p_post) <= 1e-9


def test_quaternions_stay_unit_norm(sample_trials):
    for trials in sample_trials.values():
        for trial in trials:
            for traj in (trial.expected, trial.surprising):
                for frame in traj.frames:
                    for pose in frame.poses.values():
                        assert abs(quat_norm(pose[3:]) - 1.0) <= 1e-9


def test_fifty_frames_with_increasing_indices(sample_trials):
    for trials in sample_trials.values():
        for trial in trials:
            assert len(trial.expected.frames) == N_FRAMES
            assert [f.index for f in trial.expected.frames] == list(range(N_FRAMES))


def test_surprising_shares_prefix_with_expected(sample_trials):
    for trials in sample_trials.values():
        for trial in trials:
            first_diff = None
            for i in range(N_FRAMES):
                if trial.expected.frames[i].poses != trial.surprising.frames[i].poses:
                    first_diff = i
                    break
            assert first_diff is not None, "surprising version never diverges"
            assert first_diff > 0, "trajectories must share the pre-interaction prefix"


def test_violation_flips_exactly_the_violated_rules(sample_trials):
    for trials in sample_trials.values():
        for trial in trials:
            exp = trial.posterior_expected
            sur = trial.posterior_surprising
            flipped = {PosteriorRule(int(i)) for i in np.flatnonzero(exp != sur)}
            assert flipped == set(trial.violated_rules)
            assert choose_violation(trial.spec) in flipped


def test_simulate_is_deterministic():
    spec = support_spec(0.73)
    a = simulate_expected(spec)
    b = simulate_expected(spec)
    for fa, fb in zip(a.frames, b.frames):
        assert fa.poses == fb.poses and fa.visible == fb.visible


def test_invalid_violation_rejected():
    spec = support_spec(0.8)
    with pytest.raises(InvalidViolationError):
        simulate_surprising(spec, PosteriorRule.PASSES_BEYOND_BARRIER)


def test_degenerate_spec_rejected():
    with pytest.raises(InvalidSpecError):
        simulate_expected(support_spec(0.5))          # undefined stability
    with pytest.raises(InvalidSpecError):
        simulate_expected(ScenarioSpec(
            EventCategory.SUPPORT, SubType.A1, 0, ObjectShape.CUBE,
            5.0, 5.0, c_obj=0.8))                     # out of range


def test_expected_containment_outcomes():
    spec = ScenarioSpec(EventCategory.CONTAINMENT, SubType.C1, 0,
                        ObjectShape.CUBE, 0.45, 0.5, s_con=ContainerShape.MUG,
                        h_con=1.2, w_con=1.0)
    out = extract_outcome(simulate_expected(spec), spec)
    assert out[PosteriorRule.FULLY_CONTAINED] == YES
    assert out[PosteriorRule.PROTRUDES_ABOVE_RIM] == NO
    assert out[PosteriorRule.FALLS_TO_GROUND] == -1   # off-category rules irrelevant


def test_surprising_solid_barrier_passes_beyond():
    spec = ScenarioSpec(EventCategory.BARRIER, SubType.E2, 0, ObjectShape.CUBE,
                        0.8, 0.8, barrier_kind=BarrierKind.SOLID)
    traj = simulate_surprising(spec, PosteriorRule.PASSES_BEYOND_BARRIER)
    out = extract_outcome(traj, spec)
    assert out[PosteriorRule.PASSES_BEYOND_BARRIER] == YES
    assert out[PosteriorRule.STOPS_AT_BARRIER] == NO


def test_static_support_never_falls():
    spec = support_spec(0.2)
    out = extract_outcome(simulate_expected(spec), spec)
    assert out[PosteriorRule.FALLS_TO_GROUND] == NO


def test_occlusion_visibility_honors_middle_segment():
    spec = ScenarioSpec(EventCategory.OCCLUSION, SubType.B2, 0,
                        ObjectShape.CUBE, 1.4, 0.6, h_occ=0.2)
    traj = simulate_expected(spec)
    out = extract_outcome(traj, spec)
    assert out[PosteriorRule.VISIBLE_ABOVE_MIDDLE] == YES
    assert out[PosteriorRule.REAPPEARS_BEYOND_OCCLUDER] == YES
    # while fully behind a tall side segment the object is flagged hidden
    hidden_frames = [f for f in traj.frames if not f.visible["object"]]
    assert hidden_frames, "object should be occluded at some point"
