import numpy as np
import pytest

from tactile_her.envs.physics import (
    GRAVITY, PhysicsConfig, PhysicsState, contact_force, contact_vectors, disc_square_overlap,
    integrate,
)
from tactile_her.envs.tasks import lift_config, push_config, region_out_of_reach, slide_config, slide_reachability
from tactile_her.errors import ConfigError, SimulationError


def disc_state(eff, obj, eff_vel=(0, 0), obj_vel=(0, 0)):
    return PhysicsState(np.array(eff, float), np.array(eff_vel, float),
                        np.array(obj, float), np.array(obj_vel, float))


def random_disc_state(rng, cfg, spread=0.06):
    center = np.array([0.4, 0.0])
    eff = center + rng.uniform(-spread, spread, 2)
    obj = center + rng.uniform(-spread, spread, 2)
    return disc_state(eff, obj, rng.normal(0, 0.3, 2), rng.normal(0, 0.3, 2))


def test_object_at_rest_without_contact_stays_at_rest():
    cfg = push_config()
    s = integrate(disc_state((0.1, 0.0), (0.5, 0.0)), [0.3, -0.2], cfg)
    assert np.all(s.obj_vel == 0.0)
    assert np.all(s.obj_pos == [0.5, 0.0])


@pytest.mark.parametrize("v", [0.5, 0.05, 0.001])
def test_friction_closed_form(v):
    cfg = push_config()
    s = integrate(disc_state((0.1, 0.0), (0.5, 0.0), obj_vel=(v, 0.0)), [0, 0], cfg)
    assert s.obj_vel[0] == pytest.approx(max(0.0, v - cfg.mu * GRAVITY * cfg.dt), abs=1e-15)
    assert s.obj_vel[1] == 0.0


def test_penalty_force_along_separation_normal():
    cfg = push_config()
    r_sum = cfg.eff_radius + cfg.obj_size
    delta = 0.004
    direction = np.array([0.6, 0.8])
    eff = np.array([0.4, 0.0])
    s = disc_state(eff, eff + direction * (r_sum - delta))
    (f,) = contact_vectors(s, cfg)
    np.testing.assert_allclose(f, cfg.k_n * delta * direction, rtol=1e-9)


def test_contact_force_values():
    cfg = push_config(k_n=1000.0)
    r_sum = cfg.eff_radius + cfg.obj_size
    assert contact_force(disc_state((0.3, 0), (0.3 + r_sum + 1e-4, 0)), cfg) == 0.0
    assert contact_force(disc_state((0.3, 0), (0.3 + r_sum - 0.01, 0)), cfg) == pytest.approx(10.0)
    f1 = contact_force(disc_state((0.3, 0), (0.3 + r_sum - 0.002, 0)), cfg)
    f2 = contact_force(disc_state((0.3, 0), (0.3 + r_sum - 0.004, 0)), cfg)
    assert f2 == pytest.approx(2 * f1)


def test_contact_zero_iff_no_overlap(rng):
    cfg = push_config()
    r_sum = cfg.eff_radius + cfg.obj_size
    for _ in range(2000):
        s = random_disc_state(rng, cfg)
        overlap = r_sum - np.linalg.norm(s.obj_pos - s.eff_pos)
        assert (contact_force(s, cfg) > 0) == (overlap > 0)


def test_disc_square_overlap_outside_and_inside():
    depth, n = disc_square_overlap(np.array([-0.03, 0.0]), 0.01, np.zeros(2), 0.025)
    assert depth == pytest.approx(0.005)
    np.testing.assert_allclose(n, [1.0, 0.0])
    depth, n = disc_square_overlap(np.array([0.02, 0.0]), 0.01, np.zeros(2), 0.025)
    assert depth == pytest.approx(0.015)
    np.testing.assert_allclose(n, [-1.0, 0.0])


def test_third_law_momentum_balance(rng):
    # no damping, no friction, far from walls: contact is the only force
    cfg = push_config(eff_damping=0.0, mu=0.0)
    for _ in range(500):
        s = random_disc_state(rng, cfg)
        new = integrate(s, [0, 0], cfg)
        dp = cfg.m_eff * (new.eff_vel - s.eff_vel) + cfg.m_obj * (new.obj_vel - s.obj_vel)
        np.testing.assert_allclose(dp, 0.0, atol=1e-12)


def test_friction_never_speeds_up_or_reverses(rng):
    cfg = push_config()
    far = (0.0, 0.35)
    for _ in range(1000):
        v = rng.normal(0, 0.5, 2)
        s = integrate(disc_state(far, (0.5, 0.0), obj_vel=v), [0, 0], cfg)
        assert np.linalg.norm(s.obj_vel) <= np.linalg.norm(v) + 1e-15
        assert np.all(s.obj_vel * v >= 0)


def test_positions_clamped_to_workspace():
    cfg = push_config()
    s = integrate(disc_state((0.799, 0.0), (0.3, 0.0), eff_vel=(5.0, 0.0)), [1, 0], cfg)
    assert s.eff_pos[0] == cfg.eff_hi[0]
    assert s.eff_vel[0] == 0.0


def test_non_finite_state_raises():
    cfg = push_config()
    with pytest.raises(SimulationError):
        integrate(disc_state((0.1, 0.0), (0.5, 0.0), obj_vel=(np.nan, 0.0)), [0, 0], cfg)


def test_config_validation():
    with pytest.raises(ConfigError):
        PhysicsConfig(dt=0.0)
    with pytest.raises(ConfigError):
        PhysicsConfig(k_n=-1.0)
    with pytest.raises(ConfigError):
        PhysicsConfig(level_scales={"Simple": 1.0, "Intermediate": 0.75, "Hard": 0.5})
    with pytest.raises(ConfigError):
        push_config().goal_region("Extreme")


def test_levels_nested():
    for cfg in (push_config(), slide_config(), lift_config()):
        boxes = [cfg.goal_region(lv) for lv in ("Simple", "Intermediate", "Hard")]
        for (lo_a, hi_a), (lo_b, hi_b) in zip(boxes, boxes[1:]):
            assert np.all(lo_b <= lo_a) and np.all(hi_a <= hi_b)


def test_simple_and_intermediate_are_scaled_hard_region():
    cfg = push_config()
    lo_h, hi_h = cfg.goal_region("Hard")
    c, half = (lo_h + hi_h) / 2, (hi_h - lo_h) / 2
    for level, k in (("Simple", 0.5), ("Intermediate", 0.75)):
        lo, hi = cfg.goal_region(level)
        np.testing.assert_allclose(lo, c - k * half)
        np.testing.assert_allclose(hi, c + k * half)


def test_slide_goals_out_of_reach(rng):
    cfg = slide_config()
    out_of_reach = slide_reachability(cfg)
    lo, hi = cfg.goal_region("Hard")
    assert all(out_of_reach(g) for g in rng.uniform(lo, hi, size=(2000, 2)))
    assert region_out_of_reach(cfg)
    # no effector pose inside the workspace can overlap a goal point
    eff = rng.uniform(cfg.eff_lo, cfg.eff_hi, size=(2000, 2))
    goals = rng.uniform(lo, hi, size=(2000, 2))
    assert np.min(np.linalg.norm(eff - goals, axis=1)) > cfg.eff_radius


def test_push_goals_reachable():
    cfg = push_config()
    out_of_reach = slide_reachability(cfg)
    lo, hi = cfg.goal_region("Hard")
    assert not out_of_reach((lo + hi) / 2)
    assert not region_out_of_reach(cfg)


def lift_state(eff, obj, aperture, latched=False):
    return PhysicsState(np.array(eff, float), np.zeros(2), np.array(obj, float), np.zeros(2),
                        aperture=aperture, latched=latched)


def test_lift_finger_forces_sum():
    cfg = lift_config()
    h, r = cfg.obj_size, cfg.finger_radius
    # each finger overlaps the square by 2 mm
    ap = 2 * (h + r - 0.002)
    s = lift_state((0.3, h), (0.3, h), ap)
    assert contact_force(s, cfg) == pytest.approx(2 * cfg.k_n * 0.002)


def test_lift_latch_and_release():
    cfg = lift_config()
    h, r = cfg.obj_size, cfg.finger_radius
    s = lift_state((0.3, h + 0.001), (0.3, h), 2 * (h + r - 0.004))
    # closing with both fingers pressing engages the latch
    s = integrate(s, [0, 0, -1], cfg)
    assert s.latched
    for _ in range(20):
        s = integrate(s, [0, 1, -1], cfg)
    assert s.obj_pos[1] > h + 0.05
    np.testing.assert_allclose(s.obj_pos - s.eff_pos, s.grasp_offset)
    s = integrate(s, [0, 0, 1], cfg)
    assert not s.latched


def test_lift_no_latch_without_squeeze():
    cfg = lift_config()
    h = cfg.obj_size
    s = lift_state((0.3, 0.1), (0.3, h), cfg.aperture_max)
    for _ in range(10):
        s = integrate(s, [0, 0, -1], cfg)
    assert not s.latched


def test_lift_object_falls_to_table():
    cfg = lift_config()
    h = cfg.obj_size
    s = lift_state((0.1, 0.25), (0.4, 0.2), cfg.aperture_max)
    for _ in range(100):
        s = integrate(s, [0, 0, 0], cfg)
    assert s.obj_pos[1] == pytest.approx(h)
    assert s.obj_vel[1] == 0.0
