"""Push, Slide and Lift on top of the planar physics."""
from __future__ import annotations

import numpy as np

from ..errors import ConfigError
from .core import DEFAULT_HORIZON, PlanarEnv, make_layout
from .physics import PhysicsConfig, PhysicsState, contact_force, finger_forces

_DISC_PROPRIO = ("eff_x", "eff_y", "eff_vx", "eff_vy")
_DISC_OBJECT = ("obj_x", "obj_y", "obj_vx", "obj_vy")


def push_config(**kw) -> PhysicsConfig:
    return PhysicsConfig(**kw)


def slide_config(**kw) -> PhysicsConfig:
    base = dict(
        mu=0.1,
        eff_max_force=40.0,
        eff_lo=(0.0, -0.2), eff_hi=(0.25, 0.2),
        obj_lo=(0.0, -0.4), obj_hi=(1.2, 0.4),
        eff_start=(0.05, 0.0),
        obj_start_center=(0.15, 0.0), obj_start_half=(0.02, 0.02),
        goal_center=(0.8, 0.0), goal_half=(0.25, 0.2),
    )
    base.update(kw)
    return PhysicsConfig(**base)


def lift_config(**kw) -> PhysicsConfig:
    half = 0.025
    base = dict(
        obj_shape="square", obj_size=half, gripper=True,
        eff_lo=(0.0, 0.01), eff_hi=(0.6, 0.3),
        obj_lo=(0.0, half), obj_hi=(0.6, 0.3),
        eff_start=(0.3, 0.1),
        obj_start_center=(0.3, half), obj_start_half=(0.05, 0.0),
        # every level lies well above table height
        goal_center=(0.3, 0.15), goal_half=(0.15, 0.06),
    )
    base.update(kw)
    return PhysicsConfig(**base)


class PushEnv(PlanarEnv):
    task = "Push"
    layout = make_layout(_DISC_PROPRIO, _DISC_OBJECT, 2)

    @staticmethod
    def default_config():
        return push_config()

    def initial_state(self, rng):
        c = self.config
        obj = rng.uniform(np.subtract(c.obj_start_center, c.obj_start_half),
                          np.add(c.obj_start_center, c.obj_start_half))
        return PhysicsState(np.array(c.eff_start, dtype=float), np.zeros(2), obj, np.zeros(2))

    def observe(self, force_now):
        s = self.state
        return np.concatenate([s.eff_pos, s.eff_vel, s.obj_pos, s.obj_vel, [force_now, self.force_sum]])


class SlideEnv(PushEnv):
    task = "Slide"

    @staticmethod
    def default_config():
        return slide_config()


class LiftEnv(PlanarEnv):
    task = "Lift"
    action_dim = 3
    layout = make_layout(
        ("eff_x", "eff_z", "eff_vx", "eff_vz", "aperture", "finger_left", "finger_right"),
        ("obj_x", "obj_z", "obj_vx", "obj_vz"),
        2,
    )

    @staticmethod
    def default_config():
        return lift_config()

    def initial_state(self, rng):
        c = self.config
        obj = rng.uniform(np.subtract(c.obj_start_center, c.obj_start_half),
                          np.add(c.obj_start_center, c.obj_start_half))
        return PhysicsState(np.array(c.eff_start, dtype=float), np.zeros(2), obj, np.zeros(2),
                            aperture=c.aperture_max)

    def observe(self, force_now):
        s = self.state
        fl, fr = finger_forces(s, self.config)
        return np.concatenate([s.eff_pos, s.eff_vel, [s.aperture, fl, fr],
                               s.obj_pos, s.obj_vel, [force_now, self.force_sum]])


TASKS = {"Push": PushEnv, "Slide": SlideEnv, "Lift": LiftEnv}


def make_env(task: str, config: PhysicsConfig | None = None, horizon: int = DEFAULT_HORIZON) -> PlanarEnv:
    try:
        cls = TASKS[task]
    except KeyError:
        raise ConfigError(f"unknown task {task!r}; expected one of {sorted(TASKS)}") from None
    return cls(config, horizon)


def default_physics(task: str) -> PhysicsConfig:
    if task not in TASKS:
        raise ConfigError(f"unknown task {task!r}")
    return TASKS[task].default_config()


def sample_goal(config: PhysicsConfig, level: str, rng) -> np.ndarray:
    lo, hi = config.goal_region(level)
    return rng.uniform(lo, hi)


def slide_reachability(config: PhysicsConfig):
    """Predicate ``g -> True`` when no effector pose inside the workspace can touch point ``g``.

    A goal point is touchable when it lies within ``eff_radius`` of the effector
    workspace box, since the effector disc covers that margin.
    """
    lo = np.asarray(config.eff_lo, dtype=float)
    hi = np.asarray(config.eff_hi, dtype=float)
    r = config.eff_radius

    def out_of_reach(g) -> bool:
        g = np.asarray(g, dtype=float)
        gap = np.maximum(0.0, np.maximum(lo - g, g - hi))
        return bool(np.hypot(*gap) > r)

    return out_of_reach


def region_out_of_reach(config: PhysicsConfig, level: str = "Hard") -> bool:
    """Whole goal region unreachable; checks the region box nearest point to the workspace."""
    lo, hi = config.goal_region(level)
    elo = np.asarray(config.eff_lo, dtype=float)
    ehi = np.asarray(config.eff_hi, dtype=float)
    gap = np.maximum(0.0, np.maximum(elo - hi, lo - ehi))
    return bool(np.hypot(*gap) > config.eff_radius)


__all__ = [
    "PushEnv", "SlideEnv", "LiftEnv", "TASKS", "make_env", "default_physics",
    "sample_goal", "slide_reachability", "region_out_of_reach", "contact_force",
]
