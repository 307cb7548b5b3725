"""Hand-written controllers for the disc tasks.

They are oracles for the success accounting and sources of contact-rich
trajectories in tests; the learner never sees them.
"""
from __future__ import annotations

import numpy as np

from .core import PlanarEnv


class ScriptedPusher:
    """Approach the object from the side opposite the goal, then push it in.

    ``observe`` takes the full observation vector of a Push/Slide env.
    """

    def __init__(self, env: PlanarEnv, gain=40.0, tol=0.015, push_force=10.0):
        self.env = env
        cfg = env.config
        self.r_sum = cfg.eff_radius + cfg.obj_size
        self.gain = gain
        self.tol = tol
        # pushing harder than this overshoots the goal
        self.push_scale = min(1.0, push_force / cfg.eff_max_force)

    def _steer(self, eff, vel, target):
        cfg = self.env.config
        # PD force towards the target, expressed in units of the max force
        force = self.gain * (target - eff) * cfg.eff_damping
        a = force / cfg.eff_max_force
        n = np.linalg.norm(a)
        return a / n if n > 1 else a

    def __call__(self, obs, goal):
        eff, vel, obj = obs[0:2], obs[2:4], obs[4:6]
        to_goal = goal - obj
        dist = np.linalg.norm(to_goal)
        if dist < self.tol:
            away = eff - obj
            return self._steer(eff, vel, obj + away / max(np.linalg.norm(away), 1e-9) * (self.r_sum + 0.05))
        u = to_goal / dist
        perp = np.array([-u[1], u[0]])
        rel = eff - obj
        along = rel @ u
        side = rel @ perp
        behind = obj - u * (self.r_sum + 0.01)
        if along > -0.6 * self.r_sum or abs(side) > 0.5 * self.r_sum:
            if along > -self.r_sum and abs(side) < self.r_sum + 0.01:
                # in front of or touching the object: step sideways first
                s = 1.0 if side >= 0 else -1.0
                return self._steer(eff, vel, obj + perp * s * (self.r_sum + 0.03) - u * 0.01)
            return self._steer(eff, vel, behind)
        speed = np.clip(dist * 5.0, 0.25, 1.0) * self.push_scale
        correction = -side * 40.0
        a = u * speed + perp * correction
        n = np.linalg.norm(a)
        return a / n if n > 1 else a
