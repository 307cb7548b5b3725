"""Goal-conditioned environment contract shared by the planar tasks.

Observation layout (flat float64 vector)::

    | proprio | object | force_now | force_sum |

``object`` starts with the object position, which is also the achieved goal.
The two force channels are always the last two entries, so dropping the tactile
channels is ``obs[..., :-2]``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from ..errors import ConfigError, UsageError
from .physics import LEVEL_SCALES, PhysicsConfig, PhysicsState, contact_force, integrate

LEVELS = tuple(LEVEL_SCALES)
DEFAULT_HORIZON = 50
DEFAULT_EPS_POS = 0.05


@dataclass(frozen=True)
class ObsLayout:
    names: tuple
    proprio: slice
    object: slice
    object_pos: slice

    @property
    def size(self) -> int:
        return len(self.names)

    @property
    def force_now(self) -> int:
        return self.size - 2

    @property
    def force_sum(self) -> int:
        return self.size - 1

    def table(self) -> str:
        """Markdown index table of the layout."""
        rows = ["| index | name | block |", "|---|---|---|"]
        for i, name in enumerate(self.names):
            if i < self.proprio.stop:
                block = "proprio"
            elif i < self.object.stop:
                block = "object"
            else:
                block = "force"
            rows.append(f"| {i} | {name} | {block} |")
        return "\n".join(rows)


def make_layout(proprio_names, object_names, goal_dim) -> ObsLayout:
    names = tuple(proprio_names) + tuple(object_names) + ("force_now", "force_sum")
    p = len(proprio_names)
    o = len(object_names)
    return ObsLayout(names, slice(0, p), slice(p, p + o), slice(p, p + goal_dim))


class StepOutcome(NamedTuple):
    next_obs: np.ndarray
    achieved: np.ndarray
    force_reading: float


def check_level(level: str) -> str:
    if level not in LEVELS:
        raise ConfigError(f"unknown goal level {level!r}; expected one of {LEVELS}")
    return level


def goal_distance(achieved, desired):
    achieved = np.asarray(achieved, dtype=float)
    desired = np.asarray(desired, dtype=float)
    if achieved.shape[-1] != desired.shape[-1]:
        raise UsageError(f"goal dimension mismatch: {achieved.shape} vs {desired.shape}")
    return np.linalg.norm(achieved - desired, axis=-1)


def is_success(achieved, desired, eps_pos: float = DEFAULT_EPS_POS):
    if not eps_pos > 0:
        raise UsageError("eps_pos must be positive")
    return goal_distance(achieved, desired) < eps_pos


class PlanarEnv:
    """Base class: owns the physics state, step counter and force accumulator."""

    task = "base"
    action_dim = 2
    goal_dim = 2
    layout: ObsLayout

    def __init__(self, config: PhysicsConfig | None = None, horizon: int = DEFAULT_HORIZON):
        self.config = config if config is not None else self.default_config()
        self.horizon = horizon
        self.state: PhysicsState | None = None
        self.goal = None
        self.t = 0
        self.force_sum = 0.0

    @staticmethod
    def default_config() -> PhysicsConfig:
        raise NotImplementedError

    def initial_state(self, rng) -> PhysicsState:
        raise NotImplementedError

    def observe(self, force_now: float) -> np.ndarray:
        raise NotImplementedError

    def sample_goal(self, level: str, rng) -> np.ndarray:
        lo, hi = self.config.goal_region(check_level(level))
        return rng.uniform(lo, hi)

    def reset(self, level: str, seed: int):
        check_level(level)
        rng = np.random.default_rng(seed)
        self.state = self.initial_state(rng)
        self.goal = self.sample_goal(level, rng)
        self.t = 0
        self.force_sum = 0.0
        return self.observe(0.0), self.goal.copy()

    def step(self, action) -> StepOutcome:
        if self.state is None:
            raise UsageError("step() called before reset()")
        if self.t >= self.horizon:
            raise UsageError(f"episode horizon {self.horizon} exceeded")
        a = np.clip(np.asarray(action, dtype=float), -1.0, 1.0)
        if a.shape != (self.action_dim,):
            raise UsageError(f"expected action of shape ({self.action_dim},), got {a.shape}")
        for _ in range(self.config.substeps):
            self.state = integrate(self.state, a, self.config)
        f = contact_force(self.state, self.config)
        self.force_sum += f
        self.t += 1
        obs = self.observe(f)
        return StepOutcome(obs, obs[self.layout.object_pos].copy(), f)

    def achieved_goal(self, obs) -> np.ndarray:
        return np.asarray(obs)[..., self.layout.object_pos]

    def snapshot(self):
        return (self.state.copy(), self.goal.copy(), self.t, self.force_sum)

    def restore(self, snap):
        state, goal, t, fsum = snap
        self.state, self.goal, self.t, self.force_sum = state.copy(), goal.copy(), t, fsum


def dump_trajectory(path, records) -> None:
    """Write one JSON object per line; numpy arrays become lists."""
    with open(path, "w") as fh:
        for rec in records:
            fh.write(json.dumps({k: _jsonable(v) for k, v in rec.items()}) + "\n")


def load_trajectory(path) -> list:
    with open(path) as fh:
        return [json.loads(line) for line in fh if line.strip()]


def _jsonable(v):
    if isinstance(v, np.ndarray):
        return v.tolist()
    if isinstance(v, (np.floating, np.integer, np.bool_)):
        return v.item()
    return v


def rollout_actions(env: PlanarEnv, level: str, seed: int, actions) -> list:
    """Replay an action log from reset and return trajectory records."""
    obs, goal = env.reset(level, seed)
    records = []
    for t, a in enumerate(actions):
        out = env.step(a)
        records.append({
            "t": t, "obs": obs, "goal": goal, "action": np.asarray(a, dtype=float),
            "next_obs": out.next_obs, "achieved": out.achieved, "force_reading": out.force_reading,
        })
        obs = out.next_obs
    return records
