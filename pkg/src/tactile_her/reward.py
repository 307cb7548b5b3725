"""Sparse extrinsic reward, tactile intrinsic reward and their weighted sum.

All functions broadcast over leading batch dimensions.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, fields

import numpy as np

from .errors import ConfigError, DataError
from .envs.core import goal_distance

DEFAULT_EPS_FORCE = {"Push": 10.0, "Lift": 10.0, "Slide": 3.0}


@dataclass(frozen=True)
class RewardParams:
    w_ext: float = 0.75
    w_int: float = 0.25
    eps_pos: float = 0.05
    eps_force: float = 10.0

    def __post_init__(self):
        if self.w_ext < 0 or self.w_int < 0:
            raise ConfigError("reward weights must be nonnegative")
        if not self.eps_pos > 0:
            raise ConfigError("eps_pos must be positive")
        if not self.eps_force > 0:
            raise ConfigError("eps_force must be positive")

    @property
    def max_reward(self) -> float:
        return self.w_ext + self.w_int

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "RewardParams":
        unknown = set(d) - {f.name for f in fields(cls)}
        if unknown:
            raise ConfigError(f"unknown reward fields: {sorted(unknown)}")
        return cls(**d)

    @classmethod
    def for_task(cls, task: str, intrinsic: bool = True, **kw) -> "RewardParams":
        """Task defaults; ``intrinsic=False`` gives the pure extrinsic indicator."""
        base = {"eps_force": DEFAULT_EPS_FORCE[task]}
        if not intrinsic:
            base.update(w_ext=1.0, w_int=0.0)
        base.update(kw)
        return cls(**base)


def contact_reached(force_sum, eps_force):
    """Shared threshold predicate for the intrinsic reward and contact prioritization."""
    return np.asarray(force_sum) > eps_force


def extrinsic_reward(achieved, desired, params: RewardParams):
    hit = goal_distance(achieved, desired) < params.eps_pos
    return hit.astype(float) if isinstance(hit, np.ndarray) else float(hit)


def intrinsic_reward(force_sum, params: RewardParams):
    hit = contact_reached(force_sum, params.eps_force)
    return hit.astype(float) if hit.ndim else float(hit)


def combined_reward(achieved, desired, force_sum, params: RewardParams):
    return (params.w_ext * extrinsic_reward(achieved, desired, params)
            + params.w_int * intrinsic_reward(force_sum, params))


def recompute_hindsight(transition, new_goal, params: RewardParams):
    """Reward of ``transition`` had ``new_goal`` been the desired goal.

    ``transition`` is anything exposing ``achieved_next`` and ``force_sum_next``
    (a Transition, MiniBatchItem or a mapping with those keys).
    """
    get = transition.get if isinstance(transition, dict) else lambda k: getattr(transition, k, None)
    achieved = get("achieved_next")
    force_sum = get("force_sum_next")
    if force_sum is None or achieved is None:
        raise DataError("transition lacks achieved_next/force_sum_next")
    return combined_reward(achieved, new_goal, force_sum, params)
