"""Experiment configuration: task, difficulty, experiment arm and all hyperparameters."""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import NamedTuple

from .agent.ddpg import DdpgHyper
from .envs.core import DEFAULT_HORIZON, LEVELS
from .envs.physics import PhysicsConfig
from .envs.tasks import TASKS, default_physics
from .errors import ConfigError
from .replay import DEFAULT_HINDSIGHT_PROB, DEFAULT_LAMBDA
from .reward import RewardParams


class Arm(NamedTuple):
    sampler: str
    tactile_in_state: bool
    intrinsic: bool


ARMS = {
    "UniformHER": Arm("uniform", False, False),
    "UniformHER+Tactile": Arm("uniform", True, False),
    "IR": Arm("uniform", True, True),
    "CPER": Arm("cper", True, False),
    "CPER+IR": Arm("cper", True, True),
    "EpisodeAblation": Arm("episode", True, True),
    "RewardPrioritized": Arm("reward", True, True),
}

# the five learning curves per task in the main comparison
MAIN_ARMS = ("UniformHER", "UniformHER+Tactile", "IR", "CPER", "CPER+IR")


@dataclass
class ExperimentConfig:
    task: str = "Push"
    difficulty: str = "Simple"
    arm: str = "CPER+IR"
    seed: int = 1
    epochs: int = 50
    episodes_per_epoch: int = 40
    optimizer_steps_per_episode: int = 40
    eval_episodes: int = 20
    horizon: int = DEFAULT_HORIZON
    buffer_capacity: int = 2000
    lam: float = DEFAULT_LAMBDA
    hindsight_prob: float = DEFAULT_HINDSIGHT_PROB
    # stop once eval success reaches this value; None trains all epochs
    stop_success: float | None = None
    # overrides applied on top of the task/arm reward defaults
    reward: dict = field(default_factory=dict)
    physics: dict = field(default_factory=dict)
    ddpg: dict = field(default_factory=dict)

    def __post_init__(self):
        errors = []
        if self.task not in TASKS:
            errors.append(f"task: unknown {self.task!r}, expected one of {sorted(TASKS)}")
        if self.difficulty not in LEVELS:
            errors.append(f"difficulty: unknown {self.difficulty!r}, expected one of {list(LEVELS)}")
        if self.arm not in ARMS:
            errors.append(f"arm: unknown {self.arm!r}, expected one of {list(ARMS)}")
        for name in ("episodes_per_epoch", "eval_episodes", "horizon", "buffer_capacity"):
            if getattr(self, name) < 1:
                errors.append(f"{name}: must be positive")
        for name in ("epochs", "optimizer_steps_per_episode"):
            if getattr(self, name) < 0:
                errors.append(f"{name}: must be nonnegative")
        if not 0.0 <= self.hindsight_prob <= 1.0:
            errors.append("hindsight_prob: must lie in [0, 1]")
        if self.lam <= 0:
            errors.append("lam: must be positive")
        if errors:
            raise ConfigError("; ".join(errors))
        # fail early on bad nested sections
        self.reward_params()
        self.physics_config()
        self.ddpg_hyper()

    @property
    def arm_spec(self) -> Arm:
        return ARMS[self.arm]

    @property
    def tactile_in_state(self) -> bool:
        return self.arm_spec.tactile_in_state

    def reward_params(self) -> RewardParams:
        over = dict(self.reward)
        if not self.arm_spec.intrinsic:
            over.update(w_ext=1.0, w_int=0.0)
        try:
            return RewardParams.for_task(self.task, **over)
        except TypeError as exc:
            raise ConfigError(f"reward: {exc}") from None

    def physics_config(self) -> PhysicsConfig:
        base = default_physics(self.task).to_dict()
        unknown = set(self.physics) - set(base)
        if unknown:
            raise ConfigError(f"physics: unknown fields {sorted(unknown)}")
        base.update(self.physics)
        return PhysicsConfig.from_dict(base)

    def ddpg_hyper(self) -> DdpgHyper:
        d = dict(self.ddpg)
        d["max_reward"] = self.reward_params().max_reward
        try:
            return DdpgHyper.from_dict(d)
        except TypeError as exc:
            raise ConfigError(f"ddpg: {exc}") from None

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    def resolved(self) -> dict:
        """Fully expanded configuration, including every default."""
        d = self.to_dict()
        d["reward"] = self.reward_params().to_dict()
        d["physics"] = self.physics_config().to_dict()
        d["ddpg"] = self.ddpg_hyper().to_dict()
        return d

    def config_hash(self) -> str:
        d = self.resolved()
        d.pop("seed")
        blob = json.dumps(d, sort_keys=True, default=list).encode()
        return hashlib.sha256(blob).hexdigest()[:12]

    def run_name(self) -> str:
        return f"{self.task}-{self.difficulty}-{self.arm}-seed{self.seed}"

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown config fields: {sorted(unknown)}")
        return cls(**d)

    def replace(self, **kw) -> "ExperimentConfig":
        d = self.to_dict()
        d.update(kw)
        return ExperimentConfig.from_dict(d)


def load_document(path) -> dict:
    """Read a JSON or TOML document (chosen by file suffix)."""
    path = Path(path)
    text = path.read_text()
    if path.suffix.lower() == ".toml":
        try:
            import tomllib
        except ModuleNotFoundError:
            import tomli as tomllib
        return tomllib.loads(text)
    return json.loads(text)


def load_config(path) -> ExperimentConfig:
    return ExperimentConfig.from_dict(load_document(path))
