"""DDPG actor-critic on top of :class:`Mlp`, with observation/goal normalization."""
from __future__ import annotations

from dataclasses import asdict, dataclass, fields

import numpy as np

from ..errors import ConfigError, TrainingError, UsageError
from .mlp import OPTIMIZERS, Mlp, soft_update
from .normalizer import Normalizer


@dataclass
class DdpgHyper:
    gamma: float = 0.98
    tau: float = 0.05
    lr_actor: float = 1e-3
    lr_critic: float = 1e-3
    noise_sigma: float = 0.2
    random_eps: float = 0.3
    batch_size: int = 256
    # three layers as in common HER baselines, narrowed so a run fits a single CPU
    hidden: tuple = (64, 64, 64)
    action_l2: float = 1.0
    optimizer: str = "adam"
    norm_clip: float = 5.0
    # upper end of the TD-target clamp is max_reward / (1 - gamma)
    max_reward: float = 1.0

    def __post_init__(self):
        if not 0 < self.gamma < 1:
            raise ConfigError("gamma must lie in (0, 1)")
        if not 0 < self.tau <= 1:
            raise ConfigError("tau must lie in (0, 1]")
        if self.lr_actor <= 0 or self.lr_critic <= 0:
            raise ConfigError("learning rates must be positive")
        if self.batch_size < 1:
            raise ConfigError("batch_size must be positive")
        if self.optimizer not in OPTIMIZERS:
            raise ConfigError(f"unknown optimizer {self.optimizer!r}")
        self.hidden = tuple(self.hidden)

    @property
    def q_clip(self) -> tuple[float, float]:
        return 0.0, self.max_reward / (1.0 - self.gamma)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["hidden"] = list(self.hidden)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "DdpgHyper":
        unknown = set(d) - {f.name for f in fields(cls)}
        if unknown:
            raise ConfigError(f"unknown ddpg fields: {sorted(unknown)}")
        return cls(**d)


def actor_forward(mlp: Mlp, obs, goal):
    return mlp(np.concatenate([np.atleast_2d(obs), np.atleast_2d(goal)], axis=1))


def critic_forward(mlp: Mlp, obs, goal, action):
    x = np.concatenate([np.atleast_2d(obs), np.atleast_2d(goal), np.atleast_2d(action)], axis=1)
    return mlp(x)[:, 0]


def td_targets(reward, next_obs, goal, target_actor: Mlp, target_critic: Mlp, gamma, q_clip):
    """Clamped one-step Bellman targets on normalized inputs."""
    next_a = actor_forward(target_actor, next_obs, goal)
    q_next = critic_forward(target_critic, next_obs, goal, next_a)
    return np.clip(np.asarray(reward, dtype=float) + gamma * q_next, *q_clip)


def critic_loss_and_grads(critic: Mlp, obs, goal, action, y):
    x = np.concatenate([obs, goal, action], axis=1)
    q, cache = critic.forward(x)
    err = q[:, 0] - y
    loss = float(np.mean(err ** 2))
    dq = (2.0 / len(y)) * err[:, None]
    grads, _ = critic.backward(cache, dq)
    return loss, grads


def actor_objective_and_grads(actor: Mlp, critic: Mlp, obs, goal, action_l2):
    """Objective ``mean Q(s, g, pi(s, g)) - action_l2 * mean(z**2)`` and its ascent gradient.

    ``z`` is the actor's pre-tanh output.  Gradients are w.r.t. actor
    parameters only and point uphill.
    """
    xa = np.concatenate([obs, goal], axis=1)
    a, acache = actor.forward(xa)
    z = acache[1]
    xc = np.concatenate([obs, goal, a], axis=1)
    q, ccache = critic.forward(xc)
    n = len(q)
    objective = float(np.mean(q) - action_l2 * np.mean(z ** 2))
    _, dx = critic.backward(ccache, np.full((n, 1), 1.0 / n))
    da = dx[:, -a.shape[1]:]
    dz = da * (1.0 - a ** 2) - action_l2 * 2.0 * z / z.size
    grads, _ = actor.backward(acache, dz)
    return objective, grads


class DdpgAgent:
    def __init__(self, obs_dim, goal_dim, action_dim, hyper: DdpgHyper | None = None, rng=None):
        self.hyper = hyper if hyper is not None else DdpgHyper()
        rng = np.random.default_rng(0) if rng is None else rng
        h = list(self.hyper.hidden)
        self.dims = (obs_dim, goal_dim, action_dim)
        self.actor = Mlp([obs_dim + goal_dim, *h, action_dim], "tanh", rng)
        self.critic = Mlp([obs_dim + goal_dim + action_dim, *h, 1], "identity", rng)
        self.actor_target = self.actor.copy()
        self.critic_target = self.critic.copy()
        opt = OPTIMIZERS[self.hyper.optimizer]
        self.actor_opt = opt(self.actor.params, self.hyper.lr_actor)
        self.critic_opt = opt(self.critic.params, self.hyper.lr_critic)
        self.o_norm = Normalizer(obs_dim, self.hyper.norm_clip)
        self.g_norm = Normalizer(goal_dim, self.hyper.norm_clip)

    def _check(self, obs, goal):
        obs = np.atleast_2d(np.asarray(obs, dtype=float))
        goal = np.atleast_2d(np.asarray(goal, dtype=float))
        if obs.shape[1] != self.dims[0] or goal.shape[1] != self.dims[1]:
            raise UsageError(f"expected obs/goal widths {self.dims[:2]}, got {obs.shape[1]}/{goal.shape[1]}")
        return obs, goal

    def act(self, obs, goal):
        """Greedy action for a single (obs, goal) pair."""
        obs, goal = self._check(obs, goal)
        return actor_forward(self.actor, self.o_norm.normalize(obs), self.g_norm.normalize(goal))[0]

    def explore_action(self, obs, goal, rng):
        hp = self.hyper
        if rng.random() < hp.random_eps:
            return rng.uniform(-1.0, 1.0, size=self.dims[2])
        a = self.act(obs, goal)
        if hp.noise_sigma > 0:
            a = a + hp.noise_sigma * rng.standard_normal(self.dims[2])
        return np.clip(a, -1.0, 1.0)

    def update_normalizers(self, obs, goals):
        self.o_norm.update(obs)
        self.g_norm.update(goals)

    def _normalized(self, batch):
        o = self.o_norm.normalize(batch.obs)
        o2 = self.o_norm.normalize(batch.next_obs)
        g = self.g_norm.normalize(batch.goal)
        return o, o2, g

    def td_targets(self, batch):
        o, o2, g = self._normalized(batch)
        return td_targets(batch.reward, o2, g, self.actor_target, self.critic_target,
                          self.hyper.gamma, self.hyper.q_clip)

    def critic_update(self, batch, y=None) -> float:
        o, _, g = self._normalized(batch)
        if y is None:
            y = self.td_targets(batch)
        loss, grads = critic_loss_and_grads(self.critic, o, g, np.asarray(batch.action), y)
        if not np.isfinite(loss):
            raise TrainingError(f"non-finite critic loss {loss}")
        self.critic_opt.step(grads)
        return loss

    def actor_update(self, batch) -> float:
        o, _, g = self._normalized(batch)
        obj, grads = actor_objective_and_grads(self.actor, self.critic, o, g, self.hyper.action_l2)
        if not np.isfinite(obj):
            raise TrainingError(f"non-finite actor objective {obj}")
        # optimizers descend, the objective is ascended
        self.actor_opt.step([-gr for gr in grads])
        return obj

    def update(self, batch) -> tuple[float, float]:
        y = self.td_targets(batch)
        closs = self.critic_update(batch, y)
        aobj = self.actor_update(batch)
        soft_update(self.actor_target, self.actor, self.hyper.tau)
        soft_update(self.critic_target, self.critic, self.hyper.tau)
        return closs, aobj

    def named_arrays(self) -> dict:
        out = {}
        for name, net in (("actor", self.actor), ("critic", self.critic),
                          ("actor_target", self.actor_target), ("critic_target", self.critic_target)):
            for i, (w, b) in enumerate(zip(net.weights, net.biases)):
                out[f"{name}.W{i}"] = w
                out[f"{name}.b{i}"] = b
        for name, norm in (("o_norm", self.o_norm), ("g_norm", self.g_norm)):
            for k, v in norm.state().items():
                out[f"{name}.{k}"] = v
        return out
