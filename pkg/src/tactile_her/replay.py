"""Episode replay buffer and the four minibatch samplers.

Every sampler draws an episode ``e``, a training step ``t`` and a virtual-goal
step ``t' >= t``.  With probability ``hindsight_prob`` the goal of transition
``(e, t)`` is replaced by the object position reached after step ``t'`` and its
reward is recomputed; otherwise the stored goal and reward are kept.

Contact prioritization weights step ``(e, t)`` by ``lam`` once the cumulative
force after that step exceeds ``eps_force`` (the same predicate that pays the
intrinsic reward) and by 1 before.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DataError, UsageError
from .envs.core import dump_trajectory
from .reward import RewardParams, combined_reward, contact_reached

DEFAULT_LAMBDA = 10.0
DEFAULT_HINDSIGHT_PROB = 0.8

_FIELDS = ("obs", "goal", "action", "reward", "next_obs", "achieved_next", "force_sum_next")


@dataclass
class Transition:
    obs: np.ndarray
    goal: np.ndarray
    action: np.ndarray
    reward: float
    next_obs: np.ndarray
    achieved_next: np.ndarray
    force_sum_next: float


@dataclass
class Episode:
    """Fixed-horizon rollout stored column-wise; row ``t`` is transition ``t``."""

    obs: np.ndarray
    goal: np.ndarray
    action: np.ndarray
    reward: np.ndarray
    next_obs: np.ndarray
    achieved_next: np.ndarray
    force_sum_next: np.ndarray
    failed: bool = False
    id: int = -1
    t_force: int | None = None

    def __len__(self):
        return len(self.reward)

    @classmethod
    def from_transitions(cls, transitions, failed=False) -> "Episode":
        cols = {k: np.array([getattr(tr, k) for tr in transitions], dtype=float) for k in _FIELDS}
        return cls(**cols, failed=failed)

    @property
    def transitions(self) -> list:
        return [Transition(*(getattr(self, k)[t] for k in _FIELDS)) for t in range(len(self))]


@dataclass
class MiniBatchItem:
    obs: np.ndarray
    goal: np.ndarray
    action: np.ndarray
    reward: float
    next_obs: np.ndarray
    achieved_next: np.ndarray
    force_sum_next: float
    hindsight: bool
    episode: int
    t: int
    t_virtual: int


@dataclass
class Batch:
    """Column-wise minibatch.  ``episode`` is the stored-episode index, oldest first."""

    obs: np.ndarray
    goal: np.ndarray
    action: np.ndarray
    reward: np.ndarray
    next_obs: np.ndarray
    achieved_next: np.ndarray
    force_sum_next: np.ndarray
    hindsight: np.ndarray
    episode: np.ndarray
    t: np.ndarray
    t_virtual: np.ndarray

    def __len__(self):
        return len(self.reward)

    def items(self) -> list:
        names = MiniBatchItem.__dataclass_fields__
        return [MiniBatchItem(**{k: getattr(self, k)[i] for k in names}) for i in range(len(self))]


def first_contact(force_sum, eps_force) -> int | None:
    hits = np.flatnonzero(contact_reached(force_sum, eps_force))
    return int(hits[0]) if hits.size else None


@dataclass
class EpisodeBuffer:
    capacity: int
    horizon: int
    reward_params: RewardParams = field(default_factory=RewardParams)
    lam: float = DEFAULT_LAMBDA

    def __post_init__(self):
        if self.capacity < 1:
            raise UsageError("capacity must be positive")
        self._store = None
        self._order: list[int] = []   # slots, oldest first
        self._ids = np.full(self.capacity, -1, dtype=np.int64)
        self._t_force = np.full(self.capacity, -1, dtype=np.int64)
        self._next_id = 0

    @property
    def eps_force(self) -> float:
        return self.reward_params.eps_force

    def __len__(self):
        return len(self._order)

    @property
    def ids(self) -> list:
        return [int(self._ids[s]) for s in self._order]

    def push_episode(self, episode: Episode) -> int:
        if len(episode) != self.horizon:
            raise DataError(f"episode length {len(episode)} != horizon {self.horizon}")
        if self._store is None:
            self._store = {
                k: np.zeros((self.capacity,) + np.shape(getattr(episode, k)), dtype=float)
                for k in _FIELDS
            }
        if len(self._order) < self.capacity:
            slot = len(self._order)
        else:
            slot = self._order.pop(0)
        self._order.append(slot)
        for k in _FIELDS:
            self._store[k][slot] = getattr(episode, k)
        episode.id = self._next_id
        episode.t_force = first_contact(episode.force_sum_next, self.eps_force)
        self._ids[slot] = self._next_id
        self._t_force[slot] = -1 if episode.t_force is None else episode.t_force
        self._next_id += 1
        return episode.id

    def episode(self, i: int) -> Episode:
        """The ``i``-th stored episode, oldest first."""
        slot = self._order[i]
        tf = int(self._t_force[slot])
        return Episode(**{k: self._store[k][slot].copy() for k in _FIELDS},
                       id=int(self._ids[slot]), t_force=None if tf < 0 else tf)

    def column(self, name: str) -> np.ndarray:
        """Stored field for all episodes, oldest first, shape (n, T, ...)."""
        self._require()
        return self._store[name][self._order]

    def t_forces(self) -> np.ndarray:
        """Cached contact onsets, oldest first; -1 where the threshold was never crossed."""
        return self._t_force[self._order]

    def _require(self):
        if not self._order:
            raise UsageError("replay buffer is empty")

    def dump(self, path) -> None:
        recs = []
        for i in range(len(self)):
            ep = self.episode(i)
            for t, tr in enumerate(ep.transitions):
                recs.append({"episode": ep.id, "t": t, **vars(tr)})
        dump_trajectory(path, recs)


def transition_weights(buffer: EpisodeBuffer) -> np.ndarray:
    """Unnormalized contact weights, shape (n_episodes, T)."""
    buffer._require()
    tf = buffer.t_forces()
    steps = np.arange(buffer.horizon)
    after = (tf[:, None] >= 0) & (steps[None, :] >= tf[:, None])
    return np.where(after, buffer.lam, 1.0)


def transition_probs(buffer: EpisodeBuffer) -> np.ndarray:
    w = transition_weights(buffer)
    return w / w.sum()


def episode_marginal(weights: np.ndarray) -> np.ndarray:
    w = np.asarray(weights, dtype=float)
    per_episode = w.sum(axis=1)
    return per_episode / per_episode.sum()


def _draw_rows(weights, rows, rng):
    """One column index per entry of ``rows``, drawn proportional to ``weights[row]``."""
    cum = np.cumsum(weights, axis=1)[rows]
    u = rng.random(len(rows)) * cum[:, -1]
    idx = (cum <= u[:, None]).sum(axis=1)
    return np.minimum(idx, weights.shape[1] - 1)


def _backward(t_virtual, rng):
    return np.floor(rng.random(len(t_virtual)) * (t_virtual + 1)).astype(np.int64)


def _forward(t, horizon, rng):
    return t + np.floor(rng.random(len(t)) * (horizon - t)).astype(np.int64)


def _assemble(buffer, e, t, tv, hindsight) -> Batch:
    slots = np.asarray(buffer._order)[e]
    store = buffer._store
    cols = {k: store[k][slots, t] for k in _FIELDS}
    goal = cols["goal"]
    reward = cols["reward"]
    if hindsight.any():
        virtual = store["achieved_next"][slots[hindsight], tv[hindsight]]
        goal[hindsight] = virtual
        reward[hindsight] = combined_reward(
            cols["achieved_next"][hindsight], virtual,
            cols["force_sum_next"][hindsight], buffer.reward_params,
        )
    cols.update(goal=goal, reward=reward)
    return Batch(**cols, hindsight=hindsight, episode=e, t=t, t_virtual=tv)


def sample_cper(buffer: EpisodeBuffer, batch_size: int,
                hindsight_prob: float = DEFAULT_HINDSIGHT_PROB, rng=None) -> Batch:
    """Contact-prioritized replay: episode by marginal, virtual goal by weight, then backward."""
    rng = np.random.default_rng() if rng is None else rng
    w = transition_weights(buffer)
    p_ep = episode_marginal(w)
    e = rng.choice(len(p_ep), size=batch_size, p=p_ep)
    tv = _draw_rows(w, e, rng)
    t = _backward(tv, rng)
    h = rng.random(batch_size) < hindsight_prob
    return _assemble(buffer, e, t, tv, h)


def sample_uniform_her(buffer: EpisodeBuffer, batch_size: int,
                       hindsight_prob: float = DEFAULT_HINDSIGHT_PROB, rng=None) -> Batch:
    """HER "future" strategy with uniform episodes and steps."""
    rng = np.random.default_rng() if rng is None else rng
    buffer._require()
    T = buffer.horizon
    e = rng.integers(len(buffer), size=batch_size)
    t = rng.integers(T, size=batch_size)
    tv = _forward(t, T, rng)
    h = rng.random(batch_size) < hindsight_prob
    return _assemble(buffer, e, t, tv, h)


def sample_episode_ablation(buffer: EpisodeBuffer, batch_size: int,
                            hindsight_prob: float = DEFAULT_HINDSIGHT_PROB, rng=None) -> Batch:
    """Contact-prioritized episodes, uniform virtual-goal step, backward training step."""
    rng = np.random.default_rng() if rng is None else rng
    p_ep = episode_marginal(transition_weights(buffer))
    e = rng.choice(len(p_ep), size=batch_size, p=p_ep)
    tv = rng.integers(buffer.horizon, size=batch_size)
    t = _backward(tv, rng)
    h = rng.random(batch_size) < hindsight_prob
    return _assemble(buffer, e, t, tv, h)


def reward_episode_weights(buffer: EpisodeBuffer) -> np.ndarray:
    buffer._require()
    return 1.0 + buffer.column("reward").sum(axis=1)


def sample_reward_prioritized(buffer: EpisodeBuffer, batch_size: int,
                              hindsight_prob: float = DEFAULT_HINDSIGHT_PROB, rng=None) -> Batch:
    """Episodes weighted by 1 + stored return; steps as in uniform HER."""
    rng = np.random.default_rng() if rng is None else rng
    w = reward_episode_weights(buffer)
    T = buffer.horizon
    e = rng.choice(len(w), size=batch_size, p=w / w.sum())
    t = rng.integers(T, size=batch_size)
    tv = _forward(t, T, rng)
    h = rng.random(batch_size) < hindsight_prob
    return _assemble(buffer, e, t, tv, h)


SAMPLERS = {
    "uniform": sample_uniform_her,
    "cper": sample_cper,
    "episode": sample_episode_ablation,
    "reward": sample_reward_prioritized,
}
