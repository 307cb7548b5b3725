"""Epoch loop: rollouts, replay sampling, DDPG updates and greedy evaluation."""
from __future__ import annotations

import csv
import json
import logging
import math
import time
from dataclasses import astuple, dataclass, fields
from pathlib import Path

import numpy as np

from .agent.checkpoint import save_agent
from .agent.ddpg import DdpgAgent
from .config import ExperimentConfig
from .envs.core import PlanarEnv, is_success
from .envs.tasks import make_env
from .errors import SimulationError, TrainingError
from .replay import SAMPLERS, Episode, EpisodeBuffer, first_contact
from .reward import RewardParams, combined_reward

log = logging.getLogger(__name__)

METRICS_HEADER = ("epoch", "train_success", "eval_success", "mean_reward", "onset_step", "seconds")


@dataclass
class MetricsRow:
    epoch: int
    train_success: float
    eval_success: float
    mean_reward: float
    # mean first-contact step over this epoch's episodes that crossed the threshold
    onset_step: float
    # simulated experience time so far; wall-clock goes to timing.csv
    seconds: float


def collect_episode(env: PlanarEnv, policy, reward_params: RewardParams, level: str, seed: int,
                    observe=lambda o: o) -> Episode:
    """Roll out one fixed-horizon episode.

    ``policy(agent_obs, goal)`` returns an action; ``observe`` maps the env
    observation to what the agent sees.  A physics blow-up freezes the rest of
    the episode at the last valid state and marks it failed.
    """
    obs, goal = env.reset(level, seed)
    T = env.horizon
    layout = env.layout
    rows = {k: [] for k in ("obs", "action", "next_obs")}
    failed = False
    for _ in range(T):
        if failed:
            a = np.zeros(env.action_dim)
            nxt = obs.copy()
            nxt[layout.force_now] = 0.0
        else:
            a = np.clip(np.asarray(policy(observe(obs), goal), dtype=float), -1.0, 1.0)
            try:
                nxt = env.step(a).next_obs
            except SimulationError:
                log.warning("simulation error in episode seed=%d; freezing", seed)
                failed = True
                nxt = obs.copy()
                nxt[layout.force_now] = 0.0
        rows["obs"].append(obs)
        rows["action"].append(a)
        rows["next_obs"].append(nxt)
        obs = nxt
    obs_arr = np.array(rows["obs"])
    next_arr = np.array(rows["next_obs"])
    achieved = next_arr[:, layout.object_pos]
    force_sum = next_arr[:, layout.force_sum]
    goals = np.repeat(goal[None, :], T, axis=0)
    return Episode(
        obs=obs_arr, goal=goals, action=np.array(rows["action"]),
        reward=combined_reward(achieved, goals, force_sum, reward_params),
        next_obs=next_arr, achieved_next=achieved, force_sum_next=force_sum, failed=failed,
    )


class Experiment:
    """All mutable state of one training run."""

    def __init__(self, config: ExperimentConfig):
        self.config = config
        self.reward_params = config.reward_params()
        self.env = make_env(config.task, config.physics_config(), config.horizon)
        layout = self.env.layout
        self.tactile = config.tactile_in_state
        obs_dim = layout.size if self.tactile else layout.size - 2
        ss = np.random.SeedSequence(config.seed)
        init_ss, explore_ss, sample_ss, episode_ss, eval_ss = ss.spawn(5)
        self.agent = DdpgAgent(obs_dim, self.env.goal_dim, self.env.action_dim,
                               config.ddpg_hyper(), np.random.default_rng(init_ss))
        self.explore_rng = np.random.default_rng(explore_ss)
        self.sample_rng = np.random.default_rng(sample_ss)
        self.episode_rng = np.random.default_rng(episode_ss)
        self.eval_rng = np.random.default_rng(eval_ss)
        self.buffer = EpisodeBuffer(config.buffer_capacity, config.horizon, self.reward_params, config.lam)
        self.sampler = SAMPLERS[config.arm_spec.sampler]
        self.epoch = 0
        self.episodes_seen = 0

    def observe(self, obs):
        return obs if self.tactile else obs[..., :-2]

    def _explore(self, obs, goal):
        return self.agent.explore_action(obs, goal, self.explore_rng)

    def _greedy(self, obs, goal):
        return self.agent.act(obs, goal)

    def _seed(self, rng) -> int:
        return int(rng.integers(2 ** 63))

    def train_episode(self) -> Episode:
        cfg = self.config
        ep = collect_episode(self.env, self._explore, self.reward_params, cfg.difficulty,
                             self._seed(self.episode_rng), self.observe)
        self.buffer.push_episode(ep)
        self.agent.update_normalizers(
            self.observe(np.concatenate([ep.obs, ep.next_obs[-1:]])),
            np.concatenate([ep.goal[:1], ep.achieved_next]),
        )
        self.episodes_seen += 1
        hp = self.agent.hyper
        for _ in range(cfg.optimizer_steps_per_episode):
            batch = self.sampler(self.buffer, hp.batch_size, cfg.hindsight_prob, self.sample_rng)
            batch.obs = self.observe(batch.obs)
            batch.next_obs = self.observe(batch.next_obs)
            self.agent.update(batch)
        return ep

    def evaluate(self, policy=None, n=None) -> float:
        """Greedy success rate; ``policy`` sees the full env observation when given."""
        cfg = self.config
        n = cfg.eval_episodes if n is None else n
        if policy is None:
            policy, observe = self._greedy, self.observe
        else:
            observe = lambda o: o  # noqa: E731
        wins = 0
        for _ in range(n):
            ep = collect_episode(self.env, policy, self.reward_params, cfg.difficulty,
                                 self._seed(self.eval_rng), observe)
            wins += bool(is_success(ep.achieved_next[-1], ep.goal[-1], self.reward_params.eps_pos))
        return wins / n

    def run_epoch(self, eval_policy=None) -> MetricsRow:
        cfg = self.config
        wins = 0
        returns = []
        onsets = []
        for _ in range(cfg.episodes_per_epoch):
            try:
                ep = self.train_episode()
            except TrainingError as exc:
                raise TrainingError(f"{exc} [run {cfg.run_name()}, epoch {self.epoch + 1}, "
                                    f"config {json.dumps(cfg.to_dict(), sort_keys=True)}]") from exc
            wins += bool(is_success(ep.achieved_next[-1], ep.goal[-1], self.reward_params.eps_pos))
            returns.append(ep.reward.sum())
            if ep.t_force is not None:
                onsets.append(ep.t_force)
        self.epoch += 1
        sim_seconds = self.episodes_seen * cfg.horizon * self.env.config.dt * self.env.config.substeps
        return MetricsRow(
            epoch=self.epoch,
            train_success=wins / cfg.episodes_per_epoch,
            eval_success=self.evaluate(eval_policy),
            mean_reward=float(np.mean(returns)),
            onset_step=float(np.mean(onsets)) if onsets else math.nan,
            seconds=round(sim_seconds, 6),
        )


def write_metrics(path, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(METRICS_HEADER)
        for r in rows:
            w.writerow([_fmt(v) for v in astuple(r)])


def _fmt(v):
    if isinstance(v, float):
        return repr(round(v, 10))
    return str(v)


def read_metrics(path) -> list:
    with open(path, newline="") as fh:
        rd = csv.DictReader(fh)
        return [MetricsRow(**{f.name: (int if f.name == "epoch" else float)(row[f.name])
                              for f in fields(MetricsRow)}) for row in rd]


def run_experiment(config: ExperimentConfig, out_dir=None, progress=None) -> list:
    """Train for ``config.epochs`` epochs and return the per-epoch metrics.

    With ``out_dir`` the metrics CSV is rewritten after every epoch, and the
    config snapshot, wall-clock timings and final checkpoint are stored there.
    """
    exp = Experiment(config)
    out = Path(out_dir) if out_dir is not None else None
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        (out / "config.json").write_text(json.dumps(
            {**config.resolved(), "config_hash": config.config_hash()}, indent=2, sort_keys=True, default=list) + "\n")
        write_metrics(out / "metrics.csv", [])
    rows = []
    timings = []
    start = time.perf_counter()
    for _ in range(config.epochs):
        row = exp.run_epoch()
        rows.append(row)
        timings.append((row.epoch, time.perf_counter() - start))
        if progress is not None:
            progress(row)
        log.info("%s epoch %d eval %.2f train %.2f", config.run_name(), row.epoch,
                 row.eval_success, row.train_success)
        if out is not None:
            write_metrics(out / "metrics.csv", rows)
            with open(out / "timing.csv", "w") as fh:
                fh.write("epoch,wall_seconds\n")
                fh.writelines(f"{e},{s:.3f}\n" for e, s in timings)
        if config.stop_success is not None and row.eval_success >= config.stop_success:
            break
    if out is not None:
        save_agent(exp.agent, out / "checkpoint", {"epochs_trained": exp.epoch, "run": config.run_name()})
    return rows


def epochs_to(rows, level: float, censor: int | None = None) -> int | None:
    """First epoch whose eval success reaches ``level``; ``censor`` if never."""
    for r in rows:
        if r.eval_success >= level:
            return r.epoch
    return censor
