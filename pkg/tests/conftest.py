import numpy as np
import pytest

from tactile_her.replay import Episode, EpisodeBuffer
from tactile_her.reward import RewardParams, combined_reward


def make_episode(T, onset=None, eps_force=10.0, obs_dim=3, rng=None, params=None):
    """Synthetic episode whose cumulative force first exceeds ``eps_force`` after step ``onset``.

    Achieved goals walk along the x axis so every step has a distinct position.
    """
    rng = np.random.default_rng(0) if rng is None else rng
    params = params or RewardParams(eps_force=eps_force)
    fsum = np.zeros(T)
    if onset is not None:
        fsum[:onset] = np.linspace(0.0, eps_force * 0.9, onset) if onset else []
        fsum[onset:] = eps_force + 1.0 + np.arange(T - onset)
    achieved = np.stack([0.1 * np.arange(1, T + 1), np.zeros(T)], axis=1)
    goal = np.tile([5.0, 5.0], (T, 1))
    obs = rng.normal(size=(T, obs_dim))
    next_obs = rng.normal(size=(T, obs_dim))
    return Episode(
        obs=obs, goal=goal, action=rng.uniform(-1, 1, size=(T, 2)),
        reward=combined_reward(achieved, goal, fsum, params),
        next_obs=next_obs, achieved_next=achieved, force_sum_next=fsum,
    )


def make_buffer(onsets, T, lam=10.0, eps_force=10.0, params=None):
    params = params or RewardParams(eps_force=eps_force)
    buf = EpisodeBuffer(capacity=max(len(onsets), 1), horizon=T, reward_params=params, lam=lam)
    for i, onset in enumerate(onsets):
        buf.push_episode(make_episode(T, onset, eps_force, rng=np.random.default_rng(i), params=params))
    return buf


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# one line per acceptance criterion, echoed at the end of the session
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
