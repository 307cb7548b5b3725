import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tactile_her.errors import ConfigError, DataError
from tactile_her.replay import Transition
from tactile_her.reward import (
    RewardParams, combined_reward, extrinsic_reward, intrinsic_reward, recompute_hindsight,
)

P = RewardParams()


def at_distance(d):
    return np.zeros(2), np.array([d, 0.0])


def test_defaults():
    assert (P.w_ext, P.w_int, P.eps_pos, P.eps_force) == (0.75, 0.25, 0.05, 10.0)
    assert RewardParams.for_task("Slide").eps_force == 3.0
    assert RewardParams.for_task("Lift").eps_force == 10.0


def test_extrinsic_boundaries():
    assert extrinsic_reward(*at_distance(0.0), P) == 1.0
    assert extrinsic_reward(*at_distance(0.05), P) == 0.0
    assert extrinsic_reward(*at_distance(0.9 * 0.05), P) == 1.0


def test_intrinsic_boundaries():
    assert intrinsic_reward(0.0, P) == 0.0
    assert intrinsic_reward(10.0, P) == 0.0
    assert intrinsic_reward(10.01, P) == 1.0


def test_combined_values():
    a, g = at_distance(0.0)
    assert combined_reward(a, g, 11.0, P) == 1.0
    a, g = at_distance(1.0)
    assert combined_reward(a, g, 11.0, P) == 0.25
    a, g = at_distance(0.0)
    assert combined_reward(a, g, 0.0, P) == 0.75


@given(d=st.floats(0, 1), f=st.floats(0, 100))
def test_no_intrinsic_weight_reduces_to_extrinsic(d, f):
    p = RewardParams(w_ext=1.0, w_int=0.0)
    a, g = at_distance(d)
    assert combined_reward(a, g, f, p) == extrinsic_reward(a, g, p)


@given(d1=st.floats(0, 0.2), d2=st.floats(0, 0.2), f=st.floats(0, 30))
def test_goal_substitution_changes_only_extrinsic_term(d1, d2, f):
    a = np.zeros(2)
    diff = combined_reward(a, np.array([d1, 0.0]), f, P) - combined_reward(a, np.array([0.0, d2]), f, P)
    assert diff in (-P.w_ext, 0.0, P.w_ext)
    assert 0.0 <= combined_reward(a, np.array([d1, 0.0]), f, P) <= P.max_reward


@given(st.lists(st.floats(0, 5), min_size=1, max_size=60))
def test_intrinsic_stays_on_once_triggered(increments):
    fsum = np.cumsum(increments)
    r = intrinsic_reward(fsum, P)
    assert np.all(np.diff(r) >= 0)


def test_batched_shapes():
    a = np.zeros((4, 2))
    g = np.array([[0, 0], [0.04, 0], [0.05, 0], [1, 1]], float)
    np.testing.assert_array_equal(combined_reward(a, g, np.array([0, 11, 11, 0.0]), P), [0.75, 1.0, 0.25, 0.0])


def transition(achieved, fsum, goal):
    return Transition(obs=np.zeros(3), goal=np.asarray(goal, float), action=np.zeros(2),
                      reward=float(combined_reward(np.asarray(achieved, float), np.asarray(goal, float), fsum, P)),
                      next_obs=np.zeros(3), achieved_next=np.asarray(achieved, float), force_sum_next=fsum)


def test_recompute_hindsight():
    tr = transition([0.3, 0.1], 12.0, [0.6, 0.0])
    assert recompute_hindsight(tr, tr.achieved_next, P) == 1.0
    assert recompute_hindsight(tr, np.array([2.0, 2.0]), P) == 0.25
    assert recompute_hindsight(tr, tr.goal, P) == tr.reward
    assert recompute_hindsight(vars(tr), tr.goal, P) == tr.reward


def test_recompute_requires_force_sum():
    with pytest.raises(DataError):
        recompute_hindsight({"achieved_next": np.zeros(2)}, np.zeros(2), P)


def test_param_validation():
    with pytest.raises(ConfigError):
        RewardParams(w_int=-0.1)
    with pytest.raises(ConfigError):
        RewardParams(eps_force=0.0)
    with pytest.raises(ConfigError):
        RewardParams.from_dict({"omega": 1})


# boundary grid shared with the acceptance suite
DELTA = 1e-6


@pytest.mark.parametrize("fsum, f_bit", [(0.0, 0), (10.0, 0), (10.0 + DELTA, 1)])
@pytest.mark.parametrize("dist, d_bit", [(0.0, 1), (0.05 - DELTA, 1), (0.05, 0)])
def test_boundary_grid(fsum, f_bit, dist, d_bit):
    a, g = at_distance(dist)
    assert combined_reward(a, g, fsum, P) == 0.75 * d_bit + 0.25 * f_bit
