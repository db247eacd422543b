"""Product construction and rollouts on labeled contextual MDPs."""

import numpy as np
import pytest

from rmsprl.cmdp import (
    BoxContextSpace,
    LabeledCMDP,
    ProductState,
    discounted_return,
    product_initial,
    product_step,
    rollout,
)
from rmsprl.envs import DOWN, LEFT, RIGHT, UP, TwoDoorEnv, builtin_machine
from rmsprl.reward_machine import parse_rm, rm_run


@pytest.fixture(scope="module")
def two_door_rm():
    return builtin_machine("two_door_8")


class TwoPointStartEnv(LabeledCMDP):
    """Single cell, two possible start states, no events; used to exercise
    stochastic initial distributions."""

    name = "two_point"

    def __init__(self, p0=0.3):
        self.p0 = p0

    @property
    def context_space(self):
        return BoxContextSpace(((-1.0, 1.0),))

    @property
    def n_actions(self):
        return 1

    @property
    def horizon(self):
        return 1

    @property
    def gamma(self):
        return 0.9

    def states(self):
        return [0, 1]

    def initial_support(self, c):
        return [(0, self.p0), (1, 1.0 - self.p0)]

    def transition_support(self, c, s, a):
        return [(s, 1.0)]

    def label(self, c, s, a, s_next):
        return frozenset()


# ---------------------------------------------------------------------------
# product initial / step
# ---------------------------------------------------------------------------


def test_initial_state_of_full_scale_grid(two_door_rm):
    env = TwoDoorEnv(size=40)
    rng = np.random.default_rng(0)
    for c in [(0.0, 0.0), (-4.0, 4.0), (2.0, 2.0)]:
        s = product_initial(env, two_door_rm, c, rng)
        assert s == ProductState((0, 20), "q0")


def test_initial_machine_state_always_initial(two_door_rm):
    env = TwoPointStartEnv()
    rng = np.random.default_rng(1)
    for _ in range(20):
        assert product_initial(env, two_door_rm, (0.0,), rng).rm_state == "q0"


def test_two_point_initial_frequencies_within_3_sigma():
    env = TwoPointStartEnv(p0=0.3)
    rm = parse_rm("alphabet: x\nstate q0 initial\nedge q0 -> q0 on true reward 0\n")
    rng = np.random.default_rng(2)
    n = 10_000
    hits = sum(
        product_initial(env, rm, (0.0,), rng).env_state == 0 for _ in range(n)
    )
    sigma = np.sqrt(0.3 * 0.7 / n)  # binomial bound
    assert abs(hits / n - 0.3) < 3 * sigma


def test_step_through_first_door(two_door_rm):
    env = TwoDoorEnv(size=8)
    c = (0.0, 0.0)
    col = env.door_columns(c)[0]
    below = (env.wall_rows[0] + 1, col)
    state = ProductState(below, "q0")
    next_state, reward, label = product_step(
        env, two_door_rm, c, state, UP, np.random.default_rng(0)
    )
    assert next_state == ProductState((env.wall_rows[0], col), "q1")
    assert reward == 1.0
    assert label == frozenset(("d1",))


def test_interior_step_keeps_machine_state(two_door_rm):
    env = TwoDoorEnv(size=8)
    state = ProductState((0, 4), "q0")
    next_state, reward, label = product_step(
        env, two_door_rm, (0.0, 0.0), state, RIGHT, np.random.default_rng(0)
    )
    assert next_state == ProductState((0, 5), "q0")
    assert reward == 0.0
    assert label == frozenset()


def test_wall_step_from_q2_fails(two_door_rm):
    env = TwoDoorEnv(size=8)
    c = (0.0, 0.0)
    wall_col = (env.door_columns(c)[0] + 2) % env.size
    above = (env.wall_rows[0] - 1, wall_col)
    state = ProductState(above, "q2")
    next_state, reward, _ = product_step(
        env, two_door_rm, c, state, DOWN, np.random.default_rng(0)
    )
    assert next_state.rm_state == "q5"
    assert reward == 0.0


# ---------------------------------------------------------------------------
# rollout
# ---------------------------------------------------------------------------


def wall_walker(state, c, rng):
    return DOWN


def scripted_policy(actions):
    it = {"t": 0}

    def act(state, c, rng):
        a = actions[it["t"]]
        it["t"] += 1
        return a

    return act


# context (0, 0) on the reduced grid puts both doors at column 4; the path
# below crosses door 1, detours to the box at (4, 3), then crosses door 2
# and reaches the goal at (7, 4)
ALIGNED_CONTEXT = (0.0, 0.0)
ALIGNED_PATH = [DOWN, DOWN, DOWN, LEFT, DOWN, RIGHT, DOWN, DOWN, DOWN]


def test_wall_walker_dies_without_positive_reward(two_door_rm):
    env = TwoDoorEnv(size=8)
    c = (-4.0, -4.0)  # doors at column 0, start column 4: straight down hits wall
    traj = rollout(env, two_door_rm, c, wall_walker, np.random.default_rng(0))
    assert traj.terminated
    assert traj.final_state.rm_state == "q5"
    assert len(traj.steps) == env.wall_rows[0]
    assert all(s.reward == 0.0 for s in traj.steps)


def test_zero_horizon_gives_empty_trajectory(two_door_rm):
    env = TwoDoorEnv(size=8)
    traj = rollout(
        env, two_door_rm, (0.0, 0.0), wall_walker, np.random.default_rng(0), horizon=0
    )
    assert traj.steps == []
    assert not traj.terminated


def test_scripted_optimal_path_collects_rewards_in_order(two_door_rm):
    env = TwoDoorEnv(size=8)
    traj = rollout(
        env,
        two_door_rm,
        ALIGNED_CONTEXT,
        scripted_policy(ALIGNED_PATH),
        np.random.default_rng(0),
    )
    positives = [s.reward for s in traj.steps if s.reward > 0]
    assert positives == [1.0, 2.0, 3.0, 4.0]
    assert traj.final_state.rm_state == "q4"
    assert traj.terminated


def test_trajectory_states_chain(two_door_rm):
    env = TwoDoorEnv(size=8)
    rng = np.random.default_rng(3)
    traj = rollout(
        env,
        two_door_rm,
        (1.0, -1.0),
        lambda s, c, r: int(r.integers(4)),
        rng,
    )
    for a, b in zip(traj.steps, traj.steps[1:]):
        assert a.next_state == b.state


# ---------------------------------------------------------------------------
# discounted return
# ---------------------------------------------------------------------------


def test_return_zero_for_zero_rewards(two_door_rm):
    env = TwoDoorEnv(size=8)
    traj = rollout(env, two_door_rm, (-4.0, -4.0), wall_walker, np.random.default_rng(0))
    assert discounted_return(traj, 0.95) == 0.0


def test_return_single_reward_discounted(two_door_rm):
    env = TwoDoorEnv(size=8)
    traj = rollout(
        env,
        two_door_rm,
        ALIGNED_CONTEXT,
        scripted_policy(ALIGNED_PATH),
        np.random.default_rng(0),
    )
    # keep only the final reward (4 at step index 8): 4 * 0.95^8
    for i, s in enumerate(traj.steps[:-1]):
        traj.steps[i] = s._replace(reward=0.0)
    assert discounted_return(traj, 0.95) == pytest.approx(4 * 0.95**8, abs=1e-12)


def test_single_reward_at_t3_value():
    # 4 * 0.95^3 = 3.42950 by direct arithmetic
    assert 4 * 0.95**3 == pytest.approx(3.4295, abs=1e-10)


def test_return_matches_machine_replay(two_door_rm):
    env = TwoDoorEnv(size=8)
    traj = rollout(
        env,
        two_door_rm,
        ALIGNED_CONTEXT,
        scripted_policy(ALIGNED_PATH),
        np.random.default_rng(0),
    )
    replayed = rm_run(two_door_rm, traj.labels)
    expected = sum(r * 0.95**t for t, r in enumerate(replayed))
    assert discounted_return(traj, 0.95) == pytest.approx(expected, abs=1e-12)


# ---------------------------------------------------------------------------
# invariants
# ---------------------------------------------------------------------------


def random_policy(state, c, rng):
    return int(rng.integers(4))


def test_reward_sequence_equals_machine_run(two_door_rm):
    env = TwoDoorEnv(size=8)
    space = env.context_space
    rng = np.random.default_rng(4)
    for i in range(300):
        c = space.clip(rng.uniform(space.lows, space.highs))
        traj = rollout(env, two_door_rm, c, random_policy, np.random.default_rng([5, i]))
        assert traj.rewards == rm_run(two_door_rm, traj.labels)


def test_projection_to_flat_trajectory(two_door_rm):
    env = TwoDoorEnv(size=8)
    rng = np.random.default_rng(6)
    for i in range(50):
        c = env.context_space.clip(rng.uniform(-4, 4, 2))
        traj = rollout(env, two_door_rm, c, random_policy, np.random.default_rng([7, i]))
        # replaying the recorded actions on the raw environment must give the
        # same environment-state sequence (same seed, same dynamics)
        s = env.start
        for step in traj.steps:
            assert step.state.env_state == s
            s = env._move(s, step.action)
            assert step.next_state.env_state == s


def test_rollout_deterministic_given_seed(two_door_rm):
    env = TwoDoorEnv(size=8)
    c = (0.7, -2.1)
    t1 = rollout(env, two_door_rm, c, random_policy, np.random.default_rng([8, 0]))
    t2 = rollout(env, two_door_rm, c, random_policy, np.random.default_rng([8, 0]))
    assert t1.steps == t2.steps
    assert t1.labels == t2.labels
    assert t1.terminated == t2.terminated


def test_context_space_validation():
    with pytest.raises(ValueError):
        BoxContextSpace(((1.0, 1.0),))
    space = BoxContextSpace(((-1.0, 1.0), (0.0, 2.0)))
    assert space.contains((0.0, 1.0))
    assert not space.contains((0.0, 3.0))
    assert space.clip((5.0, -5.0)) == (1.0, 0.0)
