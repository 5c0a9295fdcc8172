import csv
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fqdrl.envs import (
    CartPoleEnv,
    SlicingConfig,
    SlicingEnv,
    allocation_table,
    cartpole_accelerations,
    cartpole_reset,
    cartpole_step,
    n_allocations,
    observe,
    record_trajectory,
    slice_reset,
    slice_step,
    write_trace,
)
from fqdrl.errors import ConfigurationError, UsageError

import oracles


def test_cartpole_reset_reproducible_and_bounded():
    a = cartpole_reset(np.random.default_rng(3))
    assert np.array_equal(a, cartpole_reset(np.random.default_rng(3)))
    assert not np.array_equal(a, cartpole_reset(np.random.default_rng(4)))
    rng = np.random.default_rng(0)
    states = np.array([cartpole_reset(rng) for _ in range(1000)])
    assert np.all(np.abs(states) < 0.05)


def test_cartpole_origin_accelerations_by_hand():
    # at rest upright the pole term vanishes: phi_acc = -(F/M) / (l (4/3 - m/M))
    total = 1.1
    phi_acc_expected = -(10.0 / total) / (0.5 * (4 / 3 - 0.1 / total))
    x_acc_expected = 10.0 / total - 0.1 * 0.5 * phi_acc_expected / total
    x_acc, phi_acc = cartpole_accelerations(np.zeros(4), 1)
    assert phi_acc < 0
    assert phi_acc == pytest.approx(phi_acc_expected, rel=1e-14)
    assert x_acc == pytest.approx(x_acc_expected, rel=1e-14)
    assert phi_acc == pytest.approx(-14.634146341463415, rel=1e-12)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(-0.5, 0.5), min_size=4, max_size=4), st.integers(0, 1))
def test_cartpole_mirror_symmetry(state, action):
    s = np.array(state)
    a, _, _ = cartpole_step(s, action)
    b, _, _ = cartpole_step(-s, 1 - action)
    assert np.allclose(a, -b, atol=1e-15, rtol=0)


def test_cartpole_matches_oracle_dynamics():
    rng = np.random.default_rng(5)
    for _ in range(1000):
        s = rng.uniform([-2.4, -3, -0.21, -3], [2.4, 3, 0.21, 3])
        a = int(rng.integers(2))
        got, r, done = cartpole_step(s, a)
        ref, r_ref, done_ref = oracles.cartpole_step(s, a)
        assert np.max(np.abs(got - ref)) <= 1e-12
        assert (r, done) == (r_ref, done_ref)


def test_cartpole_terminates_on_bounds():
    _, _, done = cartpole_step(np.array([2.4, 1.0, 0.0, 0.0]), 1)
    assert done
    _, _, done = cartpole_step(np.array([0.0, 0.0, 0.2, 1.0]), 1)
    assert done


def test_cartpole_step_limit_gives_200():
    env = CartPoleEnv()
    s = env.reset(np.random.default_rng(0))
    total, done = 0.0, False
    # hold the pole up by pushing toward the lean; a simple controller survives 200 steps
    while not done:
        a = int(s[2] + 0.5 * s[3] > 0)
        s, r, done = env.step(a)
        total += r
    assert total == 200.0 and env.t == 200 and env.truncated


def test_step_after_done_is_usage_error():
    env = CartPoleEnv(max_episode_steps=1)
    env.reset(np.random.default_rng(0))
    env.step(0)
    with pytest.raises(UsageError):
        env.step(0)
    with pytest.raises(UsageError):
        CartPoleEnv().step(0)


def test_bad_action_is_usage_error():
    env = CartPoleEnv()
    env.reset(np.random.default_rng(0))
    with pytest.raises(UsageError):
        env.step(2)


def test_allocation_table_examples():
    assert allocation_table(10, 2, 5) == [(0, 10), (5, 5), (10, 0)]
    rows = allocation_table(10, 3, 5)
    assert len(rows) == 6 == n_allocations(10, 3, 5) == math.comb(4, 2)
    assert all(sum(r) == 10 for r in rows)
    assert rows == sorted(rows)
    with pytest.raises(ConfigurationError):
        allocation_table(10, 2, 3)


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 6), st.integers(2, 4), st.integers(1, 3))
def test_allocation_table_counts(units, n, g):
    rows = allocation_table(units * g, n, g)
    assert len(rows) == n_allocations(units * g, n, g)
    assert len(set(rows)) == len(rows)
    assert all(sum(r) == units * g and all(x % g == 0 for x in r) for r in rows)


def test_slicing_reset_observation():
    cfg = SlicingConfig(arrival_rate_ranges=[[2, 2], [6, 6]], max_arrival_rate=[12, 12])
    st_ = slice_reset(cfg, np.random.default_rng(0))
    assert np.array_equal(observe(cfg, st_), [0.0, 0.0, 2 / 12, 6 / 12])
    a = observe(cfg, slice_reset(SlicingConfig(), np.random.default_rng(9)))
    b = observe(cfg, slice_reset(SlicingConfig(), np.random.default_rng(9)))
    assert np.array_equal(a, b)


def test_empty_system_reward_zero():
    cfg = SlicingConfig()
    state = slice_reset(cfg, np.random.default_rng(0))
    for action in range(3):
        _, reward, _, _ = slice_step(cfg, state, action, arrivals=[0, 0])
        assert reward == 0.0


def test_balanced_arrivals_keep_queues_empty():
    cfg = SlicingConfig(service_rate=[1, 1])
    state = slice_reset(cfg, np.random.default_rng(0))
    for _ in range(50):
        state, reward, _, info = slice_step(cfg, state, 1, arrivals=[3, 3])
        assert info.alloc == (5, 5)
        assert reward == 0.0 and not state.queues.any()


def test_starved_slice_grows_then_drops():
    cfg = SlicingConfig(q_max=20, drop_penalty=0.5)
    state = slice_reset(cfg, np.random.default_rng(0))
    q2, drops_seen = 0.0, 0.0
    for _ in range(12):
        state, reward, _, info = slice_step(cfg, state, 2, arrivals=[1, 3])
        expected_q = min(q2 + 3, 20)
        expected_drop = q2 + 3 - expected_q
        assert state.queues[1] == expected_q and info.drops[1] == expected_drop
        assert state.queues[0] == 0
        assert reward == pytest.approx(-0.5 * expected_q / 20 - 0.5 * expected_drop)
        q2 = expected_q
        drops_seen += expected_drop
    assert drops_seen == 12 * 3 - 20
    assert state.total_drops == drops_seen


def test_slice_step_errors():
    cfg = SlicingConfig()
    state = slice_reset(cfg, np.random.default_rng(0))
    with pytest.raises(UsageError):
        slice_step(cfg, state, 3, np.random.default_rng(0))
    with pytest.raises(UsageError):
        slice_step(cfg, state, 0)


@pytest.mark.parametrize(
    "kwargs, field",
    [
        ({"n_slices": 1, "service_rate": [1], "slice_weights": [1], "arrival_rate_ranges": [[1, 2]]}, "n_slices"),
        ({"prb_budget": 0}, "prb_budget"),
        ({"granularity": 3}, "granularity"),
        ({"service_rate": [1, -1]}, "service_rate"),
        ({"arrival_rate_ranges": [[5, 1], [1, 2]]}, "arrival_rate_ranges[0]"),
        ({"slice_weights": [1.0]}, "slice_weights"),
    ],
)
def test_slicing_config_errors_name_field(kwargs, field):
    with pytest.raises(ConfigurationError, match=field.replace("[", r"\[").replace("]", r"\]")):
        SlicingEnv(SlicingConfig(**kwargs))


def test_slicing_conservation_over_10000_steps():
    cfg = SlicingConfig(n_slices=3, prb_budget=12, granularity=3, service_rate=[1, 2, 3],
                        slice_weights=[0.2, 0.3, 0.5], arrival_rate_ranges=[[0, 15], [0, 15], [0, 15]])
    env = SlicingEnv(cfg)
    rng = np.random.default_rng(1)
    obs = env.reset(np.random.default_rng(2))
    for _ in range(10_000):
        if env.done:
            obs = env.reset(rng)
        obs, _, _ = env.step(int(rng.integers(env.n_actions)))
        info = env.last_info
        assert sum(info.alloc) == cfg.prb_budget
        assert np.all(env.state.queues >= 0)
        assert np.array_equal(info.arrivals, info.served + info.queue_delta + info.drops)
        assert np.all((obs >= 0) & (obs <= 1))


def test_slicing_episode_ends_at_step_limit_only():
    env = SlicingEnv(SlicingConfig(max_episode_steps=7))
    env.reset(np.random.default_rng(0))
    dones = [env.step(0)[2] for _ in range(7)]
    assert dones == [False] * 6 + [True] and env.truncated


@pytest.mark.parametrize("make", [CartPoleEnv, SlicingEnv])
def test_same_seed_same_trajectory(make):
    actions = np.random.default_rng(0).integers(0, 2, 100).tolist()
    a = record_trajectory(make(), np.random.default_rng(42), actions)
    b = record_trajectory(make(), np.random.default_rng(42), actions)
    assert len(a) == len(b)
    for ra, rb in zip(a, b):
        assert ra[0] == rb[0] and ra[2:] == rb[2:]
        assert ra[1].tobytes() == rb[1].tobytes()


def test_write_trace(tmp_path):
    rows = record_trajectory(CartPoleEnv(), np.random.default_rng(1), [0, 1, 0])
    write_trace(tmp_path / "t.csv", rows, 4)
    with open(tmp_path / "t.csv") as fh:
        data = list(csv.reader(fh))
    assert data[0] == ["step", "s0", "s1", "s2", "s3", "action", "reward", "done"]
    assert len(data) == 4
    assert float(data[1][1]) == rows[0][1][0]
