"""End-to-end acceptance checks, one test per criterion.

Each test records a PASS/FAIL line that pytest prints in an "acceptance
criteria" section of the terminal summary. The learning-trend and
federation-benefit checks train full runs and take several minutes.
"""

import dataclasses
import itertools
import json
import os
import time

import numpy as np
import pytest

from fqdrl import pqc
from fqdrl.envs import SlicingConfig, SlicingEnv
from fqdrl.federation import FederationConfig, aggregate, run_round
from fqdrl.harness import build_agent, build_env, load_config, run_experiment
from fqdrl.harness.metrics import moving_average
from fqdrl.qdqn import MlpApproximator, mlp_backward, mlp_forward
from fqdrl.qsim import Gate, Observable, Program, StateVector, apply_circuit, expectation, zero_state

import oracles
from acceptance_report import record

CONFIGS = os.path.join(os.path.dirname(__file__), "..", "configs")
SEEDS = range(5)


def to_gates(circuit):
    return [Gate(k, t, a, c) for k, t, a, c in circuit]


def test_criterion_1_oracle_equivalence():
    t0 = time.perf_counter()
    worst = 0.0
    n_checked = 0
    for n in range(1, 5):
        rng = np.random.default_rng(1000 + n)
        subsets = [s for r in range(1, n + 1) for s in itertools.combinations(range(n), r)]
        for _ in range(100):
            circuit = oracles.random_gates(rng, n, int(rng.integers(1, 61)))
            ref = oracles.simulate(n, circuit)
            got = apply_circuit(zero_state(n), to_gates(circuit)).amplitudes
            angles = np.array([[a for _, _, a, _ in circuit if a is not None]])
            batched = Program.from_gates(to_gates(circuit), n).run(angles)[0]
            worst = max(worst, np.max(np.abs(got - ref)), np.max(np.abs(batched - ref)))
            sv = StateVector(n, got)
            for qs in subsets:
                worst = max(worst, abs(expectation(sv, Observable(qs)) - oracles.expval(n, ref, qs)))
            n_checked += 1
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-10 and elapsed < 10
    record(1, "quantum-core oracle equivalence", ok,
           f"{n_checked} circuits, max deviation {worst:.2e} (tol 1e-10), {elapsed:.2f}s (limit 10s)")
    assert ok


def test_criterion_2_gradient_correctness():
    t0 = time.perf_counter()
    rng = np.random.default_rng(2)
    arch = pqc.PqcArchitecture.default(4, 2, 3, 5)
    pqc_fail = 0
    n_components = 0
    for _ in range(20):
        params = pqc.PqcParameters(
            rng.uniform(-np.pi, np.pi, (5, 3, 2)), rng.normal(size=(5, 4)), rng.normal(size=2)
        )
        s, up = rng.normal(size=4) * 2, rng.normal(size=2)
        g = pqc.flatten(pqc.gradients(arch, params, s, up, "parameter_shift"))

        def f(vec):
            return float(up @ pqc.q_values(arch, pqc.unflatten(arch, vec), s).q)

        fd = oracles.central_difference(f, pqc.flatten(params), 1e-4)
        pqc_fail += int(np.sum(np.abs(g - fd) > np.maximum(1e-5, 1e-4 * np.abs(fd))))
        n_components += g.size

    mlp_fail = 0
    for _ in range(20):
        approx = MlpApproximator.initialize(4, 32, 2, rng)
        s, up = rng.normal(size=4), rng.normal(size=2)
        grads = mlp_backward(approx, s, up)
        g = np.concatenate([grads[k].ravel() for k in approx.groups()])

        def f(vec):
            trial = approx.copy()
            trial.load_flat(vec)
            return float(up @ mlp_forward(trial, s))

        fd = oracles.central_difference(f, approx.flatten(), 1e-4)
        mlp_fail += int(np.sum(np.abs(g - fd) > np.maximum(1e-5, 1e-4 * np.abs(fd))))
    elapsed = time.perf_counter() - t0
    ok = pqc_fail == 0 and mlp_fail == 0 and elapsed < 60
    record(2, "gradient correctness", ok,
           f"PQC {pqc_fail}/{n_components} components out of tolerance, MLP {mlp_fail} out of tolerance, "
           f"20 configs each, {elapsed:.2f}s (limit 60s)")
    assert ok


def test_criterion_3_norm_preservation():
    rng = np.random.default_rng(3)
    circuit = oracles.random_gates(rng, 4, 1000)
    dev = abs(apply_circuit(zero_state(4), to_gates(circuit)).norm() - 1)
    ok = dev <= 1e-12
    record(3, "norm preservation", ok, f"1000-gate circuit, | |psi| - 1 | = {dev:.2e} (tol 1e-12)")
    assert ok


def _short_slicing(tmp_path, sub, **top):
    cfg = load_config(os.path.join(CONFIGS, "slicing_federated.json"))
    env = dataclasses.replace(cfg.environment, max_episode_steps=25)
    return dataclasses.replace(cfg, environment=env, episodes=8, output_dir=str(tmp_path / sub), **top)


def test_criterion_4_federation_algebra(tmp_path):
    rng = np.random.default_rng(4)
    v = rng.normal(size=52)
    identity = np.array_equal(aggregate([v, v.copy(), v.copy()], [1 / 3] * 3), v)
    mean = np.array_equal(aggregate([np.zeros(52), np.full(52, 2.0)], [0.5, 0.5]), np.ones(52))

    cfg = load_config(os.path.join(CONFIGS, "cartpole_fqdrl.json"))
    agents = []
    for k in range(3):
        env = build_env(cfg, k)
        agents.append(build_agent(cfg, k, env))
        for _ in range(3):
            agents[k].run_episode(env)
    r = run_round(agents, FederationConfig(), 1, 3)
    spread = max(
        float(np.max(np.abs(net.flatten() - r.global_vector))) for ag in agents for net in (ag.online, ag.target)
    )

    fed = run_experiment(_short_slicing(tmp_path, "fed", n_agents=1))
    iso_cfg = _short_slicing(tmp_path, "iso", n_agents=1)
    iso_cfg = dataclasses.replace(iso_cfg, federation=dataclasses.replace(iso_cfg.federation, mode="isolated"))
    iso = run_experiment(iso_cfg)
    same = all(
        (tmp_path / "fed" / n).read_bytes() == (tmp_path / "iso" / n).read_bytes()
        for n in ("rewards.csv", "global.csv")
    ) and np.array_equal(fed.rewards, iso.rewards)

    ok = identity and mean and spread == 0.0 and same
    record(4, "federation algebra", ok,
           f"identical->identity {identity}, mean([0],[2])=[1] {mean}, post-round inf-norm spread {spread}, "
           f"n_agents=1 federated == isolated {same}")
    assert ok


def test_criterion_5_environment_conservation():
    env = SlicingEnv(SlicingConfig())
    rng = np.random.default_rng(5)
    env.reset(rng)
    violations = 0
    for _ in range(10_000):
        if env.done:
            env.reset(rng)
        env.step(int(rng.integers(env.n_actions)))
        info = env.last_info
        violations += int(sum(info.alloc) != env.config.prb_budget)
        violations += int(np.any(env.state.queues < 0))
        violations += int(not np.array_equal(info.arrivals, info.served + info.queue_delta + info.drops))
    ok = violations == 0
    record(5, "environment conservation", ok, f"10000 random slicing steps, {violations} violations")
    assert ok


def test_criterion_6_determinism(tmp_path):
    runs = {
        "a": _short_slicing(tmp_path, "a"),
        "b": _short_slicing(tmp_path, "b"),
        "parallel": _short_slicing(tmp_path, "parallel", parallel=True),
    }
    metrics = {k: run_experiment(c) for k, c in runs.items()}
    files = ("rewards.csv", "global.csv", "rounds.csv")
    repeat = all((tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes() for f in files)
    par = all((tmp_path / "a" / f).read_bytes() == (tmp_path / "parallel" / f).read_bytes() for f in files)
    par = par and np.array_equal(metrics["a"].rewards, metrics["parallel"].rewards)
    ok = repeat and par
    record(6, "determinism", ok, f"repeat byte-identical {repeat}, serial == parallel (4 agents) {par}")
    assert ok


def final_vs_first(global_reward):
    ma = moving_average(global_reward, 20)
    return float(np.mean(ma[-50:])), float(np.mean(global_reward[:50]))


@pytest.mark.slow
def test_criterion_7_learning_trend(tmp_path):
    base = load_config(os.path.join(CONFIGS, "cartpole_fqdrl.json"))
    details, passes = [], 0
    for seed in SEEDS:
        cfg = dataclasses.replace(base, seed=seed, output_dir=str(tmp_path / f"seed{seed}"))
        final, first = final_vs_first(run_experiment(cfg).global_reward)
        ratio = final / first
        passes += ratio >= 3
        details.append(f"seed {seed}: {first:.1f}->{final:.1f} (x{ratio:.2f})")
    ok = passes >= 4
    record(7, "cart-pole learning trend", ok,
           f"{passes}/5 seeds with final-50 MA >= 3x first-50 mean (need 4); " + "; ".join(details))
    assert ok


@pytest.mark.slow
def test_criterion_8_federation_benefit(tmp_path):
    finals = {"federated": [], "isolated": []}
    for mode in finals:
        base = load_config(os.path.join(CONFIGS, f"slicing_{mode}.json"))
        assert base.federation.mode == mode and base.n_agents == 4
        for seed in SEEDS:
            cfg = dataclasses.replace(base, seed=seed, output_dir=str(tmp_path / f"{mode}{seed}"))
            finals[mode].append(float(np.mean(run_experiment(cfg).global_reward[-20:])))
    fed, iso = np.median(finals["federated"]), np.median(finals["isolated"])
    ok = fed >= iso
    per_seed = ", ".join(f"{f:.3f}/{i:.3f}" for f, i in zip(finals["federated"], finals["isolated"]))
    record(8, "federation benefit (slicing)", ok,
           f"median final-20 global reward federated {fed:.4f} vs isolated {iso:.4f}; per seed fed/iso {per_seed}")
    assert ok


def test_criterion_9_parameter_count_record(tmp_path):
    cfg = load_config(os.path.join(CONFIGS, "cartpole_fqdrl.json"))
    cfg = dataclasses.replace(cfg, episodes=1, n_agents=1, output_dir=str(tmp_path / "run"))
    run_experiment(cfg)
    counts = json.loads((tmp_path / "run" / "manifest.json").read_text())["parameter_counts"]
    ok = (
        counts["pqc"] == 52
        and counts["mlp"] == MlpApproximator.n_params_for(4, cfg.mlp.hidden, 2)
        and counts["mlp_to_pqc_ratio"] >= 10
    )
    record(9, "parameter-count record", ok,
           f"manifest pqc={counts['pqc']} mlp={counts['mlp']} ratio={counts['mlp_to_pqc_ratio']:.2f} (need 52, >= 10)")
    assert ok
