"""Seeded multi-agent training runs with optional federation."""

from __future__ import annotations

import json
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Callable

import numpy as np

from .. import pqc
from ..envs import CartPoleEnv, Env, SlicingEnv, write_trace
from ..federation import FEDERATED, broadcast_initial, run_round
from ..qdqn import DQNAgent, MlpApproximator, PqcApproximator
from ..qsim import Observable
from .config import MANIFEST_KIND, CartPoleSection, ExperimentConfig
from .metrics import MetricsWriter, RunMetrics, version_string, write_manifest
from .seeds import agent_generators, agent_seed

log = logging.getLogger(__name__)


def build_env(config: ExperimentConfig, k: int) -> Env:
    env = config.environment
    if isinstance(env, CartPoleSection):
        return CartPoleEnv(env.max_episode_steps)
    return SlicingEnv(env.for_agent(k))


def build_architecture(config: ExperimentConfig, state_dim: int, n_actions: int) -> pqc.PqcArchitecture:
    sec = config.pqc
    if sec.observables is None:
        obs = pqc.default_observables(sec.n_qubits, n_actions)
    else:
        obs = tuple(Observable(tuple(o)) for o in sec.observables)
    return pqc.PqcArchitecture(sec.n_qubits, sec.n_layers, state_dim, obs, tuple(sec.encoding_map or ()))


def build_agent(config: ExperimentConfig, k: int, env: Env) -> DQNAgent:
    init_rng, agent_rng, env_rng = agent_generators(config.seed, k)
    if config.approximator == "pqc":
        arch = build_architecture(config, env.state_dim, env.n_actions)
        online = PqcApproximator.initialize(arch, init_rng, config.agent.gradient_method)
    else:
        online = MlpApproximator.initialize(env.state_dim, config.mlp.hidden, env.n_actions, init_rng)
    return DQNAgent(online, config.agent, agent_rng, env_rng, agent_id=k)


def parameter_counts(config: ExperimentConfig) -> dict:
    env = build_env(config, 0)
    n_pqc = build_architecture(config, env.state_dim, env.n_actions).n_params
    n_mlp = MlpApproximator.n_params_for(env.state_dim, config.mlp.hidden, env.n_actions)
    return {"pqc": n_pqc, "mlp": n_mlp, "mlp_to_pqc_ratio": n_mlp / n_pqc}


def make_manifest(config: ExperimentConfig) -> dict:
    return {
        "kind": MANIFEST_KIND,
        "name": config.name,
        "version": version_string(),
        "master_seed": config.seed,
        "federation_mode": config.federation.mode,
        "approximator": config.approximator,
        "seed_derivation": "agent k: splitmix64(splitmix64(master) ^ k) -> SeedSequence.spawn(3) = (init, agent, env)",
        "agent_seeds": [agent_seed(config.seed, k) for k in range(config.n_agents)],
        "parameter_counts": parameter_counts(config),
        "config": config.to_dict(),
        "status": "running",
    }


def check_writable(out_dir: Path) -> None:
    """Raise OSError now rather than after hours of training."""
    out_dir.mkdir(parents=True, exist_ok=True)
    probe = out_dir / ".write-probe"
    probe.write_text("")
    probe.unlink()


def run_experiment(
    config: ExperimentConfig,
    out_dir: str | Path | None = None,
    progress: Callable[[int, np.ndarray], None] | None = None,
) -> RunMetrics:
    """Train ``config.n_agents`` agents for ``config.episodes`` episodes.

    Metrics are appended to ``out_dir`` (default: the config's output_dir) after
    every episode; federation rounds run after every ``sync_every``-th episode.
    """
    out = Path(out_dir) if out_dir is not None else config.resolved_output_dir()
    check_writable(out)
    manifest = make_manifest(config)
    write_manifest(out, manifest)

    envs = [build_env(config, k) for k in range(config.n_agents)]
    agents = [build_agent(config, k, envs[k]) for k in range(config.n_agents)]
    fed = config.federation
    federated = fed.mode == FEDERATED
    if federated and fed.shared_init:
        broadcast_initial(agents)

    rewards = np.zeros((config.episodes, config.n_agents))
    wall = np.zeros(config.episodes)
    rounds = []
    traces: list[list] = [[] for _ in agents]
    pool = ThreadPoolExecutor(max_workers=config.n_agents) if config.parallel else None

    def play(k: int) -> float:
        trace = None
        if config.traces:
            traces[k] = trace = []
        return agents[k].run_episode(envs[k], trace)

    started = time.perf_counter()
    try:
        with MetricsWriter(out, config.n_agents) as writer:
            for e in range(1, config.episodes + 1):
                t0 = time.perf_counter()
                if pool is not None:
                    ep_rewards = list(pool.map(play, range(config.n_agents)))
                else:
                    ep_rewards = [play(k) for k in range(config.n_agents)]
                rewards[e - 1] = ep_rewards
                if federated and e % fed.sync_every == 0:
                    r = run_round(agents, fed, len(rounds) + 1, e)
                    rounds.append(r)
                    writer.round(r)
                    if config.checkpoints:
                        _write_checkpoints(out, agents, r.index)
                wall[e - 1] = time.perf_counter() - t0
                writer.episode(e, ep_rewards, wall[e - 1])
                if progress is not None:
                    progress(e, rewards[e - 1])
                if e % 50 == 0 or e == config.episodes:
                    log.info("%s: episode %d/%d mean reward %.3f", config.name, e, config.episodes, rewards[e - 1].mean())
    finally:
        if pool is not None:
            pool.shutdown()

    if config.checkpoints and not federated:
        _write_checkpoints(out, agents, 0)
    if config.traces:
        (out / "traces").mkdir(exist_ok=True)
        for k, tr in enumerate(traces):
            write_trace(out / "traces" / f"agent_{k}_final_episode.csv", tr, envs[k].state_dim)

    metrics = RunMetrics(rewards, rounds, wall)
    g = metrics.global_reward
    manifest.update(
        status="complete",
        episodes_completed=config.episodes,
        federation_rounds=len(rounds),
        wall_clock_s=round(time.perf_counter() - started, 3),
        summary={
            "first_50_mean": float(np.mean(g[:50])),
            "final_50_moving_average_mean": float(np.mean(metrics.global_moving_average[-50:])),
        },
    )
    write_manifest(out, manifest)
    return metrics


def _write_checkpoints(out: Path, agents: list[DQNAgent], round_index: int) -> None:
    d = out / "checkpoints"
    d.mkdir(exist_ok=True)
    for ag in agents:
        path = d / f"round_{round_index:04d}_agent_{ag.agent_id}.json"
        path.write_text(json.dumps(ag.checkpoint()))
