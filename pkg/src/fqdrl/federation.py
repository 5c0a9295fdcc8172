"""Synchronous federated averaging of agent parameters."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import ConfigurationError, UsageError

FEDERATED = "federated"
ISOLATED = "isolated"


@dataclass
class FederationConfig:
    mode: str = FEDERATED
    sync_every: int = 10  # episodes
    weights: list[float] | None = None  # None means uniform
    scope: list[str] | None = None  # parameter groups to federate; None means all
    reset_optimizer: bool = True
    shared_init: bool = True  # start every agent from agent 0's initialization

    def validate(self, n_agents: int, prefix: str = "federation") -> None:
        if self.mode not in (FEDERATED, ISOLATED):
            raise ConfigurationError(f"must be {FEDERATED!r} or {ISOLATED!r}, got {self.mode!r}", f"{prefix}.mode")
        if self.sync_every < 1:
            raise ConfigurationError(f"must be >= 1, got {self.sync_every}", f"{prefix}.sync_every")
        if n_agents < 1:
            raise ConfigurationError(f"must be >= 1, got {n_agents}", "n_agents")
        if self.weights is not None:
            try:
                check_weights(self.weights, n_agents)
            except ConfigurationError as exc:
                raise ConfigurationError(str(exc), f"{prefix}.weights") from None

    def resolved_weights(self, n_agents: int) -> np.ndarray:
        if self.weights is None:
            return np.full(n_agents, 1.0 / n_agents)
        return np.asarray(self.weights, dtype=np.float64)


def federation_mode(config: FederationConfig) -> str:
    return config.mode


def check_weights(weights: Sequence[float], n: int) -> np.ndarray:
    w = np.asarray(weights, dtype=np.float64)
    if w.shape != (n,):
        raise ConfigurationError(f"expected {n} aggregation weights, got {w.shape}")
    if not np.all(np.isfinite(w)) or np.any(w < 0):
        raise ConfigurationError("aggregation weights must be finite and nonnegative")
    if abs(math.fsum(w) - 1.0) > 1e-12:
        raise ConfigurationError(f"aggregation weights must sum to 1, got {math.fsum(w)!r}")
    return w


def aggregate(vectors: Sequence[np.ndarray], weights: Sequence[float]) -> np.ndarray:
    """Elementwise weighted mean ``sum_k weights[k] * vectors[k]``.

    Computed as ``ref + fsum_k(weights[k] * (vectors[k] - ref))`` with ``ref``
    the elementwise minimum, which makes the result independent of agent order
    and returns identical inputs unchanged, bit for bit.
    """
    if len(vectors) == 0:
        raise UsageError("need at least one vector to aggregate")
    shapes = {np.shape(v) for v in vectors}
    if len(shapes) != 1 or len(shapes.pop()) != 1:
        raise UsageError("all parameter vectors must be flat and of equal length")
    mat = np.array([np.asarray(v, dtype=np.float64) for v in vectors])
    w = check_weights(weights, len(vectors))
    ref = mat.min(axis=0)
    terms = w[:, None] * (mat - ref)
    return ref + np.array([math.fsum(col) for col in terms.T])


@dataclass
class FederationRound:
    index: int
    episode: int
    contributed: list[np.ndarray]
    global_vector: np.ndarray
    agent_norms: list[float] = field(default_factory=list)
    global_norm: float = 0.0


def _check_compatible(agents) -> None:
    ref = agents[0].online.descriptor()
    for ag in agents[1:]:
        if ag.online.descriptor() != ref:
            raise ConfigurationError(
                f"agent {ag.agent_id} architecture {ag.online.descriptor()} differs from agent "
                f"{agents[0].agent_id} architecture {ref}"
            )


def broadcast_initial(agents) -> None:
    """Give every agent agent 0's initial parameters (online and target)."""
    _check_compatible(agents)
    init = agents[0].online.flatten()
    for ag in agents[1:]:
        ag.set_parameters(init, reset_optimizer=True)


def run_round(agents, config: FederationConfig, index: int, episode: int = 0) -> FederationRound:
    """Aggregate online parameters and broadcast them to every online and target net."""
    if not agents:
        raise UsageError("run_round needs at least one agent")
    _check_compatible(agents)
    contributed = [ag.online.flatten() for ag in agents]
    weights = config.resolved_weights(len(agents))
    if len(agents) == 1:
        # a single agent keeps its own parameters and optimizer moments
        global_vec = contributed[0].copy()
    else:
        global_vec = aggregate(contributed, weights)
        if config.scope is not None:
            slices = agents[0].online.group_slices()
            unknown = set(config.scope) - slices.keys()
            if unknown:
                raise ConfigurationError(f"unknown parameter groups in scope: {sorted(unknown)}", "federation.scope")
        for ag in agents:
            ag.set_parameters(global_vec, config.scope, config.reset_optimizer)
    return FederationRound(
        index,
        episode,
        contributed,
        global_vec,
        [float(np.linalg.norm(v)) for v in contributed],
        float(np.linalg.norm(global_vec)),
    )


def round_log_header(n_agents: int) -> list[str]:
    return ["round", "episode", *[f"agent_{k}_norm" for k in range(n_agents)], "global_norm"]


def round_log_row(r: FederationRound) -> list:
    return [r.index, r.episode, *[repr(x) for x in r.agent_norms], repr(r.global_norm)]


def write_round_log(path: str | Path, rounds: Sequence[FederationRound], n_agents: int) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(round_log_header(n_agents))
        for r in rounds:
            writer.writerow(round_log_row(r))
