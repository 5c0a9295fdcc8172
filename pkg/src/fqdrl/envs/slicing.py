"""Base-station slice scheduler with virtual transmission queues.

Every step the agent picks a PRB split from a fixed allocation table. Each
slice receives Poisson arrivals, serves up to ``alloc * service_rate`` packets,
and keeps the remainder in a queue capped at ``q_max`` (the excess is dropped).
Reward is ``-sum_i weight_i * q_i / q_max - drop_penalty * sum_i drops_i``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigurationError, UsageError
from .base import Env


def allocation_table(budget: int, n_slices: int, granularity: int) -> list[tuple[int, ...]]:
    """All splits of ``budget`` PRBs into ``n_slices`` multiples of ``granularity``, lexicographic."""
    if granularity < 1 or budget < 1 or n_slices < 1:
        raise ConfigurationError("budget, n_slices and granularity must be >= 1")
    if budget % granularity:
        raise ConfigurationError(f"granularity {granularity} does not divide PRB budget {budget}")
    units = budget // granularity
    rows = [
        tuple(u * granularity for u in combo)
        for combo in itertools.product(range(units + 1), repeat=n_slices)
        if sum(combo) == units
    ]
    return sorted(rows)


def n_allocations(budget: int, n_slices: int, granularity: int) -> int:
    return math.comb(budget // granularity + n_slices - 1, n_slices - 1)


@dataclass
class SlicingConfig:
    n_slices: int = 2
    prb_budget: int = 10
    granularity: int = 5
    q_max: float = 50.0
    service_rate: list[float] = field(default_factory=lambda: [2.0, 2.0])
    slice_weights: list[float] = field(default_factory=lambda: [0.5, 0.5])
    drop_penalty: float = 1.0
    max_episode_steps: int = 100
    arrival_rate_ranges: list[list[float]] = field(default_factory=lambda: [[1.0, 12.0], [1.0, 12.0]])
    max_arrival_rate: list[float] | None = None  # observation scale; defaults to each range's upper end

    def __post_init__(self):
        if self.max_arrival_rate is None:
            self.max_arrival_rate = [float(hi) for _, hi in self.arrival_rate_ranges]

    def validate(self, prefix: str = "environment") -> None:
        def bad(name, msg):
            raise ConfigurationError(msg, f"{prefix}.{name}")

        n = self.n_slices
        if n < 2:
            bad("n_slices", f"must be >= 2, got {n}")
        if self.prb_budget < 1:
            bad("prb_budget", f"must be >= 1, got {self.prb_budget}")
        if self.granularity < 1 or self.prb_budget % self.granularity:
            bad("granularity", f"{self.granularity} must be >= 1 and divide prb_budget {self.prb_budget}")
        if self.q_max <= 0:
            bad("q_max", "must be > 0")
        if self.max_episode_steps < 1:
            bad("max_episode_steps", "must be >= 1")
        if self.drop_penalty < 0:
            bad("drop_penalty", "must be >= 0")
        for name in ("service_rate", "slice_weights", "arrival_rate_ranges", "max_arrival_rate"):
            if len(getattr(self, name)) != n:
                bad(name, f"needs {n} entries, got {len(getattr(self, name))}")
        if any(m < 0 for m in self.service_rate):
            bad("service_rate", "rates must be >= 0")
        if any(wt < 0 for wt in self.slice_weights):
            bad("slice_weights", "weights must be >= 0")
        for i, rng_ in enumerate(self.arrival_rate_ranges):
            if len(rng_) != 2 or not 0 <= rng_[0] <= rng_[1]:
                bad(f"arrival_rate_ranges[{i}]", f"must be [lo, hi] with 0 <= lo <= hi, got {rng_}")
            if rng_[1] > self.max_arrival_rate[i]:
                bad(f"max_arrival_rate[{i}]", f"{self.max_arrival_rate[i]} is below the range upper end {rng_[1]}")
            if self.max_arrival_rate[i] <= 0:
                bad(f"max_arrival_rate[{i}]", "must be > 0")


@dataclass
class SliceEnvState:
    queues: np.ndarray  # packets, per slice
    rates: np.ndarray  # mean arrivals per step, per slice
    step: int = 0
    total_drops: float = 0.0

    def copy(self) -> SliceEnvState:
        return SliceEnvState(self.queues.copy(), self.rates.copy(), self.step, self.total_drops)


@dataclass
class StepInfo:
    alloc: tuple[int, ...]
    arrivals: np.ndarray
    served: np.ndarray
    drops: np.ndarray
    queue_delta: np.ndarray


def observe(config: SlicingConfig, state: SliceEnvState) -> np.ndarray:
    return np.concatenate([state.queues / config.q_max, state.rates / np.asarray(config.max_arrival_rate)])


def slice_reset(config: SlicingConfig, rng: np.random.Generator) -> SliceEnvState:
    """Empty queues; per-slice arrival rates drawn uniformly from the configured ranges."""
    config.validate()
    lo = np.array([r[0] for r in config.arrival_rate_ranges], dtype=np.float64)
    hi = np.array([r[1] for r in config.arrival_rate_ranges], dtype=np.float64)
    rates = lo + (hi - lo) * rng.random(config.n_slices)
    return SliceEnvState(np.zeros(config.n_slices), rates)


def slice_step(
    config: SlicingConfig,
    state: SliceEnvState,
    action: int,
    rng: np.random.Generator | None = None,
    table: list[tuple[int, ...]] | None = None,
    arrivals: np.ndarray | None = None,
) -> tuple[SliceEnvState, float, bool, StepInfo]:
    """Advance one scheduling interval.

    ``arrivals`` overrides the Poisson draw (for replaying a fixed traffic trace).
    """
    table = table or allocation_table(config.prb_budget, config.n_slices, config.granularity)
    if not 0 <= action < len(table):
        raise UsageError(f"action {action} outside allocation table of size {len(table)}")
    alloc = table[action]
    if arrivals is None:
        if rng is None:
            raise UsageError("need an rng or an explicit arrivals vector")
        arrivals = rng.poisson(state.rates).astype(np.float64)
    else:
        arrivals = np.asarray(arrivals, dtype=np.float64)
    backlog = state.queues + arrivals
    capacity = np.asarray(alloc, dtype=np.float64) * np.asarray(config.service_rate, dtype=np.float64)
    served = np.minimum(backlog, capacity)
    remaining = backlog - served
    drops = np.maximum(remaining - config.q_max, 0.0)
    queues = remaining - drops
    reward = -float(np.dot(config.slice_weights, queues / config.q_max)) - config.drop_penalty * float(drops.sum())
    new = SliceEnvState(queues, state.rates.copy(), state.step + 1, state.total_drops + float(drops.sum()))
    info = StepInfo(alloc, arrivals, served, drops, queues - state.queues)
    return new, reward, new.step >= config.max_episode_steps, info


class SlicingEnv(Env):
    def __init__(self, config: SlicingConfig | None = None):
        super().__init__()
        self.config = config or SlicingConfig()
        self.config.validate()
        self.table = allocation_table(self.config.prb_budget, self.config.n_slices, self.config.granularity)
        self.state_dim = 2 * self.config.n_slices
        self.n_actions = len(self.table)
        self.max_episode_steps = self.config.max_episode_steps
        self.state: SliceEnvState | None = None
        self.rng: np.random.Generator | None = None
        self.last_info: StepInfo | None = None

    def _reset(self, rng):
        self.rng = rng
        self.state = slice_reset(self.config, rng)
        return observe(self.config, self.state)

    def _step(self, action):
        self.state, reward, _, self.last_info = slice_step(self.config, self.state, action, self.rng, self.table)
        # no terminal states: episodes only end on the step limit
        return observe(self.config, self.state), reward, False
