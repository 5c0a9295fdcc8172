"""Experience replay."""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from ..errors import UsageError


class Transition(NamedTuple):
    s: np.ndarray
    a: int
    r: float
    s_next: np.ndarray
    done: bool


@dataclass
class Batch:
    s: np.ndarray  # (B, state_dim)
    a: np.ndarray  # (B,) int
    r: np.ndarray  # (B,)
    s_next: np.ndarray  # (B, state_dim)
    done: np.ndarray  # (B,) bool

    def __len__(self) -> int:
        return len(self.a)

    @classmethod
    def from_transitions(cls, transitions: Sequence[Transition]) -> Batch:
        if not transitions:
            raise UsageError("batch must be nonempty")
        return cls(
            np.array([t.s for t in transitions], dtype=np.float64),
            np.array([t.a for t in transitions], dtype=np.int64),
            np.array([t.r for t in transitions], dtype=np.float64),
            np.array([t.s_next for t in transitions], dtype=np.float64),
            np.array([t.done for t in transitions], dtype=bool),
        )


class ReplayBuffer:
    """Fixed-capacity ring buffer; the oldest transition is overwritten first."""

    def __init__(self, capacity: int, state_dim: int):
        if capacity < 1:
            raise UsageError(f"capacity must be >= 1, got {capacity}")
        self.capacity = capacity
        self.state_dim = state_dim
        self._s = np.zeros((capacity, state_dim))
        self._a = np.zeros(capacity, dtype=np.int64)
        self._r = np.zeros(capacity)
        self._s_next = np.zeros((capacity, state_dim))
        self._done = np.zeros(capacity, dtype=bool)
        self.inserted = 0

    def __len__(self) -> int:
        return min(self.inserted, self.capacity)

    def push(self, t: Transition) -> None:
        i = self.inserted % self.capacity
        self._s[i] = t.s
        self._a[i] = t.a
        self._r[i] = t.r
        self._s_next[i] = t.s_next
        self._done[i] = t.done
        self.inserted += 1

    def sample_indices(self, batch_size: int, rng: np.random.Generator) -> np.ndarray:
        if len(self) == 0:
            raise UsageError("cannot sample from an empty buffer")
        return rng.integers(0, len(self), size=batch_size)

    def gather(self, idx: np.ndarray) -> Batch:
        return Batch(self._s[idx], self._a[idx], self._r[idx], self._s_next[idx], self._done[idx])

    def sample(self, batch_size: int, rng: np.random.Generator) -> Batch:
        return self.gather(self.sample_indices(batch_size, rng))

    def transitions(self) -> list[Transition]:
        """Stored transitions, oldest first."""
        n = len(self)
        start = self.inserted - n
        order = [(start + k) % self.capacity for k in range(n)]
        return [
            Transition(self._s[i].copy(), int(self._a[i]), float(self._r[i]), self._s_next[i].copy(), bool(self._done[i]))
            for i in order
        ]
