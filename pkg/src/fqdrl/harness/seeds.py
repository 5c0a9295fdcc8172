"""Per-agent seed derivation.

Agent ``k`` of a run with master seed ``m`` gets
``splitmix64(splitmix64(m) ^ k)``; that 64-bit value seeds a NumPy
``SeedSequence`` which is split into three independent streams:
parameter initialization, agent (exploration and replay sampling), and
environment.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1


def splitmix64(x: int) -> int:
    z = (x + 0x9E3779B97F4A7C15) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def agent_seed(master: int, k: int) -> int:
    return splitmix64(splitmix64(master & MASK64) ^ k)


def agent_generators(master: int, k: int) -> tuple[np.random.Generator, np.random.Generator, np.random.Generator]:
    """(init_rng, agent_rng, env_rng) for agent ``k``."""
    children = np.random.SeedSequence(agent_seed(master, k)).spawn(3)
    return tuple(np.random.default_rng(c) for c in children)
