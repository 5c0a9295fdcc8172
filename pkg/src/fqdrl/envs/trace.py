"""Trajectory trace dumps."""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np


def record_trajectory(env, rng: np.random.Generator, actions: Sequence[int]) -> list[tuple]:
    """Reset ``env`` with ``rng`` and replay ``actions`` until done or exhausted.

    Rows are (step, state, action, reward, done) where ``state`` is the
    observation the action was taken in.
    """
    rows = []
    s = env.reset(rng)
    for t, a in enumerate(actions):
        s_next, r, done = env.step(a)
        rows.append((t, s, a, r, done))
        s = s_next
        if done:
            break
    return rows


def write_trace(path: str | Path, rows: Iterable[tuple], state_dim: int) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["step", *[f"s{i}" for i in range(state_dim)], "action", "reward", "done"])
        for step, state, action, reward, done in rows:
            writer.writerow([step, *[repr(float(v)) for v in state], action, repr(float(reward)), int(done)])
