"""Common episodic environment interface."""

from __future__ import annotations

import numpy as np

from ..errors import UsageError


class Env:
    """Episodic environment with a continuous observation and discrete actions.

    Subclasses implement ``_reset`` and ``_step``. ``truncated`` is True when
    the last episode ended on the step limit rather than a terminal state.
    """

    state_dim: int
    n_actions: int
    max_episode_steps: int

    def __init__(self):
        self.done = True
        self.truncated = False
        self.t = 0

    def reset(self, rng: np.random.Generator) -> np.ndarray:
        self.done = False
        self.truncated = False
        self.t = 0
        return self._reset(rng)

    def step(self, action: int) -> tuple[np.ndarray, float, bool]:
        if self.done:
            raise UsageError("step() called on a finished episode; call reset() first")
        if not 0 <= action < self.n_actions:
            raise UsageError(f"action {action} out of range [0, {self.n_actions})")
        state, reward, terminal = self._step(int(action))
        self.t += 1
        self.truncated = not terminal and self.t >= self.max_episode_steps
        self.done = terminal or self.truncated
        return state, reward, self.done

    def _reset(self, rng):
        raise NotImplementedError

    def _step(self, action):
        raise NotImplementedError
