"""Q-function approximators sharing one interface.

Both expose named parameter groups (arrays mutated in place by optimizers),
batched forward passes, and gradients of ``sum(upstream * q)``.
"""

from __future__ import annotations

import numpy as np

from .. import pqc
from ..errors import ConfigurationError, UsageError


class Approximator:
    kind = ""

    def groups(self) -> dict[str, np.ndarray]:
        raise NotImplementedError

    def q_batch(self, states: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def grad(self, states: np.ndarray, upstream: np.ndarray) -> dict[str, np.ndarray]:
        raise NotImplementedError

    def descriptor(self) -> dict:
        raise NotImplementedError

    def copy(self) -> Approximator:
        raise NotImplementedError

    @property
    def n_actions(self) -> int:
        raise NotImplementedError

    @property
    def n_params(self) -> int:
        return sum(a.size for a in self.groups().values())

    def q_values(self, state: np.ndarray) -> np.ndarray:
        return self.q_batch(np.asarray(state, dtype=np.float64)[None, :])[0]

    def group_slices(self) -> dict[str, slice]:
        out, start = {}, 0
        for name, arr in self.groups().items():
            out[name] = slice(start, start + arr.size)
            start += arr.size
        return out

    def flatten(self) -> np.ndarray:
        return np.concatenate([a.ravel() for a in self.groups().values()])

    def load_flat(self, vector: np.ndarray) -> None:
        vector = np.asarray(vector, dtype=np.float64)
        if vector.shape != (self.n_params,):
            raise UsageError(f"expected {self.n_params} parameters, got shape {vector.shape}")
        for name, sl in self.group_slices().items():
            arr = self.groups()[name]
            arr[...] = vector[sl].reshape(arr.shape)


class PqcApproximator(Approximator):
    kind = "pqc"

    def __init__(self, arch: pqc.PqcArchitecture, params: pqc.PqcParameters, gradient_method: str = "adjoint"):
        params.validate(arch)
        self.arch = arch
        self.params = params
        self.gradient_method = gradient_method

    @classmethod
    def initialize(cls, arch: pqc.PqcArchitecture, rng: np.random.Generator, gradient_method: str = "adjoint"):
        return cls(arch, pqc.init_params(arch, rng), gradient_method)

    @property
    def n_actions(self) -> int:
        return self.arch.n_actions

    def groups(self) -> dict[str, np.ndarray]:
        return self.params.groups()

    def q_batch(self, states: np.ndarray) -> np.ndarray:
        return pqc.q_values_batch(self.arch, self.params, states)

    def grad(self, states: np.ndarray, upstream: np.ndarray) -> dict[str, np.ndarray]:
        g = pqc.batch_gradients(self.arch, self.params, states, upstream, self.gradient_method)
        return g.groups()

    def descriptor(self) -> dict:
        return {"kind": "pqc", **self.arch.to_dict()}

    def copy(self) -> PqcApproximator:
        return PqcApproximator(self.arch, self.params.copy(), self.gradient_method)


class MlpApproximator(Approximator):
    """Two-layer perceptron: q = W2 tanh(W1 s + b1) + b2."""

    kind = "mlp"

    def __init__(self, w1: np.ndarray, b1: np.ndarray, w2: np.ndarray, b2: np.ndarray):
        hidden, state_dim = w1.shape
        if hidden == 0:
            raise ConfigurationError("MLP hidden size must be >= 1")
        if b1.shape != (hidden,) or w2.shape[1] != hidden or b2.shape != (w2.shape[0],):
            raise UsageError(
                f"inconsistent MLP shapes: W1 {w1.shape}, b1 {b1.shape}, W2 {w2.shape}, b2 {b2.shape}"
            )
        self.w1, self.b1, self.w2, self.b2 = w1, b1, w2, b2

    @classmethod
    def initialize(cls, state_dim: int, hidden: int, n_actions: int, rng: np.random.Generator):
        if hidden < 1:
            raise ConfigurationError(f"MLP hidden size must be >= 1, got {hidden}")
        if state_dim < 1 or n_actions < 1:
            raise ConfigurationError("MLP needs state_dim >= 1 and n_actions >= 1")
        k1, k2 = 1 / np.sqrt(state_dim), 1 / np.sqrt(hidden)
        return cls(
            rng.uniform(-k1, k1, (hidden, state_dim)),
            rng.uniform(-k1, k1, hidden),
            rng.uniform(-k2, k2, (n_actions, hidden)),
            rng.uniform(-k2, k2, n_actions),
        )

    @classmethod
    def zeros(cls, state_dim: int, hidden: int, n_actions: int):
        if hidden < 1:
            raise ConfigurationError(f"MLP hidden size must be >= 1, got {hidden}")
        return cls(np.zeros((hidden, state_dim)), np.zeros(hidden), np.zeros((n_actions, hidden)), np.zeros(n_actions))

    @staticmethod
    def n_params_for(state_dim: int, hidden: int, n_actions: int) -> int:
        return hidden * state_dim + hidden + n_actions * hidden + n_actions

    @property
    def sizes(self) -> tuple[int, int, int]:
        return self.w1.shape[1], self.w1.shape[0], self.w2.shape[0]

    @property
    def n_actions(self) -> int:
        return self.w2.shape[0]

    def groups(self) -> dict[str, np.ndarray]:
        return {"W1": self.w1, "b1": self.b1, "W2": self.w2, "b2": self.b2}

    def _check(self, states: np.ndarray) -> np.ndarray:
        states = np.atleast_2d(np.asarray(states, dtype=np.float64))
        if states.shape[1] != self.w1.shape[1]:
            raise UsageError(f"state has {states.shape[1]} features, MLP expects {self.w1.shape[1]}")
        return states

    def q_batch(self, states: np.ndarray) -> np.ndarray:
        h = np.tanh(self._check(states) @ self.w1.T + self.b1)
        return h @ self.w2.T + self.b2

    def grad(self, states: np.ndarray, upstream: np.ndarray) -> dict[str, np.ndarray]:
        states = self._check(states)
        upstream = np.atleast_2d(np.asarray(upstream, dtype=np.float64))
        if upstream.shape != (states.shape[0], self.n_actions):
            raise UsageError(f"upstream has shape {upstream.shape}, expected {(states.shape[0], self.n_actions)}")
        h = np.tanh(states @ self.w1.T + self.b1)
        dh = (upstream @ self.w2) * (1 - h**2)
        return {
            "W1": dh.T @ states,
            "b1": dh.sum(axis=0),
            "W2": upstream.T @ h,
            "b2": upstream.sum(axis=0),
        }

    def descriptor(self) -> dict:
        return {"kind": "mlp", "sizes": list(self.sizes)}

    def copy(self) -> MlpApproximator:
        return MlpApproximator(self.w1.copy(), self.b1.copy(), self.w2.copy(), self.b2.copy())


def mlp_forward(approx: MlpApproximator, state: np.ndarray) -> np.ndarray:
    state = np.asarray(state, dtype=np.float64)
    if state.ndim != 1:
        raise UsageError("mlp_forward takes a single state")
    return approx.q_batch(state[None, :])[0]


def mlp_backward(approx: MlpApproximator, state: np.ndarray, upstream: np.ndarray) -> dict[str, np.ndarray]:
    state = np.asarray(state, dtype=np.float64)
    upstream = np.asarray(upstream, dtype=np.float64)
    if state.ndim != 1 or upstream.ndim != 1:
        raise UsageError("mlp_backward takes a single state and upstream vector")
    return approx.grad(state[None, :], upstream[None, :])
