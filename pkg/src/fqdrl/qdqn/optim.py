"""In-place optimizers over named parameter groups."""

from __future__ import annotations

import numpy as np

from ..errors import UsageError


class GradientDescent:
    def __init__(self, lrs: dict[str, float]):
        self.lrs = dict(lrs)

    def step(self, groups: dict[str, np.ndarray], grads: dict[str, np.ndarray]) -> None:
        for name, arr in groups.items():
            arr -= self.lrs[name] * grads[name]

    def reset(self) -> None:
        pass

    def state_dict(self) -> dict:
        return {"kind": "sgd", "lrs": self.lrs}


class Adam:
    """Adam with one learning rate per parameter group."""

    def __init__(self, lrs: dict[str, float], beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.lrs = dict(lrs)
        self.beta1, self.beta2, self.eps = beta1, beta2, eps
        self.t = 0
        self.m: dict[str, np.ndarray] = {}
        self.v: dict[str, np.ndarray] = {}

    def step(self, groups: dict[str, np.ndarray], grads: dict[str, np.ndarray]) -> None:
        if not self.m:
            self.m = {k: np.zeros_like(a) for k, a in groups.items()}
            self.v = {k: np.zeros_like(a) for k, a in groups.items()}
        self.t += 1
        c1 = 1 - self.beta1**self.t
        c2 = 1 - self.beta2**self.t
        for name, arr in groups.items():
            g = grads[name]
            if g.shape != arr.shape:
                raise UsageError(f"gradient for {name} has shape {g.shape}, expected {arr.shape}")
            m, v = self.m[name], self.v[name]
            m *= self.beta1
            m += (1 - self.beta1) * g
            v *= self.beta2
            v += (1 - self.beta2) * g * g
            arr -= self.lrs[name] * (m / c1) / (np.sqrt(v / c2) + self.eps)

    def reset(self) -> None:
        """Zero the moments and the step counter."""
        self.t = 0
        self.m = {}
        self.v = {}

    def state_dict(self) -> dict:
        return {
            "kind": "adam",
            "lrs": self.lrs,
            "betas": [self.beta1, self.beta2],
            "eps": self.eps,
            "t": self.t,
            "m": {k: a.ravel().tolist() for k, a in self.m.items()},
            "v": {k: a.ravel().tolist() for k, a in self.v.items()},
        }
