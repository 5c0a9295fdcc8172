"""Data re-uploading PQC used as a Q-function approximator.

Each layer applies, in order:

1. a variational block, RY(theta[l, q, 0]) then RZ(theta[l, q, 1]) per qubit;
2. a CZ ring (0,1), (1,2), ..., (n-1,0) (one CZ for two qubits, none for one);
3. an encoding block, RX(lam[l, i] * arctan(s[i])) for each feature ``i`` on
   qubit ``encoding_map[i]``.

Q-values are ``q[a] = w[a] * <O_a>`` with ``O_a`` a Pauli-Z product.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ConfigurationError, UsageError
from .qsim import Gate, Observable, Program, z_signs, _check_qubits

SHIFT = np.pi / 2


def default_observables(n_qubits: int, n_actions: int) -> tuple[Observable, ...]:
    """Z on qubit ``a`` for action ``a``; wraps to ZZ pairs past ``n_qubits``."""
    obs = []
    for a in range(n_actions):
        if a < n_qubits:
            obs.append(Observable((a,)))
        else:
            k = a - n_qubits
            q0, q1 = k % n_qubits, (k + 1 + k // n_qubits) % n_qubits
            if q0 == q1:
                raise ConfigurationError(
                    f"cannot derive {n_actions} distinct observables on {n_qubits} qubits"
                )
            obs.append(Observable(tuple(sorted((q0, q1)))))
    if len(set(obs)) != len(obs):
        raise ConfigurationError(f"cannot derive {n_actions} distinct observables on {n_qubits} qubits")
    return tuple(obs)


@dataclass(frozen=True)
class PqcArchitecture:
    n_qubits: int
    n_layers: int
    state_dim: int
    action_observables: tuple[Observable, ...]
    encoding_map: tuple[int, ...] = ()

    def __post_init__(self):
        _check_qubits(self.n_qubits)
        if self.n_layers < 1:
            raise ConfigurationError(f"n_layers must be >= 1, got {self.n_layers}")
        if self.state_dim < 1:
            raise ConfigurationError(f"state_dim must be >= 1, got {self.state_dim}")
        obs = tuple(o if isinstance(o, Observable) else Observable(tuple(o)) for o in self.action_observables)
        if not obs:
            raise ConfigurationError("need one observable per action, got none")
        for o in obs:
            if max(o.qubits) >= self.n_qubits:
                raise ConfigurationError(f"observable {o.qubits} exceeds {self.n_qubits} qubits")
        object.__setattr__(self, "action_observables", obs)
        enc = tuple(int(q) for q in self.encoding_map) or tuple(
            i % self.n_qubits for i in range(self.state_dim)
        )
        if len(enc) != self.state_dim:
            raise ConfigurationError(
                f"encoding_map has {len(enc)} entries for state_dim {self.state_dim}"
            )
        if any(not 0 <= q < self.n_qubits for q in enc):
            raise ConfigurationError(f"encoding_map {enc} exceeds {self.n_qubits} qubits")
        object.__setattr__(self, "encoding_map", enc)

    @classmethod
    def default(cls, state_dim: int, n_actions: int, n_qubits: int = 3, n_layers: int = 5):
        return cls(n_qubits, n_layers, state_dim, default_observables(n_qubits, n_actions))

    @property
    def n_actions(self) -> int:
        return len(self.action_observables)

    @property
    def n_params(self) -> int:
        return self.n_layers * self.n_qubits * 2 + self.n_layers * self.state_dim + self.n_actions

    def to_dict(self) -> dict:
        return {
            "n_qubits": self.n_qubits,
            "n_layers": self.n_layers,
            "state_dim": self.state_dim,
            "observables": [list(o.qubits) for o in self.action_observables],
            "encoding_map": list(self.encoding_map),
        }

    @classmethod
    def from_dict(cls, d: dict) -> PqcArchitecture:
        return cls(
            int(d["n_qubits"]),
            int(d["n_layers"]),
            int(d["state_dim"]),
            tuple(Observable(tuple(q)) for q in d["observables"]),
            tuple(d.get("encoding_map", ())),
        )


@dataclass
class PqcParameters:
    """Trainable PQC parameters; also used as the container for their gradients."""

    theta: np.ndarray  # (n_layers, n_qubits, 2)
    lam: np.ndarray  # (n_layers, state_dim)
    w: np.ndarray  # (n_actions,)

    def copy(self) -> PqcParameters:
        return PqcParameters(self.theta.copy(), self.lam.copy(), self.w.copy())

    def groups(self) -> dict[str, np.ndarray]:
        return {"theta": self.theta, "lambda": self.lam, "w": self.w}

    def validate(self, arch: PqcArchitecture) -> None:
        expected = {
            "theta": (arch.n_layers, arch.n_qubits, 2),
            "lambda": (arch.n_layers, arch.state_dim),
            "w": (arch.n_actions,),
        }
        for name, arr in self.groups().items():
            if arr.shape != expected[name]:
                raise ConfigurationError(f"{name} has shape {arr.shape}, expected {expected[name]}")
            if not np.all(np.isfinite(arr)):
                raise ConfigurationError(f"{name} contains non-finite entries")


def init_params(arch: PqcArchitecture, rng: np.random.Generator) -> PqcParameters:
    theta = rng.uniform(-np.pi, np.pi, size=(arch.n_layers, arch.n_qubits, 2))
    return PqcParameters(theta, np.ones((arch.n_layers, arch.state_dim)), np.ones(arch.n_actions))


def zeros_like(arch: PqcArchitecture) -> PqcParameters:
    return PqcParameters(
        np.zeros((arch.n_layers, arch.n_qubits, 2)),
        np.zeros((arch.n_layers, arch.state_dim)),
        np.zeros(arch.n_actions),
    )


def flatten(params: PqcParameters) -> np.ndarray:
    """theta (layer-major), then lambda, then w."""
    return np.concatenate([params.theta.ravel(), params.lam.ravel(), params.w.ravel()])


def unflatten(arch: PqcArchitecture, vector: Sequence[float]) -> PqcParameters:
    vec = np.asarray(vector, dtype=np.float64)
    if vec.ndim != 1 or vec.size != arch.n_params:
        raise UsageError(f"expected a flat vector of length {arch.n_params}, got shape {vec.shape}")
    nt = arch.n_layers * arch.n_qubits * 2
    nl = arch.n_layers * arch.state_dim
    return PqcParameters(
        vec[:nt].reshape(arch.n_layers, arch.n_qubits, 2).copy(),
        vec[nt : nt + nl].reshape(arch.n_layers, arch.state_dim).copy(),
        vec[nt + nl :].copy(),
    )


def squash(state: np.ndarray) -> np.ndarray:
    return np.arctan(np.asarray(state, dtype=np.float64))


def _check_state(arch: PqcArchitecture, states: np.ndarray) -> np.ndarray:
    states = np.asarray(states, dtype=np.float64)
    if states.shape[-1] != arch.state_dim:
        raise ConfigurationError(
            f"state has {states.shape[-1]} features, architecture expects {arch.state_dim}"
        )
    return states


def build_circuit(arch: PqcArchitecture, params: PqcParameters, state: Sequence[float]) -> list[Gate]:
    params.validate(arch)
    x = squash(_check_state(arch, np.asarray(state)).reshape(-1))
    n = arch.n_qubits
    gates: list[Gate] = []
    for layer in range(arch.n_layers):
        for q in range(n):
            gates.append(Gate("RY", q, float(params.theta[layer, q, 0])))
            gates.append(Gate("RZ", q, float(params.theta[layer, q, 1])))
        for a, b in _ring(n):
            gates.append(Gate("CZ", b, control=a))
        for i, q in enumerate(arch.encoding_map):
            gates.append(Gate("RX", q, float(params.lam[layer, i] * x[i])))
    return gates


def _ring(n: int) -> list[tuple[int, int]]:
    if n == 1:
        return []
    if n == 2:
        return [(0, 1)]
    return [(q, (q + 1) % n) for q in range(n)]


@dataclass(frozen=True)
class _Compiled:
    program: Program
    theta_slots: np.ndarray  # (n_layers, n_qubits, 2)
    enc_slots: np.ndarray  # (n_layers, state_dim)
    signs: np.ndarray  # (n_actions, 2**n)


@functools.lru_cache(maxsize=64)
def _compile(arch: PqcArchitecture) -> _Compiled:
    zero = zeros_like(arch)
    gates = build_circuit(arch, zero, np.zeros(arch.state_dim))
    program = Program.from_gates(gates, arch.n_qubits)
    per_layer = 2 * arch.n_qubits + arch.state_dim
    base = np.arange(arch.n_layers)[:, None] * per_layer
    theta_slots = (base[:, :, None] + np.arange(2 * arch.n_qubits).reshape(arch.n_qubits, 2)[None]).astype(np.int64)
    enc_slots = (base + 2 * arch.n_qubits + np.arange(arch.state_dim)[None]).astype(np.int64)
    return _Compiled(program, theta_slots, enc_slots, z_signs(arch.action_observables, arch.n_qubits))


def _angles(arch: PqcArchitecture, c: _Compiled, params: PqcParameters, x: np.ndarray) -> np.ndarray:
    """Angle rows for squashed states ``x`` of shape (B, state_dim)."""
    angles = np.empty((x.shape[0], c.program.n_slots))
    angles[:, c.theta_slots.ravel()] = params.theta.ravel()[None, :]
    angles[:, c.enc_slots.ravel()] = (params.lam[None, :, :] * x[:, None, :]).reshape(x.shape[0], -1)
    return angles


@dataclass
class QValueOutput:
    q: np.ndarray
    expectations: np.ndarray


def expectations_batch(arch: PqcArchitecture, params: PqcParameters, states: np.ndarray) -> np.ndarray:
    """<O_a> for a batch of raw states; returns (B, n_actions)."""
    states = np.atleast_2d(_check_state(arch, states))
    c = _compile(arch)
    amps = c.program.run(_angles(arch, c, params, squash(states)))
    probs = amps.real**2 + amps.imag**2
    return np.clip(probs @ c.signs.T, -1.0, 1.0)


def q_values(arch: PqcArchitecture, params: PqcParameters, state: Sequence[float]) -> QValueOutput:
    params.validate(arch)
    state = _check_state(arch, np.asarray(state))
    if state.ndim != 1:
        raise UsageError("q_values takes a single state; use q_values_batch for batches")
    e = expectations_batch(arch, params, state[None, :])[0]
    return QValueOutput(params.w * e, e)


def q_values_batch(arch: PqcArchitecture, params: PqcParameters, states: np.ndarray) -> np.ndarray:
    return params.w[None, :] * expectations_batch(arch, params, states)


def _fold(arch: PqcArchitecture, c: _Compiled, angle_grad: np.ndarray, x: np.ndarray, w_grad: np.ndarray) -> PqcParameters:
    """Map per-slot gradients (B, n_slots) back onto parameter shapes, summing over B."""
    g_theta = angle_grad[:, c.theta_slots].sum(axis=0)
    g_lam = (angle_grad[:, c.enc_slots] * x[:, None, :]).sum(axis=0)
    return PqcParameters(g_theta, g_lam, w_grad)


def batch_gradients(
    arch: PqcArchitecture,
    params: PqcParameters,
    states: np.ndarray,
    upstream: np.ndarray,
    method: str = "parameter_shift",
) -> PqcParameters:
    """Gradient of sum_b sum_a upstream[b, a] * q[b, a] w.r.t. every parameter.

    ``method`` is ``"parameter_shift"`` (two circuits per angle, shifted by
    +-pi/2) or ``"adjoint"`` (one reverse sweep per state). Both are exact.
    """
    params.validate(arch)
    states = np.atleast_2d(_check_state(arch, states))
    upstream = np.atleast_2d(np.asarray(upstream, dtype=np.float64))
    if upstream.shape != (states.shape[0], arch.n_actions):
        raise ConfigurationError(
            f"upstream has shape {upstream.shape}, expected {(states.shape[0], arch.n_actions)}"
        )
    c = _compile(arch)
    x = squash(states)
    angles = _angles(arch, c, params, x)
    if method == "parameter_shift":
        b, s = angles.shape
        shifted = np.repeat(angles[:, None, :], 2 * s + 1, axis=1)
        k = np.arange(s)
        shifted[:, 1 + 2 * k, k] += SHIFT
        shifted[:, 2 + 2 * k, k] -= SHIFT
        amps = c.program.run(shifted.reshape(b * (2 * s + 1), s))
        e = ((amps.real**2 + amps.imag**2) @ c.signs.T).reshape(b, 2 * s + 1, -1)
        base = e[:, 0, :]
        de = 0.5 * (e[:, 1::2, :] - e[:, 2::2, :])  # (B, n_slots, n_actions)
        angle_grad = np.einsum("bka,ba->bk", de, upstream * params.w[None, :])
    elif method == "adjoint":
        diag = (upstream * params.w[None, :]) @ c.signs
        _, angle_grad = c.program.adjoint(angles, diag)
        amps = c.program.run(angles)
        base = (amps.real**2 + amps.imag**2) @ c.signs.T
    else:
        raise UsageError(f"unknown gradient method {method!r}")
    w_grad = (upstream * base).sum(axis=0)
    return _fold(arch, c, angle_grad, x, w_grad)


def gradients(
    arch: PqcArchitecture,
    params: PqcParameters,
    state: Sequence[float],
    upstream: Sequence[float],
    method: str = "parameter_shift",
) -> PqcParameters:
    """d(upstream . q)/d(params) for a single state."""
    state = _check_state(arch, np.asarray(state))
    upstream = np.asarray(upstream, dtype=np.float64)
    if state.ndim != 1 or upstream.shape != (arch.n_actions,):
        raise ConfigurationError(
            f"expected a single state and upstream of length {arch.n_actions}, got {upstream.shape}"
        )
    return batch_gradients(arch, params, state[None, :], upstream[None, :], method)


def to_json(arch: PqcArchitecture, params: PqcParameters) -> dict:
    return {"architecture": arch.to_dict(), "parameters": flatten(params).tolist()}


def from_json(d: dict) -> tuple[PqcArchitecture, PqcParameters]:
    arch = PqcArchitecture.from_dict(d["architecture"])
    return arch, unflatten(arch, d["parameters"])
