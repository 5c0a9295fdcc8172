"""Exact statevector simulation for few-qubit circuits.

Gate alphabet is {RX, RY, RZ, CZ}. Rotations follow exp(-i * angle/2 * P).
Amplitudes are stored flat, indexed by the computational-basis integer with
qubit 0 as the least-significant bit, so ``|q2 q1 q0>`` lives at index
``q0 + 2*q1 + 4*q2``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import _kernels
from .errors import ConfigurationError, UsageError

MAX_QUBITS = 12
GATE_KINDS = ("RX", "RY", "RZ", "CZ")
_KIND_CODES = {"RX": _kernels.RX, "RY": _kernels.RY, "RZ": _kernels.RZ, "CZ": _kernels.CZ}


@dataclass(frozen=True)
class Gate:
    kind: str
    target: int
    angle: float | None = None
    control: int | None = None

    def __post_init__(self):
        if self.kind not in GATE_KINDS:
            raise UsageError(f"unknown gate kind {self.kind!r}")
        if self.kind == "CZ":
            if self.control is None:
                raise UsageError("CZ requires a control qubit")
            if self.control == self.target:
                raise UsageError("CZ control and target must differ")
        elif self.angle is None:
            raise UsageError(f"{self.kind} requires an angle")

    def inverse(self) -> Gate:
        if self.kind == "CZ":
            return self
        return Gate(self.kind, self.target, -self.angle)


@dataclass(frozen=True)
class Observable:
    """Tensor product of Pauli-Z on ``qubits``, identity elsewhere."""

    qubits: tuple[int, ...]

    def __post_init__(self):
        qs = tuple(int(q) for q in self.qubits)
        if not qs:
            raise ConfigurationError("observable needs at least one qubit")
        if len(set(qs)) != len(qs):
            raise ConfigurationError(f"duplicate qubit in observable {qs}")
        if min(qs) < 0:
            raise ConfigurationError(f"negative qubit index in observable {qs}")
        object.__setattr__(self, "qubits", qs)

    @property
    def mask(self) -> int:
        m = 0
        for q in self.qubits:
            m |= 1 << q
        return m

    def validate(self, n_qubits: int) -> None:
        if max(self.qubits) >= n_qubits:
            raise UsageError(f"observable {self.qubits} out of range for {n_qubits} qubits")


@dataclass
class StateVector:
    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        if len(self.amplitudes) != 1 << self.n_qubits:
            raise UsageError(
                f"expected {1 << self.n_qubits} amplitudes, got {len(self.amplitudes)}"
            )

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def copy(self) -> StateVector:
        return StateVector(self.n_qubits, self.amplitudes.copy())


def _check_qubits(n_qubits: int) -> None:
    if not isinstance(n_qubits, (int, np.integer)) or not 1 <= n_qubits <= MAX_QUBITS:
        raise ConfigurationError(f"n_qubits must be in 1..{MAX_QUBITS}, got {n_qubits!r}")


def zero_state(n_qubits: int) -> StateVector:
    _check_qubits(n_qubits)
    amps = np.zeros(1 << n_qubits, dtype=np.complex128)
    amps[0] = 1.0
    return StateVector(int(n_qubits), amps)


def rotation_matrix(kind: str, angle: float) -> np.ndarray:
    c, s = np.cos(angle / 2), np.sin(angle / 2)
    if kind == "RX":
        return np.array([[c, -1j * s], [-1j * s, c]])
    if kind == "RY":
        return np.array([[c, -s], [s, c]], dtype=np.complex128)
    if kind == "RZ":
        return np.array([[c - 1j * s, 0], [0, c + 1j * s]])
    raise UsageError(f"{kind} is not a rotation")


def _check_gate(gate: Gate, n_qubits: int) -> None:
    wires = [gate.target] if gate.control is None else [gate.target, gate.control]
    for q in wires:
        if not 0 <= q < n_qubits:
            raise UsageError(f"qubit {q} out of range for {n_qubits} qubits")


def apply_gate(state: StateVector, gate: Gate) -> StateVector:
    """Return a new state with ``gate`` applied; the input is left untouched."""
    n = state.n_qubits
    _check_gate(gate, n)
    # axis order after reshape: (higher qubits, target bit, lower qubits)
    psi = state.amplitudes.reshape(1 << (n - gate.target - 1), 2, 1 << gate.target)
    if gate.kind == "CZ":
        out = state.amplitudes.copy()
        idx = np.arange(1 << n)
        both = ((idx >> gate.target) & 1) & ((idx >> gate.control) & 1)
        out[both == 1] *= -1
        return StateVector(n, out)
    u = rotation_matrix(gate.kind, gate.angle)
    out = np.einsum("ij,ajb->aib", u, psi).reshape(-1)
    return StateVector(n, out)


def apply_circuit(state: StateVector, gates: Sequence[Gate]) -> StateVector:
    for g in gates:
        state = apply_gate(state, g)
    return state


def z_signs(observables: Sequence[Observable], n_qubits: int) -> np.ndarray:
    """(n_obs, 2**n) table of (-1)**parity(b & mask)."""
    idx = np.arange(1 << n_qubits)
    rows = []
    for obs in observables:
        obs.validate(n_qubits)
        parity = np.zeros_like(idx)
        for q in obs.qubits:
            parity ^= (idx >> q) & 1
        rows.append(1 - 2 * parity)
    return np.array(rows, dtype=np.float64).reshape(len(rows), 1 << n_qubits)


def expectation(state: StateVector, obs: Observable) -> float:
    signs = z_signs([obs], state.n_qubits)[0]
    val = float(np.dot(state.probabilities(), signs))
    return min(1.0, max(-1.0, val))


@dataclass(frozen=True)
class Program:
    """A gate sequence compiled for the batched kernels.

    Each parametrized gate reads its angle from a slot in a per-circuit angle
    row; CZ gates have slot -1.
    """

    n_qubits: int
    kinds: np.ndarray
    targets: np.ndarray
    controls: np.ndarray
    slots: np.ndarray
    n_slots: int

    @classmethod
    def from_gates(cls, gates: Sequence[Gate], n_qubits: int) -> Program:
        """Compile ``gates``; every rotation gets its own slot, in order."""
        _check_qubits(n_qubits)
        kinds, targets, controls, slots = [], [], [], []
        n_slots = 0
        for g in gates:
            _check_gate(g, n_qubits)
            kinds.append(_KIND_CODES[g.kind])
            targets.append(g.target)
            controls.append(-1 if g.control is None else g.control)
            if g.kind == "CZ":
                slots.append(-1)
            else:
                slots.append(n_slots)
                n_slots += 1
        as_arr = lambda xs: np.asarray(xs, dtype=np.int64)
        return cls(n_qubits, as_arr(kinds), as_arr(targets), as_arr(controls), as_arr(slots), n_slots)

    def run(self, angles: np.ndarray) -> np.ndarray:
        """Simulate one circuit per row of ``angles``; returns (N, 2**n) amplitudes."""
        angles = np.ascontiguousarray(np.atleast_2d(angles), dtype=np.float64)
        if angles.shape[1] != self.n_slots:
            raise UsageError(f"expected {self.n_slots} angles per circuit, got {angles.shape[1]}")
        return _kernels.run_program(
            self.kinds, self.targets, self.controls, self.slots, angles, self.n_qubits
        )

    def adjoint(self, angles: np.ndarray, diag: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Expectation of a per-circuit diagonal observable and its angle gradient."""
        angles = np.ascontiguousarray(np.atleast_2d(angles), dtype=np.float64)
        diag = np.ascontiguousarray(np.atleast_2d(diag), dtype=np.float64)
        if angles.shape[1] != self.n_slots:
            raise UsageError(f"expected {self.n_slots} angles per circuit, got {angles.shape[1]}")
        return _kernels.adjoint_program(
            self.kinds, self.targets, self.controls, self.slots, angles, self.n_qubits, diag
        )
