"""Compiled statevector kernels.

A circuit is passed as parallel integer arrays (``kinds``, ``targets``,
``controls``, ``slots``) and a real ``angles`` matrix with one row per circuit
instance; gate ``g`` reads its angle from ``angles[b, slots[g]]``. Qubit 0 is
the least-significant bit of the basis index.
"""

import numpy as np
from numba import njit

RX, RY, RZ, CZ = 0, 1, 2, 3


@njit(cache=True, nogil=True)
def _apply(psi, kind, target, control, angle, dim):
    m = 1 << target
    if kind == CZ:
        mc = 1 << control
        for i in range(dim):
            if (i & m) and (i & mc):
                psi[i] = -psi[i]
        return
    c = np.cos(0.5 * angle)
    s = np.sin(0.5 * angle)
    if kind == RZ:
        lo = complex(c, -s)
        hi = complex(c, s)
        for i in range(dim):
            if i & m:
                psi[i] = psi[i] * hi
            else:
                psi[i] = psi[i] * lo
        return
    for i in range(dim):
        if i & m:
            continue
        j = i | m
        a0 = psi[i]
        a1 = psi[j]
        if kind == RX:
            psi[i] = c * a0 - 1j * s * a1
            psi[j] = -1j * s * a0 + c * a1
        else:
            psi[i] = c * a0 - s * a1
            psi[j] = s * a0 + c * a1


@njit(cache=True, nogil=True)
def run_program(kinds, targets, controls, slots, angles, n_qubits):
    """Simulate every row of ``angles`` from |0...0>; returns (N, 2**n) states."""
    dim = 1 << n_qubits
    n_circ = angles.shape[0]
    out = np.zeros((n_circ, dim), dtype=np.complex128)
    for b in range(n_circ):
        psi = out[b]
        psi[0] = 1.0
        for g in range(kinds.shape[0]):
            ang = 0.0
            if slots[g] >= 0:
                ang = angles[b, slots[g]]
            _apply(psi, kinds[g], targets[g], controls[g], ang, dim)
    return out


@njit(cache=True, nogil=True)
def adjoint_program(kinds, targets, controls, slots, angles, n_qubits, diag):
    """Values and angle gradients of <psi|D|psi> for diagonal observables.

    ``diag`` has shape (N, 2**n): one real diagonal observable per circuit.
    Returns (values (N,), grads (N, n_slots)).
    """
    dim = 1 << n_qubits
    n_circ = angles.shape[0]
    n_gates = kinds.shape[0]
    values = np.zeros(n_circ)
    grads = np.zeros((n_circ, angles.shape[1]))
    psi = np.zeros(dim, dtype=np.complex128)
    lam = np.zeros(dim, dtype=np.complex128)
    for b in range(n_circ):
        psi[:] = 0.0
        psi[0] = 1.0
        for g in range(n_gates):
            ang = 0.0
            if slots[g] >= 0:
                ang = angles[b, slots[g]]
            _apply(psi, kinds[g], targets[g], controls[g], ang, dim)
        val = 0.0
        for i in range(dim):
            lam[i] = diag[b, i] * psi[i]
            val += diag[b, i] * (psi[i].real ** 2 + psi[i].imag ** 2)
        values[b] = val
        for g in range(n_gates - 1, -1, -1):
            kind = kinds[g]
            ang = 0.0
            if slots[g] >= 0:
                ang = angles[b, slots[g]]
                # d/dangle of <D> = Im <lam| P |psi_after>
                m = 1 << targets[g]
                acc = 0.0 + 0.0j
                for i in range(dim):
                    if kind == RZ:
                        p = -psi[i] if (i & m) else psi[i]
                    elif kind == RX:
                        p = psi[i ^ m]
                    else:
                        p = 1j * psi[i ^ m] if (i & m) else -1j * psi[i ^ m]
                    acc += np.conj(lam[i]) * p
                grads[b, slots[g]] += acc.imag
            _apply(psi, kind, targets[g], controls[g], -ang, dim)
            _apply(lam, kind, targets[g], controls[g], -ang, dim)
    return values, grads
