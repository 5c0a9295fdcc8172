"""Independent reference implementations used only by the tests.

Gates are built as full 2**n x 2**n matrices by Kronecker products, with
rotations obtained from the matrix exponential, and expectations as
<psi|O|psi> with O a dense matrix. Qubit 0 is the rightmost Kronecker factor,
matching the least-significant-bit layout of the simulator.
"""

import numpy as np
from scipy.linalg import expm

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
P0 = np.diag([1, 0]).astype(complex)
P1 = np.diag([0, 1]).astype(complex)
PAULI = {"RX": X, "RY": Y, "RZ": Z}


def kron_on(n, ops):
    """Kronecker product with ``ops[q]`` on qubit q and identity elsewhere."""
    out = np.array([[1.0 + 0j]])
    for q in reversed(range(n)):
        out = np.kron(out, ops.get(q, I2))
    return out


def gate_matrix(n, kind, target, angle=None, control=None):
    if kind == "CZ":
        return kron_on(n, {control: P0}) + kron_on(n, {control: P1, target: Z})
    return kron_on(n, {target: expm(-0.5j * angle * PAULI[kind])})


def observable_matrix(n, qubits):
    return kron_on(n, {q: Z for q in qubits})


def simulate(n, gates):
    """``gates``: iterable of (kind, target, angle, control)."""
    psi = np.zeros(2**n, dtype=complex)
    psi[0] = 1
    for kind, target, angle, control in gates:
        psi = gate_matrix(n, kind, target, angle, control) @ psi
    return psi


def expval(n, psi, qubits):
    return float(np.real(np.conj(psi) @ observable_matrix(n, qubits) @ psi))


def random_gates(rng, n, n_gates):
    gates = []
    for _ in range(n_gates):
        kinds = ["RX", "RY", "RZ"] + (["CZ"] if n > 1 else [])
        kind = kinds[rng.integers(len(kinds))]
        t = int(rng.integers(n))
        if kind == "CZ":
            c = int(rng.choice([q for q in range(n) if q != t]))
            gates.append((kind, t, None, c))
        else:
            gates.append((kind, t, float(rng.uniform(-2 * np.pi, 2 * np.pi)), None))
    return gates


def pqc_circuit(n_qubits, theta, lam, state, encoding_map=None):
    """Layered RY/RZ + CZ ring + arctan-squashed RX re-uploading, spelled out directly."""
    n_layers, d = lam.shape
    enc = encoding_map or [i % n_qubits for i in range(d)]
    x = np.arctan(np.asarray(state, dtype=float))
    if n_qubits == 1:
        ring = []
    elif n_qubits == 2:
        ring = [(0, 1)]
    else:
        ring = [(q, (q + 1) % n_qubits) for q in range(n_qubits)]
    gates = []
    for layer in range(n_layers):
        for q in range(n_qubits):
            gates.append(("RY", q, theta[layer, q, 0], None))
            gates.append(("RZ", q, theta[layer, q, 1], None))
        for a, b in ring:
            gates.append(("CZ", b, None, a))
        for i in range(d):
            gates.append(("RX", enc[i], lam[layer, i] * x[i], None))
    return gates


def pqc_q(n_qubits, theta, lam, w, observables, state, encoding_map=None):
    psi = simulate(n_qubits, pqc_circuit(n_qubits, theta, lam, state, encoding_map))
    return np.array([w[a] * expval(n_qubits, psi, obs) for a, obs in enumerate(observables)])


def central_difference(f, x, h=1e-4):
    """Gradient of scalar ``f`` at flat vector ``x`` by central differences."""
    x = np.asarray(x, dtype=float)
    g = np.zeros_like(x)
    for i in range(x.size):
        xp, xm = x.copy(), x.copy()
        xp[i] += h
        xm[i] -= h
        g[i] = (f(xp) - f(xm)) / (2 * h)
    return g


def cartpole_step(state, action):
    """Cart-pole dynamics in the Lagrangian form (Barto, Sutton & Anderson 1983)."""
    g, mc, mp, l, f_mag, dt = 9.8, 1.0, 0.1, 0.5, 10.0, 0.02
    x, xd, th, thd = (float(v) for v in state)
    f = f_mag if action == 1 else -f_mag
    s, c = np.sin(th), np.cos(th)
    num = g * s + c * ((-f - mp * l * thd * thd * s) / (mc + mp))
    den = l * (4.0 / 3.0 - mp * c * c / (mc + mp))
    thdd = num / den
    xdd = (f + mp * l * (thd * thd * s - thdd * c)) / (mc + mp)
    new = np.array([x + dt * xd, xd + dt * xdd, th + dt * thd, thd + dt * thdd])
    done = abs(new[0]) > 2.4 or abs(new[2]) > 12 * 2 * np.pi / 360
    return new, 1.0, bool(done)
