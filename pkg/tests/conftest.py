"""Brute-force reference implementation shared by the test modules.

Everything here is built from explicit loops over basis labels and from
the Kraus form of the single-mode Unruh map, so it shares no code path
with the package's tensor/partial-trace/isometry machinery.
"""
from __future__ import annotations

import itertools
import math

import numpy as np
import pytest

SQ2 = math.sqrt(2.0)

PAULI_REF = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}

# 2-qubit vectors indexed by bit(first) + 2 * bit(second)
BELL_REF = {
    "psi_plus": np.array([1, 0, 0, 1]) / SQ2,
    "psi_minus": np.array([1, 0, 0, -1]) / SQ2,
    "phi_plus": np.array([0, 1, 1, 0]) / SQ2,
    "phi_minus": np.array([0, 1, -1, 0]) / SQ2,
}
CHARLIE_REF = {
    "z0": np.array([1, 0]),
    "z1": np.array([0, 1]),
    "x_plus": np.array([1, 1]) / SQ2,
    "x_minus": np.array([1, -1]) / SQ2,
}

# channel kets as lists of (amplitude, (q1, q2, q3))
CHANNEL_REF = {
    "W": [(1 / math.sqrt(3), b) for b in ((1, 0, 0), (0, 1, 0), (0, 0, 1))],
    "GHZ": [(1 / SQ2, b) for b in ((0, 0, 0), (1, 1, 1))],
    "GHZLike": [(0.5, b) for b in ((1, 0, 0), (0, 1, 0), (0, 0, 1), (1, 1, 1))],
}


def bit(label: int, q: int) -> int:
    return (label >> q) & 1


def local_op(n: int, factors: dict) -> np.ndarray:
    """Operator on n qubits from {qubit: 2x2} and {(qa, qb): 4x4} factors."""
    dim = 2 ** n
    m = np.zeros((dim, dim), dtype=complex)
    for i in range(dim):
        for j in range(dim):
            v = 1.0 + 0j
            touched = set()
            for key, f in factors.items():
                if isinstance(key, tuple):
                    qa, qb = key
                    v *= f[bit(i, qa) + 2 * bit(i, qb), bit(j, qa) + 2 * bit(j, qb)]
                    touched |= {qa, qb}
                else:
                    v *= f[bit(i, key), bit(j, key)]
                    touched.add(key)
            for q in range(n):
                if q not in touched and bit(i, q) != bit(j, q):
                    v = 0
            m[i, j] = v
    return m


def kraus(r: float):
    c, s = math.cos(r), math.sin(r)
    return (np.array([[c, 0], [0, 1]], dtype=complex),
            np.array([[0, 0], [s, 0]], dtype=complex))


def unruh_ref(rho: np.ndarray, rs) -> np.ndarray:
    """Apply the region-I Unruh channel qubit by qubit in Kraus form."""
    n = len(rs)
    for q, r in enumerate(rs):
        out = np.zeros_like(rho)
        for k in kraus(r):
            K = local_op(n, {q: k})
            out += K @ rho @ K.conj().T
        rho = out
    return rho


def channel_ref(kind: str, rs) -> np.ndarray:
    psi = np.zeros(8, dtype=complex)
    for amp, (q1, q2, q3) in CHANNEL_REF[kind]:
        psi[q1 + 2 * q2 + 4 * q3] = amp
    return unruh_ref(np.outer(psi, psi.conj()), rs)


def info_ref(alpha, beta, r0=None) -> np.ndarray:
    psi = np.array([alpha, beta], dtype=complex)
    rho = np.outer(psi, psi.conj())
    return rho if r0 is None else unruh_ref(rho, [r0])


def branch_ref(kind, alpha, beta, rs, bell, charlie, pauli, r0=None):
    """(probability, conditional fidelity, unnormalized overlap) for one branch."""
    rho_ch = channel_ref(kind, rs)
    rho_in = info_ref(alpha, beta, r0)
    full = np.zeros((16, 16), dtype=complex)
    for i in range(16):
        for j in range(16):
            full[i, j] = rho_in[i & 1, j & 1] * rho_ch[i >> 1, j >> 1]
    b = BELL_REF[bell]
    c = CHARLIE_REF[charlie]
    P = local_op(4, {(0, 1): np.outer(b, b.conj()), 3: np.outer(c, c.conj())})
    U = local_op(4, {2: PAULI_REF[pauli]})
    post = U @ P @ full @ P @ U.conj().T
    p = float(np.trace(post).real)
    bob = np.zeros((2, 2), dtype=complex)
    for i in range(16):
        for j in range(16):
            if all(bit(i, q) == bit(j, q) for q in (0, 1, 3)):
                bob[bit(i, 2), bit(j, 2)] += post[i, j]
    psi = np.array([alpha, beta], dtype=complex)
    overlap = float((psi.conj() @ bob @ psi).real)
    return p, (overlap / p if p > 1e-14 else float("nan")), overlap


def random_info(rng, complex_amps=True):
    v = rng.normal(size=2) + (1j * rng.normal(size=2) if complex_amps else 0)
    v = v / np.linalg.norm(v)
    return complex(v[0]), complex(v[1])


@pytest.fixture
def rng():
    return np.random.default_rng(20240617)


def grid_points(values):
    return list(itertools.product(values, repeat=3))
