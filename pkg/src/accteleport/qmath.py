"""Dense complex linear algebra for registers of one to four qubits.

Bit convention used everywhere in the package: qubit ``k`` is bit ``k`` of
the basis-state label, so qubit 0 is the least significant bit. A ket
written as a string such as ``|01>`` lists qubits from the highest index to
the lowest (``|q1 q0>``). :func:`tensor` follows ``numpy.kron``, so the
left operand ends up on the higher-indexed qubits::

    tensor(|0>, |1>) == |01>   (qubit 1 = 0, qubit 0 = 1, label 1)

To build ``register = qubit 0 (x) qubits 1..n`` write
``tensor(rest, first)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

EXACT_TOL = 1e-12
PIPELINE_TOL = 1e-10
IMPOSSIBLE_PROB = 1e-14


class InvariantViolation(ValueError):
    """Raised when a state or operator fails a structural check."""


class ImpossibleBranch(Exception):
    """A projection whose probability is below ``IMPOSSIBLE_PROB``."""

    def __init__(self, probability: float):
        super().__init__(f"impossible branch (probability={probability:.3e})")
        self.probability = probability


def _num_qubits(dim: int) -> int:
    n = int(dim).bit_length() - 1
    if n < 1 or 2**n != dim:
        raise InvariantViolation(f"dimension {dim} is not a power of two >= 2")
    return n


def _frozen(arr) -> np.ndarray:
    out = np.array(arr, dtype=complex)
    if not np.all(np.isfinite(out)):
        raise InvariantViolation("non-finite entries")
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class StateVector:
    amplitudes: np.ndarray
    normalized: bool = True

    def __post_init__(self):
        amps = _frozen(self.amplitudes).reshape(-1)
        object.__setattr__(self, "amplitudes", amps)
        _num_qubits(amps.size)
        if self.normalized:
            norm = float(np.vdot(amps, amps).real)
            if abs(norm - 1.0) > EXACT_TOL:
                raise InvariantViolation(f"squared norm {norm!r} != 1")

    @property
    def num_qubits(self) -> int:
        return _num_qubits(self.amplitudes.size)

    @classmethod
    def basis(cls, label: int, num_qubits: int) -> "StateVector":
        amps = np.zeros(2**num_qubits, dtype=complex)
        amps[label] = 1.0
        return cls(amps)

    @classmethod
    def from_bits(cls, bits: str) -> "StateVector":
        """``from_bits("01")`` is ``|01>``: qubit 1 = 0, qubit 0 = 1."""
        return cls.basis(int(bits, 2), len(bits))

    def density(self) -> "DensityOperator":
        return DensityOperator(np.outer(self.amplitudes, self.amplitudes.conj()))


@dataclass(frozen=True, eq=False)
class DensityOperator:
    entries: np.ndarray
    normalized: bool = True
    validate: bool = True

    def __post_init__(self):
        m = _frozen(self.entries)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise InvariantViolation(f"density operator must be square, got {m.shape}")
        _num_qubits(m.shape[0])
        object.__setattr__(self, "entries", m)
        if self.validate:
            check_density(m, normalized=self.normalized)

    @property
    def num_qubits(self) -> int:
        return _num_qubits(self.entries.shape[0])

    @property
    def trace(self) -> float:
        return float(np.trace(self.entries).real)


OPERATOR_KINDS = ("unitary", "projector", "general")


@dataclass(frozen=True, eq=False)
class Operator:
    entries: np.ndarray
    kind: str = "general"

    def __post_init__(self):
        m = _frozen(self.entries)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise InvariantViolation(f"operator must be square, got {m.shape}")
        _num_qubits(m.shape[0])
        object.__setattr__(self, "entries", m)
        if self.kind not in OPERATOR_KINDS:
            raise ValueError(f"unknown operator kind {self.kind!r}")
        eye = np.eye(m.shape[0])
        if self.kind == "unitary" and not np.allclose(m @ m.conj().T, eye, rtol=0, atol=PIPELINE_TOL):
            raise InvariantViolation("operator is not unitary")
        if self.kind == "projector":
            if not (np.allclose(m @ m, m, rtol=0, atol=PIPELINE_TOL)
                    and np.allclose(m, m.conj().T, rtol=0, atol=PIPELINE_TOL)):
                raise InvariantViolation("operator is not an orthogonal projector")

    @property
    def num_qubits(self) -> int:
        return _num_qubits(self.entries.shape[0])


QuantumObject = Union[StateVector, DensityOperator, Operator]


def check_density(m: np.ndarray, normalized: bool = True, tol: float = PIPELINE_TOL) -> None:
    """Raise :class:`InvariantViolation` unless ``m`` is a valid density matrix."""
    herm_err = np.max(np.abs(m - m.conj().T))
    if herm_err > tol:
        raise InvariantViolation(f"not Hermitian (max deviation {herm_err:.3e})")
    tr = np.trace(m).real
    if normalized:
        if abs(tr - 1.0) > tol:
            raise InvariantViolation(f"trace {tr!r} != 1")
    elif not (0.0 < tr <= 1.0 + tol):
        raise InvariantViolation(f"trace {tr!r} outside (0, 1]")
    lam_min = float(np.linalg.eigvalsh(0.5 * (m + m.conj().T))[0])
    if lam_min < -tol:
        raise InvariantViolation(f"not positive semidefinite (min eigenvalue {lam_min:.3e})")


# single-qubit constants
I2 = Operator(np.eye(2), "unitary")
X = Operator([[0, 1], [1, 0]], "unitary")
Y = Operator([[0, -1j], [1j, 0]], "unitary")
Z = Operator([[1, 0], [0, -1]], "unitary")
PAULI = {"I": I2, "X": X, "Y": Y, "Z": Z}

KET0 = StateVector([1, 0])
KET1 = StateVector([0, 1])
KET_PLUS = StateVector(np.array([1, 1]) / np.sqrt(2))
KET_MINUS = StateVector(np.array([1, -1]) / np.sqrt(2))


def tensor(a: QuantumObject, b: QuantumObject) -> QuantumObject:
    """Kronecker product; ``b`` lands on the low-indexed qubits."""
    if type(a) is not type(b):
        raise TypeError(f"cannot tensor {type(a).__name__} with {type(b).__name__}")
    if isinstance(a, StateVector):
        return StateVector(np.kron(a.amplitudes, b.amplitudes), a.normalized and b.normalized)
    if isinstance(a, DensityOperator):
        return DensityOperator(np.kron(a.entries, b.entries),
                               normalized=a.normalized and b.normalized,
                               validate=a.validate and b.validate)
    kind = a.kind if a.kind == b.kind else "general"
    return Operator(np.kron(a.entries, b.entries), kind)


def _axes(n: int, qubits: Sequence[int]) -> list[int]:
    # C-order reshape to [2]*n puts qubit n-1 on axis 0
    return [n - 1 - q for q in qubits]


def _check_indices(n: int, qubits: Sequence[int]) -> None:
    if len(set(qubits)) != len(qubits):
        raise ValueError(f"repeated qubit index in {list(qubits)}")
    for q in qubits:
        if not 0 <= q < n:
            raise ValueError(f"qubit index {q} out of range for {n} qubits")


def partial_trace(rho: DensityOperator, keep) -> DensityOperator:
    """Reduce ``rho`` to the qubits in ``keep``.

    Kept qubits are renumbered in increasing order, so the smallest kept
    index becomes qubit 0 of the result.
    """
    n = rho.num_qubits
    keep = sorted(set(keep))
    if not keep:
        raise ValueError("keep set is empty")
    _check_indices(n, keep)
    drop = [q for q in range(n) if q not in keep]
    row = _axes(n, keep[::-1]) + _axes(n, drop[::-1])
    t = rho.entries.reshape([2] * (2 * n))
    t = np.transpose(t, row + [a + n for a in row])
    dk, dd = 2 ** len(keep), 2 ** len(drop)
    out = np.einsum("ajbj->ab", t.reshape(dk, dd, dk, dd))
    return DensityOperator(out, normalized=rho.normalized, validate=rho.validate)


def embed_operator(op: Operator, on_qubits: Sequence[int], num_qubits: int) -> np.ndarray:
    """Full ``2^n x 2^n`` matrix of ``op`` acting on ``on_qubits``.

    ``on_qubits[j]`` receives the operator's own qubit ``j``.
    """
    k = op.num_qubits
    if len(on_qubits) != k:
        raise ValueError(f"operator acts on {k} qubit(s), got {len(on_qubits)} target(s)")
    _check_indices(num_qubits, on_qubits)
    n = num_qubits
    g = op.entries.reshape([2] * (2 * k))
    full = np.eye(2**n, dtype=complex).reshape([2] * (2 * n))
    # contract the operator's input legs into the identity's output legs
    op_out = _axes(k, range(k))
    op_in = [a + k for a in op_out]
    reg = _axes(n, on_qubits)
    res = np.tensordot(g, full, axes=(op_in, reg))
    # res axes: op outputs (ordered by op_out), then remaining identity axes
    rest = [a for a in range(2 * n) if a not in reg]
    order = [None] * (2 * n)
    for j, a in enumerate(op_out):
        order[reg[j]] = a
    for j, a in enumerate(rest):
        order[a] = k + j
    res = np.transpose(res, order)
    return res.reshape(2**n, 2**n)


def apply(op: Operator, target, on_qubits: Sequence[int] | None = None):
    """``U|psi>`` for vectors, ``U rho U^dagger`` for density operators."""
    n = target.num_qubits
    if on_qubits is None:
        on_qubits = list(range(n))
    u = embed_operator(op, on_qubits, n)
    if isinstance(target, StateVector):
        return StateVector(u @ target.amplitudes, normalized=target.normalized and op.kind == "unitary")
    if isinstance(target, DensityOperator):
        out = u @ target.entries @ u.conj().T
        if op.kind == "unitary":
            return DensityOperator(out, normalized=target.normalized, validate=target.validate)
        return DensityOperator(out, normalized=False, validate=False)
    raise TypeError(f"cannot apply an operator to {type(target).__name__}")


def project(rho: DensityOperator, proj: Operator, on_qubits: Sequence[int] | None = None):
    """Projective measurement outcome: returns ``(probability, normalized branch)``.

    Raises :class:`ImpossibleBranch` when the probability is at most
    ``IMPOSSIBLE_PROB``.
    """
    if proj.kind != "projector":
        raise ValueError("project() needs an operator of kind 'projector'")
    n = rho.num_qubits
    if on_qubits is None:
        on_qubits = list(range(n))
    p = embed_operator(proj, on_qubits, n)
    out = p @ rho.entries @ p.conj().T
    prob = float(np.trace(out).real)
    if prob <= IMPOSSIBLE_PROB:
        raise ImpossibleBranch(prob)
    return prob, DensityOperator(out / prob, validate=rho.validate)


def fidelity_pure(psi: StateVector, rho: DensityOperator) -> float:
    """``<psi|rho|psi>``."""
    if psi.num_qubits != rho.num_qubits:
        raise ValueError(f"dimension mismatch: {psi.num_qubits} vs {rho.num_qubits} qubits")
    a = psi.amplitudes
    return float(np.vdot(a, rho.entries @ a).real)


def projector(psi: StateVector) -> Operator:
    return Operator(np.outer(psi.amplitudes, psi.amplitudes.conj()), "projector")
