"""Uniform acceleration and the single-mode Minkowski -> Rindler map.

Each Minkowski qubit splits into a region-I / region-II pair::

    |0>  ->  cos r |0>_I |0>_II + sin r |1>_I |1>_II
    |1>  ->  |1>_I |0>_II

An accelerated observer only sees region I, so region II is traced out.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .qmath import DensityOperator, StateVector, partial_trace

R_MAX = math.pi / 4


@dataclass(frozen=True)
class AccelerationParam:
    r: float = 0.0

    def __post_init__(self):
        r = float(self.r)
        if not math.isfinite(r) or r < 0.0 or r > R_MAX + 1e-15:
            raise ValueError(f"acceleration parameter r={self.r!r} outside [0, pi/4]")
        object.__setattr__(self, "r", min(r, R_MAX))

    @classmethod
    def maximal(cls) -> "AccelerationParam":
        """Infinite-acceleration limit, r = pi/4."""
        return cls(R_MAX)

    @property
    def cos(self) -> float:
        return math.cos(self.r)

    @property
    def sin(self) -> float:
        return math.sin(self.r)


@dataclass(frozen=True)
class PhysicalAcceleration:
    a: float
    omega: float
    c: float = 1.0

    def __post_init__(self):
        if not (self.a >= 0):
            raise ValueError(f"acceleration must be >= 0, got {self.a!r}")
        if not (self.omega > 0 and math.isfinite(self.omega)):
            raise ValueError(f"mode frequency must be > 0, got {self.omega!r}")
        if not (self.c > 0 and math.isfinite(self.c)):
            raise ValueError(f"speed of light must be > 0, got {self.c!r}")


def r_from_physical(p: PhysicalAcceleration) -> AccelerationParam:
    """``tan r = exp(-pi * omega * c / a)``, with the a = 0 and a = inf limits."""
    if p.a == 0:
        return AccelerationParam(0.0)
    if math.isinf(p.a):
        return AccelerationParam.maximal()
    return AccelerationParam(math.atan(math.exp(-math.pi * p.omega * p.c / p.a)))


class RegisterAcceleration(tuple):
    """Per-qubit acceleration parameters, in register order."""

    def __new__(cls, values: Iterable):
        items = [v if isinstance(v, AccelerationParam) else AccelerationParam(v) for v in values]
        return super().__new__(cls, items)

    @classmethod
    def common(cls, r: float, num_qubits: int) -> "RegisterAcceleration":
        return cls([r] * num_qubits)

    @property
    def rs(self) -> tuple[float, ...]:
        return tuple(p.r for p in self)


def unruh_isometry(r) -> np.ndarray:
    """The 4x2 map from one Minkowski qubit to (region I, region II).

    Output index is ``2 * n_II + n_I`` (region I is the lower qubit).
    """
    r = r.r if isinstance(r, AccelerationParam) else AccelerationParam(r).r
    v = np.zeros((4, 2))
    v[0b00, 0] = math.cos(r)
    v[0b11, 0] = math.sin(r)
    v[0b01, 1] = 1.0
    return v


def unruh_embed(qubit_state, r):
    """Embed a single qubit into its two-mode Rindler form.

    Returns an object of the same kind over two qubits: qubit 0 is region I,
    qubit 1 is region II.
    """
    if qubit_state.num_qubits != 1:
        raise ValueError(f"unruh_embed takes one qubit, got {qubit_state.num_qubits}")
    v = unruh_isometry(r)
    if isinstance(qubit_state, StateVector):
        return StateVector(v @ qubit_state.amplitudes, normalized=qubit_state.normalized)
    if isinstance(qubit_state, DensityOperator):
        return DensityOperator(v @ qubit_state.entries @ v.T, normalized=qubit_state.normalized)
    raise TypeError(f"cannot embed {type(qubit_state).__name__}")


def accelerate_register(state: StateVector, acc: Sequence) -> DensityOperator:
    """Region-I density operator of an accelerated register.

    Every qubit ``k`` is embedded with its own ``r_k`` into the pair
    (region I -> qubit 2k, region II -> qubit 2k+1) of a ``2n``-qubit pure
    state, then all odd (region II) qubits are traced out.
    """
    acc = acc if isinstance(acc, RegisterAcceleration) else RegisterAcceleration(acc)
    n = state.num_qubits
    if len(acc) != n:
        raise ValueError(f"{len(acc)} acceleration parameters for a {n}-qubit register")
    # tensor of per-qubit isometries; qubit n-1 is the most significant factor
    big = np.ones((1, 1))
    for k in reversed(range(n)):
        big = np.kron(big, unruh_isometry(acc[k]))
    psi = StateVector(big @ state.amplitudes, normalized=state.normalized)
    return partial_trace(psi.density(), keep=range(0, 2 * n, 2))
