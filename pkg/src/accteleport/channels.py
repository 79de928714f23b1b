"""Three-qubit channel states, their accelerated region-I density operators,
and an audit of the published element tables against first principles.

Matrix positions are 1-based ``(row, col)`` as printed; position ``i``
corresponds to basis label ``i - 1`` with channel qubit 1 as the least
significant bit (qubit 3 the most significant).
"""
from __future__ import annotations

import csv
import enum
import io
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .qmath import DensityOperator, StateVector
from .rindler import RegisterAcceleration, accelerate_register


class ChannelKind(enum.Enum):
    W = "W"
    GHZ = "GHZ"
    GHZLike = "GHZLike"

    @property
    def normalization_probability(self) -> float:
        return {"W": 1 / 3, "GHZ": 1 / 2, "GHZLike": 1 / 4}[self.value]

    @classmethod
    def parse(cls, text: str) -> "ChannelKind":
        key = text.strip().lower().replace("-", "").replace("_", "")
        for kind in cls:
            if kind.value.lower() == key:
                return kind
        raise ValueError(f"unknown channel {text!r} (expected W, GHZ or GHZLike)")


def _label(q1: int, q2: int, q3: int) -> int:
    return q1 | (q2 << 1) | (q3 << 2)


# terms as (amplitude, (q1, q2, q3))
_MINKOWSKI = {
    ChannelKind.W: [(1 / math.sqrt(3), b) for b in ((1, 0, 0), (0, 1, 0), (0, 0, 1))],
    ChannelKind.GHZ: [(1 / math.sqrt(2), b) for b in ((0, 0, 0), (1, 1, 1))],
    ChannelKind.GHZLike: [(0.5, b) for b in ((1, 0, 0), (0, 1, 0), (0, 0, 1), (1, 1, 1))],
}


def minkowski_state(kind: ChannelKind) -> StateVector:
    amps = np.zeros(8, dtype=complex)
    for amp, bits in _MINKOWSKI[kind]:
        amps[_label(*bits)] = amp
    return StateVector(amps)


def _as_acc(acc) -> RegisterAcceleration:
    acc = acc if isinstance(acc, RegisterAcceleration) else RegisterAcceleration(acc)
    if len(acc) != 3:
        raise ValueError(f"channel needs 3 acceleration parameters, got {len(acc)}")
    return acc


def oracle_density(kind: ChannelKind, acc) -> DensityOperator:
    return accelerate_register(minkowski_state(kind), _as_acc(acc))


# Printed element tables. Each row: (positions filled, expression of
# (C, S) with C[k] = cos r_k and S[k] = sin r_k, k = 1..3).
# Transcribed as printed, including entries that disagree with the oracle.
Table = list[tuple[tuple[tuple[int, int], ...], Callable]]

W_TABLE: Table = [
    (((2, 2),), lambda C, S: C[2]**2 * C[3]**2),
    (((2, 3), (3, 2)), lambda C, S: C[1] * C[2] * C[3]**2),
    (((2, 5), (5, 2)), lambda C, S: C[1] * C[3] * C[2]**2),
    (((3, 3),), lambda C, S: C[1]**2 * C[3]**2),
    (((3, 5), (5, 3)), lambda C, S: C[2] * C[3] * C[1]**2),
    (((4, 4),), lambda C, S: S[2]**2 * C[3]**2 + S[1]**2 * C[3]**2),
    (((4, 6), (6, 4)), lambda C, S: C[2] * C[3] * S[1]**2),
    (((4, 7), (7, 4)), lambda C, S: C[2] * C[3] * S[1]**2),
    (((5, 5),), lambda C, S: C[1]**2 * C[2]**2),
    (((6, 6),), lambda C, S: S[1]**2 * C[2]**2 + S[3]**2 * C[2]**2),
    (((6, 7), (7, 6)), lambda C, S: C[1] * C[2] * S[3]**2),
    (((7, 7),), lambda C, S: S[1]**2 * C[1]**2 + S[3]**2 * C[1]**2),
    (((8, 8),), lambda C, S: S[1]**2 * S[2]**2 + S[1]**2 * S[3]**2 + S[2]**2 * S[3]**2),
]

GHZ_TABLE: Table = [
    (((1, 1),), lambda C, S: C[1]**2 * C[2]**2 * C[3]**2),
    (((2, 2),), lambda C, S: C[2]**2 * C[3]**2 * S[1]**2),
    (((3, 3),), lambda C, S: C[1]**2 * C[3]**2 * S[2]**2),
    (((4, 4),), lambda C, S: C[3]**2 * S[1]**2 * S[2]**2),
    (((5, 5),), lambda C, S: C[1]**2 * C[2]**2 * S[3]**2),
    (((6, 6),), lambda C, S: C[2]**2 * S[1]**2 * S[3]**2),
    (((7, 7),), lambda C, S: C[1]**2 * S[2]**2 * S[3]**2),
    (((8, 8),), lambda C, S: S[1]**2 * S[2]**2 * S[3]**2 + 1),
    (((8, 1), (1, 8)), lambda C, S: C[1] * C[2] * C[3]),
]

GHZLIKE_TABLE: Table = [
    (((2, 2),), lambda C, S: C[2]**2 * C[3]**2),
    (((2, 5), (5, 2)), lambda C, S: C[1] * C[3] * C[2]**2),
    (((2, 3), (3, 2)), lambda C, S: C[1] * C[2] * C[3]**2),
    (((2, 8), (8, 2)), lambda C, S: C[2] * C[3]),
    (((3, 3),), lambda C, S: C[1]**2 * C[3]**2),
    (((3, 5), (5, 3)), lambda C, S: C[2] * C[3] * C[1]**2),
    # printed "e38 = e38"; the second position is read as the mirror (8, 3)
    (((3, 8), (8, 3)), lambda C, S: C[1] * C[3]),
    (((4, 4),), lambda C, S: S[2]**2 * C[3]**2 + S[1]**2 * C[3]**2),
    (((4, 7), (7, 4)), lambda C, S: C[1] * C[3] * S[2]**2),
    (((4, 6), (6, 4)), lambda C, S: C[2] * C[3] * S[1]**2),
    (((5, 5),), lambda C, S: C[1]**2 * C[2]**2),
    (((5, 8), (8, 5)), lambda C, S: C[2] * C[2] * C[3]),
    (((6, 6),), lambda C, S: S[1]**2 * C[2]**2 + S[3]**2 * C[2]**2),
    (((6, 7), (7, 6)), lambda C, S: C[1] * C[2] * S[3]**2),
    (((7, 7),), lambda C, S: S[2]**2 * C[1]**2 + S[3]**2 * C[1]**2),
    (((8, 8),), lambda C, S: S[1]**2 * S[2]**2 + S[1]**2 * S[3]**2 + S[2]**2 * S[3]**2 + 1),
]

TABLES = {ChannelKind.W: W_TABLE, ChannelKind.GHZ: GHZ_TABLE, ChannelKind.GHZLike: GHZLIKE_TABLE}

# Alternative readings of ambiguous GHZ-like entries, resolved by the audit.
AMBIGUOUS_READINGS = {
    ("GHZLike", 8, 3): {
        "as printed (e38 only, mirror unset)": lambda C, S: 0.0,
        "mirror e83 = C1C3": lambda C, S: C[1] * C[3],
    },
    ("GHZLike", 5, 8): {
        "as printed C2C2C3": lambda C, S: C[2] * C[2] * C[3],
        "C1C2C3": lambda C, S: C[1] * C[2] * C[3],
        "C2^2": lambda C, S: C[2]**2,
        "C1C2": lambda C, S: C[1] * C[2],
    },
}


def _cs(acc: RegisterAcceleration):
    C = {k: p.cos for k, p in enumerate(acc, start=1)}
    S = {k: p.sin for k, p in enumerate(acc, start=1)}
    return C, S


def closed_form_density(kind: ChannelKind, acc) -> DensityOperator:
    """Fill the printed table times the kind's prefactor. Not validated."""
    acc = _as_acc(acc)
    C, S = _cs(acc)
    m = np.zeros((8, 8), dtype=complex)
    for positions, expr in TABLES[kind]:
        value = expr(C, S)
        for i, j in positions:
            m[i - 1, j - 1] = value
    return DensityOperator(kind.normalization_probability * m, validate=False)


def density_report(rho: DensityOperator) -> dict:
    """Structural checks reported, not enforced."""
    m = rho.entries
    return {
        "trace": float(np.trace(m).real),
        "hermitian_err": float(np.max(np.abs(m - m.conj().T))),
        "min_eigenvalue": float(np.linalg.eigvalsh(0.5 * (m + m.conj().T))[0]),
    }


@dataclass(frozen=True)
class ChannelRealization:
    kind: ChannelKind
    acc: RegisterAcceleration
    rho_oracle: DensityOperator
    rho_closed: DensityOperator

    @classmethod
    def build(cls, kind: ChannelKind, acc) -> "ChannelRealization":
        acc = _as_acc(acc)
        return cls(kind, acc, oracle_density(kind, acc), closed_form_density(kind, acc))

    def density(self, use_oracle: bool = True) -> DensityOperator:
        return self.rho_oracle if use_oracle else self.rho_closed


@dataclass(frozen=True)
class ElementDiscrepancy:
    kind: ChannelKind
    row: int
    col: int
    r_point: tuple[float, float, float]
    closed_value: complex
    oracle_value: complex
    abs_diff: float

    def sort_key(self):
        return (self.kind.value, self.row, self.col, self.r_point)


def audit_channel(kind: ChannelKind, grid: Iterable[Sequence[float]], tolerance: float = 1e-10
                  ) -> list[ElementDiscrepancy]:
    """Every (entry, grid point) where the printed table and oracle disagree."""
    grid = [tuple(float(x) for x in pt) for pt in grid]
    if not grid:
        raise ValueError("audit grid is empty")
    out = []
    for pt in grid:
        closed = closed_form_density(kind, pt).entries
        oracle = oracle_density(kind, pt).entries
        diff = np.abs(closed - oracle)
        for i, j in zip(*np.nonzero(diff > tolerance)):
            out.append(ElementDiscrepancy(kind, int(i) + 1, int(j) + 1, pt,
                                          complex(closed[i, j]), complex(oracle[i, j]),
                                          float(diff[i, j])))
    out.sort(key=ElementDiscrepancy.sort_key)
    return out


def resolve_ambiguous(grid: Iterable[Sequence[float]], tolerance: float = 1e-10) -> list[dict]:
    """Score each candidate reading of the ambiguous GHZ-like entries."""
    grid = [tuple(float(x) for x in pt) for pt in grid]
    rows = []
    for (kind_name, i, j), readings in AMBIGUOUS_READINGS.items():
        kind = ChannelKind(kind_name)
        oracles = [oracle_density(kind, pt).entries[i - 1, j - 1] for pt in grid]
        for name, expr in readings.items():
            worst, worst_pt = -1.0, grid[0]
            for pt, o in zip(grid, oracles):
                C, S = _cs(RegisterAcceleration(pt))
                d = abs(kind.normalization_probability * expr(C, S) - o)
                if d > worst:
                    worst, worst_pt = d, pt
            rows.append({"kind": kind_name, "row": i, "col": j, "reading": name,
                         "max_abs_diff": float(worst), "worst_r": worst_pt,
                         "matches_oracle": bool(worst <= tolerance)})
    return rows


AUDIT_HEADER = ["kind", "row", "col", "r1", "r2", "r3", "closed_re", "closed_im",
                "oracle_re", "oracle_im", "abs_diff"]


def fmt(x: float) -> str:
    # 17 significant digits; adding 0.0 folds -0.0 into 0
    return format(float(x) + 0.0, ".17g")


def discrepancies_to_csv(rows: Iterable[ElementDiscrepancy]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(AUDIT_HEADER)
    for d in rows:
        w.writerow([d.kind.value, d.row, d.col, *(fmt(x) for x in d.r_point),
                    fmt(d.closed_value.real), fmt(d.closed_value.imag),
                    fmt(d.oracle_value.real), fmt(d.oracle_value.imag), fmt(d.abs_diff)])
    return buf.getvalue()
