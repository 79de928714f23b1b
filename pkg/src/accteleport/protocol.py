"""Teleportation through an accelerated three-qubit channel.

Register layout: qubit 0 carries the information, qubits 1, 2, 3 are the
channel qubits held by Alice, Bob and Charlie. Alice Bell-measures qubits
(0, 1), Charlie measures qubit 3, Bob corrects qubit 2 with a Pauli.
"""
from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .channels import ChannelKind, ChannelRealization
from .qmath import (
    EXACT_TOL, KET0, KET1, KET_MINUS, KET_PLUS, PAULI, DensityOperator, ImpossibleBranch,
    Operator, StateVector, apply, fidelity_pure, partial_trace, project, projector,
)
from .rindler import AccelerationParam, accelerate_register


class BellOutcome(enum.Enum):
    # psi lives on span{|00>, |11>}, phi on span{|01>, |10>}
    psi_plus = "psi_plus"
    psi_minus = "psi_minus"
    phi_plus = "phi_plus"
    phi_minus = "phi_minus"


class CharlieOutcome(enum.Enum):
    z0 = "z0"
    z1 = "z1"
    x_plus = "x_plus"
    x_minus = "x_minus"


class InfoKind(enum.Enum):
    non_accelerated = "non_accelerated"
    accelerated = "accelerated"


class BasisMismatch(ValueError):
    """Charlie's outcome is not in the basis used with this channel."""


class ClosedFormUndefined(ValueError):
    """The printed fidelity polynomials assume real amplitudes."""


CHARLIE_BASIS = {
    ChannelKind.W: (CharlieOutcome.z0, CharlieOutcome.z1),
    ChannelKind.GHZ: (CharlieOutcome.x_plus, CharlieOutcome.x_minus),
    ChannelKind.GHZLike: (CharlieOutcome.z0, CharlieOutcome.z1),
}


@dataclass(frozen=True)
class InfoQubit:
    alpha: complex
    beta: complex
    r0: Optional[AccelerationParam] = None

    def __post_init__(self):
        norm = abs(self.alpha) ** 2 + abs(self.beta) ** 2
        if abs(norm - 1.0) > EXACT_TOL:
            raise ValueError(f"|alpha|^2 + |beta|^2 = {norm!r}, expected 1")
        if self.r0 is not None and not isinstance(self.r0, AccelerationParam):
            object.__setattr__(self, "r0", AccelerationParam(self.r0))

    @classmethod
    def from_alpha_sq(cls, alpha_sq: float, r0=None, phase: float = 0.0) -> "InfoQubit":
        if not 0.0 <= alpha_sq <= 1.0:
            raise ValueError(f"alpha^2 = {alpha_sq!r} outside [0, 1]")
        return cls(math.sqrt(alpha_sq), math.sqrt(1.0 - alpha_sq) * cmath.exp(1j * phase), r0)

    @property
    def accelerated(self) -> bool:
        return self.r0 is not None

    @property
    def is_real(self) -> bool:
        return complex(self.alpha).imag == 0 and complex(self.beta).imag == 0

    def state(self) -> StateVector:
        return StateVector([self.alpha, self.beta])


def info_density(info: InfoQubit) -> DensityOperator:
    """Pure projector, or its region-I reduction when ``r0`` is set."""
    psi = info.state()
    if info.r0 is None:
        return psi.density()
    return accelerate_register(psi, [info.r0])


_BELL_VECTORS = {
    BellOutcome.psi_plus: StateVector(np.array([1, 0, 0, 1]) / math.sqrt(2)),
    BellOutcome.psi_minus: StateVector(np.array([1, 0, 0, -1]) / math.sqrt(2)),
    BellOutcome.phi_plus: StateVector(np.array([0, 1, 1, 0]) / math.sqrt(2)),
    BellOutcome.phi_minus: StateVector(np.array([0, 1, -1, 0]) / math.sqrt(2)),
}
_CHARLIE_VECTORS = {
    CharlieOutcome.z0: KET0,
    CharlieOutcome.z1: KET1,
    CharlieOutcome.x_plus: KET_PLUS,
    CharlieOutcome.x_minus: KET_MINUS,
}


def bell_projector(outcome: BellOutcome) -> Operator:
    return projector(_BELL_VECTORS[outcome])


def charlie_projector(outcome: CharlieOutcome) -> Operator:
    return projector(_CHARLIE_VECTORS[outcome])


@dataclass(frozen=True)
class CorrectionRule:
    channel: ChannelKind
    bell: BellOutcome
    charlie: CharlieOutcome
    pauli: str
    valid: bool = True
    reconstructed: bool = False


B, Ch = BellOutcome, CharlieOutcome

# (bell, charlie) -> Pauli applied by Bob
_TABLES = {
    ChannelKind.W: {
        (B.psi_plus, Ch.z0): "X",
        (B.psi_minus, Ch.z0): "Y",
        (B.phi_plus, Ch.z0): "I",
        (B.phi_minus, Ch.z0): "Z",
    },
    ChannelKind.GHZ: {
        (B.psi_plus, Ch.x_plus): "I",
        (B.psi_minus, Ch.x_plus): "Z",
        (B.phi_plus, Ch.x_plus): "X",
        (B.phi_minus, Ch.x_plus): "Y",
        (B.psi_plus, Ch.x_minus): "Z",
        (B.psi_minus, Ch.x_minus): "I",
        (B.phi_plus, Ch.x_minus): "Y",
        (B.phi_minus, Ch.x_minus): "X",
    },
    ChannelKind.GHZLike: {
        (B.psi_plus, Ch.z0): "X",
        (B.psi_minus, Ch.z0): "Y",
        (B.phi_plus, Ch.z0): "I",
        (B.phi_minus, Ch.z0): "Z",
        (B.psi_plus, Ch.z1): "I",
        (B.psi_minus, Ch.z1): "Z",
        (B.phi_plus, Ch.z1): "X",
        (B.phi_minus, Ch.z1): "Y",
    },
}
# rows printed with a repeated Bell label; the minus outcome is filled in
_RECONSTRUCTED = {
    (ChannelKind.GHZLike, B.psi_minus, Ch.z1),
    (ChannelKind.GHZLike, B.phi_minus, Ch.z1),
}


def correction_for(channel: ChannelKind, bell: BellOutcome, charlie: CharlieOutcome) -> CorrectionRule:
    if charlie not in CHARLIE_BASIS[channel]:
        raise BasisMismatch(f"{channel.value} channel is not measured with Charlie outcome {charlie.value}")
    if channel is ChannelKind.W and charlie is Ch.z1:
        return CorrectionRule(channel, bell, charlie, "I", valid=False)
    pauli = _TABLES[channel][(bell, charlie)]
    return CorrectionRule(channel, bell, charlie, pauli,
                          reconstructed=(channel, bell, charlie) in _RECONSTRUCTED)


def branches(channel: ChannelKind) -> list[tuple[BellOutcome, CharlieOutcome]]:
    """Complete outcome set in deterministic order."""
    return [(b, c) for b in BellOutcome for c in CHARLIE_BASIS[channel]]


@dataclass(frozen=True)
class BranchResult:
    bell: BellOutcome
    charlie: CharlieOutcome
    probability: float
    rho_bob: Optional[DensityOperator]
    fidelity_oracle: float
    fidelity_closed: Optional[float]
    valid: bool
    pauli: str


def _register_density(channel: ChannelRealization, info: InfoQubit, use_oracle: bool) -> DensityOperator:
    rho_ch = channel.density(use_oracle)
    rho0 = info_density(info)
    # channel on qubits 1..3, information on qubit 0
    return DensityOperator(np.kron(rho_ch.entries, rho0.entries), validate=use_oracle)


def run_branch(channel: ChannelRealization, info: InfoQubit, bell: BellOutcome,
               charlie: CharlieOutcome, use_oracle: bool = True,
               with_closed: bool = True) -> BranchResult:
    """One (Bell, Charlie) outcome of the protocol.

    Raises :class:`ImpossibleBranch` if the outcome has probability ~0.
    """
    rule = correction_for(channel.kind, bell, charlie)
    rho = _register_density(channel, info, use_oracle)
    p_bell, rho = project(rho, bell_projector(bell), [0, 1])
    p_charlie, rho = project(rho, charlie_projector(charlie), [3])
    rho = apply(PAULI[rule.pauli], rho, [2])
    rho_bob = partial_trace(rho, [2])
    fid = fidelity_pure(info.state(), rho_bob)
    closed = None
    if with_closed and info.is_real:
        kind = InfoKind.accelerated if info.accelerated else InfoKind.non_accelerated
        closed = closed_form_fidelity(channel.kind, kind, bell, charlie, _r_vector(channel, info),
                                      complex(info.alpha).real, complex(info.beta).real)
    return BranchResult(bell, charlie, p_bell * p_charlie, rho_bob, fid, closed, rule.valid, rule.pauli)


def _r_vector(channel: ChannelRealization, info: InfoQubit) -> tuple[float, float, float, float]:
    r0 = info.r0.r if info.r0 is not None else 0.0
    return (r0, *channel.acc.rs)


def run_all_branches(channel: ChannelRealization, info: InfoQubit, use_oracle: bool = True
                     ) -> list[BranchResult]:
    """Every outcome pair; impossible ones appear with probability 0."""
    out = []
    for bell, charlie in branches(channel.kind):
        try:
            out.append(run_branch(channel, info, bell, charlie, use_oracle))
        except ImpossibleBranch as exc:
            rule = correction_for(channel.kind, bell, charlie)
            out.append(BranchResult(bell, charlie, max(exc.probability, 0.0), None,
                                    float("nan"), None, rule.valid, rule.pauli))
    return out


class AverageFidelity(NamedTuple):
    fidelity: float
    valid_probability: float
    weighted_sum: float


def average_fidelity(channel: ChannelRealization, info: InfoQubit) -> AverageFidelity:
    """Probability-weighted fidelity over the valid branches.

    ``weighted_sum`` is sum(p * F) over valid branches; ``fidelity`` divides
    it by the total valid-branch probability.
    """
    total = 0.0
    p_valid = 0.0
    for res in run_all_branches(channel, info):
        if res.valid and res.rho_bob is not None:
            total += res.probability * res.fidelity_oracle
            p_valid += res.probability
    return AverageFidelity(total / p_valid if p_valid > 0 else float("nan"), p_valid, total)


# --- printed fidelity polynomials -------------------------------------------

def _f_w_na(a2, b2, C, S):
    return (a2 * a2 * C[1]**2 * C[3]**2 + a2 * b2 * C[3]**2 * (S[2]**2 + S[1]**2)
            + 2 * a2 * b2 * C[1] * C[2] * C[3]**2 + b2 * b2 * C[2]**2 * C[3]**2)


def _f_w_ac(a2, b2, C, S):
    return (a2 * a2 * C[3]**2 * (C[0]**4 * C[2]**2 + S[0]**4 * C[1]**2) + b2 * b2 * C[1]**2 * C[3]**2
            + a2 * b2 * C[0]**2 * C[3]**2 * (S[1]**2 + S[2]**2)
            + a2 * a2 * S[0]**2 * C[0]**2 * C[3]**2 * (S[1]**2 + S[2]**2)
            + 2 * a2 * b2 * C[0]**2 * C[1] * C[2] * C[3]**2 + 2 * a2 * b2 * S[0]**2 * C[1]**2 * C[3]**2)


def _f_g_na(a2, b2, C, S):
    t3 = C[3]**2 + S[3]**2
    # the operator between "2a^2b^2C1C2C3" and "b^4S1^2S2^2" is missing; read as "+"
    return (a2 * a2 * C[0]**4 * C[1]**2 * C[2]**2 * t3 + a2 * b2 * S[1]**2 * t3
            + a2 * b2 * C[1]**2 * S[2]**2 * t3 + 2 * a2 * b2 * C[1] * C[2] * C[3]
            + b2 * b2 * S[1]**2 * S[2]**2 * t3 + b2 * b2)


def _f_g_ac(a2, b2, C, S):
    t3 = C[3]**2 + S[3]**2
    m0 = a2 * S[0]**2 + b2
    return (a2 * a2 * C[0]**4 * C[1]**2 * C[2]**2 * t3 + a2 * a2 * C[0]**2 * S[0]**2 * S[1]**2 * C[2]**2 * t3
            + a2 * b2 * C[0]**2 * S[1]**2 * C[2]**2 * t3 + 2 * a2 * b2 * C[0]**2 * C[1] * C[2] * C[3]
            + a2 * a2 * S[0]**2 * C[0]**2 * C[1]**2 * S[2]**2 * t3 + a2 * a2 * S[0]**4 * S[1]**2 * S[2]**2 * t3
            + a2 * b2 * S[0]**2 * S[1]**2 * S[2]**2 * t3 + a2 * S[0]**2 * m0
            + a2 * b2 * C[0]**2 * C[1]**2 * S[2]**2 * t3 + a2 * b2 * S[0]**2 * S[1]**2 * S[2]**2 * t3
            + a2 * b2 * b2 * S[1]**2 * S[2]**2 * t3 + b2 * m0)


def _f_gl_na_z0(a2, b2, C, S):
    return (a2 * a2 * C[2]**2 * C[3]**2 + a2 * b2 * C[3]**2 * (S[1]**2 + S[2]**2)
            + b2 * b2 * C[1]**2 * C[3]**2 + 2 * a2 * b2 * C[1] * C[2] * C[3]**2)


def _f_gl_na_z1(a2, b2, C, S):
    return (a2 * a2 * S[1]**2 * (S[2]**2 + S[3]**2) + a2 * b2 * C[1]**2 * (S[2]**2 + S[3]**2)
            + a2 * b2 * C[2]**2 * (S[1]**2 + S[3]**2) + a2 * a2 * (S[2]**2 * S[3]**2 + 1)
            + b2 * b2 * C[1]**2 * C[2]**2 + 2 * a2 * b2 * C[1] * C[2] * (1 + S[3]**2))


def _f_gl_ac_z0(a2, b2, C, S):
    m0 = a2 * S[0]**2 + b2
    return (b2 * C[1]**2 * C[3]**2 * m0 + a2 * S[0]**2 * C[1]**2 * C[3]**2 * m0
            + a2 * a2 * C[0]**2 * S[0]**2 * C[3]**2 * (S[1]**2 + S[2]**2)
            + a2 * b2 * C[3]**2 * (C[0]**2 * S[1]**2 + S[2]**2)
            + a2 * a2 * C[0]**4 * C[2]**2 * C[3]**2 + 2 * a2 * b2 * C[0]**2 * C[1] * C[2] * C[3]**2)


def _f_gl_ac_z1(a2, b2, C, S):
    m0 = a2 * S[0]**2 + b2
    return (a2 * C[0]**2 * C[1]**2 * S[3]**2 * m0 + a2 * C[0]**2 * C[1]**2 * S[2]**2 * m0
            + a2 * S[0]**2 * C[1]**2 * C[2]**2 * m0 + b2 * C[1]**2 * C[2]**2 * m0
            + a2 * a2 * S[0]**2 * C[0]**2 * C[2]**2 * (S[1]**2 + S[3]**2)
            + a2 * b2 * C[0]**2 * C[2]**2 * (S[1]**2 + S[3]**2)
            + 2 * a2 * b2 * C[0]**2 * C[1] * C[2] + 2 * a2 * b2 * C[0]**2 * C[1] * C[2] * S[3]**2
            + a2 * a2 * C[0]**4 * (S[1]**2 * S[2]**2 + S[1]**2 * S[3]**2 + S[2]**2 * S[3]**2 + 1))


NA, AC = InfoKind.non_accelerated, InfoKind.accelerated


@dataclass(frozen=True)
class FidelityFormula:
    name: str
    channel: ChannelKind
    info_kind: InfoKind
    bell: BellOutcome
    charlie: CharlieOutcome
    fn: object


FORMULAS = [
    FidelityFormula("F_w_na", ChannelKind.W, NA, B.psi_plus, Ch.z0, _f_w_na),
    FidelityFormula("F_w_ac", ChannelKind.W, AC, B.psi_plus, Ch.z0, _f_w_ac),
    FidelityFormula("F_g_na", ChannelKind.GHZ, NA, B.psi_plus, Ch.x_plus, _f_g_na),
    FidelityFormula("F_g_ac", ChannelKind.GHZ, AC, B.psi_plus, Ch.x_plus, _f_g_ac),
    FidelityFormula("F_gl_na_phi+_z0", ChannelKind.GHZLike, NA, B.phi_plus, Ch.z0, _f_gl_na_z0),
    FidelityFormula("F_gl_na_phi+_z1", ChannelKind.GHZLike, NA, B.phi_plus, Ch.z1, _f_gl_na_z1),
    FidelityFormula("F_gl_ac_phi+_z0", ChannelKind.GHZLike, AC, B.phi_plus, Ch.z0, _f_gl_ac_z0),
    FidelityFormula("F_gl_ac_phi+_z1", ChannelKind.GHZLike, AC, B.phi_plus, Ch.z1, _f_gl_ac_z1),
]
_FORMULA_INDEX = {(f.channel, f.info_kind, f.bell, f.charlie): f for f in FORMULAS}


def formula_for(channel, info_kind, bell, charlie) -> Optional[FidelityFormula]:
    return _FORMULA_INDEX.get((channel, info_kind, bell, charlie))


def closed_form_fidelity(channel: ChannelKind, info_kind: InfoKind, bell: BellOutcome,
                         charlie: CharlieOutcome, r, alpha, beta) -> Optional[float]:
    """Evaluate the printed polynomial for this branch, or ``None``.

    ``r`` is ``(r0, r1, r2, r3)``; ``r0`` is ignored (C0 = 1) for
    non-accelerated information.
    """
    if complex(alpha).imag != 0 or complex(beta).imag != 0:
        raise ClosedFormUndefined("closed-form fidelities need real alpha and beta")
    f = formula_for(channel, info_kind, bell, charlie)
    if f is None:
        return None
    r = list(r)
    if len(r) != 4:
        raise ValueError(f"expected (r0, r1, r2, r3), got {len(r)} values")
    if info_kind is InfoKind.non_accelerated:
        r[0] = 0.0
    C = {k: math.cos(v) for k, v in enumerate(r)}
    S = {k: math.sin(v) for k, v in enumerate(r)}
    a2 = complex(alpha).real ** 2
    b2 = complex(beta).real ** 2
    return float(f.fn(a2, b2, C, S))


def reference_probability(channel: ChannelKind, bell: BellOutcome, charlie: CharlieOutcome,
                          info: InfoQubit) -> float:
    """Branch probability with every qubit at rest (r0 = r1 = r2 = r3 = 0)."""
    rest = ChannelRealization.build(channel, (0.0, 0.0, 0.0))
    still = InfoQubit(info.alpha, info.beta)
    try:
        return run_branch(rest, still, bell, charlie, with_closed=False).probability
    except ImpossibleBranch as exc:
        return exc.probability


def rescaled_fidelity(result: BranchResult, reference: float) -> float:
    """Unnormalized overlap ``<psi|rho_branch|psi>`` divided by ``reference``.

    This is the convention of the printed polynomials: it equals 1 at rest
    but is not bounded by 1 once the branch probability grows.
    """
    if result.rho_bob is None or reference <= 0:
        return float("nan")
    return result.fidelity_oracle * result.probability / reference
