"""Parameter sweeps, channel comparison and formula audits."""
from __future__ import annotations

import csv
import io
import itertools
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Iterable, Optional, Sequence, Union

import numpy as np

from . import channels as ch
from .channels import ChannelKind, ChannelRealization, fmt
from .protocol import (
    FORMULAS, BellOutcome, CharlieOutcome, ImpossibleBranch, InfoKind, InfoQubit,
    average_fidelity, branches, closed_form_fidelity, correction_for, reference_probability,
    rescaled_fidelity, run_branch,
)
from .rindler import R_MAX

log = logging.getLogger(__name__)

# info acceleration equal to the common channel acceleration at each grid point
R0_TRACKS = "r"

REFERENCE_BRANCH = {
    ChannelKind.W: (BellOutcome.psi_plus, CharlieOutcome.z0),
    ChannelKind.GHZ: (BellOutcome.psi_plus, CharlieOutcome.x_plus),
    ChannelKind.GHZLike: (BellOutcome.phi_plus, CharlieOutcome.z0),
}
BRANCH_SELECTIONS = ("paper_branch", "all_branches", "average")
CHANNEL_ORDER = {k: i for i, k in enumerate(ChannelKind)}
INFO_ORDER = {InfoKind.non_accelerated: 0, InfoKind.accelerated: 1}
BELL_ORDER = {b: i for i, b in enumerate(BellOutcome)}
CHARLIE_ORDER = {c: i for i, c in enumerate(CharlieOutcome)}


def r_grid(start: float = 0.0, stop: float = 0.78, step: float = 0.02) -> list[float]:
    """Inclusive arithmetic grid; points beyond pi/4 are clamped to pi/4."""
    if not (step > 0 and math.isfinite(step)):
        raise ValueError(f"grid step must be > 0, got {step!r}")
    if start < 0 or start > stop:
        raise ValueError(f"invalid grid bounds [{start!r}, {stop!r}]")
    if start > R_MAX:
        raise ValueError(f"grid start {start!r} exceeds pi/4")
    n = int(math.floor((stop - start) / step + 1e-9)) + 1
    pts = [round(start + i * step, 12) for i in range(n)]
    if pts[-1] > R_MAX:
        log.warning("grid points above pi/4 (up to %.6g) clamped to pi/4", pts[-1])
    return sorted({min(p, R_MAX) for p in pts})


@dataclass(frozen=True)
class SweepConfig:
    channel: Union[ChannelKind, str] = "all"
    info_kind: InfoKind = InfoKind.non_accelerated
    r0_values: tuple = (0.1, 0.4, 0.7)
    r_start: float = 0.0
    r_stop: float = 0.78
    r_step: float = 0.02
    alpha_sq: float = 0.5
    branch_selection: str = "paper_branch"

    def __post_init__(self):
        if isinstance(self.channel, str) and self.channel != "all":
            object.__setattr__(self, "channel", ChannelKind.parse(self.channel))
        if isinstance(self.info_kind, str):
            object.__setattr__(self, "info_kind", InfoKind(self.info_kind))
        if not 0.0 <= self.alpha_sq <= 1.0:
            raise ValueError(f"alpha_sq={self.alpha_sq!r} outside [0, 1]")
        if self.branch_selection not in BRANCH_SELECTIONS:
            raise ValueError(f"branch_selection must be one of {BRANCH_SELECTIONS}")
        r0s = []
        for v in self.r0_values:
            if v == R0_TRACKS:
                r0s.append(R0_TRACKS)
                continue
            v = float(v)
            if not 0.0 <= v <= R_MAX:
                raise ValueError(f"r0={v!r} outside [0, pi/4]")
            r0s.append(v)
        object.__setattr__(self, "r0_values", tuple(r0s))
        r_grid(self.r_start, self.r_stop, self.r_step)

    @property
    def grid(self) -> list[float]:
        return r_grid(self.r_start, self.r_stop, self.r_step)

    @property
    def channels(self) -> list[ChannelKind]:
        return list(ChannelKind) if self.channel == "all" else [self.channel]


@dataclass(frozen=True)
class SweepRecord:
    channel: ChannelKind
    info_kind: InfoKind
    r0: float
    r1: float
    r2: float
    r3: float
    alpha_sq: float
    bell_tag: str
    charlie_tag: str
    probability: float
    fidelity_oracle: float
    fidelity_closed: Optional[float]
    valid: bool
    r0_tracks_r: bool = field(default=False, compare=False)

    def sort_key(self):
        return (CHANNEL_ORDER[self.channel], INFO_ORDER[self.info_kind], self.r0_tracks_r,
                self.r0, self.r1, _tag_order(self.bell_tag, BELL_ORDER, BellOutcome),
                _tag_order(self.charlie_tag, CHARLIE_ORDER, CharlieOutcome))

    def row(self) -> list[str]:
        return [self.channel.value, self.info_kind.value, fmt(self.r0), fmt(self.r1), fmt(self.r2),
                fmt(self.r3), fmt(self.alpha_sq), self.bell_tag, self.charlie_tag,
                fmt(self.probability), fmt(self.fidelity_oracle),
                "" if self.fidelity_closed is None else fmt(self.fidelity_closed),
                "true" if self.valid else "false"]


def _tag_order(tag, order, enum_cls):
    try:
        return order[enum_cls(tag)]
    except ValueError:
        return -1


SWEEP_HEADER = ["channel", "info_kind", "r0", "r1", "r2", "r3", "alpha_sq", "bell", "charlie",
                "probability", "fidelity_oracle", "fidelity_closed", "valid"]


def _point_records(task) -> list[SweepRecord]:
    kind, info_kind, r0, r, alpha_sq, selection = task
    tracks = r0 == R0_TRACKS
    r0_val = r if tracks else r0
    info = InfoQubit.from_alpha_sq(alpha_sq, r0_val if info_kind is InfoKind.accelerated else None)
    realization = ChannelRealization.build(kind, (r, r, r))
    r0_out = r0_val if info_kind is InfoKind.accelerated else 0.0
    base = dict(channel=kind, info_kind=info_kind, r0=r0_out, r1=r, r2=r, r3=r,
                alpha_sq=alpha_sq, r0_tracks_r=tracks)

    if selection == "average":
        avg = average_fidelity(realization, info)
        return [SweepRecord(bell_tag="average", charlie_tag="average",
                            probability=avg.valid_probability, fidelity_oracle=avg.fidelity,
                            fidelity_closed=None, valid=True, **base)]

    todo = [REFERENCE_BRANCH[kind]] if selection == "paper_branch" else branches(kind)
    out = []
    for bell, charlie in todo:
        try:
            res = run_branch(realization, info, bell, charlie)
            p, f, closed, valid = res.probability, res.fidelity_oracle, res.fidelity_closed, res.valid
        except ImpossibleBranch as exc:
            p, f, valid = max(exc.probability, 0.0), float("nan"), correction_for(kind, bell, charlie).valid
            closed = closed_form_fidelity(kind, info_kind, bell, charlie, (r0_out, r, r, r),
                                          math.sqrt(alpha_sq), math.sqrt(1 - alpha_sq))
        out.append(SweepRecord(bell_tag=bell.value, charlie_tag=charlie.value, probability=p,
                               fidelity_oracle=f, fidelity_closed=closed, valid=valid, **base))
    return out


def _tasks(config: SweepConfig):
    r0s = config.r0_values if config.info_kind is InfoKind.accelerated else (0.0,)
    for kind in config.channels:
        for r0 in r0s:
            for r in config.grid:
                yield (kind, config.info_kind, r0, r, config.alpha_sq, config.branch_selection)


def sweep(config: SweepConfig, workers: int = 1) -> list[SweepRecord]:
    """Enumerate the grid; output order never depends on ``workers``."""
    tasks = list(_tasks(config))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(_point_records, tasks, chunksize=8))
    else:
        chunks = [_point_records(t) for t in tasks]
    records = list(itertools.chain.from_iterable(chunks))
    records.sort(key=SweepRecord.sort_key)
    return records


def records_to_csv(records: Iterable[SweepRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_HEADER)
    for rec in records:
        w.writerow(rec.row())
    return buf.getvalue()


# --- channel comparison ------------------------------------------------------

@dataclass
class ComparisonSummary:
    info_kind: InfoKind
    r0_values: tuple
    grid: list[float]
    min_fidelity: dict          # (channel, r0) -> float
    mean_fidelity: dict
    winners: list               # (r0, r, winning channel value(s), {channel value: fidelity})
    winner_counts: dict         # channel value -> count
    ghz_exceptions: list        # (r0, r, channel beating GHZ, margin)
    monotonicity_violations: list
    ghz_pointwise_optimal: bool
    ghz_min_optimal: bool
    rescaled_min: dict = field(default_factory=dict)

    @property
    def ghz_optimal(self) -> bool:
        return self.ghz_pointwise_optimal or self.ghz_min_optimal


def _curves(records: Sequence[SweepRecord]) -> dict:
    curves: dict = {}
    for rec in records:
        key = (rec.channel, R0_TRACKS if rec.r0_tracks_r else rec.r0, rec.bell_tag, rec.charlie_tag)
        curves.setdefault(key, []).append(rec)
    for recs in curves.values():
        recs.sort(key=lambda x: x.r1)
    return curves


def monotonicity_violations(records: Sequence[SweepRecord], tol: float = 1e-9) -> list:
    """Places where a curve's oracle fidelity increases with r by more than ``tol``."""
    out = []
    for (kind, r0, bell, charlie), recs in sorted(_curves(records).items(), key=lambda kv: _curve_order(kv[0])):
        for a, b in zip(recs, recs[1:]):
            if b.fidelity_oracle > a.fidelity_oracle + tol:
                out.append((kind.value, r0, bell, charlie, a.r1, b.r1, b.fidelity_oracle - a.fidelity_oracle))
    return out


def _curve_order(key):
    kind, r0, bell, charlie = key
    return (CHANNEL_ORDER[kind], r0 == R0_TRACKS, 0.0 if r0 == R0_TRACKS else r0, bell, charlie)


def summarize(records: Sequence[SweepRecord], tol: float = 1e-12) -> ComparisonSummary:
    """Pure function of the reference-branch sweep records of all three channels."""
    if not records:
        raise ValueError("no records to compare")
    info_kind = records[0].info_kind
    table: dict = {}
    for rec in records:
        r0 = R0_TRACKS if rec.r0_tracks_r else rec.r0
        table[(rec.channel, r0, rec.r1)] = rec.fidelity_oracle
    r0s = sorted({k[1] for k in table}, key=lambda v: (v == R0_TRACKS, 0.0 if v == R0_TRACKS else v))
    grid = sorted({k[2] for k in table})
    kinds = [k for k in ChannelKind if any(key[0] is k for key in table)]

    min_f, mean_f = {}, {}
    for kind in kinds:
        for r0 in r0s:
            vals = [table[(kind, r0, r)] for r in grid]
            min_f[(kind.value, r0)] = min(vals)
            mean_f[(kind.value, r0)] = float(np.mean(vals))

    winners, counts, exceptions = [], {k.value: 0 for k in kinds}, []
    for r0 in r0s:
        for r in grid:
            vals = {k: table[(k, r0, r)] for k in kinds}
            best = max(vals.values())
            top = [k.value for k in kinds if vals[k] >= best - tol]
            winners.append((r0, r, "+".join(top), {k.value: v for k, v in vals.items()}))
            for name in top:
                counts[name] += 1
            if ChannelKind.GHZ in vals:
                for k in kinds:
                    if k is not ChannelKind.GHZ and vals[k] > vals[ChannelKind.GHZ] + tol:
                        exceptions.append((r0, r, k.value, vals[k] - vals[ChannelKind.GHZ]))

    ghz_min_optimal = ChannelKind.GHZ in kinds and all(
        min_f[("GHZ", r0)] > min_f[(k.value, r0)]
        for r0 in r0s for k in kinds if k is not ChannelKind.GHZ)

    return ComparisonSummary(
        info_kind=info_kind, r0_values=tuple(r0s), grid=grid, min_fidelity=min_f,
        mean_fidelity=mean_f, winners=winners, winner_counts=counts, ghz_exceptions=exceptions,
        monotonicity_violations=monotonicity_violations(records),
        ghz_pointwise_optimal=ChannelKind.GHZ in kinds and not exceptions,
        ghz_min_optimal=ghz_min_optimal,
        rescaled_min=_rescaled_minima(records),
    )


def _rescaled_minima(records: Sequence[SweepRecord]) -> dict:
    # same curves under the unnormalized convention of the printed polynomials
    refs: dict = {}
    out: dict = {}
    for rec in records:
        if rec.bell_tag == "average":
            continue
        bell, charlie = BellOutcome(rec.bell_tag), CharlieOutcome(rec.charlie_tag)
        key = (rec.channel, bell, charlie, rec.alpha_sq)
        if key not in refs:
            refs[key] = reference_probability(rec.channel, bell, charlie,
                                              InfoQubit.from_alpha_sq(rec.alpha_sq))
        value = rec.fidelity_oracle * rec.probability / refs[key]
        curve = (rec.channel.value, R0_TRACKS if rec.r0_tracks_r else rec.r0)
        out[curve] = min(out.get(curve, math.inf), value)
    return out


def compare_channels(config: SweepConfig, workers: int = 1) -> tuple[ComparisonSummary, list[SweepRecord]]:
    if config.channel != "all":
        raise ValueError("compare_channels needs channel='all'")
    config = replace(config, branch_selection="paper_branch")
    records = sweep(config, workers)
    return summarize(records), records


def summary_text(s: ComparisonSummary) -> str:
    lines = [f"info_kind: {s.info_kind.value}",
             f"grid: {len(s.grid)} points in [{s.grid[0]:g}, {s.grid[-1]:g}]"]
    lines.append("channel  r0      min_fidelity         mean_fidelity        min_rescaled")
    for (name, r0), v in s.min_fidelity.items():
        resc = s.rescaled_min.get((name, r0), float("nan"))
        lines.append(f"{name:8s} {str(r0):7s} {v:.17g}  {s.mean_fidelity[(name, r0)]:.17g}  {resc:.6g}")
    lines.append("winner counts: " + ", ".join(f"{k}={v}" for k, v in s.winner_counts.items()))
    lines.append(f"GHZ optimal pointwise: {s.ghz_pointwise_optimal}")
    lines.append(f"GHZ optimal on grid minimum: {s.ghz_min_optimal}")
    if s.ghz_exceptions:
        lines.append(f"points where another channel beats GHZ: {len(s.ghz_exceptions)}")
        for r0, r, name, margin in s.ghz_exceptions:
            lines.append(f"  r0={r0} r={r:g} {name} ahead by {margin:.3e}")
    lines.append(f"monotonicity violations: {len(s.monotonicity_violations)}")
    return "\n".join(lines) + "\n"


def summary_csv(s: ComparisonSummary) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    names = [k.value for k in ChannelKind]
    w.writerow(["info_kind", "r0", "r", "winner", *names])
    for r0, r, winner, vals in s.winners:
        w.writerow([s.info_kind.value, r0 if r0 == R0_TRACKS else fmt(r0), fmt(r), winner,
                    *(fmt(vals[n]) if n in vals else "" for n in names)])
    return buf.getvalue()


# --- formula audit -------------------------------------------------------------

FORMULA_HEADER = ["formula", "channel", "info_kind", "bell", "charlie", "max_abs_diff",
                  "worst_r0", "worst_r", "worst_alpha_sq", "status", "max_abs_diff_rescaled",
                  "status_rescaled"]


@dataclass(frozen=True)
class FormulaAudit:
    formula: str
    channel: ChannelKind
    info_kind: InfoKind
    bell: BellOutcome
    charlie: CharlieOutcome
    max_abs_diff: float
    worst_point: tuple  # (r0, r, alpha_sq)
    max_abs_diff_rescaled: float
    tolerance: float

    @property
    def confirmed(self) -> bool:
        return self.max_abs_diff <= self.tolerance

    @property
    def confirmed_rescaled(self) -> bool:
        return self.max_abs_diff_rescaled <= self.tolerance

    def row(self) -> list[str]:
        return [self.formula, self.channel.value, self.info_kind.value, self.bell.value,
                self.charlie.value, fmt(self.max_abs_diff), *(fmt(x) for x in self.worst_point),
                "CONFIRMED" if self.confirmed else "MISMATCH", fmt(self.max_abs_diff_rescaled),
                "CONFIRMED" if self.confirmed_rescaled else "MISMATCH"]


def audit_formulas(config: SweepConfig, alpha_sq_values: Sequence[float] = (0.25, 0.5, 0.75),
                   tolerance: float = 1e-10) -> list[FormulaAudit]:
    """Max |printed polynomial - oracle| per formula over the grid.

    Compared against the conditional (normalized) oracle fidelity, and, as
    a second column, against the unnormalized overlap rescaled by the
    at-rest branch probability.
    """
    r0_grid = sorted({0.0, *(v for v in config.r0_values if v != R0_TRACKS)})
    out = []
    for f in FORMULAS:
        worst, worst_pt, worst_resc = -1.0, None, -1.0
        for a2 in alpha_sq_values:
            alpha, beta = math.sqrt(a2), math.sqrt(1 - a2)
            ref = reference_probability(f.channel, f.bell, f.charlie, InfoQubit(alpha, beta))
            for r0 in (r0_grid if f.info_kind is InfoKind.accelerated else [None]):
                info = InfoQubit(alpha, beta, r0)
                for r in config.grid:
                    res = run_branch(ChannelRealization.build(f.channel, (r, r, r)), info, f.bell, f.charlie)
                    d = abs(res.fidelity_closed - res.fidelity_oracle)
                    dr = abs(res.fidelity_closed - rescaled_fidelity(res, ref))
                    if d > worst:
                        worst, worst_pt = d, (0.0 if r0 is None else r0, r, a2)
                    worst_resc = max(worst_resc, dr)
        out.append(FormulaAudit(f.name, f.channel, f.info_kind, f.bell, f.charlie, worst, worst_pt,
                                worst_resc, tolerance))
    return out


def formula_audit_csv(rows: Iterable[FormulaAudit]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(FORMULA_HEADER)
    for row in rows:
        w.writerow(row.row())
    return buf.getvalue()


def element_grid(step: float) -> list[tuple[float, float, float]]:
    axis = r_grid(0.0, R_MAX, step)
    if abs(axis[-1] - R_MAX) > 1e-12:
        axis.append(R_MAX)
    return list(itertools.product(axis, repeat=3))


RESOLUTION_HEADER = ["kind", "row", "col", "reading", "max_abs_diff", "worst_r1", "worst_r2",
                     "worst_r3", "matches_oracle"]


def resolution_csv(rows: Iterable[dict]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(RESOLUTION_HEADER)
    for d in rows:
        w.writerow([d["kind"], d["row"], d["col"], d["reading"], fmt(d["max_abs_diff"]),
                    *(fmt(x) for x in d["worst_r"]), "true" if d["matches_oracle"] else "false"])
    return buf.getvalue()


def audit_tables(step: float = 0.1, tolerance: float = 1e-10):
    """Element-table audit for all three channels plus ambiguity resolution."""
    grid = element_grid(step)
    rows = []
    for kind in ChannelKind:
        rows.extend(ch.audit_channel(kind, grid, tolerance))
    rows.sort(key=ch.ElementDiscrepancy.sort_key)
    return rows, ch.resolve_ambiguous(grid, tolerance)
