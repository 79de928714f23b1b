"""Acceptance criteria, one test each.

Every test prints a single ``CRITERION n: PASS|FAIL ...`` line (capture is
bypassed so the line shows in ``pytest -v`` output) and then asserts.
"""
import itertools
import math
import time

import numpy as np
import pytest

from accteleport import channels as ch
from accteleport import experiments as ex
from accteleport.channels import ChannelKind
from accteleport.protocol import (
    FORMULAS, BellOutcome, CharlieOutcome, InfoKind, InfoQubit,
    closed_form_fidelity, reference_probability, rescaled_fidelity, run_all_branches, run_branch,
)
from accteleport.rindler import R_MAX

from conftest import branch_ref, random_info

GRID_1 = [0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, R_MAX]
NA, AC = InfoKind.non_accelerated, InfoKind.accelerated


@pytest.fixture
def report(capsys):
    def emit(n, ok, detail):
        with capsys.disabled():
            print(f"\nCRITERION {n}: {'PASS' if ok else 'FAIL'} - {detail}")
    return emit


def test_criterion_1_validity_suite(report):
    t0 = time.perf_counter()
    worst = {"herm": 0.0, "trace": 0.0, "eig": 0.0}
    for kind in ChannelKind:
        for pt in itertools.product(GRID_1, repeat=3):
            m = ch.oracle_density(kind, pt).entries
            worst["herm"] = max(worst["herm"], float(np.max(np.abs(m - m.conj().T))))
            worst["trace"] = max(worst["trace"], abs(np.trace(m).real - 1))
            worst["eig"] = max(worst["eig"], -float(np.linalg.eigvalsh(m)[0]))
    elapsed = time.perf_counter() - t0
    ok = all(v <= 1e-10 for v in worst.values()) and elapsed < 10
    report(1, ok, f"3 x 9^3 points, max herm {worst['herm']:.1e}, max |tr-1| {worst['trace']:.1e}, "
                  f"max neg eig {max(worst['eig'], 0):.1e}, {elapsed:.1f}s")
    assert ok


def test_criterion_2_zero_acceleration_exactness(report, rng):
    worst, count = 0.0, 0
    for _ in range(20):
        info = InfoQubit(*random_info(rng))
        for kind in ChannelKind:
            real = ch.ChannelRealization.build(kind, (0, 0, 0))
            for res in run_all_branches(real, info):
                if res.valid and res.rho_bob is not None:
                    worst = max(worst, abs(res.fidelity_oracle - 1))
                    count += 1
    ok = worst <= 1e-12
    report(2, ok, f"{count} valid branches over 20 complex (alpha, beta), max |F-1| {worst:.1e}")
    assert ok


def test_criterion_3_ghz_table(report):
    rows = ch.audit_channel(ChannelKind.GHZ, itertools.product(GRID_1, repeat=3), 1e-10)
    m = ch.oracle_density(ChannelKind.GHZ, (0.2, 0.5, 0.7)).entries
    c = [math.cos(x) for x in (0.2, 0.5, 0.7)]
    s = [math.sin(x) for x in (0.2, 0.5, 0.7)]
    corner = abs(m[7, 0] - 0.5 * c[0] * c[1] * c[2])
    last = abs(m[7, 7] - 0.5 * (s[0]**2 * s[1]**2 * s[2]**2 + 1))
    ok = not rows and corner < 1e-12 and last < 1e-12
    report(3, ok, f"{len(rows)} GHZ element mismatches over 9^3 points")
    assert ok


def test_criterion_4_audit_report(report):
    first = ex.audit_tables(0.1, 1e-10)
    second = ex.audit_tables(0.1, 1e-10)
    csv1 = ch.discrepancies_to_csv(first[0]) + ex.resolution_csv(first[1])
    csv2 = ch.discrepancies_to_csv(second[0]) + ex.resolution_csv(second[1])
    w77 = [d for d in first[0] if d.kind is ChannelKind.W and (d.row, d.col) == (7, 7)]
    resolved = {(r["row"], r["col"]): r["reading"] for r in first[1] if r["matches_oracle"]}
    ok = (bool(w77) and csv1 == csv2
          and resolved.get((8, 3)) == "mirror e83 = C1C3" and resolved.get((5, 8)) == "C1C2")
    report(4, ok, f"W (7,7) flagged at {len(w77)} points; resolved {resolved}; byte-stable={csv1 == csv2}")
    assert ok


def test_criterion_5_figure_shapes(report):
    t0 = time.perf_counter()
    na = ex.sweep(ex.SweepConfig(info_kind=NA))
    ac_same = ex.sweep(ex.SweepConfig(info_kind=AC, r0_values=("r",)))
    ac_fixed = ex.sweep(ex.SweepConfig(info_kind=AC, r0_values=(0.1, 0.4, 0.7)))
    elapsed = time.perf_counter() - t0

    def curve(recs, kind, r0=None):
        out = [r for r in recs if r.channel is kind and (r0 is None or r.r0 == r0)]
        return sorted(out, key=lambda r: r.r1)

    problems = []
    for kind in ChannelKind:
        a, b = curve(na, kind), curve(ac_same, kind)
        if abs(a[0].fidelity_oracle - 1) > 1e-12 or abs(b[0].fidelity_oracle - 1) > 1e-12:
            problems.append(f"{kind.value}: not 1 at r=0")
        for x, y in zip(a, b):
            if x.fidelity_oracle < y.fidelity_oracle - 1e-12:
                problems.append(f"{kind.value}: na < ac at r={x.r1}")
        at_rest = [curve(ac_fixed, kind, r0)[0].fidelity_oracle for r0 in (0.1, 0.4, 0.7)]
        if not (at_rest[0] > at_rest[1] > at_rest[2]):
            problems.append(f"{kind.value}: panel b not ordered at r=0 {at_rest}")
    violations = ex.monotonicity_violations(na + ac_same + ac_fixed, tol=1e-9)
    ok = not problems and not violations and elapsed < 30
    report(5, ok, f"{len(problems)} shape problems, {len(violations)} monotonicity violations, "
                  f"{elapsed:.1f}s")
    assert ok, problems + violations


def test_criterion_6_ghz_optimal(report):
    detail = []
    ok = True
    for cfg in (ex.SweepConfig(info_kind=NA), ex.SweepConfig(info_kind=AC, r0_values=(0.4,))):
        s, _ = ex.compare_channels(cfg)
        text = ex.summary_text(s)
        listed = text.count(" ahead by ") == len(s.ghz_exceptions)
        case_ok = s.ghz_pointwise_optimal or (listed and s.ghz_min_optimal)
        ok &= case_ok
        mins = ", ".join(f"{k[0]}={v:.4f}" for k, v in s.min_fidelity.items())
        detail.append(f"{cfg.info_kind.value}: {len(s.ghz_exceptions)} pointwise exceptions, "
                      f"grid minima {mins}")
    report(6, ok, "; ".join(detail))
    assert ok


def test_criterion_7_formula_audit(report, rng):
    worst_rest = 0.0
    for _ in range(10):
        a, b = random_info(rng, complex_amps=False)
        for f in FORMULAS:
            v = closed_form_fidelity(f.channel, f.info_kind, f.bell, f.charlie, (0, 0, 0, 0),
                                     a.real, b.real)
            worst_rest = max(worst_rest, abs(v - 1))
    cfg = ex.SweepConfig()
    text1 = ex.formula_audit_csv(ex.audit_formulas(cfg))
    rows = ex.audit_formulas(cfg)
    text2 = ex.formula_audit_csv(rows)
    labelled = all((r.confirmed and r.max_abs_diff <= 1e-10) or
                   (not r.confirmed and r.worst_point is not None) for r in rows)
    confirmed = [r.formula for r in rows if r.confirmed]
    ok = worst_rest <= 1e-12 and len(rows) == 8 and text1 == text2 and labelled
    report(7, ok, f"max |F-1| at rest {worst_rest:.1e}; {len(rows)} formulas audited, "
                  f"{len(confirmed)} confirmed under conditional fidelity; deterministic={text1 == text2}")
    assert ok


def test_criterion_8_spot_value(report):
    c, s = math.cos(0.5), math.sin(0.5)
    a2 = b2 = 0.5
    by_hand = (a2 * a2 * c**2 * c**2 + a2 * b2 * c**2 * (s**2 + s**2)
               + 2 * a2 * b2 * c * c * c**2 + b2 * b2 * c**2 * c**2)
    info = InfoQubit.from_alpha_sq(0.5)
    real = ch.ChannelRealization.build(ChannelKind.W, (0.5, 0.5, 0.5))
    res = run_branch(real, info, BellOutcome.psi_plus, CharlieOutcome.z0)
    _, _, overlap = branch_ref("W", math.sqrt(0.5), math.sqrt(0.5), (0.5,) * 3,
                               "psi_plus", "z0", "X")
    ref = reference_probability(ChannelKind.W, BellOutcome.psi_plus, CharlieOutcome.z0, info)
    ok = (abs(res.fidelity_closed - 0.6816) <= 5e-4 and abs(by_hand - res.fidelity_closed) < 1e-14
          and abs(overlap / ref - res.fidelity_closed) < 1e-10
          and abs(rescaled_fidelity(res, ref) - res.fidelity_closed) < 1e-10)
    report(8, ok, f"closed form {res.fidelity_closed:.10f}, hand polynomial {by_hand:.10f}, "
                  f"16-dim oracle overlap / at-rest probability {overlap / ref:.10f} "
                  f"(normalized conditional fidelity {res.fidelity_oracle:.10f})")
    assert ok


def test_criterion_9_probability_completeness(report, rng):
    worst = 0.0
    kinds = list(ChannelKind)
    for i in range(100):
        kind = kinds[i % 3]
        rs = tuple(rng.uniform(0, R_MAX, size=3))
        r0 = float(rng.uniform(0, R_MAX)) if i % 2 else None
        info = InfoQubit(*random_info(rng), r0=r0)
        total = sum(r.probability for r in run_all_branches(ch.ChannelRealization.build(kind, rs), info))
        worst = max(worst, abs(total - 1))
    ok = worst <= 1e-10
    report(9, ok, f"100 random cases, max |sum p - 1| {worst:.1e}")
    assert ok
