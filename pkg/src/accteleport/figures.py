"""Fidelity-versus-acceleration panels as CSV tables and static SVG plots."""
from __future__ import annotations

import csv
import io
import math
from pathlib import Path
from typing import Iterable, Sequence

from .channels import ChannelKind, fmt
from .experiments import R0_TRACKS, SweepConfig, SweepRecord, sweep
from .protocol import InfoKind
from .rindler import R_MAX

PANEL_R0 = (0.1, 0.4, 0.7)
FIGURE_NUMBER = {ChannelKind.W: 2, ChannelKind.GHZ: 3, ChannelKind.GHZLike: 4}
FIGURE_HEADER = ["curve", "r0", "r", "fidelity_oracle", "fidelity_closed"]


def figure_records(r_start: float = 0.0, r_stop: float = 0.78, r_step: float = 0.02,
                   alpha_sq: float = 0.5, workers: int = 1) -> list[SweepRecord]:
    """Reference-branch sweeps behind every panel."""
    grid = dict(r_start=r_start, r_stop=r_stop, r_step=r_step, alpha_sq=alpha_sq)
    na = sweep(SweepConfig(info_kind=InfoKind.non_accelerated, **grid), workers)
    ac = sweep(SweepConfig(info_kind=InfoKind.accelerated, r0_values=(R0_TRACKS, *PANEL_R0), **grid),
               workers)
    return na + ac


def panels(records: Sequence[SweepRecord]) -> dict[str, list[tuple[str, list[SweepRecord]]]]:
    """``{"fig2a": [(curve label, records sorted by r), ...], ...}``."""
    out = {}
    for kind, num in FIGURE_NUMBER.items():
        mine = [r for r in records if r.channel is kind]
        na = [r for r in mine if r.info_kind is InfoKind.non_accelerated]
        ac_same = [r for r in mine if r.info_kind is InfoKind.accelerated and r.r0_tracks_r]
        a = [(label, sorted(recs, key=lambda x: x.r1)) for label, recs in
             (("non_accelerated", na), ("accelerated r0=r", ac_same)) if recs]
        b = []
        for r0 in PANEL_R0:
            recs = [r for r in mine if r.info_kind is InfoKind.accelerated and not r.r0_tracks_r
                    and math.isclose(r.r0, r0, abs_tol=1e-12)]
            if recs:
                b.append((f"accelerated r0={r0:g}", sorted(recs, key=lambda x: x.r1)))
        if a:
            out[f"fig{num}a"] = a
        if b:
            out[f"fig{num}b"] = b
    return out


def panel_csv(curves) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(FIGURE_HEADER)
    for label, recs in curves:
        for rec in recs:
            r0 = R0_TRACKS if rec.r0_tracks_r else fmt(rec.r0)
            w.writerow([label, r0, fmt(rec.r1), fmt(rec.fidelity_oracle),
                        "" if rec.fidelity_closed is None else fmt(rec.fidelity_closed)])
    return buf.getvalue()


_STYLES = ("-", "--", ":")


def render_panel(name: str, curves, path: Path) -> None:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plt.rcParams["svg.hashsalt"] = "accteleport"
    fig, ax = plt.subplots(figsize=(4.5, 3.4))
    for i, (label, recs) in enumerate(curves):
        r = [x.r1 for x in recs]
        line, = ax.plot(r, [x.fidelity_oracle for x in recs], _STYLES[i % 3], lw=1.6, label=label)
        closed = [x.fidelity_closed for x in recs]
        if all(c is not None for c in closed):
            ax.plot(r, closed, _STYLES[i % 3], lw=0.8, alpha=0.5, color=line.get_color())
    ax.set_xlim(0, R_MAX)
    ax.set_ylim(0, 1)
    ax.set_xlabel("r")
    ax.set_ylabel("F")
    ax.set_title(name)
    ax.legend(fontsize=7, loc="lower left", frameon=False)
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def emit_figures(records: Sequence[SweepRecord], out_dir, formats: Iterable[str] = ("csv",)) -> list[Path]:
    """Write one file per panel and format; returns the paths written.

    CSV is always written. Thin lines in the SVGs are the printed
    polynomials, thick lines the oracle.
    """
    if not records:
        raise ValueError("no records to plot")
    formats = set(formats) | {"csv"}
    unknown = formats - {"csv", "svg"}
    if unknown:
        raise ValueError(f"unknown figure format(s): {sorted(unknown)}")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for name, curves in panels(records).items():
        path = out_dir / f"{name}.csv"
        path.write_text(panel_csv(curves), encoding="utf-8", newline="\n")
        written.append(path)
        if "svg" in formats:
            path = out_dir / f"{name}.svg"
            render_panel(name, curves, path)
            written.append(path)
    return written
