"""Command-line front end.

Exit codes: 0 success, 1 invalid configuration, 2 I/O failure,
3 internal invariant violation.
"""
from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import channels as ch
from . import experiments as ex
from .figures import emit_figures, figure_records
from .protocol import (
    BellOutcome, CharlieOutcome, ImpossibleBranch, InfoKind, InfoQubit, branches,
    reference_probability, rescaled_fidelity, run_branch,
)
from .qmath import InvariantViolation

EXIT_OK, EXIT_CONFIG, EXIT_IO, EXIT_INVARIANT = 0, 1, 2, 3

log = logging.getLogger("accteleport")


class ConfigError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def read_config(path) -> dict:
    """Flat ``key = value`` file; ``#`` starts a comment, keys match long flags."""
    out = {}
    for n, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{n}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.lstrip("-").replace("-", "_")] = value
    return out


def _r0_list(text: str):
    vals = []
    for tok in text.split(","):
        tok = tok.strip()
        vals.append(ex.R0_TRACKS if tok == ex.R0_TRACKS else float(tok))
    return tuple(vals)


def _sweep_flags(p):
    p.add_argument("--channel", default="all", help="W, GHZ, GHZLike or all")
    p.add_argument("--info-kind", default="non_accelerated", choices=[k.value for k in InfoKind])
    p.add_argument("--r0", type=_r0_list, default=(0.1, 0.4, 0.7),
                   help="comma-separated information accelerations; 'r' follows the channel")
    p.add_argument("--r-start", type=float, default=0.0)
    p.add_argument("--r-stop", type=float, default=0.78)
    p.add_argument("--r-step", type=float, default=0.02)
    p.add_argument("--alpha-sq", type=float, default=0.5)
    p.add_argument("--branches", default="paper_branch", choices=ex.BRANCH_SELECTIONS)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", type=Path, default=None, help="output directory")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="accteleport", description=__doc__.splitlines()[0])
    p.add_argument("--config", type=Path, default=None, help="key=value file; flags override it")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("state", help="print a channel density matrix")
    s.add_argument("--channel", required=True)
    for k in (1, 2, 3):
        s.add_argument(f"--r{k}", type=float, default=0.0)
    s.add_argument("--form", choices=("oracle", "closed"), default="oracle")

    t = sub.add_parser("teleport", help="run one teleportation")
    t.add_argument("--channel", required=True)
    t.add_argument("--alpha-sq", type=float, default=0.5)
    t.add_argument("--r0", type=float, default=None, help="omit for non-accelerated information")
    t.add_argument("--r", type=float, default=0.0, help="common channel acceleration")
    t.add_argument("--bell", choices=[b.value for b in BellOutcome], default=None)
    t.add_argument("--charlie", choices=[c.value for c in CharlieOutcome], default=None)

    _sweep_flags(sub.add_parser("sweep", help="fidelity versus channel acceleration (CSV)"))
    _sweep_flags(sub.add_parser("compare", help="compare the three channels"))

    a = sub.add_parser("audit", help="check printed tables and polynomials against the oracle")
    a.add_argument("--grid-step", type=float, default=0.1)
    a.add_argument("--tolerance", type=float, default=1e-10)
    a.add_argument("--out", type=Path, required=True, help="element discrepancy CSV")

    f = sub.add_parser("figures", help="write every figure panel")
    f.add_argument("--r-start", type=float, default=0.0)
    f.add_argument("--r-stop", type=float, default=0.78)
    f.add_argument("--r-step", type=float, default=0.02)
    f.add_argument("--alpha-sq", type=float, default=0.5)
    f.add_argument("--format", choices=("csv", "svg"), default="svg")
    f.add_argument("--workers", type=int, default=1)
    f.add_argument("--out", type=Path, required=True)
    return p


def parse_args(argv):
    parser = build_parser()
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config", type=Path, default=None)
    known, rest = pre.parse_known_args(argv)
    command = next((tok for tok in rest if tok in COMMANDS), None)
    if known.config is not None and command is not None:
        values = read_config(known.config)
        sub = parser._subparsers._group_actions[0].choices[command]
        unknown = set(values) - {a.dest for a in sub._actions}
        if unknown:
            raise ConfigError(f"unknown config key(s) for {command}: {sorted(unknown)}")
        # string defaults still go through each flag's type converter
        sub.set_defaults(**values)
        for action in sub._actions:
            if action.dest in values:
                action.required = False
    return parser.parse_args(argv)


def _config(args) -> ex.SweepConfig:
    return ex.SweepConfig(channel=args.channel, info_kind=args.info_kind, r0_values=args.r0,
                          r_start=args.r_start, r_stop=args.r_stop, r_step=args.r_step,
                          alpha_sq=args.alpha_sq, branch_selection=args.branches)


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8", newline="\n")


def _matrix_text(m: np.ndarray) -> str:
    real = np.max(np.abs(m.imag)) == 0
    rows = []
    for row in m:
        if real:
            rows.append(" ".join(f"{v.real: .10f}" for v in row))
        else:
            rows.append(" ".join(f"{v.real: .6f}{v.imag:+.6f}j" for v in row))
    return "\n".join(rows)


def cmd_state(args) -> int:
    kind = ch.ChannelKind.parse(args.channel)
    acc = (args.r1, args.r2, args.r3)
    rho = ch.oracle_density(kind, acc) if args.form == "oracle" else ch.closed_form_density(kind, acc)
    print(f"# {kind.value} channel, r = {acc}, form = {args.form}")
    print(_matrix_text(rho.entries))
    rep = ch.density_report(rho)
    print(f"# trace = {rep['trace']:.17g}  hermitian_err = {rep['hermitian_err']:.3e}  "
          f"min_eigenvalue = {rep['min_eigenvalue']:.3e}")
    return EXIT_OK


def cmd_teleport(args) -> int:
    kind = ch.ChannelKind.parse(args.channel)
    info = InfoQubit.from_alpha_sq(args.alpha_sq, args.r0)
    realization = ch.ChannelRealization.build(kind, (args.r, args.r, args.r))
    todo = branches(kind)
    if args.bell:
        todo = [(b, c) for b, c in todo if b.value == args.bell]
    if args.charlie:
        todo = [(b, c) for b, c in todo if c.value == args.charlie]
    if not todo:
        raise ValueError(f"Charlie outcome {args.charlie} is not measured on the {kind.value} channel")
    print("bell,charlie,pauli,valid,probability,fidelity_oracle,fidelity_closed,fidelity_rescaled")
    for bell, charlie in todo:
        try:
            res = run_branch(realization, info, bell, charlie)
        except ImpossibleBranch as exc:
            print(f"{bell.value},{charlie.value},,,{ch.fmt(exc.probability)},impossible,,")
            continue
        ref = reference_probability(kind, bell, charlie, info)
        closed = "" if res.fidelity_closed is None else ch.fmt(res.fidelity_closed)
        print(f"{bell.value},{charlie.value},{res.pauli},{str(res.valid).lower()},"
              f"{ch.fmt(res.probability)},{ch.fmt(res.fidelity_oracle)},{closed},"
              f"{ch.fmt(rescaled_fidelity(res, ref))}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    records = ex.sweep(_config(args), args.workers)
    text = ex.records_to_csv(records)
    if args.out is None:
        sys.stdout.write(text)
    else:
        _write(args.out / "sweep.csv", text)
        log.info("wrote %d rows to %s", len(records), args.out / "sweep.csv")
    return EXIT_OK


def cmd_compare(args) -> int:
    config = _config(args)
    if config.channel != "all":
        config = replace(config, channel="all")
    summary, records = ex.compare_channels(config, args.workers)
    sys.stdout.write(ex.summary_text(summary))
    if args.out is not None:
        _write(args.out / "compare_points.csv", ex.summary_csv(summary))
        _write(args.out / "compare_sweep.csv", ex.records_to_csv(records))
    return EXIT_OK


def cmd_audit(args) -> int:
    rows, resolution = ex.audit_tables(args.grid_step, args.tolerance)
    formulas = ex.audit_formulas(ex.SweepConfig(r_step=args.grid_step), tolerance=args.tolerance)
    out: Path = args.out
    stem = out.with_suffix("")
    _write(out, ch.discrepancies_to_csv(rows))
    _write(Path(f"{stem}_resolution.csv"), ex.resolution_csv(resolution))
    _write(Path(f"{stem}_formulas.csv"), ex.formula_audit_csv(formulas))
    by_entry: dict = {}
    for d in rows:
        by_entry.setdefault((d.kind.value, d.row, d.col), []).append(d.abs_diff)
    print(f"element discrepancies: {len(rows)} rows over {len(by_entry)} entries")
    for (kind, i, j), diffs in sorted(by_entry.items()):
        print(f"  {kind} ({i},{j}): {len(diffs)} grid points, max |diff| = {max(diffs):.6g}")
    for d in resolution:
        if d["matches_oracle"]:
            print(f"  resolved {d['kind']} ({d['row']},{d['col']}): {d['reading']}")
    for f in formulas:
        status = "CONFIRMED" if f.confirmed else "MISMATCH"
        print(f"  {f.formula:18s} {status:9s} max |diff| = {f.max_abs_diff:.3e}"
              f"  (rescaled convention: {f.max_abs_diff_rescaled:.3e})")
    return EXIT_OK


def cmd_figures(args) -> int:
    records = figure_records(args.r_start, args.r_stop, args.r_step, args.alpha_sq, args.workers)
    for path in emit_figures(records, args.out, formats=(args.format,)):
        print(path)
    return EXIT_OK


COMMANDS = {"state": cmd_state, "teleport": cmd_teleport, "sweep": cmd_sweep,
            "compare": cmd_compare, "audit": cmd_audit, "figures": cmd_figures}


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        args = parse_args(argv)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return EXIT_IO
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return COMMANDS[args.command](args)
    except InvariantViolation as exc:
        print(f"internal invariant violated: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except OSError as exc:
        print(f"error: {exc.filename or ''}: {exc.strerror or exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
