"""Command-line front end.

Exit codes: 0 success, 1 verification failure, 2 usage / parse / internal error.

State selectors name the spatial and polarization Bell states with an
``s`` or ``p`` suffix, e.g. ``psi+s,phi-p``.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from collections.abc import Sequence

import numpy as np

from . import __version__
from .circuit import HBSA_UI_PAIRS, build_hbsa_circuit, stage_snapshots
from .dsl import ParseError, parse_circuit, serialize_circuit
from .experiments import sample_events, sweep
from .measurement import (SCHEMA_VERSION, VALID_SELECTORS, Classifier, TableError,
                          analyze, diff_tables, format_index, oracle_table, parse_index,
                          signature_table, table_flat, table_human, table_records)
from .reference import WORKED, check_worked_example
from .state import ALL_INDICES, make_hyper_bell

FORMATS = ("human", "structured-records", "flat-table")
OK, FAIL, USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _selector(text: str):
    try:
        return parse_index(text)
    except ValueError:
        raise UsageError(f"bad state selector {text!r}; valid selectors: "
                         + " ".join(VALID_SELECTORS)) from None


def _pairing(text: str | None):
    if not text:
        return HBSA_UI_PAIRS
    pairs = []
    for item in text.split(","):
        m, sep, n = item.partition(":")
        if not sep or m == n:
            raise UsageError(f"bad --ui-pairing item {item!r}; expected m:n")
        pairs.append((m.strip(), n.strip()))
    try:
        build_hbsa_circuit(pairs)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    return tuple(pairs)


def _grid(text: str):
    try:
        a, b, n = text.split(":")
        n = int(n)
        if n < 1:
            raise ValueError
        return list(np.linspace(float(a), float(b), n))
    except ValueError:
        raise UsageError(f"bad grid {text!r}; expected start:stop:count") from None


def _meta(args) -> dict:
    return {"schema_version": SCHEMA_VERSION, "generator": f"hbsa {__version__}",
            "t0_ns": args.t0, "t1_ns": args.t1}


def _emit_records(doc: dict, out):
    out.write(json.dumps(doc, indent=1, ensure_ascii=False, sort_keys=True) + "\n")


def _emit_flat(header, rows, out):
    w = csv.writer(out, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow(r)


def _diff_report(report, out):
    for idx, d in report.items():
        out.write(f"{format_index(idx)}: {len(d.missing)} missing, {len(d.extra)} extra\n")
        for e in sorted(d.missing):
            out.write(f"    - {e.pretty()}\n")
        for e in sorted(d.extra):
            out.write(f"    + {e.pretty()}\n")


def _table_output(table, args, out):
    if args.format == "structured-records":
        doc = json.loads(table_records(table))
        doc.update(_meta(args))
        _emit_records(doc, out)
    elif args.format == "flat-table":
        out.write(table_flat(table))
    else:
        out.write(table_human(table))


# ---------------------------------------------------------------- commands

def cmd_table(args, out) -> int:
    circuit = build_hbsa_circuit(_pairing(args.ui_pairing))
    table = signature_table(circuit, strict=False, tol=args.tol)
    if not args.check:
        _table_output(table, args, out)
        return OK
    report = diff_tables(table, oracle_table())
    bad_norm = [i for i, t in table.raw_totals.items() if abs(t - 1) > args.tol]
    n_ok = 16 - len(set(report) | set(bad_norm))
    if report or bad_norm:
        _diff_report(report, out)
        for i in bad_norm:
            out.write(f"{format_index(i)}: total probability {table.raw_totals[i]!r}\n")
        out.write(f"FAIL {n_ok}/16 rows match\n")
        return FAIL
    out.write("16/16 rows match\n")
    return OK


def cmd_analyze(args, out) -> int:
    idx = _selector(args.state)
    dist = analyze(idx, build_hbsa_circuit(_pairing(args.ui_pairing)))
    if args.format == "structured-records":
        doc = _meta(args)
        doc.update({"kind": "distribution", "spatial": idx[0], "polarization": idx[1],
                    "events": [[e.det1, e.det2, str(e.interval), round(p, 12)]
                               for e, p in dist.events]})
        _emit_records(doc, out)
    elif args.format == "flat-table":
        _emit_flat(["det1", "det2", "interval", "probability"],
                   [[e.det1, e.det2, str(e.interval), f"{p:.12f}"] for e, p in dist.events], out)
    else:
        out.write(f"{format_index(idx)}: {len(dist.events)} events, total {dist.total():.12f}\n")
        for e, p in dist.events:
            out.write(f"  {e.pretty():<28} {p:.6f}\n")
    return OK


def _fmt_state(state, limit):
    items = sorted(state.items(), key=lambda kv: (-abs(kv[1]), repr(kv[0])))
    lines = [f"    {v.real:+.6f}{v.imag:+.6f}j  {a.short()} {b.short()}" for (a, b), v in items[:limit]]
    if len(items) > limit:
        lines.append(f"    ... {len(items) - limit} more terms")
    return "\n".join(lines)


def cmd_trace(args, out) -> int:
    idx = _selector(args.state)
    circuit = build_hbsa_circuit()
    snaps = stage_snapshots(circuit, make_hyper_bell(idx))
    checks = check_worked_example(idx, circuit, args.tol) if idx in WORKED else None
    status = OK
    for k, (name, st) in enumerate(snaps):
        out.write(f"[{name}] {len(st)} terms, norm {st.norm():.12f}\n")
        if args.max_terms:
            out.write(_fmt_state(st, args.max_terms) + "\n")
        if checks is None:
            out.write("  reference: no worked-example reference for this input\n")
            continue
        ag = checks[k].agreement
        verdict = "PASS" if ag.ok else "FAIL"
        if not ag.ok:
            status = FAIL
        note = "" if ag.level == "exact" else f" ({ag.level} level, {len(ag.mismatched)} sign differences)"
        out.write(f"  reference: {verdict} fidelity {ag.fidelity:.6f}{note}\n")
    return status


def cmd_verify(args, out) -> int:
    failures = []
    table = signature_table(strict=False)
    report = diff_tables(table, oracle_table())
    if report:
        failures.append(f"table: {len(report)} rows differ")
    bad = [i for i, t in table.raw_totals.items() if abs(t - 1) > args.tol]
    if bad:
        failures.append(f"normalization: {len(bad)} rows")
    groups: dict = {}
    for idx in ALL_INDICES:
        ivs = table.intervals(idx)
        if len(ivs) != 1:
            failures.append(f"{format_index(idx)} spans {len(ivs)} interval classes")
            continue
        groups.setdefault(next(iter(ivs)), []).append(idx)
    if sorted(len(v) for v in groups.values()) != [4, 4, 4, 4]:
        failures.append("interval law: rows do not split 4 x 4")
    try:
        clf = Classifier(table)
        for idx in ALL_INDICES:
            if any(clf.classify(e) != idx for e in table.rows[idx]):
                failures.append(f"classifier round trip failed for {format_index(idx)}")
    except TableError as exc:
        failures.append(str(exc))
    for idx in WORKED:
        for c in check_worked_example(idx, tol=args.tol):
            if not c.agreement.ok:
                failures.append(f"{format_index(idx)} {c.stage}: no agreement with reference")
    for f in failures:
        out.write(f"FAIL {f}\n")
    if failures:
        return FAIL
    out.write("PASS table, normalization, interval law, classifier, stage references\n")
    return OK


def cmd_sweep(args, out) -> int:
    grids = [(n, _grid(v)) for n, v in (("hwp_jitter", args.hwp_jitter),
                                         ("fs_leakage", args.fs_leakage),
                                         ("bs_imbalance", args.bs_imbalance)) if v]
    if not grids:
        raise UsageError("sweep needs at least one of --hwp-jitter, --fs-leakage, --bs-imbalance")
    rows = []
    for name, values in grids:
        try:
            rows.extend(sweep(name, values))
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    cols = ["param", "value", "min_diagonal", "mean_diagonal", "unclassified_mass"]
    if args.format == "structured-records":
        doc = _meta(args)
        doc.update({"kind": "sweep", "rows": rows})
        _emit_records(doc, out)
    else:
        _emit_flat(cols, [[r["param"], f"{r['value']:.6g}"] + [f"{r[c]:.12f}" for c in cols[2:]]
                          for r in rows], out)
    return OK


def cmd_run_file(args, out) -> int:
    try:
        with open(args.path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {args.path}: {exc}") from None
    circuit = parse_circuit(text)
    table = signature_table(circuit, strict=False)
    if args.check:
        report = diff_tables(table, oracle_table())
        if report:
            _diff_report(report, out)
            out.write(f"FAIL {16 - len(report)}/16 rows match\n")
            return FAIL
        out.write("16/16 rows match\n")
        return OK
    _table_output(table, args, out)
    return OK


def cmd_sample(args, out) -> int:
    idx = _selector(args.state)
    if args.shots < 1:
        raise UsageError("--shots must be >= 1")
    counts = sample_events(idx, args.shots, args.seed)
    rows = sorted(counts.items())
    if args.format == "structured-records":
        doc = _meta(args)
        doc.update({"kind": "sample", "spatial": idx[0], "polarization": idx[1],
                    "shots": args.shots, "seed": args.seed,
                    "counts": [[e.det1, e.det2, str(e.interval), c] for e, c in rows]})
        _emit_records(doc, out)
    elif args.format == "flat-table":
        _emit_flat(["det1", "det2", "interval", "count"],
                   [[e.det1, e.det2, str(e.interval), c] for e, c in rows], out)
    else:
        for e, c in rows:
            out.write(f"{e.pretty():<28} {c}\n")
    return OK


def cmd_serialize(args, out) -> int:
    out.write(serialize_circuit(build_hbsa_circuit(_pairing(args.ui_pairing))))
    return OK


# ------------------------------------------------------------------ parser

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=FORMATS, default="human")
    common.add_argument("--tol", type=float, default=1e-10, help="comparison tolerance")
    common.add_argument("--t0", type=float, default=6.0, help="t0 in ns (metadata only)")
    common.add_argument("--t1", type=float, default=10.0, help="t1 in ns (metadata only)")

    p = argparse.ArgumentParser(
        prog="hbsa",
        description="Hyperentangled Bell-state analyzer simulator.",
        epilog="State selectors: " + " ".join(VALID_SELECTORS))
    p.add_argument("--version", action="version", version=f"hbsa {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    t = sub.add_parser("table", parents=[common], help="print or check the signature table")
    t.add_argument("--check", action="store_true")
    t.add_argument("--ui-pairing", help="interferometer arms as m:n,m:n (default a1:b2,b1:a2)")
    t.set_defaults(func=cmd_table)

    a = sub.add_parser("analyze", parents=[common], help="event distribution for one input")
    a.add_argument("state")
    a.add_argument("--ui-pairing")
    a.set_defaults(func=cmd_analyze)

    tr = sub.add_parser("trace", parents=[common], help="stage snapshots and reference checks")
    tr.add_argument("state")
    tr.add_argument("--max-terms", type=int, default=8)
    tr.set_defaults(func=cmd_trace)

    v = sub.add_parser("verify", parents=[common], help="run all built-in checks")
    v.set_defaults(func=cmd_verify)

    s = sub.add_parser("sweep", parents=[common], help="confusion-matrix noise sweep")
    s.add_argument("--hwp-jitter", metavar="START:STOP:N")
    s.add_argument("--fs-leakage", metavar="START:STOP:N")
    s.add_argument("--bs-imbalance", metavar="START:STOP:N")
    s.set_defaults(func=cmd_sweep)

    r = sub.add_parser("run-file", parents=[common], help="run a circuit description file")
    r.add_argument("path")
    r.add_argument("--check", action="store_true")
    r.set_defaults(func=cmd_run_file)

    sm = sub.add_parser("sample", parents=[common], help="sample detection events")
    sm.add_argument("state")
    sm.add_argument("--shots", type=int, default=1000)
    sm.add_argument("--seed", type=int, default=0)
    sm.set_defaults(func=cmd_sample)

    se = sub.add_parser("serialize", parents=[common], help="print the analyzer as a circuit file")
    se.add_argument("--ui-pairing")
    se.set_defaults(func=cmd_serialize)
    return p


def main(argv: Sequence[str] | None = None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args, out)
    except UsageError as exc:
        sys.stderr.write(f"hbsa: error: {exc}\n")
        return USAGE
    except ParseError as exc:
        sys.stderr.write(f"hbsa: parse error: {exc}\n")
        return USAGE
    except Exception as exc:  # internal failure, distinct from a failed check
        sys.stderr.write(f"hbsa: internal error: {type(exc).__name__}: {exc}\n")
        return USAGE


if __name__ == "__main__":
    sys.exit(main())
