"""Command line front end: scenario runs, closed-form tables, SVG export.

Exit codes: 0 all rows pass, 2 any fail, 3 any indeterminate (and none
failing), 1 usage or input error.
"""

from __future__ import annotations

import argparse
import csv
import sys

from . import analytics as an
from .interlacement import InterlacementField
from .reports import overall_exit_code
from .scenarios import (SCENARIOS, config_from_mapping, parse_config,
                        run_scenario)
from .svg import save_svg


def _g(v: float) -> str:
    return format(float(v), ".17g")


def _op_hitting(r):
    return {"value": an.hitting_prob(r["s"], r["a"], r["b"])}


def _op_escape(r):
    return {"value": an.escape_prob(r["s"], r["a"])}


def _op_ell(r):
    return {"value": an.ell((r["x1"], r["x2"]))}


def _op_l_kernel(r):
    return {"value": an.L_value((r["x1"], r["x2"]), (r["y1"], r["y2"]))}


def _op_caphat(r):
    res = an.caphat_disk((r["y1"], r["y2"]), r["r"])
    return {"value": res.value, "error_bound": res.error_bound}


def _op_vacancy(r):
    return {"value": an.vacancy_prob(r["alpha"], r["caphat"])}


def _op_spacing(r):
    return {"value": an.r_b(r["alpha"], r["x_norm"], r["b"])}


def _op_psi(r):
    ell_x = an.ell((r["x_norm"], 0.0))
    p = an.psi_terms(r["h"], r["x_norm"], r["alpha"], ell_x)
    return {"psi1": p.psi1, "psi2": p.psi2, "psi3": p.psi3}


def _op_cap_centered(r):
    return {"value": an.cap_disk_centered(r["radius"])}


TABLE_OPS = {
    "hitting-prob": (("s", "a", "b"), _op_hitting),
    "escape-prob": (("s", "a"), _op_escape),
    "ell": (("x1", "x2"), _op_ell),
    "l-kernel": (("x1", "x2", "y1", "y2"), _op_l_kernel),
    "caphat-leading": (("y1", "y2", "r"), _op_caphat),
    "vacancy-prob": (("alpha", "caphat"), _op_vacancy),
    "spacing-radius": (("alpha", "x_norm", "b"), _op_spacing),
    "psi": (("h", "x_norm", "alpha"), _op_psi),
    "cap-disk-centered": (("radius",), _op_cap_centered),
}


class _Parser(argparse.ArgumentParser):
    """argparse flags usage problems with status 2; the contract wants 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="bri2d", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    run = sub.add_parser("run", help="run one experiment scenario")
    run.add_argument("--scenario", choices=SCENARIOS)
    run.add_argument("--config", help="flat key = value file")
    run.add_argument("--seed", type=int)
    run.add_argument("--replicas", type=int)
    run.add_argument("--out", help="directory for report.csv/report.json")
    run.add_argument("--svg", action="store_true",
                     help="also write scenario SVG snapshots")
    run.add_argument("--workers", type=int)

    table = sub.add_parser("table", help="closed forms over a CSV grid")
    table.add_argument("--op", required=True, choices=sorted(TABLE_OPS))
    table.add_argument("--grid", required=True,
                       help="CSV with one header row naming the inputs")

    render = sub.add_parser("render", help="SVG of a saved field")
    render.add_argument("--input", required=True)
    render.add_argument("--out", required=True)
    return parser


def _cmd_run(args) -> int:
    try:
        data = parse_config(args.config) if args.config else {}
    except (OSError, ValueError) as exc:
        print(f"bri2d: {exc}", file=sys.stderr)
        return 1
    cli_fields = (("scenario", args.scenario), ("seed", args.seed),
                  ("replicas", args.replicas), ("out", args.out),
                  ("workers", args.workers))
    for key, val in cli_fields:
        if val is not None:
            data[key] = val
    if args.svg:
        data["svg"] = True
    try:
        cfg = config_from_mapping(data)
    except ValueError as exc:
        print(f"bri2d: {exc}", file=sys.stderr)
        return 1
    reports = run_scenario(cfg)
    for r in reports:
        comp = "" if r.comparator is None else f" comparator={_g(r.comparator)}"
        print(f"{r.verdict:<13s} {r.scenario} :: {r.point} :: "
              f"estimate={_g(r.estimate)}{comp}")
    return overall_exit_code(reports)


def _cmd_table(args) -> int:
    cols, fn = TABLE_OPS[args.op]
    try:
        with open(args.grid, newline="", encoding="utf-8") as f:
            rows = list(csv.DictReader(f))
    except OSError as exc:
        print(f"bri2d: {exc}", file=sys.stderr)
        return 1
    if not rows:
        print("bri2d: grid file has no data rows", file=sys.stderr)
        return 1
    missing = [c for c in cols if c not in rows[0]]
    if missing:
        print(f"bri2d: grid is missing columns: {', '.join(missing)}",
              file=sys.stderr)
        return 1
    writer = csv.writer(sys.stdout)
    header_written = False
    for row in rows:
        try:
            inputs = {c: float(row[c]) for c in cols}
            result = fn(inputs)
        except ValueError as exc:
            print(f"bri2d: bad grid row {row}: {exc}", file=sys.stderr)
            return 1
        if not header_written:
            writer.writerow(list(cols) + list(result))
            header_written = True
        writer.writerow([_g(inputs[c]) for c in cols]
                        + [_g(v) for v in result.values()])
    return 0


def _cmd_render(args) -> int:
    try:
        field = InterlacementField.load(args.input)
    except (OSError, ValueError, KeyError) as exc:
        print(f"bri2d: cannot load field: {exc}", file=sys.stderr)
        return 1
    save_svg(field, args.out)
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "run":
        return _cmd_run(args)
    if args.command == "table":
        return _cmd_table(args)
    if args.command == "render":
        return _cmd_render(args)
    parser.print_usage(sys.stderr)
    return 1


if __name__ == "__main__":
    raise SystemExit(main())
