"""Command-line front end: solve, trace, stream, check, n2, vcg.

Instances are the shared JSON schema {"values": [...], "budgets": [...],
"supply": s}.  All numbers are printed with 17 significant digits so a
round trip through the reader reproduces every double exactly; output is
byte-identical for identical argument vector, input and seed.  Exit
status: 0 success, 1 a checked property failed, 2 usage or input errors.
"""
from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import checks, engine, stream, two_player, vcg
from .core import AuctionError, Outcome, dumps, instance_from_json


def _read_input(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, "r", encoding="utf-8") as fh:
        return fh.read()


def _config(args) -> engine.EngineConfig:
    if args.tolerance is None:
        return engine.DEFAULT_CONFIG
    return engine.EngineConfig(rel_tol=args.tolerance)


def _table(rows: list[tuple], header: tuple) -> str:
    cells = [tuple(str(c) for c in row) for row in [header, *rows]]
    widths = [max(len(r[c]) for r in cells) for c in range(len(header))]
    lines = ["  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip()
             for row in cells]
    return "\n".join(lines)


def _emit_outcome(out: Outcome, args, extra: dict | None = None) -> None:
    if args.format == "table":
        rows = [(i, format(out.allocation[i], ".17g"), format(out.payments[i], ".17g"))
                for i in range(out.n)]
        print(_table(rows, ("player", "x", "pay")))
        for key, val in (extra or {}).items():
            print(f"{key}: {val}")
        return
    doc = {"x": list(out.allocation), "pi": list(out.payments)}
    doc.update(extra or {})
    print(dumps(doc))


def _event_doc(ev) -> dict:
    return {
        "kind": ev.kind,
        "price": ev.price,
        "players": list(ev.players),
        "delta_x": list(ev.delta_x),
        "delta_pi": list(ev.delta_pay),
        "state_after": {
            "x": list(ev.after.allocation),
            "B": list(ev.after.budgets),
            "S": ev.after.supply,
            "A": sorted(ev.after.active),
            "C": sorted(ev.after.clinching),
        },
    }


def _cmd_solve(args) -> int:
    inst = instance_from_json(_read_input(args.input))
    _emit_outcome(engine.solve(inst, _config(args)), args)
    return 0


def _cmd_trace(args) -> int:
    inst = instance_from_json(_read_input(args.input))
    tr = engine.trace(inst, _config(args))
    if args.format == "table":
        rows = [(ev.kind, format(ev.price, ".12g"), ",".join(map(str, ev.players)),
                 format(sum(ev.delta_x), ".12g"), format(ev.after.supply, ".12g"))
                for ev in tr.events]
        print(_table(rows, ("event", "price", "players", "units", "S_after")))
        print(f"outcome x={list(tr.outcome.allocation)} pi={list(tr.outcome.payments)}")
        return 0
    for ev in tr.events:
        print(dumps(_event_doc(ev)))
    print(dumps({"kind": "final", "x": list(tr.outcome.allocation),
                 "pi": list(tr.outcome.payments), "notes": list(tr.notes)}))
    return 0


def _cmd_stream(args) -> int:
    inst = instance_from_json(_read_input(args.input), require_supply=False)
    sup = stream.init_stream(inst.values, inst.budgets, _config(args))
    for line in sys.stdin:
        line = line.strip()
        if not line:
            continue
        doc = json.loads(line)
        delta = sup.on_supply(float(doc["supply"]))
        print(dumps({"s_cum": sup.supply,
                     "delta_x": list(delta.delta_x),
                     "delta_pi": list(delta.delta_pay),
                     "x": list(sup.outcome.allocation),
                     "pi": list(sup.outcome.payments),
                     "u": list(sup.utility_snapshot())}), flush=True)
    return 0


def _cmd_n2(args) -> int:
    v1, v2 = args.v
    b1, b2 = args.b
    out, label = two_player.solve_n2(v1, v2, b1, b2, args.s, _config(args))
    extra = {"regime": label.regime.value, "split_spend": label.split_spend}
    if args.rates:
        dx, dpay, _ = two_player.marginal_rates_n2(v1, v2, b1, b2, args.s,
                                                   _config(args))
        extra["dx_ds"] = list(dx)
        extra["dpi_ds"] = list(dpay)
    _emit_outcome(out, args, extra)
    return 0


def _cmd_vcg(args) -> int:
    inst = instance_from_json(_read_input(args.input), require_supply=True)
    if args.table is not None:
        table = json.loads(_read_input(args.table))
        oracle = vcg.oracle_from_table(inst.n, table)
        out = vcg.vcg_polymatroid(inst.values, oracle)
    elif args.family == "multiunit":
        out = vcg.vcg_multiunit(inst.values, inst.supply)
    elif args.family == "capped":
        if args.caps is None:
            raise AuctionError("--caps is required with --family capped")
        out = vcg.vcg_capacity_demo(inst.values, args.caps, inst.supply)
    else:
        raise AuctionError("give either --table or --family")
    _emit_outcome(out, args)
    return 0


def _parse_corpus(text: str | None) -> dict:
    out = {}
    if not text:
        return out
    for token in text.split(","):
        if not token.strip():
            continue
        key, _, val = token.partition("=")
        out[key.strip()] = float(val)
    return out


_CHECK_DEFAULTS = {
    "ic": dict(count=40, nmin=2, nmax=6),
    "ir": dict(count=400, nmin=2, nmax=8),
    "budget": dict(count=400, nmin=2, nmax=8),
    "pareto": dict(count=100, nmin=2, nmax=8),
    "monotone": dict(count=100, nmin=2, nmax=8, pairs=3),
    "oracle": dict(count=40, h=1e-3),
}


def _cmd_check(args) -> int:
    opts = dict(_CHECK_DEFAULTS[args.property])
    opts.update(_parse_corpus(args.corpus))
    count = int(opts.get("count", 100))
    rng = np.random.default_rng(args.seed)
    cfg = _config(args)
    tol = args.tolerance

    if args.property == "oracle":
        spec = checks.oracle_corpus(seed=args.seed, count=count)
        insts = checks.random_instances(spec)
        reports = [checks.check_oracle_agreement(insts, h=opts.get("h", 1e-3),
                                                 tol=tol)]
    else:
        spec = checks.CorpusSpec(
            count=count,
            n_min=int(opts.get("nmin", 2)), n_max=int(opts.get("nmax", 8)),
            v_max=opts.get("vmax", 10.0), b_min=opts.get("bmin", 0.0),
            b_max=opts.get("bmax", 5.0), s_max=opts.get("smax", 20.0),
            seed=args.seed)
        insts = checks.random_instances(spec)
        reports = []
        for inst in insts:
            if args.property == "ic":
                reports.append(checks.check_ic(inst, points=int(opts.get("points", 50)),
                                               slack=tol or 1e-6))
            elif args.property == "ir":
                reports.append(checks.check_ir(inst, engine.solve(inst, cfg),
                                               tol=tol or 1e-9))
            elif args.property == "budget":
                reports.append(checks.check_budget(inst, engine.solve(inst, cfg),
                                                   tol=tol or 1e-9))
            elif args.property == "pareto":
                reports.append(checks.check_pareto(
                    inst, engine.solve(inst, cfg), rng,
                    candidates=int(opts.get("candidates", 1000))))
            else:
                base = inst.supply
                pairs = [(base * rng.random(), base) for _ in
                         range(int(opts.get("pairs", 3)))]
                reports.append(checks.check_supply_monotonicity(
                    inst.values, inst.budgets, pairs, cfg, slack=tol or 1e-8))
        reports = [checks.merge_reports(reports[0].name, spec.describe(), reports)]

    if args.format == "table":
        rows = [(r.name, "pass" if r.passed else "FAIL",
                 format(r.worst_violation, ".3e"), r.corpus) for r in reports]
        print(_table(rows, ("property", "verdict", "worst", "corpus")))
    else:
        print(dumps([r.to_dict() for r in reports]))
    return 0 if all(r.passed for r in reports) else 1


def build_parser() -> argparse.ArgumentParser:
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--tolerance", type=float, default=None,
                        help="override the relative tolerance / check slack")
    shared.add_argument("--seed", type=int, default=0,
                        help="seed for every randomized corpus")
    shared.add_argument("--format", choices=("json", "table"), default="json",
                        help="output rendering")

    parser = argparse.ArgumentParser(
        prog="clinch",
        description="Budget-constrained clinching auction with online supply")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", parents=[shared],
                       help="outcome for one instance file")
    p.add_argument("--input", required=True, help="instance JSON path, or - for stdin")
    p.set_defaults(fn=_cmd_solve)

    p = sub.add_parser("trace", parents=[shared],
                       help="event-by-event run as JSON lines")
    p.add_argument("--input", required=True)
    p.set_defaults(fn=_cmd_trace)

    p = sub.add_parser("stream", parents=[shared],
                       help='consume {"supply": ds} lines, emit deltas')
    p.add_argument("--input", required=True,
                   help="instance JSON (supply field ignored)")
    p.set_defaults(fn=_cmd_stream)

    p = sub.add_parser("check", parents=[shared],
                       help="run a property over a seeded random corpus")
    p.add_argument("--property", required=True,
                   choices=("ic", "ir", "budget", "pareto", "monotone", "oracle"))
    p.add_argument("--corpus", default=None,
                   help="comma list of key=value generator parameters, e.g. "
                        "count=100,nmin=2,nmax=8,vmax=10,bmax=5,smax=20")
    p.set_defaults(fn=_cmd_check)

    p = sub.add_parser("n2", parents=[shared],
                       help="closed-form two-player solution")
    p.add_argument("--v", type=float, nargs=2, required=True, metavar=("V1", "V2"))
    p.add_argument("--b", type=float, nargs=2, required=True, metavar=("B1", "B2"))
    p.add_argument("--s", type=float, required=True)
    p.add_argument("--rates", action="store_true",
                   help="also report the marginal per-unit-of-supply rates")
    p.set_defaults(fn=_cmd_n2)

    p = sub.add_parser("vcg", parents=[shared], help="VCG baselines")
    p.add_argument("--input", required=True)
    p.add_argument("--family", choices=("multiunit", "capped"), default=None)
    p.add_argument("--caps", type=float, nargs="+", default=None)
    p.add_argument("--table", default=None,
                   help="JSON path mapping comma-joined player sets to capacities")
    p.set_defaults(fn=_cmd_vcg)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except AuctionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (OSError, json.JSONDecodeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
