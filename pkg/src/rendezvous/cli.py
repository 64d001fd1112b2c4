"""Command line interface: ``rendezvous <command> ...``."""

from __future__ import annotations

import argparse
import sys
from fractions import Fraction
from pathlib import Path

from . import explorer
from .adversaries import (
    assignment_random,
    format_scenario,
    make_graph,
    parse_scenario,
    scenario_sec4,
)
from .engine import Scenario
from .explorer import UxsTable, build_uxs, verify_uxs
from .graph import parse_port_graph
from .harness import (
    check_claim_concurrency,
    evaluate,
    format_csv,
    load_config,
    run_experiment,
)
from .labels import modified_label
from .strongrv import phase_plan


def _pair(text: str, conv=int):
    a, b = text.split(",")
    return conv(a), conv(b)


def _table(args) -> UxsTable:
    if getattr(args, "table", None):
        return UxsTable.from_file(args.table)
    return explorer.default_table()


def _write(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_uxs(args) -> int:
    if args.action == "build":
        table: dict[int, explorer.Uxs] = {}
        n, prev = 1, None
        while n <= args.max:
            prev = build_uxs(n, prev)
            table[n] = prev
            print(f"n={n} L={prev.L}", file=sys.stderr)
            n *= 2
        _write(explorer.format_table(table), args.out)
        return 0
    table = _table(args)
    if args.action == "show":
        sizes = [args.n] if args.n else [s for s in (1, 2, 4, 8, 16, 32, 64, 128) if s <= table.cap]
        for s in sizes:
            u = table.uxs(s)
            print(f"n={s} L={u.L} P={2 * u.L}")
        return 0
    # verify
    sizes = [args.n] if args.n else [1, 2, 4, 8]
    ok = True
    for s in sizes:
        mode = args.mode or ("exhaustive" if s <= 4 else "sampled")
        report = verify_uxs(table.uxs(s), s, mode, k=args.k, seed=args.seed)
        print(report.summary())
        ok &= report.passed
    return 0 if ok else 1


def cmd_plan(args) -> int:
    plan = phase_plan(args.h, modified_label(args.label), _table(args))
    sys.stdout.write(plan.to_text())
    return 0


def _scenario_from_args(args, table) -> Scenario:
    if args.scenario:
        return parse_scenario(Path(args.scenario).read_text(), Path(args.scenario).parent)
    if args.graph:
        g = parse_port_graph(Path(args.graph).read_text())
    else:
        g = make_graph(args.family, args.n, args.seed)
    labels = _pair(args.labels)
    starts = _pair(args.starts)
    a = assignment_random(g, args.seed, Fraction(args.tau_max), args.den_bound, pt=table)
    return Scenario(g, labels, starts, a)


def _finish(sc: Scenario, table, args, lower_bound=False) -> int:
    horizon = Fraction(args.horizon) if args.horizon else None
    row, tr, rep, ctx = evaluate(sc, table, horizon, scenario_id="cli", seed=args.seed, lower_bound=lower_bound)
    sys.stdout.write(rep.serialize())
    print(f"alpha={ctx.alpha}")
    print(f"bound={ctx.bound}")
    print(f"theorem1={'pass' if row.theorem1 else 'FAIL'}")
    if lower_bound:
        print(f"lower_bound={'pass' if row.lower_bound_ok else 'FAIL'} (tau={ctx.tau})")
    print(f"claim={check_claim_concurrency(tr, ctx).summary()}")
    if args.trace_out:
        Path(args.trace_out).write_text(tr.serialize())
    if args.scenario_out:
        Path(args.scenario_out).write_text(format_scenario(sc))
    return 0 if row.ok else 1


def cmd_run(args) -> int:
    table = _table(args)
    return _finish(_scenario_from_args(args, table), table, args)


def cmd_sec4(args) -> int:
    table = _table(args)
    g = parse_port_graph(Path(args.graph).read_text()) if args.graph else make_graph(args.family, args.n, args.seed)
    sc = scenario_sec4(g, _pair(args.labels), _pair(args.starts), Fraction(args.t1), Fraction(args.t2), table)
    return _finish(sc, table, args, lower_bound=True)


def cmd_batch(args) -> int:
    cfg = load_config(args.config)
    if args.table:
        cfg["table"] = args.table
    rows = run_experiment(cfg)
    _write(format_csv(rows), args.out)
    bad = [r.scenario_id for r in rows if not r.ok]
    print(f"{len(rows)} rows, {len(bad)} failing" + (f": {' '.join(bad)}" if bad else ""), file=sys.stderr)
    return 0 if not bad else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="rendezvous", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    u = sub.add_parser("uxs", help="build, verify or show exploration sequences")
    u.add_argument("action", choices=["build", "verify", "show"])
    u.add_argument("--max", type=int, default=explorer.DEFAULT_CAP, help="largest size to build")
    u.add_argument("--n", type=int, help="single size to verify or show")
    u.add_argument("--mode", choices=["exhaustive", "sampled"])
    u.add_argument("-k", type=int, default=explorer.SAMPLED_CHECKS)
    u.add_argument("--seed", type=int, default=0)
    u.add_argument("--table")
    u.add_argument("--out")
    u.set_defaults(func=cmd_uxs)

    pl = sub.add_parser("plan", help="print the actions of Phase(h) for a label")
    pl.add_argument("--label", type=int, required=True)
    pl.add_argument("--h", type=int, required=True)
    pl.add_argument("--table")
    pl.set_defaults(func=cmd_plan)

    def scenario_flags(sp, labels_required=True):
        sp.add_argument("--graph", help="graph file")
        sp.add_argument("--family", default="random", choices=["random", "path", "cycle", "complete"])
        sp.add_argument("--n", type=int, default=4)
        sp.add_argument("--labels", default="1,2")
        sp.add_argument("--starts", default="0,1")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--horizon", help="time budget since the earlier wakeup")
        sp.add_argument("--table")
        sp.add_argument("--trace-out")
        sp.add_argument("--scenario-out")

    r = sub.add_parser("run", help="run a single scenario and check it")
    r.add_argument("--scenario", help="scenario file")
    r.add_argument("--tau-max", default="16")
    r.add_argument("--den-bound", type=int, default=8)
    scenario_flags(r)
    r.set_defaults(func=cmd_run)

    s4 = sub.add_parser("sec4", help="constant-speed scenario with aligned first departures")
    s4.add_argument("--t1", required=True)
    s4.add_argument("--t2", required=True)
    scenario_flags(s4)
    s4.set_defaults(func=cmd_sec4)

    b = sub.add_parser("batch", help="run a batch from a key=value config file")
    b.add_argument("--config", required=True)
    b.add_argument("--out")
    b.add_argument("--table")
    b.set_defaults(func=cmd_batch)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
