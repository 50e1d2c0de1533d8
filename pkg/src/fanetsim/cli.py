"""Command line entry point: run, sweep, check, chart, oracle."""

from __future__ import annotations

import argparse
import logging
import os
import sys
import time

from .harness.config import ConfigError, ScenarioConfig, load_scenario
from .harness.run import csv_text, run_scenario
from .harness.sweep import Aggregates, parse_attack, run_sweep, summary_table

EXIT_OK, EXIT_TREND, EXIT_CONFIG = 0, 1, 2


def _config(args) -> ScenarioConfig:
    cfg = load_scenario(args.config) if args.config else ScenarioConfig()
    over = {}
    if args.seed is not None:
        over["seed"] = args.seed
        over["seeds"] = (args.seed,)
    if args.out is not None:
        over["out_dir"] = args.out
    if args.attack is not None:
        kinds = [a.strip() for a in args.attack.split(",") if a.strip()]
        kind, placement = parse_attack(kinds[0])
        over.update(attack=kind, placement=placement, attacks=tuple(kinds))
    if args.ratio is not None:
        over["ratio"] = args.ratio
        over["ratios"] = (args.ratio,)
    if args.nodes is not None:
        over["nodes"] = args.nodes
        over["densities"] = (args.nodes,)
    return cfg.with_(**over).validate()


def cmd_run(args):
    cfg = _config(args)
    t0 = time.perf_counter()
    res = run_scenario(cfg, out_dir=cfg.out_dir)
    sys.stdout.write(csv_text([res.row()]))
    logging.info("run finished in %.2f s", time.perf_counter() - t0)
    return EXIT_OK


def cmd_sweep(args):
    cfg = _config(args)
    progress = None
    if args.verbose:
        def progress(k, total, c):
            logging.info("%d/%d nodes=%d %s:%s ratio=%g seed=%d", k, total, c.nodes,
                         c.attack, c.placement, c.ratio, c.seed)
    res = run_sweep(cfg, jobs=args.jobs, out_dir=cfg.out_dir, progress=progress)
    print(summary_table(res.aggregates))
    print(f"wrote {os.path.join(cfg.out_dir, 'aggregates.csv')}")
    return EXIT_OK


def cmd_check(args):
    from .harness.trends import MissingCellsError, ReferenceTable, check_trends, report_text
    if args.reference:
        table = ReferenceTable.load()
    else:
        path = args.aggregates or os.path.join(args.out or "results", "aggregates.csv")
        with open(path) as fh:
            table = Aggregates.from_csv(fh.read())
    try:
        outcomes = check_trends(table)
    except MissingCellsError as exc:
        print(exc, file=sys.stderr)
        return EXIT_TREND
    print(report_text(outcomes))
    return EXIT_OK if all(o.passed for o in outcomes) else EXIT_TREND


def cmd_chart(args):
    from .harness.charts import emit_charts
    path = args.aggregates or os.path.join(args.out or "results", "aggregates.csv")
    with open(path) as fh:
        agg = Aggregates.from_csv(fh.read())
    for p in emit_charts(agg, args.out or "results"):
        print(p)
    return EXIT_OK


def cmd_oracle(args):
    from .oracles import run_all
    results = run_all()
    for r in results:
        print(r.line())
    return EXIT_OK if all(r.passed for r in results) else EXIT_TREND


def build_parser():
    p = argparse.ArgumentParser(prog="fanetsim", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)
    for name, fn, help_ in (("run", cmd_run, "run one scenario"),
                            ("sweep", cmd_sweep, "run the attack x ratio x seed grid"),
                            ("check", cmd_check, "evaluate trend rules"),
                            ("chart", cmd_chart, "draw PDR/E2E/overhead charts"),
                            ("oracle", cmd_oracle, "small-topology validation suite")):
        sp = sub.add_parser(name, help=help_)
        sp.set_defaults(func=fn)
        sp.add_argument("--config", metavar="PATH")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--out", metavar="DIR")
        sp.add_argument("--jobs", type=int, default=1)
        sp.add_argument("--attack", metavar="KIND")
        sp.add_argument("--ratio", type=float)
        sp.add_argument("--nodes", type=int)
        sp.add_argument("-v", "--verbose", action="store_true")
        if name in ("check", "chart"):
            sp.add_argument("--aggregates", metavar="CSV")
        if name == "check":
            sp.add_argument("--reference", action="store_true",
                            help="check the published reference values instead of a sweep")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        for problem in exc.problems:
            print(f"config error: {problem}", file=sys.stderr)
        return EXIT_CONFIG
    except FileNotFoundError as exc:
        print(f"config error: {exc.filename}: no such file", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
