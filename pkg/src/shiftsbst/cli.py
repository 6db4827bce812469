"""Command line entry point: run, compare, sweep, dump-landscape."""
from __future__ import annotations

import argparse
import contextlib
import sys
import time
from pathlib import Path
from typing import List, Optional

from . import harness
from .corpus import shipped
from .landscapes import dump_csv, grid_points, make_synthetic
from .program import load_directory
from .shift import JsonlEvents


def _config(args) -> harness.RunConfig:
    cfg = harness.RunConfig.pilot() if args.pilot else harness.RunConfig()
    if args.config:
        cfg = harness.load_config(args.config, cfg)
    if args.budget is not None:
        cfg.time_budget = args.budget
    if args.seed is not None:
        cfg.random_seed = args.seed
    if args.init is not None:
        cfg.init_mode = args.init
    if args.base_seed_only:
        cfg.base_seed_only = True
    return cfg


def _programs(args):
    progs = load_directory(args.corpus) if args.corpus else shipped()
    if args.program:
        wanted = set(args.program)
        progs = [p for p in progs if p.name in wanted]
        missing = wanted - {p.name for p in progs}
        if missing:
            raise SystemExit(f"unknown program(s): {', '.join(sorted(missing))}")
    return progs


def _common(sp):
    sp.add_argument("--budget", type=float, help="seconds per target (default 2)")
    sp.add_argument("--seed", type=int, help="base seed (default 42)")
    sp.add_argument("--init", choices=["biased", "random"])
    sp.add_argument("--config", help="key=value file using hyperparameter names")
    sp.add_argument("--pilot", action="store_true", help="start from pilot hyperparameters")
    sp.add_argument("--base-seed-only", action="store_true",
                    help="reseed every target with the base seed itself")
    sp.add_argument("-q", "--quiet", action="store_true")


def _corpus_args(sp):
    sp.add_argument("--corpus", help="directory of .bp files (default: shipped programs)")
    sp.add_argument("--program", action="append", help="restrict to this program (repeatable)")
    sp.add_argument("--out", default="results", help="output directory")


def _summary(rep: harness.SuiteReport) -> str:
    return (f"{rep.algorithm}: {rep.covered}/{rep.targets} targets "
            f"({rep.coverage:.2f}%) in {rep.wall_time:.1f}s")


def cmd_run(args, algorithms: List[str]) -> int:
    cfg = _config(args)
    progs = _programs(args)
    log = None if args.quiet else (lambda m: print(m, file=sys.stderr))
    with contextlib.ExitStack() as stack:
        events = None
        if getattr(args, "events", None):
            events = JsonlEvents(stack.enter_context(open(args.events, "w", encoding="utf-8")))
        for alg in algorithms:
            if events is not None and alg == "hc-shift":
                rep = _run_with_events(alg, progs, cfg, args.out, events, log)
            else:
                rep = harness.run_suite(alg, progs, cfg, out_dir=args.out, progress=log)
            print(_summary(rep))
    return 0


def _run_with_events(alg, progs, cfg, out, events, log):
    results, rows = [], []
    t0 = time.perf_counter()
    for p in progs:
        for t in harness.make_targets(p):
            def tagged(e, _p=p.name, _t=t.key):
                events({"program": _p, "target": _t, **e})
            r = harness.run_target(alg, p, t, cfg, events=tagged)
            results.append(r)
            rows.append(harness.result_row(alg, r))
            if log:
                log(f"{alg} {p.name} {t.key} success={r.success}")
    rep = harness.SuiteReport(alg, harness.RunManifest(alg, cfg.snapshot(), cfg.random_seed,
                                                       harness.corpus_hash(progs)),
                              results, rows, len(results), sum(r.success for r in results),
                              time.perf_counter() - t0)
    harness.save_report(rep, out)
    return rep


def cmd_sweep(args) -> int:
    cfg = _config(args)
    algs = args.algorithms.split(",")
    for a in algs:
        if a not in harness.ALGORITHMS:
            raise SystemExit(f"unknown algorithm {a!r}")
    grid = [int(v) for v in args.grid.split(",")] if args.grid else DEFAULT_GRIDS[args.kind]
    log = None if args.quiet else (lambda m: print(m, file=sys.stderr))
    progs = _programs(args) if args.kind == "seeds" else None
    rows = harness.sweep(args.kind, grid, algs, cfg, programs=progs, progress=log)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    stem = args.kind.replace("-", "_")
    with open(out / f"sweep_{stem}.csv", "w", newline="", encoding="utf-8") as fh:
        harness.write_table(rows, fh)
    if args.kind == "seeds":
        table = harness.seed_table(rows)
        with open(out / "sweep_seeds_cv.csv", "w", newline="", encoding="utf-8") as fh:
            harness.write_table(table, fh)
        for r in table:
            print(f"{r['algorithm']}: coverage mean={r['coverage_mean']:.2f} "
                  f"std={r['coverage_std']:.3f} cv={r['coverage_cv']:.4f}")
    else:
        for r in rows:
            print(f"{r['param']} {r['algorithm']}: coverage={r['coverage']:.1f}% "
                  f"mean_time={r['mean_time']:.3f}s")
    return 0


DEFAULT_GRIDS = {
    "plateau-length": [240, 2400, 24000, 86400],
    "rugged-period": [1, 2, 4, 8],
    "irrelevant-dims": [1, 10, 50, 100],
    "seeds": list(range(41, 51)),
}


def cmd_dump(args) -> int:
    params = {}
    for kv in args.param or []:
        k, _, v = kv.partition("=")
        params[k] = float(v) if "." in v else int(v)
    land = make_synthetic(args.kind, args.dim, **params)
    grid = None
    if args.step != 1:
        grid = list(grid_points(land.domain, args.step))
    if args.out == "-":
        dump_csv(land, grid, sys.stdout)
    else:
        with open(args.out, "w", newline="", encoding="utf-8") as fh:
            dump_csv(land, grid, fh)
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="shiftsbst",
                                 description="Search-based branch coverage with HC, GA and HC-SHIFT.")
    sub = ap.add_subparsers(dest="cmd", required=True)

    r = sub.add_parser("run", help="one algorithm over a corpus")
    r.add_argument("--algorithm", "-a", choices=harness.ALGORITHMS, default="hc-shift")
    r.add_argument("--events", help="write HC-SHIFT phase events as JSON lines")
    _corpus_args(r)
    _common(r)

    c = sub.add_parser("compare", help="all three algorithms over a corpus")
    _corpus_args(c)
    _common(c)

    s = sub.add_parser("sweep", help="parameterized family sweep")
    s.add_argument("kind", choices=harness.SWEEP_KINDS)
    s.add_argument("--grid", help="comma separated parameter values (seeds for 'seeds')")
    s.add_argument("--algorithms", default=",".join(harness.ALGORITHMS))
    _corpus_args(s)
    _common(s)

    d = sub.add_parser("dump-landscape", help="CSV samples of a synthetic landscape")
    d.add_argument("kind", choices=["needle", "plateau", "rugged", "combined"])
    d.add_argument("dim", type=int, choices=[1, 2])
    d.add_argument("--param", action="append", help="override, e.g. period=16")
    d.add_argument("--step", type=int, default=1)
    d.add_argument("--out", default="-")
    return ap


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if args.cmd == "run":
        return cmd_run(args, [args.algorithm])
    if args.cmd == "compare":
        return cmd_run(args, list(harness.ALGORITHMS))
    if args.cmd == "sweep":
        return cmd_sweep(args)
    return cmd_dump(args)


if __name__ == "__main__":
    sys.exit(main())
