"""Experiment protocol: per-target budgets, seeding, CSV rows, coverage and sweeps."""
from __future__ import annotations

import csv
import dataclasses
import hashlib
import io
import math
import random
import statistics
import time
import traceback
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, Iterable, List, Optional, Sequence

from .common import Clock, Initializer, Problem, SearchResult
from .corpus import active_easy, corpus_hash, rugged_period, schedule_cycle
from .ga import GAConfig, ga_search
from .hc import HCConfig, hc_restarts
from .program import BranchProgram, Target, make_objective, make_targets
from .shift import ShiftConfig, hc_shift

ALGORITHMS = ("hc", "hc-shift", "ga")

CSV_FIELDS = ["algorithm", "function", "lineno", "outcome", "convergence_speed", "nfe",
              "best_fitness", "best_solution", "success", "num_trials", "total_time",
              "time_to_solution", "generations", "error", "stop"]
TIMING_FIELDS = ("total_time", "time_to_solution")
# When the clock ends a run, how far it got depends on machine speed.
PROGRESS_FIELDS = ("convergence_speed", "nfe", "best_fitness", "best_solution", "num_trials",
                   "generations")


# ---------------------------------------------------------------- configuration

@dataclass
class RunConfig:
    """All tunables; field names double as config-file keys."""

    time_budget: float = 2.0
    random_seed: int = 42
    init_mode: str = "biased"
    base_seed_only: bool = False
    hc_max_steps: int = 2000
    shift_max_iterations_per_dimension: int = 10
    shift_basin_max_search: int = 1000
    shift_active_dimension_updates: bool = True
    shift_patience: int = 20
    shift_max_steps: int = 2000
    shift_attribution: str = "marginal"
    shift_slice_fallback: bool = False
    ga_population_size: int = 10000
    ga_tournament_size: int = 3
    ga_elite_ratio: float = 0.1
    ga_mutation_steps: tuple = (-3, -2, -1, 1, 2, 3)
    ga_max_generations: Optional[int] = None
    ga_stall_generations: Optional[int] = 100

    @classmethod
    def pilot(cls, **kw) -> "RunConfig":
        base = dict(hc_max_steps=200, shift_basin_max_search=100, shift_max_steps=200,
                    ga_population_size=1000)
        base.update(kw)
        return cls(**base)

    def hc(self) -> HCConfig:
        return HCConfig(max_steps=self.hc_max_steps)

    def shift(self) -> ShiftConfig:
        return ShiftConfig(max_iterations_per_dim=self.shift_max_iterations_per_dimension,
                           basin_max_search=self.shift_basin_max_search,
                           patience=self.shift_patience if self.shift_active_dimension_updates
                           else 10 ** 9,
                           max_steps=self.shift_max_steps, attribution=self.shift_attribution,
                           slice_fallback=self.shift_slice_fallback)

    def ga(self) -> GAConfig:
        return GAConfig(population=self.ga_population_size, tournament_k=self.ga_tournament_size,
                        elite_ratio=self.ga_elite_ratio, steps=tuple(self.ga_mutation_steps),
                        max_generations=self.ga_max_generations,
                        stall_generations=self.ga_stall_generations)

    def snapshot(self) -> Dict:
        return dataclasses.asdict(self)


def _coerce(raw: str, current):
    raw = raw.strip()
    if isinstance(current, bool):
        if raw.lower() in ("1", "true", "yes", "on", "enabled"):
            return True
        if raw.lower() in ("0", "false", "no", "off", "disabled"):
            return False
        raise ValueError(f"not a boolean: {raw!r}")
    if isinstance(current, tuple):
        return tuple(int(v) for v in raw.replace(",", " ").split())
    if raw.lower() in ("none", ""):
        return None
    if isinstance(current, int):
        return int(raw)
    if isinstance(current, float):
        return float(raw)
    if current is None:
        return int(raw)
    return raw


def parse_config(text: str, base: Optional[RunConfig] = None) -> RunConfig:
    """Apply ``key = value`` lines (``#`` comments) on top of ``base``."""
    cfg = dataclasses.replace(base or RunConfig())
    known = {f.name for f in dataclasses.fields(RunConfig)}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip().replace("-", "_")
        if not sep or key not in known:
            raise ValueError(f"config line {lineno}: unknown or malformed {line!r}")
        setattr(cfg, key, _coerce(value, getattr(cfg, key)))
    return cfg


def load_config(path, base: Optional[RunConfig] = None) -> RunConfig:
    return parse_config(Path(path).read_text(encoding="utf-8"), base)


# ---------------------------------------------------------------- single target

def derive_seed(base_seed: int, program: str, target_key: str, base_only: bool = False) -> int:
    if base_only:
        return base_seed
    h = hashlib.sha256(f"{base_seed}|{program}|{target_key}".encode()).digest()
    return int.from_bytes(h[:8], "big")


def make_problem(program: BranchProgram, target: Target) -> Problem:
    return Problem(program.name, target.branch_id, target.want, make_objective(program, target),
                   list(program.domain), list(program.constants))


def run_problem(algorithm: str, problem: Problem, cfg: RunConfig, seed: int,
                events: Optional[Callable[[dict], None]] = None) -> SearchResult:
    """Reseed, then dispatch.  The clock starts inside the search, right before
    its first oracle call."""
    if algorithm not in ALGORITHMS:
        raise ValueError(f"unknown algorithm {algorithm!r}")
    rng = random.Random(seed)
    init = Initializer(cfg.init_mode, problem.domain, problem.constants)
    clock = Clock(cfg.time_budget)
    try:
        if algorithm == "hc":
            return hc_restarts(problem, cfg.hc(), init, clock, rng)
        if algorithm == "hc-shift":
            return hc_shift(problem, cfg.shift(), init, clock, rng, events)
        return ga_search(problem, cfg.ga(), init, clock, rng)
    except Exception as err:  # a crash becomes a failed row
        note = f"{type(err).__name__}: {err}".replace("\n", " ")
        tb = traceback.format_exc()
    return SearchResult(problem.function, problem.lineno, problem.outcome, 0, 0, math.inf,
                        None, False, 0, clock.elapsed(), None,
                        0 if algorithm == "ga" else None, note, "crash",
                        {"traceback": tb})


def run_target(algorithm: str, program: BranchProgram, target: Target,
               cfg: Optional[RunConfig] = None, seed: Optional[int] = None,
               events: Optional[Callable[[dict], None]] = None) -> SearchResult:
    cfg = cfg or RunConfig()
    base = cfg.random_seed if seed is None else seed
    s = derive_seed(base, program.name, target.key, cfg.base_seed_only)
    return run_problem(algorithm, make_problem(program, target), cfg, s, events)


# ---------------------------------------------------------------- CSV

def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return "True" if v else "False"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, tuple):
        return " ".join(str(int(c)) for c in v)
    return str(v)


def result_row(algorithm: str, r: SearchResult) -> Dict[str, str]:
    d = r.row()
    d["algorithm"] = algorithm
    return {k: _fmt(d[k]) for k in CSV_FIELDS}


def write_csv(rows: Iterable[Dict[str, str]], out) -> None:
    w = csv.DictWriter(out, fieldnames=CSV_FIELDS, quoting=csv.QUOTE_ALL,
                       lineterminator="\r\n")
    w.writeheader()
    for row in rows:
        w.writerow(row)


def csv_text(rows: Iterable[Dict[str, str]]) -> str:
    buf = io.StringIO()
    write_csv(rows, buf)
    return buf.getvalue()


def read_csv(text: str) -> List[Dict[str, str]]:
    return list(csv.DictReader(io.StringIO(text)))


def strip_timing(text: str) -> str:
    """CSV text with timing columns blanked, for reproducibility comparisons.

    Rows stopped by the clock also lose their progress columns, which measure
    how much work fit into the budget rather than what the search decided.
    """
    rows = read_csv(text)
    for r in rows:
        for k in TIMING_FIELDS:
            r[k] = ""
        if r.get("stop") == "budget":
            for k in PROGRESS_FIELDS:
                r[k] = ""
    return csv_text(rows)


# ---------------------------------------------------------------- suites

@dataclass
class RunManifest:
    algorithm: str
    config: Dict
    seed: int
    corpus_hash: str
    timestamp: str = field(default_factory=lambda: time.strftime("%Y-%m-%dT%H:%M:%S"))


@dataclass
class SuiteReport:
    algorithm: str
    manifest: RunManifest
    results: List[SearchResult]
    rows: List[Dict[str, str]]
    targets: int
    covered: int
    wall_time: float
    per_program: List[Dict] = field(default_factory=list)

    @property
    def coverage(self) -> float:
        return 100.0 * self.covered / self.targets if self.targets else 0.0


def coverage_from_rows(rows: Sequence[Dict[str, str]]) -> float:
    if not rows:
        return 0.0
    return 100.0 * sum(r["success"] == "True" for r in rows) / len(rows)


def run_suite(algorithm: str, programs: Sequence[BranchProgram], cfg: Optional[RunConfig] = None,
              seed: Optional[int] = None, out_dir=None,
              progress: Optional[Callable[[str], None]] = None) -> SuiteReport:
    """Run one algorithm on every target of every program, sequentially."""
    cfg = cfg or RunConfig()
    seed = cfg.random_seed if seed is None else seed
    manifest = RunManifest(algorithm, cfg.snapshot(), seed, corpus_hash(programs))
    t0 = time.perf_counter()
    results, rows, per_program = [], [], []
    for p in programs:
        mine = []
        for t in make_targets(p):
            r = run_target(algorithm, p, t, cfg, seed)
            mine.append(r)
            rows.append(result_row(algorithm, r))
            if progress:
                progress(f"{algorithm} {p.name} {t.key} success={r.success} "
                         f"t={r.total_time:.3f}s")
        results.extend(mine)
        if mine:
            per_program.append({
                "algorithm": algorithm, "program": p.name, "category": p.category,
                "targets": len(mine), "covered": sum(r.success for r in mine),
                "expected": p.expected_coverable,
                "avg_trials": statistics.fmean(r.num_trials for r in mine),
                "avg_time": statistics.fmean(r.total_time for r in mine)})
    report = SuiteReport(algorithm, manifest, results, rows, len(results),
                         sum(r.success for r in results), time.perf_counter() - t0, per_program)
    if out_dir is not None:
        save_report(report, out_dir)
    return report


def save_report(report: SuiteReport, out_dir) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    stem = f"{report.algorithm}_seed{report.manifest.seed}"
    with open(out / f"{stem}.csv", "w", newline="", encoding="utf-8") as fh:
        write_csv(report.rows, fh)
    with open(out / f"{stem}_programs.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=["algorithm", "program", "category", "targets",
                                           "covered", "expected", "avg_trials", "avg_time"],
                           lineterminator="\r\n")
        w.writeheader()
        w.writerows(report.per_program)
    import json
    man = dataclasses.asdict(report.manifest)
    man.update(coverage=report.coverage, targets=report.targets, covered=report.covered,
               wall_time=report.wall_time)
    (out / f"{stem}_manifest.json").write_text(json.dumps(man, indent=2, default=str) + "\n")
    return out / f"{stem}.csv"


# ---------------------------------------------------------------- sweeps

SWEEP_KINDS = ("plateau-length", "rugged-period", "irrelevant-dims", "seeds")
SWEEP_FIELDS = ["kind", "param", "algorithm", "targets", "covered", "coverage", "mean_time",
                "total_time"]


def sweep_programs(kind: str, value) -> List[BranchProgram]:
    if kind == "plateau-length":
        day = int(value)  # seconds per cycle unit; B keeps the one-hour ratio
        return [schedule_cycle(7, max(1, day // 24), day=day)]
    if kind == "rugged-period":
        return [rugged_period(int(value))]
    if kind == "irrelevant-dims":
        return [active_easy(int(value))]
    raise ValueError(f"no program family for sweep kind {kind!r}")


def success_targets(p: BranchProgram) -> List[Target]:
    """The deepest true-direction target: the branch the family is built around."""
    ts = [t for t in make_targets(p) if t.want]
    deepest = max(len(t.guard_chain) for t in ts)
    return [t for t in ts if len(t.guard_chain) == deepest]


def sweep(kind: str, grid: Sequence, algorithms: Sequence[str] = ALGORITHMS,
          cfg: Optional[RunConfig] = None, programs: Optional[Sequence[BranchProgram]] = None,
          success_only: bool = True,
          progress: Optional[Callable[[str], None]] = None) -> List[Dict]:
    """One row per (parameter value, algorithm).

    For the ``seeds`` kind the grid is a list of base seeds and ``programs``
    is the suite; use ``seed_table`` for the mean/std/CV summary.
    """
    cfg = cfg or RunConfig()
    rows = []
    for value in grid:
        for alg in algorithms:
            if kind == "seeds":
                rep = run_suite(alg, programs or [], cfg, seed=int(value))
                res = rep.results
            else:
                res = []
                for p in sweep_programs(kind, value):
                    ts = success_targets(p) if success_only else make_targets(p)
                    res += [run_target(alg, p, t, cfg) for t in ts]
            row = {"kind": kind, "param": value, "algorithm": alg, "targets": len(res),
                   "covered": sum(r.success for r in res),
                   "coverage": 100.0 * sum(r.success for r in res) / max(len(res), 1),
                   "mean_time": statistics.fmean(r.total_time for r in res) if res else 0.0,
                   "total_time": sum(r.total_time for r in res)}
            if kind == "irrelevant-dims":
                row["pruned"] = max((len(r.extra.get("deactivations", ())) for r in res),
                                    default=0)
            rows.append(row)
            if progress:
                progress(f"{kind} {value} {alg} coverage={row['coverage']:.1f}")
    return rows


def _cv(xs: Sequence[float]) -> float:
    m = statistics.fmean(xs)
    s = statistics.pstdev(xs) if len(xs) > 1 else 0.0
    return s / m if m else 0.0


def seed_table(rows: Sequence[Dict]) -> List[Dict]:
    """Per-algorithm mean/std/CV of coverage and mean time over a seeds sweep."""
    out = []
    for alg in dict.fromkeys(r["algorithm"] for r in rows):
        cov = [r["coverage"] for r in rows if r["algorithm"] == alg]
        tim = [r["mean_time"] for r in rows if r["algorithm"] == alg]
        out.append({"algorithm": alg, "runs": len(cov),
                    "coverage_mean": statistics.fmean(cov),
                    "coverage_std": statistics.pstdev(cov), "coverage_cv": _cv(cov),
                    "time_mean": statistics.fmean(tim), "time_std": statistics.pstdev(tim),
                    "time_cv": _cv(tim)})
    return out


def write_table(rows: Sequence[Dict], out) -> None:
    if not rows:
        return
    fields = list(rows[0].keys())
    for r in rows:
        fields += [k for k in r if k not in fields]
    w = csv.DictWriter(out, fieldnames=fields, lineterminator="\r\n")
    w.writeheader()
    w.writerows(rows)
