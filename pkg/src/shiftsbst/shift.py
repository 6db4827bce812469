"""HC-SHIFT: hill climbing in a per-dimension compressed space.

The search alternates a steepest-descent loop over axis and diagonal
neighbours (steps taken in Z-space through any stored basin warping),
bidirectional basin detection in X-space, and restarts one unit outside a
detected basin.  Compression metadata lives in X-space, keyed by dimension
and by the values of all other coordinates (the slice).
"""
from __future__ import annotations

import bisect
import itertools
import json
import math
import random
from dataclasses import dataclass, field, asdict
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from .common import (BudgetExpired, Clock, CountingOracle, FoundOptimum, Initializer,
                     Problem, SearchResult, result_from)
from .warp import SigmoidWarping, step


@dataclass(frozen=True, order=True)
class BasinInterval:
    b_start: int
    b_len: int

    @property
    def b_end(self) -> int:
        return self.b_start + self.b_len - 1

    def __post_init__(self):
        if self.b_len < 1:
            raise ValueError("basin length must be positive")


@dataclass(frozen=True)
class ShiftConfig:
    max_iterations_per_dim: int = 10
    basin_max_search: int = 1000
    patience: int = 20
    max_steps: int = 2000
    alpha: float = 5.0
    # "marginal": a diagonal neighbour credits a dimension only when moving it
    # changes fitness relative to the matching axis neighbour of the other
    # dimension.  "touched": credit every touched dimension on any change.
    attribution: str = "marginal"
    slice_fallback: bool = False

    def __post_init__(self):
        for name in ("max_iterations_per_dim", "basin_max_search", "patience", "max_steps"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.attribution not in ("marginal", "touched"):
            raise ValueError(f"unknown attribution {self.attribution!r}")


PILOT_SHIFT = ShiftConfig(basin_max_search=100, max_steps=200)


def merge_intervals(intervals: Sequence[BasinInterval]) -> List[BasinInterval]:
    """Union of intervals; overlapping or adjacent ones are fused."""
    out: List[BasinInterval] = []
    for iv in sorted(intervals):
        if out and iv.b_start <= out[-1].b_end + 1:
            last = out[-1]
            end = max(last.b_end, iv.b_end)
            out[-1] = BasinInterval(last.b_start, end - last.b_start + 1)
        else:
            out.append(iv)
    return out


class CompressionManager:
    """dim -> slice key (other coordinates) -> disjoint sorted basin intervals."""

    def __init__(self, n: int, alpha: float = 5.0, slice_fallback: bool = False):
        self.n = n
        self.alpha = alpha
        self.slice_fallback = slice_fallback
        self.slices: List[Dict[Tuple[int, ...], List[BasinInterval]]] = [dict() for _ in range(n)]
        self._last: Dict[int, BasinInterval] = {}
        self._cache: Dict[Tuple[int, BasinInterval], SigmoidWarping] = {}

    @staticmethod
    def key(x: Sequence[int], d: int) -> Tuple[int, ...]:
        return tuple(x[:d]) + tuple(x[d + 1:])

    def update(self, d: int, fixed: Tuple[int, ...], b: BasinInterval) -> List[BasinInterval]:
        if b.b_len < 2:
            raise ValueError("basins shorter than 2 are never stored")
        merged = merge_intervals(self.slices[d].get(fixed, []) + [b])
        self.slices[d][fixed] = merged
        self._last[d] = b
        # warpings are cached per (dim, interval); drop those of replaced intervals
        keep = set(merged)
        for k in [k for k in self._cache if k[0] == d and k[1] not in keep]:
            del self._cache[k]
        return merged

    def intervals(self, d: int, fixed: Tuple[int, ...]) -> List[BasinInterval]:
        return list(self.slices[d].get(fixed, []))

    def containing(self, d: int, x: Sequence[int]) -> Optional[BasinInterval]:
        ivs = self.slices[d].get(self.key(x, d))
        xd = x[d]
        if ivs:
            i = bisect.bisect_right(ivs, BasinInterval(xd, 1 << 62)) - 1
            if i >= 0 and ivs[i].b_start <= xd <= ivs[i].b_end:
                return ivs[i]
            return None
        if self.slice_fallback and d in self._last:
            b = self._last[d]
            if b.b_start <= xd <= b.b_end:
                return b
        return None

    def warping(self, d: int, x: Sequence[int]) -> Optional[SigmoidWarping]:
        b = self.containing(d, x)
        if b is None:
            return None
        w = self._cache.get((d, b))
        if w is None:
            w = SigmoidWarping(b.b_start, b.b_len, self.alpha)
            self._cache[(d, b)] = w
        return w

    def stored_count(self) -> int:
        return sum(len(v) for s in self.slices for v in s.values())


class ActiveSet:
    def __init__(self, n: int, patience: int = 20):
        self.active: List[int] = list(range(n))
        self.sigma = [0] * n
        self.patience = patience
        self.history: List[List[int]] = [[] for _ in range(n)]

    def __len__(self):
        return len(self.active)

    def update(self, meaningful) -> List[int]:
        """Reset counters of meaningful active dims, bump the others, prune at patience."""
        dropped = []
        for d in self.active:
            if d in meaningful:
                self.sigma[d] = 0
            else:
                self.sigma[d] += 1
            self.history[d].append(self.sigma[d])
            if self.sigma[d] >= self.patience:
                dropped.append(d)
        if dropped:
            gone = set(dropped)
            self.active = [d for d in self.active if d not in gone]
        return dropped


def _with(x: Tuple[int, ...], d: int, v: int) -> Tuple[int, ...]:
    return x[:d] + (v,) + x[d + 1:]


def detect_1d_basin(F, x: Tuple[int, ...], f: float, d: int, limit: int):
    """Probe both sides of ``x`` along ``d``.

    Per side: the first strictly better point is the boundary (probing stops
    there); otherwise the farthest equal point; otherwise nothing on that side.
    Returns (BasinInterval, left_kind, right_kind) or None when the span is < 2.
    """
    ends = []
    for sign in (-1, 1):
        kind, reach = "none", 0
        for k in range(1, limit + 1):
            fy = F(_with(x, d, x[d] + sign * k))
            if fy < f:
                kind, reach = "better", k
                break
            if fy == f:
                kind, reach = "equal", k
        ends.append((kind, reach))
    (lk, lr), (rk, rr) = ends
    start = x[d] - lr
    length = lr + rr + 1
    if length < 2:
        return None
    return BasinInterval(start, length), lk, rk


class ShiftRun:
    """State of one HC-SHIFT target run (compression persists across trials)."""

    def __init__(self, F, n: int, cfg: ShiftConfig, events: Optional[Callable[[dict], None]] = None):
        self.F = F
        self.n = n
        self.cfg = cfg
        self.cm = CompressionManager(n, cfg.alpha, cfg.slice_fallback)
        self.emit = events or (lambda e: None)
        self.trial = 0
        self.z_moves = 0
        self.deactivations: List[Tuple[int, int, int]] = []  # (trial, z_moves_so_far, dim)
        self.active: ActiveSet = ActiveSet(n, cfg.patience)

    # -- neighbours -----------------------------------------------------
    def axis_values(self, x, d):
        w = self.cm.warping(d, x)
        return step(w, x[d], -1), step(w, x[d], 1)

    def generate_neighbors(self, x: Tuple[int, ...], f: float):
        """Evaluate axis then diagonal neighbours over the active set.

        Returns (neighbours, meaningful) where neighbours is a list of
        (point, fitness, touched dims) and meaningful the credited dims.
        """
        act = self.active.active
        seen: Dict[Tuple[int, ...], float] = {}
        out = []
        meaningful = set()
        vals = {}
        axis_f = {}

        def ev(y):
            if y not in seen:
                seen[y] = self.F(y)
            return seen[y]

        for d in act:
            vals[d] = self.axis_values(x, d)
            for v in vals[d]:
                y = _with(x, d, v)
                fy = ev(y)
                axis_f[(d, v)] = fy
                out.append((y, fy, (d,)))
                if fy != f:
                    meaningful.add(d)
        marginal = self.cfg.attribution == "marginal"
        F = self.F
        for d1, d2 in itertools.combinations(act, 2):  # act is ascending, so d1 < d2
            pre, mid, post = x[:d1], x[d1 + 1:d2], x[d2 + 1:]
            for v1 in vals[d1]:
                f1 = axis_f[(d1, v1)]
                for v2 in vals[d2]:
                    y = pre + (v1,) + mid + (v2,) + post
                    fy = seen.get(y)
                    if fy is None:
                        fy = seen[y] = F(y)
                    out.append((y, fy, (d1, d2)))
                    if fy == f:
                        continue
                    if marginal:
                        if fy != f1:
                            meaningful.add(d2)
                        if fy != axis_f[(d2, v2)]:
                            meaningful.add(d1)
                    else:
                        meaningful.update((d1, d2))
        return out, meaningful

    # -- phases ---------------------------------------------------------
    def hill_climb_loop(self, x, f):
        steps = 0
        while steps < self.cfg.max_steps and len(self.active):
            try:
                nbrs, meaningful = self.generate_neighbors(x, f)
            except FoundOptimum:
                self.z_moves += 1
                self.emit({"event": "climb-step", "trial": self.trial, "success": True})
                raise
            best_x, best_f = x, f
            for y, fy, _ in nbrs:
                if fy < best_f:
                    best_x, best_f = y, fy
            for d in self.active.update(meaningful):
                self.deactivations.append((self.trial, self.z_moves, d))
                self.emit({"event": "deactivate", "trial": self.trial, "dim": d})
            if best_f < f:
                x, f = best_x, best_f
                steps += 1
                self.z_moves += 1
                self.emit({"event": "climb-step", "trial": self.trial, "x": list(x), "f": f})
            else:
                break
        return x, f

    def detect_basins(self, x, f):
        basins = []
        for d in list(self.active.active):
            found = detect_1d_basin(self.F, x, f, d, self.cfg.basin_max_search)
            if found is None:
                continue
            b, lk, rk = found
            merged = self.cm.update(d, CompressionManager.key(x, d), b)
            basins.append((d, b))
            self.emit({"event": "basin-found", "trial": self.trial, "dim": d,
                       "start": b.b_start, "len": b.b_len, "left": lk, "right": rk,
                       "merged": [[m.b_start, m.b_len] for m in merged]})
        return basins

    def select_restart(self, x, f, basins):
        best = None
        for d, b in basins:
            for v in (b.b_start - 1, b.b_end + 1):
                y = _with(x, d, v)
                try:
                    fy = self.F(y)
                except BudgetExpired:
                    return best if best is not None else (x, f)
                if best is None or fy < best[1]:
                    best = (y, fy)
        self.emit({"event": "restart", "trial": self.trial, "x": list(best[0]), "f": best[1]})
        return best

    def trial_run(self, x0, f0):
        """One pass of the main loop from (x0, f0)."""
        self.active = ActiveSet(self.n, self.cfg.patience)
        x, f = x0, f0
        k_max = self.cfg.max_iterations_per_dim * self.n
        for _ in range(k_max):
            if not len(self.active):
                return "inactive"
            x, f = self.hill_climb_loop(x, f)
            if not len(self.active):
                return "inactive"
            basins = self.detect_basins(x, f)
            if not basins:
                return "no-basin"
            x, f = self.select_restart(x, f, basins)
        return "iteration-cap"


def hc_shift(problem: Problem, cfg: ShiftConfig, init: Initializer, clock: Clock,
             rng: random.Random, events: Optional[Callable[[dict], None]] = None) -> SearchResult:
    oracle = CountingOracle(problem.evaluate, clock)
    run = ShiftRun(oracle, problem.arity, cfg, events)
    trials = 0
    best_seen = math.inf
    best_moves = 0
    stops: Dict[str, int] = {}
    try:
        while True:
            x0 = init.sample(rng)
            run.trial = trials + 1
            moves_before = run.z_moves
            f0 = oracle(x0)
            trials += 1
            try:
                why = run.trial_run(x0, f0)
            finally:
                if oracle.best_f < best_seen:
                    best_seen = oracle.best_f
                    best_moves = run.z_moves - moves_before
            stops[why] = stops.get(why, 0) + 1
    except FoundOptimum:
        if trials < run.trial:
            trials = run.trial  # the start point itself was optimal
    except BudgetExpired:
        pass
    extra = {"deactivations": run.deactivations, "stops": stops,
             "stored_basins": run.cm.stored_count(), "k_max": cfg.max_iterations_per_dim * problem.arity,
             "total_z_moves": run.z_moves}
    return result_from(problem, oracle, clock, convergence_speed=best_moves,
                       num_trials=trials, extra=extra)


class JsonlEvents:
    """Write phase events as JSON lines."""

    def __init__(self, fh):
        self.fh = fh

    def __call__(self, event: dict) -> None:
        self.fh.write(json.dumps(event, sort_keys=True) + "\n")
