"""Coordinate-wise steepest-descent hill climbing with random restarts."""
from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

from .common import (BudgetExpired, Clock, CountingOracle, FoundOptimum, Initializer,
                     Problem, SearchResult, result_from)


@dataclass(frozen=True)
class HCConfig:
    max_steps: int = 2000

    def __post_init__(self):
        if self.max_steps < 1:
            raise ValueError("max_steps must be >= 1")


PILOT_HC = HCConfig(max_steps=200)


def neighbors(x: Tuple[int, ...]):
    """The 2n axis neighbours: lowest dimension first, minus before plus."""
    for d in range(len(x)):
        for delta in (-1, 1):
            y = list(x)
            y[d] += delta
            yield tuple(y)


class Climb:
    """One climb; keeps its trajectory even when unwound by the oracle."""

    def __init__(self):
        self.trajectory: List[Tuple[Tuple[int, ...], float]] = []
        self.stop = ""

    @property
    def moves(self) -> int:
        return max(len(self.trajectory) - 1, 0)

    def run(self, F, x0: Sequence[int], cfg: HCConfig, f0: Optional[float] = None):
        x = tuple(int(v) for v in x0)
        if f0 is None:
            f0 = F(x)
        self.trajectory.append((x, f0))
        f = f0
        for _ in range(cfg.max_steps):
            best_y, best_f = None, f
            for y in neighbors(x):
                fy = F(y)
                if fy < best_f:
                    best_y, best_f = y, fy
            if best_y is None:
                self.stop = "local-min"
                return self
            x, f = best_y, best_f
            self.trajectory.append((x, f))
        self.stop = "step-limit"
        return self


def hc_climb(F, x0: Sequence[int], cfg: HCConfig = HCConfig(), clock: Optional[Clock] = None):
    """Run one climb on a plain fitness function; returns the trajectory.

    With a clock, every evaluation is gated on it and expiry ends the climb.
    """
    oracle = F if isinstance(F, CountingOracle) else CountingOracle(F, clock or Clock(math.inf))
    c = Climb()
    try:
        c.run(oracle, x0, cfg)
    except BudgetExpired:
        c.stop = "budget"
        if not c.trajectory:
            c.trajectory.append((tuple(x0), math.inf))
    except FoundOptimum:
        c.stop = "success"
        if oracle.best_x is not None and (not c.trajectory or c.trajectory[-1][0] != oracle.best_x):
            c.trajectory.append((oracle.best_x, oracle.best_f))
    return c.trajectory


def hc_restarts(problem: Problem, cfg: HCConfig, init: Initializer, clock: Clock,
                rng: random.Random) -> SearchResult:
    """Climb from fresh start points until success or budget expiry.

    convergence_speed is the number of accepted moves in the trial that
    produced the final best point (including the final move onto an optimum).
    """
    oracle = CountingOracle(problem.evaluate, clock)
    trials = 0
    best_moves = 0
    best_seen = math.inf
    total_moves = 0
    try:
        while True:
            x0 = init.sample(rng)
            c = Climb()
            try:
                f0 = oracle(x0)
                trials += 1
                c.run(oracle, x0, cfg, f0)
            except FoundOptimum:
                if not c.trajectory:
                    trials += 1
                    best_moves = 0
                else:
                    best_moves = c.moves + 1
                total_moves += best_moves
                raise
            total_moves += c.moves
            if c.trajectory[-1][1] < best_seen:
                best_seen, best_moves = c.trajectory[-1][1], c.moves
    except FoundOptimum:
        pass
    except BudgetExpired:
        if c.trajectory and c.trajectory[-1][1] < best_seen:
            best_moves = c.moves
            total_moves += c.moves
    return result_from(problem, oracle, clock, convergence_speed=best_moves, num_trials=trials,
                       extra={"total_moves": total_moves})
