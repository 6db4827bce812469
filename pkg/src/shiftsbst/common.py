"""Shared search plumbing: budget clock, counting oracle, initializer, result row."""
from __future__ import annotations

import math
import random
import time
from dataclasses import dataclass, field, asdict
from typing import Callable, Dict, List, Optional, Sequence, Tuple

SUCCESS_EPS = 1e-12


def is_success(f: float) -> bool:
    return f <= SUCCESS_EPS


class Clock:
    """Monotonic wall-clock budget.  ``start`` is called right before the first oracle call."""

    def __init__(self, budget: float, now: Callable[[], float] = time.perf_counter):
        if budget < 0:
            raise ValueError("budget must be >= 0")
        self.budget = float(budget)
        self._now = now
        self.t0: Optional[float] = None

    def start(self) -> None:
        if self.t0 is None:
            self.t0 = self._now()

    def elapsed(self) -> float:
        if self.t0 is None:
            return 0.0
        return self._now() - self.t0

    def expired(self) -> bool:
        if self.t0 is None:
            self.t0 = self._now()
        return self._now() - self.t0 >= self.budget


class BudgetExpired(Exception):
    pass


class FoundOptimum(Exception):
    pass


@dataclass
class Problem:
    """One search target: a fitness oracle over an integer box."""

    function: str
    lineno: str
    outcome: bool
    evaluate: Callable[[Sequence[int]], float]
    domain: List[Tuple[int, int]]
    constants: List[int] = field(default_factory=list)

    @property
    def arity(self) -> int:
        return len(self.domain)


class CountingOracle:
    """Wraps a fitness function: gates every call on the clock, counts calls and
    tracks the incumbent.

    Raises ``BudgetExpired`` instead of evaluating once the budget is spent, and
    ``FoundOptimum`` right after the first zero-fitness evaluation, so searches
    unwind without further oracle calls.
    """

    def __init__(self, f: Callable[[Sequence[int]], float], clock: Clock):
        self.f = f
        self.clock = clock
        self.nfe = 0
        self.best_f = math.inf
        self.best_x: Optional[Tuple[int, ...]] = None
        self.time_to_solution: Optional[float] = None
        self.max_eval_time = 0.0
        self.calls_after_success = 0  # must stay 0; asserted by tests
        self.stopped_at: Optional[float] = None  # clock reading when the search was cut off

    def gate(self) -> None:
        """Budget check for bookkeeping between evaluations."""
        if self.clock.expired():
            if self.stopped_at is None:
                self.stopped_at = self.clock.elapsed()
            raise BudgetExpired

    @property
    def solved(self) -> bool:
        return self.time_to_solution is not None

    def __call__(self, x: Sequence[int]) -> float:
        if self.time_to_solution is not None:
            self.calls_after_success += 1
            raise FoundOptimum
        c = self.clock  # inlined gate(): this is the hot path
        if c.t0 is None:
            c.t0 = c._now()
        if c._now() - c.t0 >= c.budget:
            self.gate()
        if type(x) is not tuple:
            x = tuple(int(v) for v in x)
        t = time.perf_counter()
        v = float(self.f(x))
        dt = time.perf_counter() - t
        if dt > self.max_eval_time:
            self.max_eval_time = dt
        self.nfe += 1
        if v < self.best_f:
            self.best_f, self.best_x = v, x
        if is_success(v):
            self.time_to_solution = self.stopped_at = self.clock.elapsed()
            raise FoundOptimum
        return v


@dataclass
class SearchResult:
    function: str
    lineno: str
    outcome: bool
    convergence_speed: int
    nfe: int
    best_fitness: float
    best_solution: Optional[Tuple[int, ...]]
    success: bool
    num_trials: int
    total_time: float
    time_to_solution: Optional[float]
    generations: Optional[int] = None
    error: str = ""
    stop: str = ""  # success | budget | exhausted | crash
    extra: Dict = field(default_factory=dict)

    def row(self) -> Dict:
        d = asdict(self)
        d.pop("extra")
        return d


def result_from(problem: Problem, oracle: CountingOracle, clock: Clock, *,
                convergence_speed: int, num_trials: int,
                generations: Optional[int] = None, extra: Optional[Dict] = None) -> SearchResult:
    return SearchResult(
        function=problem.function, lineno=problem.lineno, outcome=problem.outcome,
        convergence_speed=convergence_speed, nfe=oracle.nfe, best_fitness=oracle.best_f,
        best_solution=oracle.best_x, success=oracle.solved, num_trials=num_trials,
        total_time=oracle.stopped_at if oracle.stopped_at is not None else clock.elapsed(),
        time_to_solution=oracle.time_to_solution,
        generations=generations,
        stop="success" if oracle.solved else ("budget" if oracle.stopped_at is not None
                                              else "exhausted"),
        extra={"max_eval_time": oracle.max_eval_time, **(extra or {})})


def round_half_away(v: float) -> int:
    return int(math.floor(v + 0.5)) if v >= 0 else -int(math.floor(-v + 0.5))


class Initializer:
    """Per-dimension start-point sampler.

    ``random``: uniform in [L, H].  ``biased``: uniform with probability 0.2,
    otherwise Gaussian around a constant drawn from the pool with sigma equal
    to 1% of the range, rounded and clamped.  Empty constants fall back to uniform.
    """

    UNIFORM_WEIGHT = 0.2

    def __init__(self, mode: str, domain: Sequence[Tuple[int, int]],
                 constants: Sequence[int] = ()):
        if mode not in ("random", "biased"):
            raise ValueError(f"unknown init mode {mode!r}")
        self.mode = mode
        self.domain = [(int(lo), int(hi)) for lo, hi in domain]
        self.constants = list(constants)

    def sigma(self, d: int) -> float:
        lo, hi = self.domain[d]
        return 0.01 * (hi - lo)

    def sample_dim(self, d: int, rng: random.Random) -> int:
        lo, hi = self.domain[d]
        if self.mode == "random" or not self.constants:
            return rng.randint(lo, hi)
        if rng.random() < self.UNIFORM_WEIGHT:
            return rng.randint(lo, hi)
        c = rng.choice(self.constants)
        v = round_half_away(rng.gauss(c, self.sigma(d)))
        return min(max(v, lo), hi)

    def sample(self, rng: random.Random) -> Tuple[int, ...]:
        return tuple(self.sample_dim(d, rng) for d in range(len(self.domain)))
