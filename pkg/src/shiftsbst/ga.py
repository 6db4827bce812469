"""Generational genetic algorithm with elitism, used as a baseline."""
from __future__ import annotations

import heapq
import math
import random
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

from .common import (BudgetExpired, Clock, CountingOracle, FoundOptimum, Initializer,
                     Problem, SearchResult, result_from)

Genome = Tuple[int, ...]


@dataclass(frozen=True)
class GAConfig:
    population: int = 10000
    tournament_k: int = 3
    elite_ratio: float = 0.1
    steps: Tuple[int, ...] = (-3, -2, -1, 1, 2, 3)
    ensure_mutation: bool = True
    max_generations: Optional[int] = None
    stall_generations: Optional[int] = 100

    def __post_init__(self):
        if self.population < 1:
            raise ValueError("population must be >= 1")
        if self.tournament_k < 2:
            raise ValueError("tournament size must be >= 2")
        if not 0 < self.elite_ratio < 1:
            raise ValueError("elite_ratio must be in (0, 1)")
        if 0 in self.steps or not self.steps:
            raise ValueError("mutation steps must be non-empty and exclude 0")


PILOT_GA = GAConfig(population=1000)


def tournament_select(pop: Sequence[Tuple[Genome, float]], k: int, rng: random.Random) -> Genome:
    """k uniform draws with replacement; lowest fitness wins, first drawn on ties."""
    if not pop:
        raise ValueError("empty population")
    best = None
    for _ in range(k):
        cand = pop[rng.randrange(len(pop))]
        if best is None or cand[1] < best[1]:
            best = cand
    return best[0]


def uniform_crossover(p1: Genome, p2: Genome, rng: random.Random) -> Genome:
    if len(p1) != len(p2):
        raise ValueError("parents differ in arity")
    return tuple(a if rng.random() < 0.5 else b for a, b in zip(p1, p2))


def mutate(x: Genome, bounds: Sequence[Tuple[int, int]], steps: Sequence[int],
           rng: random.Random, ensure: bool = True) -> Genome:
    n = len(x)
    y = list(x)
    rate = 1.0 / n
    for i in range(n):
        if rng.random() < rate:
            lo, hi = bounds[i]
            y[i] = min(max(y[i] + rng.choice(steps), lo), hi)
    if ensure and tuple(y) == tuple(x):
        i = rng.randrange(n)
        lo, hi = bounds[i]
        s = rng.choice(steps)
        v = min(max(x[i] + s, lo), hi)
        if v == x[i]:  # clipped back at a bound: step the other way
            v = min(max(x[i] - s, lo), hi)
        y[i] = v
    return tuple(y)


class _EliteHeap:
    """The best ``size`` individuals seen so far, maintained one insert at a time
    so no bulk sort runs between budget checks.  Earlier entries win ties."""

    def __init__(self, size: int):
        self.size = size
        self.heap: list = []
        self.seq = 0

    def push(self, genome: Genome, f: float) -> None:
        item = (-f, -self.seq, genome)
        self.seq += 1
        if len(self.heap) < self.size:
            heapq.heappush(self.heap, item)
        else:
            heapq.heappushpop(self.heap, item)

    def members(self) -> List[Tuple[Genome, float]]:
        return [(g, -nf) for nf, _, g in self.heap]


def ga_search(problem: Problem, cfg: GAConfig, init: Initializer, clock: Clock,
              rng: random.Random) -> SearchResult:
    """Generational GA with elitism.

    ``generations`` counts completed generations after the initial population;
    ``convergence_speed`` is the generation in which the final best first appeared.
    """
    oracle = CountingOracle(problem.evaluate, clock)
    bounds = problem.domain
    P = cfg.population
    n_elite = min(math.ceil(P * cfg.elite_ratio), P)
    generation = 0
    best_gen = 0
    history: List[float] = []
    pop: List[Tuple[Genome, float]] = []
    try:
        elite = _EliteHeap(n_elite)
        for g in dict.fromkeys(init.sample(rng) for _ in range(P)):
            try:
                f = oracle(g)
            except FoundOptimum:
                best_gen = 0
                raise
            pop.append((g, f))
            elite.push(g, f)
        history.append(oracle.best_f)
        stall = 0
        while True:
            if cfg.max_generations is not None and generation >= cfg.max_generations:
                break
            if cfg.stall_generations is not None and stall >= cfg.stall_generations:
                break
            oracle.gate()
            elites = elite.members()
            seen = {g for g, _ in elites}
            children: List[Genome] = []
            want = P - n_elite
            attempts = 0
            while len(children) < want and attempts < 4 * max(want, 1):
                attempts += 1
                oracle.gate()
                a = tournament_select(pop, cfg.tournament_k, rng)
                b = tournament_select(pop, cfg.tournament_k, rng)
                c = mutate(uniform_crossover(a, b, rng), bounds, cfg.steps, rng,
                           cfg.ensure_mutation)
                if c in seen:
                    continue
                seen.add(c)
                children.append(c)
            nxt = list(elites)
            elite = _EliteHeap(n_elite)
            for g, f in elites:
                elite.push(g, f)
            for c in children:
                try:
                    f = oracle(c)
                except FoundOptimum:
                    best_gen = generation + 1
                    raise
                nxt.append((c, f))
                elite.push(c, f)
            pop = nxt
            generation += 1
            if oracle.best_f < history[-1]:
                best_gen = generation
                stall = 0
            else:
                stall += 1
            history.append(oracle.best_f)
    except (FoundOptimum, BudgetExpired):
        pass
    if oracle.best_x is None:
        best_gen = 0
    return result_from(problem, oracle, clock, convergence_speed=best_gen,
                       num_trials=oracle.nfe, generations=generation,
                       extra={"best_history": history})
