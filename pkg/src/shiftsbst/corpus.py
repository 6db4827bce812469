"""Benchmark corpus: shipped hand-encoded programs plus parameterized families.

Families are produced as program text and parsed, so they go through exactly
the same path as files on disk.
"""
from __future__ import annotations

import hashlib
from importlib import resources
from typing import Iterable, List, Optional, Sequence

from .program import BranchProgram, format_program, load_directory, parse_program

RUGGED_TARGET = 31415
DAY = 86400


def schedule_cycle(A: int, B: int, *, day: int = DAY, lo: int = 0,
                   hi: Optional[int] = None, name: Optional[str] = None) -> BranchProgram:
    """Outer guard ``(t // day) % A == 0`` (plateaus ``day`` wide), inner ``t % B == 0``."""
    if A < 1 or B < 1 or day < 1:
        raise ValueError("A, B and day must be positive")
    hi = hi if hi is not None else lo + 4 * A * day
    name = name or f"schedule_cycle_{A}_{B}" + ("" if day == DAY else f"_d{day}")
    text = (f"program {name}\ncategory plateau\ninputs t\ndomain {lo} {hi}\n"
            f"constants {day} {A} 0 {B}\nexpect 4\n"
            f"if b0: (t // {day}) % {A} == 0\n"
            f"    if b1: t % {B} == 0\n")
    return parse_program(text, name)


def rugged_period(period: int, *, lo: int = 0, hi: int = 2 * RUGGED_TARGET,
                  name: Optional[str] = None) -> BranchProgram:
    """Success iff ``|x - T| + int(10 |sin((x - T) / period)|) == 0``."""
    if period < 1:
        raise ValueError("period must be positive")
    T = RUGGED_TARGET
    name = name or f"rugged_period_{period}"
    text = (f"program {name}\ncategory rugged\ninputs x\ndomain {lo} {hi}\n"
            f"constants {T} 10 {period} 0\nexpect 2\n"
            f"if b0: abs(x - {T}) + int(10 * abs(sin((x - {T}) / {period}))) == 0\n")
    return parse_program(text, name)


def active_easy(K: int, *, lo: int = -1000, hi: int = 1000,
                name: Optional[str] = None) -> BranchProgram:
    """An easy one-variable target padded with ``K`` irrelevant inputs.

    The literals (400, 300) pull biased starts a few hundred steps away from
    the solution x0 = 700, so a run climbs long enough for pruning to matter.
    """
    if K < 0:
        raise ValueError("K must be >= 0")
    names = " ".join(f"x{i}" for i in range(K + 1))
    name = name or f"active_easy_{K}"
    text = (f"program {name}\ncategory other\ninputs {names}\ndomain {lo} {hi}\n"
            f"constants 400 300\nexpect 2\n"
            f"if b0: x0 - 400 == 300\n")
    return parse_program(text, name)


def shipped() -> List[BranchProgram]:
    """The hand-encoded programs bundled with the package."""
    root = resources.files("shiftsbst") / "corpus_data"
    with resources.as_file(root) as path:
        return load_directory(path)


def families(*, periods: Sequence[int] = (1, 2, 4, 8),
             cycles: Sequence[tuple] = ((7, 3600),),
             ks: Sequence[int] = (1, 10, 50, 100)) -> List[BranchProgram]:
    return ([schedule_cycle(A, B) for A, B in cycles]
            + [rugged_period(p) for p in periods]
            + [active_easy(k) for k in ks])


def corpus() -> List[BranchProgram]:
    """Shipped programs followed by the default family members."""
    return shipped() + families()


def corpus_hash(programs: Iterable[BranchProgram]) -> str:
    h = hashlib.sha256()
    for p in programs:
        h.update(format_program(p).encode())
        h.update(b"\0")
    return h.hexdigest()[:16]
