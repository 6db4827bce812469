"""Synthetic pilot landscapes and the common fitness-oracle wrapper.

Every landscape is a pure function over an integer box with a declared
optimum.  Four kinds exist in 1D and 2D:

needle    flat field (value 1) with one zero point.  In 1D a short funnel of
          half-width ``width`` surrounds it.  In 2D the funnel of radius
          ``radius`` is a checkerboard: only cells with the optimum's parity
          descend toward it, the others sit at plateau level, so the basin is
          a lattice of one-cell diagonal corridors that axis moves cannot
          follow.
plateau   terraces ``ceil(r / width)`` descending to 0 at the optimum
          (r = |dx| in 1D, Chebyshev radius in 2D).
rugged    distance to the optimum plus ``floor(amp * |sin(pi * d / period)|)``
          per coordinate; every multiple of ``period`` is a strict local minimum.
combined  terraces plus rugged noise inside ``radius``, flat haystack outside.
"""
from __future__ import annotations

import csv
import io
import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

KINDS = ("needle", "plateau", "rugged", "combined")


@dataclass
class FitnessLandscape:
    name: str
    domain: List[Tuple[int, int]]
    evaluate: Callable[[Sequence[int]], float]
    optimum: List[Tuple[int, ...]] = field(default_factory=list)
    constants: List[int] = field(default_factory=list)
    params: Dict[str, float] = field(default_factory=dict)

    @property
    def arity(self) -> int:
        return len(self.domain)

    def __call__(self, x: Sequence[int]) -> float:
        return self.evaluate(x)


DEFAULTS = {
    1: dict(lo=0, hi=2000, center=1234, width=3, period=8, amp=10, terrace=20,
            radius=400, offset=6),
    2: dict(lo=0, hi=300, center=150, width=1, period=8, amp=10, terrace=10,
            radius=60, offset=6),
}


# the 2D needle is a small box almost entirely covered by its diagonal funnel;
# the constants (window edges at +-offset) keep biased starts off the optimum
KIND_DEFAULTS = {
    ("needle", 2): dict(lo=0, hi=24, center=12, radius=12, offset=4),
}


def _noise(d: int, amp: float, period: float) -> int:
    return int(math.floor(amp * abs(math.sin(math.pi * d / period))))


def make_synthetic(kind: str, dim: int, **params) -> FitnessLandscape:
    if kind not in KINDS:
        raise ValueError(f"unknown landscape kind {kind!r}")
    if dim not in (1, 2):
        raise ValueError("pilot landscapes are 1D or 2D")
    p = dict(DEFAULTS[dim])
    p.update(KIND_DEFAULTS.get((kind, dim), {}))
    unknown = set(params) - set(p)
    if unknown:
        raise ValueError(f"unknown parameters {sorted(unknown)}")
    p.update(params)
    lo, hi, c = int(p["lo"]), int(p["hi"]), int(p["center"])
    width, period, amp = int(p["width"]), float(p["period"]), float(p["amp"])
    terrace, radius = int(p["terrace"]), int(p["radius"])
    if not lo < c < hi:
        raise ValueError("optimum must lie strictly inside the domain")
    if width < 1 or terrace < 1 or radius < 1:
        raise ValueError("width, terrace and radius must be >= 1")
    if period < 2 or amp <= 0:
        raise ValueError("rugged period must be >= 2 and amplitude > 0")
    if kind == "rugged" and amp * math.sin(math.pi / period) < 2:
        raise ValueError("amplitude too small for strict local minima at this period")
    feature = {"needle": width if dim == 1 else radius, "plateau": terrace,
               "rugged": period, "combined": radius}[kind]
    if hi - lo < 2 * feature:
        raise ValueError("domain smaller than the landscape feature")
    off = int(p["offset"])
    consts = [c - off, c + off] if off else [c]

    if dim == 1:
        f = _one_d(kind, c, width, terrace, period, amp, radius)
        opt = [(c,)]
    else:
        f = _two_d(kind, c, width, terrace, period, amp, radius)
        opt = [(c, c)]
    return FitnessLandscape(f"{kind}-{dim}d", [(lo, hi)] * dim, f, opt, consts, p)


def _one_d(kind, c, width, terrace, period, amp, radius):
    if kind == "needle":
        def f(x):
            d = abs(x[0] - c)
            return 0.5 * d / (width + 1) if d <= width else 1.0
    elif kind == "plateau":
        def f(x):
            return float(-(-abs(x[0] - c) // terrace))
    elif kind == "rugged":
        def f(x):
            d = x[0] - c
            return float(abs(d) + _noise(d, amp, period))
    else:
        cap = float(-(-radius // terrace) + amp + 1)

        def f(x):
            d = x[0] - c
            if abs(d) > radius:
                return cap
            return float(-(-abs(d) // terrace) + _noise(d, amp, period))
    return f


def _two_d(kind, c, width, terrace, period, amp, radius):
    if kind == "needle":
        parity = (2 * c) % 2

        def f(x):
            dx, dy = x[0] - c, x[1] - c
            r = max(abs(dx), abs(dy))
            if r > radius or (x[0] + x[1]) % 2 != parity:
                return 1.0
            return 0.5 * r / (radius + 1)
    elif kind == "plateau":
        def f(x):
            r = max(abs(x[0] - c), abs(x[1] - c))
            return float(-(-r // terrace))
    elif kind == "rugged":
        def f(x):
            dx, dy = x[0] - c, x[1] - c
            return float(abs(dx) + abs(dy) + _noise(dx, amp, period) + _noise(dy, amp, period))
    else:
        cap = float(-(-radius // terrace) + 2 * amp + 1)

        def f(x):
            dx, dy = x[0] - c, x[1] - c
            r = max(abs(dx), abs(dy))
            if r > radius:
                return cap
            return float(-(-r // terrace) + _noise(dx, amp, period) + _noise(dy, amp, period))
    return f


def pilot_suite(**overrides) -> List[FitnessLandscape]:
    return [make_synthetic(k, d, **overrides) for d in (1, 2) for k in KINDS]


def grid_points(domain: Sequence[Tuple[int, int]], step: int = 1):
    axes = [range(lo, hi + 1, step) for lo, hi in domain]
    return itertools.product(*axes)


def landscape_dump(l: FitnessLandscape, grid=None) -> List[Tuple]:
    """Rows (x0[, x1], fitness) in row-major order over ``grid`` (default: whole domain)."""
    pts = grid if grid is not None else grid_points(l.domain)
    return [tuple(pt) + (l.evaluate(pt),) for pt in pts]


def dump_csv(l: FitnessLandscape, grid=None, out=None) -> str:
    buf = out if out is not None else io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([f"x{i}" for i in range(l.arity)] + ["fitness"])
    for row in landscape_dump(l, grid):
        w.writerow(list(row[:-1]) + [repr(row[-1])])
    return buf.getvalue() if out is None else ""
