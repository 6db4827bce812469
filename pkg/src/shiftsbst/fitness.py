"""Branch distance, approach level and the combined fitness F = AL + nBD."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Mapping, NamedTuple, Optional, Sequence, Tuple


class ComparisonOp(enum.Enum):
    LT = "<"
    LE = "<="
    GT = ">"
    GE = ">="
    EQ = "=="
    NE = "!="

    @property
    def negated(self) -> "ComparisonOp":
        return _NEGATION[self]

    def holds(self, a, b) -> bool:
        return _HOLDS[self](a, b)

    @classmethod
    def parse(cls, text: str) -> "ComparisonOp":
        for op in cls:
            if op.value == text:
                return op
        raise ValueError(f"unknown comparison operator {text!r}")


_NEGATION = {
    ComparisonOp.LT: ComparisonOp.GE,
    ComparisonOp.GE: ComparisonOp.LT,
    ComparisonOp.GT: ComparisonOp.LE,
    ComparisonOp.LE: ComparisonOp.GT,
    ComparisonOp.EQ: ComparisonOp.NE,
    ComparisonOp.NE: ComparisonOp.EQ,
}

_HOLDS = {
    ComparisonOp.LT: lambda a, b: a < b,
    ComparisonOp.LE: lambda a, b: a <= b,
    ComparisonOp.GT: lambda a, b: a > b,
    ComparisonOp.GE: lambda a, b: a >= b,
    ComparisonOp.EQ: lambda a, b: a == b,
    ComparisonOp.NE: lambda a, b: a != b,
}


class BranchRecord(NamedTuple):
    outcome: bool
    d_true: float
    d_false: float


# branch id -> record; absent ids were not reached
BranchTrace = Mapping[str, BranchRecord]
GuardChain = Tuple[Tuple[str, bool], ...]


class InconsistentTrace(ValueError):
    pass


@dataclass(frozen=True)
class FitnessValue:
    value: float
    al: int
    nbd: float

    @property
    def success(self) -> bool:
        return self.value == 0.0


def raw_f(a: float, b: float, op: ComparisonOp, want: bool = True) -> float:
    """Signed raw distance for making ``a op b`` evaluate to ``want``.

    Order operators: non-positive means satisfied. EQ: zero means satisfied.
    NE: negative means satisfied.
    """
    if not want:
        op = op.negated
    if op is ComparisonOp.LT:
        return (a - b) + 1
    if op is ComparisonOp.LE:
        return a - b
    if op is ComparisonOp.GT:
        return (b - a) + 1
    if op is ComparisonOp.GE:
        return b - a
    if op is ComparisonOp.EQ:
        return abs(a - b)
    return -abs(a - b)


def bd(raw: float, op: ComparisonOp, want: bool = True) -> float:
    """Non-negative branch distance from a raw value; 0 exactly when satisfied."""
    eff = op if want else op.negated
    if eff is ComparisonOp.EQ:
        return abs(raw)
    if eff is ComparisonOp.NE:
        return 1.0 if raw == 0 else 0.0
    return max(raw, 0)


def branch_distance(a: float, b: float, op: ComparisonOp, want: bool = True) -> float:
    return float(bd(raw_f(a, b, op, want), op, want))


_LN_BASE = math.log(1.001)
_BELOW_ONE = math.nextafter(1.0, 0.0)


def nbd(d: float) -> float:
    """1 - 1.001**(-d), capped just below 1 so that huge distances stay < 1."""
    if d < 0 or math.isnan(d):
        raise ValueError(f"branch distance must be non-negative, got {d}")
    return min(-math.expm1(-d * _LN_BASE), _BELOW_ONE)


def approach_level(chain: Sequence[Tuple[str, bool]], trace: BranchTrace):
    """Return (al, failing guard or None) scanning guards outermost-first."""
    n = len(chain)
    for i, (bid, req) in enumerate(chain, start=1):
        rec = trace.get(bid)
        if rec is None or rec.outcome != req:
            return n - i, (bid, req)
    return 0, None


def _directional(rec: BranchRecord, want: bool) -> float:
    return rec.d_true if want else rec.d_false


def _check(bid: str, rec: BranchRecord) -> None:
    if (rec.outcome and rec.d_true != 0) or (not rec.outcome and rec.d_false != 0):
        raise InconsistentTrace(f"branch {bid}: outcome flag disagrees with distances {rec}")


def fitness_al(target: Tuple[str, bool], chain: Sequence[Tuple[str, bool]],
               trace: BranchTrace) -> FitnessValue:
    bid, want = target
    al, failing = approach_level(chain, trace)
    if failing is not None:
        fbid, freq = failing
        rec = trace.get(fbid)
        # an unreached guard means an earlier guard routed elsewhere; that cannot
        # happen for a well-formed chain, but fail soft with a maximal distance
        d = _directional(rec, freq) if rec is not None else math.inf
        if rec is not None:
            _check(fbid, rec)
        n = nbd(d) if math.isfinite(d) else _BELOW_ONE
        return FitnessValue(al + n, al, n)
    rec = trace.get(bid)
    if rec is None:
        return FitnessValue(1 + _BELOW_ONE, 1, _BELOW_ONE)
    _check(bid, rec)
    n = nbd(_directional(rec, want))
    return FitnessValue(float(al) + n, al, n)
