"""Per-dimension invertible sigmoid compression of a basin interval.

The forward map is exact floating point; the inverse rounds back to the
integer lattice so that ``inverse(forward(x)) == x`` for every integer x.
"""
from __future__ import annotations

import math

import numpy as np
from dataclasses import dataclass

ALPHA = 5.0
_P_LO = 1e-12
_P_HI = 1.0 - 1e-12


def sigmoid(t: float) -> float:
    if t >= 0:
        return 1.0 / (1.0 + math.exp(-t))
    e = math.exp(t)
    return e / (1.0 + e)


def logit(p: float) -> float:
    p = min(max(p, _P_LO), _P_HI)
    return math.log(p / (1.0 - p))


def round_half_away(v: float) -> int:
    if v >= 0:
        return int(math.floor(v + 0.5))
    return -int(math.floor(-v + 0.5))


@dataclass(frozen=True)
class SigmoidWarping:
    """Compression of the basin starting at ``s`` and spanning ``L`` lattice points.

    The stored basin is ``[s, s+L-1]``; the sigmoid band of the map covers
    ``[s, s+L]`` and everything right of it is shifted left by ``L-1``.
    """

    s: int
    L: int
    alpha: float = ALPHA

    def __post_init__(self):
        if self.L < 2:
            raise ValueError(f"basin length must be >= 2, got {self.L}")
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")

    @classmethod
    def from_basin(cls, b_start: int, b_len: int) -> "SigmoidWarping":
        return cls(int(b_start), int(b_len))

    @property
    def band_hi(self) -> float:
        return self.forward(self.s + self.L)

    def contains(self, x: int) -> bool:
        """True when x lies in the stored basin [s, s+L-1]."""
        return self.s <= x <= self.s + self.L - 1

    def forward(self, x: int) -> float:
        s, L = self.s, self.L
        if x < s:
            return float(x)
        if x <= s + L:
            return s + sigmoid(self.alpha * ((x - s) / L - 0.5))
        return float(x - (L - 1))

    def inverse(self, z: float) -> int:
        if not math.isfinite(z):
            raise ValueError(f"non-finite z: {z}")
        s, L = self.s, self.L
        if z < s:
            return round_half_away(z)
        if z <= self.band_hi:
            x = s + L * (logit(z - s) / self.alpha + 0.5)
            return min(max(round_half_away(x), s), s + L)
        return round_half_away(z + (L - 1))

    def step_in_z(self, x: int, delta: int) -> int:
        return self.inverse(self.forward(x) + delta)


def step(w: SigmoidWarping | None, x: int, delta: int) -> int:
    """Unit move in Z-space; plain x + delta when no warping applies."""
    if w is None:
        return x + delta
    return w.step_in_z(x, delta)


def _round_half_away_arr(v):
    return (np.sign(v) * np.floor(np.abs(v) + 0.5)).astype(np.int64)


def forward_many(w: SigmoidWarping, xs) -> "np.ndarray":
    """Vectorised ``forward`` over an integer array."""
    xs = np.asarray(xs, dtype=np.int64)
    s, L = w.s, w.L
    band = s + 1.0 / (1.0 + np.exp(-w.alpha * ((xs - s) / L - 0.5)))
    out = np.where(xs < s, xs.astype(float), band)
    return np.where(xs > s + L, (xs - (L - 1)).astype(float), out)


def inverse_many(w: SigmoidWarping, zs) -> "np.ndarray":
    """Vectorised ``inverse``; same branch selection and rounding as the scalar form."""
    zs = np.asarray(zs, dtype=float)
    if not np.all(np.isfinite(zs)):
        raise ValueError("non-finite z")
    s, L = w.s, w.L
    p = np.clip(zs - s, _P_LO, _P_HI)
    xb = s + L * (np.log(p / (1.0 - p)) / w.alpha + 0.5)
    band = np.clip(_round_half_away_arr(xb), s, s + L)
    out = np.where(zs < s, _round_half_away_arr(zs), band)
    return np.where(zs > w.band_hi, _round_half_away_arr(zs + (L - 1)), out)
