"""HC, HC-SHIFT and the shared oracle/initializer machinery."""
import math
import random

import pytest
from hypothesis import given, settings, strategies as st

from shiftsbst.common import (BudgetExpired, Clock, CountingOracle, FoundOptimum, Initializer,
                              Problem)
from shiftsbst.hc import HCConfig, hc_climb, hc_restarts, neighbors
from shiftsbst.landscapes import make_synthetic
from shiftsbst.shift import (ActiveSet, BasinInterval, CompressionManager, ShiftConfig,
                             ShiftRun, detect_1d_basin, hc_shift, merge_intervals)


def problem(land):
    return Problem(land.name, "opt", True, land.evaluate, land.domain, land.constants)


class FakeClock(Clock):
    """Advances by one tick per reading."""

    def __init__(self, budget):
        self.t = 0.0
        super().__init__(budget, now=self._tick)

    def _tick(self):
        self.t += 1.0
        return self.t


# ---------------------------------------------------------------- oracle

def test_oracle_stops_after_success():
    o = CountingOracle(lambda x: abs(x[0]), Clock(math.inf))
    assert o((3,)) == 3
    with pytest.raises(FoundOptimum):
        o((0,))
    with pytest.raises(FoundOptimum):
        o((5,))
    assert o.nfe == 2 and o.calls_after_success == 1 and o.best_x == (0,)


def test_oracle_budget_gate():
    o = CountingOracle(lambda x: 1.0, FakeClock(5))
    with pytest.raises(BudgetExpired):
        for _ in range(100):
            o((1,))
    assert 0 < o.nfe < 5 and o.stopped_at is not None


def test_initializer_rejects_unknown_mode():
    with pytest.raises(ValueError):
        Initializer("sobol", [(0, 1)])


def test_biased_init_mixture():
    """Chi-square check: 20% uniform plus 80% Gaussian around the constants."""
    dom = [(0, 10000)]
    init = Initializer("biased", dom, [2000, 8000])
    rng = random.Random(1)
    n = 20000
    xs = [init.sample(rng)[0] for _ in range(n)]
    near = sum(min(abs(x - 2000), abs(x - 8000)) <= 300 for x in xs)  # +-3 sigma
    p_near = 0.8 * 0.9973 + 0.2 * (2 * 601 / 10001)
    expected = [n * p_near, n * (1 - p_near)]
    observed = [near, n - near]
    chi2 = sum((o - e) ** 2 / e for o, e in zip(observed, expected))
    assert chi2 < 10.83  # 1 dof, p = 0.001


def test_random_init_ignores_constants():
    init = Initializer("random", [(0, 9)], [5])
    rng = random.Random(0)
    counts = [0] * 10
    for _ in range(5000):
        counts[init.sample(rng)[0]] += 1
    chi2 = sum((c - 500) ** 2 / 500 for c in counts)
    assert chi2 < 27.88  # 9 dof, p = 0.001


# ---------------------------------------------------------------- HC

def test_neighbour_order():
    assert list(neighbors((0, 0))) == [(-1, 0), (1, 0), (0, -1), (0, 1)]


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2000))
def test_climb_ends_in_local_minimum(x0):
    land = make_synthetic("rugged", 1)
    traj = hc_climb(land.evaluate, (x0,))
    x, f = traj[-1]
    assert all(b[1] < a[1] for a, b in zip(traj, traj[1:]))
    if f > 0:
        assert all(land((y,)) >= f for y in (x[0] - 1, x[0] + 1))


def test_hc_solves_convex_quickly():
    land = make_synthetic("plateau", 1, terrace=1)
    r = hc_restarts(problem(land), HCConfig(), Initializer("random", land.domain), Clock(5),
                    random.Random(0))
    assert r.success and r.num_trials == 1 and r.stop == "success"
    assert r.convergence_speed == abs(r.extra["total_moves"])


def test_hc_budget_stop():
    land = make_synthetic("needle", 2)
    r = hc_restarts(problem(land), HCConfig(), Initializer("random", land.domain),
                    FakeClock(200), random.Random(0))
    assert r.stop in ("budget", "success")


# ---------------------------------------------------------------- SHIFT pieces

@settings(max_examples=100, deadline=None)
@given(st.lists(st.tuples(st.integers(-50, 50), st.integers(1, 20)), max_size=12))
def test_merge_is_idempotent_and_covers(raw):
    ivs = [BasinInterval(s, l) for s, l in raw]
    m = merge_intervals(ivs)
    assert merge_intervals(m) == m
    pts = {p for iv in ivs for p in range(iv.b_start, iv.b_end + 1)}
    assert pts == {p for iv in m for p in range(iv.b_start, iv.b_end + 1)}
    assert all(a.b_end + 1 < b.b_start for a, b in zip(m, m[1:]))


def test_compression_manager_slices():
    cm = CompressionManager(2)
    cm.update(0, (7,), BasinInterval(10, 5))
    assert cm.containing(0, (12, 7)) == BasinInterval(10, 5)
    assert cm.containing(0, (12, 8)) is None
    assert cm.containing(0, (16, 7)) is None
    cm.update(0, (7,), BasinInterval(15, 3))
    assert cm.intervals(0, (7,)) == [BasinInterval(10, 8)]
    assert cm.warping(0, (11, 7)).L == 8
    with pytest.raises(ValueError):
        cm.update(1, (0,), BasinInterval(0, 1))
    fb = CompressionManager(2, slice_fallback=True)
    fb.update(0, (7,), BasinInterval(10, 5))
    assert fb.containing(0, (12, 99)) == BasinInterval(10, 5)


def test_active_set_prunes_after_patience():
    a = ActiveSet(3, patience=2)
    assert a.update({0}) == []
    assert a.update({0, 1}) == [2]
    assert a.active == [0, 1]
    assert a.update(set()) == []
    assert a.update(set()) == [0, 1] and len(a) == 0


def test_detect_basin_on_plateau():
    def F(x):
        return 0.0 if x[0] == 0 else (2.0 if 10 <= x[0] <= 20 else (1.0 if x[0] < 10 else 3.0))
    b, lk, rk = detect_1d_basin(F, (15,), 2.0, 0, 50)
    assert (b.b_start, b.b_len, lk, rk) == (9, 12, "better", "equal")
    assert detect_1d_basin(lambda x: abs(x[0]), (0,), 0.0, 0, 10) is None


def test_generate_neighbors_counts_diagonals():
    calls = []
    run = ShiftRun(lambda x: calls.append(x) or 1.0, 3, ShiftConfig())
    nbrs, meaningful = run.generate_neighbors((0, 0, 0), 1.0)
    assert len(nbrs) == 2 * 3 + 4 * 3
    assert len(set(calls)) == len(calls) and meaningful == set()


def test_shift_solves_needle_2d_in_one_trial():
    land = make_synthetic("needle", 2)
    r = hc_shift(problem(land), ShiftConfig(basin_max_search=100, max_steps=200),
                 Initializer("biased", land.domain, land.constants), Clock(10), random.Random(42))
    assert r.success and r.num_trials <= 5 and r.nfe <= 100


def test_shift_reports_deactivations():
    from shiftsbst.corpus import active_easy
    from shiftsbst.harness import RunConfig, run_target
    from shiftsbst.program import make_targets
    p = active_easy(5)
    t = make_targets(p)[0]
    r = run_target("hc-shift", p, t, RunConfig(time_budget=5))
    assert r.success
    assert sorted(d for _, _, d in r.extra["deactivations"]) == [1, 2, 3, 4, 5]
