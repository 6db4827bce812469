import pytest

from shiftsbst.landscapes import (KINDS, dump_csv, grid_points, landscape_dump, make_synthetic,
                                  pilot_suite)


def scan(land):
    return {x: land(x) for x in grid_points(land.domain)}


@pytest.mark.parametrize("land", pilot_suite(), ids=lambda l: l.name)
def test_unique_global_optimum(land):
    values = scan(land)
    zeros = [x for x, v in values.items() if v == 0]
    assert zeros == land.optimum
    assert min(values.values()) == 0 and all(v >= 0 for v in values.values())


def local_minima(land, values):
    out = []
    for x, v in values.items():
        nb = []
        for d in range(len(x)):
            for s in (-1, 1):
                y = x[:d] + (x[d] + s,) + x[d + 1:]
                if y in values:
                    nb.append(values[y])
        if all(v < u for u in nb) and v > 0:
            out.append(x)
    return out


def test_rugged_has_many_strict_local_minima():
    land = make_synthetic("rugged", 1)
    assert len(local_minima(land, scan(land))) >= 50


def test_plateau_is_mostly_flat():
    land = make_synthetic("plateau", 1)
    v = scan(land)
    xs = sorted(v)
    flat = sum(v[a] == v[b] for a, b in zip(xs, xs[1:]))
    assert flat / len(xs) > 0.9


def test_needle_2d_funnel_only_descends_diagonally():
    land = make_synthetic("needle", 2)
    v = scan(land)
    funnel = [x for x, f in v.items() if 0 < f < 1]
    assert funnel
    for x in funnel:
        axis = [v.get((x[0] + a, x[1] + b), 1.0) for a, b in ((1, 0), (-1, 0), (0, 1), (0, -1))]
        diag = [v.get((x[0] + a, x[1] + b), 1.0) for a in (-1, 1) for b in (-1, 1)]
        assert min(axis) > v[x] and min(diag) < v[x]


def test_parameter_validation():
    with pytest.raises(ValueError):
        make_synthetic("spiky", 1)
    with pytest.raises(ValueError):
        make_synthetic("rugged", 3)
    with pytest.raises(ValueError):
        make_synthetic("rugged", 1, nonsense=2)
    with pytest.raises(ValueError):
        make_synthetic("rugged", 1, amp=0.5)


def test_dump_covers_grid():
    land = make_synthetic("plateau", 2)
    rows = landscape_dump(land, list(grid_points(land.domain, 30)))
    assert len(rows) == len(range(0, 301, 30)) ** 2
    text = dump_csv(make_synthetic("needle", 1))
    lines = text.splitlines()
    assert lines[0] == "x0,fitness" and len(lines) == 2002
    assert set(KINDS) == {"needle", "plateau", "rugged", "combined"}
