"""The dense simplex solver against brute-force box optima."""

import itertools

import numpy as np
import pytest

from treealgebra import simplex


def box_rows(lows, highs):
    n = len(lows)
    rows, rhs = [], []
    for i in range(n):
        e = np.zeros(n)
        e[i] = 1.0
        rows.append(e.copy())
        rhs.append(highs[i])
        rows.append(-e)
        rhs.append(-lows[i])
    return np.array(rows), np.array(rhs)


def box_vertices(lows, highs):
    return np.array(list(itertools.product(*zip(lows, highs))))


def test_known_lp():
    # max x + y on the unit square
    a, b = box_rows([0, 0], [1, 1])
    res = simplex.solve_max([1.0, 1.0], a, b)
    assert res.status == simplex.OPTIMAL
    assert res.value == pytest.approx(2.0, abs=1e-9)


def test_extra_row_binds():
    a, b = box_rows([0, 0], [1, 1])
    a2 = np.vstack([a, [1.0, 1.0]])
    b2 = np.append(b, 0.5)
    res = simplex.solve_max([1.0, 1.0], a2, b2)
    assert res.value == pytest.approx(0.5, abs=1e-9)


def test_infeasible():
    a = np.array([[1.0], [-1.0]])
    b = np.array([0.0, -1.0])  # x <= 0 and x >= 1
    assert simplex.solve_max([1.0], a, b).status == simplex.INFEASIBLE
    assert not simplex.feasible(a, b)


def test_unbounded_detected():
    a = np.array([[-1.0]])
    b = np.array([0.0])  # x >= 0, maximize x
    assert simplex.solve_max([1.0], a, b).status == simplex.UNBOUNDED


def test_negative_coordinates():
    a, b = box_rows([-5, -3], [-1, 4])
    res = simplex.solve_max([1.0, -1.0], a, b)
    assert res.value == pytest.approx(-1.0 + 3.0, abs=1e-9)
    assert np.allclose(res.x, [-1.0, -3.0], atol=1e-9)


def test_random_boxes_match_vertex_enumeration(rng):
    for _ in range(300):
        n = int(rng.integers(1, 5))
        lows = rng.uniform(-10, 5, n)
        highs = lows + rng.uniform(0.1, 8, n)
        c = rng.normal(size=n)
        a, b = box_rows(lows, highs)
        res = simplex.solve_max(c, a, b)
        assert res.status == simplex.OPTIMAL
        best = float(np.max(box_vertices(lows, highs) @ c))
        assert res.value == pytest.approx(best, abs=1e-7)


def test_random_boxes_with_cut_rows(rng):
    for _ in range(200):
        n = int(rng.integers(2, 4))
        lows = rng.uniform(-5, 0, n)
        highs = lows + rng.uniform(0.5, 5, n)
        c = rng.normal(size=n)
        cut = rng.normal(size=n)
        # cut through the box center so the cut is always active but feasible
        center = (lows + highs) / 2
        a, b = box_rows(lows, highs)
        a2 = np.vstack([a, cut])
        b2 = np.append(b, float(cut @ center))
        res = simplex.solve_max(c, a2, b2)
        assert res.status == simplex.OPTIMAL
        # brute force on a fine grid stays below the LP optimum
        grid = np.array(
            [lows + (highs - lows) * rng.random(n) for _ in range(500)]
        )
        ok = grid @ cut <= float(cut @ center) + 1e-12
        if ok.any():
            assert res.value >= float(np.max(grid[ok] @ c)) - 1e-7
        assert res.x @ cut <= float(cut @ center) + 1e-7
        assert np.all(res.x <= highs + 1e-7) and np.all(res.x >= lows - 1e-7)
