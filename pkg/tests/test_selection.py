import numpy as np
import pytest
from hypothesis import given, strategies as st

from dixlab.algebra import Base
from dixlab.catalog import fixture, random_algebra, random_element
from dixlab.convex import ConvexRegion, center_minimax
from dixlab.errors import BadPin, InfeasibleAtAnyStep
from dixlab.psi import block_ranges, psi
from dixlab.selection import (SelectionProblem, dist_to_center, feasible, min_max_step,
                              min_step_selection)

K_LOSS = 1 - np.cos(np.pi / 720)  # inscribed fattening of the angle grid


def interval_oracle(intervals, step):
    """Exact forward propagation for real intervals."""
    lo, hi = intervals[0]
    for a, b in intervals[1:]:
        lo, hi = max(a, lo - step), min(b, hi + step)
        if lo > hi:
            return False
    return True


def interval_problem(intervals, lipschitz, dt=0.1):
    n = len(intervals)
    base = Base("path", n, 0.0, dt * (n - 1))
    regs = [ConvexRegion.segment(a, b) for a, b in intervals]
    return SelectionProblem(base, regs, {}, lipschitz)


intervals_st = st.lists(
    st.tuples(st.floats(-3, 3), st.floats(0, 2)).map(lambda x: (x[0], x[0] + x[1])),
    min_size=2, max_size=8)


@given(intervals_st, st.floats(0.05, 3.0))
def test_feasibility_matches_interval_oracle(intervals, step):
    # skip cases decided by the grid's inscribed fattening
    near = [interval_oracle(intervals, step * s) for s in (1 - 1e-3, 1 + 1e-3)]
    if near[0] != near[1]:
        return
    res = feasible(interval_problem(intervals, step / 0.1))
    assert bool(res) == near[0]
    if res:
        sel = res.selection
        assert np.all(np.abs(np.diff(sel)) <= step * (1 + 1e-9) + 1e-12)
        for z, (a, b) in zip(sel, intervals):
            assert a - 1e-7 <= z.real <= b + 1e-7 and abs(z.imag) <= 1e-7


@given(intervals_st)
def test_min_max_step_matches_oracle(intervals):
    prob = interval_problem(intervals, None)
    step = min_max_step(prob)
    lo, hi = 0.0, 20.0
    if interval_oracle(intervals, 0.0):
        exact = 0.0
    else:
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            lo, hi = (lo, mid) if interval_oracle(intervals, mid) else (mid, hi)
        exact = hi
    span = max(b for _, b in intervals) - min(a for a, _ in intervals)
    assert step == pytest.approx(exact, abs=2e-6 * max(span, 1.0) + 2 * K_LOSS * exact)


@given(st.integers(0, 500), st.floats(0.5, 5.0), st.floats(1.01, 4.0))
def test_feasibility_is_monotone_in_lipschitz(seed, lip, factor):
    rng = np.random.default_rng(seed)
    centres = np.cumsum(rng.normal(scale=0.3, size=6)) + 1j * np.cumsum(rng.normal(scale=0.3, size=6))
    regs = [ConvexRegion.disk(c, r) for c, r in zip(centres, rng.uniform(0.01, 0.2, 6))]
    base = Base("path", 6, 0.0, 1.0)
    if feasible(SelectionProblem(base, regs, {}, lip)):
        assert feasible(SelectionProblem(base, regs, {}, lip * factor))


def test_discrete_base_needs_only_nonempty_regions():
    base = Base("discrete", 3)
    regs = [ConvexRegion.point(0), ConvexRegion.point(10), ConvexRegion.point(-5)]
    res = feasible(SelectionProblem(base, regs, {}, 0.1))
    assert res and np.allclose(res.selection, [0, 10, -5])
    regs[1] = ConvexRegion.empty()
    res = feasible(SelectionProblem(base, regs))
    assert not res and res.cell == 1


def test_pins():
    base = Base("path", 3, 0.0, 1.0)
    regs = [ConvexRegion.segment(-1, 1)] * 3
    res = feasible(SelectionProblem(base, regs, {0: -1.0, 2: 1.0}, 2.1))
    assert res and res.selection[0] == -1 and res.selection[2] == 1
    assert not feasible(SelectionProblem(base, regs, {0: -1.0, 2: 1.0}, 1.9))
    with pytest.raises(BadPin):
        feasible(SelectionProblem(base, regs, {1: 3.0}, 2.0))


def test_min_max_step_on_fixtures():
    fc = fixture("FIX-C(0.5)")
    prob = SelectionProblem(fc.algebra.base, [psi(fc["c"], p) for p in range(41)])
    step = min_max_step(prob)
    assert 0 < step < 0.5
    res = min_step_selection(prob)
    assert res and np.max(np.abs(np.diff(res.selection))) <= step * (1 + 1e-9)


def test_min_max_step_raises_on_empty():
    base = Base("path", 2, 0.0, 1.0)
    with pytest.raises(InfeasibleAtAnyStep):
        min_max_step(SelectionProblem(base, [ConvexRegion.point(0), ConvexRegion.empty()]))


def test_dist_to_center_direct_on_discrete():
    alg = random_algebra(21, {"points": 5, "max_dim": 3, "probe_prob": 0.0})
    el = random_element(22, alg)
    direct = max(center_minimax(block_ranges(el, p))[1] for p in range(5))
    assert dist_to_center(el) == pytest.approx(direct, abs=1e-12)
    # polygon fattening on the angle grid can undershoot by the grid loss
    assert dist_to_center(el, method="bisection") == pytest.approx(direct, abs=1e-6 + 2 * K_LOSS * direct)


def test_dist_to_center_fix_b_is_zero():
    assert dist_to_center(fixture("FIX-B")["c"]) <= 1e-6


def test_fix_b_step_does_not_shrink_under_refinement():
    # the jump of 2 across t = 0 splits into two unit steps through psi(0) = [-1, 1]
    steps = []
    for n in (21, 41, 81, 161):
        fx = fixture("FIX-B", points=n)
        regs = [psi(fx["c"], p) for p in range(n)]
        steps.append(min_max_step(SelectionProblem(fx.algebra.base, regs)))
    assert all(abs(s - 1.0) <= 1e-4 for s in steps)


def test_fix_b_off_grid_zero_forces_the_full_jump():
    # an even number of points on [-1, 1] skips t = 0
    fx = fixture("FIX-B", points=40)
    regs = [psi(fx["c"], p) for p in range(40)]
    assert min_max_step(SelectionProblem(fx.algebra.base, regs)) >= 1.8
