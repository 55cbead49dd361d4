import numpy as np
import pytest

from dixlab.catalog import fixture, random_algebra, random_element
from dixlab.errors import NotSelfadjoint
from dixlab.psi import block_ranges, envelopes, psi, psi_r
from dixlab.algebra import Base, Block, FiberedAlgebra


def test_fix_b_psi_is_forced_away_from_zero():
    fx = fixture("FIX-B")
    c = fx["c"]
    t = fx.algebra.base.coords
    for p in range(fx.algebra.n_points):
        region = psi(c, p)
        assert not region.is_empty
        if t[p] != 0:
            assert region.diameter() < 1e-6
            assert abs(region.centroid() - np.sign(t[p])) < 1e-6
    mid = psi(c, 20)  # t = 0: block one is the segment [-1, 1]
    assert mid.diameter() == pytest.approx(2.0, abs=1e-9)


@pytest.mark.parametrize("eps", [0.1, 0.5, 1.0])
def test_fix_c_segment_crosses_ellipse_interior_near_zero(eps):
    fx = fixture(f"FIX-C({eps})")
    t = fx.algebra.base.coords
    for p in np.flatnonzero(np.abs(t) <= 0.1):
        region = psi(fx["c"], p)
        assert region.diameter() > 0.05


def test_psi_of_disjoint_ranges_is_empty():
    alg = FiberedAlgebra(Base("discrete", 1), [(Block(1), Block(1))])
    el = alg.element([[[[0.0]], [[1.0]]]])
    assert psi(el, 0).is_empty


def test_psi_r_fattens_every_range():
    alg = FiberedAlgebra(Base("discrete", 1), [(Block(1), Block(1))])
    el = alg.element([[[[0.0]], [[1.0]]]])
    assert psi_r(el, 0, 0.49).is_empty
    region = psi_r(el, 0, 0.6)
    assert region.contains(0.5)
    with pytest.raises(ValueError):
        psi_r(el, 0, 0.0)


def test_probe_blocks_do_not_enter_psi():
    fx = fixture("FIX-D")
    assert len(block_ranges(fx["probe"], 0)) == 1
    assert psi(fx["probe"], 0).contains(0.0)


def test_envelopes_match_eigenvalue_oracle():
    alg = random_algebra(11, {"points": 4, "max_dim": 4, "probe_prob": 0.0})
    el = random_element(12, alg, ["selfadjoint"])
    h, g = envelopes(el)
    for p in range(alg.n_points):
        ev = [np.linalg.eigvalsh(el.blocks[p][i]) for i in alg.maximal_blocks(p)]
        assert h[p] == pytest.approx(max(e[0] for e in ev), abs=1e-10)
        assert g[p] == pytest.approx(min(e[-1] for e in ev), abs=1e-10)
        region = psi(el, p)
        if h[p] <= g[p] - 1e-9:
            assert region.contains(h[p]) and region.contains(g[p])
    with pytest.raises(NotSelfadjoint):
        envelopes(fixture("FIX-D")["e12"])
