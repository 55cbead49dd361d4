import numpy as np
import pytest
from hypothesis import given, strategies as st

from dixlab.algebra import jwc, y_set
from dixlab.catalog import (FIXTURES, alpha_beta, fix_a_element, fixture, random_algebra,
                            random_element)
from dixlab.errors import BadParams, UnknownFixture
from dixlab.linalg import is_square_zero
from dixlab.psi import psi


def test_fixture_names_and_defaults():
    for name in FIXTURES:
        fx = fixture(name)
        assert fx.algebra.name.startswith(name)
    assert fixture("FIX-A").algebra.n_points == 21
    assert fixture("FIX-B").algebra.n_points == 41
    assert fixture("fix-c(0.25)").metadata["epsilon"] == 0.25
    with pytest.raises(UnknownFixture):
        fixture("FIX-Z")


def test_surrogates_are_flagged():
    for name in ("FIX-B", "FIX-C", "FIX-D", "FIX-E"):
        assert fixture(name).metadata["surrogates"]


def test_fix_a_jwc_kills_both_blocks_at_one():
    alg = fixture("FIX-A").algebra
    assert jwc(alg).sorted_pairs() == [(20, 0), (20, 1)]


def test_fix_b_psi_at_half():
    fx = fixture("FIX-B")
    t = fx.algebra.base.coords
    for target in (-0.5, 0.5):
        p = int(np.argmin(np.abs(t - target)))
        region = psi(fx["c"], p)
        assert abs(region.centroid() - np.sign(target)) < 1e-6


def test_alpha_beta_endpoints():
    a, b = alpha_beta(-1.0)
    assert a == -1 and b == pytest.approx(-1 + 2j)
    a, b = alpha_beta(0.0)
    assert (a, b) == (-1, 1)
    a, b = alpha_beta(1.0)
    assert a == pytest.approx(1 + 2j) and b == 1


def test_fix_d_y_set():
    assert y_set(fixture("FIX-D").algebra) == [0]


def test_fix_a_element_value_at_one():
    alg = fixture("FIX-A").algebra
    lam = np.array([[1, 2], [3, 4]])
    el = fix_a_element(alg, lam, 5.0, np.ones((3, 3)))
    assert np.allclose(el.blocks[20][0], lam) and np.allclose(el.blocks[20][1], 5.0)
    assert np.allclose(el.blocks[0][0][:2, :2], lam + 1)


def test_bad_params():
    with pytest.raises(BadParams):
        random_algebra(0, {"max_dim": 7})
    with pytest.raises(BadParams):
        random_algebra(0, {"points": 41})
    with pytest.raises(BadParams):
        random_algebra(0, {"colour": 1})
    with pytest.raises(BadParams):
        random_element(0, random_algebra(0), ["selfadjoint", "square_zero"])


@given(st.integers(0, 10_000), st.sampled_from(["discrete", "path"]))
def test_random_flags(seed, kind):
    alg = random_algebra(seed, {"kind": kind, "points": 4, "max_dim": 4})
    sa = random_element(seed, alg, ["selfadjoint"])
    for row in sa.blocks:
        for m in row:
            assert np.max(np.abs(m - m.conj().T)) <= 1e-12
    sz = random_element(seed, alg, ["square_zero"])
    assert all(is_square_zero(m) for row in sz.blocks for m in row)
    tz = random_element(seed, alg, ["trace_zero"])
    assert all(abs(np.trace(m)) < 1e-12 for row in tz.blocks for m in row)
    assert alg == random_algebra(seed, {"kind": kind, "points": 4, "max_dim": 4})
