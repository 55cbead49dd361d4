"""Set-valued maps built from an element's block numerical ranges."""

from functools import lru_cache

import numpy as np

from .convex import DEFAULT_ANGLES, center_minimax, intersect
from .errors import NotSelfadjoint
from .linalg import hermitian_eigvals
from .numrange import numerical_range

# the open union over delta < r is realized at this fraction of r
SUB_RADIUS = 1.0 - 1e-6


def block_ranges(element, p, k=DEFAULT_ANGLES):
    """Numerical ranges of the element in each maximal block at point ``p``."""
    alg = element.algebra
    return [numerical_range(element.blocks[p][i], k) for i in alg.maximal_blocks(p)]


def _keys(element, p):
    row = element.blocks[p]
    return tuple((np.ascontiguousarray(row[i]).tobytes(), row[i].shape[0])
                 for i in element.algebra.maximal_blocks(p))


def _ranges_of(keys, k):
    return [numerical_range(np.frombuffer(b, dtype=np.complex128).reshape(d, d), k)
            for b, d in keys]


@lru_cache(maxsize=16384)
def _psi_cached(keys, k):
    return intersect(_ranges_of(keys, k))


@lru_cache(maxsize=16384)
def _minimax_cached(keys, k):
    return center_minimax(_ranges_of(keys, k))


def psi(element, p, k=DEFAULT_ANGLES):
    """Intersection of the maximal-block numerical ranges at ``p`` (may be empty)."""
    return _psi_cached(_keys(element, p), k)


def point_minimax(element, p, k=DEFAULT_ANGLES):
    """``center_minimax`` of the maximal-block ranges at ``p``: ``(lam, r)``."""
    return _minimax_cached(_keys(element, p), k)


def psi_r(element, p, r, k=DEFAULT_ANGLES):
    """Intersection of the ranges fattened by just under ``r``."""
    if r <= 0:
        raise ValueError("psi_r needs r > 0")
    delta = r * SUB_RADIUS
    return intersect([w.fatten(delta) for w in block_ranges(element, p, k)])


def psi_field(element, k=DEFAULT_ANGLES):
    return [psi(element, p, k) for p in range(element.algebra.n_points)]


def envelopes(element):
    """Per-point ``(h, g)`` with psi equal to the real interval ``[h, g]``.

    ``g`` is the smallest top eigenvalue over maximal blocks and ``h`` the
    largest bottom eigenvalue; the interval is empty where ``h > g``.
    """
    if not element.selfadjoint:
        raise NotSelfadjoint("envelopes need a selfadjoint element")
    alg = element.algebra
    n = alg.n_points
    h = np.empty(n)
    g = np.empty(n)
    for p in range(n):
        lo, hi = [], []
        for i in alg.maximal_blocks(p):
            w = hermitian_eigvals(element.blocks[p][i])
            lo.append(w[0])
            hi.append(w[-1])
        h[p] = max(lo)
        g[p] = min(hi)
    return h, g
