"""Compact convex subsets of the complex plane, stored by support values.

Every region lives on a fixed grid of ``K`` equally spaced directions
``theta_k = 2 pi k / K`` and is the polygon

    { z : Re(exp(-i theta_k) z) <= h_k  for all k }.

Support values are kept *tight* (each line touches the polygon), which makes
Minkowski sums pointwise: fattening by ``delta`` adds ``delta`` to every value
(a circumscribed ``K``-gon stands in for the disk; the error for smooth
bodies is O(diam / K^2)).  Intersection takes the pointwise minimum and then
re-tightens it with a half-plane sweep.
"""

import math
import os
from functools import lru_cache

import numpy as np
from numba import njit

from .errors import EmptyRegion

DEFAULT_ANGLES = int(os.environ.get("DIXLAB_ANGLES", "720"))
# sets closer than this (relative to their size) are treated as touching
TOUCH_TOL = 1e-9
CONVEXITY_TOL = 1e-9
# regions thinner than this (relative) are treated as segments
THIN_TOL = 1e-8


@lru_cache(maxsize=16)
def angle_grid(k=DEFAULT_ANGLES):
    if k < 8 or k % 4:
        raise ValueError(f"angle grid size must be a multiple of 4 and >= 8, got {k}")
    th = 2.0 * np.pi * np.arange(k) / k
    cs, sn = np.cos(th), np.sin(th)
    for arr in (th, cs, sn):
        arr.setflags(write=False)
    return th, cs, sn


def _vertices_from_tight(h):
    k = len(h)
    th, cs, sn = angle_grid(k)
    h1 = np.roll(h, -1)
    cs1, sn1 = np.roll(cs, -1), np.roll(sn, -1)
    det = math.sin(2.0 * np.pi / k)
    x = (h * sn1 - h1 * sn) / det
    y = (cs * h1 - cs1 * h) / det
    return x + 1j * y


@njit(cache=True)
def _sweep(m, cs, sn, eps):
    """Sorted-angle deque sweep for {z : cs_k x + sn_k y <= m_k}.

    Returns ``(lines, xs, ys, count)``; vertex ``j`` joins active lines
    ``lines[j]`` and ``lines[j+1]`` (cyclically).  ``count < 3`` means empty.
    """
    k = m.shape[0]
    dq = np.empty(k, np.int64)
    px = np.empty(k, np.float64)
    py = np.empty(k, np.float64)
    head = 0
    tail = 0  # dq[head:tail]; px/py[j] = meet(dq[j], dq[j+1])
    for i in range(k):
        while tail - head >= 2 and cs[i] * px[tail - 2] + sn[i] * py[tail - 2] > m[i] + eps:
            tail -= 1
        while tail - head >= 2 and cs[i] * px[head] + sn[i] * py[head] > m[i] + eps:
            head += 1
        if tail > head:
            j = dq[tail - 1]
            det = cs[j] * sn[i] - sn[j] * cs[i]
            if abs(det) < 1e-12:
                return dq, px, py, 0
            px[tail - 1] = (m[j] * sn[i] - m[i] * sn[j]) / det
            py[tail - 1] = (cs[j] * m[i] - cs[i] * m[j]) / det
        dq[tail] = i
        tail += 1
    while tail - head >= 3:
        f = dq[head]
        if cs[f] * px[tail - 2] + sn[f] * py[tail - 2] > m[f] + eps:
            tail -= 1
            continue
        b = dq[tail - 1]
        if cs[b] * px[head] + sn[b] * py[head] > m[b] + eps:
            head += 1
            continue
        break
    n = tail - head
    if n < 3:
        return dq, px, py, 0
    lines = dq[head:tail].copy()
    xs = px[head:tail].copy()
    ys = py[head:tail].copy()
    j = lines[n - 1]
    i = lines[0]
    det = cs[j] * sn[i] - sn[j] * cs[i]
    if abs(det) < 1e-12:
        return dq, px, py, 0
    xs[n - 1] = (m[j] * sn[i] - m[i] * sn[j]) / det
    ys[n - 1] = (cs[j] * m[i] - cs[i] * m[j]) / det
    # consistency: consecutive active lines less than a half-turn apart and
    # every edge of nonnegative length, i.e. the vertex cycle is convex
    tol = 1e-9 * max(1.0, np.max(np.abs(m)))
    for a in range(n):
        la = lines[a]
        lb = lines[(a + 1) % n]
        gap = (lb - la) % k
        if gap == 0 or 2 * gap >= k:
            return dq, px, py, 0
        prev = (a - 1) % n
        edge = -sn[la] * (xs[a] - xs[prev]) + cs[la] * (ys[a] - ys[prev])
        if edge < -tol:
            return dq, px, py, 0
    return lines, xs, ys, n


def _tight_from_sweep(lines, xs, ys, k):
    """Support values of the swept polygon, evaluated arc by arc."""
    _, cs, sn = angle_grid(k)
    owner = np.searchsorted(lines, np.arange(k), side="right") - 1
    owner[owner < 0] = len(lines) - 1
    return cs * xs[owner] + sn * ys[owner]


def _checked_sweep(m, eps):
    """Tight values of {z : <u_k, z> <= m_k}, or None if empty or inconsistent."""
    k = len(m)
    _, cs, sn = angle_grid(k)
    lines, xs, ys, n = _sweep(m, cs, sn, eps)
    if n < 3:
        return None
    h = _tight_from_sweep(lines, xs, ys, k)
    if np.any(h > m + 1e-9 * max(1.0, float(np.max(np.abs(m))))):
        return None
    return h


def _support_of_points(pts, k):
    _, cs, sn = angle_grid(k)
    pts = np.asarray(pts, dtype=np.complex128).ravel()
    return np.max(np.outer(cs, pts.real) + np.outer(sn, pts.imag), axis=1)


def tighten(m):
    """Tight support values of the polygon cut out by ``m``; None if empty.

    Emptiness is decided on the polygon inflated by a tiny margin, so sets
    that touch within the margin count as meeting.  Regions of positive
    width are then swept without the margin.  Regions thinner than a few
    margins (segments, points, touching sets) are solved as a 1-d interval
    along their midline, which avoids the degenerate sweep.
    """
    m = np.asarray(m, dtype=float)
    k = len(m)
    if np.any(np.isneginf(m)):
        return None
    scale = max(1.0, float(np.max(np.abs(m))))
    pad = TOUCH_TOL * scale
    eps = 2e-12 * scale
    hp = _checked_sweep(m + pad, eps)
    if hp is None:
        return None
    half = k // 2
    width = hp + np.roll(hp, -half)
    j = int(np.argmin(width))
    if width[j] > 2 * pad + THIN_TOL * scale:
        h = _checked_sweep(m, eps)
        if h is not None:
            return h
    return _thin_support(m, hp, j)


def _thin_support(m, hp, j):
    """Support of a region of (near) zero width across direction ``j``."""
    k = len(m)
    _, cs, sn = angle_grid(k)
    half = k // 2
    c = 0.5 * (hp[j] - hp[(j + half) % k])
    normal = complex(cs[j], sn[j])
    p0 = c * normal
    d = 1j * normal
    a = cs * d.real + sn * d.imag
    b = m - (cs * p0.real + sn * p0.imag)
    use = np.abs(a) > 0.5 * math.sin(2 * math.pi / k)
    up = use & (a > 0)
    dn = use & (a < 0)
    s_hi = float(np.min(b[up] / a[up])) if np.any(up) else 0.0
    s_lo = float(np.max(b[dn] / a[dn])) if np.any(dn) else 0.0
    if s_lo > s_hi:
        s_lo = s_hi = 0.5 * (s_lo + s_hi)
    return _support_of_points([p0 + s_lo * d, p0 + s_hi * d], k)


def _point_segment(z, a, b):
    """Nearest points on segments [a_i, b_i] to z (vectorized)."""
    d = b - a
    dd = (d.real ** 2 + d.imag ** 2)
    t = np.where(dd > 0, ((z - a) * np.conj(d)).real / np.where(dd > 0, dd, 1.0), 0.0)
    t = np.clip(t, 0.0, 1.0)
    return a + t * d


class ConvexRegion:
    """A compact convex region (possibly empty) on the shared angle grid."""

    __slots__ = ("_h", "_verts")

    def __init__(self, support, tight=True):
        if support is None:
            self._h = None
        else:
            h = np.array(support, dtype=float)
            if not tight:
                h = tighten(h)
            if h is not None:
                h.setflags(write=False)
            self._h = h
        self._verts = None

    # constructors -------------------------------------------------------
    @classmethod
    def empty(cls):
        return cls(None)

    @classmethod
    def from_points(cls, points, k=DEFAULT_ANGLES):
        """Convex hull of finitely many points."""
        return cls(_support_of_points(points, k))

    @classmethod
    def point(cls, z, k=DEFAULT_ANGLES):
        return cls.from_points([z], k)

    @classmethod
    def segment(cls, a, b, k=DEFAULT_ANGLES):
        return cls.from_points([a, b], k)

    @classmethod
    def disk(cls, center, radius, k=DEFAULT_ANGLES):
        return cls(_support_of_points([center], k) + radius)

    # basic properties ---------------------------------------------------
    @property
    def is_empty(self):
        return self._h is None

    @property
    def support(self):
        if self._h is None:
            raise EmptyRegion("empty region has no support values")
        return self._h

    @property
    def k(self):
        return None if self._h is None else len(self._h)

    def _need(self):
        if self._h is None:
            raise EmptyRegion("operation needs a nonempty region")

    def vertices(self):
        """Polygon vertices in counter-clockwise order, duplicates merged."""
        self._need()
        if self._verts is None:
            v = _vertices_from_tight(self._h)
            scale = max(1.0, float(np.max(np.abs(self._h))))
            keep = np.abs(v - np.roll(v, 1)) > 1e-9 * scale
            if not np.any(keep):
                v = v[:1]
            else:
                v = v[keep]
            v.setflags(write=False)
            self._verts = v
        return self._verts

    def diameter(self):
        self._need()
        half = len(self._h) // 2
        return float(np.max(self._h + np.roll(self._h, -half)))

    def centroid(self):
        """Mean of the polygon vertices (a deterministic interior point)."""
        return complex(np.mean(self.vertices()))

    def area(self):
        v = self.vertices()
        if len(v) < 3:
            return 0.0
        x, y = v.real, v.imag
        return 0.5 * abs(float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1))))

    # geometry -------------------------------------------------------------
    def project(self, z):
        """Nearest point of the region to ``z``."""
        self._need()
        z = complex(z)
        if self.contains(z, 0.0):
            return z
        v = self.vertices()
        if len(v) == 1:
            return complex(v[0])
        q = _point_segment(z, v, np.roll(v, -1))
        return complex(q[np.argmin(np.abs(q - z))])

    def contains(self, z, tol=1e-7):
        self._need()
        _, cs, sn = angle_grid(len(self._h))
        z = complex(z)
        return bool(np.all(cs * z.real + sn * z.imag <= self._h + tol))

    def inf_dist(self, z):
        """Euclidean distance from ``z`` to the region."""
        self._need()
        z = complex(z)
        if self.contains(z, 0.0):
            return 0.0
        return abs(self.project(z) - z)

    def fatten(self, delta, inscribed=False):
        """Minkowski sum with a closed ``delta``-disk.

        With ``inscribed=True`` the disk is replaced by the grid polygon
        inscribed in it, which never overshoots Euclidean distance ``delta``.
        """
        self._need()
        if delta < 0:
            raise ValueError("fattening radius must be nonnegative")
        if inscribed:
            delta = delta * math.cos(math.pi / len(self._h))
        return ConvexRegion(self._h + delta)

    def translate(self, beta):
        self._need()
        _, cs, sn = angle_grid(len(self._h))
        beta = complex(beta)
        return ConvexRegion(self._h + cs * beta.real + sn * beta.imag)

    def __repr__(self):
        if self._h is None:
            return "ConvexRegion(empty)"
        v = self.vertices()
        return f"ConvexRegion(k={len(self._h)}, vertices={len(v)}, centroid={self.centroid():.4g})"


def intersect(regions):
    """Intersection of regions on a common grid (empty result allowed)."""
    regions = list(regions)
    if not regions:
        raise ValueError("intersect needs at least one region")
    if any(r.is_empty for r in regions):
        return ConvexRegion.empty()
    ks = {r.k for r in regions}
    if len(ks) != 1:
        raise ValueError(f"regions live on different angle grids: {sorted(ks)}")
    if len(regions) == 1:
        return regions[0]
    stack = np.stack([r.support for r in regions])
    m = np.min(stack, axis=0)
    # one region inside all others: it is the intersection and already tight
    inside = np.flatnonzero(np.all(stack == m, axis=1))
    if inside.size:
        return regions[int(inside[0])]
    return ConvexRegion(m, tight=False)


def fatten(region, delta, inscribed=False):
    if region.is_empty:
        raise EmptyRegion("cannot fatten an empty region")
    return region.fatten(delta, inscribed=inscribed)


def inf_dist(region, z):
    if region.is_empty:
        raise EmptyRegion("distance to an empty region")
    return region.inf_dist(z)


def hausdorff(r1, r2):
    """Hausdorff distance: sup-norm of the support difference on the grid."""
    if r1.is_empty or r2.is_empty:
        raise EmptyRegion("Hausdorff distance needs nonempty regions")
    return float(np.max(np.abs(r1.support - r2.support)))


def set_distance(r1, r2):
    """Infimum distance between two regions (0 when they meet)."""
    if r1.is_empty or r2.is_empty:
        raise EmptyRegion("distance needs nonempty regions")
    p, q = closest_pair(r1, r2)
    return abs(p - q)


def closest_pair(r1, r2):
    """Points ``p in r1``, ``q in r2`` realizing the infimum distance."""
    both = intersect([r1, r2])
    if not both.is_empty:
        c = both.centroid()
        return c, c
    v1, v2 = r1.vertices(), r2.vertices()
    h1, h2 = r1.support, r2.support
    k = len(h1)
    _, cs, sn = angle_grid(k)
    sep = -h1 - np.roll(h2, -(k // 2))
    j = int(np.argmax(sep))
    u0 = complex(cs[j], sn[j])
    s1 = (v1 * np.conj(u0)).real
    s2 = (v2 * np.conj(u0)).real
    scale = max(r1.diameter(), r2.diameter(), 1e-300)
    slack = 0.02 * scale
    # only vertices facing the other set can be closest; widen until certified
    while True:
        full = slack > 2 * scale
        c1 = v1 if full else v1[s1 >= s1.max() - slack]
        c2 = v2 if full else v2[s2 <= s2.min() + slack]
        pq = _closest_between(c1, c2)
        if full or _certified(v1, v2, *pq):
            return pq
        slack *= 4


def _closest_between(v1, v2):
    """Closest pair between the closed polygonal chains through ``v1`` and ``v2``."""
    best = None
    for src, dst, flip in ((v1, v2, False), (v2, v1, True)):
        z = src[:, None]
        if len(dst) == 1:
            q = np.broadcast_to(dst[None, :], (len(src), 1))
        else:
            q = _point_segment(z, dst[None, :], np.roll(dst, -1)[None, :])
        dist = np.abs(q - z)
        i, j = np.unravel_index(int(np.argmin(dist)), dist.shape)
        d = dist[i, j]
        if best is None or d < best[0] - 1e-15:
            zi, qj = complex(src[i]), complex(q[i, j])
            best = (d, (qj, zi) if flip else (zi, qj))
    return best[1]


def _certified(v1, v2, p, q):
    """Separating-line test: ``p`` is extreme in set 1 toward ``q`` and vice versa."""
    u = q - p
    n = abs(u)
    if n == 0:
        return True
    eps = 1e-12 * max(1.0, float(np.max(np.abs(v1))), float(np.max(np.abs(v2)))) * n
    a = (v1 * np.conj(u)).real
    b = (v2 * np.conj(u)).real
    return a.max() <= (p * np.conj(u)).real + eps and b.min() >= (q * np.conj(u)).real - eps


def _minimax_value(regions, z):
    return max(r.inf_dist(z) for r in regions)


def center_minimax(regions):
    """Point minimizing the largest distance to the given regions.

    Returns ``(lam, r)``.  ``r == 0`` exactly when the regions share a point
    (up to the touching tolerance).  Otherwise the optimum is pinned by two
    or three regions; pairs are solved exactly through closest points and the
    remaining case is handled by a convex descent from the best pair.
    """
    regions = list(regions)
    if not regions:
        raise ValueError("center_minimax needs at least one region")
    if any(r.is_empty for r in regions):
        raise EmptyRegion("center_minimax needs nonempty regions")
    common = intersect(regions)
    if not common.is_empty:
        return common.centroid(), 0.0
    best = None
    n = len(regions)
    for i in range(n):
        for j in range(i + 1, n):
            p, q = closest_pair(regions[i], regions[j])
            lam = 0.5 * (p + q)
            r = 0.5 * abs(p - q)
            val = _minimax_value(regions, lam)
            if best is None or val < best[1]:
                best = (lam, val, r)
    lam, val, r = best
    if val <= r * (1 + 1e-12) + 1e-15:
        return lam, r
    return _descend(regions, lam, val)


def _descend(regions, lam, val):
    from scipy.optimize import minimize

    f = lambda x: _minimax_value(regions, complex(x[0], x[1]))
    x0 = np.array([lam.real, lam.imag])
    step = max(val, 1e-3)
    res = minimize(f, x0, method="Nelder-Mead",
                   options={"xatol": 1e-13, "fatol": 1e-14, "maxiter": 4000,
                            "initial_simplex": [x0, x0 + [step, 0], x0 + [0, step]]})
    res = minimize(f, res.x, method="Nelder-Mead",
                   options={"xatol": 1e-14, "fatol": 1e-15, "maxiter": 4000})
    z = complex(res.x[0], res.x[1])
    fz = f(res.x)
    if fz < val:
        return z, float(fz)
    return lam, float(val)
