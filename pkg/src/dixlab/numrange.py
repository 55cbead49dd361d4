"""Numerical ranges of square matrices via support-function sweeps."""

from functools import lru_cache
import os

import numpy as np

from .convex import DEFAULT_ANGLES, ConvexRegion, angle_grid
from .errors import NotNormal
from .linalg import adjoint, hermitian_eig, hermitian_eigvals, is_normal

# membership tolerance for points against ranges
GEOM_TOL = float(os.environ.get("DIXLAB_TOL_GEOM", "1e-7"))


def _hermitian_parts(a):
    a = np.asarray(a, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"numerical range needs a square matrix, got {a.shape}")
    re = 0.5 * (a + adjoint(a))
    im = (a - adjoint(a)) / 2j
    return re, im


def support_value(a, theta):
    """Largest eigenvalue of ``(e^{-i theta} a + e^{i theta} a*) / 2``."""
    re, im = _hermitian_parts(a)
    h = np.cos(theta) * re + np.sin(theta) * im
    return float(hermitian_eigvals(h)[-1])


@lru_cache(maxsize=16384)
def _range_cached(key, shape, k):
    a = np.frombuffer(key, dtype=np.complex128).reshape(shape)
    re, im = _hermitian_parts(a)
    _, cs, sn = angle_grid(k)
    if shape[0] <= 2:
        h = _small_support(re, im, cs, sn)
    else:
        stack = cs[:, None, None] * re + sn[:, None, None] * im
        h = hermitian_eigvals(stack)[:, -1]
    return ConvexRegion(h)


def _small_support(re, im, cs, sn):
    """Top eigenvalue of cs * re + sn * im for 1x1 and 2x2 blocks, in closed form."""
    a = cs * re[0, 0].real + sn * im[0, 0].real
    if re.shape[0] == 1:
        return a
    d = cs * re[1, 1].real + sn * im[1, 1].real
    b = cs * re[0, 1] + sn * im[0, 1]
    return 0.5 * (a + d) + np.hypot(0.5 * (a - d), np.abs(b))


def numerical_range(a, k=DEFAULT_ANGLES):
    """W(a) as a :class:`ConvexRegion` on the ``k``-direction grid."""
    a = np.ascontiguousarray(a, dtype=np.complex128)
    return _range_cached(a.tobytes(), a.shape, k)


def normal_spectrum(a, tol=1e-10):
    """Eigenvalues of a normal matrix through its commuting Hermitian parts.

    Re(a) and Im(a) commute, so a generic real combination of them has a
    simple spectrum whose eigenvectors diagonalize both.
    """
    a = np.asarray(a, dtype=np.complex128)
    if not is_normal(a, tol):
        raise NotNormal("matrix is not normal within tolerance")
    re, im = _hermitian_parts(a)
    # irrational-ish mixing weight keeps accidental degeneracies unlikely
    _, v = hermitian_eig(re + 0.7390851332151607 * im, tol=1e-8)
    d = adjoint(v) @ a @ v
    return [complex(x) for x in np.diag(d)]


def contains(region, z, tol=GEOM_TOL):
    """Containment up to the geometric tolerance (absorbs grid error)."""
    return region.inf_dist(z) <= tol
