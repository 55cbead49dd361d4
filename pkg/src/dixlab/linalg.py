"""Dense complex matrix kernel.

Hermitian eigenproblems are solved with cyclic Jacobi rotations.  The solver
works on stacks of matrices (shape ``(..., n, n)``) so that a whole sweep of
rotated Hermitian parts, as needed for numerical ranges, is diagonalized in
one call.
"""

import numpy as np
from numba import njit

from .errors import NoConvergence, NotHermitian

MAX_SWEEPS = 100
DEFAULT_TOL = 1e-10


def as_cmat(m):
    """Return ``m`` as a finite complex128 array (a copy)."""
    a = np.array(m, dtype=np.complex128)
    if a.ndim != 2:
        raise ValueError(f"expected a 2-d matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return a


def adjoint(m):
    return np.conj(np.swapaxes(m, -1, -2))


def fro(m):
    return np.sqrt(np.sum(np.abs(m) ** 2, axis=(-2, -1)))


@njit(cache=True)
def _jacobi_kernel(a, v, with_vectors, max_sweeps):
    """In-place cyclic Jacobi on a stack ``a`` of shape (B, n, n).

    Returns False if some matrix failed to converge within the sweep cap.
    """
    nb, n, _ = a.shape
    ok = True
    for b in range(nb):
        scale = 0.0
        for i in range(n):
            for j in range(n):
                scale += a[b, i, j].real ** 2 + a[b, i, j].imag ** 2
        scale = max(np.sqrt(scale), 1e-300)
        converged = False
        for sweep in range(max_sweeps + 1):
            off = 0.0
            for i in range(n):
                for j in range(n):
                    if i != j:
                        off += a[b, i, j].real ** 2 + a[b, i, j].imag ** 2
            off = np.sqrt(off)
            if off <= 1e-15 * scale:
                converged = True
                break
            if sweep == max_sweeps:
                converged = off <= 1e-12 * scale
                break
            for p in range(n - 1):
                for q in range(p + 1, n):
                    apq = a[b, p, q]
                    mag = abs(apq)
                    if mag <= 1e-300:
                        continue
                    phase = apq / mag
                    tau = (a[b, q, q].real - a[b, p, p].real) / (2.0 * mag)
                    sgn = 1.0 if tau >= 0 else -1.0
                    t = sgn / (abs(tau) + np.sqrt(1.0 + tau * tau))
                    c = 1.0 / np.sqrt(1.0 + t * t)
                    s = t * c
                    # J = diag(1, conj(phase)) @ [[c, s], [-s, c]]
                    jpp = c + 0j
                    jpq = s + 0j
                    jqp = -s * np.conj(phase)
                    jqq = c * np.conj(phase)
                    for r in range(n):
                        x = a[b, r, p]
                        y = a[b, r, q]
                        a[b, r, p] = x * jpp + y * jqp
                        a[b, r, q] = x * jpq + y * jqq
                    for r in range(n):
                        x = a[b, p, r]
                        y = a[b, q, r]
                        a[b, p, r] = np.conj(jpp) * x + np.conj(jqp) * y
                        a[b, q, r] = np.conj(jpq) * x + np.conj(jqq) * y
                    if with_vectors:
                        for r in range(n):
                            x = v[b, r, p]
                            y = v[b, r, q]
                            v[b, r, p] = x * jpp + y * jqp
                            v[b, r, q] = x * jpq + y * jqq
        if not converged:
            ok = False
    return ok


def _jacobi_batch(a, with_vectors=True):
    a = np.array(a, dtype=np.complex128)
    n = a.shape[-1]
    batch = a.shape[:-2]
    flat = np.ascontiguousarray(a.reshape((-1, n, n)))
    v = np.broadcast_to(np.eye(n, dtype=np.complex128), flat.shape).copy()
    if n > 1 and not _jacobi_kernel(flat, v, with_vectors, MAX_SWEEPS):
        raise NoConvergence(f"Jacobi iteration did not converge in {MAX_SWEEPS} sweeps")
    w = np.real(np.diagonal(flat, axis1=-2, axis2=-1)).copy()
    order = np.argsort(w, axis=-1, kind="stable")
    w = np.take_along_axis(w, order, axis=-1).reshape(batch + (n,))
    if not with_vectors:
        return w, None
    v = np.take_along_axis(v, order[:, None, :], axis=-1).reshape(batch + (n, n))
    return w, v


def hermitian_eig(h, tol=DEFAULT_TOL):
    """Eigen-decomposition of a Hermitian matrix (or a stack of them).

    Returns ``(eigenvalues, basis)`` with eigenvalues ascending and the
    eigenvectors as the columns of the unitary ``basis``.  Raises
    :class:`NotHermitian` when ``||h - h*|| > tol * ||h||``.
    """
    h = np.asarray(h, dtype=np.complex128)
    if h.shape[-1] != h.shape[-2]:
        raise NotHermitian(f"matrix is not square: {h.shape}")
    dev = fro(h - adjoint(h))
    if np.any(dev > tol * np.maximum(fro(h), 1.0)):
        raise NotHermitian(f"deviation from Hermitian {float(np.max(dev)):.3g} exceeds tolerance")
    h = 0.5 * (h + adjoint(h))
    return _jacobi_batch(h, with_vectors=True)


def hermitian_eigvals(h):
    """Eigenvalues only; ``h`` is assumed Hermitian (it is symmetrized)."""
    h = np.asarray(h, dtype=np.complex128)
    h = 0.5 * (h + adjoint(h))
    w, _ = _jacobi_batch(h, with_vectors=False)
    return w


def operator_norm(m):
    """Largest singular value, from the top eigenvalue of ``m* m``."""
    m = np.asarray(m, dtype=np.complex128)
    if m.size == 0:
        return 0.0
    w = hermitian_eigvals(adjoint(m) @ m)
    return float(np.sqrt(max(w[..., -1].max(), 0.0)))


def is_square_zero(m, tol=DEFAULT_TOL):
    m = np.asarray(m, dtype=np.complex128)
    if m.shape[0] != m.shape[1]:
        raise ValueError("is_square_zero needs a square matrix")
    nm = operator_norm(m)
    return operator_norm(m @ m) <= tol * max(1.0, nm * nm)


def is_hermitian(m, tol=DEFAULT_TOL):
    m = np.asarray(m, dtype=np.complex128)
    return bool(fro(m - adjoint(m)) <= tol * max(1.0, fro(m)))


def is_normal(m, tol=DEFAULT_TOL):
    m = np.asarray(m, dtype=np.complex128)
    c = m @ adjoint(m) - adjoint(m) @ m
    return bool(fro(c) <= tol * max(1.0, fro(m) ** 2))


def is_unitary(m, tol=DEFAULT_TOL):
    m = np.asarray(m, dtype=np.complex128)
    return bool(np.max(np.abs(adjoint(m) @ m - np.eye(m.shape[0]))) <= tol)


def expm_hermitian(h, s=1.0):
    """``exp(i s h)`` for Hermitian ``h``."""
    w, v = hermitian_eig(h, tol=1e-8)
    return (v * np.exp(1j * s * w)[..., None, :]) @ adjoint(v)


def matrix_unit(n, i, j):
    e = np.zeros((n, n), dtype=np.complex128)
    e[i, j] = 1.0
    return e


def operator_norms(stack):
    """Operator norm of every matrix in a ``(..., n, n)`` stack."""
    m = np.asarray(stack, dtype=np.complex128)
    if m.shape[-1] == 0:
        return np.zeros(m.shape[:-2])
    w = hermitian_eigvals(adjoint(m) @ m)
    return np.sqrt(np.maximum(w[..., -1], 0.0))
