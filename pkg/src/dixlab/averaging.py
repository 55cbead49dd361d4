"""Averaging certificates: unitary mixing operators and EUCP operators.

A unitary mixing operator acts as ``x -> sum_i t_i u_i* x u_i`` and an
elementary unital completely positive (EUCP) operator as
``x -> sum_i a_i* x a_i`` with ``sum_i a_i* a_i = 1``.  Both act blockwise on
fibered elements; their coefficient fields are stored as per-point,
per-block stacks of matrices.
"""

from dataclasses import dataclass, field
from math import lcm

import numpy as np
from scipy.optimize import linprog, nnls

from .algebra import Element, FiberedAlgebra, matrix_algebra
from .convex import center_minimax
from .errors import NotDensity, ShapeMismatch, UnsupportedBase
from .linalg import adjoint, as_cmat, hermitian_eig, operator_norms
from .psi import block_ranges

WEIGHT_TOL = 1e-12
UNITARY_TOL = 1e-10
UNITAL_TOL = 1e-10
DENSITY_TOL = 1e-10


def _check_shape(algebra, element):
    if element.algebra.shape() != algebra.shape():
        raise ShapeMismatch("operator and element live on differently shaped algebras")


def _constant_stacks(algebra, per_dim):
    """Stacks that use ``per_dim[d]`` at every block of dimension ``d``."""
    return [[per_dim[b.dim] for b in fib] for fib in algebra.fibers]


class MixingOperator:
    """``x -> sum_i t_i u_i* x u_i`` with a unitary field per term."""

    def __init__(self, algebra, weights, stacks):
        self.algebra = algebra
        self.weights = np.asarray(weights, dtype=float)
        self.stacks = [[np.asarray(s, dtype=np.complex128) for s in row] for row in stacks]
        m = len(self.weights)
        for p, (fib, row) in enumerate(zip(algebra.fibers, self.stacks)):
            for b, s in zip(fib, row):
                if s.shape != (m, b.dim, b.dim):
                    raise ShapeMismatch(f"point {p}: unitary stack shape {s.shape}, "
                                        f"expected {(m, b.dim, b.dim)}")

    @classmethod
    def identity(cls, algebra):
        eye = {b.dim: np.eye(b.dim, dtype=np.complex128)[None] for fib in algebra.fibers for b in fib}
        return cls(algebra, [1.0], _constant_stacks(algebra, eye))

    @property
    def n_terms(self):
        return len(self.weights)

    @property
    def terms(self):
        """List of ``(weight, unitary Element)``."""
        return [(float(w), Element(self.algebra, [[s[m] for s in row] for row in self.stacks]))
                for m, w in enumerate(self.weights)]

    def apply(self, element):
        return apply(self, element)

    def __repr__(self):
        return f"MixingOperator(terms={self.n_terms}, algebra={self.algebra.name!r})"


class EucpOperator:
    """``x -> sum_i a_i* x a_i`` with coefficient fields ``a_i``."""

    def __init__(self, algebra, stacks):
        self.algebra = algebra
        self.stacks = [[np.asarray(s, dtype=np.complex128) for s in row] for row in stacks]
        sizes = {s.shape[0] for row in self.stacks for s in row}
        if len(sizes) != 1:
            raise ShapeMismatch("every block needs the same number of Kraus coefficients")
        for p, (fib, row) in enumerate(zip(algebra.fibers, self.stacks)):
            for b, s in zip(fib, row):
                if s.shape[1:] != (b.dim, b.dim):
                    raise ShapeMismatch(f"point {p}: coefficient shape {s.shape[1:]}, dim {b.dim}")

    @classmethod
    def identity(cls, algebra):
        eye = {b.dim: np.eye(b.dim, dtype=np.complex128)[None] for fib in algebra.fibers for b in fib}
        return cls(algebra, _constant_stacks(algebra, eye))

    @property
    def n_terms(self):
        return self.stacks[0][0].shape[0]

    @property
    def kraus(self):
        return [Element(self.algebra, [[s[m] for s in row] for row in self.stacks])
                for m in range(self.n_terms)]

    def apply(self, element):
        return apply(self, element)

    def __repr__(self):
        return f"EucpOperator(terms={self.n_terms}, algebra={self.algebra.name!r})"


@dataclass
class MixingChain:
    """Successive application of mixing operators (first factor acts first).

    The composite is again a mixing operator; it is kept factored because
    the expanded term count is the product of the factors' counts.
    """

    algebra: FiberedAlgebra
    factors: list = field(default_factory=list)

    @property
    def n_terms(self):
        n = 1
        for f in self.factors:
            n *= f.n_terms
        return n

    def apply(self, element):
        return apply(self, element)

    def expand(self, max_terms=1 << 16):
        if self.n_terms > max_terms:
            raise ValueError(f"expansion would have {self.n_terms} terms")
        out = MixingOperator.identity(self.algebra)
        for f in self.factors:
            out = compose(f, out)
        return out


def _apply_block(kind, coeff, m, weights=None):
    c = coeff
    prod = adjoint(c) @ m[None] @ c
    if kind == "mix":
        return np.tensordot(weights, prod, axes=1)
    return prod.sum(axis=0)


def apply(op, element):
    """Blockwise action of a mixing, chain or EUCP operator."""
    if isinstance(op, MixingChain):
        _check_shape(op.algebra, element)
        for f in op.factors:
            element = apply(f, element)
        return element
    _check_shape(op.algebra, element)
    if isinstance(op, MixingOperator):
        w = op.weights
        blocks = [[_apply_block("mix", s, m, w) for s, m in zip(srow, mrow)]
                  for srow, mrow in zip(op.stacks, element.blocks)]
    elif isinstance(op, EucpOperator):
        blocks = [[_apply_block("eucp", s, m) for s, m in zip(srow, mrow)]
                  for srow, mrow in zip(op.stacks, element.blocks)]
    else:
        raise TypeError(f"cannot apply {type(op).__name__}")
    return Element(element.algebra, blocks)


def compose(phi1, phi2):
    """``phi1 o phi2``: apply ``phi2`` first, then ``phi1``.

    Terms are indexed by pairs (i of phi1, j of phi2) with weight
    ``s_i t_j`` and unitary ``v_j u_i``.
    """
    if phi1.algebra.shape() != phi2.algebra.shape():
        raise ShapeMismatch("operators live on differently shaped algebras")
    w = np.outer(phi1.weights, phi2.weights).ravel()
    stacks = []
    for r1, r2 in zip(phi1.stacks, phi2.stacks):
        row = []
        for u, v in zip(r1, r2):
            prod = v[None, :, :, :] @ u[:, None, :, :]
            row.append(prod.reshape((-1,) + u.shape[1:]))
        stacks.append(row)
    return MixingOperator(phi1.algebra, w, stacks)


# ---------------------------------------------------------------------------
# exact scalarization


def clock_shift(n):
    """The ``n*n`` unitaries ``X^a Z^b`` (shift and clock), as a stack."""
    x = np.roll(np.eye(n, dtype=np.complex128), 1, axis=0)
    z = np.diag(np.exp(2j * np.pi * np.arange(n) / n))
    out = np.empty((n * n, n, n), dtype=np.complex128)
    xa = np.eye(n, dtype=np.complex128)
    for a in range(n):
        zb = np.eye(n, dtype=np.complex128)
        for b in range(n):
            out[a * n + b] = xa @ zb
            zb = zb @ z
        xa = xa @ x
    return out


def weyl_twirl(n):
    """Equal-weight average over the clock-and-shift group of ``M_n``.

    It maps every matrix ``a`` to ``(tr a / n) * 1``.
    """
    if n < 1:
        raise ValueError("n must be positive")
    return MixingOperator(matrix_algebra(n), np.full(n * n, 1.0 / (n * n)), [[clock_shift(n)]])


def block_twirl(algebra):
    """Mixing operator scalarizing every block of every fiber at once.

    Term ``m`` uses the clock-and-shift unitary number ``m mod d^2`` on each
    block of dimension ``d``.  With ``lcm`` of the ``d^2`` terms every block
    sees its own twirl group uniformly, so the action equals the composition
    of the per-block twirls with far fewer terms.
    """
    if algebra.base.is_path and not algebra.has_constant_structure():
        raise UnsupportedBase("unitary fields cannot follow a change of fiber structure")
    dims = sorted({b.dim for fib in algebra.fibers for b in fib})
    m = 1
    for d in dims:
        m = lcm(m, d * d)
    per_dim = {d: np.tile(clock_shift(d), (m // (d * d), 1, 1)) for d in dims}
    return MixingOperator(algebra, np.full(m, 1.0 / m), _constant_stacks(algebra, per_dim))


def blockwise_scalarize(element):
    """Average the element to its blockwise normalized traces.

    Returns ``(phi, phi(element))``; blockwise trace-zero input maps to 0.
    """
    phi = block_twirl(element.algebra)
    return phi, apply(phi, element)


# ---------------------------------------------------------------------------
# EUCP operators from states


def _check_density(omega):
    omega = as_cmat(omega)
    n = omega.shape[0]
    if omega.shape != (n, n):
        raise NotDensity("density matrix must be square")
    if np.max(np.abs(omega - adjoint(omega))) > DENSITY_TOL:
        raise NotDensity("density matrix is not Hermitian")
    if abs(np.trace(omega) - 1.0) > DENSITY_TOL:
        raise NotDensity(f"trace is {complex(np.trace(omega)):.6g}, not 1")
    w, v = hermitian_eig(omega)
    if w[0] < -DENSITY_TOL:
        raise NotDensity(f"density matrix has negative eigenvalue {w[0]:.3g}")
    return omega


def eucp_from_state(omega):
    """Kraus form of ``b -> tr(omega b) * 1`` on ``M_n``.

    The Choi matrix ``sum_ij E_ij (x) phi(E_ij)`` of this map is
    ``omega^T (x) 1``; its eigenvectors, reshaped, are the Kraus operators.
    """
    omega = _check_density(omega)
    n = omega.shape[0]
    choi = np.kron(omega.T, np.eye(n))
    w, v = hermitian_eig(choi)
    kraus = []
    for lam, vec in zip(w, v.T):
        if lam <= DENSITY_TOL * 1e-2:
            continue
        k = np.sqrt(lam) * vec.reshape(n, n).T  # K[alpha, i] = v[i*n + alpha]
        kraus.append(adjoint(k))  # phi(b) = sum K b K* = sum a* b a with a = K*
    return EucpOperator(matrix_algebra(n), [[np.array(kraus)]])


def assemble_eucp(algebra, per_block):
    """Blockwise EUCP operator from single-block ones.

    ``per_block`` maps ``(point, block)`` to an :class:`EucpOperator` on
    ``M_d``; unlisted blocks get the identity.  Coefficient stacks are padded
    with zeros to a common length.
    """
    mats = {}
    for (p, i), op in per_block.items():
        d = algebra.fibers[p][i].dim
        s = op.stacks[0][0]
        if s.shape[1:] != (d, d):
            raise ShapeMismatch(f"operator for block {(p, i)} has dim {s.shape[1]}, block has {d}")
        mats[(p, i)] = s
    k = max([s.shape[0] for s in mats.values()] + [1])
    stacks = []
    for p, fib in enumerate(algebra.fibers):
        row = []
        for i, b in enumerate(fib):
            s = mats.get((p, i), np.eye(b.dim, dtype=np.complex128)[None])
            pad = np.zeros((k - s.shape[0], b.dim, b.dim), dtype=np.complex128)
            row.append(np.concatenate([s, pad]))
        stacks.append(row)
    return EucpOperator(algebra, stacks)


def _boundary_state(a, theta):
    """Unit vector maximizing ``Re(e^{-i theta} x* a x)`` and its value."""
    h = 0.5 * (np.exp(-1j * theta) * a + np.exp(1j * theta) * adjoint(a))
    _, v = hermitian_eig(h)
    x = v[:, -1]
    return x, complex(np.vdot(x, a @ x))


def _convex_weights(mat, rhs):
    """Nonnegative ``w`` with ``mat @ w = rhs`` (best effort) and the true residual.

    nnls is tried first; its reported residual is not trusted.  A linear
    program is the fallback, and the support found is re-solved exactly.
    """
    w, _ = nnls(mat, rhs)
    res = float(np.linalg.norm(mat @ w - rhs))
    if res > 1e-9:
        lp = linprog(np.zeros(mat.shape[1]), A_eq=mat, b_eq=rhs, bounds=(0, None), method="highs")
        if lp.status == 0:
            w = lp.x
    support = np.flatnonzero(w > 1e-12)
    if support.size:
        sub, *_ = np.linalg.lstsq(mat[:, support], rhs, rcond=None)
        if np.all(sub >= 0):
            w = np.zeros(mat.shape[1])
            w[support] = sub
    return w, float(np.linalg.norm(mat @ w - rhs))


def state_for_value(a, mu, tol=1e-13, max_rounds=80):
    """Density matrix ``omega`` with ``tr(omega a) = mu`` for ``mu`` in W(a).

    ``omega`` is a convex combination of pure states whose values are
    boundary points of W(a).  Weights come from a nonnegative least-squares
    fit; angles are added where ``mu`` lies outside the current inscribed
    polygon until the fit is exact.
    """
    a = as_cmat(a)
    mu = complex(mu)
    scale = max(1.0, float(np.max(np.abs(a))))
    thetas = list(np.linspace(0.0, 2 * np.pi, 32, endpoint=False))
    states = [_boundary_state(a, t) for t in thetas]
    best = None
    for _ in range(max_rounds):
        z = np.array([s[1] for s in states])
        mat = np.vstack([z.real, z.imag, np.ones(len(z))])
        w, res = _convex_weights(mat, np.array([mu.real, mu.imag, 1.0]))
        if best is None or res < best[1]:
            best = (w, res, [s[0] for s in states])
        if res <= tol * scale:
            break
        # refine around the edge of the polygon that mu is outside of
        order = np.argsort(thetas)
        worst, gap = None, 0.0
        for j in range(len(order)):
            i0, i1 = order[j], order[(j + 1) % len(order)]
            e = z[i1] - z[i0]
            side = (e.conjugate() * (mu - z[i0])).imag  # < 0: mu right of the edge
            if side < gap:
                worst, gap = (i0, i1), side
        if worst is None:
            break
        t0, t1 = thetas[worst[0]], thetas[worst[1]]
        if t1 < t0:
            t1 += 2 * np.pi
        tm = 0.5 * (t0 + t1) % (2 * np.pi)
        thetas.append(tm)
        states.append(_boundary_state(a, tm))
    w, res, vecs = best
    omega = sum(wi * np.outer(x, x.conj()) for wi, x in zip(w, vecs) if wi > 0)
    omega = 0.5 * (omega + adjoint(omega))
    return omega / np.trace(omega).real


# ---------------------------------------------------------------------------
# descent


def _target_values(element, target):
    alg = element.algebra
    if target is None:
        return np.array([center_minimax(block_ranges(element, p))[0] for p in range(alg.n_points)])
    if isinstance(target, Element):
        return np.array([complex(np.trace(target.blocks[p][0])) / target.blocks[p][0].shape[0]
                         for p in range(alg.n_points)])
    return np.broadcast_to(np.asarray(target, dtype=np.complex128), (alg.n_points,)).copy()


def _swap_directions(m):
    """Hermitian generators exchanging extreme eigenvectors of Re m and Im m."""
    out = []
    d = m.shape[0]
    for h in (0.5 * (m + adjoint(m)), -0.5j * (m - adjoint(m))):
        _, v = hermitian_eig(h, tol=1e-6)
        g = np.zeros((d, d), dtype=np.complex128)
        g[0, d - 1] = g[d - 1, 0] = 1.0
        out.append(v @ g @ adjoint(v))
    return out


def _random_direction(rng, d):
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    g = 0.5 * (g + adjoint(g))
    return g / np.linalg.norm(g)


STEPS = np.pi / 2 * 0.5 ** np.arange(8)


def _best_unitary(m, c, rng, n_random):
    """Unitary ``u`` minimizing ``||(m + u* m u)/2 - c||`` over a line search."""
    d = m.shape[0]
    dirs = np.array(_swap_directions(m) + [_random_direction(rng, d) for _ in range(n_random)])
    w, v = hermitian_eig(dirs, tol=1e-6)
    s = np.concatenate([STEPS, -STEPS])
    # u[g, s] = v_g diag(exp(i s w_g)) v_g*
    ph = np.exp(1j * s[None, :, None] * w[:, None, :])
    u = (v[:, None] * ph[:, :, None, :]) @ adjoint(v)[:, None]
    u = u.reshape((-1, d, d))
    avg = 0.5 * (m[None] + adjoint(u) @ m[None] @ u) - c * np.eye(d)
    r = operator_norms(avg)
    j = int(np.argmin(r))
    return u[j], float(r[j])


def descent_to_center(element, target=None, budget=500, seed=0, tol=1e-12, n_random=2):
    """Two-term averaging ``x -> (x + u* x u)/2`` driven toward a central target.

    Each step picks, block by block, a unitary ``exp(i s H)`` by line search
    over extreme-eigenvector swaps and random Hermitian directions, keeping a
    block unchanged unless its residual drops.  Returns
    ``(chain, residuals)``: the composed operator and the nonincreasing
    residual ``max_blocks ||phi(a) - target||`` per step (entry 0 is the
    starting residual).  Stops early once the residual is below ``tol``.
    Unitaries are chosen point by point, so across a change of fiber
    structure the result is a per-fiber statement.
    """
    alg = element.algebra
    rng = np.random.default_rng(seed)
    c = _target_values(element, target)
    cur = [[np.array(m) for m in row] for row in element.blocks]

    def resid(p, m):
        return float(operator_norms((m - c[p] * np.eye(m.shape[0]))[None])[0])

    res = [[resid(p, m) for m in row] for p, row in enumerate(cur)]
    curve = [max(max(r) for r in res)]
    factors = []
    for _ in range(budget):
        if curve[-1] <= tol:
            break
        stacks = []
        for p, row in enumerate(cur):
            srow = []
            for i, m in enumerate(row):
                d = m.shape[0]
                u = np.eye(d, dtype=np.complex128)
                if d > 1 and res[p][i] > tol:
                    v, r = _best_unitary(m, c[p], rng, n_random)
                    if r < res[p][i]:
                        u = v
                        cur[p][i] = 0.5 * (m + adjoint(v) @ m @ v)
                        res[p][i] = r
                srow.append(np.stack([np.eye(d, dtype=np.complex128), u]))
            stacks.append(srow)
        factors.append(MixingOperator(alg, [0.5, 0.5], stacks))
        curve.append(max(max(r) for r in res))
        if len(curve) > 40 and curve[-40] - curve[-1] <= 1e-15 * max(1.0, curve[-1]):
            break  # stalled
    return MixingChain(alg, factors), np.array(curve)


# ---------------------------------------------------------------------------
# verification


def verify(op):
    """Invariant diagnostics; ``max_violation`` summarizes them."""
    if isinstance(op, MixingChain):
        reports = [verify(f) for f in op.factors]
        worst = max([r["max_violation"] for r in reports] + [0.0])
        return {"kind": "mixing-chain", "factors": len(reports), "max_violation": worst}
    if isinstance(op, MixingOperator):
        deficit = abs(float(np.sum(op.weights)) - 1.0)
        negative = max(0.0, -float(np.min(op.weights)))
        unit = 0.0
        for row in op.stacks:
            for s in row:
                eye = np.eye(s.shape[-1])
                unit = max(unit, float(np.max(np.abs(adjoint(s) @ s - eye))))
        return {"kind": "mixing", "terms": op.n_terms, "weight_deficit": deficit,
                "negative_weight": negative, "unitarity": unit,
                "max_violation": max(deficit, negative, unit)}
    if isinstance(op, EucpOperator):
        unital = 0.0
        for row in op.stacks:
            for s in row:
                tot = (adjoint(s) @ s).sum(axis=0)
                unital = max(unital, float(np.max(np.abs(tot - np.eye(s.shape[-1])))))
        return {"kind": "eucp", "terms": op.n_terms, "unitality": unital, "max_violation": unital}
    raise TypeError(f"cannot verify {type(op).__name__}")
