"""Fibered-algebra data model.

A unital C*-algebra is modeled by a finite base (samples of its Glimm
space) and, over each base point, an ordered list of matrix blocks standing
for the maximal quotients containing that Glimm ideal.  Multi-block fibers
are formal quotient data, not a C*-algebra of their own: the deciders only
read numerical ranges, traces and the base topology, which is exactly what
this data carries.

Two surrogate flags widen the model:

* ``has_trace=False`` marks a block standing for a simple quotient without
  tracial states (it still carries an ordinary matrix);
* ``is_maximal=False`` marks a trace probe, a block that contributes a
  tracial state of the fiber but is not a maximal quotient.  Probes are left
  out of numerical-range intersections.
"""

from dataclasses import dataclass, field
import warnings

import numpy as np

from .errors import DimensionOne, NotInY, NotSquareZero, ShapeMismatch
from .linalg import adjoint, as_cmat, is_square_zero, matrix_unit, operator_norm

TRACE_TOL = 1e-9
SA_TOL = 1e-10


@dataclass(frozen=True)
class Block:
    dim: int
    has_trace: bool = True
    is_maximal: bool = True

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError(f"block dimension must be positive, got {self.dim}")
        if self.dim == 1 and not self.has_trace:
            raise ValueError("a one-dimensional block always has a trace")


@dataclass(frozen=True)
class Base:
    kind: str = "discrete"
    points: int = 1
    t_min: float = 0.0
    t_max: float = 1.0

    def __post_init__(self):
        if self.kind not in ("discrete", "path"):
            raise ValueError(f"unknown base kind {self.kind!r}")
        if self.points < 1:
            raise ValueError("base needs at least one point")
        if self.kind == "path":
            if self.points < 2:
                raise ValueError("a path grid needs at least two points")
            if not self.t_max > self.t_min:
                raise ValueError("path grid needs t_max > t_min")

    @property
    def is_path(self):
        return self.kind == "path"

    @property
    def coords(self):
        if self.is_path:
            return np.linspace(self.t_min, self.t_max, self.points)
        return np.arange(self.points, dtype=float)

    @property
    def dt(self):
        if not self.is_path:
            return None
        return (self.t_max - self.t_min) / (self.points - 1)


@dataclass(frozen=True)
class FiberedAlgebra:
    base: Base
    fibers: tuple
    name: str = ""
    notes: tuple = ()

    def __post_init__(self):
        fibers = tuple(tuple(f) for f in self.fibers)
        object.__setattr__(self, "fibers", fibers)
        if len(fibers) != self.base.points:
            raise ShapeMismatch(f"{len(fibers)} fibers for {self.base.points} base points")
        for p, fib in enumerate(fibers):
            if not fib:
                raise ShapeMismatch(f"fiber {p} is empty")
            if not any(b.is_maximal for b in fib):
                raise ShapeMismatch(f"fiber {p} has no maximal block")

    @property
    def n_points(self):
        return self.base.points

    def maximal_blocks(self, p):
        return [i for i, b in enumerate(self.fibers[p]) if b.is_maximal]

    def traceful_blocks(self, p):
        return [i for i, b in enumerate(self.fibers[p]) if b.has_trace]

    def shape(self):
        return tuple(tuple(b.dim for b in fib) for fib in self.fibers)

    def has_constant_structure(self):
        return len(set(self.fibers)) == 1

    def discretized(self):
        """Same fibers over a discrete base (the path topology is dropped)."""
        return FiberedAlgebra(Base("discrete", self.n_points), self.fibers,
                              self.name + " (discrete)", self.notes)

    def restrict(self, points):
        points = list(points)
        fibers = [self.fibers[p] for p in points]
        if self.base.is_path and len(points) >= 2:
            t = self.base.coords[points]
            if not np.allclose(np.diff(t), self.base.dt):
                raise ValueError("restriction of a path grid must keep uniform spacing")
            base = Base("path", len(points), float(t[0]), float(t[-1]))
        else:
            base = Base("discrete", len(points))
        return FiberedAlgebra(base, fibers, self.name, self.notes)

    # element constructors
    def element(self, blocks):
        return Element(self, blocks)

    def zero(self):
        return Element(self, [[np.zeros((b.dim, b.dim)) for b in fib] for fib in self.fibers])

    def unit(self):
        return self.central(np.ones(self.n_points))

    def central(self, values):
        """The central element whose value at point ``p`` is ``values[p]``."""
        values = np.broadcast_to(np.asarray(values, dtype=np.complex128), (self.n_points,))
        return Element(self, [[values[p] * np.eye(b.dim) for b in fib]
                              for p, fib in enumerate(self.fibers)])

    def from_function(self, fn):
        """Element with blocks ``fn(p, t, block_index, block)``."""
        t = self.base.coords
        return Element(self, [[fn(p, t[p], i, b) for i, b in enumerate(fib)]
                              for p, fib in enumerate(self.fibers)])


class Element:
    """Per-point, per-block complex matrices; immutable."""

    __slots__ = ("algebra", "blocks")

    def __init__(self, algebra, blocks):
        if len(blocks) != algebra.n_points:
            raise ShapeMismatch(f"element has {len(blocks)} points, algebra has {algebra.n_points}")
        out = []
        for p, (fib, mats) in enumerate(zip(algebra.fibers, blocks)):
            if len(mats) != len(fib):
                raise ShapeMismatch(f"point {p}: {len(mats)} blocks given, fiber has {len(fib)}")
            row = []
            for i, (b, m) in enumerate(zip(fib, mats)):
                m = np.atleast_2d(as_cmat(np.atleast_2d(m)))
                if m.shape != (b.dim, b.dim):
                    raise ShapeMismatch(f"point {p} block {i}: shape {m.shape}, expected {(b.dim, b.dim)}")
                m.setflags(write=False)
                row.append(m)
            out.append(tuple(row))
        self.algebra = algebra
        self.blocks = tuple(out)

    def _zip(self, other):
        if other.algebra.shape() != self.algebra.shape():
            raise ShapeMismatch("elements live on differently shaped algebras")
        return zip(self.blocks, other.blocks)

    def map(self, fn):
        return Element(self.algebra, [[fn(m) for m in row] for row in self.blocks])

    def __add__(self, other):
        if isinstance(other, Element):
            return Element(self.algebra, [[x + y for x, y in zip(r1, r2)] for r1, r2 in self._zip(other)])
        return self + self.algebra.central(other)

    __radd__ = __add__

    def __neg__(self):
        return self.map(lambda m: -m)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Element):
            return Element(self.algebra, [[x @ y for x, y in zip(r1, r2)] for r1, r2 in self._zip(other)])
        return self.map(lambda m: other * m)

    def __rmul__(self, other):
        return self.map(lambda m: other * m)

    @property
    def H(self):
        return self.map(adjoint)

    def real_part(self):
        return 0.5 * (self + self.H)

    def imag_part(self):
        return (self - self.H) * (-0.5j)

    @property
    def selfadjoint(self):
        return all(np.max(np.abs(m - adjoint(m)), initial=0.0) <= SA_TOL * max(1.0, np.max(np.abs(m), initial=0.0))
                   for row in self.blocks for m in row)

    def norm(self):
        return max(operator_norm(m) for row in self.blocks for m in row)

    def block(self, p, i):
        return self.blocks[p][i]

    def allclose(self, other, atol=1e-12):
        return all(np.allclose(x, y, atol=atol, rtol=0) for r1, r2 in self._zip(other) for x, y in zip(r1, r2))

    def is_zero(self, atol=1e-12):
        return all(np.max(np.abs(m)) <= atol for row in self.blocks for m in row)

    def __repr__(self):
        name = self.algebra.name or "algebra"
        return f"Element(on {name!r}, points={len(self.blocks)})"


def central_field(algebra, values):
    """Central field as a complex array with one value per base point."""
    return np.broadcast_to(np.asarray(values, dtype=np.complex128), (algebra.n_points,)).copy()


@dataclass(frozen=True)
class IdealDesc:
    """Ideal given as the (point, block) pairs its elements vanish on."""

    zero_set: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        object.__setattr__(self, "zero_set", frozenset(self.zero_set))

    def contains(self, element, atol=1e-12):
        return all(np.max(np.abs(element.blocks[p][i])) <= atol for p, i in self.zero_set)

    def points(self):
        return sorted({p for p, _ in self.zero_set})

    def quotient_is_abelian(self, algebra):
        """True when every block the ideal kills is one-dimensional."""
        return all(algebra.fibers[p][i].dim == 1 for p, i in self.zero_set)

    def sorted_pairs(self):
        return sorted(self.zero_set)


@dataclass(frozen=True)
class Conflict:
    """Tracial states of a fiber disagree on an element."""

    values: tuple


class LscWarning(UserWarning):
    pass


def validate(algebra, element, jump=None):
    """Structural check; returns a list of warnings (never mutates).

    On path bases the norm function ``p -> min over maximal blocks of the
    block norm`` is probed for upward spikes, which no lower semicontinuous
    function can have in the continuum limit.
    """
    if element.algebra.shape() != algebra.shape():
        raise ShapeMismatch("element does not match the algebra's fiber structure")
    found = []
    if algebra.base.is_path:
        f = np.array([min(operator_norm(element.blocks[p][i]) for i in algebra.maximal_blocks(p))
                      for p in range(algebra.n_points)])
        thr = jump if jump is not None else 0.1 * max(1.0, float(np.max(f)))
        for p in range(algebra.n_points):
            nb = [f[q] for q in (p - 1, p + 1) if 0 <= q < algebra.n_points]
            if f[p] - max(nb) > thr:
                w = LscWarning(f"norm jumps up at point {p} (t={algebra.base.coords[p]:.6g}): "
                               f"{f[p]:.6g} vs neighbours {max(nb):.6g}")
                found.append(w)
    for w in found:
        warnings.warn(w, stacklevel=2)
    return found


def trace_set(algebra):
    """Per point, the indices of blocks carrying an extreme tracial state."""
    return [algebra.traceful_blocks(p) for p in range(algebra.n_points)]


def y_set(algebra):
    """Base points whose fiber has a tracial state."""
    return [p for p in range(algebra.n_points) if algebra.traceful_blocks(p)]


def x_set(algebra):
    """Points whose fiber quotient has the Dixmier property and trivial centre.

    That is: exactly one maximal block, and every trace of the fiber (if any)
    factors through it, so no trace probe sits beside it.
    """
    out = []
    for p, fib in enumerate(algebra.fibers):
        maxi = algebra.maximal_blocks(p)
        if len(maxi) != 1:
            continue
        if any(b.has_trace and not b.is_maximal for b in fib):
            continue
        out.append(p)
    return out


def block_trace(m):
    return complex(np.trace(m)) / m.shape[0]


def f_trace(element, p):
    """Common normalized trace of the element over the traceful blocks at ``p``."""
    alg = element.algebra
    idx = alg.traceful_blocks(p)
    if not idx:
        raise NotInY(f"point {p} carries no tracial state")
    vals = [block_trace(element.blocks[p][i]) for i in idx]
    distinct = []
    for v in vals:
        if all(abs(v - d) > TRACE_TOL for d in distinct):
            distinct.append(v)
    if len(distinct) > 1:
        return Conflict(tuple(_clean(v) for v in distinct))
    return vals[0]


def _clean(v):
    v = complex(v)
    return v.real if v.imag == 0 else v


def jwc(algebra):
    """Largest weakly central ideal: kill every maximal block at points with
    two or more maximal blocks."""
    zs = set()
    for p in range(algebra.n_points):
        maxi = algebra.maximal_blocks(p)
        if len(maxi) >= 2:
            zs.update((p, i) for i in maxi)
    return IdealDesc(frozenset(zs))


def jdp(algebra):
    """Largest ideal with the Dixmier property, as the intersection of I_N
    over points outside X.  I_N kills the maximal blocks of the fiber and the
    supports of the fiber's traces."""
    xs = set(x_set(algebra))
    zs = set()
    for p, fib in enumerate(algebra.fibers):
        if p in xs:
            continue
        zs.update((p, i) for i, b in enumerate(fib) if b.is_maximal or b.has_trace)
    return IdealDesc(frozenset(zs))


def lift(algebra, target, m):
    """Element equal to ``m`` at block ``target = (point, block)``, zero elsewhere."""
    p0, i0 = target
    m = as_cmat(m)
    blocks = []
    for p, fib in enumerate(algebra.fibers):
        row = []
        for i, b in enumerate(fib):
            if (p, i) == (p0, i0):
                if m.shape != (b.dim, b.dim):
                    raise ShapeMismatch(f"matrix shape {m.shape} does not fit block of dim {b.dim}")
                row.append(m)
            else:
                row.append(np.zeros((b.dim, b.dim)))
        blocks.append(row)
    return Element(algebra, blocks)


def square_zero_lift(algebra, target, m):
    """Lift of a square-zero matrix that is itself square zero."""
    if not is_square_zero(m):
        raise NotSquareZero("matrix does not square to zero")
    return lift(algebra, target, m)


def unit_square_zero_decomposition(n):
    """Pairs ``(y_j, z_j)`` of square-zero matrix units with sum_j y_j z_j = 1."""
    if n < 2:
        raise DimensionOne("the unit of M_1 is not a sum of products of square-zero elements")
    out = []
    for j in range(n):
        k = (j + 1) % n
        out.append((matrix_unit(n, j, k), matrix_unit(n, k, j)))
    return out


def self_commutator(x):
    return x.H * x - x * x.H


def is_blockwise_nilpotent(x, tol=1e-10):
    for row in x.blocks:
        for m in row:
            d = m.shape[0]
            if operator_norm(np.linalg.matrix_power(m, d)) > tol * max(1.0, operator_norm(m)) ** d:
                return False
    return True


def nilpotent_product(x, y, side="left"):
    """``x y`` (side='left') or ``y x`` (side='right') for blockwise nilpotent ``x``."""
    if x.algebra.shape() != y.algebra.shape():
        raise ShapeMismatch("elements live on differently shaped algebras")
    if not is_blockwise_nilpotent(x):
        raise ValueError("x is not blockwise nilpotent")
    if side == "left":
        return x * y
    if side == "right":
        return y * x
    raise ValueError("side must be 'left' or 'right'")


def _embed_blocks(mats, dim):
    """Block-diagonal embedding of a fiber's blocks into ``M_dim``."""
    out = np.zeros((dim, dim), dtype=np.complex128)
    pos = 0
    for m in mats:
        d = m.shape[0]
        out[pos:pos + d, pos:pos + d] = m
        pos += d
    return out


def refine_path(element):
    """The element sampled at cell midpoints too, by linear interpolation.

    Cells whose endpoints share a fiber are interpolated blockwise.  A cell
    between a one-block fiber ``M_d`` and a split fiber whose blocks fill
    ``M_d`` block-diagonally is interpolated in ``M_d`` (the interior keeps
    the unsplit fiber).  Other structure changes cannot be refined.
    """
    from .errors import UnsupportedBase

    alg = element.algebra
    if not alg.base.is_path:
        raise UnsupportedBase("refinement needs a path grid")
    n = alg.n_points
    fibers, blocks = [], []
    for p in range(n):
        fibers.append(alg.fibers[p])
        blocks.append(list(element.blocks[p]))
        if p == n - 1:
            break
        f0, f1 = alg.fibers[p], alg.fibers[p + 1]
        b0, b1 = element.blocks[p], element.blocks[p + 1]
        if f0 == f1:
            fibers.append(f0)
            blocks.append([0.5 * (x + y) for x, y in zip(b0, b1)])
            continue
        done = False
        for (fa, ba), (fb, bb) in (((f0, b0), (f1, b1)), ((f1, b1), (f0, b0))):
            if len(fa) == 1 and sum(b.dim for b in fb) == fa[0].dim:
                d = fa[0].dim
                fibers.append(fa)
                blocks.append([0.5 * (ba[0] + _embed_blocks(bb, d))])
                done = True
                break
        if not done:
            raise UnsupportedBase(f"cannot interpolate across the fiber change at point {p}")
    base = Base("path", 2 * n - 1, alg.base.t_min, alg.base.t_max)
    return Element(FiberedAlgebra(base, fibers, alg.name, alg.notes), blocks)


def matrix_algebra(n):
    """``M_n`` as a one-point, one-block algebra."""
    return FiberedAlgebra(Base("discrete", 1), [(Block(n),)], f"M_{n}")


def matrix_element(m):
    """A square matrix as an element of :func:`matrix_algebra`."""
    m = as_cmat(m)
    return Element(matrix_algebra(m.shape[0]), [[m]])


def restrict_element(element, points):
    """The element over a subset of base points (see ``FiberedAlgebra.restrict``)."""
    points = list(points)
    return Element(element.algebra.restrict(points), [element.blocks[p] for p in points])
