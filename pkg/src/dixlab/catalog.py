"""Worked fixtures and seeded random algebras/elements."""

from dataclasses import dataclass, field

import numpy as np

from .algebra import Base, Block, Element, FiberedAlgebra
from .errors import BadParams, UnknownFixture
from .linalg import matrix_unit

FIXTURES = ("FIX-A", "FIX-B", "FIX-C", "FIX-D", "FIX-E")
DEFAULT_POINTS = {"FIX-A": 21, "FIX-B": 41, "FIX-C": 41, "FIX-E": 41}


@dataclass
class Fixture:
    name: str
    algebra: FiberedAlgebra
    elements: dict
    metadata: dict = field(default_factory=dict)
    family: object = None  # points -> Fixture at another resolution

    def __getitem__(self, key):
        return self.elements[key]

    def element_family(self, key):
        """Callable ``points -> Element`` for refinement schedules."""
        if self.family is None:
            return None
        return lambda points: self.family(points).elements[key]


def ambient_element(algebra, fn):
    """Element whose blocks are diagonal compressions of ``fn(t)``.

    ``fn(t)`` returns a square matrix at least as large as the biggest fiber;
    the blocks of each fiber take consecutive diagonal positions starting at
    the top-left corner.  Smooth ``fn`` gives continuous element fields, also
    across points where the fiber splits.
    """
    t = algebra.base.coords
    blocks = []
    for p, fib in enumerate(algebra.fibers):
        m = np.asarray(fn(t[p]), dtype=np.complex128)
        row, pos = [], 0
        for b in fib:
            row.append(m[pos:pos + b.dim, pos:pos + b.dim])
            pos += b.dim
        blocks.append(row)
    return Element(algebra, blocks)


def ambient_dim(algebra):
    return max(sum(b.dim for b in fib) for fib in algebra.fibers)


# ---------------------------------------------------------------------------
# the five fixtures


def _fix_a(points):
    base = Base("path", points, 0.0, 1.0)
    fibers = [(Block(3),)] * (points - 1) + [(Block(2), Block(1))]
    alg = FiberedAlgebra(base, fibers, "FIX-A")
    els = {}
    for i, j in ((0, 0), (0, 1), (1, 0), (1, 1), (2, 2)):
        e = matrix_unit(3, i, j)
        els[f"e{i + 1}{j + 1}"] = ambient_element(alg, lambda t, e=e: e)
    els["unit"] = alg.unit()
    meta = {"base": "interval [0,1]",
            "fibers": "M_3 for t<1; M_2 + C at t=1",
            "surrogates": []}
    return Fixture("FIX-A", alg, els, meta, _fix_a)


def fix_a_element(algebra, lam, mu, r=None):
    """Element of FIX-A with ``a(t) = diag(lam, mu) + (1 - t) r``.

    ``lam`` is the 2x2 corner and ``mu`` the scalar corner of the value at
    t = 1; ``r`` (3x3, default 0) is the perturbation away from t = 1.
    """
    d = np.zeros((3, 3), dtype=np.complex128)
    d[:2, :2] = lam
    d[2, 2] = mu
    r = np.zeros((3, 3)) if r is None else np.asarray(r, dtype=np.complex128)
    return ambient_element(algebra, lambda t: d + (1.0 - t) * r)


def fix_a_random_family(rng, scale_r=0.5):
    """Random ``(lam, mu, r)`` with mu sometimes inside, sometimes outside W(lam)."""
    lam = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    mu = complex(rng.normal(scale=1.2), rng.normal(scale=1.2))
    r = scale_r * (rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3)))
    return lam, mu, r


def alpha_beta(t):
    """Endpoints of the rotating segment: pinned at -1 for t<=0, at 1 for t>=0."""
    if t <= 0:
        return -1.0 + 0j, -1.0 + 2.0 * np.exp(1j * (np.pi / 2) * (-t))
    return 1.0 + 2.0 * np.exp(1j * (np.pi / 2) * (2.0 - t)), 1.0 + 0j


def _rotating_pair(name, points, second, has_trace):
    base = Base("path", points, -1.0, 1.0)
    fib = (Block(2, has_trace=has_trace), Block(2, has_trace=has_trace))
    alg = FiberedAlgebra(base, [fib] * points, name)

    def block(p, t, i, b):
        if i == 0:
            a, bb = alpha_beta(t)
            return np.diag([a, bb])
        return second

    c = alg.from_function(block)
    return alg, {"c": c, "unit": alg.unit()}


def _fix_b(points):
    alg, els = _rotating_pair("FIX-B", points, np.diag([1.0, -1.0]), True)
    meta = {"base": "interval [-1,1]",
            "fibers": "two M_2 blocks everywhere",
            "parametrization": "alpha=-1, beta=-1+2exp(i(pi/2)(-t)) on [-1,0]; "
                               "alpha=1+2exp(i(pi/2)(2-t)), beta=1 on [0,1]",
            "surrogates": ["both blocks are formal quotient data over one base point"]}
    return Fixture("FIX-B", alg, els, meta, _fix_b)


def _fix_c(points, epsilon):
    second = np.array([[1.0, epsilon], [0.0, -1.0]])
    alg, els = _rotating_pair(f"FIX-C({epsilon:g})", points, second, True)
    els["c_eps"] = els["c"]
    meta = {"base": "interval [-1,1]",
            "fibers": "two M_2 blocks everywhere",
            "epsilon": epsilon,
            "second block range": f"elliptical disk, foci -1 and 1, minor axis {epsilon:g}",
            "surrogates": ["both blocks are formal quotient data over one base point"]}
    return Fixture("FIX-C", alg, els, meta, lambda n: _fix_c(n, epsilon))


def _fix_d(points=1):
    base = Base("discrete", 1)
    alg = FiberedAlgebra(base, [(Block(2, has_trace=False), Block(1, is_maximal=False))], "FIX-D")
    els = {}
    for i in range(2):
        for j in range(2):
            els[f"e{i + 1}{j + 1}"] = Element(alg, [[matrix_unit(2, i, j), np.zeros((1, 1))]])
    els["probe"] = Element(alg, [[np.zeros((2, 2)), np.ones((1, 1))]])
    els["unit"] = alg.unit()
    meta = {"base": "one point",
            "fibers": "traceless maximal M_2 block + trace probe",
            "surrogates": ["block 0: simple quotient without tracial states (matrix stand-in)",
                           "block 1: faithful trace not factoring through the maximal quotient"]}
    return Fixture("FIX-D", alg, els, meta, None)


def _fix_e(points):
    alg, els = _rotating_pair("FIX-E", points, np.diag([1.0, -1.0]), False)
    meta = {"base": "interval [-1,1]",
            "fibers": "two traceless M_2 blocks everywhere",
            "surrogates": ["both blocks: simple quotients without tracial states (matrix stand-ins)"]}
    return Fixture("FIX-E", alg, els, meta, _fix_e)


def fixture(name, points=None, epsilon=0.5):
    """Build a named fixture; ``FIX-C(0.25)`` style names set epsilon."""
    key = name.strip().upper()
    if key.startswith("FIX-C(") and key.endswith(")"):
        epsilon = float(key[6:-1])
        key = "FIX-C"
    if key not in FIXTURES:
        raise UnknownFixture(name)
    if points is None:
        points = DEFAULT_POINTS.get(key, 1)
    if key == "FIX-A":
        return _fix_a(points)
    if key == "FIX-B":
        return _fix_b(points)
    if key == "FIX-C":
        return _fix_c(points, epsilon)
    if key == "FIX-D":
        return _fix_d()
    return _fix_e(points)


# ---------------------------------------------------------------------------
# random generators

RANDOM_DEFAULTS = {"kind": "discrete", "points": 4, "max_blocks": 3, "max_dim": 4,
                   "traceless_prob": 0.2, "probe_prob": 0.15}


def random_algebra(seed, params=None):
    """Seeded random algebra; path bases get the same fiber at every point."""
    prm = dict(RANDOM_DEFAULTS)
    prm.update(params or {})
    unknown = set(prm) - set(RANDOM_DEFAULTS)
    if unknown:
        raise BadParams(f"unknown parameters {sorted(unknown)}")
    if not 1 <= prm["max_dim"] <= 6:
        raise BadParams("max_dim must be in 1..6")
    if not 1 <= prm["max_blocks"] <= 3:
        raise BadParams("max_blocks must be in 1..3")
    if not 1 <= prm["points"] <= 40:
        raise BadParams("points must be in 1..40")
    if prm["kind"] not in ("discrete", "path"):
        raise BadParams("kind must be 'discrete' or 'path'")
    if prm["kind"] == "path" and prm["points"] < 2:
        raise BadParams("a path base needs at least two points")
    rng = np.random.default_rng(seed)

    def one_fiber():
        nb = int(rng.integers(1, prm["max_blocks"] + 1))
        fib = []
        for _ in range(nb):
            d = int(rng.integers(1, prm["max_dim"] + 1))
            tr = True if d == 1 else bool(rng.random() >= prm["traceless_prob"])
            fib.append(Block(d, tr, True))
        # a one-dimensional probe would be a character with a maximal kernel
        if prm["max_dim"] >= 2 and rng.random() < prm["probe_prob"]:
            fib.append(Block(int(rng.integers(2, prm["max_dim"] + 1)), True, False))
        return tuple(fib)

    if prm["kind"] == "path":
        base = Base("path", prm["points"], 0.0, 1.0)
        fibers = [one_fiber()] * prm["points"]
    else:
        base = Base("discrete", prm["points"])
        fibers = [one_fiber() for _ in range(prm["points"])]
    return FiberedAlgebra(base, fibers, f"random-{seed}")


ELEMENT_FLAGS = {"selfadjoint", "square_zero", "trace_zero"}


def random_element(seed, algebra, flags=(), scale=1.0):
    """Seeded random element, smooth in t on path bases.

    Flags: ``selfadjoint``, ``square_zero`` (every block squares to zero),
    ``trace_zero`` (every block has trace zero).
    """
    flags = set(flags)
    if flags - ELEMENT_FLAGS:
        raise BadParams(f"unknown flags {sorted(flags - ELEMENT_FLAGS)}")
    if {"selfadjoint", "square_zero"} <= flags:
        raise BadParams("a selfadjoint square-zero element is zero; pick one flag")
    rng = np.random.default_rng(seed)
    dim = ambient_dim(algebra)
    t0 = algebra.base.coords[0]
    span = max(algebra.base.coords[-1] - t0, 1.0)

    def cgauss(*shape):
        return (rng.normal(size=shape) + 1j * rng.normal(size=shape)) / np.sqrt(2)

    if "square_zero" in flags:
        # rank-one u v* with v orthogonal to u, inside the leading block
        d0 = min(fib[0].dim for fib in algebra.fibers)
        u0, u1, v0, v1 = (cgauss(d0) for _ in range(4))

        def fn(t):
            s = (t - t0) / span
            u = u0 + s * u1
            v = v0 + s * v1
            if d0 > 1:
                v = v - u * (np.vdot(u, v) / np.vdot(u, u))
            else:
                v = 0 * v
            m = np.zeros((dim, dim), dtype=np.complex128)
            m[:d0, :d0] = scale * np.outer(u, v.conj())
            return m
    else:
        a0, a1 = cgauss(dim, dim), cgauss(dim, dim)

        def fn(t):
            return scale * (a0 + ((t - t0) / span) * a1)

    el = ambient_element(algebra, fn)
    if "selfadjoint" in flags:
        el = el.real_part()
    if "trace_zero" in flags:
        el = el.map(lambda m: m - (np.trace(m) / m.shape[0]) * np.eye(m.shape[0]))
    return el
