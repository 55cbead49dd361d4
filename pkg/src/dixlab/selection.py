"""Lipschitz selections of convex-valued maps on grid bases.

On a path grid a selection ``s`` must satisfy ``|s[i+1] - s[i]| <= L * dt``.
Forward propagation of reachable sets decides existence exactly for that
class: ``R[0] = F[0]`` and ``R[i+1] = F[i+1] ∩ (R[i] + step disk)``.  Every
``R[i]`` is convex, and a selection exists iff none of them is empty.  It is
read off backwards by nearest-point projection.
"""

from dataclasses import dataclass, field

import numpy as np

from .convex import ConvexRegion, center_minimax, intersect
from .errors import BadPin, InfeasibleAtAnyStep
from .numrange import GEOM_TOL
from .psi import block_ranges

PIN_TOL = GEOM_TOL
STEP_TOL = 1e-6


@dataclass
class SelectionProblem:
    """Per-point regions over a base, optional pins, optional step budget.

    ``lipschitz`` is the Lipschitz constant L of the sought selection; the
    step bound between grid neighbours is ``L * base.dt``.
    """

    base: object
    regions: list
    pins: dict = field(default_factory=dict)
    lipschitz: float = None

    def __post_init__(self):
        self.regions = list(self.regions)
        if len(self.regions) != self.base.points:
            raise ValueError(f"{len(self.regions)} regions for {self.base.points} points")
        for p in self.pins:
            if not 0 <= p < self.base.points:
                raise ValueError(f"pin at unknown point {p}")
        if self.lipschitz is not None and self.lipschitz <= 0:
            raise ValueError("Lipschitz budget must be positive")

    def step_bound(self):
        if not self.base.is_path or self.lipschitz is None:
            return None
        return self.lipschitz * self.base.dt


@dataclass
class Feasible:
    selection: np.ndarray

    def __bool__(self):
        return True


@dataclass
class Infeasible:
    cell: int
    reason: str = ""

    def __bool__(self):
        return False


def _pinned(region, pin, p):
    """Restrict ``region`` to the pinned value, or raise if the pin is outside."""
    if region.is_empty or region.inf_dist(pin) > PIN_TOL:
        raise BadPin(f"pin {pin} at point {p} lies outside its region")
    return ConvexRegion.point(pin, region.k)


def _start_regions(problem):
    out = []
    for p, reg in enumerate(problem.regions):
        if p in problem.pins:
            reg = _pinned(reg, complex(problem.pins[p]), p)
        out.append(reg)
    return out


def _propagate(regs, pins, step):
    """Forward reachable sets under a step bound; returns (sets, failing index)."""
    reach = [regs[0]]
    if regs[0].is_empty:
        return reach, 0
    for i in range(1, len(regs)):
        prev = reach[-1].fatten(step, inscribed=True)
        if i in pins:
            pin = complex(pins[i])
            # a pinned point is reachable iff it lies in the fattened set
            nxt = regs[i] if prev.inf_dist(pin) <= PIN_TOL else ConvexRegion.empty()
        else:
            nxt = intersect([regs[i], prev])
        reach.append(nxt)
        if nxt.is_empty:
            return reach, i
    return reach, None


def _extract(reach, pins):
    n = len(reach)
    sel = np.empty(n, dtype=np.complex128)
    last = reach[-1]
    sel[-1] = complex(pins[n - 1]) if (n - 1) in pins else last.centroid()
    for i in range(n - 2, -1, -1):
        sel[i] = complex(pins[i]) if i in pins else reach[i].project(sel[i + 1])
    return sel


def feasible(problem):
    """Decide whether a selection exists; return it or the failing cell."""
    regs = _start_regions(problem)
    step = problem.step_bound()
    if step is None:
        # pointwise: any choice works
        for p, r in enumerate(regs):
            if r.is_empty:
                return Infeasible(p, "empty region")
        return Feasible(np.array([complex(problem.pins[p]) if p in problem.pins else r.centroid()
                                  for p, r in enumerate(regs)]))
    reach, bad = _propagate(regs, problem.pins, step)
    if bad is not None:
        if bad == 0 or problem.regions[bad].is_empty:
            return Infeasible(bad, "empty region")
        return Infeasible(bad, f"no value within step {step:.6g} of the reachable set at point {bad - 1}")
    return Feasible(_extract(reach, problem.pins))


def _span(regs):
    """Diameter of the union of the regions (bounding-box diagonal)."""
    lo_x = min(-r.support[len(r.support) // 2] for r in regs)
    hi_x = max(r.support[0] for r in regs)
    q = len(regs[0].support) // 4
    lo_y = min(-r.support[3 * q] for r in regs)
    hi_y = max(r.support[q] for r in regs)
    return float(np.hypot(hi_x - lo_x, hi_y - lo_y))


def min_max_step(problem, rel_tol=STEP_TOL, max_iter=60):
    """Smallest step bound for which a selection exists (path grids only).

    Bisection on the step; the bracket is closed once its width is below
    ``rel_tol`` times the diameter of the union of the regions.  Returns the
    feasible end of the bracket.
    """
    if not problem.base.is_path:
        raise ValueError("min_max_step needs a path grid")
    regs = _start_regions(problem)
    for p, r in enumerate(regs):
        if r.is_empty:
            raise InfeasibleAtAnyStep(f"region at point {p} is empty")
    diam = _span(regs)
    if diam == 0.0:
        return 0.0
    _, bad = _propagate(regs, problem.pins, 0.0)
    if bad is None:
        return 0.0
    lo, hi = 0.0, diam * (1 + 1e-9) + 1e-12
    tol = rel_tol * diam
    for _ in range(max_iter):
        if hi - lo <= tol:
            break
        mid = 0.5 * (lo + hi)
        if _propagate(regs, problem.pins, mid)[1] is None:
            hi = mid
        else:
            lo = mid
    return hi


def min_step_selection(problem):
    """Selection realizing (up to bisection tolerance) the smallest step bound."""
    if not problem.base.is_path:
        return feasible(problem)
    step = min_max_step(problem)
    regs = _start_regions(problem)
    reach, bad = _propagate(regs, problem.pins, step)
    if bad is not None:
        return Infeasible(bad, "bisection endpoint not reproducible")
    return Feasible(_extract(reach, problem.pins))


# ---------------------------------------------------------------------------
# distance to the centre


def _fattened_feasible(ranges, delta, step):
    regs = [intersect([w.fatten(delta) for w in ws]) for ws in ranges]
    if step is None:
        return all(not r.is_empty for r in regs)
    if any(r.is_empty for r in regs):
        return False
    return _propagate(regs, {}, step)[1] is None


def dist_to_center(element, lipschitz=20.0, method="auto", rel_tol=1e-9):
    """Distance from the element's Magajna set to the centre.

    ``direct`` takes the worst per-point minimax radius of the block ranges
    (exact when continuity costs nothing, e.g. on discrete bases).
    ``bisection`` searches the smallest fattening radius for which the
    fattened maps admit a selection with Lipschitz budget ``lipschitz``.
    ``auto`` picks ``direct`` on discrete bases and ``bisection`` on paths.
    """
    alg = element.algebra
    ranges = [block_ranges(element, p) for p in range(alg.n_points)]
    radii = [center_minimax(ws)[1] for ws in ranges]
    direct = max(radii)
    if method == "auto":
        method = "bisection" if alg.base.is_path else "direct"
    if method == "direct":
        return float(direct)
    if method != "bisection":
        raise ValueError(f"unknown method {method!r}")

    k = ranges[0][0].k
    shrink = np.cos(np.pi / k) ** 2
    if alg.base.is_path:
        step = lipschitz * alg.base.dt
        active = ranges
    else:
        # points are independent; only those near the worst radius can bind
        step = None
        active = [ws for ws, r in zip(ranges, radii) if r >= direct * shrink]
    if _fattened_feasible(active, direct, step):
        # the polygon touching radius sits slightly below the Euclidean one
        hi = direct
        lo = direct * shrink - 1e-12
        if lo <= 0 or _fattened_feasible(active, lo, step):
            lo = 0.0
    else:
        # a constant selection becomes feasible once every range is within reach
        lo = direct
        z0 = complex(np.mean([w.centroid() for ws in ranges for w in ws]))
        hi = max(w.inf_dist(z0) for ws in ranges for w in ws) * (1 + 1e-9) + 1e-12
        hi = max(hi, lo)
    tol = rel_tol * max(1.0, hi)
    for _ in range(200):
        if hi - lo <= tol:
            break
        mid = 0.5 * (lo + hi)
        if _fattened_feasible(active, mid, step):
            hi = mid
        else:
            lo = mid
    return float(hi)
