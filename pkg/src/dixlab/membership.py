"""Element-wise membership deciders: Mag, Mag-bar, Dix, Dix-bar, CQ.

Closure-type tests (Mag-bar, Dix-bar, CQ) are pointwise spectral conditions
and return a :class:`Decision` (a boolean with a per-point report).  Exact
membership in Mag or Dix needs a *continuous* central selection; on path
grids this is only evidenced, so those deciders return a tri-state
:class:`Verdict` and never say "no" unless the closure test already fails.
"""

from dataclasses import dataclass, field

import numpy as np

from .algebra import Conflict, f_trace, refine_path, y_set
from .convex import hausdorff
from .errors import ShapeMismatch, UnsupportedBase
from .numrange import GEOM_TOL, numerical_range
from .parallel import pmap
from .psi import point_minimax, psi
from .selection import SelectionProblem, feasible, min_max_step, min_step_selection

EMPTY_TOL = 1e-8
PIN_TOL = GEOM_TOL
SCALAR_TOL = 1e-9
SCALAR_GAP = 1e-7
DEFAULT_LIPSCHITZ = 20.0
DEFAULT_REFINE = 2


@dataclass
class Decision:
    value: bool
    per_point: list = field(default_factory=list)
    witness: object = None

    def __bool__(self):
        return bool(self.value)


@dataclass
class Verdict:
    status: str
    certificate: np.ndarray = None
    evidence: dict = field(default_factory=dict)

    @property
    def is_yes(self):
        return self.status == "yes"

    @property
    def is_no(self):
        return self.status == "no"

    @property
    def is_unknown(self):
        return self.status == "unknown"


def Yes(certificate, **evidence):
    return Verdict("yes", np.asarray(certificate, dtype=np.complex128), evidence)


def No(**evidence):
    return Verdict("no", None, evidence)


def Unknown(**evidence):
    return Verdict("unknown", None, evidence)


# ---------------------------------------------------------------------------
# closure tests


def _point_record(p):
    return {"point": p, "psi_empty": False, "f_trace": None, "conflict": None, "distance": 0.0}


def _mag_bar_record(element, p):
    rec = _point_record(p)
    _, r = point_minimax(element, p)
    rec["distance"] = float(r)
    rec["psi_empty"] = bool(r > EMPTY_TOL)
    return rec


def in_mag_bar(element):
    """Psi nonempty at every base point (closure of the Magajna set)."""
    per_point = pmap(lambda p: _mag_bar_record(element, p), range(element.algebra.n_points))
    return Decision(not any(r["psi_empty"] for r in per_point), per_point)


def _trace_pins(element):
    """f_trace on Y as a dict, plus the list of conflicting points."""
    pins, conflicts = {}, {}
    for p in y_set(element.algebra):
        v = f_trace(element, p)
        if isinstance(v, Conflict):
            conflicts[p] = v
        else:
            pins[p] = v
    return pins, conflicts


def _dix_bar_record(element, p, in_y):
    """Per-point record and whether the point satisfies the closure test."""
    rec = _mag_bar_record(element, p)
    good = not rec["psi_empty"]
    if in_y:
        v = f_trace(element, p)
        if isinstance(v, Conflict):
            rec["conflict"] = v.values
            good = False
        else:
            rec["f_trace"] = v
            region = psi(element, p)
            if region.is_empty or region.inf_dist(v) > PIN_TOL:
                good = False
    return rec, good


def in_dix_bar(element):
    """Trace condition on Y plus nonempty psi everywhere."""
    ys = set(y_set(element.algebra))
    out = pmap(lambda p: _dix_bar_record(element, p, p in ys), range(element.algebra.n_points))
    per_point = [rec for rec, _ in out]
    witness = next((rec for rec, good in out if not good), None)
    return Decision(witness is None, per_point, witness)


def in_cq(element):
    """False iff two maximal blocks of one fiber carry distinct scalars."""
    alg = element.algebra
    for p in range(alg.n_points):
        scalars = []
        for i in alg.maximal_blocks(p):
            m = element.blocks[p][i]
            lam = complex(np.trace(m)) / m.shape[0]
            if np.max(np.abs(m - lam * np.eye(m.shape[0]))) <= SCALAR_TOL:
                scalars.append((i, lam))
        for a in range(len(scalars)):
            for b in range(a + 1, len(scalars)):
                (i, l1), (j, l2) = scalars[a], scalars[b]
                if abs(l1 - l2) > SCALAR_GAP:
                    return Decision(False, [], {"point": p, "blocks": (i, j), "scalars": (l1, l2)})
    return Decision(True)


def magajna_distance(a, b):
    """Largest Hausdorff distance between block numerical ranges of a and b."""
    if a.algebra.shape() != b.algebra.shape():
        raise ShapeMismatch("elements live on differently shaped algebras")
    alg = a.algebra
    worst = 0.0
    for p in range(alg.n_points):
        for i in alg.maximal_blocks(p):
            d = hausdorff(numerical_range(a.blocks[p][i]), numerical_range(b.blocks[p][i]))
            worst = max(worst, d)
    return worst


# ---------------------------------------------------------------------------
# exact membership (selections)


def _levels(element, refine, family):
    """The element on the base grid and on ``refine`` successive halvings."""
    out = [element]
    n = element.algebra.n_points
    for j in range(1, refine + 1):
        if family is not None:
            out.append(family((n - 1) * 2 ** j + 1))
        else:
            out.append(refine_path(out[-1]))
    return out


def _selection_at(element, pins, lipschitz):
    regs = [psi(element, p) for p in range(element.algebra.n_points)]
    return feasible(SelectionProblem(element.algebra.base, regs, pins, lipschitz)), regs


def _pins_for(element, with_traces):
    if not with_traces:
        return {}
    pins, _ = _trace_pins(element)
    return pins


def _min_step_certificate(element, pins):
    regs = [psi(element, p) for p in range(element.algebra.n_points)]
    res = min_step_selection(SelectionProblem(element.algebra.base, regs, pins))
    return res.selection if res else None


def _schedule(element, lipschitz, refine, family, with_traces, trend):
    """Run the refinement schedule; Yes only if every level admits a selection."""
    try:
        levels = _levels(element, refine, family)
    except UnsupportedBase as exc:
        return Unknown(reason=f"refinement unavailable: {exc}")
    records = []
    certificate = None
    all_ok = True
    for j, el in enumerate(levels):
        if j > 0 and family is not None:
            closure = in_dix_bar(el) if with_traces else in_mag_bar(el)
            if not closure:
                return No(reason="closure condition fails on the refined grid",
                          level=j, witness=closure.witness)
        pins = _pins_for(el, with_traces)
        res, regs = _selection_at(el, pins, lipschitz)
        rec = {"points": el.algebra.n_points, "dt": el.algebra.base.dt, "feasible": bool(res)}
        if not res:
            rec["cell"] = res.cell
            all_ok = False
        elif j == 0:
            certificate = res.selection
        if trend:
            try:
                rec["min_max_step"] = min_max_step(SelectionProblem(el.algebra.base, regs, pins))
            except Exception as exc:  # empty regions on interpolated grids
                rec["min_max_step"] = None
                rec["note"] = str(exc)
        records.append(rec)
    if all_ok:
        return Yes(certificate, lipschitz=lipschitz, levels=records)
    return Unknown(reason="no selection within the Lipschitz budget on some refinement",
                   lipschitz=lipschitz, levels=records)


def in_mag(element, lipschitz=DEFAULT_LIPSCHITZ, refine=DEFAULT_REFINE, family=None, trend=True):
    """Magajna membership: Yes (with a central certificate), No, or Unknown.

    ``family`` maps a point count to the same element sampled on a finer grid;
    without it path grids are refined by linear interpolation.
    """
    bar = in_mag_bar(element)
    if not bar:
        return No(reason="psi is empty at some point", report=bar)
    alg = element.algebra
    if element.selfadjoint:
        cert = _min_step_certificate(element, {})
        return Yes(cert, route="selfadjoint: envelopes [h, g] admit a continuous selection")
    if not alg.base.is_path:
        return Yes(_min_step_certificate(element, {}), route="discrete base: pointwise choice")
    v = _schedule(element, lipschitz, refine, family, False, trend)
    v.evidence.setdefault("route", "selection schedule")
    return v


def _singleton_off_y(alg):
    ys = set(y_set(alg))
    return all(len(alg.maximal_blocks(p)) == 1 for p in range(alg.n_points) if p not in ys)


def in_dix(element, lipschitz=DEFAULT_LIPSCHITZ, refine=DEFAULT_REFINE, family=None, trend=True):
    """Dixmier membership: Yes (certificate pinned to the trace on Y), No, or Unknown."""
    alg = element.algebra
    if not y_set(alg):
        v = in_mag(element, lipschitz, refine, family, trend)
        v.evidence["route"] = "no tracial states: same as Magajna membership"
        return v
    bar = in_dix_bar(element)
    if not bar:
        return No(reason="trace or spectral condition fails", report=bar)
    pins, _ = _trace_pins(element)
    if element.selfadjoint:
        return Yes(_min_step_certificate(element, pins),
                   route="selfadjoint: closure condition is exact")
    if _singleton_off_y(alg):
        return Yes(_min_step_certificate(element, pins),
                   route="one maximal quotient at every point off Y")
    if not alg.base.is_path:
        return Yes(_min_step_certificate(element, pins), route="discrete base: pointwise choice")
    v = _schedule(element, lipschitz, refine, family, True, trend)
    v.evidence.setdefault("route", "pinned selection schedule")
    return v


def validate_certificate(element, certificate, dix=False, tol=PIN_TOL):
    """Check a central certificate: values in psi, and trace pins on Y for Dix.

    Returns ``(ok, worst_violation)``.
    """
    cert = np.asarray(certificate, dtype=np.complex128)
    alg = element.algebra
    if cert.shape != (alg.n_points,):
        return False, float("inf")
    worst = 0.0
    for p in range(alg.n_points):
        region = psi(element, p)
        if region.is_empty:
            return False, float("inf")
        worst = max(worst, region.inf_dist(cert[p]))
    if dix:
        for p in y_set(alg):
            v = f_trace(element, p)
            if isinstance(v, Conflict):
                return False, float("inf")
            worst = max(worst, abs(cert[p] - v))
    return worst <= tol, worst
