"""Whole-algebra checkers: closure equivalences and span identities."""

import numpy as np

from .algebra import (Element, Conflict, f_trace, jdp, jwc, lift, unit_square_zero_decomposition,
                      x_set, y_set)
from .catalog import random_element
from .errors import UnsupportedBase
from .linalg import hermitian_eigvals, matrix_unit
from .membership import in_cq, in_dix, in_dix_bar, in_mag, in_mag_bar, validate_certificate

__all__ = ["check_magclosed", "check_dixadd", "check_dixmult", "span_identities",
           "ideal_report", "in_center_plus_ideal", "spread_lift", "x_set"]

RANK_TOL = 1e-8


def _offset(fiber, i):
    return sum(b.dim for b in fiber[:i])


def spread_lift(algebra, target, m):
    """Lift of ``m`` from block ``target = (p, i)`` that is continuous where possible.

    On discrete bases this is the plain lift.  On path bases the matrix is
    carried to every point with the same fiber, and into one-block fibers
    that contain fiber ``p`` block-diagonally (at block ``i``'s position);
    other points get zero.  Square-zero and matrix-unit structure survive.
    """
    if not algebra.base.is_path:
        return lift(algebra, target, m)
    p0, i0 = target
    fib0 = algebra.fibers[p0]
    total = sum(b.dim for b in fib0)
    off = _offset(fib0, i0)
    d = m.shape[0]
    blocks = []
    for fib in algebra.fibers:
        row = [np.zeros((b.dim, b.dim), dtype=np.complex128) for b in fib]
        if fib == fib0:
            row[i0] = np.asarray(m, dtype=np.complex128)
        elif len(fib) == 1 and fib[0].dim == total:
            big = np.zeros((total, total), dtype=np.complex128)
            big[off:off + d, off:off + d] = m
            row[0] = big
        blocks.append(row)
    return Element(algebra, blocks)


def in_center_plus_ideal(element, ideal, tol=1e-9):
    """Whether the element is central modulo the ideal (given by its zero set)."""
    by_point = {}
    for p, i in ideal.zero_set:
        by_point.setdefault(p, []).append(i)
    for p, idx in by_point.items():
        vals = []
        for i in idx:
            m = element.blocks[p][i]
            lam = complex(np.trace(m)) / m.shape[0]
            if np.max(np.abs(m - lam * np.eye(m.shape[0]))) > tol:
                return False
            vals.append(lam)
        if max(abs(v - vals[0]) for v in vals) > tol:
            return False
    return True


def ideal_report(algebra):
    w, d = jwc(algebra), jdp(algebra)
    return {"x_set": x_set(algebra), "y_set": y_set(algebra),
            "jwc_zero_set": [list(q) for q in w.sorted_pairs()],
            "jdp_zero_set": [list(q) for q in d.sorted_pairs()],
            "jwc_quotient_abelian": w.quotient_is_abelian(algebra),
            "jdp_quotient_abelian": d.quotient_is_abelian(algebra),
            "jwc_equals_jdp": w.zero_set == d.zero_set}


# ---------------------------------------------------------------------------
# closure under addition of Mag


def _magclosed_witness(algebra):
    """Square-zero unit decomposition at a nonabelian block, lifted to vanish
    at a companion maximal block: summands have 0 in psi, their sum is not CQ."""
    for p in range(algebra.n_points):
        maxi = algebra.maximal_blocks(p)
        if len(maxi) < 2:
            continue
        for i in maxi:
            d = algebra.fibers[p][i].dim
            if d < 2:
                continue
            companion = next(j for j in maxi if j != i)
            summands = []
            for y, z in unit_square_zero_decomposition(d):
                ly = spread_lift(algebra, (p, i), y)
                lz = spread_lift(algebra, (p, i), z)
                summands.append(ly * lz)
            total = summands[0]
            for s in summands[1:]:
                total = total + s
            zero = np.zeros(algebra.n_points)
            checks = []
            for s in summands:
                ok, worst = validate_certificate(s, zero)
                checks.append({"in_mag_bar": bool(in_mag_bar(s)), "certificate_zero_ok": bool(ok),
                               "certificate_violation": float(worst)})
            cq = in_cq(total)
            valid = all(c["in_mag_bar"] and c["certificate_zero_ok"] for c in checks) and not cq
            return {"point": p, "block": i, "companion": companion, "summands": summands,
                    "sum": total, "summand_checks": checks, "sum_in_cq": bool(cq),
                    "cq_witness": cq.witness, "validated": bool(valid)}
    return None


def check_magclosed(algebra):
    """Equivalent closure properties of Mag, all decided by abelianness of A/J_wc."""
    ab = jwc(algebra).quotient_is_abelian(algebra)
    report = {"abelian_quotient_jwc": ab,
              "conditions": {c: ab for c in ("i", "ii", "iii", "iv", "v", "vi")},
              "mag_equals_mag_bar": True if ab else None,
              "witness": None}
    if not ab:
        report["witness"] = _magclosed_witness(algebra)
    return report


# ---------------------------------------------------------------------------
# closure under addition of Dix


def _dixadd_witness(algebra, p, i):
    """Unit of a traceless maximal block at a point of Y, split into two lifts."""
    d = algebra.fibers[p][i].dim
    first = spread_lift(algebra, (p, i), matrix_unit(d, 0, 0))
    rest = spread_lift(algebra, (p, i), np.diag([0.0] + [1.0] * (d - 1)))
    total = first + rest
    va, vb, vs = in_dix(first, trend=False), in_dix(rest, trend=False), in_dix(total, trend=False)
    zero = np.zeros(algebra.n_points)
    cert_a = validate_certificate(first, zero, dix=True)[0]
    cert_b = validate_certificate(rest, zero, dix=True)[0]
    pin = f_trace(total, p)
    return {"point": p, "block": i, "a": first, "b": rest, "sum": total,
            "in_dix_a": va.status, "in_dix_b": vb.status, "in_dix_sum": vs.status,
            "certificate_zero_a": bool(cert_a), "certificate_zero_b": bool(cert_b),
            "trace_pin_of_sum": None if isinstance(pin, Conflict) else pin,
            "validated": va.is_yes and vb.is_yes and vs.is_no and cert_a and cert_b}


def check_dixadd(algebra):
    """(a) every maximal block over a point of Y has a trace; (b) off Y there
    is a single maximal block.  Together they make Dix closed under addition."""
    ys = set(y_set(algebra))
    fail_a = [(p, i) for p in sorted(ys) for i in algebra.maximal_blocks(p)
              if not algebra.fibers[p][i].has_trace]
    fail_b = [p for p in range(algebra.n_points)
              if p not in ys and len(algebra.maximal_blocks(p)) != 1]
    report = {"a": not fail_a, "b": not fail_b, "holds": not fail_a and not fail_b,
              "a_failures": [list(q) for q in fail_a], "b_failures": fail_b, "witness": None}
    if fail_a:
        report["witness"] = _dixadd_witness(algebra, *fail_a[0])
    return report


# ---------------------------------------------------------------------------
# closure under multiplication of Dix


def _closure_fails(element):
    if y_set(element.algebra):
        return not in_dix_bar(element)
    return not in_mag_bar(element)


def _witness_candidates(algebra):
    """Pairs ``(x, y)`` of Dix candidates whose product may leave Dix.

    Pattern one: matrix units ``E12``, ``E21`` at a nonabelian block killed
    by J_dp.  Pattern two, for two nonabelian maximal blocks over one point:
    ``x = (2 E12 + 1) + (2 E12 - 1)`` and ``y = (2 E21 + 1) + (1 - 2 E21)``,
    whose product has disjoint numerical ranges in the two blocks.
    Pattern three, for a point where another block carries a trace: ``E11``
    and ``E22`` at the block with the identity on every other block, so both
    traces are 1 while the product vanishes on the block.
    """
    seen = set()
    for p, i in jdp(algebra).sorted_pairs():
        fib = algebra.fibers[p]
        key = (fib, i) if algebra.base.is_path else (p, i)
        d = fib[i].dim
        if d < 2 or key in seen:
            continue
        seen.add(key)
        yield p, (i,), (spread_lift(algebra, (p, i), matrix_unit(d, 0, 1)),
                        spread_lift(algebra, (p, i), matrix_unit(d, 1, 0)))
        for j in algebra.maximal_blocks(p):
            e = fib[j].dim
            if j <= i or e < 2 or not fib[i].is_maximal:
                continue
            x = (spread_lift(algebra, (p, i), 2 * matrix_unit(d, 0, 1) + np.eye(d))
                 + spread_lift(algebra, (p, j), 2 * matrix_unit(e, 0, 1) - np.eye(e)))
            y = (spread_lift(algebra, (p, i), 2 * matrix_unit(d, 1, 0) + np.eye(d))
                 + spread_lift(algebra, (p, j), np.eye(e) - 2 * matrix_unit(e, 1, 0)))
            yield p, (i, j), (x, y)
        traced = [q for q, b in enumerate(fib) if q != i and b.has_trace]
        if traced and fib[i].is_maximal:
            rest = [q for q in range(len(fib)) if q != i]
            x = spread_lift(algebra, (p, i), matrix_unit(d, 0, 0))
            y = spread_lift(algebra, (p, i), matrix_unit(d, 1, 1))
            for q in rest:
                one = spread_lift(algebra, (p, q), np.eye(fib[q].dim))
                x, y = x + one, y + one
            yield p, (i,) + tuple(rest), (x, y)


def _dixmult_witness(algebra):
    """Two Dix members whose product leaves Dix."""
    for p, blocks, (x, y) in _witness_candidates(algebra):
        prod = x * y
        if not _closure_fails(prod):
            continue
        vx, vy = in_dix(x, trend=False), in_dix(y, trend=False)
        if not (vx.is_yes and vy.is_yes):
            continue
        vp = in_dix(prod, trend=False)
        if vp.is_no:
            return {"point": p, "blocks": list(blocks), "x": x, "y": y, "product": prod,
                    "in_dix_x": vx.status, "in_dix_y": vy.status, "in_dix_product": vp.status,
                    "product_reason": vp.evidence.get("reason"), "validated": True}
    return None


def check_dixmult(algebra, samples=8, seed=0):
    """Abelianness of A/J_dp; when it holds, Dix, Mag and Z + J_dp are
    spot-checked to agree on random elements."""
    ideal = jdp(algebra)
    ab = ideal.quotient_is_abelian(algebra)
    report = {"abelian_quotient_jdp": ab, "witness": None, "spot_checks": []}
    if not ab:
        report["witness"] = _dixmult_witness(algebra)
        return report
    agree = True
    rng = np.random.default_rng(seed)
    for k in range(samples):
        el = random_element(seed + k, algebra)
        if k % 2:
            # push half the samples into Z + J_dp
            el = _central_mod(el, ideal, rng)
        vd = in_dix(el, trend=False).status
        vm = in_mag(el, trend=False).status
        zj = in_center_plus_ideal(el, ideal)
        decided = [v for v in (vd, vm) if v != "unknown"]
        ok = all((v == "yes") == zj for v in decided)
        agree &= ok
        report["spot_checks"].append({"sample": k, "dix": vd, "mag": vm,
                                      "center_plus_jdp": zj, "agree": ok})
    report["equalities_hold"] = agree
    report["jdp_equals_jwc"] = ideal.zero_set == jwc(algebra).zero_set
    return report


def _central_mod(element, ideal, rng):
    """Overwrite the blocks in the ideal's zero set by a per-point scalar."""
    blocks = [list(row) for row in element.blocks]
    lam = rng.normal(size=element.algebra.n_points) + 1j * rng.normal(size=element.algebra.n_points)
    for p, i in ideal.zero_set:
        d = blocks[p][i].shape[0]
        blocks[p][i] = lam[p] * np.eye(d)
    return Element(element.algebra, blocks)


# ---------------------------------------------------------------------------
# span identities


def _flatten(element):
    parts = [m.ravel() for row in element.blocks for m in row]
    v = np.concatenate(parts)
    return np.concatenate([v.real, v.imag])


def _coords(algebra):
    """Real coordinate slots: ``(p, i, r, c, part)`` in flatten order."""
    return sum(b.dim ** 2 for fib in algebra.fibers for b in fib)


def _rank(vectors, tol=RANK_TOL):
    if not len(vectors):
        return 0
    v = np.array(vectors, dtype=float)
    norms = np.linalg.norm(v, axis=1)
    v = v[norms > 0] / norms[norms > 0, None]
    if not len(v):
        return 0
    g = v @ v.T if v.shape[0] <= v.shape[1] else v.T @ v
    w = hermitian_eigvals(g)
    return int(np.sum(w > tol * max(w[-1], 1.0)))


def _central_generators(algebra):
    out = []
    for p in range(algebra.n_points):
        vals = np.zeros(algebra.n_points, dtype=np.complex128)
        vals[p] = 1.0
        c = algebra.central(vals)
        out += [c, 1j * c]
    return out


def _block_generators(algebra, want):
    """Per-block matrix families, complexified.

    ``want`` selects: ``full`` (all matrix units), ``trace_zero`` (off-diagonal
    units and diagonal differences).
    """
    out = []
    for p, fib in enumerate(algebra.fibers):
        for i, b in enumerate(fib):
            kind = want(b)
            if kind is None:
                continue
            d = b.dim
            mats = [matrix_unit(d, r, c) for r in range(d) for c in range(d) if r != c]
            if kind == "full":
                mats += [matrix_unit(d, r, r) for r in range(d)]
            else:
                mats += [matrix_unit(d, r, r) - matrix_unit(d, r + 1, r + 1) for r in range(d - 1)]
            for m in mats:
                e = lift(algebra, (p, i), m)
                out += [e, 1j * e]
    return out


def _member_candidates(algebra, seed):
    """Elements from the classes with 0 in their averaging sets, plus extras."""
    out = []
    rng = np.random.default_rng(seed)
    for p, fib in enumerate(algebra.fibers):
        for i, b in enumerate(fib):
            d = b.dim
            for r in range(d):
                for c in range(d):
                    e = lift(algebra, (p, i), matrix_unit(d, r, c))
                    out += [e, 1j * e]
                    if r != c:
                        # square-zero x, self-commutator [x*, x], product x x*
                        out.append(e.H * e - e * e.H)
                        out.append(e * e.H)
            if d >= 2:
                x = lift(algebra, (p, i), rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d)))
                out.append(x.H * x - x * x.H)
    out += _central_generators(algebra)
    # both Mag and Dix are closed under complex scalars
    return out + [1j * e for e in out]


def span_identities(algebra, seed=0, samples=20):
    """Rank-verified span identities on a discrete base.

    * span of Mag members == Z + Ideal([A,A]) (full blocks of dim >= 2);
    * span of Dix members == Z + closure of [A,A] (trace zero on traceful
      blocks, everything on traceless blocks);
    * random Mag members lie in Z + Ideal([A,A]).
    """
    if algebra.base.is_path:
        raise UnsupportedBase("span identities are verified on discrete bases only")
    z = _central_generators(algebra)
    ideal_aa = z + _block_generators(algebra, lambda b: "full" if b.dim >= 2 else None)
    comm = z + _block_generators(
        algebra, lambda b: ("trace_zero" if b.dim >= 2 else None) if b.has_trace else "full")
    cands = _member_candidates(algebra, seed)
    mag = [e for e in cands if in_mag(e, trend=False).is_yes]
    dix = [e for e in cands if in_dix(e, trend=False).is_yes]

    def compare(gens, members):
        a = [_flatten(e) for e in gens]
        b = [_flatten(e) for e in members]
        ra, rb, rab = _rank(a), _rank(b), _rank(a + b)
        return {"rank_subspace": ra, "rank_members": rb, "rank_union": rab,
                "equal": ra == rb == rab}

    mag_cmp = compare(ideal_aa, mag)
    dix_cmp = compare(comm, dix)

    # random Mag members must lie in Z + Ideal([A,A])
    basis = np.array([_flatten(e) for e in ideal_aa])
    q, _ = np.linalg.qr(basis.T)
    q = q[:, :_rank(list(basis))] if len(basis) else q
    worst = 0.0
    tested = 0
    for k in range(samples):
        el = random_element(seed + 1000 + k, algebra)
        el = _pull_into_mag(el)
        if not in_mag(el, trend=False).is_yes:
            continue
        v = _flatten(el)
        res = v - q @ (q.T @ v)
        worst = max(worst, float(np.linalg.norm(res) / max(1.0, np.linalg.norm(v))))
        tested += 1
    return {"dimension": 2 * _coords(algebra),
            "mag_span": mag_cmp, "dix_span": dix_cmp,
            "mag_members_inclusion": {"tested": tested, "worst_residual": worst,
                                      "ok": worst <= RANK_TOL},
            "verified": mag_cmp["equal"] and dix_cmp["equal"] and worst <= RANK_TOL}


def _pull_into_mag(element):
    """Give every maximal block at a point the same normalized trace.

    Dim-1 maximal blocks are set equal to the first one; each numerical range
    then contains the shared trace value, so psi is nonempty everywhere.
    """
    alg = element.algebra
    blocks = [list(row) for row in element.blocks]
    for p, fib in enumerate(alg.fibers):
        maxi = alg.maximal_blocks(p)
        ones = [i for i in maxi if fib[i].dim == 1]
        v = blocks[p][ones[0]][0, 0] if ones else np.trace(blocks[p][maxi[0]]) / fib[maxi[0]].dim
        for i in maxi:
            d = fib[i].dim
            m = blocks[p][i]
            blocks[p][i] = m - (np.trace(m) / d - v) * np.eye(d)
    return Element(alg, blocks)
