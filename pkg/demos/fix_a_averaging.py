"""Averaging on FIX-A: an exact EUCP at the split point and a unitary descent.

For a random corner ``lam`` and a value ``mu`` of its numerical range, the
state-induced map sends the value at t = 1 to the scalar ``mu``.  The
descent then drives a selfadjoint Dix member towards its central certificate.
"""

import numpy as np

from dixlab import apply, descent_to_center, eucp_from_state, fixture, in_dix, verify
from dixlab.algebra import restrict_element
from dixlab.averaging import assemble_eucp, state_for_value
from dixlab.catalog import fix_a_element


def main(seed=3):
    rng = np.random.default_rng(seed)
    alg = fixture("FIX-A").algebra
    lam = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    mu = 0.4 * lam[0, 0] + 0.6 * lam[1, 1]
    end = restrict_element(fix_a_element(alg, lam, mu), [alg.n_points - 1])
    phi = assemble_eucp(end.algebra, {(0, 0): eucp_from_state(state_for_value(lam, mu))})
    m2, m1 = apply(phi, end).blocks[0]
    print("value at t = 1 after the EUCP:\n", np.round(m2, 12), "and", m1[0, 0])
    print("unitality defect:", verify(phi)["max_violation"])

    h = lam + lam.conj().T
    r = rng.normal(size=(3, 3))
    el = fix_a_element(alg, h, np.trace(h).real / 2, 0.5 * (r + r.T))
    v = in_dix(el, trend=False)
    chain, curve = descent_to_center(el, v.certificate, budget=300)
    print(f"descent: {len(curve) - 1} steps, residual {curve[0]:.3e} -> {curve[-1]:.3e}")
    print("unitary terms kept factored:", chain.n_terms)


if __name__ == "__main__":
    main()
