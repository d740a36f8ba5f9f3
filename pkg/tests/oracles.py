"""Independent brute-force oracles shared by the unit and acceptance suites."""

import numpy as np

from binsurv import km_estimate


def aligned_riemann(funcs, combine, lo, hi, total_points):
    """Midpoint Riemann sum aligned to the union of breakpoints.

    ``combine`` maps the tuple of per-function value arrays to the integrand.
    Alignment makes the midpoint rule exact for step functions, so the sum
    checks the exact integrator's partition bookkeeping rather than
    approximating it.
    """
    knots = sorted({float(lo), float(hi)}
                   | {float(b) for f in funcs for b in f.breakpoints if lo < b < hi})
    span = hi - lo
    total = 0.0
    for a, b in zip(knots, knots[1:]):
        m = max(1, int(round(total_points * (b - a) / span)))
        mids = a + (b - a) * (np.arange(m) + 0.5) / m
        total += float(np.sum(combine([f(mids) for f in funcs]))) * (b - a) / m
    return total


def riemann_u_survival(ds, tau0, tau, q, total_points=10**6):
    """Brute-force evaluation of the scaled integrated weighted KM difference."""
    t0, s0, _ = ds.group_arrays(0)
    t1, s1, _ = ds.group_arrays(1)
    surv0 = km_estimate(t0, s0)
    surv1 = km_estimate(t1, s1)
    integral = aligned_riemann((q, surv1, surv0),
                               lambda v: v[0] * (v[1] - v[2]),
                               tau0, tau, total_points)
    return np.sqrt(ds.n0 * ds.n1 / ds.n) * integral


def riemann_tail(q, s, t, tau_star, total_points=10**6):
    """Brute-force tail integral of q*S from t to tau_star."""
    if t >= tau_star:
        return 0.0
    return aligned_riemann((q, s), lambda v: v[0] * v[1], t, tau_star, total_points)
