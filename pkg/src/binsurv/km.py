"""Product-limit estimation and step-function calculus.

Every estimated curve (event Kaplan-Meier, censoring Kaplan-Meier, responder
Kaplan-Meier) is a :class:`StepFunction`, so downstream integrals are computed
exactly over breakpoint partitions instead of quadrature grids: any integrand
built from step functions is constant between consecutive knots of their
union, and summing value*width over that partition is exact.

Tie convention: when an event and a censoring share a time, the event is
processed first. The censored subject still counts as at risk for the event;
the event subject has already left the risk set when the censoring is
processed by the censoring Kaplan-Meier.

Beyond the last observation every curve is carried flat at its last value.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InsufficientDataError

__all__ = [
    "StepFunction",
    "RiskTable",
    "km_estimate",
    "censoring_km",
    "km_pair",
    "pooled_km",
    "responders_km",
    "left_limit",
    "risk_table",
    "union_breakpoints",
    "integrate_step_product",
    "TailIntegral",
    "step_to_tsv",
]


@dataclass(frozen=True)
class StepFunction:
    """Piecewise-constant function with explicit breakpoints.

    Parameters
    ----------
    breakpoints : ndarray
        Strictly increasing times at which the value changes.
    values : ndarray
        ``values[k]`` is the value that applies from ``breakpoints[k]``
        onwards (right-continuous, the default) or up to and including
        ``breakpoints[k+1]`` (``left_continuous=True``, used for weight
        functions built from left limits).
    initial_value : float
        Value before the first breakpoint.
    left_continuous : bool
        Evaluation side. Survival-type curves are right-continuous; the
        random weight function Q(t), being a product of left limits, is
        left-continuous.
    """

    breakpoints: np.ndarray
    values: np.ndarray
    initial_value: float = 1.0
    left_continuous: bool = False

    def __post_init__(self):
        bp = np.asarray(self.breakpoints, dtype=float)
        vals = np.asarray(self.values, dtype=float)
        if bp.ndim != 1 or vals.ndim != 1 or bp.size != vals.size:
            raise ValueError("breakpoints and values must be 1-d and equal length")
        if bp.size > 1 and not np.all(np.diff(bp) > 0):
            raise ValueError("breakpoints must be strictly increasing")
        object.__setattr__(self, "breakpoints", bp)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "initial_value", float(self.initial_value))

    def __call__(self, t):
        side = "left" if self.left_continuous else "right"
        t = np.asarray(t, dtype=float)
        idx = np.searchsorted(self.breakpoints, t, side=side) - 1
        out = np.where(idx < 0, self.initial_value,
                       self.values[np.maximum(idx, 0)] if self.values.size else self.initial_value)
        return float(out) if out.ndim == 0 else out

    def left_limit(self, t):
        """Value just before ``t`` (``initial_value`` if ``t`` <= first breakpoint)."""
        t = np.asarray(t, dtype=float)
        idx = np.searchsorted(self.breakpoints, t, side="left") - 1
        out = np.where(idx < 0, self.initial_value,
                       self.values[np.maximum(idx, 0)] if self.values.size else self.initial_value)
        return float(out) if out.ndim == 0 else out

    @property
    def support_end(self) -> float:
        """Last breakpoint (0.0 for a constant function)."""
        return float(self.breakpoints[-1]) if self.breakpoints.size else 0.0

    @classmethod
    def from_callable(cls, fn, lo: float, hi: float, n: int = 2001,
                      left_continuous: bool = False) -> "StepFunction":
        """Sample a callable at cell midpoints of a uniform grid on [lo, hi]."""
        knots = np.linspace(lo, hi, n)
        mids = 0.5 * (knots[:-1] + knots[1:])
        vals = np.asarray(fn(mids), dtype=float)
        v0 = float(fn(np.asarray([lo]))[0]) if lo > 0 else float(vals[0])
        return cls(knots[:-1], vals, initial_value=v0, left_continuous=left_continuous)


@dataclass(frozen=True)
class RiskTable:
    """Counting-process summary at the distinct pooled event times."""

    times: np.ndarray
    at_risk: np.ndarray
    events: np.ndarray
    at_risk_by_group: np.ndarray  # shape (2, m)
    events_by_group: np.ndarray   # shape (2, m)

    def __post_init__(self):
        if np.any(self.events > self.at_risk):
            raise ValueError("event count exceeds at-risk count")
        if self.at_risk.size > 1 and np.any(np.diff(self.at_risk) > 0):
            raise ValueError("at-risk counts must be non-increasing")


def _check_sample(times, status):
    times = np.asarray(times, dtype=float)
    status = np.asarray(status, dtype=float)
    if times.size == 0:
        raise InsufficientDataError("empty sample")
    if times.shape != status.shape:
        raise ValueError("times and status must have equal length")
    if np.any(times <= 0):
        raise ValueError("times must be positive")
    if not np.all((status == 0) | (status == 1)):
        raise ValueError("status must be 0 or 1")
    return times, status


def _tabulate(times, status):
    """Distinct times with event counts, censoring counts and at-risk counts."""
    order = np.argsort(times, kind="stable")
    t = times[order]
    s = status[order]
    first = np.empty(t.size, dtype=bool)
    first[0] = True
    first[1:] = t[1:] != t[:-1]
    start = np.flatnonzero(first)
    bounds = np.append(start, t.size)
    cum = np.concatenate(([0.0], np.cumsum(s)))
    d = cum[bounds[1:]] - cum[bounds[:-1]]
    total = np.diff(bounds).astype(float)
    c = total - d
    at_risk = (t.size - start).astype(float)
    return t[start], d, c, at_risk


def _surv_from_table(uniq, d, at_risk) -> StepFunction:
    surv = np.cumprod(1.0 - d / at_risk)
    jumps = d > 0
    return StepFunction(uniq[jumps], surv[jumps])


def _cens_from_table(uniq, d, c, at_risk) -> StepFunction:
    risk = at_risk - d
    factors = np.where(c > 0, 1.0 - c / np.where(risk > 0, risk, 1.0), 1.0)
    surv = np.cumprod(factors)
    jumps = c > 0
    return StepFunction(uniq[jumps], surv[jumps])


def km_estimate(times, status) -> StepFunction:
    """Kaplan-Meier (product-limit) estimate of the event survival function.

    S(t) is the product over distinct event times u <= t of (1 - d(u)/Y(u)),
    where d counts events and Y counts subjects at risk (observation >= u).
    """
    times, status = _check_sample(times, status)
    uniq, d, _, at_risk = _tabulate(times, status)
    return _surv_from_table(uniq, d, at_risk)


def censoring_km(times, status) -> StepFunction:
    """Kaplan-Meier estimate for the censoring distribution G.

    Censorings play the role of events. At a tied time the event removals
    happen first, so the censoring risk set at u is Y(u) - d(u).
    """
    times, status = _check_sample(times, status)
    uniq, d, c, at_risk = _tabulate(times, status)
    return _cens_from_table(uniq, d, c, at_risk)


def km_pair(times, status) -> tuple[StepFunction, StepFunction]:
    """Event and censoring Kaplan-Meier estimates from one pass over the data."""
    times, status = _check_sample(times, status)
    uniq, d, c, at_risk = _tabulate(times, status)
    return _surv_from_table(uniq, d, at_risk), _cens_from_table(uniq, d, c, at_risk)


def pooled_km(ds) -> tuple[StepFunction, StepFunction]:
    """Event and censoring Kaplan-Meier estimates over both groups combined."""
    return km_pair(ds.time, ds.status)


def responders_km(ds, group: int) -> StepFunction:
    """Kaplan-Meier estimate restricted to responders (binary_x = 1) of a group."""
    mask = (ds.group == group) & (ds.binary == 1)
    if not np.any(mask):
        raise InsufficientDataError(f"group {group} has no responders")
    return km_estimate(ds.time[mask], ds.status[mask])


def left_limit(f: StepFunction, t) -> float:
    """Value of ``f`` strictly before ``t``."""
    return f.left_limit(t)


def risk_table(ds) -> RiskTable:
    """Risk table at the distinct pooled event times."""
    times, status = _check_sample(ds.time, ds.status)
    uniq, d, _, at_risk = _tabulate(times, status)
    ev = d > 0
    times_ev = uniq[ev]
    by_group_risk = np.zeros((2, times_ev.size))
    by_group_events = np.zeros((2, times_ev.size))
    for g in (0, 1):
        sel = ds.group == g
        tg = ds.time[sel]
        sg = ds.status[sel]
        # at risk in group g at u: observations >= u
        by_group_risk[g] = tg.size - np.searchsorted(np.sort(tg), times_ev, side="left")
        order = np.argsort(tg, kind="stable")
        tgs, sgs = tg[order], sg[order]
        cum = np.concatenate(([0.0], np.cumsum(sgs)))
        lo = np.searchsorted(tgs, times_ev, side="left")
        hi = np.searchsorted(tgs, times_ev, side="right")
        by_group_events[g] = cum[hi] - cum[lo]
    return RiskTable(times_ev, at_risk[ev], d[ev], by_group_risk, by_group_events)


# ---------------------------------------------------------------------------
# Exact integration over breakpoint partitions
# ---------------------------------------------------------------------------

def union_breakpoints(funcs, lo: float, hi: float) -> np.ndarray:
    """Sorted knots of [lo, hi] including every interior breakpoint of ``funcs``."""
    pieces = [np.array([lo, hi], dtype=float)]
    for f in funcs:
        bp = f.breakpoints
        pieces.append(bp[(bp > lo) & (bp < hi)])
    return np.unique(np.concatenate(pieces))


def _segment_product(funcs, knots) -> np.ndarray:
    """Product of the step functions on each open interval between knots.

    Midpoint evaluation is exact for any step function and is insensitive to
    the left/right continuity convention at the knots themselves.
    """
    mids = 0.5 * (knots[:-1] + knots[1:])
    seg = np.ones(mids.size)
    for f in funcs:
        seg = seg * f(mids)
    return seg


def integrate_step_product(funcs, lo: float, hi: float) -> float:
    """Exact integral over [lo, hi] of the pointwise product of step functions."""
    if hi <= lo:
        return 0.0
    knots = union_breakpoints(funcs, lo, hi)
    seg = _segment_product(funcs, knots)
    return float(np.dot(seg, np.diff(knots)))


class TailIntegral:
    """Exact tail integral t -> integral_t^hi of a product of step functions.

    Zero for t >= hi; constant (the full integral) for t <= lo. Construction
    is O(total knots); each evaluation is a binary search.
    """

    def __init__(self, funcs, lo: float, hi: float):
        if hi < lo:
            raise ValueError("hi must be >= lo")
        self.lo = float(lo)
        self.hi = float(hi)
        if hi == lo:
            self._knots = np.array([lo, hi])
            self._seg = np.zeros(1)
            self._tail = np.zeros(2)
        else:
            knots = union_breakpoints(funcs, lo, hi)
            seg = _segment_product(funcs, knots)
            contrib = seg * np.diff(knots)
            tail = np.zeros(knots.size)
            tail[:-1] = np.cumsum(contrib[::-1])[::-1]
            self._knots = knots
            self._seg = seg
            self._tail = tail

    @property
    def total(self) -> float:
        """Integral over the full window [lo, hi]."""
        return float(self._tail[0])

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        tc = np.clip(t, self.lo, self.hi)
        j = np.searchsorted(self._knots, tc, side="right") - 1
        j = np.clip(j, 0, self._seg.size - 1)
        out = self._tail[j + 1] + self._seg[j] * (self._knots[j + 1] - tc)
        return float(out) if out.ndim == 0 else out


def step_to_tsv(f: StepFunction) -> str:
    """Serialize a step function as TSV with columns ``t`` and ``value``."""
    lines = ["t\tvalue"]
    if f.breakpoints.size == 0 or f.breakpoints[0] > 0:
        lines.append(f"0.0\t{float(f.initial_value)!r}")
    for t, v in zip(f.breakpoints, f.values):
        lines.append(f"{float(t)!r}\t{float(v)!r}")
    return "\n".join(lines) + "\n"
