"""Random weight functions Q(t) for the integrated survival contrast.

The default family is Q(t) = G(t-)^eta * S(t-)^rho * (1 - S(t-))^gamma with
pooled Kaplan-Meier plug-ins. Because every factor is a left limit, Q is a
left-continuous step function; its knots are the pooled Kaplan-Meier knots
(plus tau_b when the two-level factor is enabled).

Convention: 0^0 = 1, so a zero exponent never zeroes the weight (the
rho = gamma = eta = 0 case is the constant logrank-type weight).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, SupportExhaustionError
from .km import StepFunction, censoring_km, pooled_km

__all__ = ["WeightSpec", "build_q", "vc_weight", "fh_weight"]


@dataclass(frozen=True)
class WeightSpec:
    """Exponents and options of the weight family.

    ``piecewise_a`` (in [0, 0.5)) enables a two-level time factor that puts
    weight ``a`` before ``tau_b`` and ``1 - a`` afterwards; ``use_vc``
    replaces the censoring factor G(t-)^eta by the Pepe-Fleming
    variance-stabilizing weight.
    """

    eta: float = 0.0
    rho: float = 0.0
    gamma: float = 0.0
    piecewise_a: float | None = None
    use_vc: bool = False

    def __post_init__(self):
        if min(self.eta, self.rho, self.gamma) < 0:
            raise ConfigError("eta, rho, gamma must be nonnegative")
        if self.piecewise_a is not None and not 0 <= self.piecewise_a < 0.5:
            raise ConfigError(f"piecewise_a must lie in [0, 0.5), got {self.piecewise_a}")


def _pow0(base: np.ndarray, exponent: float) -> np.ndarray:
    """base**exponent with the 0^0 = 1 convention."""
    if exponent == 0:
        return np.ones_like(base)
    return np.power(base, exponent)


def _segment_probes(knots: np.ndarray) -> np.ndarray:
    """One interior point per segment started by each knot.

    Evaluating any step function at these points yields its value on the
    open segment, independently of the continuity convention at the knots.
    """
    if knots.size == 0:
        return knots
    return np.append(0.5 * (knots[:-1] + knots[1:]), knots[-1] + 1.0)


def build_q(ds, spec: WeightSpec, tau_b: float | None = None,
            tau: float | None = None, pooled=None) -> StepFunction:
    """Weight function Q(t) = G(t-)^eta S(t-)^rho (1-S(t-))^gamma as a step function.

    Parameters
    ----------
    ds : TrialDataset
    spec : WeightSpec
    tau_b : float, optional
        Required when ``spec.piecewise_a`` is set (the switch time of the
        two-level factor).
    tau : float, optional
        When given and ``spec.use_vc`` is set, censoring-support exhaustion
        at or before ``tau`` raises instead of silently weighting by zero.
    pooled : (StepFunction, StepFunction), optional
        Precomputed pooled event and censoring Kaplan-Meier estimates.
    """
    s_pool, g_pool = pooled if pooled is not None else pooled_km(ds)
    cens = vc_weight(ds, tau=tau) if spec.use_vc else g_pool
    cens_exp = 1.0 if spec.use_vc else spec.eta
    knots = np.unique(np.concatenate([s_pool.breakpoints, cens.breakpoints]))
    probes = _segment_probes(knots)
    s_vals = np.asarray(s_pool(probes), dtype=float)
    c_vals = np.asarray(cens(probes), dtype=float)
    values = _pow0(c_vals, cens_exp) * _pow0(s_vals, spec.rho) * _pow0(1.0 - s_vals, spec.gamma)
    initial = 1.0 if spec.gamma == 0 else 0.0  # S(t-) = 1 before the first knot
    q = StepFunction(knots, values, initial_value=initial, left_continuous=True)
    if spec.piecewise_a is not None:
        if tau_b is None:
            raise ConfigError("tau_b is required when piecewise_a is set")
        q = _apply_two_level(q, spec.piecewise_a, tau_b)
    return q


def _apply_two_level(q: StepFunction, a: float, tau_b: float) -> StepFunction:
    """Multiply by f(t) = a before tau_b and 1 - a from tau_b on.

    In the left-continuous representation the switch lands just after tau_b;
    this only affects the value at the single point t = tau_b, not any
    integral of q.
    """
    knots = np.unique(np.append(q.breakpoints, tau_b))
    probes = _segment_probes(knots)
    vals = np.asarray(q(probes), dtype=float)
    f = np.where(knots < tau_b, a, 1.0 - a)
    initial = q.initial_value * (a if tau_b > 0 else 1.0 - a)
    return StepFunction(knots, vals * f, initial_value=initial, left_continuous=True)


def vc_weight(ds, *, sqrt: bool = False, tau: float | None = None) -> StepFunction:
    """Pepe-Fleming censoring weight v_c(t) (or its square root).

    v_c(t) = n G0(t-) G1(t-) / (n0 G0(t-) + n1 G1(t-)) with per-group
    censoring Kaplan-Meier estimates. Where both censoring curves have
    reached zero the weight is set to zero; if that happens at or before
    ``tau`` (when given) a :class:`SupportExhaustionError` is raised.
    """
    t0, s0, _ = ds.group_arrays(0)
    t1, s1, _ = ds.group_arrays(1)
    g0 = censoring_km(t0, s0)
    g1 = censoring_km(t1, s1)
    knots = np.unique(np.concatenate([g0.breakpoints, g1.breakpoints]))
    v0 = g0(knots) if knots.size else np.ones(0)
    v1 = g1(knots) if knots.size else np.ones(0)
    denom = ds.n0 * v0 + ds.n1 * v1
    exhausted = denom == 0
    if tau is not None and np.any(exhausted & (knots < tau)):
        first = float(knots[exhausted][0])
        raise SupportExhaustionError(
            f"censoring support exhausted from t={first:g}, before tau={tau:g}")
    values = np.where(exhausted, 0.0, ds.n * v0 * v1 / np.where(exhausted, 1.0, denom))
    if sqrt:
        values = np.sqrt(values)
    return StepFunction(knots, values, initial_value=1.0, left_continuous=True)


def fh_weight(s_pooled: StepFunction, rho: float, gamma: float) -> StepFunction:
    """Harrington-Fleming style factor f(t) = S(t-)^rho (1 - S(t-))^gamma."""
    if min(rho, gamma) < 0:
        raise ConfigError("rho and gamma must be nonnegative")
    knots = s_pooled.breakpoints
    s_vals = s_pooled.values
    values = _pow0(s_vals, rho) * _pow0(1.0 - s_vals, gamma)
    initial = float(_pow0(np.asarray([1.0]), rho)[0] * _pow0(np.asarray([0.0]), gamma)[0])
    return StepFunction(knots, values, initial_value=initial, left_continuous=True)
