"""Combined binary + survival two-sample statistics.

The combined statistic is

    L = omega_b * U_b / sigma_b + omega_s * U_s / sigma_s

with U_b the scaled difference in response proportions, U_s the scaled
integrated weighted Kaplan-Meier difference over [tau0, tau], and
sigma_b, sigma_s estimated standard deviations. The standardized statistic
z = L / sqrt(omega_b^2 + omega_s^2 + 2 omega_b omega_s rho_hat) is compared
to a standard normal; the p-value is one-sided (large z favors the
intervention arm on either endpoint).

Estimator integrals over Kaplan-Meier curves are Stieltjes sums over the
exact event times or exact piecewise-constant integrals; only the optional
hazard-based covariance decomposition integrates a smooth (kernel)
integrand, by the trapezoidal rule on the hazard grid.

Two covariance estimators are provided. The default ("plugin") integrates
Q against the gap between responder and overall survival curves, which is
the limiting covariance of the two component statistics. The alternative
("hazard") follows the decomposition split at tau_b with a kernel-estimated
joint responder-event hazard; it is exact under independence of the two
endpoints but understates the covariance under dependence and is retained
for diagnostics.

Normalization note: the censoring adjustment inside the pooled survival
variance is computed per unit sample, i.e. with the factor
(n0 G0(t-) + n1 G1(t-)) / (n G0(t-) G1(t-)), so that the estimate targets
the O(1) limiting variance of U_s. Terms whose tail integral K is exactly
zero are skipped; a zero denominator on a term that is actually needed
raises instead of being patched.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Callable

import numpy as np

from .dataset import StudyConfig, TrialDataset
from .errors import (
    AssumptionError,
    ConfigError,
    DegenerateVarianceError,
    SupportExhaustionError,
)
from .kernelhaz import HazardEstimate, hazard_xt
from .km import StepFunction, TailIntegral, km_pair, responders_km, union_breakpoints
from .weights import WeightSpec, build_q

_SQRT2 = math.sqrt(2.0)


def one_sided_p(z: float) -> float:
    """Upper-tail standard normal probability P(Z > z), kept inside (0, 1)."""
    p = 0.5 * math.erfc(z / _SQRT2)
    return min(max(p, 5e-324), 1.0 - 1e-16)

__all__ = [
    "TestResult",
    "NoncentralitySpec",
    "u_binary",
    "u_survival",
    "k_hat",
    "sigma_b_hat",
    "sigma_s_hat",
    "sigma_bs_hat",
    "l_statistic",
    "noncentrality",
]

_MODES = ("pooled", "unpooled")


@dataclass(frozen=True)
class TestResult:
    """Components and verdict of one combined test.

    ``sigma_b_hat`` and ``sigma_s_hat`` are standard deviations;
    ``sigma_bs_hat`` is the covariance estimate and ``rho_hat`` the
    correlation clipped to [-1, 1].
    """

    u_b: float
    u_s: float
    sigma_b_hat: float
    sigma_s_hat: float
    sigma_bs_hat: float
    rho_hat: float
    l_stat: float
    var_l: float
    z: float
    p_value: float
    variance_mode: str
    breakpoints: dict | None = None

    def to_dict(self) -> dict:
        out = {
            "u_b": self.u_b, "u_s": self.u_s,
            "sigma_b_hat": self.sigma_b_hat, "sigma_s_hat": self.sigma_s_hat,
            "sigma_bs_hat": self.sigma_bs_hat, "rho_hat": self.rho_hat,
            "l_stat": self.l_stat, "var_l": self.var_l,
            "z": self.z, "p_value": self.p_value,
            "variance_mode": self.variance_mode,
        }
        if self.breakpoints is not None:
            out["breakpoints"] = dict(self.breakpoints)
        return out


@dataclass(frozen=True)
class NoncentralitySpec:
    """Local-alternative drift: binary shift ``g`` plus a survival drift curve."""

    g: float
    drift: Callable
    q: Callable

    def __post_init__(self):
        if self.g < 0:
            raise ConfigError("binary drift g must be nonnegative")


class _CurveSet:
    """Lazily computed product-limit curves for one dataset, with a shared
    cache of tail integrals so each partition is built once per test."""

    def __init__(self, ds: TrialDataset):
        self.ds = ds
        self._tails: dict = {}

    @cached_property
    def _pooled_pair(self):
        return km_pair(self.ds.time, self.ds.status)

    @property
    def s_pooled(self) -> StepFunction:
        return self._pooled_pair[0]

    @property
    def g_pooled(self) -> StepFunction:
        return self._pooled_pair[1]

    def s_group(self, i: int) -> StepFunction:
        return self._group_curves[i][0]

    def g_group(self, i: int) -> StepFunction:
        return self._group_curves[i][1]

    @cached_property
    def _group_curves(self):
        out = []
        for i in (0, 1):
            t, s, _ = self.ds.group_arrays(i)
            out.append(km_pair(t, s))
        return out

    def sx_group(self, i: int) -> StepFunction:
        if self._sx[i] is None:
            self._sx[i] = responders_km(self.ds, i)
        return self._sx[i]

    @cached_property
    def _sx(self):
        return [None, None]

    @cached_property
    def p_pooled(self) -> float:
        return float(self.ds.binary.mean())

    def p_group(self, i: int) -> float:
        _, _, b = self.ds.group_arrays(i)
        return float(b.mean())

    def tail(self, q: StepFunction, s_key, lo: float, hi: float) -> TailIntegral:
        """Tail integral of q*S for S selected by ``s_key`` ("pooled", 0, 1)."""
        key = (id(q), s_key, lo, hi)
        ti = self._tails.get(key)
        if ti is None:
            s = self.s_pooled if s_key == "pooled" else self.s_group(s_key)
            ti = TailIntegral((q, s), lo, hi)
            self._tails[key] = ti
        return ti


def _jumps_in(f: StepFunction, lo: float, hi: float):
    """Jump times of ``f`` in (lo, hi] with pre/post values and increments."""
    t = f.breakpoints
    post = f.values
    pre = np.concatenate(([f.initial_value], post[:-1]))
    m = (t > lo) & (t <= hi)
    return t[m], pre[m], post[m], (post - pre)[m]


def _scale(ds: TrialDataset) -> float:
    return float(np.sqrt(ds.n0 * ds.n1 / ds.n))


# ---------------------------------------------------------------------------
# Component statistics
# ---------------------------------------------------------------------------

def u_binary(ds: TrialDataset, tau_b: float) -> tuple[float, float, float]:
    """Scaled difference in response proportions and the per-group estimates.

    Returns (u_b, p_hat_0, p_hat_1) with
    u_b = sqrt(n0 n1 / n) (p_hat_1 - p_hat_0). ``tau_b`` is the nominal
    evaluation time of the binary endpoint; the response indicators are
    assumed to be observed for every subject.
    """
    p0 = float(ds.binary[ds.group == 0].mean())
    p1 = float(ds.binary[ds.group == 1].mean())
    return _scale(ds) * (p1 - p0), p0, p1


def _u_survival_from(s0: StepFunction, s1: StepFunction, q: StepFunction,
                     tau0: float, tau: float, scale: float) -> float:
    knots = union_breakpoints((q, s0, s1), tau0, tau)
    mids = 0.5 * (knots[:-1] + knots[1:])
    seg = q(mids) * (s1(mids) - s0(mids))
    return scale * float(np.dot(seg, np.diff(knots)))


def u_survival(ds: TrialDataset, tau0: float, tau: float, q: StepFunction) -> float:
    """Scaled integral of q(t) (S1(t) - S0(t)) over [tau0, tau], computed exactly.

    The integrand is piecewise constant between consecutive breakpoints of
    q and the two group Kaplan-Meier curves, so the integral is an exact
    finite sum. Curves are carried flat beyond their last observation.
    """
    if not tau > tau0:
        raise ConfigError(f"need tau > tau0, got [{tau0}, {tau}]")
    curves = _CurveSet(ds)
    return _u_survival_from(curves.s_group(0), curves.s_group(1), q, tau0, tau, _scale(ds))


def k_hat(q: StepFunction, s_pooled: StepFunction, t, tau_star: float):
    """Tail integral K(t) = integral_t^{tau*} q(u) S(u) du, exactly; 0 for t >= tau*."""
    ti = TailIntegral((q, s_pooled), 0.0, float(tau_star))
    return ti(t)


# ---------------------------------------------------------------------------
# Variance and covariance estimators
# ---------------------------------------------------------------------------

def sigma_b_hat(ds: TrialDataset, tau_b: float, mode: str = "pooled") -> float:
    """Variance estimate of U_b: pooled p(1-p), or the per-group plug-in."""
    _check_mode(mode)
    if mode == "pooled":
        p = float(ds.binary.mean())
        if p in (0.0, 1.0):
            raise DegenerateVarianceError(f"pooled response fraction is {p:g}")
        return p * (1.0 - p)
    out = 0.0
    for i in (0, 1):
        _, _, b = ds.group_arrays(i)
        p = float(b.mean())
        out += (1.0 - ds.n_group(i) / ds.n) * p * (1.0 - p)
    if out <= 0.0:
        raise DegenerateVarianceError("both group response fractions are degenerate")
    return out


def _check_mode(mode: str):
    if mode not in _MODES:
        raise ConfigError(f"variance mode must be one of {_MODES}, got {mode!r}")


def _stieltjes_ds_over_s(tail: TailIntegral, jumps, what: str) -> float:
    """sum K(u) dS(u) / S(u) over jump rows, skipping exact-zero K terms."""
    u, _, post, dS = jumps
    if u.size == 0:
        return 0.0
    K = tail(u)
    keep = K != 0.0
    if not np.any(keep):
        return 0.0
    if np.any(post[keep] <= 0.0):
        raise AssumptionError(f"{what} reached zero at a needed event time")
    return float(np.sum(K[keep] * dS[keep] / post[keep]))


def _var_s_pooled(curves: _CurveSet, tau0: float, tau: float, q: StepFunction) -> float:
    ds = curves.ds
    s = curves.s_pooled
    u, pre, post, dS = _jumps_in(s, tau0, tau)
    if u.size == 0:
        return 0.0
    K = curves.tail(q, "pooled", tau0, tau)(u)
    keep = K != 0.0
    if not np.any(keep):
        return 0.0
    u, pre, post, dS, K = u[keep], pre[keep], post[keep], dS[keep], K[keep]
    if np.any(post <= 0.0):
        raise AssumptionError("pooled survival reached zero at a needed event time")
    g0m = curves.g_group(0).left_limit(u)
    g1m = curves.g_group(1).left_limit(u)
    if np.any(g0m <= 0.0) or np.any(g1m <= 0.0):
        raise SupportExhaustionError(
            "a censoring survival estimate reached zero at a needed event time")
    factor = (ds.n0 * g0m + ds.n1 * g1m) / (ds.n * g0m * g1m)
    return float(np.sum(-K * K / (post * pre) * factor * dS))


def _var_s_unpooled(curves: _CurveSet, tau0: float, tau: float, q: StepFunction) -> float:
    ds = curves.ds
    total = 0.0
    for i in (0, 1):
        s = curves.s_group(i)
        u, pre, post, dS = _jumps_in(s, tau0, tau)
        if u.size == 0:
            continue
        K = curves.tail(q, i, tau0, tau)(u)
        keep = K != 0.0
        if not np.any(keep):
            continue
        u, pre, post, dS, K = u[keep], pre[keep], post[keep], dS[keep], K[keep]
        if np.any(post <= 0.0):
            raise AssumptionError(f"group {i} survival reached zero at a needed event time")
        gm = curves.g_group(i).left_limit(u)
        if np.any(gm <= 0.0):
            raise SupportExhaustionError(
                f"group {i} censoring survival reached zero at a needed event time")
        w = 1.0 - ds.n_group(i) / ds.n
        total += w * float(np.sum(-K * K / (post * pre * gm) * dS))
    return total


def sigma_s_hat(ds: TrialDataset, tau0: float, tau: float, q: StepFunction,
                mode: str = "pooled") -> float:
    """Variance estimate of U_s as an exact Stieltjes sum over event times."""
    _check_mode(mode)
    curves = _CurveSet(ds)
    if mode == "pooled":
        return _var_s_pooled(curves, tau0, tau, q)
    return _var_s_unpooled(curves, tau0, tau, q)


def _hazard_pair(ds, cfg, bandwidth) -> tuple[HazardEstimate, HazardEstimate]:
    window = (cfg.tau0, cfg.tau_b)
    return hazard_xt(ds, 0, window, bandwidth), hazard_xt(ds, 1, window, bandwidth)


def _cov_bs_plugin(curves: _CurveSet, cfg: StudyConfig, q: StepFunction,
                   mode: str) -> float:
    """Plug-in of the limiting covariance sum_i (1-pi_i) p_i int Q (S_X^i - S^i).

    The identity Cov(X, 1{T > t}) = p (S_X(t) - S(t)) makes the uncensored
    case exact algebra; the martingale representation of the Kaplan-Meier
    estimator shows independent censoring leaves the limit unchanged. The
    integral is piecewise constant between knots, so the estimate is an
    exact finite sum with no kernel smoothing involved.
    """
    ds = curves.ds
    total = 0.0
    for i in (0, 1):
        sx = curves.sx_group(i)
        s = curves.s_pooled if mode == "pooled" else curves.s_group(i)
        p = curves.p_pooled if mode == "pooled" else curves.p_group(i)
        w = 1.0 - ds.n_group(i) / ds.n
        knots = union_breakpoints((q, sx, s), cfg.tau0, cfg.tau)
        mids = 0.5 * (knots[:-1] + knots[1:])
        seg = q(mids) * (sx(mids) - s(mids))
        total += w * p * float(np.dot(seg, np.diff(knots)))
    return total


def _cov_bs_pooled(curves: _CurveSet, cfg: StudyConfig, q: StepFunction,
                   hazards) -> float:
    ds = curves.ds
    s = curves.s_pooled
    p_pool = curves.p_pooled
    total = 0.0
    if cfg.tau0 < cfg.tau_b:
        h0, h1 = hazards
        tail_b = curves.tail(q, "pooled", cfg.tau0, cfg.tau_b)
        lam = ((1.0 - ds.n0 / ds.n) * h0.values + (1.0 - ds.n1 / ds.n) * h1.values)
        total -= float(np.trapezoid(tail_b(h0.grid) * lam, h0.grid))
        total -= p_pool * _stieltjes_ds_over_s(
            tail_b, _jumps_in(s, cfg.tau0, cfg.tau_b), "pooled survival")
    if cfg.tau_max < cfg.tau:
        tail = curves.tail(q, "pooled", cfg.tau0, cfg.tau)
        total -= p_pool * _stieltjes_ds_over_s(
            tail, _jumps_in(s, cfg.tau_max, cfg.tau), "pooled survival")
        for i in (0, 1):
            sx = curves.sx_group(i)
            v, prex, postx, dSX = _jumps_in(sx, cfg.tau_max, cfg.tau)
            if v.size == 0:
                continue
            K = tail(v)
            keep = K != 0.0
            if not np.any(keep):
                continue
            v, prex, postx, dSX, K = v[keep], prex[keep], postx[keep], dSX[keep], K[keep]
            s_vm = s.left_limit(v)
            if np.any(s_vm <= 0.0):
                raise AssumptionError("pooled survival left limit reached zero")
            # S_X(t-)/S_X(t) is a finite-sample continuity correction (limit 1);
            # at the responder support edge S_X(t) = 0 the neutral value 1 keeps
            # the plug-in finite without biasing the limit.
            ratio = np.where(postx > 0.0, prex / np.where(postx > 0.0, postx, 1.0), 1.0)
            w = 1.0 - ds.n_group(i) / ds.n
            total += w * p_pool * float(np.sum(K * ratio * dSX / s_vm))
    return total


def _cov_bs_unpooled(curves: _CurveSet, cfg: StudyConfig, q: StepFunction,
                     hazards) -> float:
    ds = curves.ds
    total = 0.0
    for i in (0, 1):
        s = curves.s_group(i)
        p_i = curves.p_group(i)
        w = 1.0 - ds.n_group(i) / ds.n
        if cfg.tau0 < cfg.tau_b:
            h = hazards[i]
            tail_b = curves.tail(q, i, cfg.tau0, cfg.tau_b)
            total -= w * float(np.trapezoid(tail_b(h.grid) * h.values, h.grid))
            total -= w * p_i * _stieltjes_ds_over_s(
                tail_b, _jumps_in(s, cfg.tau0, cfg.tau_b), f"group {i} survival")
        if cfg.tau_max < cfg.tau:
            tail = curves.tail(q, i, cfg.tau0, cfg.tau)
            total -= w * p_i * _stieltjes_ds_over_s(
                tail, _jumps_in(s, cfg.tau_max, cfg.tau), f"group {i} survival")
            sx = curves.sx_group(i)
            v, prex, postx, dSX = _jumps_in(sx, cfg.tau_max, cfg.tau)
            if v.size == 0:
                continue
            K = tail(v)
            keep = K != 0.0
            if not np.any(keep):
                continue
            v, prex, postx, dSX, K = v[keep], prex[keep], postx[keep], dSX[keep], K[keep]
            s_vm = s.left_limit(v)
            if np.any(s_vm <= 0.0):
                raise AssumptionError(f"group {i} survival left limit reached zero")
            ratio = np.where(postx > 0.0, prex / np.where(postx > 0.0, postx, 1.0), 1.0)
            total += w * p_i * float(np.sum(K * ratio * dSX / s_vm))
    return total


def sigma_bs_hat(ds: TrialDataset, cfg: StudyConfig, q: StepFunction,
                 hazard0: HazardEstimate | None = None,
                 hazard1: HazardEstimate | None = None,
                 mode: str = "pooled", method: str = "plugin") -> float:
    """Covariance estimate between U_b and U_s.

    ``method="plugin"`` (default) integrates Q times the gap between the
    responder and overall survival curves, an exact finite sum that is
    consistent for the covariance whenever the positivity assumptions hold.

    ``method="hazard"`` is the decomposition that splits the covariance at
    tau_b: its early part (present only when tau0 < tau_b) integrates kernel
    estimates of the joint responder-event hazards against the tail integral
    K, its late part is a Stieltjes sum involving the responder Kaplan-Meier
    curves. It vanishes under independence of the two endpoints but is not
    consistent for the covariance under dependence (it materially
    understates it; see the plugin docstring for the identity it misses),
    so it is kept for diagnostics and comparison only. Hazard estimates are
    computed with the default bandwidth when not supplied.
    """
    _check_mode(mode)
    _check_cov_method(method)
    curves = _CurveSet(ds)
    if method == "plugin":
        return _cov_bs_plugin(curves, cfg, q, mode)
    hazards = None
    if cfg.tau0 < cfg.tau_b:
        if hazard0 is None or hazard1 is None:
            hazards = _hazard_pair(ds, cfg, None)
        else:
            if not np.array_equal(hazard0.grid, hazard1.grid):
                raise ConfigError("hazard estimates must share one evaluation grid")
            hazards = (hazard0, hazard1)
    if mode == "pooled":
        return _cov_bs_pooled(curves, cfg, q, hazards)
    return _cov_bs_unpooled(curves, cfg, q, hazards)


def _check_cov_method(method: str):
    if method not in ("plugin", "hazard"):
        raise ConfigError(f"covariance method must be 'plugin' or 'hazard', got {method!r}")


# ---------------------------------------------------------------------------
# Combined statistic
# ---------------------------------------------------------------------------

def _assemble(u_b, u_s, var_b, var_s, cov, cfg, mode, breakpoints) -> TestResult:
    if var_b <= 0.0:
        raise DegenerateVarianceError("binary variance estimate is not positive")
    if var_s <= 0.0:
        raise DegenerateVarianceError(
            "survival variance estimate is not positive (no usable events in the window)")
    sb = float(np.sqrt(var_b))
    ss = float(np.sqrt(var_s))
    rho = float(np.clip(cov / (sb * ss), -1.0, 1.0))
    l_stat = cfg.omega_b * u_b / sb + cfg.omega_s * u_s / ss
    var_l = cfg.omega_b ** 2 + cfg.omega_s ** 2 + 2.0 * cfg.omega_b * cfg.omega_s * rho
    if var_l <= 1e-12:
        raise DegenerateVarianceError(f"combined variance {var_l:g} is degenerate")
    z = l_stat / float(np.sqrt(var_l))
    p = one_sided_p(z)
    return TestResult(u_b=u_b, u_s=u_s, sigma_b_hat=sb, sigma_s_hat=ss,
                      sigma_bs_hat=cov, rho_hat=rho, l_stat=l_stat, var_l=var_l,
                      z=z, p_value=p, variance_mode=mode, breakpoints=breakpoints)


def _l_statistic_modes(ds: TrialDataset, cfg: StudyConfig, modes,
                       weights: WeightSpec | None = None,
                       q: StepFunction | None = None,
                       bandwidth: float | None = None,
                       cov_method: str = "plugin") -> dict:
    for m in modes:
        _check_mode(m)
    _check_cov_method(cov_method)
    curves = _CurveSet(ds)
    if q is None:
        spec = weights if weights is not None else WeightSpec(
            eta=cfg.eta, rho=cfg.rho, gamma=cfg.gamma)
        q = build_q(ds, spec, tau_b=cfg.tau_b, tau=cfg.tau,
                    pooled=(curves.s_pooled, curves.g_pooled))
    u_b, _, _ = u_binary(ds, cfg.tau_b)
    u_s = _u_survival_from(curves.s_group(0), curves.s_group(1), q,
                           cfg.tau0, cfg.tau, _scale(ds))
    hazards = None
    if cov_method == "hazard" and cfg.tau0 < cfg.tau_b:
        hazards = _hazard_pair(ds, cfg, bandwidth)
    breakpoints = {
        "s_pooled": int(curves.s_pooled.breakpoints.size),
        "s0": int(curves.s_group(0).breakpoints.size),
        "s1": int(curves.s_group(1).breakpoints.size),
        "q": int(q.breakpoints.size),
    }
    out = {}
    for mode in modes:
        var_b = sigma_b_hat(ds, cfg.tau_b, mode)
        if mode == "pooled":
            var_s = _var_s_pooled(curves, cfg.tau0, cfg.tau, q)
        else:
            var_s = _var_s_unpooled(curves, cfg.tau0, cfg.tau, q)
        if cov_method == "plugin":
            cov = _cov_bs_plugin(curves, cfg, q, mode)
        elif mode == "pooled":
            cov = _cov_bs_pooled(curves, cfg, q, hazards)
        else:
            cov = _cov_bs_unpooled(curves, cfg, q, hazards)
        out[mode] = _assemble(u_b, u_s, var_b, var_s, cov, cfg, mode, breakpoints)
    return out


def l_statistic(ds: TrialDataset, cfg: StudyConfig, *,
                weights: WeightSpec | None = None,
                q: StepFunction | None = None,
                bandwidth: float | None = None,
                cov_method: str = "plugin") -> TestResult:
    """Run the combined test and return all components.

    Parameters
    ----------
    ds : TrialDataset
    cfg : StudyConfig
        Carries the follow-up times, endpoint weights, weight exponents and
        the variance mode to use.
    weights : WeightSpec, optional
        Overrides the weight family implied by ``cfg`` (e.g. to enable the
        two-level time factor or the variance-stabilizing censoring weight).
    q : StepFunction, optional
        A fully custom weight function; takes precedence over ``weights``.
    bandwidth : float, optional
        Bandwidth of the hazard kernel inside [tau0, tau_b] (only used by
        ``cov_method="hazard"``).
    cov_method : {"plugin", "hazard"}
        Covariance estimator; see :func:`sigma_bs_hat`.

    Notes
    -----
    Callers are expected to have screened the dataset with
    :func:`binsurv.dataset.validate`; computation errors (degenerate
    variance, exhausted censoring support at a needed event time) surface
    as exceptions rather than silent adjustments.
    """
    return _l_statistic_modes(ds, cfg, (cfg.variance_mode,), weights, q,
                              bandwidth, cov_method)[cfg.variance_mode]


def noncentrality(spec: NoncentralitySpec, cfg: StudyConfig) -> float:
    """Noncentrality omega_b g + omega_s * integral of q(t) drift(t) over [tau0, tau].

    ``drift`` and ``q`` must accept numpy arrays; the integral uses the
    trapezoidal rule on 1001 points.
    """
    t = np.linspace(cfg.tau0, cfg.tau, 1001)
    d = np.asarray(spec.drift(t), dtype=float)
    if np.any(d < 0):
        raise ConfigError("survival drift must be nonnegative on [tau0, tau]")
    qv = np.asarray(spec.q(t), dtype=float)
    return cfg.omega_b * spec.g + cfg.omega_s * float(np.trapezoid(qv * d, t))
