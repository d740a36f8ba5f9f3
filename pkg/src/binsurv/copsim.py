"""Copula-based trial simulator and theoretical variance oracles.

Bivariate binary + survival subjects are drawn from a Frank copula by
conditional sampling: with (U, W) independent uniforms,

    V = -(1/theta) * log(1 + W (e^-theta - 1) / (W + (1 - W) e^{-theta U}))

gives (U, V) with uniform margins and Frank dependence theta. The binary
response is X = 1{U <= p} and the event time is the survival quantile
T = b (-log V)^{1/a} of the Weibull margin S(t) = exp(-(t/b)^a), so V is
the survival quantile of T and larger theta induces positive association
between response and longer survival. Censoring is Uniform(0, c)
(c = inf disables it).

Replicate r of a run uses the counter-based stream Philox(seed, stream=r),
so serial and parallel executions produce identical results.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .dataset import StudyConfig, TrialDataset
from .errors import (
    AssumptionError,
    ConfigError,
    DegenerateVarianceError,
    InsufficientDataError,
    SimulationError,
    UnsupportedModelError,
)
from .lstat import _l_statistic_modes

__all__ = [
    "Scenario",
    "TheoreticalModel",
    "TheoreticalSigma",
    "SizeResult",
    "frank_pair",
    "replicate_rng",
    "gen_trial",
    "empirical_size",
    "size_by_mode",
    "theoretical_sigma",
    "q_limit",
    "desk_scale_grid",
    "load_grid",
    "save_grid",
    "size_results_tsv",
]


@dataclass(frozen=True)
class Scenario:
    """One simulation cell.

    ``theta`` is the Frank association (use 0.001 for near-independence;
    exactly 0 is rejected), ``a``/``b`` the Weibull shape/scale, ``p0``/``p1``
    the response probabilities, ``c`` the censoring bound (may be ``inf``),
    and ``b1`` an optional intervention-arm Weibull scale for alternatives.
    """

    theta: float
    a: float
    b: float
    p0: float
    p1: float
    c: float
    n_per_arm: int
    cfg: StudyConfig
    seed: int
    b1: float | None = None
    id: str | None = None

    def __post_init__(self):
        if self.theta == 0:
            raise ConfigError("theta must be nonzero (use 0.001 for near-independence)")
        if min(self.a, self.b, self.c) <= 0:
            raise ConfigError("a, b, c must be positive")
        if self.b1 is not None and self.b1 <= 0:
            raise ConfigError("b1 must be positive")
        for p in (self.p0, self.p1):
            if not 0 < p < 1:
                raise ConfigError(f"response probabilities must lie in (0, 1), got {p}")
        if self.n_per_arm < 2:
            raise ConfigError("need at least 2 subjects per arm")

    def to_dict(self) -> dict:
        out = {
            "theta": self.theta, "a": self.a, "b": self.b,
            "p0": self.p0, "p1": self.p1, "c": self.c,
            "n_per_arm": self.n_per_arm, "seed": self.seed,
            "cfg": self.cfg.to_dict(),
        }
        if self.b1 is not None:
            out["b1"] = self.b1
        if self.id is not None:
            out["id"] = self.id
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "Scenario":
        d = dict(d)
        d["cfg"] = StudyConfig.from_dict(d["cfg"])
        return cls(**d)


def frank_pair(theta: float, u, w):
    """Map independent uniforms (u, w) to a Frank-copula pair (u, v).

    Applies the conditional-distribution inverse of the Frank copula, so
    the output has uniform margins and association ``theta``. Accepts
    scalars or arrays; ``theta`` must be nonzero.
    """
    if theta == 0:
        raise ConfigError("theta must be nonzero (use 0.001 for near-independence)")
    u = np.asarray(u, dtype=float)
    w = np.asarray(w, dtype=float)
    em1 = math.expm1(-theta)
    v = -np.log1p(w * em1 / (w + (1.0 - w) * np.exp(-theta * u))) / theta
    return u, v


def replicate_rng(seed: int, rep: int) -> np.random.Generator:
    """Counter-based RNG stream for replicate ``rep`` of a run seeded by ``seed``."""
    return np.random.Generator(np.random.Philox(key=np.uint64(seed)).jumped(rep))


def gen_trial(sc: Scenario, rng: np.random.Generator) -> TrialDataset:
    """Draw one trial dataset from a scenario.

    Per subject in group i: (u, v) from the Frank copula, response
    X = 1{u <= p_i}, event time T = scale * (-log v)^(1/a), censoring
    C ~ Uniform(0, c); the observation is (min(T, C), 1{T <= C}).
    """
    n = sc.n_per_arm
    scales = (sc.b, sc.b1 if sc.b1 is not None else sc.b)
    probs = (sc.p0, sc.p1)
    times = np.empty(2 * n)
    status = np.empty(2 * n)
    binary = np.empty(2 * n)
    group = np.repeat([0.0, 1.0], n)
    for i in (0, 1):
        u = rng.random(n)
        w = rng.random(n)
        _, v = frank_pair(sc.theta, u, w)
        v = np.clip(v, 1e-300, 1.0 - 1e-16)
        t_event = scales[i] * np.power(-np.log(v), 1.0 / sc.a)
        if math.isinf(sc.c):
            obs, delta = t_event, np.ones(n)
        else:
            cens = rng.random(n) * sc.c
            obs = np.minimum(t_event, cens)
            delta = (t_event <= cens).astype(float)
        sl = slice(i * n, (i + 1) * n)
        times[sl] = obs
        status[sl] = delta
        binary[sl] = (u <= probs[i]).astype(float)
    return TrialDataset(times, status, binary, group)


# ---------------------------------------------------------------------------
# Empirical size
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SizeResult:
    """Empirical rejection rate of one (scenario, variance mode) run."""

    variance_mode: str
    n_reps: int
    n_excluded: int
    n_rejected: int
    alpha: float

    @property
    def n_used(self) -> int:
        return self.n_reps - self.n_excluded

    @property
    def size(self) -> float:
        return self.n_rejected / self.n_used

    @property
    def mc_se(self) -> float:
        s = self.size
        return math.sqrt(s * (1.0 - s) / self.n_used)


_EXCLUDABLE = (AssumptionError, DegenerateVarianceError, InsufficientDataError)


def _replicate_pvalues(sc: Scenario, rep: int, modes) -> dict | None:
    ds = gen_trial(sc, replicate_rng(sc.seed, rep))
    try:
        results = _l_statistic_modes(ds, sc.cfg, modes)
    except _EXCLUDABLE:
        return None
    return {m: r.p_value for m, r in results.items()}


def _run_chunk(args):
    sc_dict, reps, modes = args
    sc = Scenario.from_dict(sc_dict)
    return [_replicate_pvalues(sc, r, modes) for r in reps]


def size_by_mode(sc: Scenario, n_reps: int, alpha: float = 0.05,
                 modes=("pooled", "unpooled"), n_jobs: int = 1) -> dict[str, SizeResult]:
    """Empirical size for both variance modes from one set of replicates.

    Replicates whose statistic cannot be computed (violated positivity at a
    needed term, degenerate variance) are recorded and excluded; more than
    5% exclusions fails the run with :class:`SimulationError`.
    """
    if n_reps < 1:
        raise ConfigError("n_reps must be positive")
    if not 0 < alpha <= 1:
        raise ConfigError("alpha must lie in (0, 1]")
    modes = tuple(modes)
    if n_jobs > 1:
        chunks = [(sc.to_dict(), list(range(j, n_reps, n_jobs)), modes)
                  for j in range(n_jobs)]
        with ProcessPoolExecutor(max_workers=n_jobs) as pool:
            rows = [p for chunk in pool.map(_run_chunk, chunks) for p in chunk]
    else:
        rows = [_replicate_pvalues(sc, r, modes) for r in range(n_reps)]
    n_excluded = sum(1 for p in rows if p is None)
    if n_excluded > 0.05 * n_reps:
        raise SimulationError(
            f"{n_excluded}/{n_reps} replicates excluded (more than 5%)")
    out = {}
    for m in modes:
        rejected = sum(1 for p in rows if p is not None and p[m] < alpha)
        out[m] = SizeResult(variance_mode=m, n_reps=n_reps,
                            n_excluded=n_excluded, n_rejected=rejected,
                            alpha=alpha)
    return out


def empirical_size(sc: Scenario, n_reps: int, alpha: float = 0.05,
                   n_jobs: int = 1) -> SizeResult:
    """Empirical size under the variance mode carried by ``sc.cfg``."""
    mode = sc.cfg.variance_mode
    return size_by_mode(sc, n_reps, alpha, modes=(mode,), n_jobs=n_jobs)[mode]


# ---------------------------------------------------------------------------
# Theoretical model and variance oracles
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TheoreticalModel:
    """Limiting model of a null scenario: true survival, censoring, margins."""

    a: float
    b: float
    c: float
    p0: float
    p1: float
    pi0: float = 0.5
    pi1: float = 0.5
    independent: bool = False

    @classmethod
    def from_scenario(cls, sc: Scenario) -> "TheoreticalModel":
        if sc.b1 is not None and sc.b1 != sc.b:
            raise UnsupportedModelError("theoretical model requires equal survival margins")
        return cls(a=sc.a, b=sc.b, c=sc.c, p0=sc.p0, p1=sc.p1,
                   independent=abs(sc.theta) <= 0.01)

    def survival(self, t):
        t = np.asarray(t, dtype=float)
        return np.exp(-np.power(t / self.b, self.a))

    def density(self, t):
        t = np.asarray(t, dtype=float)
        return (self.a / self.b) * np.power(t / self.b, self.a - 1.0) * self.survival(t)

    def censoring(self, t):
        t = np.asarray(t, dtype=float)
        if math.isinf(self.c):
            return np.ones_like(t)
        return np.clip(1.0 - t / self.c, 0.0, 1.0)

    def at_risk(self, t):
        """Limit of the per-subject at-risk probability, S(t) G(t)."""
        return self.survival(t) * self.censoring(t)

    def responder_survival(self, t):
        if not self.independent:
            raise UnsupportedModelError(
                "responder survival is only available for the independence model")
        return self.survival(t)

    def responder_fraction_at_event(self, t, group: int = 0):
        if not self.independent:
            raise UnsupportedModelError(
                "responder fraction at event is only available for the independence model")
        p = self.p0 if group == 0 else self.p1
        return np.full_like(np.asarray(t, dtype=float), p)


@dataclass(frozen=True)
class TheoreticalSigma:
    sigma_b2: float
    sigma_s2: float
    sigma_bs: float


def q_limit(model: TheoreticalModel, eta: float = 0.0, rho: float = 0.0,
            gamma: float = 0.0):
    """Deterministic limit Q(t) = G(t)^eta S(t)^rho (1 - S(t))^gamma."""
    def q(t):
        t = np.asarray(t, dtype=float)
        s = model.survival(t)
        out = np.ones_like(t)
        if eta != 0:
            out = out * np.power(model.censoring(t), eta)
        if rho != 0:
            out = out * np.power(s, rho)
        if gamma != 0:
            out = out * np.power(1.0 - s, gamma)
        return out
    return q


def theoretical_sigma(model: TheoreticalModel, cfg: StudyConfig,
                      q_true=None) -> TheoreticalSigma:
    """Limiting variances of U_b and U_s and (independence only) their covariance.

    The binary variance is closed form; the survival variance integrates
    K(t)^2 f(t) / (S(t)^2 G(t)) over [tau0, tau] by adaptive quadrature with
    the nested tail integral K(t) = integral_t^tau q S du evaluated to
    relative tolerance 1e-6. The covariance is exactly zero under
    independence (responder survival equals overall survival and the
    responder fraction at an event is constant); for a dependent model it
    is not available and requesting it raises.
    """
    if q_true is None:
        q_true = q_limit(model, eta=cfg.eta, rho=cfg.rho, gamma=cfg.gamma)
    sigma_b2 = ((1.0 - model.pi0) * model.p0 * (1.0 - model.p0)
                + (1.0 - model.pi1) * model.p1 * (1.0 - model.p1))

    def qs(t):
        return float(q_true(np.asarray([t]))[0] * model.survival(t))

    def integrand(t):
        k, _ = quad(qs, t, cfg.tau, epsrel=1e-6, limit=200)
        if k == 0.0:
            return 0.0
        s = float(model.survival(t))
        g = float(model.censoring(t))
        if s <= 0.0 or g <= 0.0:
            return 0.0
        f = float(model.density(t))
        return k * k * f / (s * s * g)

    common, _ = quad(integrand, cfg.tau0, cfg.tau, epsrel=1e-6, limit=200)
    sigma_s2 = ((1.0 - model.pi0) + (1.0 - model.pi1)) * common
    if not model.independent:
        raise UnsupportedModelError(
            "sigma_bs is only available for the independence model")
    return TheoreticalSigma(sigma_b2=float(sigma_b2), sigma_s2=float(sigma_s2),
                            sigma_bs=0.0)


# ---------------------------------------------------------------------------
# Scenario grids and result serialization
# ---------------------------------------------------------------------------

def desk_scale_grid(n_per_arm: int = 500, seed: int = 20240801,
                    eta: float = 1.0, rho: float = 0.0, gamma: float = 1.0,
                    full_scale: bool = False) -> list[Scenario]:
    """Null-hypothesis scenario grid of the size study.

    Cells: theta in {0.001, 2, 3} x Weibull shape in {0.5, 1, 2} x
    p0 in {0.2, 0.4} x censoring bound in {1, 3} x follow-up
    (tau_b, tau) in {(0.5, 1), (1, 1)}; equal response probabilities and
    equal survival margins in both arms. ``full_scale`` switches to
    1000 subjects per arm.
    """
    if full_scale:
        n_per_arm = 1000
    cells = []
    idx = 0
    for theta in (0.001, 2.0, 3.0):
        for a in (0.5, 1.0, 2.0):
            for p0 in (0.2, 0.4):
                for c in (1.0, 3.0):
                    for tau_b, tau in ((0.5, 1.0), (1.0, 1.0)):
                        cfg = StudyConfig(tau0=0.0, tau_b=tau_b, tau=tau,
                                          eta=eta, rho=rho, gamma=gamma)
                        cells.append(Scenario(
                            theta=theta, a=a, b=1.0, p0=p0, p1=p0, c=c,
                            n_per_arm=n_per_arm, cfg=cfg,
                            seed=seed + idx,
                            id=f"th{theta:g}_a{a:g}_p{p0:g}_c{c:g}_tb{tau_b:g}"))
                        idx += 1
    return cells


def save_grid(scenarios, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump([sc.to_dict() for sc in scenarios], fh, indent=2)


def load_grid(path) -> list[Scenario]:
    with open(path, "r", encoding="utf-8") as fh:
        raw = json.load(fh)
    if not isinstance(raw, list):
        raise ConfigError("scenario grid must be a JSON array")
    return [Scenario.from_dict(d) for d in raw]


def size_results_tsv(rows) -> str:
    """Serialize (scenario_id, SizeResult) pairs as TSV."""
    out = ["scenario_id\tvariance_mode\tn_reps\tn_excluded\tempirical_size\tmc_se"]
    for scenario_id, res in rows:
        out.append(
            f"{scenario_id}\t{res.variance_mode}\t{res.n_reps}\t{res.n_excluded}"
            f"\t{res.size:.6f}\t{res.mc_se:.6f}")
    return "\n".join(out) + "\n"
