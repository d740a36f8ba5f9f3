"""Command-line interface.

Subcommands: ``lstats`` (combined test), ``bintest`` / ``survtest``
(univariate components), ``cov`` (covariance and correlation estimate),
``simulate`` (scenario grid runner), ``kmdump`` (Kaplan-Meier curves as TSV).

Exit codes: 0 success, 1 usage or input error, 2 assumption violation
(blocking validation or exhausted support), 3 internal error.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import copsim, km, lstat
from .lstat import one_sided_p
from .dataset import StudyConfig, parse_csv, validate
from .errors import (
    AssumptionError,
    BinsurvError,
    ConfigError,
    DataError,
    DegenerateVarianceError,
    InsufficientDataError,
    SchemaError,
    SimulationError,
)

USAGE_ERROR = 1
ASSUMPTION_ERROR = 2
INTERNAL_ERROR = 3

_USAGE_EXCEPTIONS = (ConfigError, SchemaError, DataError, InsufficientDataError,
                     FileNotFoundError, IsADirectoryError, PermissionError)
_ASSUMPTION_EXCEPTIONS = (AssumptionError, DegenerateVarianceError, SimulationError)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(USAGE_ERROR, f"{self.prog}: error: {message}\n")


def _add_config_flags(p, need_tau=True):
    p.add_argument("--data", required=True, help="input CSV (columns time,status,binary,treat)")
    p.add_argument("--tau0", type=float, default=0.0, help="survival window start (default 0)")
    if need_tau:
        p.add_argument("--tau", type=float, required=True, help="end of follow-up")
    p.add_argument("--taub", type=float, default=None,
                   help="binary evaluation time (default: tau)")
    p.add_argument("--rho", type=float, default=0.0, help="survival-factor exponent of Q")
    p.add_argument("--gam", type=float, default=0.0, help="distribution-factor exponent of Q")
    p.add_argument("--eta", type=float, default=0.0, help="censoring-factor exponent of Q")
    p.add_argument("--wb", type=float, default=0.5, help="binary endpoint weight")
    p.add_argument("--ws", type=float, default=0.5, help="survival endpoint weight")
    p.add_argument("--var-est", choices=("pooled", "unpooled"), default="pooled",
                   help="variance estimator")
    p.add_argument("--bandwidth", type=float, default=None,
                   help="hazard kernel bandwidth (default: window/8)")
    p.add_argument("--cov-method", choices=("plugin", "hazard"), default="plugin",
                   help="covariance estimator for the combined variance")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="binsurv",
                     description="Two-sample tests for combined binary and survival endpoints.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("lstats", parents=[], help="combined standardized statistic")
    _add_config_flags(p)

    p = sub.add_parser("bintest", help="standardized difference in proportions")
    p.add_argument("--data", required=True)
    p.add_argument("--taub", type=float, default=None,
                   help="binary evaluation time (informational)")

    p = sub.add_parser("survtest", help="standardized integrated Kaplan-Meier difference")
    _add_config_flags(p)

    p = sub.add_parser("cov", help="covariance and correlation of the two components")
    _add_config_flags(p)

    p = sub.add_parser("simulate", help="run a scenario grid")
    p.add_argument("--grid", required=True, help="JSON array of scenarios")
    p.add_argument("--reps", type=int, required=True, help="replicates per scenario")
    p.add_argument("--alpha", type=float, default=0.05, help="nominal level")
    p.add_argument("--threads", type=int, default=1, help="parallel workers")
    p.add_argument("--out", default=None, help="output TSV path (default: stdout)")

    p = sub.add_parser("kmdump", help="dump a Kaplan-Meier curve as TSV")
    p.add_argument("--data", required=True)
    p.add_argument("--curve", choices=("surv", "cens", "resp"), default="surv")
    p.add_argument("--group", choices=("0", "1", "pooled"), default="pooled")
    p.add_argument("--out", default=None, help="output TSV path (default: stdout)")
    return parser


def _read_dataset(path):
    with open(path, "r", encoding="utf-8") as fh:
        return parse_csv(fh)


def _config_from_args(args) -> StudyConfig:
    tau_b = args.taub if args.taub is not None else args.tau
    if abs(args.wb + args.ws - 1.0) > 1e-9:
        raise ConfigError(f"--wb and --ws must sum to 1, got {args.wb + args.ws}")
    return StudyConfig(tau0=args.tau0, tau_b=tau_b, tau=args.tau,
                       omega_b=args.wb, omega_s=args.ws,
                       eta=args.eta, rho=args.rho, gamma=args.gam,
                       variance_mode=args.var_est)


def _checked_inputs(args):
    ds = _read_dataset(args.data)
    cfg = _config_from_args(args)
    report = validate(ds, cfg)
    if report.blocking:
        raise AssumptionError(
            "blocking validation report:\n" + "\n".join(str(c) for c in report.failures))
    return ds, cfg


def _emit(payload, path=None):
    text = json.dumps(payload, indent=2)
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _cmd_lstats(args) -> int:
    ds, cfg = _checked_inputs(args)
    res = lstat.l_statistic(ds, cfg, bandwidth=args.bandwidth,
                            cov_method=args.cov_method)
    _emit({"config": cfg.to_dict(), **res.to_dict()})
    return 0


def _cmd_bintest(args) -> int:
    ds = _read_dataset(args.data)
    u_b, p0, p1 = lstat.u_binary(ds, args.taub if args.taub is not None else 0.0)
    var_b = lstat.sigma_b_hat(ds, args.taub if args.taub is not None else 0.0)
    z = u_b / float(np.sqrt(var_b))
    _emit({"u_b": u_b, "p_hat_0": p0, "p_hat_1": p1,
           "sigma_b_hat": float(np.sqrt(var_b)), "z": z,
           "p_value": one_sided_p(z)})
    return 0


def _cmd_survtest(args) -> int:
    ds, cfg = _checked_inputs(args)
    from .weights import WeightSpec, build_q
    q = build_q(ds, WeightSpec(eta=cfg.eta, rho=cfg.rho, gamma=cfg.gamma),
                tau_b=cfg.tau_b, tau=cfg.tau)
    u_s = lstat.u_survival(ds, cfg.tau0, cfg.tau, q)
    var_s = lstat.sigma_s_hat(ds, cfg.tau0, cfg.tau, q, mode=cfg.variance_mode)
    if var_s <= 0:
        raise DegenerateVarianceError("survival variance estimate is not positive")
    z = u_s / float(np.sqrt(var_s))
    _emit({"u_s": u_s, "sigma_s_hat": float(np.sqrt(var_s)), "z": z,
           "p_value": one_sided_p(z), "variance_mode": cfg.variance_mode})
    return 0


def _cmd_cov(args) -> int:
    ds, cfg = _checked_inputs(args)
    res = lstat.l_statistic(ds, cfg, bandwidth=args.bandwidth,
                            cov_method=args.cov_method)
    _emit({"sigma_bs_hat": res.sigma_bs_hat, "rho_hat": res.rho_hat,
           "sigma_b_hat": res.sigma_b_hat, "sigma_s_hat": res.sigma_s_hat,
           "variance_mode": res.variance_mode})
    return 0


def _cmd_simulate(args) -> int:
    if args.reps < 1:
        raise ConfigError("--reps must be positive")
    if args.threads < 1:
        raise ConfigError("--threads must be positive")
    scenarios = copsim.load_grid(args.grid)
    rows = []
    for i, sc in enumerate(scenarios):
        results = copsim.size_by_mode(sc, args.reps, alpha=args.alpha,
                                      n_jobs=args.threads)
        sid = sc.id if sc.id is not None else str(i)
        for mode in ("pooled", "unpooled"):
            rows.append((sid, results[mode]))
    text = copsim.size_results_tsv(rows)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def _cmd_kmdump(args) -> int:
    ds = _read_dataset(args.data)
    if args.curve == "resp" and args.group == "pooled":
        raise ConfigError("responder curves are per group; pass --group 0 or 1")
    if args.group == "pooled":
        surv, cens = km.pooled_km(ds)
        curve = surv if args.curve == "surv" else cens
    else:
        g = int(args.group)
        t, s, _ = ds.group_arrays(g)
        if args.curve == "surv":
            curve = km.km_estimate(t, s)
        elif args.curve == "cens":
            curve = km.censoring_km(t, s)
        else:
            curve = km.responders_km(ds, g)
    text = km.step_to_tsv(curve)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


_COMMANDS = {
    "lstats": _cmd_lstats,
    "bintest": _cmd_bintest,
    "survtest": _cmd_survtest,
    "cov": _cmd_cov,
    "simulate": _cmd_simulate,
    "kmdump": _cmd_kmdump,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return _COMMANDS[args.command](args)
    except _USAGE_EXCEPTIONS as exc:
        print(f"binsurv: error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except _ASSUMPTION_EXCEPTIONS as exc:
        print(f"binsurv: assumption violation: {exc}", file=sys.stderr)
        return ASSUMPTION_ERROR
    except BinsurvError as exc:
        print(f"binsurv: internal error: {exc}", file=sys.stderr)
        return INTERNAL_ERROR
    except Exception as exc:  # pragma: no cover - defensive
        print(f"binsurv: internal error: {exc}", file=sys.stderr)
        return INTERNAL_ERROR


if __name__ == "__main__":
    raise SystemExit(main())
