"""Two-sample tests for combined binary and right-censored survival endpoints.

The combined statistic mixes a standardized difference in response
proportions with a standardized weighted integrated Kaplan-Meier contrast;
the package also ships the matching variance/covariance estimators, weight
families, a kernel estimator for the joint responder-event hazard, and a
Frank-copula trial simulator for size and power studies.
"""

from .dataset import (
    StudyConfig,
    SubjectRecord,
    TrialDataset,
    ValidationReport,
    parse_csv,
    to_csv,
    validate,
)
from .errors import (
    AssumptionError,
    BinsurvError,
    ConfigError,
    DataError,
    DegenerateVarianceError,
    InsufficientDataError,
    SchemaError,
    SimulationError,
    SupportExhaustionError,
    UnsupportedModelError,
)
from .kernelhaz import HazardEstimate, hazard_xt
from .km import (
    RiskTable,
    StepFunction,
    TailIntegral,
    censoring_km,
    integrate_step_product,
    km_estimate,
    left_limit,
    pooled_km,
    responders_km,
    risk_table,
    step_to_tsv,
)
from .copsim import (
    Scenario,
    SizeResult,
    TheoreticalModel,
    TheoreticalSigma,
    desk_scale_grid,
    empirical_size,
    frank_pair,
    gen_trial,
    load_grid,
    q_limit,
    replicate_rng,
    save_grid,
    size_by_mode,
    theoretical_sigma,
)
from .lstat import (
    NoncentralitySpec,
    TestResult,
    k_hat,
    l_statistic,
    noncentrality,
    sigma_b_hat,
    sigma_bs_hat,
    sigma_s_hat,
    u_binary,
    u_survival,
)
from .weights import WeightSpec, build_q, fh_weight, vc_weight

__version__ = "0.1.0"

__all__ = [
    "AssumptionError",
    "BinsurvError",
    "ConfigError",
    "DataError",
    "DegenerateVarianceError",
    "HazardEstimate",
    "InsufficientDataError",
    "NoncentralitySpec",
    "RiskTable",
    "Scenario",
    "SchemaError",
    "SimulationError",
    "SizeResult",
    "StepFunction",
    "StudyConfig",
    "SubjectRecord",
    "SupportExhaustionError",
    "TailIntegral",
    "TestResult",
    "TheoreticalModel",
    "TheoreticalSigma",
    "TrialDataset",
    "UnsupportedModelError",
    "ValidationReport",
    "WeightSpec",
    "build_q",
    "censoring_km",
    "desk_scale_grid",
    "empirical_size",
    "fh_weight",
    "frank_pair",
    "gen_trial",
    "hazard_xt",
    "integrate_step_product",
    "k_hat",
    "km_estimate",
    "l_statistic",
    "left_limit",
    "load_grid",
    "noncentrality",
    "parse_csv",
    "pooled_km",
    "q_limit",
    "replicate_rng",
    "responders_km",
    "risk_table",
    "save_grid",
    "sigma_b_hat",
    "sigma_bs_hat",
    "sigma_s_hat",
    "size_by_mode",
    "step_to_tsv",
    "theoretical_sigma",
    "to_csv",
    "u_binary",
    "u_survival",
    "validate",
    "vc_weight",
]
