"""Two-sample binary + right-censored survival data: ingestion and validation.

CSV contract: UTF-8, comma-separated, header required, columns ``time``,
``status``, ``binary``, ``treat`` (order-insensitive, case-insensitive,
extra columns ignored). ``time`` is a positive real; ``status`` is 1 for an
observed event and 0 for a censoring; ``binary`` is the 0/1 response
indicator; ``treat`` is the group label (0 = control, 1 = intervention).
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import km
from .errors import ConfigError, DataError, InsufficientDataError, SchemaError

__all__ = [
    "SubjectRecord",
    "TrialDataset",
    "StudyConfig",
    "CheckResult",
    "ValidationReport",
    "parse_csv",
    "to_csv",
    "validate",
]

_COLUMNS = ("time", "status", "binary", "treat")


@dataclass(frozen=True)
class SubjectRecord:
    """One subject: group label, binary response, observed time, event indicator."""

    group: int
    binary_x: int
    obs_time: float
    status: int

    def __post_init__(self):
        if self.group not in (0, 1):
            raise DataError(f"group must be 0 or 1, got {self.group}")
        if self.binary_x not in (0, 1):
            raise DataError(f"binary response must be 0 or 1, got {self.binary_x}")
        if self.status not in (0, 1):
            raise DataError(f"status must be 0 or 1, got {self.status}")
        if not self.obs_time > 0:
            raise DataError(f"observed time must be positive, got {self.obs_time}")


class TrialDataset:
    """Immutable two-sample dataset held as aligned numpy arrays.

    Attributes
    ----------
    time, status, binary, group : ndarray
        Per-subject observed time, event indicator, binary response and
        group label, in a common order.
    """

    __slots__ = ("time", "status", "binary", "group", "__dict__")

    def __init__(self, time, status, binary, group):
        time = np.ascontiguousarray(time, dtype=float)
        status = np.ascontiguousarray(status, dtype=float)
        binary = np.ascontiguousarray(binary, dtype=float)
        group = np.ascontiguousarray(group, dtype=float)
        n = time.size
        if not (status.size == binary.size == group.size == n):
            raise DataError("columns must have equal length")
        if n and np.any(time <= 0):
            raise DataError("all times must be positive")
        for name, arr in (("status", status), ("binary", binary), ("group", group)):
            if n and not np.all((arr == 0) | (arr == 1)):
                raise DataError(f"{name} must be 0 or 1")
        n1 = int(group.sum())
        n0 = n - n1
        if n0 < 2 or n1 < 2:
            raise InsufficientDataError(
                f"need at least 2 subjects per group, got n0={n0}, n1={n1}")
        self.time = time
        self.status = status
        self.binary = binary
        self.group = group
        for arr in (time, status, binary, group):
            arr.flags.writeable = False

    @classmethod
    def from_records(cls, records) -> "TrialDataset":
        recs = list(records)
        return cls(
            [r.obs_time for r in recs],
            [r.status for r in recs],
            [r.binary_x for r in recs],
            [r.group for r in recs],
        )

    @cached_property
    def records(self) -> tuple[SubjectRecord, ...]:
        return tuple(
            SubjectRecord(int(g), int(b), float(t), int(s))
            for t, s, b, g in zip(self.time, self.status, self.binary, self.group)
        )

    @property
    def n(self) -> int:
        return self.time.size

    @property
    def n0(self) -> int:
        return self.n - self.n1

    @property
    def n1(self) -> int:
        return int(self.group.sum())

    def n_group(self, i: int) -> int:
        return self.n1 if i == 1 else self.n0

    @property
    def pi_hat(self) -> tuple[float, float]:
        """Observed group fractions (n0/n, n1/n)."""
        return self.n0 / self.n, self.n1 / self.n

    def group_arrays(self, i: int):
        """(time, status, binary) restricted to group ``i``."""
        m = self.group == i
        return self.time[m], self.status[m], self.binary[m]

    def __len__(self) -> int:
        return self.n

    def __repr__(self) -> str:
        return f"TrialDataset(n0={self.n0}, n1={self.n1})"


@dataclass(frozen=True)
class StudyConfig:
    """Time points, endpoint weights, weight exponents and variance mode.

    ``tau_b`` is the binary evaluation time, ``[tau0, tau]`` the survival
    window; ``omega_b + omega_s`` must equal 1; ``eta``, ``rho``, ``gamma``
    are the exponents of the censoring / survival / distribution factors of
    the weight function Q(t).
    """

    tau0: float
    tau_b: float
    tau: float
    omega_b: float = 0.5
    omega_s: float = 0.5
    eta: float = 0.0
    rho: float = 0.0
    gamma: float = 0.0
    variance_mode: str = "pooled"

    def __post_init__(self):
        if not 0 <= self.tau0 < self.tau:
            raise ConfigError(f"need 0 <= tau0 < tau, got tau0={self.tau0}, tau={self.tau}")
        if not 0 < self.tau_b <= self.tau:
            raise ConfigError(f"need 0 < tau_b <= tau, got tau_b={self.tau_b}, tau={self.tau}")
        if not (max(self.tau0, self.tau_b) < self.tau or self.tau_b == self.tau):
            raise ConfigError("need max(tau0, tau_b) < tau or tau_b == tau")
        if not (0 < self.omega_b < 1 and 0 < self.omega_s < 1):
            raise ConfigError("omega_b and omega_s must lie in (0, 1)")
        if abs(self.omega_b + self.omega_s - 1.0) > 1e-9:
            raise ConfigError(f"omega_b + omega_s must equal 1, got {self.omega_b + self.omega_s}")
        if min(self.eta, self.rho, self.gamma) < 0:
            raise ConfigError("eta, rho, gamma must be nonnegative")
        if self.variance_mode not in ("pooled", "unpooled"):
            raise ConfigError(f"variance_mode must be 'pooled' or 'unpooled', got {self.variance_mode!r}")

    @property
    def tau_max(self) -> float:
        return max(self.tau0, self.tau_b)

    def to_dict(self) -> dict:
        return {
            "tau0": self.tau0, "tau_b": self.tau_b, "tau": self.tau,
            "omega_b": self.omega_b, "omega_s": self.omega_s,
            "eta": self.eta, "rho": self.rho, "gamma": self.gamma,
            "variance_mode": self.variance_mode,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "StudyConfig":
        return cls(**d)


# ---------------------------------------------------------------------------
# CSV
# ---------------------------------------------------------------------------

def parse_csv(text) -> TrialDataset:
    """Parse CSV content (string or text stream) into a :class:`TrialDataset`.

    Raises
    ------
    SchemaError
        Header missing or lacking a required column.
    DataError
        Non-numeric cell or out-of-domain value; the message names the
        1-based data row.
    InsufficientDataError
        Fewer than 2 records in either group.
    """
    stream = io.StringIO(text) if isinstance(text, str) else text
    reader = csv.reader(stream)
    try:
        header = next(reader)
    except StopIteration:
        raise SchemaError("empty input: header row required") from None
    names = [h.strip().lower() for h in header]
    col = {}
    for want in _COLUMNS:
        if want not in names:
            raise SchemaError(f"missing column {want!r}")
        col[want] = names.index(want)

    rows = {name: [] for name in _COLUMNS}
    for i, raw in enumerate(reader, start=1):
        if not raw or all(not cell.strip() for cell in raw):
            continue
        for name in _COLUMNS:
            j = col[name]
            if j >= len(raw):
                raise DataError(f"missing value for column {name!r}", row=i)
            cell = raw[j].strip()
            try:
                value = float(cell)
            except ValueError:
                raise DataError(f"non-numeric value {cell!r} in column {name!r}", row=i) from None
            rows[name].append(value)
        t = rows["time"][-1]
        if not t > 0:
            raise DataError(f"time must be positive, got {t}", row=i)
        for name in ("status", "binary", "treat"):
            v = rows[name][-1]
            if v not in (0.0, 1.0):
                raise DataError(f"{name} must be 0 or 1, got {v}", row=i)
    return TrialDataset(rows["time"], rows["status"], rows["binary"], rows["treat"])


def to_csv(ds: TrialDataset) -> str:
    """Serialize a dataset back to CSV (lossless up to row order)."""
    out = ["time,status,binary,treat"]
    for t, s, b, g in zip(ds.time, ds.status, ds.binary, ds.group):
        out.append(f"{float(t)!r},{int(s)},{int(b)},{int(g)}")
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# Assumption checks
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CheckResult:
    name: str
    group: int
    passed: bool
    value: float | None

    def __str__(self) -> str:
        state = "ok" if self.passed else "FAIL"
        val = "n/a" if self.value is None else f"{self.value:g}"
        return f"[{state}] group {self.group}: {self.name} = {val}"


@dataclass(frozen=True)
class ValidationReport:
    """Outcome of the positivity / support checks behind the test statistic.

    The report is advisory-with-block: a failed check marks the report
    blocking but nothing is clipped or patched silently. Callers decide
    whether to proceed.
    """

    checks: tuple[CheckResult, ...]

    @property
    def blocking(self) -> bool:
        return any(not c.passed for c in self.checks)

    @property
    def failures(self) -> tuple[CheckResult, ...]:
        return tuple(c for c in self.checks if not c.passed)

    def summary(self) -> str:
        return "\n".join(str(c) for c in self.checks)


def validate(ds: TrialDataset, cfg: StudyConfig) -> ValidationReport:
    """Check, per group, the positivity assumptions at the horizon ``tau``.

    Flags: estimated survival, censoring survival and responder survival
    positive at tau; at least one responder; at least one subject still at
    risk at tau (observation >= tau). Pure and deterministic.
    """
    checks = []
    for g in (0, 1):
        t, s, b = ds.group_arrays(g)
        surv = km.km_estimate(t, s)
        cens = km.censoring_km(t, s)
        s_tau = float(surv(cfg.tau))
        g_tau = float(cens(cfg.tau))
        n_resp = int(b.sum())
        at_risk = int(np.count_nonzero(t >= cfg.tau))
        if n_resp > 0:
            sx_tau = float(km.km_estimate(t[b == 1], s[b == 1])(cfg.tau))
        else:
            sx_tau = None
        checks += [
            CheckResult("survival_at_tau", g, s_tau > 0, s_tau),
            CheckResult("censoring_survival_at_tau", g, g_tau > 0, g_tau),
            CheckResult("responder_survival_at_tau", g,
                        sx_tau is not None and sx_tau > 0, sx_tau),
            CheckResult("has_responders", g, n_resp >= 1, float(n_resp)),
            CheckResult("at_risk_at_tau", g, at_risk >= 1, float(at_risk)),
        ]
    return ValidationReport(tuple(checks))
