"""Exception hierarchy for binsurv."""


class BinsurvError(Exception):
    """Base class for all binsurv errors."""


class SchemaError(BinsurvError):
    """CSV header is missing or malformed."""


class DataError(BinsurvError):
    """A data value is outside its domain (carries the offending row)."""

    def __init__(self, message, row=None):
        super().__init__(message if row is None else f"row {row}: {message}")
        self.row = row


class InsufficientDataError(BinsurvError):
    """Too few observations to form an estimate (e.g. <2 per group, no responders)."""


class ConfigError(BinsurvError):
    """Invalid study configuration, weight specification, or scenario."""


class AssumptionError(BinsurvError):
    """A positivity assumption failed at a point where the computation needs it."""


class SupportExhaustionError(AssumptionError):
    """Censoring survival reached zero inside the evaluation window."""


class DegenerateVarianceError(BinsurvError):
    """A variance estimate is zero or numerically negligible."""


class SimulationError(BinsurvError):
    """A simulation run is unusable (e.g. too many excluded replicates)."""


class UnsupportedModelError(BinsurvError):
    """The requested theoretical quantity is not defined for this model."""
