"""Kernel estimation of the joint responder-event hazard on a window.

Estimates lambda(t), the instantaneous rate of having the survival event at
t AND being a responder, given at risk at t, for one group:

    lambda_hat(t) = sum_k K_b(t, u_k) * dN_X(u_k) / Y(u_k)

where the u_k are the distinct responder event times inside the window,
dN_X counts responder events at u_k, Y is the group at-risk count, and K_b
is the Epanechnikov kernel K(z) = 0.75 (1 - z^2) on |z| <= 1, scaled by the
bandwidth b via z = (t - u) / b.

Within one bandwidth of the window edges the kernel mass outside the window
is unobservable, so a first-order moment-matched boundary kernel
(alpha + beta z) K(z), restricted to the visible z-range, replaces the
plain kernel. Boundary kernels can dip negative; pointwise negative hazard
values are clipped at zero.

The default bandwidth is (hi - lo) / 8 of the window, a deliberate global
simplification of local bandwidth selection; it is user-overridable.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError

__all__ = ["HazardEstimate", "hazard_xt", "epanechnikov"]

GRID_SIZE = 101


def epanechnikov(z):
    """Epanechnikov kernel 0.75 (1 - z^2) on |z| <= 1."""
    z = np.asarray(z, dtype=float)
    return np.where(np.abs(z) <= 1.0, 0.75 * (1.0 - z * z), 0.0)


def _moments(z):
    """Antiderivatives of z^j * K(z) for j = 0, 1, 2 (Epanechnikov K)."""
    z2 = z * z
    m0 = 0.75 * (z - z * z2 / 3.0)
    m1 = 0.75 * (z2 / 2.0 - z2 * z2 / 4.0)
    m2 = 0.75 * (z * z2 / 3.0 - z * z2 * z2 / 5.0)
    return m0, m1, m2


@dataclass(frozen=True)
class HazardEstimate:
    """Kernel hazard estimate on an evaluation grid inside the window."""

    grid: np.ndarray
    values: np.ndarray
    bandwidth: float

    def __post_init__(self):
        if np.any(self.values < 0):
            raise ValueError("hazard values must be nonnegative")

    def integral(self) -> float:
        """Trapezoidal integral of the estimate over its grid."""
        return float(np.trapezoid(self.values, self.grid))


def hazard_xt(ds, group: int, window: tuple[float, float],
              bandwidth: float | None = None,
              grid_size: int = GRID_SIZE) -> HazardEstimate:
    """Kernel estimate of the joint responder-event hazard for one group.

    Parameters
    ----------
    ds : TrialDataset
    group : {0, 1}
    window : (lo, hi)
        Estimation window, typically [tau0, tau_b]. Only responder events
        inside the window enter the sum; boundary-corrected kernels apply
        within one bandwidth of the edges.
    bandwidth : float, optional
        Kernel bandwidth; defaults to (hi - lo) / 8. A bandwidth wider than
        the window is shrunk to half the window length with a warning.
    grid_size : int
        Number of equally spaced evaluation points on the window.

    Returns
    -------
    HazardEstimate
        Nonnegative values on the grid; identically zero when the window
        contains no responder events (a valid estimate, not an error).
    """
    lo, hi = float(window[0]), float(window[1])
    if not hi > lo:
        raise ConfigError(f"window must be nonempty, got [{lo}, {hi}]")
    width = hi - lo
    if bandwidth is None:
        b = width / 8.0
    else:
        b = float(bandwidth)
        if b <= 0:
            raise ConfigError("bandwidth must be positive")
        if b > width:
            b = width / 2.0
            warnings.warn(
                f"bandwidth wider than the window; shrunk to {b:g}",
                stacklevel=2)

    t, s, x = ds.group_arrays(group)
    grid = np.linspace(lo, hi, grid_size)

    resp_event = (s == 1) & (x == 1) & (t >= lo) & (t <= hi)
    if not np.any(resp_event):
        return HazardEstimate(grid, np.zeros(grid_size), b)

    u, counts = np.unique(t[resp_event], return_counts=True)
    t_sorted = np.sort(t)
    at_risk = t.size - np.searchsorted(t_sorted, u, side="left")
    w = counts / at_risk

    # Moment-matched coefficients per evaluation point: support limits of z
    # are clamped by both the kernel ([-1, 1]) and the window.
    zhi = np.minimum(1.0, (grid - lo) / b)
    zlo = np.maximum(-1.0, (grid - hi) / b)
    m0l, m1l, m2l = _moments(zlo)
    m0h, m1h, m2h = _moments(zhi)
    m0 = m0h - m0l
    m1 = m1h - m1l
    m2 = m2h - m2l
    det = m0 * m2 - m1 * m1
    alpha = m2 / det
    beta = -m1 / det

    z = (grid[:, None] - u[None, :]) / b
    kern = (alpha[:, None] + beta[:, None] * z) * epanechnikov(z)
    values = kern @ w / b
    return HazardEstimate(grid, np.maximum(values, 0.0), b)
