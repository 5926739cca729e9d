"""Power-law exponent extraction by least squares in log-log coordinates."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class FitError(ValueError):
    """Contract violation: unusable data for a log-log fit."""


@dataclass(frozen=True)
class PowerLawFit:
    """y = prefactor * x^exponent on the window (x_lo, x_hi)."""

    exponent: float
    prefactor: float
    r_squared: float
    window: tuple
    n_points: int

    def __post_init__(self):
        if self.prefactor <= 0.0:
            raise FitError("prefactor must be positive")


def powerlaw_fit(xs, ys, window=None) -> PowerLawFit:
    """Least-squares line in log-log coordinates over the given window.

    Requires at least 4 strictly positive points inside the window.
    """
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.shape != ys.shape or xs.ndim != 1:
        raise FitError("xs and ys must be 1D arrays of equal length")
    if window is None:
        window = (float(xs.min()), float(xs.max()))
    lo, hi = float(window[0]), float(window[1])
    mask = (xs >= lo) & (xs <= hi)
    x, y = xs[mask], ys[mask]
    if np.any(x <= 0.0) or np.any(y <= 0.0):
        raise FitError("power-law fit requires strictly positive data")
    if x.size < 4:
        raise FitError(f"need >= 4 points inside the window, got {x.size}")

    lx, ly = np.log(x), np.log(y)
    A = np.stack([lx, np.ones_like(lx)], axis=1)
    coef, *_ = np.linalg.lstsq(A, ly, rcond=None)
    slope, intercept = float(coef[0]), float(coef[1])
    pred = A @ coef
    ss_res = float(np.sum((ly - pred) ** 2))
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else max(0.0, 1.0 - ss_res / ss_tot)
    return PowerLawFit(
        exponent=slope,
        prefactor=float(np.exp(intercept)),
        r_squared=min(1.0, r2),
        window=(lo, hi),
        n_points=int(x.size),
    )
