"""Closed-form motion-error predictions and ripple fitting.

For small offsets the phase error of one window is a DC lag plus a ripple at
twice the fringe phase. The coefficients here are expressed against the true
phase of the window's first frame, ``phi_i = phi_0 - i*pi/2``. Because
``cos(2*phi_i) = (-1)**i * cos(2*phi_0)``, the ripple of a datum-corrected
frame flips sign from one window to the next; that alternation is exactly
what binomial averaging cancels.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .kinematics import binomial_weights, finite_difference
from .phase import TWO_PI, wrap_pi

MIN_FIT_PIXELS = 100


@dataclass(frozen=True)
class RippleDecomposition:
    dc: float
    cos2_amp: float
    sin2_amp: float
    residual_rms: float
    n_pixels: int = 0

    @property
    def harmonic_amp(self) -> float:
        return float(np.hypot(self.cos2_amp, self.sin2_amp))

    def evaluate(self, phi):
        return self.dc + self.cos2_amp * np.cos(2 * phi) + self.sin2_amp * np.sin(2 * phi)


def error_coefficients(steps_N: int, x_window: Sequence[float]) -> tuple[float, float, float]:
    """(dc, cos2, sin2) of the linearised error of one raw window."""
    x = [float(v) for v in x_window]
    if steps_N not in (3, 4):
        raise ValueError("steps_N must be 3 or 4")
    if len(x) != steps_N:
        raise ValueError(f"window must hold {steps_N} offsets, got {len(x)}")
    if steps_N == 4:
        dc = (x[0] + x[1] + x[2] + x[3]) / 4
        return dc, (x[1] - x[0] + x[3] - x[2]) / 4, 0.0
    dc = (x[0] + 2 * x[1] + x[2]) / 4
    return dc, (2 * x[1] - (x[0] + x[2])) / 4, (x[0] - x[2]) / 4


def predict_error(steps_N: int, x_window: Sequence[float], phi):
    """Predicted phase error of a raw window whose first-frame true phase is ``phi``."""
    dc, c2, s2 = error_coefficients(steps_N, x_window)
    return dc + c2 * np.cos(2 * np.asarray(phi)) + s2 * np.sin(2 * np.asarray(phi))


def predict_bsc_harmonic(steps_N: int, x_series: Sequence[float], K: int, i: int) -> tuple[float, float]:
    """Ripple coefficients (cos2, sin2) of the order-K output built from windows i..i+K.

    Coefficients refer to ``cos/sin(2*phi_i)``. At K=0 they reduce to
    :func:`error_coefficients`; each extra order adds one finite difference
    and one factor 1/2.
    """
    if steps_N not in (3, 4):
        raise ValueError("steps_N must be 3 or 4")
    if K < 0:
        raise ValueError("K must be >= 0")
    if i < 0 or i + K + steps_N > len(x_series):
        raise ValueError(f"series of length {len(x_series)} too short for K={K}, i={i}, N={steps_N}")
    scale = (-1.0) ** K / 2.0 ** (K + 2)
    d = lambda order, j: finite_difference(x_series, order, j)  # noqa: E731
    if steps_N == 4:
        return scale * (d(K + 1, i) + d(K + 1, i + 2)), 0.0
    return -scale * d(K + 2, i), -scale * (d(K + 1, i) + d(K + 1, i + 1))


def predict_bsc_dc(steps_N: int, x_series: Sequence[float], K: int, i: int) -> float:
    """Binomially weighted mean of the per-window DC lags."""
    if i < 0 or i + K + steps_N > len(x_series):
        raise ValueError("series too short")
    w = binomial_weights(K)
    lags = [error_coefficients(steps_N, x_series[i + m:i + m + steps_N])[0] for m in range(K + 1)]
    return float(np.dot(w, lags))


def circular_error(measured, truth):
    """Phase error wrapped into (-pi, pi]."""
    return wrap_pi(np.asarray(measured) - np.asarray(truth))


def _coverage(phi: np.ndarray) -> float:
    """Length of the arc covered by the samples (2*pi minus the largest gap)."""
    p = np.sort(np.mod(phi, TWO_PI))
    if p.size < 2:
        return 0.0
    gaps = np.diff(np.concatenate([p, [p[0] + TWO_PI]]))
    return float(TWO_PI - gaps.max())


def fit_ripple(error_map, phase_map, mask=None) -> RippleDecomposition:
    """Least-squares fit of ``dc + a*cos(2*phi) + b*sin(2*phi)`` to a phase-error map."""
    err = np.asarray(error_map, dtype=float)
    phi = np.asarray(phase_map, dtype=float)
    if err.shape != phi.shape:
        raise ValueError("error and phase maps differ in shape")
    sel = np.isfinite(err) & np.isfinite(phi)
    if mask is not None:
        sel &= np.asarray(mask, dtype=bool)
    e, p = err[sel], phi[sel]
    if e.size < MIN_FIT_PIXELS:
        raise ValueError(f"only {e.size} valid pixels; need {MIN_FIT_PIXELS}")
    # the 2*phi basis only needs half a fringe period to be identifiable
    if _coverage(p) < np.pi:
        raise ValueError("phase coverage below half a fringe period; fit is rank-deficient")
    A = np.column_stack([np.ones_like(p), np.cos(2 * p), np.sin(2 * p)])
    coef, _, rank, _ = np.linalg.lstsq(A, e, rcond=None)
    if rank < 3:
        raise ValueError("rank-deficient ripple fit")
    resid = e - A @ coef
    return RippleDecomposition(float(coef[0]), float(coef[1]), float(coef[2]),
                               float(np.sqrt(np.mean(resid**2))), int(e.size))
