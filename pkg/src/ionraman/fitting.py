"""Damped-cosine and power-law fits of simulated fluorescence data.

Both fits are scikit-learn style regressors (``fit``/``predict``/``get_params``)
with thin functional wrappers returning plain result records.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import least_squares
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_consistent_length, check_is_fitted, column_or_1d

MIN_SAMPLES = 50
MIN_PERIODS = 3


@dataclass(frozen=True)
class FitResult:
    rabi: float  # Omega_n0 in rad/s; P oscillates at 2 * rabi
    decay: float  # 1/s
    residual_rms: float
    converged: bool


@dataclass(frozen=True)
class PowerLawResult:
    gamma0: float
    exponent: float
    r_squared: float


def damped_cosine(t, rabi, decay):
    """``(1 + cos(2 rabi t) exp(-decay t)) / 2``."""
    t = np.asarray(t, dtype=float)
    return 0.5 * (1.0 + np.cos(2.0 * rabi * t) * np.exp(-decay * t))


def spectral_peak(t: np.ndarray, y: np.ndarray, pad: int = 8) -> float:
    """Angular frequency of the largest non-DC peak of a uniformly sampled signal."""
    y = y - y.mean()
    n = pad * len(y)
    amp = np.abs(np.fft.rfft(y, n=n))
    freqs = np.fft.rfftfreq(n, d=t[1] - t[0])
    # skip the DC lobe
    k = np.argmax(amp[pad:]) + pad
    return 2.0 * np.pi * freqs[k]


class DampedCosineFit(RegressorMixin, BaseEstimator):
    """Least-squares fit of ``P(t) = (1 + cos(2 Omega t) e^{-gamma t}) / 2``.

    The frequency is seeded from the spectral peak of ``P - 1/2``; the decay from
    a short grid of starting values, keeping the lowest cost.
    """

    def __init__(self, max_iter=200, xtol=1e-8, decay_starts=(0.0, 0.3, 1.0, 3.0)):
        self.max_iter = max_iter
        self.xtol = xtol
        self.decay_starts = decay_starts

    def fit(self, t, p):
        t = column_or_1d(np.asarray(t, dtype=float), warn=True)
        p = column_or_1d(np.asarray(p, dtype=float), warn=True)
        check_consistent_length(t, p)
        if len(t) < MIN_SAMPLES:
            raise ValueError(f"need at least {MIN_SAMPLES} samples, got {len(t)}")
        if np.any(np.diff(t) <= 0):
            raise ValueError("sample times must be strictly increasing")
        t0 = t[0]
        span = t[-1] - t0
        # dimensionless time on [0, 1]; makes the fit scale-equivariant
        tau = (t - t0) / span
        w0 = spectral_peak(tau, p - 0.5)
        if w0 / (2 * np.pi) < MIN_PERIODS:
            raise ValueError(f"data spans {w0 / (2 * np.pi):.2f} oscillation periods; need {MIN_PERIODS}")

        def resid(x):
            return damped_cosine(tau, 0.5 * x[0], x[1]) - p

        best = None
        for g0 in self.decay_starts:
            res = least_squares(
                resid,
                x0=[w0, g0],
                bounds=([0.0, 0.0], [np.inf, np.inf]),
                xtol=self.xtol,
                ftol=1e-15,
                gtol=1e-15,
                max_nfev=self.max_iter,
                x_scale=[w0, 1.0],
            )
            if best is None or res.cost < best.cost:
                best = res
        self.rabi_ = 0.5 * best.x[0] / span
        self.decay_ = best.x[1] / span
        self.residual_rms_ = float(np.sqrt(np.mean(best.fun**2)))
        self.converged_ = bool(best.success)
        self.t0_ = t0
        return self

    def predict(self, t):
        check_is_fitted(self, "rabi_")
        t = column_or_1d(np.asarray(t, dtype=float))
        return damped_cosine(t - self.t0_, self.rabi_, self.decay_)

    def result(self) -> FitResult:
        check_is_fitted(self, "rabi_")
        return FitResult(float(self.rabi_), float(self.decay_), self.residual_rms_, self.converged_)


class PowerLawFit(RegressorMixin, BaseEstimator):
    """Linear regression of ``log gamma`` on ``log(n0 + 1)``."""

    def fit(self, n0, gamma):
        n0 = column_or_1d(np.asarray(n0, dtype=float), warn=True)
        gamma = column_or_1d(np.asarray(gamma, dtype=float), warn=True)
        check_consistent_length(n0, gamma)
        if len(n0) < 3:
            raise ValueError(f"need at least 3 points, got {len(n0)}")
        if np.any(gamma <= 0):
            raise ValueError("decay constants must be positive for a log-log fit")
        if np.any(n0 < 0):
            raise ValueError("phonon numbers must be non-negative")
        x = np.log(n0 + 1.0)
        y = np.log(gamma)
        slope, intercept = np.polyfit(x, y, 1)
        ss_res = float(np.sum((y - (slope * x + intercept)) ** 2))
        ss_tot = float(np.sum((y - y.mean()) ** 2))
        self.exponent_ = float(slope)
        self.gamma0_ = float(np.exp(intercept))
        self.r_squared_ = 1.0 if ss_tot <= 1e-24 * len(y) else float(np.clip(1.0 - ss_res / ss_tot, 0.0, 1.0))
        return self

    def predict(self, n0):
        check_is_fitted(self, "exponent_")
        n0 = column_or_1d(np.asarray(n0, dtype=float))
        return self.gamma0_ * (n0 + 1.0) ** self.exponent_

    def result(self) -> PowerLawResult:
        check_is_fitted(self, "exponent_")
        return PowerLawResult(self.gamma0_, self.exponent_, self.r_squared_)


def fit_damped_cosine(traj, p=None, **kwargs) -> FitResult:
    """Fit a :class:`~ionraman.integrate.Trajectory` (or ``times, p_down`` arrays)."""
    if p is None:
        t, p = traj.times, traj.p_down
    else:
        t = traj
    return DampedCosineFit(**kwargs).fit(t, p).result()


def fit_power_law(points) -> PowerLawResult:
    """Fit ``gamma = gamma0 (n0 + 1)^k`` to ``[(n0, gamma), ...]``."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError("points must be a sequence of (n0, gamma) pairs")
    return PowerLawFit().fit(pts[:, 0], pts[:, 1]).result()


@dataclass(frozen=True)
class Envelope:
    times: np.ndarray  # time of each half-cycle extremum
    amplitude: np.ndarray  # |y| at that extremum
    collapse_time: float  # first extremum time with amplitude below threshold (inf if none)
    oscillations_before_collapse: float  # full periods resolved before collapse


def oscillation_envelope(t, y, threshold: float = 0.1) -> Envelope:
    """Half-cycle extrema of a zero-mean oscillation and its collapse point.

    The signal is cut at sign changes; each segment contributes its largest
    ``|y|``. Two half-cycles count as one oscillation.
    """
    t = column_or_1d(t)
    y = column_or_1d(y)
    check_consistent_length(t, y)
    sign = np.signbit(y)
    cuts = np.flatnonzero(sign[1:] != sign[:-1]) + 1
    segments = np.split(np.arange(len(y)), cuts)
    peak_idx = np.array([s[np.argmax(np.abs(y[s]))] for s in segments if len(s)])
    amp = np.abs(y[peak_idx])
    below = np.flatnonzero(amp < threshold)
    if below.size:
        k = int(below[0])
        collapse = float(t[peak_idx[k]])
    else:
        k = len(amp)
        collapse = float("inf")
    # the first segment starts at an extremum only if the signal starts at one; count it anyway
    return Envelope(t[peak_idx], amp, collapse, k / 2.0)
