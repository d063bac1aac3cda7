"""Dispersion relations of the Darrieus-Landau instability and growth fits."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy import stats

from .geometry import centroid, periodic_derivative


@dataclass(frozen=True)
class DispersionResult:
    sigma: float
    k: float
    theta: float
    lambda_c: float
    roots: tuple
    coefficients: tuple

    @property
    def residual(self) -> float:
        a, b, c = self.coefficients
        return max(abs(a * r * r + b * r + c) for r in self.roots)

    def as_record(self) -> dict:
        return {
            "theta": self.theta,
            "k": self.k,
            "lambda_c": self.lambda_c,
            "sigma": self.sigma,
            "roots": [[complex(r).real, complex(r).imag] for r in self.roots],
            "residual": self.residual,
        }


def _quadratic_roots(a, b, c):
    disc = complex(b * b - 4.0 * a * c)
    sq = np.sqrt(disc)
    if disc.imag == 0.0 and disc.real >= 0.0:
        sq = sq.real
        q = -0.5 * (b + np.copysign(sq, b))
        r1 = q / a
        r2 = c / q if q != 0.0 else 0.0
        return tuple(sorted((float(r1), float(r2)), reverse=True))
    r1 = (-b + sq) / (2.0 * a)
    r2 = (-b - sq) / (2.0 * a)
    return (complex(r1), complex(r2))


def _check(theta, k):
    if k <= 0:
        raise ValueError("wavenumber must be positive")
    if theta < 1:
        raise ValueError("theta must be >= 1")


def markstein_coefficient(theta: float, lambda_c: float) -> float:
    return (theta - 1.0) * lambda_c / (2.0 * np.pi * (theta + 1.0))


def stabilized_growth_rate(theta: float, k: float, lambda_c: float = 0.0) -> DispersionResult:
    """Roots of the stretch-corrected DL quadratic; ``sigma`` is the larger real part."""
    _check(theta, k)
    if lambda_c < 0:
        raise ValueError("lambda_c must be >= 0")
    lam = markstein_coefficient(theta, lambda_c)
    a = theta + 1.0
    b = 2.0 * theta * k * (1.0 + lam * (theta + 1.0) * k / (2.0 * theta))
    c = -theta * (theta - 1.0) * k * k
    if lam:
        c *= 1.0 - lam * (theta + 1.0) * k / (theta - 1.0)
    roots = _quadratic_roots(a, b, c)
    sigma = max(complex(r).real for r in roots)
    return DispersionResult(sigma, k, theta, lambda_c, roots, (a, b, c))


def dl_growth_rate(theta: float, k: float) -> DispersionResult:
    """Darrieus-Landau growth rate of a planar front (no stretch)."""
    return stabilized_growth_rate(theta, k, 0.0)


def dl_closed_form(theta: float, k: float) -> float:
    return k * (np.sqrt(theta**3 + theta**2 - theta) - theta) / (theta + 1.0)


def small_expansion_rate(theta: float, k: float) -> float:
    """Growth rate of the potential-flow (small expansion) model."""
    if theta < 1:
        raise ValueError("theta must be >= 1")
    return 0.5 * (theta - 1.0) * k


def cutoff_wavenumber(lambda_c: float) -> float:
    return 2.0 * np.pi / lambda_c


# -- expanding circle ----------------------------------------------------------

def circle_mode_matrix(theta: float, m: int, radius: float) -> np.ndarray:
    """Linearised front equations for mode ``m`` on a circle of radius ``radius``.

    State is ``(a, P, W)``: radial amplitude and the ``cos(m theta)``
    coefficients of ``Psi`` and of the vorticity trace, for an infinitely
    thin laminar front whose base state has the burnt gas at rest.
    """
    th, R = theta, radius
    c = (th - 1.0) / (th + 1.0)
    va, vp, vw = c * th * (m - 1) / R, c * m / R, -c
    g = th * m / R
    return np.array([
        [va, vp, vw],
        [-th * va, -th * vp, th * (1.0 - vw)],
        [g * (2.0 * va / (th - 1.0) - (m - 1) / R), g * 2.0 * vp / (th - 1.0),
         g * (1.0 + 2.0 * vw / (th - 1.0))],
    ])


def circle_growth_rate(theta: float, m: int, radius: float) -> float:
    """Largest growth rate of mode ``m`` on a frozen circle, excluding the
    gauge mode that leaves the front shape unchanged."""
    w, v = np.linalg.eig(circle_mode_matrix(theta, m, radius))
    physical = [wi.real for wi, vi in zip(w, v.T) if abs(vi[0]) > 1e-8 * np.abs(vi).max()]
    return max(physical)


def frankel_circle_rate(theta: float, m: int, radius: float) -> float:
    """Growth rate of mode ``m`` under the 2D potential-flow front law on a circle."""
    return 0.5 * (theta - 1.0) * (m - 1) / radius


# -- measurement ---------------------------------------------------------------

def mode_amplitudes(markers: np.ndarray, modes: Iterable[int] = range(1, 9),
                    center: Optional[Sequence[float]] = None) -> np.ndarray:
    """Amplitudes of ``cos/sin(m theta)`` in ``r(theta)`` about the centroid.

    Assumes the curve is star-shaped about the centre; integrals are taken
    spectrally in the marker parameter.
    """
    c = centroid(markers) if center is None else np.asarray(center, float)
    z = markers[:, 0] - c[0] + 1j * (markers[:, 1] - c[1])
    r = np.abs(z)
    theta = np.unwrap(np.angle(z))
    n = len(r)
    p = 2.0 * np.pi * np.arange(n) / n
    dtheta = periodic_derivative(theta - p, 1) + 1.0
    dp = 2.0 * np.pi / n
    out = []
    for m in modes:
        cm = np.sum(r * np.cos(m * theta) * dtheta) * dp / np.pi
        sm = np.sum(r * np.sin(m * theta) * dtheta) * dp / np.pi
        out.append(np.hypot(cm, sm))
    return np.array(out)


@dataclass(frozen=True)
class GrowthFit:
    sigma: float
    stderr: float
    intercept: float
    n_samples: int

    def within(self, target: float, n_std: float = 3.0) -> bool:
        return abs(self.sigma - target) <= n_std * self.stderr


def fit_growth_rate(times, amplitudes, window: Optional[tuple] = None,
                    min_samples: int = 10) -> GrowthFit:
    """Least-squares slope of ``ln(amplitude)`` against time."""
    t = np.asarray(times, float)
    a = np.asarray(amplitudes, float)
    if window is not None:
        sel = (t >= window[0]) & (t <= window[1])
        t, a = t[sel], a[sel]
    if len(t) < min_samples:
        raise ValueError(f"need at least {min_samples} samples in the fit window")
    if np.any(a <= 0):
        raise ValueError("amplitudes must be positive")
    y = np.log(a)
    if np.ptp(y) == 0.0:
        return GrowthFit(0.0, 0.0, float(y[0]), len(t))
    res = stats.linregress(t, y)
    return GrowthFit(float(res.slope), float(res.stderr), float(res.intercept), len(t))
