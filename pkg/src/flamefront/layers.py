"""Nystrom discretisation of the 2D logarithmic single and double layers.

Kernels, with ``d = r_s - r`` and ``n`` the marker normal (pointing into the
burnt gas, i.e. into the enclosed region):

* single layer ``ln(|d| / ell)``, integrated with Kress' periodic product
  rule so the logarithmic singularity is handled analytically;
* double layer ``n(r_s) . d / |d|^2``, smooth on the curve with the limit
  ``-kappa/2`` on the diagonal.

With this orientation a unit dipole density integrates to ``-2*pi`` inside
the curve, ``-pi`` on it and ``0`` outside.

Green's representation of a harmonic function ``f`` with normal derivative
``f_n = n . grad f`` reads (``gamma`` = 2*pi, pi, 0 for probe inside / on /
outside the domain of harmonicity)::

    interior domain:  gamma f(r) = -int f K dS + int ln|d| f_n dS
    exterior domain:  gamma f(r) =  int f K dS - int ln|d| f_n dS + 2*pi*f_inf

where ``f_inf`` is the constant left after removing ``m*ln|r - r_c|``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.linalg import circulant

from .geometry import GeometryFrame, GeometryError, centroid, is_simple


@dataclass(frozen=True)
class LayerOperators:
    single_layer: np.ndarray
    double_layer: np.ndarray
    weights: np.ndarray
    frame: GeometryFrame
    length_scale: float
    center: np.ndarray

    def net_flux_coefficient(self, normal_derivative: np.ndarray) -> float:
        """Coefficient ``m`` of ``m*ln|r - r_c|`` carried by an exterior field."""
        return -float(self.weights @ normal_derivative) / (2.0 * np.pi)


def kress_weights(n: int) -> np.ndarray:
    """Circulant weights for ``int ln(4 sin^2((p-q)/2)) f(q) dq`` on ``n`` nodes."""
    if n % 2:
        raise GeometryError("Kress quadrature needs an even number of markers")
    half = n // 2
    delta = 2.0 * np.pi * np.arange(n) / n
    m = np.arange(1, half)
    col = -(2.0 * np.pi / half) * (np.cos(np.outer(delta, m)) / m).sum(axis=1)
    col -= np.pi / half**2 * np.cos(half * delta)
    return circulant(col)


def default_length_scale(frame: GeometryFrame) -> float:
    """Kernel length keeping the scaled log capacity of the curve >= 1.

    The logarithmic capacity of a connected curve lies between diam/4 and
    diam/2, so ``ell = diam/(4e)`` keeps the single layer invertible.
    """
    pts = frame.positions
    c = pts.mean(axis=0)
    diam = 2.0 * np.max(np.linalg.norm(pts - c, axis=1))
    return diam / (4.0 * np.e)


def assemble_layers(frame: GeometryFrame, length_scale: Optional[float] = 1.0,
                    check_simple: bool = True) -> LayerOperators:
    """Dense single- and double-layer matrices on the markers of ``frame``.

    ``length_scale=None`` selects :func:`default_length_scale`.
    """
    n = frame.n
    if n < 16:
        raise GeometryError("need at least 16 markers")
    if check_simple and not is_simple(frame.positions):
        raise GeometryError("curve is not simple")
    if length_scale is None:
        length_scale = default_length_scale(frame)
    z = frame.z
    diff = z[None, :] - z[:, None]          # r_s - r_i, source index last
    i = np.arange(n)
    dist = np.abs(diff)
    dist[i, i] = 1.0
    p = frame.dp * i
    dpq = p[:, None] - p[None, :]
    smooth = np.log(dist) - 0.5 * np.log(4.0 * np.sin(0.5 * dpq) ** 2 + np.eye(n))
    smooth[i, i] = np.log(frame.speed)
    single = (0.5 * kress_weights(n) + frame.dp * smooth) * frame.speed[None, :]
    single -= np.log(length_scale) * frame.weights[None, :]

    nz = frame.nz
    dbl = np.real(np.conj(nz)[None, :] * diff) / dist**2
    dbl[i, i] = -0.5 * frame.curvature
    dbl *= frame.weights[None, :]
    return LayerOperators(single, dbl, frame.weights.copy(), frame, float(length_scale),
                          centroid(frame.positions))


# -- off-curve evaluation ------------------------------------------------------

def _as_points(points) -> np.ndarray:
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    return pts[:, 0] + 1j * pts[:, 1]


def _min_distance_ok(frame: GeometryFrame, zt: np.ndarray, factor: float) -> np.ndarray:
    d = np.abs(zt[:, None] - frame.z[None, :]).min(axis=1)
    return d > factor * frame.segment_lengths.max()


def layer_potential(operators: LayerOperators, dipole: np.ndarray, source: np.ndarray,
                    points) -> np.ndarray:
    """``int dipole K dS - int source ln(|d|/ell) dS`` at off-curve points."""
    frame = operators.frame
    zt = _as_points(points)
    diff = frame.z[None, :] - zt[:, None]
    r2 = np.abs(diff) ** 2
    k = np.real(np.conj(frame.nz)[None, :] * diff) / r2
    logk = 0.5 * np.log(r2) - np.log(operators.length_scale)
    w = operators.weights
    return (k * dipole[None, :] - logk * source[None, :]) @ w


def layer_gradient(operators: LayerOperators, dipole: np.ndarray, source: np.ndarray,
                   points) -> np.ndarray:
    """Gradient of :func:`layer_potential`, shape ``(M, 2)``."""
    frame = operators.frame
    zt = _as_points(points)
    diff = frame.z[None, :] - zt[:, None]
    r2 = np.abs(diff) ** 2
    ndot = np.real(np.conj(frame.nz)[None, :] * diff)
    nz = frame.nz[None, :]
    # grad_r of n.d/|d|^2 and of ln|d|
    g_dip = -nz / r2 + 2.0 * ndot * diff / r2**2
    g_src = -diff / r2
    g = (g_dip * dipole[None, :] - g_src * source[None, :]) @ operators.weights
    return np.column_stack([g.real, g.imag])


def eval_velocity_offfront(operators: LayerOperators, dipole: np.ndarray, source: np.ndarray,
                           point, min_spacings: float = 2.0) -> np.ndarray:
    """Velocity ``grad[(1/2pi)(D dipole - S source)]`` away from the curve.

    Points closer than ``min_spacings`` marker spacings to the curve are
    rejected because the smooth trapezoid rule loses accuracy there.
    """
    zt = _as_points(point)
    if not np.all(_min_distance_ok(operators.frame, zt, min_spacings)):
        raise ValueError("evaluation point too close to the curve")
    u = layer_gradient(operators, np.asarray(dipole, float), np.asarray(source, float), point)
    u /= 2.0 * np.pi
    return u[0] if np.ndim(point) == 1 else u


# -- Green identity checks ---------------------------------------------------------

@dataclass(frozen=True)
class HarmonicTest:
    """Analytic harmonic function for reconstruction checks.

    ``region`` is ``"interior"`` when the function is harmonic inside the
    curve, ``"exterior"`` when harmonic outside; exterior functions are
    ``log_coefficient * ln|r - log_center| + (decaying part)``.
    """

    value: Callable[[np.ndarray, np.ndarray], np.ndarray]
    gradient: Callable[[np.ndarray, np.ndarray], tuple]
    region: str = "interior"
    log_coefficient: float = 0.0
    log_center: Sequence[float] = (0.0, 0.0)
    name: str = ""


def _traces(test: HarmonicTest, frame: GeometryFrame):
    x, y = frame.positions[:, 0], frame.positions[:, 1]
    f = np.asarray(test.value(x, y), float)
    gx, gy = test.gradient(x, y)
    fn = frame.normal[:, 0] * gx + frame.normal[:, 1] * gy
    return f, fn


def _log_part(test: HarmonicTest, x, y):
    cx, cy = test.log_center
    val = test.log_coefficient * 0.5 * np.log((x - cx) ** 2 + (y - cy) ** 2)
    r2 = (x - cx) ** 2 + (y - cy) ** 2
    return val, test.log_coefficient * (x - cx) / r2, test.log_coefficient * (y - cy) / r2


def greens_identity_check(frame: GeometryFrame, test: HarmonicTest, probes_inside=(),
                          probes_outside=(), operators: Optional[LayerOperators] = None) -> dict:
    """Reconstruct ``test`` from its curve traces and report the mismatch.

    Returns the worst absolute error for each probe class (``inside``,
    ``curve``, ``outside``) and the overall ``max``.  Exterior functions are
    handled by subtracting their logarithmic part analytically and
    reconstructing the decaying remainder.
    """
    ops = operators if operators is not None else assemble_layers(frame)
    f, fn = _traces(test, frame)
    x, y = frame.positions[:, 0], frame.positions[:, 1]
    exterior = test.region == "exterior"
    if exterior:
        lv, lgx, lgy = _log_part(test, x, y)
        f = f - lv
        fn = fn - (frame.normal[:, 0] * lgx + frame.normal[:, 1] * lgy)
    sign = 1.0 if exterior else -1.0
    S, K = ops.single_layer, ops.double_layer
    out = {}

    # on the curve: pi f = sign*(K f - S f_n)
    recon = sign * (K @ f - S @ fn) / np.pi
    out["curve"] = float(np.max(np.abs(recon - f)))

    def off(points, gamma_here):
        pts = np.atleast_2d(np.asarray(points, float))
        if pts.size == 0:
            return 0.0
        vals = sign * layer_potential(ops, f, fn, pts) / (2.0 * np.pi)
        if gamma_here:
            want = np.asarray(test.value(pts[:, 0], pts[:, 1]), float)
            if exterior:
                want = want - _log_part(test, pts[:, 0], pts[:, 1])[0]
        else:
            want = np.zeros(len(pts))
        return float(np.max(np.abs(vals - want)))

    out["inside"] = off(probes_inside, not exterior)
    out["outside"] = off(probes_outside, exterior)
    out["max"] = max(out.values())
    return out
