"""Closed marker curves and differential geometry along them.

Markers are sampled at equispaced values of a periodic parameter
``p = 2*pi*j/N``; all derivatives are taken spectrally in ``p`` and converted
to arc length with the local speed ``|dr/dp|``.  The curve is traversed
counterclockwise around the burnt gas, so the unit normal ``n = i*t`` (the
tangent rotated by +90 degrees) points into the burnt region and the
curvature of a circle is ``+1/R``.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Any, Iterable, Optional, Sequence

import numpy as np
from scipy.interpolate import CubicSpline

MIN_MARKERS = 16
DUPLICATE_SPACING = 1e-10
MAX_SPACING_RATIO = 4.0


class GeometryError(ValueError):
    """Raised for curves that violate the marker-curve contract."""


@dataclass
class FrontState:
    """Closed front curve with the surface fields it carries.

    ``omega`` holds the evolved vorticity variable ``Omega - u_en/(theta-1)``;
    without external turbulence it is the vorticity-mode trace itself.
    """

    markers: np.ndarray
    psi: np.ndarray
    omega: np.ndarray
    tau: float = 0.0
    solved: Optional[Any] = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        self.markers = np.ascontiguousarray(self.markers, dtype=float)
        if self.markers.ndim != 2 or self.markers.shape[1] != 2:
            raise GeometryError("markers must have shape (N, 2)")
        n = self.markers.shape[0]
        self.psi = np.ascontiguousarray(np.broadcast_to(np.asarray(self.psi, dtype=float), (n,)))
        self.omega = np.ascontiguousarray(np.broadcast_to(np.asarray(self.omega, dtype=float), (n,)))
        self.tau = float(self.tau)

    @property
    def n_markers(self) -> int:
        return self.markers.shape[0]

    @property
    def z(self) -> np.ndarray:
        return self.markers[:, 0] + 1j * self.markers[:, 1]

    def replace(self, **changes) -> "FrontState":
        changes.setdefault("solved", None)
        return replace(self, **changes)


@dataclass(frozen=True)
class GeometryFrame:
    positions: np.ndarray
    normal: np.ndarray
    tangent: np.ndarray
    curvature: np.ndarray
    arclength: np.ndarray
    segment_lengths: np.ndarray
    speed: np.ndarray
    weights: np.ndarray
    perimeter: float

    @property
    def n(self) -> int:
        return self.positions.shape[0]

    @property
    def z(self) -> np.ndarray:
        return self.positions[:, 0] + 1j * self.positions[:, 1]

    @property
    def nz(self) -> np.ndarray:
        return self.normal[:, 0] + 1j * self.normal[:, 1]

    @property
    def dp(self) -> float:
        return 2.0 * np.pi / self.n


# -- spectral helpers --------------------------------------------------------

def wavenumbers(n: int) -> np.ndarray:
    return np.fft.fftfreq(n, 1.0 / n)


def periodic_derivative(f: np.ndarray, order: int = 1) -> np.ndarray:
    """Spectral derivative of periodic samples with respect to ``p``."""
    f = np.asarray(f)
    n = f.shape[0]
    k = wavenumbers(n)
    mult = (1j * k) ** order
    if order % 2 == 1 and n % 2 == 0:
        mult[n // 2] = 0.0
    out = np.fft.ifft(mult * np.fft.fft(f))
    return out if np.iscomplexobj(f) else out.real


def periodic_antiderivative(f: np.ndarray) -> np.ndarray:
    """Running integral from ``p = 0`` of periodic samples ``f``."""
    n = f.shape[0]
    k = wavenumbers(n)
    fh = np.fft.fft(f)
    gh = np.zeros_like(fh)
    nz = k != 0
    gh[nz] = fh[nz] / (1j * k[nz])
    if n % 2 == 0:
        gh[n // 2] = 0.0
    g = np.fft.ifft(gh)
    g = g - g[0]
    p = np.arange(n) * 2.0 * np.pi / n
    out = fh[0] / n * p + g
    return out if np.iscomplexobj(f) else out.real


def fourier_interpolate(f: np.ndarray, p: np.ndarray) -> np.ndarray:
    """Evaluate the trigonometric interpolant of samples ``f`` at ``p``."""
    n = f.shape[0]
    fh = np.fft.fft(f) / n
    k = wavenumbers(n)
    p = np.asarray(p, dtype=float)
    if n % 2 == 0:
        ny = n // 2
        keep = np.arange(n) != ny
        out = np.exp(1j * np.outer(p, k[keep])) @ fh[keep]
        out = out + fh[ny] * np.cos(ny * p)
    else:
        out = np.exp(1j * np.outer(p, k)) @ fh
    return out if np.iscomplexobj(f) else out.real


def spectral_filter(f: np.ndarray, keep: float) -> np.ndarray:
    """Zero all modes with ``|k| > keep * N/2``."""
    n = f.shape[0]
    k = np.abs(wavenumbers(n))
    fh = np.fft.fft(f)
    fh[k > keep * (n // 2)] = 0.0
    out = np.fft.ifft(fh)
    return out if np.iscomplexobj(f) else out.real


# -- curve predicates ----------------------------------------------------------

def signed_area(markers: np.ndarray) -> float:
    """Enclosed area, positive for counterclockwise curves (spectral quadrature)."""
    x, y = markers[:, 0], markers[:, 1]
    dp = 2.0 * np.pi / len(x)
    return 0.5 * float(np.sum(x * periodic_derivative(y) - y * periodic_derivative(x))) * dp


def centroid(markers: np.ndarray) -> np.ndarray:
    """Area centroid of the enclosed region."""
    x, y = markers[:, 0], markers[:, 1]
    dp = 2.0 * np.pi / len(x)
    a = signed_area(markers)
    cx = 0.5 * np.sum(x * x * periodic_derivative(y)) * dp / a
    cy = -0.5 * np.sum(y * y * periodic_derivative(x)) * dp / a
    return np.array([cx, cy])


def chord_lengths(markers: np.ndarray) -> np.ndarray:
    return np.linalg.norm(np.roll(markers, -1, axis=0) - markers, axis=1)


def is_simple(markers: np.ndarray) -> bool:
    """Segment-pair intersection scan over all non-adjacent segments."""
    a = markers
    b = np.roll(markers, -1, axis=0)
    n = a.shape[0]

    def orient(p, q, r):
        return ((q[..., 0] - p[..., 0]) * (r[..., 1] - p[..., 1])
                - (q[..., 1] - p[..., 1]) * (r[..., 0] - p[..., 0]))

    A, B = a[:, None, :], b[:, None, :]
    C, D = a[None, :, :], b[None, :, :]
    d1 = orient(C, D, A)
    d2 = orient(C, D, B)
    d3 = orient(A, B, C)
    d4 = orient(A, B, D)
    cross = (d1 * d2 < 0) & (d3 * d4 < 0)
    i, j = np.indices((n, n))
    gap = np.abs(i - j)
    cross &= (gap > 1) & (gap < n - 1)
    return not bool(cross.any())


# -- frames ------------------------------------------------------------------

def _check_markers(markers: np.ndarray) -> None:
    n = markers.shape[0]
    if n < MIN_MARKERS:
        raise GeometryError(f"need at least {MIN_MARKERS} markers, got {n}")
    if np.min(chord_lengths(markers)) < DUPLICATE_SPACING:
        raise GeometryError("duplicate adjacent markers")


def build_frame(front) -> GeometryFrame:
    """Normals, tangents, curvature and arc length of a marker curve.

    Accepts a :class:`FrontState` or a bare ``(N, 2)`` marker array.
    """
    markers = front.markers if isinstance(front, FrontState) else np.asarray(front, dtype=float)
    _check_markers(markers)
    n = markers.shape[0]
    z = markers[:, 0] + 1j * markers[:, 1]
    dz = periodic_derivative(z, 1)
    d2z = periodic_derivative(z, 2)
    speed = np.abs(dz)
    t = dz / speed
    nrm = 1j * t
    kappa = np.imag(np.conj(dz) * d2z) / speed**3
    dp = 2.0 * np.pi / n
    s = periodic_antiderivative(speed)
    return GeometryFrame(
        positions=markers.copy(),
        normal=np.column_stack([nrm.real, nrm.imag]),
        tangent=np.column_stack([t.real, t.imag]),
        curvature=kappa,
        arclength=s,
        segment_lengths=chord_lengths(markers),
        speed=speed,
        weights=dp * speed,
        perimeter=float(dp * speed.sum()),
    )


def surface_derivative(field: np.ndarray, frame: GeometryFrame) -> np.ndarray:
    field = np.asarray(field)
    if field.shape[0] != frame.n:
        raise ValueError("field length does not match marker count")
    return periodic_derivative(field, 1) / frame.speed


def surface_laplacian(field: np.ndarray, frame: GeometryFrame) -> np.ndarray:
    return surface_derivative(surface_derivative(field, frame), frame)


def derivative_matrix(frame: GeometryFrame) -> np.ndarray:
    """Dense matrix of :func:`surface_derivative`."""
    n = frame.n
    mult = 1j * wavenumbers(n)
    if n % 2 == 0:
        mult[n // 2] = 0.0
    dp = np.fft.ifft(mult[:, None] * np.fft.fft(np.eye(n), axis=0), axis=0).real
    return dp / frame.speed[:, None]


def stretch(frame: GeometryFrame, u_t: np.ndarray, v_s: np.ndarray) -> np.ndarray:
    """Front stretch ``d(u_t)/ds + kappa * V_s``.

    ``u_t`` is the fuel-side tangential velocity and ``v_s`` the lab-frame
    normal front speed.  Galilean invariant; an expanding circle gives
    ``V_s / R``.
    """
    return surface_derivative(u_t, frame) + frame.curvature * np.asarray(v_s)


# -- resampling --------------------------------------------------------------

def spacing_ratio(markers: np.ndarray) -> float:
    h = chord_lengths(markers)
    return float(h.max() / h.min())


def _invert_arclength(frame: GeometryFrame, targets: np.ndarray) -> np.ndarray:
    n = frame.n
    p_nodes = np.arange(n) * frame.dp
    p = np.interp(targets, np.append(frame.arclength, frame.perimeter),
                  np.append(p_nodes, 2.0 * np.pi))
    speed_hat = frame.speed
    s_fluct = frame.arclength - frame.perimeter / (2.0 * np.pi) * p_nodes
    for _ in range(30):
        s = frame.perimeter / (2.0 * np.pi) * p + fourier_interpolate(s_fluct, p)
        ds = fourier_interpolate(speed_hat, p)
        step = (s - targets) / ds
        p = p - step
        if np.max(np.abs(step)) < 1e-15:
            break
    return p


def resample(front: FrontState, target_spacing: Optional[float] = None,
             n_markers: Optional[int] = None, method: str = "spectral") -> FrontState:
    """Redistribute markers uniformly in arc length.

    Marker 0 stays fixed.  ``method="spectral"`` interpolates positions and
    fields with the trigonometric interpolant of the current samples;
    ``method="cubic"`` uses periodic cubic splines in arc length.
    """
    frame = build_frame(front)
    if n_markers is None:
        if target_spacing is None:
            n_markers = front.n_markers
        else:
            n_markers = int(round(frame.perimeter / target_spacing))
            n_markers += n_markers % 2
    if n_markers < MIN_MARKERS:
        raise GeometryError(f"target spacing gives {n_markers} < {MIN_MARKERS} markers")
    targets = np.arange(n_markers) * frame.perimeter / n_markers
    z = front.z
    if method == "spectral":
        p = _invert_arclength(frame, targets)
        zn = fourier_interpolate(z, p)
        psi = fourier_interpolate(front.psi, p)
        omega = fourier_interpolate(front.omega, p)
    elif method == "cubic":
        s = np.append(frame.arclength, frame.perimeter)

        def interp(f):
            return CubicSpline(s, np.append(f, f[0]), bc_type="periodic")(targets)

        zn = interp(z.real) + 1j * interp(z.imag)
        psi, omega = interp(front.psi), interp(front.omega)
    else:
        raise ValueError(f"unknown resampling method {method!r}")
    return front.replace(markers=np.column_stack([zn.real, zn.imag]), psi=psi, omega=omega)


def ensure_regular(front: FrontState) -> FrontState:
    """Force a resample when marker spacing has degenerated."""
    if spacing_ratio(front.markers) > MAX_SPACING_RATIO:
        return resample(front)
    return front


def filter_front(front: FrontState, keep: float) -> FrontState:
    """Spectral filter of positions and fields in the marker parameter."""
    z = spectral_filter(front.z, keep)
    return front.replace(markers=np.column_stack([z.real, z.imag]),
                         psi=spectral_filter(front.psi, keep),
                         omega=spectral_filter(front.omega, keep))


# -- constructors ------------------------------------------------------------

def circle_markers(radius: float, n: int, center: Sequence[float] = (0.0, 0.0),
                   modes: Iterable[Sequence[float]] = ()) -> np.ndarray:
    """Markers of ``r(theta) = radius + sum a*cos(m*(theta - phase))``.

    Markers sit at equispaced polar angles, which is uniform in arc length
    only for the unperturbed circle.
    """
    theta = 2.0 * np.pi * np.arange(n) / n
    r = np.full(n, float(radius))
    for m, amp, phase in modes:
        r += amp * np.cos(m * (theta - phase))
    return np.column_stack([center[0] + r * np.cos(theta), center[1] + r * np.sin(theta)])


def polar_graph_curvature(radius, eps, m, theta):
    """Exact curvature of ``r = radius*(1 + eps*cos(m*theta))``."""
    r = radius * (1 + eps * np.cos(m * theta))
    r1 = -radius * eps * m * np.sin(m * theta)
    r2 = -radius * eps * m**2 * np.cos(m * theta)
    return (r**2 + 2 * r1**2 - r * r2) / (r**2 + r1**2) ** 1.5
