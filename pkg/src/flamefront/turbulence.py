"""Frozen synthetic solenoidal velocity field built from random Fourier modes."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class TurbulenceField:
    """``u(x) = sum_j a_j cos(k_j . x + phase_j)`` with ``a_j . k_j = 0``.

    ``u_rms`` is the rms of the velocity magnitude, ``sqrt(sum |a_j|^2 / 2)``.
    """

    wavevectors: np.ndarray
    amplitudes: np.ndarray
    phases: np.ndarray
    u_rms: float = 0.0
    integral_scale: float = 1.0
    spectrum_exponent: float = -5.0 / 3.0
    seed: int | None = None
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        k = np.atleast_2d(np.asarray(self.wavevectors, float)).reshape(-1, 2)
        a = np.atleast_2d(np.asarray(self.amplitudes, float)).reshape(-1, 2)
        ph = np.asarray(self.phases, float).reshape(-1)
        if not (len(k) == len(a) == len(ph)):
            raise ValueError("mode arrays must have equal length")
        object.__setattr__(self, "wavevectors", k)
        object.__setattr__(self, "amplitudes", a)
        object.__setattr__(self, "phases", ph)

    @classmethod
    def from_modes(cls, wavevectors, amplitudes, phases, **kw) -> "TurbulenceField":
        """Build a field, projecting each amplitude onto the direction normal to its wavevector."""
        k = np.atleast_2d(np.asarray(wavevectors, float))
        a = np.atleast_2d(np.asarray(amplitudes, float))
        kk = np.sum(k * k, axis=1, keepdims=True)
        a = a - np.sum(a * k, axis=1, keepdims=True) * k / np.where(kk > 0, kk, 1.0)
        rms = float(np.sqrt(0.5 * np.sum(a * a)))
        kw.setdefault("u_rms", rms)
        return cls(k, a, phases, **kw)

    @classmethod
    def empty(cls) -> "TurbulenceField":
        return cls(np.zeros((0, 2)), np.zeros((0, 2)), np.zeros(0))

    @property
    def n_modes(self) -> int:
        return len(self.phases)

    def analytic_rms(self) -> float:
        return float(np.sqrt(0.5 * np.sum(self.amplitudes**2)))

    def eval(self, points) -> np.ndarray:
        """Velocity at ``points`` (shape ``(2,)`` or ``(P, 2)``)."""
        pts = np.asarray(points, float)
        single = pts.ndim == 1
        pts = np.atleast_2d(pts)
        if self.n_modes == 0:
            out = np.zeros_like(pts)
        else:
            c = np.cos(pts @ self.wavevectors.T + self.phases[None, :])
            out = c @ self.amplitudes
        return out[0] if single else out

    __call__ = eval

    def to_dict(self) -> dict:
        return {
            "wavevectors": self.wavevectors.tolist(),
            "amplitudes": self.amplitudes.tolist(),
            "phases": self.phases.tolist(),
            "u_rms": self.u_rms,
            "integral_scale": self.integral_scale,
            "spectrum_exponent": self.spectrum_exponent,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TurbulenceField":
        return cls(np.array(d["wavevectors"], float).reshape(-1, 2),
                   np.array(d["amplitudes"], float).reshape(-1, 2),
                   np.array(d["phases"], float), d["u_rms"], d["integral_scale"],
                   d["spectrum_exponent"], d["seed"])


def synthesize(u_rms: float, integral_scale: float = 1.0, n_modes: int = 64,
               spectrum_exponent: float = -5.0 / 3.0, seed: int | None = 0) -> TurbulenceField:
    """Random-mode field with energy spectrum ``E(k) ~ k**spectrum_exponent``.

    Wavenumbers are log-spaced over ``[2 pi/(8 L), 16 pi/L]``; each shell
    carries ``E(k) dk`` of energy split over two perpendicular modes with a
    random orientation and independent random phases.
    """
    if u_rms < 0:
        raise ValueError("u_rms must be >= 0")
    if n_modes < 1:
        raise ValueError("n_modes must be >= 1")
    if integral_scale <= 0:
        raise ValueError("integral_scale must be positive")
    rng = np.random.default_rng(seed)
    kmin, kmax = 2.0 * np.pi / (8.0 * integral_scale), 2.0 * np.pi * 8.0 / integral_scale
    # modes come in perpendicular pairs sharing a shell, which makes the
    # velocity covariance exactly isotropic
    n_shells = (n_modes + 1) // 2
    edges = np.geomspace(kmin, kmax, n_shells + 1)
    shell_k = np.sqrt(edges[:-1] * edges[1:])
    shell_e = shell_k**spectrum_exponent * np.diff(edges)
    base = rng.uniform(0.0, np.pi, n_shells)
    angle = np.column_stack([base, base + 0.5 * np.pi]).ravel()[:n_modes]
    kmag = np.repeat(shell_k, 2)[:n_modes]
    energy = np.repeat(shell_e, 2)[:n_modes]
    phases = rng.uniform(0.0, 2.0 * np.pi, n_modes)
    khat = np.column_stack([np.cos(angle), np.sin(angle)])
    k = kmag[:, None] * khat
    ahat = np.column_stack([-khat[:, 1], khat[:, 0]])
    mag = np.sqrt(energy)
    mag = mag * (u_rms / np.sqrt(0.5 * np.sum(mag**2))) if u_rms > 0 else np.zeros(n_modes)
    return TurbulenceField(k, ahat * mag[:, None], phases, float(u_rms), float(integral_scale),
                           float(spectrum_exponent), seed)


def sampled_rms(field: TurbulenceField, extent: float | None = None, n: int = 128) -> float:
    """Rms of the velocity magnitude over an ``n x n`` grid on ``[0, extent]^2``."""
    if extent is None:
        extent = 64.0 * field.integral_scale
    x = np.linspace(0.0, extent, n, endpoint=False)
    xx, yy = np.meshgrid(x, x)
    u = field.eval(np.column_stack([xx.ravel(), yy.ravel()]))
    return float(np.sqrt(np.mean(np.sum(u * u, axis=1))))


def divergence_fd(field: TurbulenceField, points, h: float = 1e-5) -> np.ndarray:
    """Centred finite-difference divergence at ``points``."""
    pts = np.atleast_2d(np.asarray(points, float))
    ex, ey = np.array([h, 0.0]), np.array([0.0, h])
    dux = (field.eval(pts + ex)[:, 0] - field.eval(pts - ex)[:, 0]) / (2.0 * h)
    duy = (field.eval(pts + ey)[:, 1] - field.eval(pts - ey)[:, 1]) / (2.0 * h)
    return dux + duy
