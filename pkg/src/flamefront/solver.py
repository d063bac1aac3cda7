"""Surface-field solve at one time level.

Unknowns are the fuel-side potential trace ``phi`` and the normal front
speed ``V_s``.  With inward normals and the operators of :mod:`layers` the
two boundary relations are::

    (pi - K) phi + S (1 - V_s - u_en - L*Y) = 0
    pi (th-1) Psi + pi (th+1) phi + (th-1) K (Psi + phi)
        + (th-1) S (Om + L*Y - 1) = 0

with ``L = (th-1) lambda_c / (2 pi (th+1))`` and ``Om`` the evolved
vorticity variable.  The second row is written multiplied through by
``th - 1`` so that ``theta = 1`` stays regular.  The stretch
``Y = d/ds(dphi/ds + u_e.t) + kappa V_s`` is linear in the unknowns, so the
default solve eliminates it exactly; a Picard variant is kept for
comparison.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.linalg import lu_factor, lu_solve
from scipy.linalg.lapack import dgecon

from .geometry import FrontState, GeometryFrame, build_frame, derivative_matrix
from .layers import LayerOperators, assemble_layers

logger = logging.getLogger(__name__)

CONDITION_LIMIT = 1e12
PICARD_TOL = 1e-9
PICARD_MAX_ITER = 25


class SolverError(RuntimeError):
    """The boundary system could not be solved reliably."""

    def __init__(self, message, markers=None):
        super().__init__(message)
        self.markers = markers


class StretchIterationError(SolverError):
    def __init__(self, message, last=None, markers=None):
        super().__init__(message, markers)
        self.last = last


@dataclass(frozen=True)
class PhysicalParams:
    theta: float
    lambda_c: float = 0.0

    def __post_init__(self):
        if self.theta < 1.0:
            raise ValueError("theta must be >= 1")
        if self.lambda_c < 0.0:
            raise ValueError("lambda_c must be >= 0")

    @property
    def markstein(self) -> float:
        """Stretch coefficient multiplying ``Y`` in the speed relation."""
        th = self.theta
        return (th - 1.0) * self.lambda_c / (2.0 * np.pi * (th + 1.0))


@dataclass
class TraceSolution:
    phi_minus: np.ndarray
    v_s: np.ndarray
    u_t: np.ndarray
    u_n: np.ndarray
    u_sq: np.ndarray
    stretch: np.ndarray
    u_en: np.ndarray
    residual: float
    y_iterations: int
    condition: float
    compatibility: float


def _rhs_parts(frame, ops, params, psi, omega, u_en, u_et, dmat):
    th = params.theta
    lam = params.markstein
    S, K = ops.single_layer, ops.double_layer
    n = frame.n
    eye = np.eye(n)
    d2 = dmat @ dmat
    kap = np.diag(frame.curvature)
    y_known = dmat @ u_et
    a11 = np.pi * eye - K
    a12 = -S
    b1 = -S @ (1.0 - u_en)
    a21 = np.pi * (th + 1.0) * eye + (th - 1.0) * K
    a22 = np.zeros((n, n))
    b2 = -(th - 1.0) * (np.pi * psi + K @ psi + S @ (omega - 1.0))
    # stretch operator pieces: Y = d2 phi + kap V_s + y_known
    stretch_ops = (d2, kap, y_known)
    return (a11, a12, b1, a21, a22, b2), stretch_ops, lam


def _factor(A, markers):
    lu = lu_factor(A, check_finite=True)
    rcond, info = dgecon(lu[0], np.linalg.norm(A, 1), norm="1")
    cond = np.inf if rcond == 0 else 1.0 / rcond
    if cond > CONDITION_LIMIT:
        raise SolverError(f"boundary system ill-conditioned (cond ~ {cond:.3e})", markers)
    return lu, cond


def solve_traces(front: FrontState, frame: GeometryFrame, operators: LayerOperators,
                 params: PhysicalParams, u_e_trace: Optional[np.ndarray] = None,
                 y_guess: Optional[np.ndarray] = None, method: str = "direct") -> TraceSolution:
    """Solve for ``phi_minus`` and ``V_s`` and fill the derived traces."""
    if method not in ("direct", "picard"):
        raise ValueError(f"unknown method {method!r}")
    n = frame.n
    if u_e_trace is None:
        u_e_trace = np.zeros((n, 2))
    u_e_trace = np.asarray(u_e_trace, float)
    u_en = np.einsum("ij,ij->i", u_e_trace, frame.normal)
    u_et = np.einsum("ij,ij->i", u_e_trace, frame.tangent)
    dmat = derivative_matrix(frame)
    blocks, (d2, kap, y_known), lam = _rhs_parts(
        frame, operators, params, front.psi, front.omega, u_en, u_et, dmat)
    a11, a12, b1, a21, a22, b2 = blocks
    S = operators.single_layer
    th = params.theta

    if method == "direct" or lam == 0.0:
        # substitute Y = d2 phi + kap V_s + y_known into both rows
        A = np.block([[a11 - lam * S @ d2, a12 - lam * S @ kap],
                      [a21 + (th - 1.0) * lam * S @ d2, a22 + (th - 1.0) * lam * S @ kap]])
        b = np.concatenate([b1 + lam * S @ y_known, b2 - (th - 1.0) * lam * S @ y_known])
        lu, cond = _factor(A, frame.positions)
        x = lu_solve(lu, b)
        residual = np.linalg.norm(A @ x - b) / max(np.linalg.norm(b), 1e-300)
        iterations = 1
    else:
        A = np.block([[a11, a12], [a21, a22]])
        lu, cond = _factor(A, frame.positions)
        y = np.zeros(n) if y_guess is None else np.asarray(y_guess, float)
        for iterations in range(1, PICARD_MAX_ITER + 1):
            b = np.concatenate([b1 + lam * S @ y, b2 - (th - 1.0) * lam * S @ y])
            x = lu_solve(lu, b)
            y_new = d2 @ x[:n] + kap @ x[n:] + y_known
            delta = np.max(np.abs(y_new - y))
            y = y_new
            if delta < PICARD_TOL:
                break
        else:
            raise StretchIterationError("stretch iteration did not converge", last=y,
                                        markers=frame.positions)
        b = np.concatenate([b1 + lam * S @ y, b2 - (th - 1.0) * lam * S @ y])
        residual = np.linalg.norm(A @ x - b) / max(np.linalg.norm(b), 1e-300)

    phi, v_s = x[:n], x[n:]
    u_t = dmat @ phi + u_et
    y = dmat @ u_t + frame.curvature * v_s
    u_n = 1.0 - v_s - lam * y
    # burnt-side normal flux of the potential mode must vanish on a closed curve
    compat = float(frame.weights @ (th - v_s - th * lam * y - (th - 1.0) * front.omega - u_en))
    return TraceSolution(phi_minus=phi, v_s=v_s, u_t=u_t, u_n=u_n, u_sq=u_t**2 + u_n**2,
                         stretch=y, u_en=u_en, residual=float(residual),
                         y_iterations=iterations, condition=float(cond), compatibility=compat)


def solve_front(front: FrontState, params: PhysicalParams, turbulence=None,
                method: str = "direct", check_simple: bool = True):
    """Frame, operators and trace solution for ``front``."""
    frame = build_frame(front)
    ops = assemble_layers(frame, length_scale=None, check_simple=check_simple)
    u_e = None if turbulence is None else turbulence.eval(frame.positions)
    trace = solve_traces(front, frame, ops, params, u_e, method=method)
    return frame, ops, trace


def circle_state_fields(radius: float, params: PhysicalParams, n: int, constant: float = 0.0):
    """``(psi, omega)`` of the expanding circle with burnt gas at rest."""
    th = params.theta
    if th == 1.0:
        return np.full(n, constant), np.zeros(n)
    phi = (th - 1.0) * radius * np.log(radius)
    return np.full(n, -th / (th - 1.0) * phi + constant), np.zeros(n)


def fuel_velocity(operators: LayerOperators, trace: TraceSolution, params: PhysicalParams,
                  points, turbulence=None) -> np.ndarray:
    """Fuel velocity at points outside the front (diagnostic)."""
    from .layers import eval_velocity_offfront

    source = 1.0 - trace.v_s - trace.u_en - params.markstein * trace.stretch
    u = eval_velocity_offfront(operators, trace.phi_minus, source, points)
    if turbulence is not None:
        u = u + turbulence.eval(points)
    return u


def burnt_potential_velocity(operators: LayerOperators, front: FrontState, trace: TraceSolution,
                             params: PhysicalParams, points) -> np.ndarray:
    """Potential-mode velocity of the burnt gas at points inside the front."""
    from .layers import eval_velocity_offfront

    th = params.theta
    phi_plus = (th - 1.0) * front.psi + th * trace.phi_minus
    flux = th - trace.v_s - th * params.markstein * trace.stretch - (th - 1.0) * front.omega - trace.u_en
    return eval_velocity_offfront(operators, -phi_plus, -flux, points)
