"""Small-expansion front law: the potential-flow limit of the full model.

For ``theta -> 1`` the burnt-gas vorticity decouples and the front speed is
a local function of the curve::

    V_s = 1 + (theta - 1)/2 * (1 + (1/pi) int n(r) . (r_s - r)/|r_s - r|^2 dS)

with ``n`` the inward normal at the target point.  The bracket equals 2 on
a circle, so circles expand at ``V_s = theta``; mode ``m`` grows at
``(theta - 1)(m - 1)/(2R)``.
"""
from __future__ import annotations

from typing import Sequence

import numpy as np

from .evolution import RunSummary, Sink, StepConfig, run, step
from .geometry import FrontState, GeometryError, GeometryFrame, build_frame, is_simple
from .solver import PhysicalParams, TraceSolution


def adjoint_double_layer(frame: GeometryFrame) -> np.ndarray:
    """Matrix of ``int n(r_i) . (r_j - r_i)/|r_j - r_i|^2 dS_j`` (diagonal ``kappa/2``)."""
    n = frame.n
    z = frame.z
    diff = z[None, :] - z[:, None]
    dist2 = np.abs(diff) ** 2
    i = np.arange(n)
    dist2[i, i] = 1.0
    k = np.real(np.conj(frame.nz)[:, None] * diff) / dist2
    k[i, i] = 0.5 * frame.curvature
    return k * frame.weights[None, :]


def frankel_front_speed(frame: GeometryFrame, theta: float, check_simple: bool = True) -> np.ndarray:
    if check_simple and not is_simple(frame.positions):
        raise GeometryError("curve is not simple")
    gauss = adjoint_double_layer(frame).sum(axis=1)
    return 1.0 + 0.5 * (theta - 1.0) * (1.0 + gauss / np.pi)


def _trace(v_s: np.ndarray) -> TraceSolution:
    zero = np.zeros_like(v_s)
    return TraceSolution(phi_minus=zero, v_s=v_s, u_t=zero, u_n=1.0 - v_s, u_sq=(1.0 - v_s) ** 2,
                         stretch=zero, u_en=zero, residual=0.0, y_iterations=0,
                         condition=1.0, compatibility=0.0)


class FrankelModel:
    """Front moved by :func:`frankel_front_speed`; surface fields stay frozen."""

    def __init__(self, params: PhysicalParams):
        self.params = params

    def solve(self, front: FrontState, check_simple: bool = False):
        if front.solved is None:
            frame = build_frame(front)
            v = frankel_front_speed(frame, self.params.theta, check_simple=check_simple)
            front.solved = (frame, None, _trace(v))
        return front.solved

    def rates(self, front: FrontState):
        frame, _, trace = self.solve(front)
        zero = np.zeros(front.n_markers)
        return zero, zero, -frame.normal * trace.v_s[:, None]

    def finish(self, front: FrontState) -> FrontState:
        return front


def frankel_step(front: FrontState, params: PhysicalParams, config: StepConfig,
                 step_index: int = 1, dt=None) -> FrontState:
    return step(front, params, config, step_index=step_index, dt=dt, model=FrankelModel(params))


def frankel_run(initial: FrontState, params: PhysicalParams, config: StepConfig,
                sinks: Sequence[Sink] = (), start_step: int = 0) -> RunSummary:
    return run(initial, params, config, sinks=sinks, start_step=start_step,
               model=FrankelModel(params))
