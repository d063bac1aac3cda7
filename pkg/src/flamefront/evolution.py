"""Time integration of the front and its surface fields.

Markers move with ``-n V_s``.  The surface fields follow the markers, so
their time derivative is the material derivative under pure normal motion::

    dPsi/dt = u^2/2 - V_s^2 + (1 + Om - u_en) V_s - L Y (V_s + th - 1)
              + (th - 1)/2 (1 + (L Y)^2)
    dOm/dt  = -V_s lap_s(phi + Psi)

where ``Om`` is the evolved vorticity variable ``Omega - u_en/(th-1)``.
"""
from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .geometry import (FrontState, GeometryError, build_frame, ensure_regular,
                       filter_front, is_simple, resample, signed_area, surface_laplacian)
from .layers import assemble_layers
from .linear_theory import mode_amplitudes
from .solver import PhysicalParams, TraceSolution, circle_state_fields, solve_front

logger = logging.getLogger(__name__)

AMPLITUDE_MODES = tuple(range(1, 9))


class SelfIntersectionError(GeometryError):
    """The front crossed itself during a step."""

    def __init__(self, message, front=None):
        super().__init__(message)
        self.front = front


@dataclass(frozen=True)
class StepConfig:
    """Time-stepping controls.

    ``dt = cfl * min spacing / max(|V_s|, 1)`` unless ``dt`` is given.
    ``keep`` is the retained fraction of Fourier modes in the per-step
    filter (1 disables it).  Cadences count steps; 0 disables the output.
    """

    cfl: float = 0.25
    keep: float = 2.0 / 3.0
    resample_every: int = 10
    t_end: float = 0.1
    dt: Optional[float] = None
    max_steps: Optional[int] = None
    resample_method: str = "spectral"
    gauge_projection: bool = True
    snapshot_every: int = 0
    timeseries_every: int = 1
    checkpoint_every: int = 0

    def __post_init__(self):
        if not 0.0 < self.cfl <= 0.5:
            raise ValueError("cfl must lie in (0, 0.5]")
        if not 0.5 <= self.keep <= 1.0:
            raise ValueError("filter must keep at least half of the modes")
        if self.resample_every < 0:
            raise ValueError("resample_every must be >= 0")
        if self.dt is not None and self.dt <= 0:
            raise ValueError("dt must be positive")
        for name in ("snapshot_every", "timeseries_every", "checkpoint_every"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")


# -- initial conditions ----------------------------------------------------------

def circle_front(radius: float, n: int, params: PhysicalParams,
                 modes: Sequence[Sequence[float]] = (), center=(0.0, 0.0),
                 growing: bool = False, turbulence=None) -> FrontState:
    """Expanding-circle state, optionally with radial mode perturbations.

    ``modes`` holds ``(m, amplitude, phase)`` triples.  With ``growing=True``
    each mode also carries the ``Psi`` and vorticity perturbations of the
    fastest-growing linear eigenvector, so no transient precedes the
    exponential growth.  With ``turbulence`` the vorticity trace starts at
    zero, so the evolved variable starts at ``-u_en/(theta - 1)``.
    """
    from .geometry import circle_markers

    if radius <= 0:
        raise ValueError("radius must be positive")
    markers = circle_markers(radius, n, center, modes)
    psi, omega = circle_state_fields(radius, params, n)
    if growing and modes:
        theta = 2.0 * np.pi * np.arange(n) / n
        for m, amp, phase in modes:
            vec = linearized_circle_eigenvector(params, int(m), radius, n)
            c = np.cos(m * (theta - phase))
            psi = psi + amp * vec[1] * c
            omega = omega + amp * vec[2] * c
    if turbulence is not None and params.theta > 1.0:
        frame = build_frame(markers)
        u_en = np.einsum("ij,ij->i", turbulence.eval(markers), frame.normal)
        omega = omega - u_en / (params.theta - 1.0)
    return FrontState(markers, psi, omega)


def linearized_circle_matrix(params: PhysicalParams, m: int, radius: float, n: int = 128,
                             eps: float = 1e-6) -> np.ndarray:
    """Finite-difference Jacobian of ``(a, P, W)`` for mode ``m`` on a circle.

    ``a`` is the radial amplitude and ``P``, ``W`` the ``cos(m theta)``
    coefficients of ``Psi`` and the vorticity variable.
    """
    from .geometry import circle_markers

    theta = 2.0 * np.pi * np.arange(n) / n
    c = np.cos(m * theta)
    psi0, om0 = circle_state_fields(radius, params, n)

    def rates(front):
        frame, _, trace = solve_front(front, params)
        dpsi, dom, _ = rhs(front, trace, params, frame)
        return trace.v_s, dpsi, dom

    base = rates(FrontState(circle_markers(radius, n), psi0, om0))
    jac = np.zeros((3, 3))
    for col in range(3):
        mk = circle_markers(radius, n, modes=[(m, eps if col == 0 else 0.0, 0.0)])
        f = FrontState(mk, psi0 + (eps * c if col == 1 else 0.0),
                       om0 + (eps * c if col == 2 else 0.0))
        for row, (new, old) in enumerate(zip(rates(f), base)):
            jac[row, col] = 2.0 / n * np.sum((new - old) * c) / eps
    return jac


def linearized_circle_eigenvector(params: PhysicalParams, m: int, radius: float,
                                  n: int = 128) -> np.ndarray:
    """Eigenvector of the fastest shape-changing mode, scaled to ``a = 1``."""
    w, v = np.linalg.eig(linearized_circle_matrix(params, m, radius, n))
    best = None
    for wi, vi in zip(w, v.T):
        if abs(vi[0]) > 1e-8 * np.abs(vi).max() and (best is None or wi.real > best[0].real):
            best = (wi, vi)
    vec = best[1] / best[1][0]
    return vec.real


# -- right-hand side -----------------------------------------------------------

def rhs(front: FrontState, trace: TraceSolution, params: PhysicalParams, frame=None):
    """``(dPsi/dt, dOm/dt, marker velocity)`` for a solved front."""
    if trace is None:
        raise ValueError("trace solution required")
    if frame is None:
        frame = build_frame(front)
    th = params.theta
    ly = params.markstein * trace.stretch
    v = trace.v_s
    dpsi = (0.5 * trace.u_sq - v**2 + (1.0 + front.omega - trace.u_en) * v
            - ly * (v + th - 1.0) + 0.5 * (th - 1.0) * (1.0 + ly**2))
    domega = -v * surface_laplacian(trace.phi_minus + front.psi, frame)
    velocity = -frame.normal * v[:, None]
    return dpsi, domega, velocity


def physical_omega(front: FrontState, trace: TraceSolution, params: PhysicalParams) -> np.ndarray:
    """Vorticity-mode trace recovered from the evolved variable."""
    if params.theta == 1.0:
        return front.omega.copy()
    return front.omega + trace.u_en / (params.theta - 1.0)


def project_gauge(front: FrontState, params: PhysicalParams, frame=None, ops=None) -> FrontState:
    """Move the zero-mean part of the vorticity variable into ``Psi``.

    Adding ``(h, -dh/dn)/(th - 1)`` to ``(Psi, Om)`` for any ``h`` harmonic
    inside the front leaves the front speed unchanged.  Choosing ``h`` with
    ``dh/dn = (th - 1)(Om - mean Om)`` leaves a uniform ``Om`` and removes a
    neutral component that otherwise grows without bound.
    """
    th = params.theta
    if th == 1.0:
        return front
    if frame is None:
        frame = build_frame(front)
    if ops is None:
        ops = assemble_layers(frame, length_scale=None, check_simple=False)
    w = frame.weights
    mean = float(w @ front.omega) / frame.perimeter
    g = (th - 1.0) * (front.omega - mean)
    n = frame.n
    # interior Neumann problem (pi + K) h = S g, fixed by zero mean of h
    a = np.pi * np.eye(n) + ops.double_layer + np.pi * np.outer(np.ones(n), w) / frame.perimeter
    h = np.linalg.solve(a, ops.single_layer @ g)
    return front.replace(psi=front.psi + h / (th - 1.0), omega=np.full(n, mean))


# -- stepping ----------------------------------------------------------------

class FrontModel:
    """Full front model: boundary solve plus the surface-field equations."""

    def __init__(self, params: PhysicalParams, turbulence=None, gauge_projection: bool = True):
        self.params = params
        self.turbulence = turbulence
        self.gauge_projection = gauge_projection

    def solve(self, front: FrontState, check_simple: bool = False):
        if front.solved is None:
            front.solved = solve_front(front, self.params, self.turbulence,
                                       check_simple=check_simple)
        return front.solved

    def rates(self, front: FrontState):
        frame, _, trace = self.solve(front)
        return rhs(front, trace, self.params, frame)

    def finish(self, front: FrontState) -> FrontState:
        if self.gauge_projection:
            return project_gauge(front, self.params)
        return front


def _model(model, params, config, turbulence):
    if model is not None:
        return model
    return FrontModel(params, turbulence, config.gauge_projection)


def stable_dt(front: FrontState, params: PhysicalParams, config: StepConfig, turbulence=None,
              model=None) -> float:
    if config.dt is not None:
        return config.dt
    frame, _, trace = _model(model, params, config, turbulence).solve(front, check_simple=True)
    vmax = max(float(np.max(np.abs(trace.v_s))), 1.0)
    return config.cfl * float(frame.segment_lengths.min()) / vmax


def _advance(front, k, dt):
    dpsi, dom, vel = k
    return front.replace(markers=front.markers + dt * vel, psi=front.psi + dt * dpsi,
                         omega=front.omega + dt * dom, tau=front.tau + dt)


def step(front: FrontState, params: PhysicalParams, config: StepConfig, turbulence=None,
         step_index: int = 1, dt: Optional[float] = None, model=None) -> FrontState:
    """One classical RK4 step, followed by filtering and resampling.

    ``step_index`` is the number of the step being taken (counted from 1)
    and drives the resampling cadence.
    """
    model = _model(model, params, config, turbulence)
    if dt is None:
        dt = stable_dt(front, params, config, turbulence, model)
    k1 = model.rates(front)
    k2 = model.rates(_advance(front, k1, 0.5 * dt))
    k3 = model.rates(_advance(front, k2, 0.5 * dt))
    k4 = model.rates(_advance(front, k3, dt))
    combo = tuple((a + 2.0 * b + 2.0 * c + d) / 6.0 for a, b, c, d in zip(k1, k2, k3, k4))
    new = _advance(front, combo, dt)
    if config.keep < 1.0:
        new = filter_front(new, config.keep)
    if config.resample_every and step_index % config.resample_every == 0:
        new = resample(new, method=config.resample_method)
    new = ensure_regular(new)
    if not is_simple(new.markers):
        raise SelfIntersectionError(f"front self-intersected at tau = {new.tau:.6g}", new)
    return model.finish(new)


# -- run loop ------------------------------------------------------------------

class Sink:
    """Receiver of run output; every hook is optional."""

    def snapshot(self, step, front, frame, trace, params):
        pass

    def timeseries(self, step, row):
        pass

    def checkpoint(self, step, front):
        pass

    def failure(self, step, front, error):
        pass

    def close(self):
        pass


class MemorySink(Sink):
    """Keeps time-series rows in memory."""

    def __init__(self):
        self.rows = []
        self.snapshots = []

    def timeseries(self, step, row):
        self.rows.append(dict(row, step=step))

    def snapshot(self, step, front, frame, trace, params):
        self.snapshots.append((step, front))

    def column(self, key):
        return np.array([r[key] for r in self.rows])


def diagnostics(front: FrontState, model: FrontModel) -> dict:
    frame, _, trace = model.solve(front)
    amps = mode_amplitudes(front.markers, AMPLITUDE_MODES)
    row = {
        "tau": front.tau,
        "perimeter": frame.perimeter,
        "area": signed_area(front.markers),
        "mean_Vs": float(frame.weights @ trace.v_s) / frame.perimeter,
        "residual": trace.residual,
    }
    row.update({f"amp_m{m}": float(a) for m, a in zip(AMPLITUDE_MODES, amps)})
    return row


@dataclass
class RunSummary:
    steps: int
    tau: float
    n_markers: int
    perimeter: float
    area: float
    mean_vs: float
    mode_amplitudes: dict
    wall_time: float
    final: FrontState = field(repr=False)

    def as_record(self) -> dict:
        return {
            "steps": self.steps, "tau": self.tau, "n_markers": self.n_markers,
            "perimeter": self.perimeter, "area": self.area, "mean_Vs": self.mean_vs,
            "mode_amplitudes": self.mode_amplitudes, "wall_time": self.wall_time,
        }


def _due(every, k):
    return every > 0 and k % every == 0


def run(initial: FrontState, params: PhysicalParams, config: StepConfig, turbulence=None,
        sinks: Sequence[Sink] = (), start_step: int = 0, model=None) -> RunSummary:
    """Advance ``initial`` to ``config.t_end`` (or ``config.max_steps``).

    Outputs are emitted before step ``k`` when ``k`` is a multiple of the
    matching cadence, and once more for the final state.  A checkpoint
    written before step ``k`` resumes with ``start_step=k``.
    """
    model = _model(model, params, config, turbulence)
    t0 = time.perf_counter()
    front = initial
    k = start_step
    tol = 1e-12 * max(1.0, abs(config.t_end))
    last_emitted = None

    def emit(k, front, final=False):
        frame, _, trace = model.solve(front)
        if _due(config.timeseries_every, k) or (final and config.timeseries_every):
            row = diagnostics(front, model)
            for s in sinks:
                s.timeseries(k, row)
        if _due(config.snapshot_every, k) or (final and config.snapshot_every):
            for s in sinks:
                s.snapshot(k, front, frame, trace, params)
        if _due(config.checkpoint_every, k) and not final:
            for s in sinks:
                s.checkpoint(k, front)

    try:
        while front.tau < config.t_end - tol:
            if config.max_steps is not None and k - start_step >= config.max_steps:
                break
            emit(k, front)
            last_emitted = k
            dt = min(stable_dt(front, params, config, turbulence, model), config.t_end - front.tau)
            front = step(front, params, config, turbulence, step_index=k + 1, dt=dt, model=model)
            k += 1
        if last_emitted != k:
            emit(k, front, final=True)
    except SelfIntersectionError as err:
        for s in sinks:
            s.failure(k, err.front, err)
        raise
    finally:
        for s in sinks:
            s.close()

    frame, _, trace = model.solve(front)
    amps = mode_amplitudes(front.markers, AMPLITUDE_MODES)
    return RunSummary(
        steps=k - start_step, tau=front.tau, n_markers=front.n_markers,
        perimeter=frame.perimeter, area=signed_area(front.markers),
        mean_vs=float(frame.weights @ trace.v_s) / frame.perimeter,
        mode_amplitudes={m: float(a) for m, a in zip(AMPLITUDE_MODES, amps)},
        wall_time=time.perf_counter() - t0, final=front)
