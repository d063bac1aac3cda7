import numpy as np
import pytest

from flamefront.evolution import (FrontModel, MemorySink, StepConfig, circle_front,
                                  linearized_circle_matrix, project_gauge, rhs, run, step)
from flamefront.geometry import signed_area
from flamefront.linear_theory import circle_growth_rate, circle_mode_matrix, mode_amplitudes
from flamefront.solver import PhysicalParams, solve_front
from flamefront.turbulence import synthesize


def test_rhs_circle(theta6):
    front = circle_front(1.0, 128, theta6)
    frame, _, trace = solve_front(front, theta6)
    dpsi, domega, vel = rhs(front, trace, theta6, frame)
    assert np.allclose(dpsi, -15.0, atol=1e-6)
    assert np.max(np.abs(domega)) < 1e-8
    assert np.allclose(vel, -6.0 * frame.normal, atol=1e-6)


def test_rhs_no_expansion():
    params = PhysicalParams(1.0)
    front = circle_front(1.0, 64, params)
    frame, _, trace = solve_front(front, params)
    dpsi, domega, _ = rhs(front, trace, params, frame)
    assert np.max(np.abs(dpsi)) < 1e-12
    assert np.max(np.abs(domega)) < 1e-12


def test_rhs_needs_trace(theta6):
    with pytest.raises(ValueError):
        rhs(circle_front(1.0, 64, theta6), None, theta6)


@pytest.mark.parametrize("kwargs", [{"cfl": 0.0}, {"cfl": 0.6}, {"keep": 0.4}, {"dt": -1.0},
                                    {"resample_every": -1}, {"snapshot_every": -2}])
def test_step_config_validation(kwargs):
    with pytest.raises(ValueError):
        StepConfig(**kwargs)


def equivalent_radius(front):
    return np.sqrt(signed_area(front.markers) / np.pi)


def test_circle_run_radius_and_vorticity(theta6):
    sink = MemorySink()
    cfg = StepConfig(t_end=0.1, resample_every=5)
    summary = run(circle_front(1.0, 64, theta6), theta6, cfg, sinks=[sink])
    assert summary.tau == pytest.approx(0.1, abs=1e-12)
    assert abs(equivalent_radius(summary.final) / 1.6 - 1) < 0.005
    assert np.max(np.abs(summary.final.omega)) < 1e-6
    assert sink.rows[0]["tau"] == 0.0 and sink.rows[-1]["tau"] == pytest.approx(0.1)


def test_zero_steps_returns_initial(theta6):
    init = circle_front(1.0, 64, theta6, modes=[(3, 0.01, 0.0)])
    summary = run(init, theta6, StepConfig(max_steps=0))
    assert summary.steps == 0
    assert summary.final is init
    assert summary.mode_amplitudes[3] == pytest.approx(0.01, rel=1e-6)


def test_symmetry_preserved(theta6):
    init = circle_front(1.0, 64, theta6, modes=[(3, 0.02, 0.0)])
    out = run(init, theta6, StepConfig(t_end=0.03)).final
    amps = mode_amplitudes(out.markers, [1, 2, 4, 5, 7, 8])
    assert np.max(amps) < 1e-10


def test_area_rate_matches_mean_speed(theta6):
    front = circle_front(1.0, 128, theta6, modes=[(3, 0.05, 0.0)])
    frame, _, trace = solve_front(front, theta6)
    cfg = StepConfig(keep=1.0, resample_every=0)
    dt = 1e-4
    nxt = step(front, theta6, cfg, dt=dt)
    f1, _, t1 = solve_front(nxt, theta6)
    flux = 0.5 * (frame.weights @ trace.v_s + f1.weights @ t1.v_s)
    rate = (signed_area(nxt.markers) - signed_area(front.markers)) / dt
    assert abs(rate / flux - 1) < 1e-6


def test_gauge_projection_keeps_speed(theta6):
    front = circle_front(1.0, 128, theta6, modes=[(4, 0.05, 0.0)])
    s = 2 * np.pi * np.arange(128) / 128
    front = front.replace(omega=0.01 * np.cos(4 * s) + 0.003 * np.sin(2 * s))
    projected = project_gauge(front, theta6)
    a = solve_front(front, theta6)[2].v_s
    b = solve_front(projected, theta6)[2].v_s
    assert np.max(np.abs(a - b)) < 1e-9
    assert np.ptp(projected.omega) == 0.0


@pytest.mark.parametrize("m", [2, 5])
def test_linearization_matches_analytic(m, theta6):
    fd = linearized_circle_matrix(theta6, m, 1.0)
    assert np.allclose(fd, circle_mode_matrix(6.0, m, 1.0), atol=1e-5)


def test_zero_turbulence_bit_compatible(theta6):
    init = circle_front(1.0, 64, theta6, modes=[(3, 0.01, 0.0)])
    cfg = StepConfig(max_steps=3)
    laminar = run(init, theta6, cfg).final
    for seed in (0, 7):
        turb = synthesize(0.0, seed=seed)
        quiet = run(circle_front(1.0, 64, theta6, modes=[(3, 0.01, 0.0)], turbulence=turb),
                    theta6, cfg, turb).final
        assert np.array_equal(laminar.markers, quiet.markers)
        assert np.array_equal(laminar.psi, quiet.psi)


def test_restart_matches_uninterrupted(theta6):
    class Keep(MemorySink):
        def __init__(self):
            super().__init__()
            self.saved = {}

        def checkpoint(self, step, front):
            self.saved[step] = front

    init = circle_front(1.0, 64, theta6, modes=[(3, 0.01, 0.0)])
    cfg = StepConfig(max_steps=6, checkpoint_every=4, resample_every=3)
    keep = Keep()
    full = run(init, theta6, cfg, sinks=[keep]).final
    restart = run(keep.saved[4], theta6, StepConfig(max_steps=2, resample_every=3),
                  start_step=4).final
    assert np.max(np.abs(full.markers - restart.markers)) < 1e-12
    assert np.max(np.abs(full.psi - restart.psi)) < 1e-12


def test_growing_initialization_has_no_transient(theta6):
    a = 1e-5
    init = circle_front(1.0, 128, theta6, modes=[(4, a, 0.0)], growing=True)
    _, _, trace = FrontModel(theta6).solve(init)
    s = 2 * np.pi * np.arange(128) / 128
    # outward speed perturbation equals sigma times the radial amplitude
    dv = 2 * np.mean(trace.v_s * np.cos(4 * s))
    assert dv / a == pytest.approx(circle_growth_rate(6.0, 4, 1.0), rel=1e-4)
