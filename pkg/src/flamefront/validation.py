"""Acceptance suite shared by ``flamefront validate`` and the test-suite."""
from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional

import numpy as np
from scipy.optimize import brentq

from .evolution import Sink, StepConfig, circle_front, physical_omega, run
from .frankel import frankel_run
from .geometry import build_frame, circle_markers, signed_area, stretch
from .io import Checkpoint, RunConfig
from .layers import HarmonicTest, assemble_layers, greens_identity_check
from .linear_theory import (circle_growth_rate, dl_growth_rate, fit_growth_rate,
                            mode_amplitudes, small_expansion_rate)
from .solver import PhysicalParams, solve_front
from .turbulence import divergence_fd, sampled_rms, synthesize


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    detail: str
    metrics: dict = field(default_factory=dict)
    runtime: float = 0.0

    def line(self) -> str:
        flag = "PASS" if self.passed else "FAIL"
        return f"[{flag}] {self.number:2d}. {self.title}: {self.detail} ({self.runtime:.1f} s)"

    def as_record(self) -> dict:
        return {"number": self.number, "title": self.title, "passed": self.passed,
                "detail": self.detail, "metrics": self.metrics, "runtime": self.runtime}


class _Recorder(Sink):
    """Per-step record of time, area, seeded-mode amplitude and solver traces."""

    def __init__(self, params, modes=()):
        self.params = params
        self.modes = list(modes)
        self.tau, self.radius, self.amps = [], [], []
        self.omega_max, self.vs_spread, self.vs_mean = [], [], []

    def snapshot(self, step, front, frame, trace, params):

        self.tau.append(front.tau)
        self.radius.append(np.sqrt(signed_area(front.markers) / np.pi))
        if self.modes:
            self.amps.append(mode_amplitudes(front.markers, self.modes))
        self.omega_max.append(float(np.max(np.abs(physical_omega(front, trace, self.params)))))
        self.vs_spread.append(float(np.ptp(trace.v_s)))
        self.vs_mean.append(float(np.mean(trace.v_s)))

    def arrays(self):
        return (np.array(self.tau), np.array(self.radius),
                np.array(self.amps) if self.amps else None)


def _recorded_run(front, params, config, modes=(), runner=run, **kw):
    rec = _Recorder(params, modes)
    cfg = StepConfig(**{**config.__dict__, "snapshot_every": 1, "timeseries_every": 0})
    summary = runner(front, params, cfg, sinks=[rec], **kw)
    return rec, summary


# -- criterion 1 -------------------------------------------------------------------

def _star_frame(n, amp=0.15, lobes=3):
    return build_frame(circle_markers(1.0, n, modes=[(lobes, amp, 0.0)]))


def harmonic_tests(center=(0.1, -0.05)) -> list:
    cx, cy = center

    def ext_val(x, y):
        w = (x - cx) + 1j * (y - cy)
        return np.log(np.abs(w)) + np.real(1.0 / w)

    def ext_grad(x, y):
        w = (x - cx) + 1j * (y - cy)
        g = 1.0 / w - 1.0 / w**2          # d/dz of (log w + 1/w)
        return g.real, -g.imag

    return [
        HarmonicTest(lambda x, y: np.exp(x) * np.cos(y),
                     lambda x, y: (np.exp(x) * np.cos(y), -np.exp(x) * np.sin(y)),
                     name="exp(x)cos(y)"),
        HarmonicTest(lambda x, y: x**3 - 3 * x * y**2,
                     lambda x, y: (3 * x**2 - 3 * y**2, -6 * x * y), name="Re z^3"),
        HarmonicTest(ext_val, ext_grad, region="exterior", log_coefficient=1.0,
                     log_center=center, name="ln|r-c| + Re 1/(z-c)"),
    ]


def criterion_1(quick: bool = False) -> CriterionResult:
    t0 = time.perf_counter()
    frame = _star_frame(256)
    ops = assemble_layers(frame)
    ang = np.linspace(0, 2 * np.pi, 12, endpoint=False)
    inside = 0.4 * np.column_stack([np.cos(ang), np.sin(ang)])
    outside = 2.0 * np.column_stack([np.cos(ang + 0.1), np.sin(ang + 0.1)])
    worst = {}
    for test in harmonic_tests():
        worst[test.name] = greens_identity_check(frame, test, inside, outside, ops)["max"]
    runtime = time.perf_counter() - t0
    err = max(worst.values())
    ok = err < 1e-8 and runtime < 10.0
    return CriterionResult(1, "Green identity reconstruction", ok,
                           f"max residual {err:.2e} (< 1e-8)", worst, runtime)


# -- criterion 2 -------------------------------------------------------------------

def criterion_2(quick: bool = False) -> CriterionResult:
    t0 = time.perf_counter()
    n = 128 if quick else 256
    metrics = {}
    ok = True
    for th in (3.0, 6.0, 8.0):
        params = PhysicalParams(th)
        rec, _ = _recorded_run(circle_front(1.0, n, params), params, StepConfig(t_end=0.1))
        tau, radius, _ = rec.arrays()
        slope = np.polyfit(tau, radius, 1)[0]
        rate_err = abs(slope / th - 1.0)
        end_err = abs((radius[-1] - radius[0]) / (tau[-1] - tau[0]) / th - 1.0)
        om = max(rec.omega_max)
        spread = max(s / m for s, m in zip(rec.vs_spread, rec.vs_mean))
        metrics[th] = {"rate_error": max(rate_err, end_err), "max_omega": om, "vs_spread": spread}
        ok &= max(rate_err, end_err) < 5e-3 and om < 1e-6 and spread < 1e-5
    runtime = time.perf_counter() - t0
    ok &= runtime < 120.0
    worst = {k: max(m[k] for m in metrics.values()) for k in ("rate_error", "max_omega", "vs_spread")}
    detail = (f"dR/dt error {worst['rate_error']:.1e}, max|Omega| {worst['max_omega']:.1e}, "
              f"V_s spread {worst['vs_spread']:.1e}")
    return CriterionResult(2, "expanding circle", ok, detail, metrics, runtime)


# -- criteria 3 and 4 ---------------------------------------------------------------

def growth_rate_run(params: PhysicalParams, m: int, n: int, radius: float = 1.0,
                    eps: float = 1e-4, drift: float = 0.095, samples: int = 24) -> dict:
    """Fit the growth rate of mode ``m`` seeded on a circle.

    The run stops once the mean radius has grown by ``drift``; the fitted
    rate is compared with theory at the window-mean radius.
    """
    front = circle_front(radius, n, params, [(m, eps * radius, 0.0)], growing=True)
    _, _, trace = solve_front(front, params)
    t_end = drift * radius / float(np.mean(trace.v_s))
    rec, _ = _recorded_run(front, params, StepConfig(t_end=t_end, dt=t_end / samples), [m])
    tau, rad, amps = rec.arrays()
    fit = fit_growth_rate(tau, amps[:, 0])
    rbar = float(np.mean(rad))
    return {"m": m, "sigma": fit.sigma, "stderr": fit.stderr, "R_mean": rbar,
            "R_drift": float(rad[-1] / rad[0] - 1.0), "samples": len(tau)}


def criterion_3(quick: bool = False) -> CriterionResult:
    t0 = time.perf_counter()
    th = 6.0
    params = PhysicalParams(th)
    n = 256 if quick else 512
    metrics = {}
    ok = True
    for m in (4, 6, 8):
        res = growth_rate_run(params, m, n)
        target = dl_growth_rate(th, m / res["R_mean"]).sigma
        res["sigma_dl"] = target
        res["ratio"] = res["sigma"] / target
        res["sigma_circle_theory"] = circle_growth_rate(th, m, res["R_mean"])
        metrics[m] = res
        ok &= abs(res["ratio"] - 1.0) < 0.05 and res["R_drift"] < 0.1
    runtime = time.perf_counter() - t0
    ok &= runtime < 600.0
    ratios = ", ".join(f"m={m}: {r['ratio']:.3f}" for m, r in metrics.items())
    return CriterionResult(3, "DL dispersion on perturbed circle", ok,
                           f"fitted/DL {ratios} (need 1 +- 0.05)", metrics, runtime)


def criterion_4(quick: bool = False, m: int = 6, radius: float = 1.0) -> CriterionResult:
    t0 = time.perf_counter()
    th = 6.0
    kc = m / radius
    params = PhysicalParams(th, 2.0 * np.pi / kc)
    n = 256 if quick else 512
    metrics = {}
    for mm in (m - 2, m, m + 2):
        metrics[mm] = growth_rate_run(params, mm, n, radius)
    limit = 0.05 * dl_growth_rate(th, kc).sigma
    s_lo, s_c, s_hi = (metrics[mm]["sigma"] for mm in (m - 2, m, m + 2))
    ok = abs(s_c) < limit and s_lo > 0 and s_hi < 0
    runtime = time.perf_counter() - t0
    detail = (f"sigma(m={m}) = {s_c:.3f} (need |.| < {limit:.3f}); "
              f"sigma(m={m - 2}) = {s_lo:.3f} (need > 0); sigma(m={m + 2}) = {s_hi:.3f} (need < 0)")
    return CriterionResult(4, "cutoff neutrality", ok, detail, metrics, runtime)


# -- criterion 5 -------------------------------------------------------------------

def frankel_discrepancy(theta: float, m: int = 24, n: int = 256) -> dict:
    """Largest relative gap between full and small-expansion amplitude
    histories of mode ``m`` up to one e-folding of the latter."""
    params = PhysicalParams(theta)
    r_e = np.exp(2.0 * theta / ((theta - 1.0) * (m - 1)))
    t_end = 1.05 * (r_e - 1.0) / theta
    cfg = StepConfig(t_end=t_end)
    runs = []
    for runner in (run, frankel_run):
        front = circle_front(1.0, n, params, [(m, 1e-4, 0.0)])
        rec, _ = _recorded_run(front, params, cfg, [m], runner=runner)
        tau, _, amps = rec.arrays()
        runs.append((tau, amps[:, 0]))
    (t_full, a_full), (t_fr, a_fr) = runs
    idx = int(np.argmax(a_fr / a_fr[0] >= np.e))
    if idx == 0:
        raise RuntimeError("small-expansion run did not reach one e-folding")
    a_full_i = np.interp(t_fr[: idx + 1], t_full, a_full)
    gap = float(np.max(np.abs(a_full_i / a_fr[: idx + 1] - 1.0)))
    return {"theta": theta, "m": m, "discrepancy": gap, "tau_efold": float(t_fr[idx])}


def criterion_5(quick: bool = False) -> CriterionResult:
    t0 = time.perf_counter()
    hi, lo = frankel_discrepancy(1.3), frankel_discrepancy(1.15)
    ratio = lo["discrepancy"] / hi["discrepancy"]
    ok = np.isfinite(ratio) and ratio < 0.7 and lo["discrepancy"] < 0.15
    detail = (f"gap {hi['discrepancy']:.3f} at 1.3, {lo['discrepancy']:.3f} at 1.15, "
              f"ratio {ratio:.2f} (need < 0.7, gap at 1.15 < 0.15)")
    return CriterionResult(5, "small-expansion limit", ok, detail,
                           {"1.3": hi, "1.15": lo, "ratio": ratio}, time.perf_counter() - t0)


# -- criterion 6 -------------------------------------------------------------------

def criterion_6(quick: bool = False) -> CriterionResult:
    t0 = time.perf_counter()
    ratios = {k: dl_growth_rate(1.05, k).sigma / small_expansion_rate(1.05, k) for k in (0.5, 1.0, 2.0)}
    ok = all(0.95 <= r <= 1.05 for r in ratios.values())
    detail = "ratios " + ", ".join(f"{r:.4f}" for r in ratios.values()) + " (need in [0.95, 1.05])"
    return CriterionResult(6, "small-expansion dispersion", ok, detail, ratios,
                           time.perf_counter() - t0)


# -- criterion 7 -------------------------------------------------------------------

def stretch_linear_error(eps: float, m: int = 8, radius: float = 1.0, n: int = 256,
                         w_amp: float = 0.7) -> float:
    """Relative gap between the discrete stretch and its planar linear form.

    A stationary front ``r = R(1 + eps cos m theta)`` sits in a sink flow
    with unit inflow speed at ``r = R`` plus a tangential perturbation
    ``eps w_amp sin(m theta)``.  Locally this is the tube configuration, whose
    stretch is ``div_perp w + lap_perp f`` with ``f`` the inward displacement.
    """
    theta = 2.0 * np.pi * np.arange(n) / n
    markers = circle_markers(radius, n, modes=[(m, eps * radius, 0.0)])
    frame = build_frame(markers)
    r = np.linalg.norm(markers, axis=1)
    e_r = markers / r[:, None]
    e_t = np.column_stack([-e_r[:, 1], e_r[:, 0]])
    u = -(radius / r)[:, None] * e_r + (eps * w_amp * np.sin(m * theta))[:, None] * e_t
    u_t = np.einsum("ij,ij->i", u, frame.tangent)
    y = stretch(frame, u_t, np.zeros(n))
    y_lin = eps * (w_amp * m + m**2) / radius * np.cos(m * theta)
    return float(np.max(np.abs(y - y_lin)) / np.max(np.abs(y_lin)))


def criterion_7(quick: bool = False) -> CriterionResult:
    t0 = time.perf_counter()
    errs = {eps: stretch_linear_error(eps) for eps in (1e-3, 1e-4)}
    ok = all(e < 10 * eps for eps, e in errs.items())
    detail = ", ".join(f"eps={eps:g}: {e:.2e}" for eps, e in errs.items()) + " (need < 10 eps)"
    return CriterionResult(7, "stretch linear limit", ok, detail, errs, time.perf_counter() - t0)


# -- criterion 8 -------------------------------------------------------------------

def criterion_8(quick: bool = False) -> CriterionResult:
    t0 = time.perf_counter()
    u_rms, scale = 0.5, 1.0
    fld = synthesize(u_rms, scale, 64, seed=7)
    pts = np.random.default_rng(11).uniform(-4 * scale, 4 * scale, (100, 2))
    div = float(np.max(np.abs(divergence_fd(fld, pts))))
    rms_err = abs(sampled_rms(fld) / u_rms - 1.0)

    params = PhysicalParams(6.0)
    cfg = StepConfig(t_end=1.0, max_steps=3)
    base = circle_front(1.0, 64, params, [(3, 0.02, 0.0)])
    lam = run(base, params, cfg).final
    zero = synthesize(0.0, scale, 64, seed=3)
    turb_front = circle_front(1.0, 64, params, [(3, 0.02, 0.0)], turbulence=zero)
    tur = run(turb_front, params, cfg, turbulence=zero).final
    same = all(np.array_equal(getattr(lam, k), getattr(tur, k)) for k in ("markers", "psi", "omega"))
    ok = div < 1e-6 * u_rms / scale and rms_err < 0.05 and same
    detail = (f"max |div| {div:.1e}, rms error {rms_err:.3f}, "
              f"zero field identical to laminar: {same}")
    return CriterionResult(8, "turbulence field contract", ok, detail,
                           {"divergence": div, "rms_error": rms_err, "identical": same},
                           time.perf_counter() - t0)


# -- criterion 9 -------------------------------------------------------------------

class _CheckpointCapture(Sink):
    def __init__(self, config, turbulence):
        self.config, self.turbulence, self.saved = config, turbulence, {}

    def checkpoint(self, step, front):
        self.saved[step] = Checkpoint(front, self.config, step, self.turbulence).dumps()


def restart_gap(total: int = 12, at: int = 5, n: int = 128) -> float:
    cfg = RunConfig.from_dict({
        "physical": {"theta": 6.0},
        "initial": {"radius": 1.0, "modes": [[3, 0.02, 0.0], [5, 0.01, 0.3]]},
        "numerical": {"n_markers": n, "t_end": 10.0, "max_steps": total, "resample_every": 4},
        "turbulence": {"u_rms": 0.2, "integral_scale": 0.5},
        "output": {"checkpoint_every": at, "timeseries_every": 0},
    })
    params, step_cfg, turb = cfg.params(), cfg.step_config(), cfg.turbulence_field()
    cap = _CheckpointCapture(cfg, turb)
    full = run(cfg.initial_state(turb), params, step_cfg, turb, sinks=[cap]).final
    ck = Checkpoint.from_dict(json.loads(cap.saved[at]))
    rest_cfg = StepConfig(**{**step_cfg.__dict__, "max_steps": total - at, "checkpoint_every": 0})
    resumed = run(ck.front, ck.config.params(), rest_cfg, ck.turbulence, start_step=ck.step).final
    return max(float(np.max(np.abs(getattr(full, k) - getattr(resumed, k))))
               for k in ("markers", "psi", "omega")) + abs(full.tau - resumed.tau)


def criterion_9(quick: bool = False) -> CriterionResult:
    t0 = time.perf_counter()
    gap = restart_gap()
    ok = gap <= 1e-12
    return CriterionResult(9, "checkpoint restart", ok, f"max field difference {gap:.1e} (<= 1e-12)",
                           {"gap": gap}, time.perf_counter() - t0)


# -- criterion 10 ------------------------------------------------------------------

def quadrature_error(n: int, pole=(1.2, 0.0)) -> float:
    """On-curve Green reconstruction error on the unit circle for ``ln|r - pole|``."""
    px, py = pole
    test = HarmonicTest(lambda x, y: 0.5 * np.log((x - px) ** 2 + (y - py) ** 2),
                        lambda x, y: ((x - px) / ((x - px) ** 2 + (y - py) ** 2),
                                      (y - py) / ((x - px) ** 2 + (y - py) ** 2)),
                        name="ln|r-p|")
    frame = build_frame(circle_markers(1.0, n))
    return greens_identity_check(frame, test)["curve"]


def time_order_errors(dts=(0.02, 0.01), n: int = 64, theta: float = 6.0,
                      lambda_c: float = 2.0 * np.pi, r0: float = 0.5, t_end: float = 0.2):
    """Radius errors of the stretched circle against its exact implicit solution
    ``R + th L ln R = R0 + th t + th L ln R0``."""
    params = PhysicalParams(theta, lambda_c)
    lam = params.markstein
    c = r0 + theta * lam * np.log(r0) + theta * t_end
    exact = brentq(lambda r: r + theta * lam * np.log(r) - c, r0, r0 + 2 * theta * t_end)
    errs = []
    for dt in dts:
        final = run(circle_front(r0, n, params), params,
                    StepConfig(t_end=t_end, dt=dt, timeseries_every=0)).final
        errs.append(abs(np.sqrt(signed_area(final.markers) / np.pi) - exact))
    return errs


def criterion_10(quick: bool = False) -> CriterionResult:
    t0 = time.perf_counter()
    e64, e256 = quadrature_error(64), quadrature_error(256)
    quad_ok = e256 < 1e-3 * e64
    errs = time_order_errors()
    ratio = errs[0] / errs[1]
    ok = quad_ok and 12.0 <= ratio <= 20.0
    detail = (f"quadrature error {e64:.1e} -> {e256:.1e} (N 64 -> 256); "
              f"time error ratio {ratio:.1f} (need in [12, 20])")
    return CriterionResult(10, "convergence orders", ok, detail,
                           {"quad_64": e64, "quad_256": e256, "time_errors": errs, "ratio": ratio},
                           time.perf_counter() - t0)


CRITERIA: dict = {1: criterion_1, 2: criterion_2, 3: criterion_3, 4: criterion_4,
                  5: criterion_5, 6: criterion_6, 7: criterion_7, 8: criterion_8,
                  9: criterion_9, 10: criterion_10}
QUICK_SET = (1, 2, 6, 7, 8, 9, 10)


def run_suite(numbers: Optional[Iterable[int]] = None, quick: bool = False,
              report: Optional[Callable[[str], None]] = print) -> list:
    """Run the selected criteria; ``quick`` skips the long growth-rate runs."""
    if numbers is None:
        numbers = QUICK_SET if quick else tuple(CRITERIA)
    results = []
    for k in numbers:
        try:
            res = CRITERIA[k](quick=quick)
        except Exception as err:  # a crash is a failed criterion, not a crashed suite
            res = CriterionResult(k, CRITERIA[k].__name__, False, f"error: {err!r}")
        results.append(res)
        if report is not None:
            report(res.line())
    return results
