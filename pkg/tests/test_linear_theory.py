import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import brentq

from flamefront.geometry import circle_markers
from flamefront.linear_theory import (circle_growth_rate, cutoff_wavenumber, dl_closed_form,
                                      dl_growth_rate, fit_growth_rate, markstein_coefficient,
                                      mode_amplitudes, small_expansion_rate,
                                      stabilized_growth_rate)

thetas = st.floats(1.01, 20.0)
ks = st.floats(1e-3, 1e3)


def test_reference_value():
    res = dl_growth_rate(5.0, 1.0)
    assert res.sigma == pytest.approx((np.sqrt(145) - 5) / 6, abs=1e-14)
    assert res.sigma == pytest.approx(1.1736, abs=1e-4)
    assert res.residual < 1e-12


@pytest.mark.parametrize("k", [0.1, 1.0, 30.0])
def test_no_expansion_no_growth(k):
    assert dl_growth_rate(1.0, k).sigma == 0.0


@settings(max_examples=50)
@given(theta=thetas, k=ks)
def test_homogeneous_and_closed_form(theta, k):
    s1 = dl_growth_rate(theta, k).sigma
    assert dl_growth_rate(theta, 2 * k).sigma == pytest.approx(2 * s1, rel=1e-12)
    assert s1 == pytest.approx(dl_closed_form(theta, k), rel=1e-10)
    roots = dl_growth_rate(theta, k).roots
    assert sum(r > 0 for r in roots) == 1


@settings(max_examples=50)
@given(theta=thetas, k=st.floats(1e-2, 10.0), lc=st.floats(0.0, 10.0))
def test_roots_satisfy_quadratic(theta, k, lc):
    res = stabilized_growth_rate(theta, k, lc)
    scale = max(abs(c) for c in res.coefficients) * max(1.0, abs(res.sigma)) ** 2
    assert res.residual < 1e-12 * scale


@settings(max_examples=30)
@given(theta=st.floats(1.05, 10.0), lc=st.floats(0.1, 10.0))
def test_neutral_at_cutoff(theta, lc):
    sig = stabilized_growth_rate(theta, cutoff_wavenumber(lc), lc).sigma
    assert abs(sig) < 1e-12 * (1 + cutoff_wavenumber(lc))


def test_zero_cutoff_reduces_to_dl():
    a = stabilized_growth_rate(6.0, 2.0, 0.0)
    b = dl_growth_rate(6.0, 2.0)
    assert a.sigma == b.sigma and a.roots == b.roots


def test_independent_root_finder():
    th, lc, k = 8.0, 2 * np.pi, 0.5
    lam = (th - 1) * lc / (2 * np.pi * (th + 1))

    def quad(s):
        return ((th + 1) * s**2 + 2 * th * k * (1 + lam * (th + 1) * k / (2 * th)) * s
                - th * (th - 1) * k**2 * (1 - lam * (th + 1) * k / (th - 1)))

    oracle = brentq(quad, 0.0, 10.0, xtol=1e-15)
    assert stabilized_growth_rate(th, k, lc).sigma == pytest.approx(oracle, abs=1e-10)


def test_monotone_in_theta():
    sig = [dl_growth_rate(t, 1.0).sigma for t in np.linspace(1.0, 20.0, 60)]
    assert np.all(np.diff(sig) > 0)


def test_small_expansion():
    assert small_expansion_rate(1.2, 2.0) == pytest.approx(0.2)
    ratio = dl_growth_rate(1.05, 1.0).sigma / small_expansion_rate(1.05, 1.0)
    assert abs(ratio - 1) < 0.05
    # large expansion: the potential-flow rate is a poor estimate
    assert dl_growth_rate(6.0, 1.0).sigma / small_expansion_rate(6.0, 1.0) < 0.6


@pytest.mark.parametrize("theta, k", [(0.9, 1.0), (2.0, 0.0), (2.0, -1.0)])
def test_invalid_arguments(theta, k):
    with pytest.raises(ValueError):
        dl_growth_rate(theta, k)


def test_markstein_coefficient():
    assert markstein_coefficient(3.0, 2 * np.pi) == pytest.approx(0.5)


def test_circle_rate_approaches_planar():
    # at large radius and fixed k = m/R the circle rate tends to the planar one
    k = 2.0
    R = 400.0
    planar = dl_growth_rate(6.0, k).sigma
    assert circle_growth_rate(6.0, int(k * R), R) == pytest.approx(planar, rel=0.02)


def test_mode_amplitudes():
    m = circle_markers(2.0, 128, center=(0.5, -1.0), modes=[(3, 0.01, 0.4), (5, 0.002, 0.0)])
    amps = mode_amplitudes(m, range(1, 7))
    assert amps[2] == pytest.approx(0.01, rel=1e-3)
    assert amps[4] == pytest.approx(0.002, rel=1e-2)
    assert amps[0] < 1e-4 and amps[3] < 1e-4


def test_fit_exact_exponential():
    t = np.linspace(0, 1, 20)
    fit = fit_growth_rate(t, 1e-3 * np.exp(2.5 * t))
    assert fit.sigma == pytest.approx(2.5, abs=1e-12)


def test_fit_noisy():
    rng = np.random.default_rng(3)
    t = np.linspace(0, 2, 40)
    fit = fit_growth_rate(t, np.exp(1.3 * t) * (1 + 0.01 * rng.standard_normal(40)))
    assert fit.within(1.3)


def test_fit_constant_and_window():
    t = np.linspace(0, 1, 30)
    assert fit_growth_rate(t, np.full(30, 4.0)).sigma == 0.0
    fit = fit_growth_rate(t, np.exp(t), window=(0.0, 0.5))
    assert fit.n_samples == 15


@pytest.mark.parametrize("t, a", [(np.arange(5.0), np.ones(5)),
                                  (np.arange(12.0), np.r_[np.ones(11), 0.0])])
def test_fit_errors(t, a):
    with pytest.raises(ValueError):
        fit_growth_rate(t, a)
