import numpy as np
import pytest

from flamefront.turbulence import TurbulenceField, divergence_fd, sampled_rms, synthesize


def test_zero_rms_field_is_zero():
    f = synthesize(0.0, seed=4)
    assert np.all(f.amplitudes == 0.0)
    assert np.all(f.eval(np.random.default_rng(0).uniform(-5, 5, (20, 2))) == 0.0)


def test_single_mode_transverse():
    f = TurbulenceField.from_modes([[1.0, 0.0]], [[0.6, 0.8]], [0.3])
    assert np.allclose(f.amplitudes, [[0.0, 0.8]])
    x = np.array([[0.5, 2.0], [-1.0, 0.0]])
    assert np.allclose(f.eval(x), np.outer(np.cos(x[:, 0] + 0.3), [0.0, 0.8]))


def test_empty_field():
    assert np.array_equal(TurbulenceField.empty().eval([1.0, 2.0]), [0.0, 0.0])


@pytest.mark.parametrize("seed", [0, 1, 2, 11])
def test_sampled_rms(seed):
    f = synthesize(0.3, seed=seed)
    assert f.analytic_rms() == pytest.approx(0.3, rel=1e-12)
    assert abs(sampled_rms(f) / 0.3 - 1) < 0.05


@pytest.mark.parametrize("scale", [0.5, 1.0, 3.0])
def test_solenoidal(scale):
    f = synthesize(1.0, integral_scale=scale, seed=5)
    assert np.max(np.abs(np.sum(f.amplitudes * f.wavevectors, axis=1))) < 1e-12
    pts = np.random.default_rng(1).uniform(-10, 10, (100, 2))
    assert np.max(np.abs(divergence_fd(f, pts))) < 1e-6 * f.u_rms / scale


def test_wavenumber_range():
    f = synthesize(1.0, integral_scale=2.0, n_modes=64, seed=3)
    k = np.linalg.norm(f.wavevectors, axis=1)
    assert k.min() >= 2 * np.pi / 16 and k.max() <= 2 * np.pi * 4
    assert f.n_modes == 64


def test_isotropy():
    f = synthesize(1.0, n_modes=64, seed=8)
    x = np.linspace(0, 64, 128, endpoint=False)
    xx, yy = np.meshgrid(x, x)
    u = f.eval(np.column_stack([xx.ravel(), yy.ravel()]))
    vx, vy = np.var(u[:, 0]), np.var(u[:, 1])
    assert abs(vx / vy - 1) < 0.1


def test_deterministic_and_round_trip():
    a, b = synthesize(0.4, seed=9), synthesize(0.4, seed=9)
    pts = np.array([[0.1, 0.2], [3.0, -4.0]])
    assert np.array_equal(a.eval(pts), b.eval(pts))
    c = TurbulenceField.from_dict(a.to_dict())
    assert np.array_equal(a.eval(pts), c.eval(pts))
    assert not np.array_equal(a.eval(pts), synthesize(0.4, seed=10).eval(pts))


@pytest.mark.parametrize("kwargs", [{"u_rms": -1.0}, {"u_rms": 1.0, "n_modes": 0},
                                    {"u_rms": 1.0, "integral_scale": 0.0}])
def test_invalid(kwargs):
    with pytest.raises(ValueError):
        synthesize(**kwargs)
