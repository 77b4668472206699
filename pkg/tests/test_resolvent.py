import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from qkramers import BathSpec, DegenerateRootError, ExponentialSum, RegionKind
from qkramers import bath as bm
from qkramers.resolvent import (build_relaxation, chi_x, cubic_roots, grote_hynes_root, reactive_root,
                                resolvent_coefficients, trig_moment, validate_against_ode)

W2 = 2.466212074330470


def test_cubic_roots_known_factorization():
    r = cubic_roots(6.0, 11.0, 6.0)
    assert np.allclose(np.sort(r.real), [-3, -2, -1], atol=1e-12)
    assert np.all(r.imag == 0)


def test_well_coefficients_and_roots(bath):
    a, b, c = resolvent_coefficients(bath, W2, RegionKind.WELL)
    assert (a, b, c) == pytest.approx((3.33333, 6.79955, 8.22071), abs=1e-4)
    r = cubic_roots(a, b, c)
    assert np.sum(np.abs(r.imag) == 0) == 1
    assert r[np.abs(r.imag) == 0][0].real < 0
    assert np.sum(r).real == pytest.approx(-a, rel=1e-12)
    oracle = np.roots([1, a, b, c])
    assert np.allclose(np.sort_complex(oracle), np.sort_complex(r), atol=1e-10)


def test_barrier_coefficients_and_reactive_root(bath):
    a, b, c = resolvent_coefficients(bath, W2, RegionKind.BARRIER)
    assert (a, b, c) == pytest.approx((3.33333, 1.86712, -8.22071), abs=1e-4)
    M = build_relaxation(bath, W2, RegionKind.BARRIER)
    lam = reactive_root(M)
    assert lam == pytest.approx(grote_hynes_root(bath, W2), rel=1e-10)
    assert lam == pytest.approx(1.161, abs=1e-3)


@settings(max_examples=40, deadline=None)
@given(g=st.floats(0.05, 5.0), tc=st.floats(0.01, 2.0), w2=st.floats(0.2, 10.0),
       region=st.sampled_from([RegionKind.WELL, RegionKind.BARRIER]))
def test_vieta_identities(g, tc, w2, region):
    a, b, c = resolvent_coefficients(BathSpec(g, tc, 1.0), w2, region)
    r = cubic_roots(a, b, c)
    s1 = r.sum()
    s2 = r[0] * r[1] + r[0] * r[2] + r[1] * r[2]
    s3 = r.prod()
    assert abs(s1 + a) <= 1e-10 * max(1, abs(a))
    assert abs(s2 - b) <= 1e-10 * max(1, abs(b))
    assert abs(s3 + c) <= 1e-10 * max(1, abs(c))


@settings(max_examples=40, deadline=None)
@given(g=st.floats(0.05, 5.0), tc=st.floats(0.01, 2.0), w2=st.floats(0.2, 10.0))
def test_barrier_single_growing_rate_satisfies_grote_hynes(g, tc, w2):
    b = BathSpec(g, tc, 1.0)
    M = build_relaxation(b, w2, RegionKind.BARRIER)
    assert np.sum(M.rates.real > 0) == 1
    lam = reactive_root(M)
    assert abs(lam**2 + lam * bm.kernel_laplace(b, lam) - w2) < 1e-10 * max(1.0, w2)


def test_initial_values_and_final_value(bath):
    for region in RegionKind:
        M = build_relaxation(bath, W2, region)
        assert M(0.0) == pytest.approx(0.0, abs=1e-14)
        assert M.derivative()(0.0) == pytest.approx(1.0, abs=1e-13)
    M = build_relaxation(bath, W2, RegionKind.WELL)
    total, _ = integrate.quad(M, 0, 200, limit=500)
    assert total == pytest.approx(1 / W2, rel=1e-8)
    assert M.laplace(0.0).real == pytest.approx(1 / W2, rel=1e-12)


def test_relaxation_against_ode(bath):
    assert validate_against_ode(bath, W2, RegionKind.WELL, t_end=20.0) < 1e-8
    assert validate_against_ode(bath, W2, RegionKind.BARRIER, t_end=8.0) < 1e-6


def test_undamped_limit():
    b = BathSpec(0.0, 0.3, 1.0)
    M = build_relaxation(b, W2, RegionKind.WELL)
    t = np.linspace(0, 20, 101)
    assert np.allclose(M(t), np.sin(math.sqrt(W2) * t) / math.sqrt(W2), atol=1e-12)


def test_chi_limits(bath):
    Mw = build_relaxation(bath, W2, RegionKind.WELL)
    assert chi_x(Mw, W2, RegionKind.WELL, 0.0) == pytest.approx(1.0)
    assert abs(chi_x(Mw, W2, RegionKind.WELL, 60.0)) < 1e-6
    Mb = build_relaxation(bath, W2, RegionKind.BARRIER)
    lam = reactive_root(Mb)
    c1, c2 = chi_x(Mb, W2, RegionKind.BARRIER, np.array([10.0, 12.0]))
    assert math.log(c2 / c1) / 2.0 == pytest.approx(lam, rel=1e-6)


def test_trig_moment_basics(bath):
    M = build_relaxation(bath, W2, RegionKind.WELL)
    assert trig_moment(M, 1.0, "cos", 0.0) == 0.0
    assert trig_moment(M, 0.0, "cos", 3.0) == pytest.approx(M.antiderivative()(3.0), rel=1e-12)
    ref, _ = integrate.quad(lambda s: M(s) * math.cos(2 * s), 0, 5, epsabs=1e-13, epsrel=1e-13)
    assert trig_moment(M, 2.0, "cos", 5.0) == pytest.approx(ref, abs=1e-10)


@settings(max_examples=25, deadline=None)
@given(w=st.floats(0.0, 30.0), t=st.floats(0.0, 15.0), phase=st.sampled_from(["cos", "sin"]))
def test_trig_moment_matches_quadrature(w, t, phase):
    M = build_relaxation(BathSpec(1.3, 0.3, 1.0), W2, RegionKind.WELL)
    f = math.cos if phase == "cos" else math.sin
    ref, _ = integrate.quad(lambda s: M(s) * f(w * s), 0, t, epsabs=1e-13, epsrel=1e-13, limit=500)
    assert trig_moment(M, w, phase, t) == pytest.approx(ref, abs=1e-10)


def test_derivative_matches_finite_difference(bath):
    h = 1e-5
    for region in RegionKind:
        M = build_relaxation(bath, W2, region)
        t = np.linspace(0.1, 6.0, 30)
        fd = (M(t + h) - M(t - h)) / (2 * h)
        assert np.max(np.abs(M.derivative()(t) - fd) / np.maximum(1, np.abs(fd))) < 1e-6


def test_convolution_matches_quadrature(bath):
    M = build_relaxation(bath, W2, RegionKind.WELL)
    E = ExponentialSum([1.0, 0.5], [-0.7, 0.3])
    conv = M.convolve(E)
    for t in (0.5, 2.0, 5.0):
        ref, _ = integrate.quad(lambda s: M(t - s) * E(s), 0, t, epsabs=1e-13, epsrel=1e-12)
        assert conv(t) == pytest.approx(ref, abs=1e-10)


def test_equal_rate_convolution():
    f = ExponentialSum([1.0], [-1.0])
    g = f.convolve(f)
    t = np.linspace(0, 5, 11)
    assert np.allclose(g(t), t * np.exp(-t), atol=1e-14)


def test_json_round_trip(bath):
    M = build_relaxation(bath, W2, RegionKind.WELL)
    back = ExponentialSum.from_json(M.to_json())
    assert np.allclose(back(np.linspace(0, 5, 7)), M(np.linspace(0, 5, 7)), atol=0)


def test_degenerate_roots_raise():
    # (s + 1)^3 needs 1/tau_c = 3, omega^2 + Gamma/tau_c = 3, omega^2/tau_c = 1
    b = BathSpec(8.0 / 9.0, 1.0 / 3.0, 1.0)
    with pytest.raises(DegenerateRootError):
        build_relaxation(b, 1.0 / 3.0, RegionKind.WELL)
