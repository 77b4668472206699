import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from qkramers import BathSpec, CubicPotential, ExponentialSum, RegionKind
from qkramers import bath as bm
from qkramers.fpcoeffs import RegionModel
from qkramers.moments import (convolution_g, direct_variances, gb_short_time, spectral_variances,
                              stationary_variances, variances)
from qkramers.resolvent import build_relaxation

W2 = 2.466212074330470


def well_M(bath):
    return build_relaxation(bath, W2, RegionKind.WELL)


def test_zero_time_is_zero(bath):
    for method in ("spectral", "direct"):
        v = variances(bath, well_M(bath), 0.0, method)
        assert (v.sxx, v.svv, v.sxv) == (0.0, 0.0, 0.0)


def test_classical_long_time_equipartition(bath):
    v = spectral_variances(bath, well_M(bath), 60.0, bm.CLASSICAL)
    assert v.sxx == pytest.approx(bath.kt / W2, rel=1e-6)
    assert v.svv == pytest.approx(bath.kt, rel=1e-6)
    assert abs(v.sxv) < 1e-6 * bath.kt


def test_zero_point_velocity_variance():
    b = BathSpec(0.05, 0.3, 0.0)
    svv = stationary_variances(b, well_M(b), bm.QUANTUM).svv
    assert svv == pytest.approx(math.sqrt(W2) / 2, rel=0.05)


@pytest.mark.parametrize("t", [0.3, 1.7, 4.0])
@pytest.mark.parametrize("mode", [bm.QUANTUM, bm.CLASSICAL])
def test_spectral_and_direct_agree(t, mode):
    b = BathSpec(1.3, 0.3, 1.0, omega_max=1000.0)
    M = well_M(b)
    s = spectral_variances(b, M, t, mode)
    d = direct_variances(b, M, t, mode)
    for a, c in ((s.sxx, d.sxx), (s.svv, d.svv), (s.sxv, d.sxv)):
        assert abs(a - c) <= 1e-3 * max(1.0, abs(c))


def test_barrier_spectral_and_direct_agree():
    b = BathSpec(1.3, 0.3, 1.0, omega_max=1000.0)
    M = build_relaxation(b, W2, RegionKind.BARRIER)
    s = spectral_variances(b, M, 2.0)
    d = direct_variances(b, M, 2.0)
    for a, c in ((s.sxx, d.sxx), (s.svv, d.svv), (s.sxv, d.sxv)):
        assert abs(a - c) <= 1e-3 * max(1.0, abs(c))


@settings(max_examples=12, deadline=None)
@given(t=st.floats(0.05, 20.0), temp=st.sampled_from([0.0, 1.0, 10.0]), g=st.sampled_from([0.5, 1.3, 3.0]))
def test_variance_set_invariants(t, temp, g):
    b = BathSpec(g, 0.3, temp)
    M = well_M(b)
    v = spectral_variances(b, M, t, derivatives=True)
    assert v.sxx >= 0 and v.svv >= 0
    assert v.sxv**2 <= v.sxx * v.svv + 1e-10
    h = 1e-4 * max(1.0, t)
    fd = (spectral_variances(b, M, t + h).sxx - spectral_variances(b, M, t - h).sxx) / (2 * h)
    assert abs(v.sxv - 0.5 * fd) <= 1e-5 * max(1.0, abs(v.sxv))
    assert v.sxv == pytest.approx(0.5 * v.dsxx, rel=1e-12, abs=1e-14)


def test_monotone_in_temperature():
    prev = None
    for temp in (0.0, 1.0, 5.0, 10.0):
        b = BathSpec(1.3, 0.3, temp)
        v = stationary_variances(b, well_M(b))
        if prev is not None:
            assert v.sxx >= prev.sxx and v.svv >= prev.svv
        prev = v


def test_long_time_stationarity(bath):
    t = 50.0 / math.sqrt(W2)
    v = spectral_variances(bath, well_M(bath), t, derivatives=True)
    assert abs(v.dsvv) < 1e-4 * v.svv


def test_small_hbar_recovers_classical(bath):
    M = well_M(bath)
    c = stationary_variances(bath, M, bm.CLASSICAL)
    q = stationary_variances(bath.replace(hbar=1e-6), M, bm.QUANTUM)
    assert q.sxx == pytest.approx(c.sxx, rel=1e-7)
    assert q.svv == pytest.approx(c.svv, rel=1e-7)


def test_convolution_trivial_cases(bath):
    M = well_M(bath)
    G, g = convolution_g(M, ExponentialSum.zero())
    assert len(G) == 0 and len(g) == 0
    assert convolution_g(M, ExponentialSum.zero(), 3.0) == (0.0, 0.0)
    Q = ExponentialSum([0.3, 0.1], [0.0, 2.0])
    G0, g0 = convolution_g(M, Q, 0.0)
    assert G0 == pytest.approx(0.0, abs=1e-14) and g0 == pytest.approx(0.0, abs=1e-14)


def test_barrier_convolution_matches_quadrature(potential, bath):
    model = RegionModel(bath, potential, RegionKind.BARRIER)
    ref, _ = integrate.quad(lambda s: model.M(1.0 - s) * model.Q(s), 0, 1.0, epsabs=1e-14, epsrel=1e-13)
    assert model.G(1.0) == pytest.approx(ref, abs=1e-9)


def test_gb_linear_input():
    slope, resid = gb_short_time(lambda t: 3.0 * t, 0.5)
    assert slope == pytest.approx(3.0, rel=1e-12)
    assert resid < 1e-12


def test_gb_small_window_tends_to_zero(potential, bath):
    model = RegionModel(bath, potential, RegionKind.BARRIER)
    # G starts quadratically, so the fitted slope shrinks in proportion to the window
    slopes = [gb_short_time(model.G, w)[0] for w in (1e-3, 1e-4, 1e-5)]
    assert slopes[1] / slopes[0] == pytest.approx(0.1, rel=0.01)
    assert slopes[2] / slopes[1] == pytest.approx(0.1, rel=0.01)


def test_gb_paper_parameters(potential, bath):
    model = RegionModel(bath, potential, RegionKind.BARRIER)
    wb = math.sqrt(potential.omegab_sq)
    lo, hi = 0.05 / (2 * wb), 0.5 / (2 * wb)
    gb, _ = gb_short_time(model.G, (lo, hi))
    # the fitted slope is the derivative at the window midpoint
    assert gb == pytest.approx(model.g(0.5 * (lo + hi)), rel=0.01)
    nearby, _ = gb_short_time(model.G, (lo, 1.05 * hi))
    assert abs(nearby / gb - 1) < 0.10
    assert gb == pytest.approx(0.0141503145683, rel=1e-6)


def test_invalid_window():
    with pytest.raises(ValueError):
        gb_short_time(lambda t: t, 0.0)
