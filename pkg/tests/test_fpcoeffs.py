import math

import numpy as np
import pytest
from scipy import integrate

from qkramers import BathSpec, ConvergenceError, NumericError, RegionKind, StructuralError
from qkramers import bath as bm
from qkramers.fpcoeffs import (AsymptoticCoefficients, RegionModel, asymptotics, coefficients_at,
                               combine_diffusion, dominant_drift_limit)
from qkramers.resolvent import grote_hynes_root, reactive_root


def test_pair_sums_match_product_form(potential, bath):
    t = np.linspace(0.05, 1.2, 24)
    for region in RegionKind:
        model = RegionModel(bath, potential, region)
        y = model.Y(t)
        assert np.max(np.abs(y - model.product_y(t)) / np.maximum(1.0, np.abs(y))) < 1e-10
        w = model.m(t) ** 2 - model.M(t) * model.mdot(t)
        assert np.max(np.abs(model.W(t) - w) / np.maximum(1.0, np.abs(w))) < 1e-10


def test_drift_definitions(potential, bath):
    model = RegionModel(bath, potential, RegionKind.WELL)
    t, h = 1.3, 1e-5
    gam, w2, y = model.drift(t)
    fd = -(math.log(model.Y(t + h)) - math.log(model.Y(t - h))) / (2 * h)
    assert gam == pytest.approx(fd, rel=1e-7)
    assert w2 == pytest.approx(model.W(t) / model.Y(t), rel=1e-12)


def test_markov_limit_well_drift(potential):
    b = BathSpec(1.3, 0.01, 100.0)
    c = coefficients_at(b, potential, RegionKind.WELL, t=20.0, mode=bm.CLASSICAL)
    assert c.gamma_t == pytest.approx(b.gamma, rel=0.02)
    assert c.omega_t_sq == pytest.approx(potential.omega0_sq, rel=0.02)


@pytest.mark.parametrize("region", list(RegionKind))
def test_classical_mode_has_no_dispersion_terms(potential, bath, region):
    for t in (0.1, 0.5, 1.0):
        c = coefficients_at(bath, potential, region, t=t, mode=bm.CLASSICAL)
        assert c.n_t == 0.0 and c.g_t == 0.0 and c.omega_drift == 0.0


def test_quantum_mode_has_dispersion_terms(potential, bath):
    c = coefficients_at(bath, potential, RegionKind.BARRIER, t=0.5)
    assert c.g_t != 0.0 and c.n_t != 0.0


def test_nonpositive_y_raises_with_time(potential, bath):
    model = RegionModel(bath, potential, RegionKind.BARRIER)
    with pytest.raises(NumericError) as err:
        model.at(2.0)
    assert err.value.diagnostics["t"] == [2.0]


@pytest.mark.parametrize("gamma", [0.5, 1.3, 1.7, 3.0])
def test_barrier_drift_reproduces_grote_hynes(potential, gamma):
    b = BathSpec(gamma, 0.3, 10.0)
    bar = asymptotics(b, potential, RegionKind.BARRIER, mode=bm.CLASSICAL)
    lam = -bar.gamma_inf / 2 + math.sqrt(bar.gamma_inf**2 / 4 + bar.omega_inf_sq)
    assert lam == pytest.approx(grote_hynes_root(b, potential.omegab_sq), rel=0.02)


def test_nb_shortcut_at_long_times(potential, bath):
    # full N_b ratio vs the asymptotic shortcut dM^2 G / M^2 at t >= 8 / lambda_r
    model = RegionModel(bath, potential, RegionKind.BARRIER)
    t = 8.0 / reactive_root(model.M)
    shift = model.Y.max_real_rate()
    full = model.N_num.value(t, shift).real / model.Y.value(t, shift).real
    shortcut = model.m(t) ** 2 * model.G(t) / model.M(t) ** 2
    assert full == pytest.approx(shortcut, rel=0.01)


def test_well_asymptotics_classical_markov_limit(potential):
    kt = 10.0
    ratios = []
    for tc in (1e-2, 1e-3, 1e-4):
        w = asymptotics(BathSpec(1.3, tc, kt), potential, RegionKind.WELL, mode=bm.CLASSICAL)
        assert w.d == pytest.approx(kt, rel=5e-3)
        ratios.append(w.psi_inf / kt)
    # psi_0 vanishes linearly with the memory time
    assert ratios[1] / ratios[0] == pytest.approx(0.1, rel=0.05)
    assert abs(ratios[-1]) < 1e-3


def test_zero_temperature_diffusion_positive(potential):
    w = asymptotics(BathSpec(1.3, 0.3, 0.0), potential, RegionKind.WELL)
    b = asymptotics(BathSpec(1.3, 0.3, 0.0), potential, RegionKind.BARRIER)
    assert w.d > 0 and b.d > 0


def _barrier_temperature_oracle(b, wb2):
    def h2(w):
        s = -1j * w
        return abs((s + 1 / b.tau_c) / (s**3 + s**2 / b.tau_c + (b.gamma / b.tau_c - wb2) * s - wb2 / b.tau_c)) ** 2

    kw = dict(limit=2000, epsrel=1e-11)
    num = integrate.quad(lambda w: bm.noise_spectrum(b, w) * h2(w), 0, b.omega_max, points=[1, 3, 10, 100], **kw)[0]
    den = integrate.quad(lambda w: bm.noise_spectrum(b.replace(temperature=1.0), w, bm.CLASSICAL) * h2(w),
                         0, np.inf, **kw)[0]
    return num / den


def test_barrier_asymptotics_paper_parameters(potential, bath):
    bar = asymptotics(bath, potential, RegionKind.BARRIER)
    # rational transfer function evaluated directly, not through the exponential sum
    assert bar.d == pytest.approx(_barrier_temperature_oracle(bath, potential.omegab_sq), rel=1e-3)
    assert bar.psi_inf == pytest.approx(bar.d * (bar.omega_inf_sq / potential.omegab_sq - 1), rel=1e-12)
    # regression anchors
    assert bar.d == pytest.approx(10.0120920439, rel=1e-8)
    assert bar.psi_inf == pytest.approx(0.575288412322, rel=1e-8)
    assert bar.gamma_inf == pytest.approx(1.08635083323, rel=1e-9)
    assert bar.omega_inf_sq == pytest.approx(2.60791904451, rel=1e-9)


@pytest.mark.parametrize("mode", [bm.QUANTUM, bm.CLASSICAL])
@pytest.mark.parametrize("temp", [0.0, 1.0, 10.0])
def test_well_drift_and_diffusion_positive(potential, mode, temp):
    if mode == bm.CLASSICAL and temp == 0.0:
        return
    w = asymptotics(BathSpec(1.3, 0.3, temp), potential, RegionKind.WELL, mode=mode)
    assert w.gamma_inf > 0 and w.d * w.gamma_inf > 0


def test_small_hbar_continuity(potential):
    b = BathSpec(1.3, 0.3, 2.0)
    c = asymptotics(b, potential, RegionKind.WELL, mode=bm.CLASSICAL)
    diffs = []
    for hbar in (1.0, 0.1, 0.01, 0.001):
        q = asymptotics(b.replace(hbar=hbar), potential, RegionKind.WELL)
        diffs.append(abs(q.d - c.d) + abs(q.psi_inf - c.psi_inf))
    for a, b_ in zip(diffs, diffs[1:]):
        assert b_ / a < 0.2


def test_plateau_agrees_with_dominant_limit(potential, bath):
    a = asymptotics(bath, potential, RegionKind.WELL)
    p = asymptotics(bath, potential, RegionKind.WELL, method="plateau")
    assert p.gamma_inf == pytest.approx(a.gamma_inf, rel=1e-4)
    assert p.omega_inf_sq == pytest.approx(a.omega_inf_sq, rel=1e-4)


def test_plateau_method_reports_oscillatory_tail(potential):
    # with strong friction the slow real root pairs with the oscillating pair
    b = BathSpec(3.0, 0.3, 1.0)
    with pytest.raises(NumericError) as err:
        asymptotics(b, potential, RegionKind.WELL, method="plateau")
    if isinstance(err.value, ConvergenceError):
        assert "trace" in err.value.diagnostics


def test_finite_time_method(potential, bath):
    w = asymptotics(bath, potential, RegionKind.WELL, method="finite", t_star=5.0)
    gam, w2, _ = RegionModel(bath, potential, RegionKind.WELL).drift(5.0)
    assert w.gamma_inf == pytest.approx(float(gam)) and w.omega_inf_sq == pytest.approx(float(w2))


def test_dominant_limit_real_exponent_is_exact(potential):
    # the conjugate pair decays slowest, so the leading exponent of Y is real
    model = RegionModel(BathSpec(1.3, 0.3, 1.0), potential, RegionKind.WELL, mode=bm.CLASSICAL)
    gam, w2, osc = dominant_drift_limit(model)
    assert not osc
    g_t, w2_t, _ = model.drift(60.0)
    assert float(g_t) == pytest.approx(gam, rel=1e-8)
    assert float(w2_t) == pytest.approx(w2, rel=1e-8)


def test_asymptotic_invariants_enforced():
    with pytest.raises(StructuralError):
        AsymptoticCoefficients(-1.0, 0.0, 1.0, 1.0, 0.0, 0.0, RegionKind.WELL)
    with pytest.raises(StructuralError):
        AsymptoticCoefficients(1.0, -2.0, 1.0, 1.0, 0.0, 0.0, RegionKind.WELL)
    with pytest.raises(StructuralError):
        AsymptoticCoefficients(1.0, 0.0, 1.0, 1.0, 0.0, 0.0, RegionKind.WELL, omega_drift_inf=0.1)


def test_combine_diffusion_classical_stationary(potential):
    b = BathSpec(1.3, 0.3, 4.0)
    model = RegionModel(b, potential, RegionKind.WELL, mode=bm.CLASSICAL)
    c = model.at(40.0)
    assert c.phi / c.gamma_t == pytest.approx(b.kt, rel=1e-3)
