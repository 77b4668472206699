"""Acceptance checks shared by the ``validate`` command and the test suite.

Every check returns a :class:`CheckResult` with the measured value next to
its target and tolerance, so a failing run shows how far off it is.
"""

import dataclasses
import math

import numpy as np

from . import bath as bathmod
from .bath import BathSpec
from .dispersion import (FluctuationState, delta_x2_barrier, delta_x2_well, invariant_along_flow,
                         ode_moments)
from .potential import CubicPotential
from .rate import compute_asymptotics, grote_hynes_rate, kramers_rate, rate, without_dispersion
from .resolvent import RegionKind, build_relaxation, validate_against_ode
from .moments import direct_variances, spectral_variances, stationary_variances
from .sim import SimConfig, estimate_rate

PAPER_POTENTIAL = dict(a_bar=0.5, e_act=10.0)


@dataclasses.dataclass
class CheckResult:
    name: str
    target: object
    measured: object
    tolerance: object
    passed: bool
    details: dict = dataclasses.field(default_factory=dict)

    def to_dict(self):
        return _jsonable(dataclasses.asdict(self))

    def line(self):
        return f"{'PASS' if self.passed else 'FAIL'} {self.name}: measured={_short(self.measured)} target={_short(self.target)} tol={_short(self.tolerance)}"


def _short(v):
    if isinstance(v, float):
        return f"{v:.6g}"
    if isinstance(v, dict):
        return "{" + ", ".join(f"{k}={_short(x)}" for k, x in v.items()) + "}"
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_short(x) for x in v) + "]"
    return str(v)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    return obj


def paper_potential():
    return CubicPotential.from_energy(**PAPER_POTENTIAL)


def r_squared(x, y):
    x, y = np.asarray(x, float), np.asarray(y, float)
    coef = np.polyfit(x, y, 1)
    resid = y - np.polyval(coef, x)
    return float(1.0 - resid @ resid / np.sum((y - y.mean()) ** 2)), float(coef[0])


def markov_kramers_rate(bath, potential):
    """Classical Markovian closed form with ``l = sqrt(G^2/4 + wb^2) - G/2``."""
    wb2 = potential.omegab_sq
    lam = math.sqrt(bath.gamma**2 / 4 + wb2) - bath.gamma / 2
    return math.sqrt(potential.omega0_sq) * lam / (2 * math.pi * math.sqrt(wb2)) * math.exp(
        -potential.e_act / bath.kt)


def check_classical_reduction(prefactor_scale=1.0):
    pot = paper_potential()
    worst = 0.0
    grid = {}
    for g in (0.8, 1.3, 3.0):
        for t in (2.0, 5.0, 10.0):
            bath = BathSpec(g, 0.3, t)
            well, barrier = (without_dispersion(c) for c in compute_asymptotics(bath, pot, bathmod.CLASSICAL))
            k71 = kramers_rate(well, barrier, pot, "full", prefactor_scale).k
            k73 = kramers_rate(well, barrier, pot, "classical").k
            rel = abs(k71 - k73) / k73
            grid[f"G={g},T={t}"] = rel
            worst = max(worst, rel)
    return CheckResult("1 classical reduction full vs classical form", 0.0, worst, 1e-8, worst <= 1e-8,
                       {"relative_differences": grid})


def check_markov_limit():
    pot = paper_potential()
    bath = BathSpec(1.3, 0.01, 10.0)
    k = rate(bath, pot, bathmod.CLASSICAL, "full").k
    target = markov_kramers_rate(bath, pot)
    rel = abs(k - target) / target
    return CheckResult("2 Markovian classical limit", target, k, 0.05, rel <= 0.05, {"relative_error": rel})


def check_grote_hynes():
    pot = paper_potential()
    bath = BathSpec(1.3, 0.3, 10.0)
    k = rate(bath, pot, bathmod.CLASSICAL, "full").k
    target = grote_hynes_rate(bath, pot)
    rel = abs(k - target) / target
    return CheckResult("3 Grote-Hynes consistency at tau_c=0.3", target, k, 0.05, rel <= 0.05,
                       {"relative_error": rel})


def _quantum_k(gamma, temperature, formula="simplified", tau_c=0.3):
    return rate(BathSpec(gamma, tau_c, temperature), paper_potential(), bathmod.QUANTUM, formula).k


def check_arrhenius(temps=None):
    temps = np.geomspace(2.0, 20.0, 12) if temps is None else np.asarray(temps)
    e = paper_potential().e_act
    out, ok = {}, True
    for g in (1.3, 1.7):
        ln_k = np.log([_quantum_k(g, t) for t in temps])
        r2, slope = r_squared(1.0 / temps, ln_k)
        good = r2 >= 0.99 and abs(slope / -e - 1.0) <= 0.15
        ok &= good
        out[f"G={g}"] = {"r2": r2, "slope": slope}
    return CheckResult("4 Arrhenius regime", {"r2": 0.99, "slope": -e}, out, {"r2_min": 0.99, "slope_rel": 0.15},
                       ok, {"temperatures": temps.tolist()})


def _aic(resid, n_params):
    n = resid.size
    return n * math.log(float(resid @ resid) / n) + 2 * n_params


def check_low_temperature(temps=None):
    temps = np.linspace(0.05, 0.5, 10) if temps is None else np.asarray(temps)
    k = np.array([_quantum_k(1.3, t) for t in temps])
    one = np.ones_like(temps)
    a_lin = np.stack([one, temps], axis=1)
    a_quad = np.stack([one, temps**2], axis=1)
    r_lin = k - a_lin @ np.linalg.lstsq(a_lin, k, rcond=None)[0]
    r_quad = k - a_quad @ np.linalg.lstsq(a_quad, k, rcond=None)[0]
    aic_lin, aic_quad = _aic(r_lin, 2), _aic(r_quad, 2)
    ratio = float(np.linalg.norm(r_lin) / np.linalg.norm(r_quad))
    ok = aic_quad < aic_lin and ratio >= 2.0
    return CheckResult("5 low-temperature T^2 regime", {"aic_quad<aic_lin": True, "residual_ratio": 2.0},
                       {"aic_lin": aic_lin, "aic_quad": aic_quad, "residual_ratio": ratio},
                       {"residual_ratio_min": 2.0}, ok, {"temperatures": temps.tolist(), "k": k.tolist()})


def check_friction(gammas=None):
    gammas = np.linspace(0.8, 3.0, 12) if gammas is None else np.asarray(gammas)
    out, ok = {}, True
    for t in (5.0, 3.0, 0.0):
        k = np.array([_quantum_k(g, t) for g in gammas])
        dec = bool(np.all(np.diff(k) < 0))
        entry = {"decreasing": dec}
        ok &= dec
        if t == 0.0:
            r2, slope = r_squared(gammas, np.log(k))
            entry.update(r2=r2, slope=slope)
            ok &= r2 >= 0.98
        out[f"T={t}"] = entry
    return CheckResult("6 friction dependence", {"decreasing": True, "r2_at_T0": 0.98}, out,
                       {"r2_min": 0.98}, ok, {"gammas": gammas.tolist()})


def check_variance_methods(n_points=12, seed=2024, omega_max=1000.0):
    rng = np.random.default_rng(seed)
    pot = paper_potential()
    worst, points = 0.0, []
    for _ in range(n_points):
        t = float(rng.uniform(0.1, 10.0))
        temp = float(rng.choice([0.0, 1.0, 10.0]))
        g = float(rng.choice([0.5, 1.3, 3.0]))
        bath = BathSpec(g, 0.3, temp, omega_max=omega_max)
        M = build_relaxation(bath, pot.omega0_sq, RegionKind.WELL)
        s = spectral_variances(bath, M, t, bathmod.QUANTUM)
        d = direct_variances(bath, M, t, bathmod.QUANTUM)
        errs = [abs(a - b) / max(1.0, abs(b)) for a, b in ((s.sxx, d.sxx), (s.svv, d.svv), (s.sxv, d.sxv))]
        worst = max(worst, max(errs))
        points.append({"t": t, "T": temp, "gamma": g, "max_rel": max(errs)})
    return CheckResult("7 variance spectral vs direct", 0.0, worst, 1e-3, worst <= 1e-3,
                       {"points": points, "omega_max": omega_max})


def check_relaxation_ode():
    pot = paper_potential()
    out, ok = {}, True
    for g, tc in ((1.3, 0.3), (1.7, 0.3), (0.5, 0.01), (3.0, 1.0)):
        bath = BathSpec(g, tc, 1.0)
        dw = validate_against_ode(bath, pot.omega0_sq, RegionKind.WELL, t_end=20.0)
        db = validate_against_ode(bath, pot.omegab_sq, RegionKind.BARRIER, t_end=8.0)
        ok &= dw < 1e-8 and db < 1e-6
        out[f"G={g},tau_c={tc}"] = {"well_abs": dw, "barrier_rel": db}
    return CheckResult("8 relaxation function vs ODE", 0.0, out, {"well_abs": 1e-8, "barrier_rel": 1e-6}, ok)


def check_equipartition(gamma=1.3, tau_c=0.3, temperature=10.0):
    pot = paper_potential()
    bath = BathSpec(gamma, tau_c, temperature)
    kt = bath.kt
    M = build_relaxation(bath, pot.omega0_sq, RegionKind.WELL)
    var = stationary_variances(bath, M, bathmod.CLASSICAL)
    well, _ = compute_asymptotics(bath, pot, bathmod.CLASSICAL)
    measured = {
        "svv/kT": var.svv / kt,
        "sxx*w0^2/kT": var.sxx * pot.omega0_sq / kt,
        "D0/kT": well.d / kt,
        "psi0/kT": well.psi_inf / kt,
    }
    ok = (abs(measured["svv/kT"] - 1) <= 5e-3 and abs(measured["sxx*w0^2/kT"] - 1) <= 5e-3
          and abs(measured["D0/kT"] - 1) <= 5e-3 and abs(measured["psi0/kT"]) < 1e-3)
    return CheckResult("9 classical equipartition", {"svv/kT": 1, "sxx*w0^2/kT": 1, "D0/kT": 1, "psi0/kT": 0},
                       measured, {"relative": 5e-3, "psi0/kT_abs": 1e-3}, ok,
                       {"gamma": gamma, "tau_c": tau_c, "temperature": temperature})


def check_zero_point():
    pot = paper_potential()
    bath = BathSpec(0.05, 0.3, 0.0)
    M = build_relaxation(bath, pot.omega0_sq, RegionKind.WELL)
    svv = stationary_variances(bath, M, bathmod.QUANTUM).svv
    target = bath.hbar * math.sqrt(pot.omega0_sq) / 2
    rel = abs(svv - target) / target
    return CheckResult("10 zero-point velocity variance", target, svv, 0.05, rel <= 0.05, {"relative_error": rel})


def check_dispersion():
    pot = paper_potential()
    t = np.linspace(0.0, 10.0, 201)
    inv_dev, closed_dev = 0.0, 0.0
    for v2, closed in ((pot.omega0_sq, delta_x2_well), (-pot.omegab_sq, delta_x2_barrier)):
        w = math.sqrt(abs(v2))
        for s0 in (FluctuationState.minimum_uncertainty(1.0, w), FluctuationState(0.7, 0.3, 1.1)):
            inv = invariant_along_flow(s0, v2, t)
            inv_dev = max(inv_dev, float(np.max(np.abs(inv / s0.invariant() - 1.0))))
            ox = ode_moments(s0, v2, t)[0]
            cx = closed(s0, abs(v2), t)
            closed_dev = max(closed_dev, float(np.max(np.abs(cx - ox) / np.maximum(1.0, np.abs(ox)))))
    ok = inv_dev <= 1e-8 and closed_dev <= 1e-9
    return CheckResult("11 dispersion invariants and closed forms", 0.0,
                       {"invariant_rel": inv_dev, "closed_vs_ode_rel": closed_dev},
                       {"invariant_rel": 1e-8, "closed_vs_ode_rel": 1e-9}, ok)


def check_monte_carlo(n_traj=10_000, dt=0.01, t_max=800.0, seed=12345, threads=None):
    pot = paper_potential()
    bath = BathSpec(1.3, 0.3, 2.5)
    k73 = rate(bath, pot, bathmod.CLASSICAL, "classical").k
    cfg = SimConfig(dt=dt, t_max=t_max, n_traj=n_traj, seed=seed, noise_mode=bathmod.CLASSICAL, threads=threads)
    est = estimate_rate(pot, bath, cfg)
    half = estimate_rate(pot, bath, cfg.replace(dt=dt / 2))
    tol = max(2 * est.stderr, 0.25 * k73)
    shift = abs(half.k_sim - est.k_sim)
    ok = abs(est.k_sim - k73) <= tol and shift < est.stderr
    return CheckResult("12 Monte Carlo cross-check", k73, {"k_sim": est.k_sim, "k_sim_half_dt": half.k_sim},
                       {"abs": tol, "dt_shift_max": est.stderr}, ok,
                       {"stderr": est.stderr, "n_escaped": est.n_escaped, "censored": est.censored,
                        "dt_shift": shift})


CHECKS = (
    check_classical_reduction,
    check_markov_limit,
    check_grote_hynes,
    check_arrhenius,
    check_low_temperature,
    check_friction,
    check_variance_methods,
    check_relaxation_ode,
    check_equipartition,
    check_zero_point,
    check_dispersion,
    check_monte_carlo,
)


def run_all(prefactor_scale=1.0, skip_monte_carlo=False):
    results = []
    for check in CHECKS:
        if check is check_monte_carlo and skip_monte_carlo:
            continue
        if check is check_classical_reduction:
            results.append(check(prefactor_scale))
        else:
            results.append(check())
    return results
