"""Time-dependent and asymptotic Fokker-Planck coefficients near the well
bottom and the barrier top.

The drift coefficients come from the determinant-like auxiliary

    Y(t) = m(t) chi(t) / w^2 + s M(t)^2,   chi = 1 - s w^2 int_0^t M,

with ``s = +1`` in the well and ``-1`` at the barrier, giving
``gamma(t) = -dY/dt / Y`` and ``omega^2(t) = (m^2 - M dm/dt) / Y``. Because
``chi`` has no constant term, both ``Y`` and ``m^2 - M dm/dt`` reduce to sums
over distinct pairs of resolvent roots; the diagonal ``exp(2 l t)`` pieces
cancel identically. Building the pair sums directly avoids subtracting large
numbers at the barrier, where ``M`` grows.
"""

import dataclasses
import math

import numpy as np

from . import bath as bathmod
from .dispersion import FluctuationState, quantum_dispersion_sum, region_curvature
from .errors import ConvergenceError, DomainError, NumericError, StructuralError
from .moments import convolution_g, gb_short_time, spectral_variances, stationary_variances
from .resolvent import ExponentialSum, RegionKind, build_relaxation, chi_x, reactive_root

CSV_HEADER = ("t", "gamma", "omega_sq", "phi", "psi", "N", "Omega", "g", "Y")


@dataclasses.dataclass(frozen=True)
class FpCoefficients:
    t: float
    gamma_t: float
    omega_t_sq: float
    phi: float
    psi: float
    n_t: float
    omega_drift: float
    g_t: float
    y_t: float
    region: RegionKind

    def row(self):
        return (self.t, self.gamma_t, self.omega_t_sq, self.phi, self.psi,
                self.n_t, self.omega_drift, self.g_t, self.y_t)


@dataclasses.dataclass(frozen=True)
class AsymptoticCoefficients:
    """Long-time coefficients feeding the rate.

    ``d`` is the diffusion ratio ``phi/gamma`` and ``d + psi_inf`` acts as an
    effective temperature for the position marginal.
    """

    d: float
    psi_inf: float
    gamma_inf: float
    omega_inf_sq: float
    n_inf: float
    g_inf: float
    region: RegionKind
    omega_drift_inf: float = 0.0
    method: str = "analytic"
    diagnostics: dict = dataclasses.field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        if not self.d > 0:
            raise StructuralError(f"diffusion ratio D must be positive, got {self.d}", {"region": self.region.value})
        if not self.d + self.psi_inf > 0:
            raise StructuralError("D + psi must be positive",
                                  {"d": self.d, "psi": self.psi_inf, "region": self.region.value})
        if self.omega_drift_inf != 0.0:
            raise StructuralError("long-time Omega must vanish", {"omega_drift_inf": self.omega_drift_inf})

    def to_dict(self):
        out = dataclasses.asdict(self)
        out["region"] = self.region.value
        out.pop("diagnostics")
        return out


def pair_sums(M, region):
    """``(Y, W)`` with ``W = m^2 - M dm/dt``, as pair sums over the roots of ``M``."""
    region = RegionKind.parse(region)
    c, l = M.coeffs, M.rates
    yc, wc, rates = [], [], []
    for i in range(len(M)):
        for j in range(i + 1, len(M)):
            w = -c[i] * c[j] * (l[i] - l[j]) ** 2
            wc.append(w)
            yc.append(region.sign * w / (l[i] * l[j]))
            rates.append(l[i] + l[j])
    return ExponentialSum(yc, rates).simplify(), ExponentialSum(wc, rates).simplify()


def _dispersion_state(potential, region, bath, dispersion):
    _, v2 = region_curvature(potential, region)
    return FluctuationState.from_config(dispersion, bath.hbar, math.sqrt(abs(v2)))


class RegionModel:
    """Symbolic ingredients of one region, built once and evaluated on demand.

    Parameters
    ----------
    bath : BathSpec
    potential : CubicPotential
    region : RegionKind or str
    dispersion : dict, optional
        Initial fluctuation state; ``None`` selects the minimum-uncertainty
        state matched to the local frequency. ``{"enabled": False}`` switches
        the dispersion force off.
    mode : {"quantum", "classical"}
        Noise statistics. Classical mode also drops the dispersion force.
    """

    def __init__(self, bath, potential, region, dispersion=None, mode=bathmod.QUANTUM):
        self.bath = bath
        self.potential = potential
        self.region = RegionKind.parse(region)
        self.mode = mode
        self.omega_sq = potential.omega0_sq if self.region is RegionKind.WELL else potential.omegab_sq
        self.M = build_relaxation(bath, self.omega_sq, self.region)
        self.m = self.M.derivative()
        self.mdot = self.m.derivative()
        self.chi = chi_x(self.M, self.omega_sq, self.region)
        self.Y, self.W = pair_sums(self.M, self.region)
        enabled = mode == bathmod.QUANTUM and (dispersion or {}).get("enabled", True)
        if enabled:
            state = _dispersion_state(potential, self.region, bath, dispersion)
            self.Q = quantum_dispersion_sum(potential, self.region, state)
        else:
            self.Q = ExponentialSum.zero()
        self.G, self.g = convolution_g(self.M, self.Q)
        s = self.region.sign
        # N numerator: well carries -g dm chi / w^2, barrier +g dm chi / w^2
        self.N_num = (self.g * self.mdot * self.chi) * (-s / self.omega_sq) + self.m * self.m * self.G
        self.Omega = self.M * (self.g * self.m + self.G * self.mdot)

    def product_y(self, t):
        """``Y`` from the unreduced product form; cross-check for :func:`pair_sums`."""
        return (self.m(t) * self.chi(t) / self.omega_sq + self.region.sign * self.M(t) ** 2)

    def drift(self, t):
        """``(gamma(t), omega^2(t), Y(t))`` evaluated with the dominant growth scaled out."""
        shift = self.Y.max_real_rate()
        y = self.Y.value(t, shift).real
        if np.any(y <= 0):
            bad = np.atleast_1d(t)[np.atleast_1d(y) <= 0]
            raise NumericError("Y(t) is not positive; drift coefficients undefined",
                               {"t": bad.tolist(), "region": self.region.value})
        gam = -self.Y.derivative().value(t, shift).real / y
        w2 = self.W.value(t, shift).real / y
        return gam, w2, self.Y(t)

    def at(self, t):
        t = float(t)
        if not t > 0:
            raise DomainError("t must be > 0")
        gam, w2, y = self.drift(t)
        shift = self.Y.max_real_rate()
        n = float(self.N_num.value(t, shift).real / self.Y.value(t, shift).real) if len(self.Q) else 0.0
        var = spectral_variances(self.bath, self.M, t, self.mode, derivatives=True)
        phi, psi = combine_diffusion(var, gam, w2, self.region)
        return FpCoefficients(t, float(gam), float(w2), phi, psi, n, float(self.Omega(t)),
                              float(self.g(t)), float(y), self.region)


def combine_diffusion(var, gamma, omega_sq, region):
    """``(phi, psi)`` from variances, their derivatives and the drift pair."""
    k = RegionKind.parse(region).sign * omega_sq
    phi = 0.5 * var.dsvv + k * var.sxv + gamma * var.svv
    psi = var.dsxv - var.svv + k * var.sxx + gamma * var.sxv
    return float(phi), float(psi)


def coefficients_at(bath, potential, region, dispersion=None, t=1.0, mode=bathmod.QUANTUM):
    """All time-dependent coefficients of one region at time ``t > 0``."""
    return RegionModel(bath, potential, region, dispersion, mode).at(t)


def coefficient_table(model, t_grid):
    return [model.at(t) for t in t_grid]


def dominant_drift_limit(model):
    """Long-time ``(gamma, omega^2, oscillatory)`` from the dominant pair of ``Y``.

    When the leading exponent of ``Y`` is real (two real roots or a conjugate
    pair) the limit exists and is ``gamma = -(r1 + r2)``, ``omega^2 = s r1 r2``.
    When it is a complex-conjugate pair of exponents the ratios oscillate
    forever; the envelope (real parts of the pair) is returned and flagged.
    """
    rates = model.M.rates
    best = None
    for i in range(len(rates)):
        for j in range(i + 1, len(rates)):
            e = (rates[i] + rates[j]).real
            if best is None or e > best[0] + 1e-12:
                best = (e, rates[i], rates[j])
    _, r1, r2 = best
    oscillatory = abs((r1 + r2).imag) > 1e-12 * max(1.0, abs(r1 + r2))
    if oscillatory:
        r1, r2 = r1.real, r2.real
    else:
        r1, r2 = (r1, r2)
    gamma = -float((r1 + r2).real)
    omega_sq = float((model.region.sign * r1 * r2).real)
    return gamma, omega_sq, oscillatory


def plateau_drift(model, t_start=None, t_max=None, tol=1e-4, per_decade=10):
    """Numerical long-time ``(gamma, omega^2)`` by plateau detection.

    Evaluates on a geometric grid until the relative change over one decade
    of ``t`` falls below ``tol``. Raises :class:`ConvergenceError` with the
    trace when no plateau is found by ``t_max``.
    """
    scale = max(abs(r) for r in model.M.rates)
    t_start = t_start or 1.0 / scale
    t_max = t_max or 1e3 / min(abs(r.real) for r in model.M.rates if r.real != 0)
    ts = np.geomspace(t_start, t_max, int(per_decade * np.log10(t_max / t_start)) + 1)
    gam, w2, _ = model.drift(ts)
    trace = np.stack([ts, gam, w2], axis=1)
    for k in range(per_decade, ts.size):
        window = slice(k - per_decade, k + 1)
        ref = np.array([gam[k], w2[k]])
        spread = np.array([np.ptp(gam[window]), np.ptp(w2[window])])
        if np.all(spread <= tol * np.maximum(np.abs(ref), 1e-300)):
            return float(gam[k]), float(w2[k]), float(ts[k])
    raise ConvergenceError("drift coefficients did not plateau",
                           {"region": model.region.value, "trace": trace[-3 * per_decade:].tolist()})


def barrier_effective_temperature(bath, M, mode=bathmod.QUANTUM):
    """Effective temperature of the barrier-top noise.

    Ratio of ``int S(w) |M~(-iw)|^2 dw`` for the given noise to the same
    integral with classical noise at unit thermal energy. Classical noise gives
    ``kT`` exactly; quantum noise stays finite at ``T = 0``.
    """
    q = stationary_variances(bath, M, mode).sxx
    ref = stationary_variances(bath.replace(temperature=1.0 / bath.kb), M, bathmod.CLASSICAL).sxx
    return float(q / ref)


def _period_average(f, t0, period, n=64):
    ts = t0 + period * (np.arange(n) + 0.5) / n
    return float(np.mean(f(ts)))


def asymptotics(bath, potential, region, dispersion=None, mode=bathmod.QUANTUM, method="analytic",
                t_star=None, gb_window=None):
    """Long-time coefficients of one region.

    Parameters
    ----------
    method : {"analytic", "plateau", "finite"}
        How the drift pair is obtained: dominant-pair limit, numerical plateau
        detection (fails on oscillatory tails), or evaluation at ``t_star``.
    gb_window : (float, float), optional
        Fit window for the barrier short-time slope of ``G``. Defaults to
        ``(0.05, 0.5) / (2 w_b)``.
    """
    model = RegionModel(bath, potential, region, dispersion, mode)
    diag = {"roots": [complex(r) for r in model.M.rates]}
    if method == "analytic":
        gam, w2, osc = dominant_drift_limit(model)
        diag["oscillatory_tail"] = osc
    elif method == "plateau":
        gam, w2, t_plateau = plateau_drift(model)
        diag["t_plateau"] = t_plateau
    elif method == "finite":
        if t_star is None or not t_star > 0:
            raise DomainError("method='finite' needs t_star > 0")
        gam, w2, _ = model.drift(float(t_star))
        gam, w2 = float(gam), float(w2)
    else:
        raise DomainError(f"unknown method {method!r}")
    if model.region is RegionKind.WELL:
        return _well_asymptotics(model, gam, w2, method, diag)
    return _barrier_asymptotics(model, gam, w2, method, diag, gb_window)


def _well_asymptotics(model, gam, w2, method, diag):
    var = stationary_variances(model.bath, model.M, model.mode)
    d = var.svv
    psi = w2 * var.sxx - var.svv
    n_inf = g_inf = 0.0
    if len(model.Q):
        # M decays, so G settles to its time-averaged (zero-rate) part and
        # g averages to zero. N is fixed by requiring the stationary mean
        # -(Omega - N + gamma g) / omega^2 to equal that average shift.
        g_bar = float(sum(c.real for c, r, k in zip(model.G.coeffs, model.G.rates, model.G.powers)
                          if abs(r) < 1e-12 and k == 0))
        n_inf = w2 * g_bar
        diag["g_bar"] = g_bar
        _, _, osc = dominant_drift_limit(model)
        if not osc:
            decay = -max(r.real for r in model.M.rates)
            t0 = 40.0 / decay
            freqs = [abs(r.imag) for r in model.M.rates if abs(r.imag) > 0]
            period = 2 * np.pi / min(freqs) if freqs else 1.0 / decay
            shift = model.Y.max_real_rate()
            diag["n_ratio_period_average"] = _period_average(
                lambda t: model.N_num.value(t, shift).real / model.Y.value(t, shift).real, t0, period)
            diag["omega_drift_at_t0"] = float(model.Omega(t0))
    diag.update(sxx_inf=var.sxx, svv_inf=var.svv)
    return AsymptoticCoefficients(d, float(psi), gam, w2, n_inf, g_inf, RegionKind.WELL, method=method,
                                  diagnostics=diag)


def _barrier_asymptotics(model, gam, w2, method, diag, gb_window):
    tb = barrier_effective_temperature(model.bath, model.M, model.mode)
    d = tb
    psi = tb * (w2 / model.omega_sq - 1.0)
    n_inf = g_inf = 0.0
    if len(model.Q):
        wb = math.sqrt(model.omega_sq)
        window = gb_window or (0.05 / (2 * wb), 0.5 / (2 * wb))
        g_inf, resid = gb_short_time(model.G, window)
        lam = reactive_root(model.M)
        t_end = float(window[1])
        n_inf = lam**2 * float(model.G(t_end))
        diag.update(gb_fit_residual=resid, gb_window=list(window),
                    n_full_at_window_end=float(model.N_num(t_end) / model.Y(t_end)))
    diag["effective_temperature"] = tb
    return AsymptoticCoefficients(d, float(psi), gam, w2, n_inf, g_inf, RegionKind.BARRIER, method=method,
                                  diagnostics=diag)
