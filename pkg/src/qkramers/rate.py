"""Flux-over-population escape rate from the stationary barrier and well
solutions of the generalized Kramers equation.

At the barrier the stationary density is written as a Gaussian factor times
``zeta(u)`` with ``u = a (x + alpha_b) + v - g_b``. Matching coefficients of
``u`` gives ``A a^2 + B a - C = 0`` and ``lambda = -C / a``, where
``A = 1 + psi_b/D_b``, ``B = gamma_b`` and ``C = D_b omega_b^2 / (D_b + psi_b)``.
The root is chosen so that ``Lambda = lambda / (phi_b + a psi_b) > 0``.

By default the activation energy in the exponent is the barrier height of
the renormalized (curvature-rescaled) potential, ``E omega_b~^2 / omega_b^2``.
The dispersion shift acts over the true well-to-barrier distance.
"""

import dataclasses
import math

import numpy as np
from scipy import integrate, special

from . import bath as bathmod
from .errors import DomainError, StructuralError
from .fpcoeffs import asymptotics
from .resolvent import RegionKind

FORMULAS = ("full", "simplified", "classical")

_HERMITE_X, _HERMITE_W = np.polynomial.hermite.hermgauss(80)


@dataclasses.dataclass(frozen=True)
class TransmissionParams:
    a: float
    lam: float
    big_lambda: float
    abc: tuple
    alpha_b: float
    rejected: dict = dataclasses.field(default_factory=dict, compare=False)

    def quadratic_residual(self):
        A, B, C = self.abc
        return A * self.a**2 + B * self.a - C


@dataclasses.dataclass(frozen=True)
class RateResult:
    k: float
    transmission: TransmissionParams
    z_norm: float
    i_integral: float
    d0: float
    psi0: float
    db: float
    psib: float
    gb: float
    nb: float
    formula: str
    diagnostics: dict = dataclasses.field(default_factory=dict, compare=False)

    def to_dict(self):
        out = dataclasses.asdict(self)
        tp = out["transmission"]
        tp["abc"] = list(tp["abc"])
        return out


def _drift_shift(coeffs):
    """``Omega - N + gamma g`` for a set of asymptotic coefficients."""
    return coeffs.omega_drift_inf - coeffs.n_inf + coeffs.gamma_inf * coeffs.g_inf


def transmission(barrier, xb=0.0):
    """Barrier transformation parameters ``(a, lambda, Lambda)``.

    Parameters
    ----------
    barrier : AsymptoticCoefficients
        Barrier-top coefficients.
    xb : float
        Barrier position, used only for ``alpha_b``.
    """
    db, psi, gam, w2 = barrier.d, barrier.psi_inf, barrier.gamma_inf, barrier.omega_inf_sq
    if not db > 0:
        raise DomainError("D_b must be positive")
    A = 1.0 + psi / db
    B = gam
    C = db * w2 / (db + psi)
    disc = B * B + 4.0 * A * C
    if disc < 0 or A == 0:
        raise StructuralError("transmission quadratic has no real root", {"A": A, "B": B, "C": C})
    sq = math.sqrt(disc)
    # numerically stable pair of roots
    q = -0.5 * (B + math.copysign(sq, B) if B != 0 else sq)
    roots = sorted({q / A, -C / q} if q != 0 else {sq / (2 * A), -sq / (2 * A)})
    phi = gam * db
    candidates = []
    for a in roots:
        lam = -C / a
        denom = phi + a * psi
        big = lam / denom if denom != 0 else math.nan
        candidates.append((a, lam, big))
    good = [c for c in candidates if c[2] > 0 and c[1] > 0]
    if not good:
        raise StructuralError("no root of the transmission quadratic gives Lambda > 0",
                              {"candidates": candidates, "A": A, "B": B, "C": C})
    # prefer the negative root when both qualify
    a, lam, big = min(good, key=lambda c: c[0])
    rejected = {"a": [c[0] for c in candidates if c[0] != a], "Lambda": [c[2] for c in candidates if c[0] != a]}
    alpha_b = -(_drift_shift(barrier) + xb * w2) / w2
    return TransmissionParams(a, lam, big, (A, B, C), alpha_b, rejected)


def zeta_boundary(tp, u, f2=1.0):
    """Barrier form factor ``zeta(u)``; rises from 0 at ``u -> -inf`` to ``f2 sqrt(2 pi / Lambda)``."""
    lam = tp.big_lambda
    if not lam > 0:
        raise DomainError("Lambda must be positive")
    u = np.asarray(u, dtype=float)
    half = math.sqrt(math.pi / (2.0 * lam))
    return f2 * half * (1.0 + special.erf(u * math.sqrt(lam / 2.0)))


def _inner_primitive(lam, u):
    return math.sqrt(math.pi / (2.0 * lam)) * special.erf(np.asarray(u) * math.sqrt(lam / 2.0))


def i_integral(tp, barrier, xb=0.0):
    """``int F(x_b, v) exp(-(v - g_b)^2 / 2 D_b) dv`` with ``F`` the erf primitive.

    Gauss-Hermite (80 nodes) after centring on ``g_b``.
    """
    db = barrier.d
    offset = tp.a * (xb + tp.alpha_b)
    y = math.sqrt(2.0 * db) * _HERMITE_X
    return float(math.sqrt(2.0 * db) * np.dot(_HERMITE_W, _inner_primitive(tp.big_lambda, offset + y)))


def i_integral_adaptive(tp, barrier, xb=0.0):
    """Adaptive-quadrature reference for :func:`i_integral`."""
    db, gb = barrier.d, barrier.g_inf
    offset = tp.a * (xb + tp.alpha_b)

    def f(v):
        return float(_inner_primitive(tp.big_lambda, offset + v - gb)) * math.exp(-(v - gb) ** 2 / (2 * db))

    val, _ = integrate.quad(f, -np.inf, np.inf, epsabs=1e-13, epsrel=1e-12)
    return val


def well_normalization(well):
    """Normalization of the stationary well density (bottom at ``x = 0``)."""
    d0, psi0, w2 = well.d, well.psi_inf, well.omega_inf_sq
    if not (d0 > 0 and d0 + psi0 > 0 and w2 > 0):
        raise StructuralError("non-positive radicand in well normalization",
                              {"d0": d0, "psi0": psi0, "omega_sq": w2})
    s = _drift_shift(well)
    return (2.0 * math.pi / math.sqrt(w2)) * math.sqrt(d0) * math.sqrt(d0 + psi0) * math.exp(
        s * s / (2.0 * (d0 + psi0) * w2))


ENERGY_CONVENTIONS = ("renormalized", "bare")


def renormalized_barrier_height(potential, barrier):
    return potential.e_act * barrier.omega_inf_sq / potential.omegab_sq


def barrier_height(potential, barrier, energy="renormalized"):
    if energy == "renormalized":
        return renormalized_barrier_height(potential, barrier)
    if energy == "bare":
        return potential.e_act
    raise DomainError(f"energy must be one of {ENERGY_CONVENTIONS}")


def kramers_rate(well, barrier, potential, formula="full", prefactor_scale=1.0, energy="renormalized"):
    """Escape rate from asymptotic well and barrier coefficients.

    Parameters
    ----------
    well, barrier : AsymptoticCoefficients
    potential : CubicPotential
    formula : {"full", "simplified", "classical"}
        ``full`` keeps every dispersion term, ``simplified`` keeps only the
        leading (linear) dispersion term in the exponent and drops ``Omega``,
        ``classical`` ignores ``g_b`` and ``N_b`` altogether.
    prefactor_scale : float
        Multiplies the ``full`` prefactor. Anything other than 1 is a
        deliberate corruption used to check that validation catches it.
    energy : {"renormalized", "bare"}
        Barrier height in the exponent: the height of the curvature-rescaled
        potential (reduces to Grote-Hynes in the classical limit) or the bare
        ``V(x_b) - V(x_0)``.
    """
    if formula not in FORMULAS:
        raise DomainError(f"formula must be one of {FORMULAS}")
    if well.region is not RegionKind.WELL or barrier.region is not RegionKind.BARRIER:
        raise DomainError("expected (well, barrier) coefficients")
    e = barrier_height(potential, barrier, energy)
    if not e > 0:
        raise DomainError("activation energy must be positive")
    xb = potential.xb
    tp = transmission(barrier, xb)
    lam = tp.big_lambda
    d0, psi0, w02 = well.d, well.psi_inf, well.omega_inf_sq
    db, psib, gb, nb = barrier.d, barrier.psi_inf, barrier.g_inf, barrier.n_inf
    wb2 = barrier.omega_inf_sq
    z = well_normalization(well)
    ii = i_integral(tp, barrier, xb)
    s0, sb = _drift_shift(well), _drift_shift(barrier)
    dist = potential.xb - potential.x0
    lead = math.sqrt(w02) / (2 * math.pi) * math.sqrt(lam / (2 * math.pi)) / (math.sqrt(db) * math.sqrt(d0 + psi0))
    gauss = db * math.sqrt(2 * math.pi * db / (1 + lam * db))
    current_g = gb * (math.sqrt(math.pi / (2 * lam)) * math.sqrt(2 * math.pi * db) + ii)
    if formula == "full":
        k = (prefactor_scale * lead * math.exp(-s0 * s0 / (2 * (d0 + psi0) * w02))
             * (gauss * math.exp(-lam * tp.a**2 * sb * sb / (2 * (1 + lam * db) * wb2**2)) + current_g)
             * math.exp(-(e + sb * dist) / (db + psib)))
    elif formula == "simplified":
        k = (lead * (gauss + current_g)
             * math.exp((nb - gb * barrier.gamma_inf) * dist / (db + psib))
             * math.exp(-e / (db + psib)))
    else:
        k = (math.sqrt(w02) / (2 * math.pi) * math.sqrt(lam / (1 + lam * db)) * db / math.sqrt(d0 + psi0)
             * math.exp(-e / (db + psib)))
    diag = {
        "activation_energy": e,
        "energy_convention": energy,
        "harmonic_distance": math.sqrt(2.0 * e / wb2),
        "true_distance": dist,
        "quadratic_residual": tp.quadratic_residual(),
        "barrier_effective_temperature": barrier.diagnostics.get("effective_temperature"),
    }
    return RateResult(float(k), tp, z, ii, d0, psi0, db, psib, gb, nb, formula, diag)


def compute_asymptotics(bath, potential, mode=bathmod.QUANTUM, dispersion=None, method="analytic", t_star=None):
    well = asymptotics(bath, potential, RegionKind.WELL, dispersion, mode, method, t_star)
    barrier = asymptotics(bath, potential, RegionKind.BARRIER, dispersion, mode, method, t_star)
    return well, barrier


def without_dispersion(coeffs):
    """Copy of ``coeffs`` with ``g`` and ``N`` set to zero."""
    return dataclasses.replace(coeffs, n_inf=0.0, g_inf=0.0)


def rate(bath, potential, mode=bathmod.QUANTUM, formula="full", dispersion=None, zero_dispersion=False,
         method="analytic", t_star=None, prefactor_scale=1.0, energy="renormalized"):
    """Convenience wrapper: asymptotic coefficients then :func:`kramers_rate`."""
    well, barrier = compute_asymptotics(bath, potential, mode, dispersion, method, t_star)
    if zero_dispersion:
        well, barrier = without_dispersion(well), without_dispersion(barrier)
    return kramers_rate(well, barrier, potential, formula, prefactor_scale, energy)


def grote_hynes_rate(bath, potential):
    """Classical closed form ``(w0 l_r / 2 pi w_b) exp(-E / kT)``."""
    from .resolvent import grote_hynes_root

    lam = grote_hynes_root(bath, potential.omegab_sq)
    return (math.sqrt(potential.omega0_sq) * lam / (2 * math.pi * math.sqrt(potential.omegab_sq))
            * math.exp(-potential.e_act / bath.kt))
