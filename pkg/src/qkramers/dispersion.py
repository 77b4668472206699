"""Lowest-order quantum dispersion of the system.

Second moments of the quantum corrections ``dX``, ``dP`` around a locally
harmonic point with curvature ``v2 = V''(x)`` obey a closed linear flow; the
dispersion force is ``Q(t) = -V'''(x) <dX^2(t)> / 2``.
"""

import dataclasses
import math

import numpy as np
from scipy import integrate

from .errors import DomainError, IntegrationError
from .resolvent import ExponentialSum, RegionKind


@dataclasses.dataclass(frozen=True)
class FluctuationState:
    """``dx2 = <dX^2>``, ``sym = <dX dP + dP dX>``, ``dp2 = <dP^2>``."""

    dx2: float
    sym: float
    dp2: float

    def __post_init__(self):
        if self.dx2 < 0 or self.dp2 < 0:
            raise DomainError("dx2 and dp2 must be non-negative")

    @classmethod
    def minimum_uncertainty(cls, hbar, omega):
        """Coherent-like state matched to frequency ``omega``: (hbar/2w, 0, hbar w/2)."""
        return cls(hbar / (2.0 * omega), 0.0, hbar * omega / 2.0)

    def invariant(self):
        """Symplectic invariant ``dx2 dp2 - (sym/2)^2`` (>= hbar^2/4)."""
        return self.dx2 * self.dp2 - 0.25 * self.sym**2

    @classmethod
    def from_config(cls, d, hbar, omega):
        if d is None or d.get("minimum_uncertainty", False):
            return cls.minimum_uncertainty(hbar, omega)
        return cls(float(d["dx2"]), float(d.get("sym", 0.0)), float(d["dp2"]))


def moment_rhs(state, v2):
    dx2, sym, dp2 = state
    return np.array([sym, 2.0 * dp2 - 2.0 * v2 * dx2, -v2 * sym])


def _flow(x0, s0, p0, v2, t, lib):
    """Constant-curvature moment flow written against a math backend ``lib``."""
    if v2 > 0:
        w = lib.sqrt(v2)
        inv = p0 + v2 * x0
        c, s = lib.cos(2 * w * t), lib.sin(2 * w * t)
        dx2 = inv / (2 * v2) + (x0 - p0 / v2) * c / 2 + s0 / (2 * w) * s
        sym = -w * (x0 - p0 / v2) * s + s0 * c
    elif v2 < 0:
        w = lib.sqrt(-v2)
        inv = p0 + v2 * x0  # p0 - wb^2 x0
        ch, sh = lib.cosh(2 * w * t), lib.sinh(2 * w * t)
        dx2 = x0 * ch + s0 / (2 * w) * sh + inv / (2 * w * w) * (ch - 1)
        sym = 2 * w * x0 * sh + s0 * ch + inv / w * sh
    else:
        inv = p0
        dx2 = x0 + s0 * t + p0 * t * t
        sym = s0 + 2 * p0 * t
    dp2 = inv - v2 * dx2 if v2 != 0 else p0 + 0 * t
    return dx2, sym, dp2


def evolve_moments(state0, v2, t):
    """Closed-form solution of the moment flow at constant curvature ``v2``."""
    if np.any(np.asarray(t) < 0):
        raise DomainError("t must be >= 0")
    t = np.asarray(t, dtype=float)
    return _flow(state0.dx2, state0.sym, state0.dp2, v2, t, np)


def invariant_along_flow(state0, v2, t, dps=60):
    """Symplectic invariant of the evolved moments, evaluated with ``dps`` digits.

    At a barrier ``dx2`` and ``dp2`` grow like ``exp(4 wb t)`` while the
    invariant stays O(hbar^2), so double precision cancels completely for
    ``wb t`` beyond a few units. The closed-form flow is evaluated in
    multiprecision and the result rounded to float.
    """
    import mpmath

    with mpmath.workdps(dps):
        mp = mpmath.mpf
        out = []
        for ti in np.atleast_1d(np.asarray(t, dtype=float)):
            if ti < 0:
                raise DomainError("t must be >= 0")
            x, s, p = _flow(mp(state0.dx2), mp(state0.sym), mp(state0.dp2), mp(v2), mp(ti), mpmath)
            out.append(float(x * p - s * s / 4))
    return np.array(out)


def delta_x2_well(state0, omega0_sq, t):
    """``<dX^2(t)>`` about the elliptic fixed point (well bottom)."""
    if not omega0_sq > 0:
        raise DomainError("omega0_sq must be positive")
    w = math.sqrt(omega0_sq)
    t = np.asarray(t, dtype=float)
    ic = state0.dp2 + omega0_sq * state0.dx2
    return (0.5 * (state0.dx2 - state0.dp2 / omega0_sq) * np.cos(2 * w * t)
            + state0.sym / (2 * w) * np.sin(2 * w * t) + 2 * ic / (4 * omega0_sq))


def delta_x2_barrier(state0, omegab_sq, t):
    """``<dX^2(t)>`` about the hyperbolic fixed point (barrier top).

    For ``dp2 = omegab^2 dx2`` this is ``dx2 cosh(2 wb t) + sym/(2 wb) sinh(2 wb t)``.
    """
    if not omegab_sq > 0:
        raise DomainError("omegab_sq must be positive")
    w = math.sqrt(omegab_sq)
    t = np.asarray(t, dtype=float)
    ch, sh = np.cosh(2 * w * t), np.sinh(2 * w * t)
    return (state0.dx2 * ch + state0.sym / (2 * w) * sh
            + (state0.dp2 / omegab_sq - state0.dx2) * 0.5 * (ch - 1.0))


def delta_x2_sum(state0, v2):
    """``<dX^2(t)>`` at constant curvature as an :class:`ExponentialSum`."""
    x0, s0, p0 = state0.dx2, state0.sym, state0.dp2
    if v2 > 0:
        w = math.sqrt(v2)
        a = 0.5 * (x0 - p0 / v2)
        b = s0 / (2 * w)
        const = (p0 + v2 * x0) / (2 * v2)
        # a cos + b sin = Re[(a - i b) e^{2iwt}]
        z = 0.5 * (a - 1j * b)
        return ExponentialSum([const, z, np.conj(z)], [0.0, 2j * w, -2j * w])
    if v2 < 0:
        w = math.sqrt(-v2)
        k = (p0 + v2 * x0) / (2 * w * w)
        ch = x0 + k
        sh = s0 / (2 * w)
        return ExponentialSum([-k, 0.5 * (ch + sh), 0.5 * (ch - sh)], [0.0, 2 * w, -2 * w])
    return ExponentialSum([x0, s0, p0], [0.0, 0.0, 0.0], [0, 1, 2])


def region_curvature(potential, region):
    region = RegionKind.parse(region)
    x = potential.x0 if region is RegionKind.WELL else potential.xb
    return x, potential.derivative(x, 2)


def default_state(potential, region, hbar):
    _, v2 = region_curvature(potential, region)
    return FluctuationState.minimum_uncertainty(hbar, math.sqrt(abs(v2)))


def quantum_dispersion_sum(potential, region, state0):
    """``Q(t) = -V'''(x_region) <dX^2(t)> / 2`` as an exponential sum."""
    x, v2 = region_curvature(potential, region)
    return delta_x2_sum(state0, v2) * (-0.5 * potential.derivative(x, 3))


def quantum_dispersion_q(potential, region, state0, t):
    return quantum_dispersion_sum(potential, region, state0)(t)


def ode_moments(state0, v2, t_grid, rtol=1e-12, atol=1e-14):
    """Numerical oracle for :func:`evolve_moments`."""
    t_grid = np.asarray(t_grid, dtype=float)
    sol = integrate.solve_ivp(lambda _t, s: moment_rhs(s, v2), (0.0, float(t_grid[-1])),
                              [state0.dx2, state0.sym, state0.dp2], method="DOP853",
                              t_eval=t_grid, rtol=rtol, atol=atol)
    if not sol.success:
        raise IntegrationError(sol.message)
    return sol.y
