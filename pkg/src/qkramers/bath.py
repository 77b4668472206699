"""Lorentzian heat bath: spectral density, exponential memory kernel and the
quantum/classical noise autocorrelation.

Conventions: unit particle mass; the one-sided noise spectrum ``S(omega)`` is
defined by ``c(tau) = int_0^inf S(omega) cos(omega tau) d omega``, so that

    S(omega) = kappa*rho(omega) * (hbar omega / 2) coth(hbar omega / 2 kT)

in quantum mode and ``kappa*rho(omega) * kT`` classically.
"""

import dataclasses
import json
import math
import warnings

import numpy as np
from scipy import integrate

from .errors import ConvergenceError, DomainError

QUANTUM = "quantum"
CLASSICAL = "classical"
_COTH_SMALL = 1e-8


@dataclasses.dataclass(frozen=True)
class BathSpec:
    """Bath and thermal parameters.

    Parameters
    ----------
    gamma : float
        Damping strength (zero-frequency friction), 1/time.
    tau_c : float
        Noise correlation time.
    temperature : float
        Temperature; ``kb * temperature`` is the thermal energy.
    hbar, kb : float
        Planck and Boltzmann constants (default 1).
    omega_max : float, optional
        High-frequency cutoff for quadrature and noise synthesis. Defaults to
        ``1e3 / tau_c``.
    """

    gamma: float
    tau_c: float
    temperature: float
    hbar: float = 1.0
    kb: float = 1.0
    omega_max: float = None

    def __post_init__(self):
        if self.omega_max is None:
            object.__setattr__(self, "omega_max", 1e3 / self.tau_c if self.tau_c > 0 else math.inf)
        if not self.gamma >= 0:
            raise DomainError(f"gamma must be >= 0, got {self.gamma}")
        if not self.tau_c > 0:
            raise DomainError(f"tau_c must be > 0, got {self.tau_c}")
        if not self.temperature >= 0:
            raise DomainError(f"temperature must be >= 0, got {self.temperature}")
        if not (self.hbar > 0 and self.kb > 0):
            raise DomainError("hbar and kb must be positive")
        if not (self.omega_max > 0 and math.isfinite(self.omega_max)):
            raise DomainError(f"omega_max must be positive and finite, got {self.omega_max}")
        if self.omega_max * self.tau_c < 1e2:
            warnings.warn(
                f"omega_max*tau_c = {self.omega_max * self.tau_c:.3g} < 100: cutoff is close to the Lorentzian knee",
                RuntimeWarning,
                stacklevel=3,
            )

    @property
    def kt(self):
        return self.kb * self.temperature

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)

    def to_dict(self):
        return dataclasses.asdict(self)

    def to_json(self):
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d):
        known = {"gamma", "tau_c", "temperature", "hbar", "kb", "omega_max"}
        unknown = set(d) - known
        if unknown:
            raise DomainError(f"unknown bath keys: {sorted(unknown)}")
        return cls(**d)

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


def spectral_density(bath, omega):
    """Lorentzian coupling density ``(2/pi) Gamma / (1 + omega^2 tau_c^2)``."""
    omega = np.asarray(omega, dtype=float)
    if np.any(omega < 0):
        raise DomainError("spectral_density requires omega >= 0")
    out = (2.0 / np.pi) * bath.gamma / (1.0 + (omega * bath.tau_c) ** 2)
    return out if out.ndim else float(out)


def memory_kernel(bath, t):
    """Exponential memory kernel ``(Gamma/tau_c) exp(-|t|/tau_c)``."""
    t = np.abs(np.asarray(t, dtype=float))
    out = bath.gamma / bath.tau_c * np.exp(-t / bath.tau_c)
    return out if out.ndim else float(out)


def kernel_laplace(bath, s):
    """Laplace transform of the kernel, ``Gamma / (1 + s tau_c)``; ``s`` may be complex."""
    s = np.asarray(s)
    if np.any(np.real(s) <= -1.0 / bath.tau_c):
        raise DomainError("kernel_laplace requires Re(s) > -1/tau_c")
    out = bath.gamma / (1.0 + s * bath.tau_c)
    return out if out.ndim else out.item()


def mode_energy(bath, omega, mode=QUANTUM):
    """Mean energy per bath mode: ``(hbar w/2) coth(hbar w / 2kT)`` or ``kT``.

    At ``T = 0`` the quantum value is the zero-point energy ``hbar w / 2``.
    The ``omega -> 0`` limit is guarded (``x coth x -> 1``).
    """
    omega = np.asarray(omega, dtype=float)
    if mode == CLASSICAL:
        return np.full_like(omega, bath.kt) if omega.ndim else bath.kt
    if mode != QUANTUM:
        raise DomainError(f"unknown noise mode {mode!r}")
    half = 0.5 * bath.hbar * np.abs(omega)
    if bath.kt == 0.0:
        out = half
    else:
        x = half / bath.kt
        with np.errstate(divide="ignore", invalid="ignore"):
            big = x > 20.0
            xc = np.where(x < _COTH_SMALL, 1.0, np.where(big, x, x / np.tanh(np.where(x == 0, 1.0, x))))
        out = bath.kt * xc
    return out if np.ndim(out) else float(out)


def noise_spectrum(bath, omega, mode=QUANTUM):
    """One-sided spectrum ``S(omega)`` with ``c(tau) = int_0^inf S cos(omega tau) d omega``."""
    return spectral_density(bath, omega) * mode_energy(bath, omega, mode)


def _quantum_correlation(bath, tau, omega_max, epsabs, epsrel):
    def f(w):
        return float(noise_spectrum(bath, w, QUANTUM))

    knee = 1.0 / bath.tau_c
    if tau == 0.0 or tau * omega_max < 50.0:
        pts = [p for p in (knee, 10 * knee, 100 * knee) if p < omega_max]
        val, err, *rest = integrate.quad(
            lambda w: f(w) * math.cos(w * tau), 0.0, omega_max,
            points=pts or None, limit=2000, epsabs=epsabs, epsrel=epsrel, full_output=1)
    else:
        val, err, *rest = integrate.quad(
            f, 0.0, omega_max, weight="cos", wvar=tau, limit=5000, epsabs=epsabs, epsrel=epsrel, full_output=1)
    if len(rest) > 1 and err > max(epsabs, epsrel * abs(val)) * 100:
        raise ConvergenceError(
            "noise correlation quadrature did not converge",
            {"tau": tau, "value": val, "abserr": err, "message": rest[1] if len(rest) > 1 else ""},
        )
    return val


def noise_correlation(bath, tau, mode=QUANTUM, acknowledge_cutoff=False, epsabs=1e-9, epsrel=1e-7):
    """Noise autocorrelation ``c(tau)``.

    Classical mode returns ``kT * beta(tau)``. Quantum mode integrates the
    coth-weighted spectrum up to ``bath.omega_max``; because that integrand
    decays only like ``1/omega``, ``c(0)`` grows logarithmically with the
    cutoff and must be requested with ``acknowledge_cutoff=True``.
    """
    if bath.temperature < 0:
        raise DomainError("temperature must be >= 0")
    tau = abs(float(tau))
    if mode == CLASSICAL:
        return bath.kt * memory_kernel(bath, tau)
    if mode != QUANTUM:
        raise DomainError(f"unknown noise mode {mode!r}")
    if tau == 0.0 and not acknowledge_cutoff:
        raise DomainError("quantum c(0) depends logarithmically on omega_max; pass acknowledge_cutoff=True")
    return _quantum_correlation(bath, tau, bath.omega_max, epsabs, epsrel)


def cutoff_sensitivity(bath, tau, mode=QUANTUM):
    """Return ``(c at omega_max, c at 2*omega_max)`` for reporting cutoff dependence."""
    c1 = noise_correlation(bath, tau, mode, acknowledge_cutoff=True)
    c2 = noise_correlation(bath.replace(omega_max=2 * bath.omega_max), tau, mode, acknowledge_cutoff=True)
    return c1, c2
