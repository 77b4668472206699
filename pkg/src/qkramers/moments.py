"""Variances of the noise-driven part of ``x(t)`` and ``v(t)``.

Two independent routes:

* ``spectral``: with ``c(tau) = int S(w) cos(w tau) dw`` the double time
  integrals factorise, e.g. ``sxx(t) = int_0^wmax S(w) |int_0^t M(s) e^{iws} ds|^2 dw``.
  The inner moments are exact exponential-sum integrals, so only the
  frequency integral is numerical.
* ``direct``: time-domain quadrature of ``int int X(s1) Y(s2) c(s1 - s2)``
  folded onto the lag ``u = s1 - s2``, with ``c(u)`` from :mod:`qkramers.bath`.
"""

import dataclasses

import numpy as np

from . import bath as bathmod
from .errors import DomainError
from .quadrature import frequency_breakpoints, integrate_panels


@dataclasses.dataclass(frozen=True)
class VarianceSet:
    sxx: float
    svv: float
    sxv: float
    t: float
    dsxx: float = None
    dsvv: float = None
    dsxv: float = None

    def cauchy_schwarz_gap(self):
        return self.sxx * self.svv - self.sxv**2


def _scales(bath, M, mode):
    sc = [1.0 / bath.tau_c] + [abs(r) for r in M.rates if abs(r) > 0]
    # the thermal frequency only shapes the quantum spectrum
    if bath.kt > 0 and mode == bathmod.QUANTUM:
        sc.append(bath.kt / bath.hbar)
    return sc


def _spectrum(bath, mode):
    return lambda w: bathmod.noise_spectrum(bath, w, mode)


def spectral_variances(bath, M, t, mode=bathmod.QUANTUM, derivatives=False, epsabs=1e-10, epsrel=1e-8):
    """Variances (and optionally their time derivatives) by frequency quadrature."""
    t = float(t)
    if t == 0.0:
        z = 0.0
        return VarianceSet(z, z, z, 0.0, *( (0.0, 0.0, 0.0) if derivatives else (None, None, None)))
    m = M.derivative()
    S = _spectrum(bath, mode)
    Mt, mt = M(t), m(t)

    def f(w):
        am = M.fourier_moment(w, t)
        av = m.fourier_moment(w, t)
        s = S(w)
        cols = [np.abs(am) ** 2, np.abs(av) ** 2, (am * np.conj(av)).real]
        if derivatives:
            ph = np.exp(1j * w * t)
            cols += [2 * (np.conj(am) * Mt * ph).real, 2 * (np.conj(av) * mt * ph).real,
                     (Mt * ph * np.conj(av) + am * np.conj(mt * ph)).real]
        return s[:, None] * np.stack(cols, axis=1)

    edges = frequency_breakpoints(bath.omega_max, _scales(bath, M, mode), period_time=t)
    val, _ = integrate_panels(f, edges, epsabs=epsabs, epsrel=epsrel)
    if derivatives:
        return VarianceSet(val[0], val[1], val[2], t, val[3], val[4], val[5])
    return VarianceSet(val[0], val[1], val[2], t)


def stationary_variances(bath, M, mode=bathmod.QUANTUM, epsabs=1e-12, epsrel=1e-9):
    """``t -> inf`` limits for a decaying resolvent: ``int S |M~(-iw)|^2 (1, w^2) dw``."""
    S = _spectrum(bath, mode)

    def f(w):
        r = np.abs(M.laplace(-1j * w)) ** 2
        return S(w)[:, None] * np.stack([r, w * w * r], axis=1)

    edges = frequency_breakpoints(bath.omega_max, _scales(bath, M, mode))
    val, _ = integrate_panels(f, edges, epsabs=epsabs, epsrel=epsrel)
    return VarianceSet(val[0], val[1], 0.0, np.inf, 0.0, 0.0, 0.0)


def correlation_on_grid(bath, u, mode=bathmod.QUANTUM, block=64, epsabs=1e-11, epsrel=1e-9):
    """``c(u) = int_0^wmax S(w) cos(w u) dw`` for an array of lags at once."""
    u = np.asarray(u, dtype=float)
    S = _spectrum(bath, mode)
    scales = [1.0 / bath.tau_c] + ([bath.kt / bath.hbar] if bath.kt > 0 and mode == bathmod.QUANTUM else [])
    out = np.empty_like(u)
    order = np.argsort(u)
    for i in range(0, u.size, block):
        idx = order[i:i + block]
        uu = u[idx]
        edges = frequency_breakpoints(bath.omega_max, scales, period_time=float(uu.max()))
        val, _ = integrate_panels(lambda w: S(w)[:, None] * np.cos(np.outer(w, uu)), edges,
                                  epsabs=epsabs, epsrel=epsrel)
        out[idx] = val
    return out


def _lag_grid(bath, t, mode, nodes):
    edges = [0.0, t]
    if mode == bathmod.QUANTUM:
        # c(u) has a peak of width ~1/omega_max at zero lag, then rings with
        # period 2 pi / omega_max because of the sharp cutoff
        edges += list(np.geomspace(1e-3 / bath.omega_max, min(t, 1.0), 60))
        h = 2 * np.pi / bath.omega_max
    else:
        h = 0.05
    edges += list(np.linspace(0.0, t, int(np.ceil(t / h)) + 1))
    edges += list(np.geomspace(1e-3 * bath.tau_c, min(t, bath.tau_c), 12))
    edges = np.unique([e for e in edges if 0.0 <= e <= t])
    a, b = edges[:-1], edges[1:]
    x, w = np.polynomial.legendre.leggauss(nodes)
    u = (0.5 * (a + b))[:, None] + (0.5 * (b - a))[:, None] * x[None, :]
    wu = (0.5 * (b - a))[:, None] * w[None, :]
    return u.ravel(), wu.ravel()


def direct_variances(bath, M, t, mode=bathmod.QUANTUM, n_inner=160, nodes=None):
    """Time-domain double quadrature of the variance integrals.

    ``sigma_XY(t) = int_0^t c(u) [K_XY(u) + K_YX(u)] du`` with
    ``K_XY(u) = int_0^{t-u} X(s+u) Y(s) ds``; both integrals use fixed
    composite Gauss-Legendre rules.
    """
    t = float(t)
    if t == 0.0:
        return VarianceSet(0.0, 0.0, 0.0, 0.0)
    m = M.derivative()
    if nodes is None:
        nodes = 8 if mode == bathmod.QUANTUM else 20
    u, wu = _lag_grid(bath, t, mode, nodes)
    cu = correlation_on_grid(bath, u, mode)
    xg, wg = np.polynomial.legendre.leggauss(n_inner)
    L = t - u
    s = 0.5 * L[:, None] * (xg[None, :] + 1.0)
    ws = 0.5 * L[:, None] * wg[None, :]
    Ms, ms = M(s), m(s)
    Mu, mu = M(s + u[:, None]), m(s + u[:, None])
    kxx = np.sum(ws * Mu * Ms, axis=1)
    kvv = np.sum(ws * mu * ms, axis=1)
    kxv = np.sum(ws * (Mu * ms + mu * Ms), axis=1)
    # lags u and -u both contribute: factor 2 on xx and vv, xv already symmetrised
    return VarianceSet(2 * np.dot(wu, cu * kxx), 2 * np.dot(wu, cu * kvv), float(np.dot(wu, cu * kxv)), t)


def variances(bath, M, t, method="spectral", mode=bathmod.QUANTUM, **kw):
    if t < 0:
        raise DomainError("t must be >= 0")
    if method == "spectral":
        return spectral_variances(bath, M, t, mode, **kw)
    if method == "direct":
        return direct_variances(bath, M, t, mode, **kw)
    raise DomainError(f"unknown method {method!r}")


def convolution_g(M, Q, t=None):
    """``G = M * Q`` (convolution) and ``g = dG/dt``; sums if ``t`` is None."""
    if len(Q) == 0:
        zero = type(M).zero()
        return (zero, zero) if t is None else (0.0, 0.0)
    G = M.convolve(Q)
    g = G.derivative()
    if t is None:
        return G, g
    return G(t), g(t)


def gb_short_time(G, window):
    """Least-squares slope of ``G(t)`` over a short window.

    ``window`` is either a float (fit on ``[0, window]``) or a ``(lo, hi)``
    pair. Returns ``(slope, max_residual)``.
    """
    if np.ndim(window) == 0:
        lo, hi = 0.0, float(window)
    else:
        lo, hi = map(float, window)
    if not hi > lo >= 0:
        raise DomainError("window must be positive")
    t = np.linspace(lo, hi, 101)
    y = np.asarray(G(t), dtype=float)
    A = np.stack([t, np.ones_like(t)], axis=1)
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - A @ coef
    return float(coef[0]), float(np.max(np.abs(resid)))
