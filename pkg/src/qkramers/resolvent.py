"""Relaxation functions of the linearised GLE as exact exponential sums.

With the exponential kernel the resolvent ``1/(s^2 + s beta(s) +/- omega^2)``
becomes ``(s + 1/tau_c) / D(s)`` with a cubic ``D``, so ``M(t)`` is a sum of
three exponentials. Everything downstream (chi, G, Y, variance kernels) is
built from :class:`ExponentialSum` algebra rather than numerical time
quadrature, which keeps barrier-top combinations of growing exponentials
exact.
"""

import enum
import json
import math

import numpy as np
from scipy import integrate

from .errors import DegenerateRootError, DomainError, IntegrationError

_MERGE_TOL = 1e-10
_DEGENERATE_GAP = 1e-4


class RegionKind(enum.Enum):
    WELL = "well"
    BARRIER = "barrier"

    @property
    def sign(self):
        """+1 for the well (``+omega0^2``), -1 at the barrier (``-omegab^2``)."""
        return 1.0 if self is RegionKind.WELL else -1.0

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise DomainError(f"unknown region {value!r}") from None


class ExponentialSum:
    """``f(t) = sum_i c_i t^k_i exp(l_i t)`` with complex ``c_i``, ``l_i``.

    Powers ``k_i > 0`` only appear from convolutions of equal rates.
    """

    __slots__ = ("coeffs", "rates", "powers")

    def __init__(self, coeffs, rates, powers=None):
        self.coeffs = np.atleast_1d(np.asarray(coeffs, dtype=complex))
        self.rates = np.atleast_1d(np.asarray(rates, dtype=complex))
        if powers is None:
            powers = np.zeros(self.coeffs.shape, dtype=int)
        self.powers = np.atleast_1d(np.asarray(powers, dtype=int))
        if not (self.coeffs.shape == self.rates.shape == self.powers.shape):
            raise ValueError("coeffs, rates and powers must have equal length")

    @classmethod
    def constant(cls, value):
        return cls([value], [0.0])

    @classmethod
    def zero(cls):
        return cls([], [])

    def __len__(self):
        return self.coeffs.size

    def __repr__(self):
        terms = ", ".join(
            f"({c:.6g})t^{k}e^({l:.6g}t)" if k else f"({c:.6g})e^({l:.6g}t)"
            for c, l, k in zip(self.coeffs, self.rates, self.powers)
        )
        return f"ExponentialSum[{terms}]"

    # evaluation -----------------------------------------------------------
    def value(self, t, shift=0.0):
        """Complex value at ``t``; ``shift`` evaluates ``f(t) exp(-shift t)`` without overflow."""
        t = np.asarray(t, dtype=float)
        tt = t[..., None]
        ex = np.exp((self.rates - shift) * tt)
        if np.any(self.powers):
            ex = ex * tt ** self.powers
        return np.sum(self.coeffs * ex, axis=-1)

    def __call__(self, t, shift=0.0):
        v = self.value(t, shift).real
        return v if np.ndim(v) else float(v)

    def imag_residual(self, t):
        """Largest ``|Im f| / max(1, |f|)`` over ``t``; zero for real-valued sums."""
        v = self.value(np.atleast_1d(t))
        return float(np.max(np.abs(v.imag) / np.maximum(1.0, np.abs(v))))

    # algebra --------------------------------------------------------------
    def simplify(self, tol=_MERGE_TOL):
        """Merge terms with equal (rate, power) and drop zero coefficients."""
        if len(self) == 0:
            return self
        scale_l = max(1.0, float(np.max(np.abs(self.rates))))
        out_c, out_l, out_k = [], [], []
        used = np.zeros(len(self), dtype=bool)
        for i in range(len(self)):
            if used[i]:
                continue
            same = (~used) & (self.powers == self.powers[i]) & (np.abs(self.rates - self.rates[i]) <= tol * scale_l)
            used |= same
            out_c.append(self.coeffs[same].sum())
            out_l.append(self.rates[i])
            out_k.append(self.powers[i])
        c = np.array(out_c)
        scale_c = max(float(np.max(np.abs(c))), 1e-300)
        keep = np.abs(c) > 1e-15 * scale_c
        return ExponentialSum(c[keep], np.array(out_l)[keep], np.array(out_k)[keep])

    def __add__(self, other):
        if not isinstance(other, ExponentialSum):
            other = ExponentialSum.constant(other)
        return ExponentialSum(
            np.concatenate([self.coeffs, other.coeffs]),
            np.concatenate([self.rates, other.rates]),
            np.concatenate([self.powers, other.powers]),
        ).simplify()

    __radd__ = __add__

    def __neg__(self):
        return ExponentialSum(-self.coeffs, self.rates, self.powers)

    def __sub__(self, other):
        if not isinstance(other, ExponentialSum):
            other = ExponentialSum.constant(other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, ExponentialSum):
            c = np.outer(self.coeffs, other.coeffs).ravel()
            l = np.add.outer(self.rates, other.rates).ravel()
            k = np.add.outer(self.powers, other.powers).ravel()
            return ExponentialSum(c, l, k).simplify()
        return ExponentialSum(self.coeffs * other, self.rates, self.powers)

    __rmul__ = __mul__

    def conj(self):
        return ExponentialSum(np.conj(self.coeffs), np.conj(self.rates), self.powers)

    def derivative(self):
        c = self.coeffs * self.rates
        parts = [ExponentialSum(c, self.rates, self.powers)]
        has_pow = self.powers > 0
        if np.any(has_pow):
            parts.append(ExponentialSum(
                self.coeffs[has_pow] * self.powers[has_pow], self.rates[has_pow], self.powers[has_pow] - 1))
        out = parts[0]
        for p in parts[1:]:
            out = out + p
        return out.simplify()

    def antiderivative(self):
        """Definite integral ``F(t) = int_0^t f(s) ds`` as an exponential sum."""
        out = ExponentialSum.zero()
        scale = max(1.0, float(np.max(np.abs(self.rates)))) if len(self) else 1.0
        for c, l, k in zip(self.coeffs, self.rates, self.powers):
            out = out + _integrate_monomial(c, l, int(k), scale)
        return out.simplify()

    def shifted(self, delta):
        """Multiply by ``exp(delta t)``."""
        return ExponentialSum(self.coeffs, self.rates + delta, self.powers)

    def convolve(self, other):
        """``(f * g)(t) = int_0^t f(t - s) g(s) ds`` in closed form (power-0 terms)."""
        if np.any(self.powers) or np.any(other.powers):
            raise NotImplementedError("convolution is implemented for pure exponential terms")
        scale = max(1.0, float(np.max(np.abs(np.concatenate([self.rates, other.rates])))))
        c, l, k = [], [], []
        for ca, la in zip(self.coeffs, self.rates):
            for cb, lb in zip(other.coeffs, other.rates):
                if abs(la - lb) <= 1e-9 * scale:
                    c.append(ca * cb)
                    l.append(la)
                    k.append(1)
                else:
                    f = ca * cb / (la - lb)
                    c.extend([f, -f])
                    l.extend([la, lb])
                    k.extend([0, 0])
        return ExponentialSum(c, l, k).simplify()

    def fourier_moment(self, omega, t):
        """``int_0^t f(s) exp(i omega s) ds`` for an array of ``omega`` (power-0 terms).

        The real part is the cosine moment and the imaginary part the sine
        moment of a real-valued ``f``.
        """
        if np.any(self.powers):
            raise NotImplementedError("fourier_moment is implemented for pure exponential terms")
        omega = np.asarray(omega, dtype=float)
        z = self.rates[None, :] + 1j * omega[..., None]
        small = np.abs(z * t) < 1e-8
        zs = np.where(small, 1.0, z)
        with np.errstate(over="ignore", invalid="ignore"):
            frac = np.where(small, t * (1 + 0.5 * z * t), np.expm1(z * t) / zs)
        return np.sum(self.coeffs * frac, axis=-1)

    def laplace(self, s):
        """Laplace transform ``sum c_i k!/(s - l_i)^(k+1)``; ``s`` may be an array."""
        s = np.asarray(s, dtype=complex)[..., None]
        fact = np.array([math.factorial(int(k)) for k in self.powers], dtype=float)
        return np.sum(self.coeffs * fact / (s - self.rates) ** (self.powers + 1), axis=-1)

    def trig_moment(self, omega, phase, t):
        """``int_0^t f(s) cos(omega s) ds`` or the sine analogue."""
        if t < 0:
            raise DomainError("trig_moment requires t >= 0")
        z = self.fourier_moment(np.asarray([omega], dtype=float), float(t))[0]
        if phase == "cos":
            return float(z.real)
        if phase == "sin":
            return float(z.imag)
        raise DomainError(f"phase must be 'cos' or 'sin', got {phase!r}")

    def max_real_rate(self):
        return float(np.max(self.rates.real)) if len(self) else -math.inf

    def to_json(self):
        return json.dumps([
            {"re_c": float(c.real), "im_c": float(c.imag), "re_l": float(l.real), "im_l": float(l.imag),
             **({"power": int(k)} if k else {})}
            for c, l, k in zip(self.coeffs, self.rates, self.powers)
        ])

    @classmethod
    def from_json(cls, text):
        items = json.loads(text)
        return cls(
            [d["re_c"] + 1j * d["im_c"] for d in items],
            [d["re_l"] + 1j * d["im_l"] for d in items],
            [d.get("power", 0) for d in items],
        )


def _integrate_monomial(c, lam, k, scale):
    # int_0^t s^k e^{lam s} ds
    if abs(lam) <= 1e-14 * scale:
        return ExponentialSum([c / (k + 1)], [0.0], [k + 1])
    # I_k = t^k e^{lam t}/lam - (k/lam) I_{k-1}, I_0 = (e^{lam t} - 1)/lam
    coeffs, rates, powers = [], [], []
    factor = c
    for j in range(k, -1, -1):
        coeffs.append(factor / lam)
        rates.append(lam)
        powers.append(j)
        if j == 0:
            coeffs.append(-factor / lam)
            rates.append(0.0)
            powers.append(0)
        factor = -factor * j / lam
    return ExponentialSum(coeffs, rates, powers)


def cubic_roots(a, b, c):
    """Three complex roots of ``s^3 + a s^2 + b s + c``, Newton-polished.

    Roots within ``1e-12`` (relative) of the real axis are returned as real and
    complex roots come as exact conjugate pairs.
    """
    coefs = [1.0, a, b, c]
    roots = np.roots(coefs).astype(complex)
    scale = max(1.0, float(np.max(np.abs(roots))))
    p = np.poly1d(coefs)
    dp = p.deriv()
    for _ in range(3):
        d = dp(roots)
        ok = np.abs(d) > 1e-300
        roots = np.where(ok, roots - p(roots) / np.where(ok, d, 1.0), roots)
    re_mask = np.abs(roots.imag) <= 1e-12 * scale
    roots = np.where(re_mask, roots.real + 0j, roots)
    cplx = roots[~re_mask]
    if cplx.size == 2:
        r = 0.5 * (cplx[0] + np.conj(cplx[1]))
        if r.imag < 0:
            r = np.conj(r)
        roots = np.concatenate([roots[re_mask], [r, np.conj(r)]])
    return np.sort_complex(roots)


def resolvent_coefficients(bath, omega_sq, region):
    """``(a, b, c)`` of the cubic denominator ``s^3 + a s^2 + b s + c``."""
    region = RegionKind.parse(region)
    w2 = region.sign * omega_sq
    a = 1.0 / bath.tau_c
    return a, w2 + bath.gamma / bath.tau_c, w2 / bath.tau_c


def build_relaxation(bath, omega_sq, region):
    """Relaxation function ``M(t)`` from the partial-fraction expansion of
    ``(s + 1/tau_c) / D(s)`` over the three roots of ``D``."""
    if not omega_sq > 0:
        raise DomainError("omega_sq must be positive")
    region = RegionKind.parse(region)
    a, b, c = resolvent_coefficients(bath, omega_sq, region)
    roots = cubic_roots(a, b, c)
    scale = max(1.0, float(np.max(np.abs(roots))))
    gaps = [abs(roots[i] - roots[j]) for i in range(3) for j in range(i + 1, 3)]
    # a root cluster is only resolved to ~eps^(1/m); below this gap the
    # partial-fraction weights grow like 1/gap^2 and cancel catastrophically
    if min(gaps) < _DEGENERATE_GAP * scale:
        raise DegenerateRootError(
            "resolvent has (near-)repeated roots; exponential basis is singular",
            {"roots": [complex(r) for r in roots], "min_gap": float(min(gaps))},
        )
    dD = 3 * roots**2 + 2 * a * roots + b
    coeffs = (roots + a) / dD
    # Enforce exact conjugate symmetry of the coefficients.
    for i in range(3):
        for j in range(i + 1, 3):
            if roots[i].imag != 0 and roots[i] == np.conj(roots[j]):
                coeffs[j] = np.conj(coeffs[i])
    coeffs = np.where(np.abs(roots.imag) == 0, coeffs.real + 0j, coeffs)
    keep = np.abs(coeffs) > 1e-15 * np.max(np.abs(coeffs))
    return ExponentialSum(coeffs[keep], roots[keep])


def reactive_root(M):
    """The unique rate with positive real part (barrier resolvent)."""
    pos = M.rates[M.rates.real > 0]
    if pos.size != 1:
        raise DomainError(f"expected exactly one growing rate, found {pos.size}")
    return float(pos[0].real)


def chi_x(M, omega_sq, region, t=None):
    """``chi(t) = 1 -/+ omega^2 int_0^t M`` (well / barrier).

    Returns the exponential sum when ``t`` is None, else its value.
    """
    region = RegionKind.parse(region)
    chi = 1.0 - region.sign * omega_sq * M.antiderivative()
    if t is None:
        return chi
    if np.any(np.asarray(t) < 0):
        raise DomainError("chi_x requires t >= 0")
    return chi(t)


def trig_moment(M, omega, phase, t):
    return M.trig_moment(omega, phase, t)


def grote_hynes_root(bath, omegab_sq, tol=1e-14):
    """Positive root of ``l^2 + l * Gamma/(1 + l tau_c) = omegab^2`` by bisection."""
    def g(lam):
        return lam * lam + lam * bath.gamma / (1.0 + lam * bath.tau_c) - omegab_sq

    lo, hi = 0.0, math.sqrt(omegab_sq) + 1.0
    while g(hi) < 0:
        hi *= 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if g(mid) > 0:
            hi = mid
        else:
            lo = mid
        if hi - lo < tol * hi:
            break
    return 0.5 * (lo + hi)


def ode_relaxation(bath, omega_sq, region, t_grid, rtol=1e-12, atol=1e-14):
    """Integrate the embedded linear GLE (unit initial velocity) on ``t_grid``."""
    region = RegionKind.parse(region)
    w2 = region.sign * omega_sq
    g, tc = bath.gamma, bath.tau_c

    def rhs(_t, s):
        x, v, y = s
        return [v, -w2 * x - y, -y / tc + g / tc * v]

    t_grid = np.asarray(t_grid, dtype=float)
    sol = integrate.solve_ivp(rhs, (0.0, float(t_grid[-1])), [0.0, 1.0, 0.0], method="DOP853",
                              t_eval=t_grid, rtol=rtol, atol=atol)
    if not sol.success:
        raise IntegrationError(f"ODE oracle failed: {sol.message}")
    return sol.y[0]


def validate_against_ode(bath, omega_sq, region, t_end=None, n=401):
    """Max deviation between the partial-fraction ``M(t)`` and the ODE oracle.

    Absolute deviation for the well; relative (``/max(1, |M|)``) at the barrier,
    where ``M`` grows exponentially.
    """
    region = RegionKind.parse(region)
    if t_end is None:
        t_end = 20.0 if region is RegionKind.WELL else 8.0
    t = np.linspace(0.0, t_end, n)
    M = build_relaxation(bath, omega_sq, region)
    x = ode_relaxation(bath, omega_sq, region, t)
    m = M(t)
    if region is RegionKind.WELL:
        return float(np.max(np.abs(x - m)))
    return float(np.max(np.abs(x - m) / np.maximum(1.0, np.abs(m))))
