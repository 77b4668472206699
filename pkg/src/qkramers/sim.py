"""Stochastic escape simulation of the c-number generalized Langevin equation.

The exponential memory is carried by an auxiliary force ``y`` with
``dy/dt = -y / tau_c + (Gamma / tau_c) v``. Within a step ``v`` is taken as
linear, and ``y`` is advanced with the matching exact exponential weights, so
``y`` reproduces the memory integral of the discrete velocity path exactly.
Position and velocity use a Heun predictor-corrector step.

Noise is synthesized in the frequency domain on the grid ``k * 2 pi / P`` with
period ``P`` equal to the horizon. Gaussian amplitudes are drawn bin by bin
from a per-trajectory stream, so halving ``dt`` only appends new high
frequency bins and the shared low band is identical (common random numbers).
"""

import concurrent.futures
import dataclasses
import math
import os
import warnings

import numba
import numpy as np

from . import bath as bathmod
from .errors import ConfigError, EstimateUnavailableError, IntegrationError

_NOISE_STREAM = 0
_INIT_STREAM = 1


@dataclasses.dataclass(frozen=True)
class SimConfig:
    dt: float = 0.01
    t_max: float = 800.0
    n_traj: int = 10_000
    seed: int = 12345
    noise_mode: str = bathmod.CLASSICAL
    q_correction: bool = False
    absorb_offset: float = None
    n_freq: int = None
    threads: int = None

    def __post_init__(self):
        if not (self.dt > 0 and self.t_max > self.dt):
            raise ConfigError("need 0 < dt < t_max")
        if self.n_traj < 100:
            raise ConfigError("n_traj must be at least 100")
        if self.absorb_offset is not None and not self.absorb_offset > 0:
            raise ConfigError("absorb_offset must be positive")
        if self.noise_mode not in (bathmod.QUANTUM, bathmod.CLASSICAL):
            raise ConfigError(f"unknown noise_mode {self.noise_mode!r}")

    @property
    def n_steps(self):
        return int(math.ceil(self.t_max / self.dt))

    def required_freq(self):
        """Bins needed to cover ``[0, pi/dt]`` at spacing ``2 pi / t_max``."""
        n = self.n_steps
        return n + (n % 2)

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)

    @classmethod
    def from_dict(cls, d):
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown sim keys: {sorted(unknown)}")
        return cls(**d)


@dataclasses.dataclass(frozen=True)
class FptEstimate:
    k_sim: float
    stderr: float
    n_escaped: int
    censored: int
    fpt: np.ndarray = dataclasses.field(repr=False, compare=False)

    def summary(self):
        return {"k_sim": self.k_sim, "stderr": self.stderr, "n_escaped": self.n_escaped,
                "censored": self.censored}


def check_step(bath, potential, cfg):
    limit = min(bath.tau_c, 1.0 / math.sqrt(potential.omega0_sq), 1.0 / math.sqrt(potential.omegab_sq)) / 20.0
    if not cfg.dt < limit:
        raise ConfigError(f"dt={cfg.dt} must be below {limit:.4g} for these bath and potential scales")


def substream(seed, index, which):
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(index), which]))


def synthesize_noise(bath, cfg, stream):
    """Stationary Gaussian noise path on ``t_j = j dt``, ``j < n``.

    The one-sided spectrum is cut at ``min(omega_max, pi / dt)``.
    """
    n = cfg.required_freq()
    if cfg.n_freq is not None and cfg.n_freq < n:
        raise ConfigError(f"n_freq={cfg.n_freq} below the {n} bins needed for Nyquist coverage")
    period = n * cfg.dt
    d_omega = 2.0 * math.pi / period
    n_bins = n // 2 + 1
    omega = d_omega * np.arange(n_bins)
    spec = bathmod.noise_spectrum(bath, omega, cfg.noise_mode)
    spec[omega > bath.omega_max] = 0.0
    weight = np.full(n_bins, d_omega)
    weight[0] *= 0.5
    weight[-1] *= 0.5
    amp = np.sqrt(spec * weight)
    z = stream.standard_normal((n_bins, 2))
    coef = amp * (z[:, 0] - 1j * z[:, 1])
    # irfft(X)[j] = (1/n) sum_k X_k e^{2 pi i jk/n} with the Hermitian half doubled
    x = coef * (n / 2.0)
    x[0] = n * coef[0].real
    x[-1] = n * coef[-1].real
    return np.fft.irfft(x, n)


@numba.njit(nogil=True, cache=True)
def _run(x, v, noise, dt, n_steps, a_bar, b_bar, gamma, tau_c, x_abs, q_on, hbar, record):
    e = math.exp(-dt / tau_c)
    i1 = tau_c - tau_c * tau_c * (1.0 - e) / dt
    i0 = tau_c * (1.0 - e) - i1
    g = gamma / tau_c
    y = 0.0
    t_reset = 0.0
    prev_sign = 1.0 if 2.0 * b_bar - 2.0 * a_bar * x > 0 else -1.0
    traj = np.empty((n_steps + 1 if record else 1, 3))
    if record:
        traj[0, 0] = x
        traj[0, 1] = v
        traj[0, 2] = y
    for j in range(n_steps):
        t = j * dt
        q0 = 0.0
        q1 = 0.0
        if q_on:
            curv = 2.0 * b_bar - 2.0 * a_bar * x
            sgn = 1.0 if curv > 0 else -1.0
            if sgn != prev_sign:
                t_reset = t
                prev_sign = sgn
            w = math.sqrt(abs(curv))
            if w > 0:
                q0 = a_bar * hbar / (2.0 * w)
                if sgn < 0:
                    q1 = q0 * math.cosh(2.0 * w * (t + dt - t_reset))
                    q0 = q0 * math.cosh(2.0 * w * (t - t_reset))
                else:
                    q1 = q0
        a0 = -(-a_bar * x * x + 2.0 * b_bar * x) - y + noise[j] + q0
        xp = x + dt * v
        vp = v + dt * a0
        yp = e * y + g * (i0 * v + i1 * vp)
        a1 = -(-a_bar * xp * xp + 2.0 * b_bar * xp) - yp + noise[j + 1] + q1
        x_new = x + 0.5 * dt * (v + vp)
        v_new = v + 0.5 * dt * (a0 + a1)
        y = e * y + g * (i0 * v + i1 * v_new)
        x = x_new
        v = v_new
        if record:
            traj[j + 1, 0] = x
            traj[j + 1, 1] = v
            traj[j + 1, 2] = y
        if not (math.isfinite(x) and math.isfinite(v)):
            return -2.0 - j, traj
        if x >= x_abs:
            return (j + 1) * dt, traj
    return -1.0, traj


def _noise_with_endpoint(noise, n_steps):
    # the periodic path wraps around, so f(P) = f(0)
    if noise.size >= n_steps + 1:
        return noise
    return np.concatenate([noise, noise[: n_steps + 1 - noise.size]])


def integrate_trajectory(potential, bath, cfg, noise, x0, v0, record=False, x_abs=None):
    """Integrate one trajectory.

    Returns the first-passage time (``nan`` if censored) and, with
    ``record=True``, the ``(n + 1, 3)`` array of ``(x, v, y)``.
    """
    n_steps = cfg.n_steps
    noise = _noise_with_endpoint(np.asarray(noise, dtype=float), n_steps)
    if x_abs is None:
        x_abs = potential.xb + default_offset(bath, potential, cfg)
    q_on = bool(cfg.q_correction and cfg.noise_mode == bathmod.QUANTUM)
    t, traj = _run(float(x0), float(v0), noise, cfg.dt, n_steps, potential.a_bar, potential.b_bar,
                   bath.gamma, bath.tau_c, float(x_abs), q_on, bath.hbar, record)
    if t <= -2.0:
        raise IntegrationError("non-finite state", {"step": int(-(t + 2.0))})
    fpt = math.nan if t < 0 else t
    return (fpt, traj) if record else fpt


def default_offset(bath, potential, cfg):
    if cfg.absorb_offset is not None:
        return cfg.absorb_offset
    # two thermal lengths of the inverted parabola, at least 0.5
    return max(0.5, 2.0 * math.sqrt(max(bath.kt, 1e-12) / potential.omegab_sq))


def initial_state(bath, potential, cfg, stream, well=None):
    """Draw ``(x, v)`` from the stationary harmonic well density, below the barrier."""
    if cfg.noise_mode == bathmod.QUANTUM and well is not None:
        var_x = (well.d + well.psi_inf) / well.omega_inf_sq
        mean_x = (well.n_inf - well.gamma_inf * well.g_inf) / well.omega_inf_sq
        var_v, mean_v = well.d, well.g_inf
    else:
        var_x, mean_x = bath.kt / potential.omega0_sq, 0.0
        var_v, mean_v = bath.kt, 0.0
    while True:
        x = mean_x + math.sqrt(var_x) * stream.standard_normal()
        if x < potential.xb:
            break
    v = mean_v + math.sqrt(var_v) * stream.standard_normal()
    return x, v


def _one(index, bath, potential, cfg, x_abs, well):
    noise = synthesize_noise(bath, cfg, substream(cfg.seed, index, _NOISE_STREAM))
    x0, v0 = initial_state(bath, potential, cfg, substream(cfg.seed, index, _INIT_STREAM), well)
    return integrate_trajectory(potential, bath, cfg, noise, x0, v0, x_abs=x_abs)


def censored_rate(fpt, t_max):
    """Exponential MLE with right censoring: ``n_esc / (sum fpt + n_cens t_max)``."""
    fpt = np.asarray(fpt, dtype=float)
    esc = np.isfinite(fpt)
    n_esc = int(esc.sum())
    n_cens = int(fpt.size - n_esc)
    if n_esc == 0:
        raise EstimateUnavailableError("no trajectory escaped; increase t_max or temperature",
                                       {"n_traj": int(fpt.size), "t_max": t_max})
    exposure = math.fsum(fpt[esc]) + n_cens * t_max
    k = n_esc / exposure
    return k, k / math.sqrt(n_esc), n_esc, n_cens


def estimate_rate(potential, bath, cfg, progress=None):
    """First-passage escape rate over ``cfg.n_traj`` independent trajectories.

    Results do not depend on ``cfg.threads``: each trajectory owns its random
    substreams and results are gathered by index.
    """
    check_step(bath, potential, cfg)
    well = None
    if cfg.noise_mode == bathmod.QUANTUM:
        from .fpcoeffs import asymptotics
        from .resolvent import RegionKind

        well = asymptotics(bath, potential, RegionKind.WELL, None, bathmod.QUANTUM)
        t_eff = well.d + well.psi_inf
    else:
        t_eff = bath.kt
    if potential.e_act < 3.0 * t_eff:
        warnings.warn(f"E / T_eff = {potential.e_act / t_eff:.2f} < 3: rate is poorly separated",
                      RuntimeWarning, stacklevel=2)
    x_abs = potential.xb + default_offset(bath, potential, cfg)
    fpt = np.full(cfg.n_traj, np.nan)
    threads = cfg.threads or min(8, os.cpu_count() or 1)
    if threads == 1:
        for i in range(cfg.n_traj):
            fpt[i] = _one(i, bath, potential, cfg, x_abs, well)
    else:
        with concurrent.futures.ThreadPoolExecutor(threads) as pool:
            futures = {pool.submit(_one, i, bath, potential, cfg, x_abs, well): i for i in range(cfg.n_traj)}
            for fut in concurrent.futures.as_completed(futures):
                fpt[futures[fut]] = fut.result()
    k, se, n_esc, n_cens = censored_rate(fpt, cfg.t_max)
    return FptEstimate(k, se, n_esc, n_cens, fpt)
