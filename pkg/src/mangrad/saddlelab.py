"""Quantitative saddle-passage study in the two-dimensional quadratic model.

The normalized descent iterates reduce to an angle process on the circle;
this module simulates that discrete process, its Ito diffusion limit (via
Euler-Maruyama), and the mean-repelling Ornstein-Uhlenbeck linearization
near the saddle, together with the analytic lower bound for the OU hitting
time and the deterministic tail time away from the saddle. Hitting-time
distributions are compared through the Kolmogorov distance.

Conventions: one discrete step advances physical time by eta. The printed
diffusion coefficient sqrt(eta ((a cos phi)^2 + (b sin phi)^2))/2 of the
limiting SDE understates the per-unit-time variance of the discrete process
(eta (...) Var(u2) with Var(u2) = 1/2) by a factor of 2; the
``variance_matched`` flag switches every SDE-based routine to the matched
diffusion while the default reproduces the SDE as printed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import UsageError
from .rng import RngStream
from .stats import erf, ks_statistic, ks_statistic_two_sample

QUARTER_PI = math.pi / 4.0


@dataclass(frozen=True)
class AngleProcessParams:
    """Saddle coefficients a, b, step size eta, start angle, and step budget."""

    a: float
    b: float
    eta: float
    phi0: float = 0.0
    n_steps: int = 1000

    def __post_init__(self):
        if self.a <= 0.0 or self.b <= 0.0:
            raise UsageError("saddle coefficients must be positive")
        ell = 2.0 * max(self.a, self.b)
        if self.eta <= 0.0 or self.eta > 1.0 / ell:
            raise UsageError(f"eta must lie in (0, 1/(2 max(a, b))] = (0, {1.0 / ell!r}]")
        if not -QUARTER_PI < self.phi0 < QUARTER_PI:
            raise UsageError("phi0 must lie strictly between -pi/4 and pi/4")
        if self.n_steps < 0:
            raise UsageError("n_steps must be nonnegative")

    def drift(self, phi):
        return self.eta * (self.a + self.b) / 2.0 * np.sin(2.0 * np.asarray(phi))

    def noise_scale(self, phi):
        phi = np.asarray(phi)
        return self.eta * np.sqrt((self.a * np.cos(phi)) ** 2 + (self.b * np.sin(phi)) ** 2)


@dataclass(frozen=True)
class OuParams:
    """Mean-repelling OU process dX = kappa X dt + sigma dW with threshold c."""

    kappa: float
    sigma: float
    c: float
    dt: float = 1e-3
    t_max: float = 10.0

    def __post_init__(self):
        if self.kappa <= 0.0 or self.sigma <= 0.0:
            raise UsageError("kappa and sigma must be positive")
        if self.c < 0.0:
            raise UsageError("threshold c must be nonnegative")
        if self.dt <= 0.0 or self.dt > self.t_max:
            raise UsageError("dt must be positive and at most t_max")


class Ecdf:
    """Empirical cdf of a sample; evaluation is fraction of samples <= t."""

    def __init__(self, samples):
        s = np.sort(np.asarray(samples, dtype=float))
        if s.size == 0:
            raise UsageError("empirical cdf needs at least one sample")
        self._s = s

    @property
    def samples(self) -> np.ndarray:
        return self._s

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        out = np.searchsorted(self._s, t, side="right") / len(self._s)
        return float(out) if out.ndim == 0 else out


@dataclass
class HittingTimes:
    """Hitting-time samples with censoring flags; times are physical."""

    times: np.ndarray
    censored: np.ndarray

    @property
    def censored_fraction(self) -> float:
        return float(np.mean(self.censored))

    def uncensored(self) -> np.ndarray:
        return self.times[~self.censored]

    def ecdf(self) -> Ecdf:
        return Ecdf(self.uncensored())


def angle_step(phi: float, params: AngleProcessParams, rng: RngStream) -> float:
    """One update of the discrete angle process.

    Drift eta (a+b)/2 sin(2 phi) plus noise u2 * eta * sqrt((a cos phi)^2 +
    (b sin phi)^2), with u2 the second coordinate of a uniform point on the
    unit circle.
    """
    u2 = float(rng.circle_component())
    return float(phi + params.drift(phi) + u2 * params.noise_scale(phi))


def angle_increments(phi: float, params: AngleProcessParams, n: int, rng: RngStream) -> np.ndarray:
    """n independent one-step increments from a fixed angle (for moment checks)."""
    u2 = rng.circle_component(n)
    return float(params.drift(phi)) + u2 * float(params.noise_scale(phi))


def simulate_angle_hitting(
    params: AngleProcessParams, rng: RngStream, threshold: float = QUARTER_PI
):
    """First step index with |phi| >= threshold; returns (steps, time, censored)."""
    if abs(params.phi0) >= threshold:
        return 0, 0.0, False
    phi = params.phi0
    half = (params.a + params.b) / 2.0
    a, b, eta = params.a, params.b, params.eta
    for i in range(1, params.n_steps + 1):
        u2 = float(rng.circle_component())
        phi = phi + eta * half * math.sin(2.0 * phi) + u2 * eta * math.sqrt(
            (a * math.cos(phi)) ** 2 + (b * math.sin(phi)) ** 2
        )
        if abs(phi) >= threshold:
            return i, i * eta, False
    return params.n_steps, params.n_steps * eta, True


def simulate_angle_hitting_ensemble(
    params: AngleProcessParams,
    n_realizations: int,
    seed: int,
    threshold: float = QUARTER_PI,
    stream_id: int = 0,
) -> HittingTimes:
    """Lockstep ensemble of the discrete angle process; times in units of eta steps."""
    rng = RngStream(seed, stream_id=stream_id)
    phi = np.full(n_realizations, params.phi0)
    times = np.full(n_realizations, params.n_steps * params.eta)
    censored = np.ones(n_realizations, dtype=bool)
    if abs(params.phi0) >= threshold:
        return HittingTimes(np.zeros(n_realizations), np.zeros(n_realizations, dtype=bool))
    active = np.ones(n_realizations, dtype=bool)
    for i in range(1, params.n_steps + 1):
        u2 = rng.circle_component(n_realizations)
        phi = phi + params.drift(phi) + u2 * params.noise_scale(phi)
        hit = active & (np.abs(phi) >= threshold)
        times[hit] = i * params.eta
        censored[hit] = False
        active &= ~hit
        if not active.any():
            break
    return HittingTimes(times, censored)


def _sde_diffusion(params: AngleProcessParams, phi, variance_matched: bool):
    phi = np.asarray(phi)
    rate_sq = params.eta * ((params.a * np.cos(phi)) ** 2 + (params.b * np.sin(phi)) ** 2)
    if variance_matched:
        return np.sqrt(rate_sq / 2.0)
    return np.sqrt(rate_sq) / 2.0


def euler_maruyama_angle_path(
    params: AngleProcessParams,
    dt: float,
    t_max: float,
    rng: RngStream,
    variance_matched: bool = False,
    zero_noise: bool = False,
):
    """Euler-Maruyama path of the limiting angle diffusion; returns (t, phi)."""
    if dt <= 0.0 or dt > t_max:
        raise UsageError("dt must be positive and at most t_max")
    n = int(round(t_max / dt))
    t = np.linspace(0.0, n * dt, n + 1)
    phi = np.empty(n + 1)
    phi[0] = params.phi0
    half = (params.a + params.b) / 2.0
    sq = math.sqrt(dt)
    z = np.zeros(n) if zero_noise else rng.normals(n)
    for k in range(n):
        p = phi[k]
        drift = half * math.sin(2.0 * p)
        diff = 0.0 if zero_noise else float(_sde_diffusion(params, p, variance_matched))
        phi[k + 1] = p + drift * dt + diff * sq * z[k]
    return t, phi


def sde_angle_hitting_ensemble(
    params: AngleProcessParams,
    dt: float,
    t_max: float,
    n_realizations: int,
    seed: int,
    threshold: float = QUARTER_PI,
    variance_matched: bool = False,
    stream_id: int = 0,
) -> HittingTimes:
    """Lockstep Euler-Maruyama ensemble of the angle diffusion hitting time."""
    if dt <= 0.0 or dt > t_max:
        raise UsageError("dt must be positive and at most t_max")
    rng = RngStream(seed, stream_id=stream_id)
    n = int(round(t_max / dt))
    phi = np.full(n_realizations, params.phi0)
    times = np.full(n_realizations, n * dt)
    censored = np.ones(n_realizations, dtype=bool)
    if abs(params.phi0) >= threshold:
        return HittingTimes(np.zeros(n_realizations), np.zeros(n_realizations, dtype=bool))
    active = np.ones(n_realizations, dtype=bool)
    half = (params.a + params.b) / 2.0
    sq = math.sqrt(dt)
    for k in range(1, n + 1):
        z = rng.normals(n_realizations)
        drift = half * np.sin(2.0 * phi)
        diff = _sde_diffusion(params, phi, variance_matched)
        phi = phi + drift * dt + diff * sq * z
        hit = active & (np.abs(phi) >= threshold)
        times[hit] = k * dt
        censored[hit] = False
        active &= ~hit
        if not active.any():
            break
    return HittingTimes(times, censored)


def ode_angle_solution(t, phi0: float, rate: float = 2.0):
    """Solution of phi' = (rate/2) sin(2 phi): arctan(e^{rate t} tan(phi0))."""
    return np.arctan(np.exp(rate * np.asarray(t)) * math.tan(phi0))


def ou_sigma_tilde(t: float, kappa: float, sigma: float) -> float:
    """Standard deviation sigma sqrt((e^{2 kappa t} - 1)/(2 kappa)) of the OU marginal."""
    if t < 0.0:
        raise UsageError("time must be nonnegative")
    return sigma * math.sqrt(math.expm1(2.0 * kappa * t) / (2.0 * kappa))


def ou_hitting_lower_cdf(t: float, params: OuParams) -> float:
    """Lower bound Pr[tau_c <= t] >= 1 + erf(-c / (sigma_tilde(t) sqrt(2)))."""
    if t <= 0.0:
        return 0.0
    if params.c == 0.0:
        return 1.0
    st = ou_sigma_tilde(t, params.kappa, params.sigma)
    if st == 0.0:
        return 0.0
    return 1.0 + erf(-params.c / (st * math.sqrt(2.0)))


def simulate_ou_hitting(params: OuParams, rng: RngStream):
    """Single Euler-Maruyama OU path from 0 until |X| >= c; (time, censored)."""
    if params.c == 0.0:
        return 0.0, False
    x = 0.0
    n = int(round(params.t_max / params.dt))
    sq = math.sqrt(params.dt)
    for k in range(1, n + 1):
        x += params.kappa * x * params.dt + params.sigma * sq * rng.normal()
        if abs(x) >= params.c:
            return k * params.dt, False
    return n * params.dt, True


def simulate_ou_hitting_ensemble(
    params: OuParams, n_realizations: int, seed: int, stream_id: int = 0
) -> HittingTimes:
    """Lockstep Euler-Maruyama ensemble of OU hitting times."""
    if params.c == 0.0:
        return HittingTimes(np.zeros(n_realizations), np.zeros(n_realizations, dtype=bool))
    rng = RngStream(seed, stream_id=stream_id)
    n = int(round(params.t_max / params.dt))
    x = np.zeros(n_realizations)
    times = np.full(n_realizations, n * params.dt)
    censored = np.ones(n_realizations, dtype=bool)
    active = np.ones(n_realizations, dtype=bool)
    sq = math.sqrt(params.dt)
    for k in range(1, n + 1):
        z = rng.normals(n_realizations)
        x = x + params.kappa * x * params.dt + params.sigma * sq * z
        hit = active & (np.abs(x) >= params.c)
        times[hit] = k * params.dt
        censored[hit] = False
        active &= ~hit
        if not active.any():
            break
    return HittingTimes(times, censored)


def deterministic_tail_time(c: float) -> float:
    """Time -ln(tan c)/2 for the noiseless angle flow to reach pi/4 from c."""
    if not 0.0 < c <= QUARTER_PI:
        raise UsageError("tail threshold must lie in (0, pi/4]")
    return -0.5 * math.log(math.tan(c))


def linearized_ou_params(
    params: AngleProcessParams,
    c: float,
    dt: float = 1e-3,
    t_max: float = 20.0,
    variance_matched: bool = False,
) -> OuParams:
    """OU parameters from linearizing the angle diffusion at the saddle.

    Drift (a+b)/2 sin(2 phi) ~ (a+b) phi gives kappa = a + b; the diffusion
    at phi = 0 gives sigma = a sqrt(eta)/2 (or the matched variant).
    """
    sigma = float(_sde_diffusion(params, 0.0, variance_matched))
    return OuParams(kappa=params.a + params.b, sigma=sigma, c=c, dt=dt, t_max=t_max)


def combined_tau_approximation(c: float, ou: OuParams, rate: float = 2.0):
    """CDF of tau ~ tau_c + tail(c): the OU bound shifted by the deterministic tail.

    ``c`` is the linearization threshold; it must match ``ou.c``. Returns a
    callable cdf t -> Pr[tau <= t].
    """
    if abs(ou.c - c) > 1e-12:
        raise UsageError("threshold mismatch between c and ou.c")
    tail = deterministic_tail_time(c) * (2.0 / rate)

    def cdf(t):
        t = np.asarray(t, dtype=float)
        out = np.array([ou_hitting_lower_cdf(float(s) - tail, ou) for s in np.atleast_1d(t)])
        return float(out[0]) if t.ndim == 0 else out

    return cdf


def ks_distance(first, second) -> float:
    """Kolmogorov distance between two ECDFs, or an analytic cdf and an ECDF."""
    if isinstance(first, Ecdf) and isinstance(second, Ecdf):
        return ks_statistic_two_sample(first.samples, second.samples)
    if callable(first) and isinstance(second, Ecdf):
        return ks_statistic(second.samples, first)
    if isinstance(first, Ecdf) and callable(second):
        return ks_statistic(first.samples, second)
    raise UsageError("ks_distance expects Ecdf or callable cdf arguments")
