"""Distributional machinery for projected-component laws.

Beta laws of sphere components, error-function and normal/chi-square
cumulative distributions, Kolmogorov-Smirnov statistics, and the
moment/KS/tail checks used by the acceptance experiments. The special
functions are built from the classical series and continued-fraction
expansions so their accuracy can be tested against independent quadrature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import UsageError
from .rng import RngStream

_SQRT_PI = math.sqrt(math.pi)
_CF_MAX_ITER = 300
_CF_EPS = 1e-16
_TINY = 1e-300


def erf(x: float) -> float:
    """Error function via power series (small x) and continued fraction (tails)."""
    x = float(x)
    if x < 0.0:
        return -erf(-x)
    if x == 0.0:
        return 0.0
    if x <= 2.0:
        # erf(x) = (2x e^{-x^2}/sqrt(pi)) * sum_k (2x^2)^k / (1*3*...*(2k+1))
        t = 2.0 * x * x
        term = 1.0
        s = 1.0
        k = 0
        while True:
            k += 1
            term *= t / (2.0 * k + 1.0)
            s += term
            if term < 1e-18 * s or k > 200:
                break
        return 2.0 * x * math.exp(-x * x) * s / _SQRT_PI
    return 1.0 - erfc(x)


def erfc(x: float) -> float:
    """Complementary error function; continued fraction for x > 2."""
    x = float(x)
    if x < 0.0:
        return 2.0 - erfc(-x)
    if x <= 2.0:
        return 1.0 - erf(x)
    # sqrt(pi) e^{x^2} erfc(x) = 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + ...))))
    f = _TINY
    c = f
    d = 0.0
    for k in range(1, _CF_MAX_ITER + 1):
        a = 1.0 if k == 1 else (k - 1) / 2.0
        b = x
        d = b + a * d
        if d == 0.0:
            d = _TINY
        c = b + a / c
        if c == 0.0:
            c = _TINY
        d = 1.0 / d
        delta = c * d
        f *= delta
        if abs(delta - 1.0) < _CF_EPS:
            break
    return math.exp(-x * x) * f / _SQRT_PI


def normal_cdf(x: float) -> float:
    """Standard normal cumulative distribution function."""
    x = float(x)
    if x < 0.0:
        return 0.5 * erfc(-x / math.sqrt(2.0))
    return 0.5 * (1.0 + erf(x / math.sqrt(2.0)))


def chi2_1_cdf(x: float) -> float:
    """CDF of the chi-square law with one degree of freedom."""
    if x <= 0.0:
        return 0.0
    return erf(math.sqrt(x / 2.0))


def _betacf(a: float, b: float, x: float) -> float:
    """Continued fraction for the regularized incomplete beta (Lentz scheme)."""
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _TINY:
        d = _TINY
    d = 1.0 / d
    h = d
    for m in range(1, _CF_MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _CF_EPS:
            return h
    raise UsageError(f"incomplete beta continued fraction failed for a={a}, b={b}, x={x}")


def regularized_incomplete_beta(a: float, b: float, x: float) -> float:
    """I_x(a, b) with the symmetry split at x = (a+1)/(a+b+2)."""
    if not 0.0 <= x <= 1.0:
        raise UsageError(f"incomplete beta argument must lie in [0, 1], got {x}")
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return 1.0
    ln_bt = (
        math.lgamma(a + b)
        - math.lgamma(a)
        - math.lgamma(b)
        + a * math.log(x)
        + b * math.log1p(-x)
    )
    bt = math.exp(ln_bt)
    if x < (a + 1.0) / (a + b + 2.0):
        return bt * _betacf(a, b, x) / a
    return 1.0 - bt * _betacf(b, a, 1.0 - x) / b


def _pdf_mass(alpha: float, beta: float, n_points: int = 500, t_span: float = 5.0) -> float:
    """Total pdf mass by tanh-sinh quadrature on [0, 1].

    The double-exponential weights absorb the algebraic endpoint
    singularities, so the check is uniformly accurate for the moderate
    parameters used here.
    """
    ln_b = math.lgamma(alpha) + math.lgamma(beta) - math.lgamma(alpha + beta)
    t = np.linspace(-t_span, t_span, 2 * n_points + 1)
    h = t[1] - t[0]
    u = 0.5 * math.pi * np.sinh(t)
    # x = sigmoid(2u); log x and log(1-x) computed in the cancellation-free form.
    e = np.exp(-2.0 * np.abs(u))
    ln_near = -2.0 * np.abs(u) - np.log1p(e)
    ln_far = -np.log1p(e)
    ln_x = np.where(u < 0.0, ln_near, ln_far)
    ln_1mx = np.where(u < 0.0, ln_far, ln_near)
    with np.errstate(over="ignore", under="ignore"):
        w = 0.25 * math.pi * np.cosh(t) / np.cosh(u) ** 2
        vals = np.where(
            w > 0.0,
            np.exp((alpha - 1.0) * ln_x + (beta - 1.0) * ln_1mx - ln_b),
            0.0,
        )
    return float(np.sum(vals * w) * h)


@dataclass(frozen=True)
class BetaLaw:
    """Beta(alpha, beta) law on [0, 1]."""

    alpha: float
    beta: float
    self_check: bool = field(default=True, compare=False)

    def __post_init__(self):
        if self.alpha <= 0.0 or self.beta <= 0.0:
            raise UsageError("beta law parameters must be positive")
        if self.self_check:
            mass = _pdf_mass(self.alpha, self.beta)
            if abs(mass - 1.0) > 1e-8:
                raise UsageError(
                    f"beta pdf mass check failed: quadrature gives {mass!r}"
                )

    def pdf(self, x: float) -> float:
        if not 0.0 <= x <= 1.0:
            raise UsageError(f"beta pdf argument must lie in [0, 1], got {x}")
        ln_b = math.lgamma(self.alpha) + math.lgamma(self.beta) - math.lgamma(self.alpha + self.beta)
        if x in (0.0, 1.0):
            # Infinite density at a singular endpoint is reported as such.
            edge_pow = self.alpha - 1.0 if x == 0.0 else self.beta - 1.0
            if edge_pow < 0.0:
                return math.inf
            if edge_pow > 0.0:
                return 0.0
        return math.exp(
            (self.alpha - 1.0) * math.log(x)
            + (self.beta - 1.0) * math.log1p(-x)
            - ln_b
        )

    def cdf(self, x: float) -> float:
        if not 0.0 <= x <= 1.0:
            raise UsageError(f"beta cdf argument must lie in [0, 1], got {x}")
        return regularized_incomplete_beta(self.alpha, self.beta, x)


def beta_cdf(law: BetaLaw, x: float) -> float:
    return law.cdf(x)


def component_square_law(n_dim: int) -> BetaLaw:
    """Law of the squared component of a uniform unit vector in R^n: Beta(1/2, (n-1)/2)."""
    if n_dim < 2:
        raise UsageError("component law requires dimension >= 2")
    return BetaLaw(0.5, (n_dim - 1) / 2.0, self_check=False)


def u_last_cdf(n_dim: int, x: float) -> float:
    """CDF of a single coordinate of a uniform unit vector in R^n.

    The coordinate is distributed as 2 Beta((n-1)/2, (n-1)/2) - 1.
    """
    if n_dim < 2:
        raise UsageError("component law requires dimension >= 2")
    if x <= -1.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    half = (n_dim - 1) / 2.0
    return regularized_incomplete_beta(half, half, (x + 1.0) / 2.0)


def component_moments(n_dim: int) -> tuple[float, float]:
    """Exact mean and variance of the squared component: 1/N and 2(N-1)/(N^2 (N+2))."""
    n = float(n_dim)
    return 1.0 / n, 2.0 * (n - 1.0) / (n * n * (n + 2.0))


def sample_unit_components(n_dim: int, samples: int, rng: RngStream) -> np.ndarray:
    """Draw the last coordinate of `samples` uniform unit vectors in R^n."""
    z = rng.normals(samples * n_dim).reshape(samples, n_dim)
    norms = np.linalg.norm(z, axis=1)
    norms[norms == 0.0] = 1.0
    return z[:, -1] / norms


def ks_statistic(samples: np.ndarray, cdf) -> float:
    """One-sample Kolmogorov-Smirnov statistic against a cdf callable."""
    s = np.sort(np.asarray(samples, dtype=float))
    n = len(s)
    if n == 0:
        raise UsageError("KS statistic needs a nonempty sample")
    f = np.array([cdf(v) for v in s])
    hi = np.arange(1, n + 1) / n - f
    lo = f - np.arange(0, n) / n
    return float(max(hi.max(), lo.max()))


def ks_statistic_two_sample(a: np.ndarray, b: np.ndarray) -> float:
    """Two-sample Kolmogorov-Smirnov statistic on the merged sample grid."""
    a = np.sort(np.asarray(a, dtype=float))
    b = np.sort(np.asarray(b, dtype=float))
    if len(a) == 0 or len(b) == 0:
        raise UsageError("KS statistic needs nonempty samples")
    grid = np.concatenate([a, b])
    fa = np.searchsorted(a, grid, side="right") / len(a)
    fb = np.searchsorted(b, grid, side="right") / len(b)
    return float(np.abs(fa - fb).max())


def ks_null_quantile(samples: int) -> float:
    """95% quantile of the one-sample KS null, the finite-sample slack term."""
    return 1.36 / math.sqrt(samples)


@dataclass(frozen=True)
class CheckResult:
    name: str
    statistic: float
    bound: float
    slack: float
    passed: bool

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "statistic": self.statistic,
            "bound": self.bound,
            "slack": self.slack,
            "pass": self.passed,
        }


def ks_bound_check(n_dim: int, samples: int, rng: RngStream) -> list[CheckResult]:
    """KS distance of sqrt(N) u_N to the normal law and of N u_N^2 to chi^2_1.

    The distance bounds 1/N and 2/N hold for N >= 5; the finite-sample 95%
    KS quantile is added as explicit slack.
    """
    if n_dim < 5:
        raise UsageError("the normal-approximation bound requires dimension N >= 5")
    u = sample_unit_components(n_dim, samples, rng)
    slack = ks_null_quantile(samples)
    ks_n = ks_statistic(math.sqrt(n_dim) * u, normal_cdf)
    ks_c = ks_statistic(n_dim * u * u, chi2_1_cdf)
    return [
        CheckResult("sqrtN_u_vs_normal", ks_n, 1.0 / n_dim, slack, ks_n <= 1.0 / n_dim + slack),
        CheckResult("N_u_sq_vs_chi2_1", ks_c, 2.0 / n_dim, slack, ks_c <= 2.0 / n_dim + slack),
    ]


def tail_bound_check(n_dim: int, k: float, samples: int, rng: RngStream) -> CheckResult:
    """Empirical Pr(u_N^2 >= 1/(k^2 N)) against the bound 2(1 - Phi(1/k) - 1/N)."""
    if n_dim < 2:
        raise UsageError("tail bound requires dimension >= 2")
    if k <= 0.0:
        raise UsageError("tail bound requires k > 0")
    u = sample_unit_components(n_dim, samples, rng)
    freq = float(np.mean(u * u >= 1.0 / (k * k * n_dim)))
    bound = 2.0 * (1.0 - normal_cdf(1.0 / k) - 1.0 / n_dim)
    se = math.sqrt(max(freq * (1.0 - freq), 1e-12) / samples)
    return CheckResult(f"tail_N{n_dim}_k{k:g}", freq, bound, 3.0 * se, freq >= bound - 3.0 * se)


def moment_check(n_dim: int, samples: int, rng: RngStream) -> list[CheckResult]:
    """Empirical mean/variance of u_N^2 against the exact beta-law moments."""
    u = sample_unit_components(n_dim, samples, rng)
    sq = u * u
    mean_exp, var_exp = component_moments(n_dim)
    mean_obs = float(sq.mean())
    var_obs = float(sq.var(ddof=1))
    se_mean = float(sq.std(ddof=1)) / math.sqrt(samples)
    centered = sq - mean_obs
    m4 = float(np.mean(centered**4))
    se_var = math.sqrt(max(m4 - var_obs**2, 0.0) / samples)
    return [
        CheckResult(
            f"mean_u_sq_N{n_dim}",
            mean_obs,
            mean_exp,
            3.0 * se_mean,
            abs(mean_obs - mean_exp) <= 3.0 * se_mean,
        ),
        CheckResult(
            f"var_u_sq_N{n_dim}",
            var_obs,
            var_exp,
            3.0 * se_var,
            abs(var_obs - var_exp) <= 3.0 * se_var,
        ),
    ]
