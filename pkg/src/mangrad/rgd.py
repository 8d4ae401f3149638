"""Randomized projected gradient descent.

One step moves along the projection of the Riemannian gradient onto a
randomly drawn unit tangent direction: x' = exp_x(-eta <u, grad f> u).
Each step carries a descent certificate
f(x') - f(x) <= -eta (1 - ell eta / 2) <grad f, g> and the loop aborts if
the certificate is violated beyond slack, since the convergence guarantees
hinge on it. Trajectories log enough per-iteration state to audit
monotonicity and saddle passages after the fact.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import tolerances
from .cost import CostFunction, GroundStateCost, fd_second_derivative
from .errors import ConfigError, NumericError, UsageError
from .manifold import SpecialUnitary
from .rng import RngStream
from .sampler import DirectionLaw

_CROSSING_SLACK = 1e-12


@dataclass(frozen=True)
class RgdConfig:
    """Step-size policy, stopping rules, and seeding for a descent run.

    ``eta_policy`` is "from_smoothness" (eta = min(1/ell, injectivity radius),
    optionally tightened by an explicit ``eta``) or "explicit" (eta required).
    Stopping is the first of: gradient norm below ``grad_tol``, cost progress
    over ``window`` iterations below ``f_tol`` relative, or ``max_iter``.
    """

    eta_policy: str = "from_smoothness"
    eta: float | None = None
    max_iter: int = 100_000
    grad_tol: float = 1e-8
    f_tol: float = 1e-12
    window: int = 100
    seed: int = 0

    def __post_init__(self):
        if self.eta_policy not in ("from_smoothness", "explicit"):
            raise ConfigError(f"unknown eta policy {self.eta_policy!r}")
        if self.eta_policy == "explicit" and (self.eta is None or self.eta <= 0.0):
            raise ConfigError("explicit eta policy requires a positive eta")
        if self.eta is not None and self.eta <= 0.0:
            raise ConfigError("eta must be positive")
        if self.max_iter < 0:
            raise ConfigError("max_iter must be nonnegative")
        if self.grad_tol <= 0.0 or self.f_tol <= 0.0:
            raise ConfigError("grad_tol and f_tol must be positive")
        if self.window < 1:
            raise ConfigError("window must be at least 1")

    def resolve_eta(self, cost: CostFunction) -> float:
        if self.eta_policy == "explicit":
            return float(self.eta)
        ell = cost.smoothness_ell()
        bound = cost.manifold.injectivity_radius
        if ell > 0.0:
            bound = min(bound, 1.0 / ell)
        if self.eta is not None:
            if self.eta > bound * (1.0 + 1e-12):
                raise ConfigError(
                    "step size violates the descent precondition "
                    f"eta <= min(1/ell, injectivity radius) = {bound!r}; got eta = {self.eta!r}"
                )
            return float(self.eta)
        if not math.isfinite(bound):
            raise ConfigError("flat cost on a non-compact manifold has no finite default eta")
        return bound


@dataclass(frozen=True)
class StepDiagnostics:
    f_before: float
    f_after: float
    grad_norm: float
    proj: float  # <grad f, g> = <u, grad f>^2
    direction_id: int
    cert_residual: float
    reprojected: bool = False


class CriticalKind(str, Enum):
    MINIMUM = "minimum"
    STRICT_SADDLE = "strict_saddle"
    DEGENERATE = "degenerate"
    NOT_CRITICAL = "not_critical"


@dataclass
class TrajectoryRecord:
    """Per-iteration log of a single descent run."""

    f: np.ndarray
    grad_norm: np.ndarray
    proj: np.ndarray
    cert_residual: np.ndarray
    direction_id: np.ndarray
    final_point: np.ndarray
    final_f: float
    iterations: int
    stop_reason: str
    crossings: list = field(default_factory=list)  # (iteration, critical value) pairs

    def rows(self):
        for i in range(self.iterations):
            yield (i, self.f[i], self.grad_norm[i], self.proj[i], self.cert_residual[i])


def _check_point_drift(manifold, x):
    """Cheap per-step invariant monitor; returns (point, defect, needs_fix)."""
    if isinstance(manifold, SpecialUnitary):
        defect = float(np.linalg.norm(x.conj().T @ x - np.eye(manifold.n)))
        return defect, defect > tolerances.UNITARY
    return 0.0, False


def rgd_step(cost: CostFunction, x, law: DirectionLaw, eta: float, rng: RngStream, f_before=None):
    """One randomized descent step; returns (x_next, StepDiagnostics)."""
    if eta <= 0.0:
        raise UsageError("step size must be positive")
    m = cost.manifold
    if f_before is None:
        f_before = cost.value(x)
    grad = cost.riemannian_grad(x)
    gnorm = m.norm(x, grad)
    if gnorm == 0.0:
        return x, StepDiagnostics(f_before, f_before, 0.0, 0.0, -1, 0.0)
    u, direction_id = law.sample(x, rng)
    coeff = m.inner(x, u, grad)
    x_next = m.exp_map(x, (-eta * coeff) * np.asarray(u))
    reprojected = False
    defect, needs_fix = _check_point_drift(m, x_next)
    if needs_fix:
        x_next = m.reproject_point(x_next)
        reprojected = True
        defect, still_bad = _check_point_drift(m, x_next)
        if still_bad:
            raise NumericError(f"point left the manifold (defect {defect:.3e}) and re-projection failed")
    f_after = cost.value(x_next)
    proj = coeff * coeff
    ell = cost.smoothness_ell()
    cert_residual = (f_after - f_before) + eta * (1.0 - ell * eta / 2.0) * proj
    diag = StepDiagnostics(f_before, f_after, gnorm, proj, direction_id, cert_residual, reprojected)
    if cert_residual > tolerances.DESCENT_CERT_SLACK:
        raise NumericError(
            f"descent certificate violated: residual {cert_residual:.3e} "
            f"(f {f_before!r} -> {f_after!r}, proj {proj!r}, eta {eta!r})"
        )
    if f_after - f_before > tolerances.MONOTONE_SLACK * (1.0 + abs(f_before)):
        raise NumericError(f"cost increased: {f_before!r} -> {f_after!r}")
    return x_next, diag


def rgd_run(x0, cost: CostFunction, law: DirectionLaw, config: RgdConfig, stream_id: int = 0) -> TrajectoryRecord:
    """Run the descent until a stopping rule fires; returns the full record."""
    m = cost.manifold
    x = m.check_point(x0)
    eta = config.resolve_eta(cost)
    rng = RngStream(config.seed, stream_id)
    critical_values = cost.critical_values() or ()

    f_log, g_log, p_log, c_log, id_log = [], [], [], [], []
    crossings = []
    f_curr = cost.value(x)
    stop_reason = "budget"
    iterations = 0
    for i in range(config.max_iter):
        grad = cost.riemannian_grad(x)
        gnorm = m.norm(x, grad)
        if gnorm <= config.grad_tol:
            stop_reason = "grad_tol"
            break
        if i >= config.window:
            progress = f_log[i - config.window] - f_curr
            if progress <= config.f_tol * (1.0 + abs(f_curr)):
                stop_reason = "f_window"
                break
        u, direction_id = law.sample(x, rng)
        coeff = m.inner(x, u, grad)
        x_next = m.exp_map(x, (-eta * coeff) * np.asarray(u))
        defect, needs_fix = _check_point_drift(m, x_next)
        if needs_fix:
            x_next = m.reproject_point(x_next)
            defect, still_bad = _check_point_drift(m, x_next)
            if still_bad:
                raise NumericError(
                    f"iteration {i}: point left the manifold (defect {defect:.3e}) "
                    "and re-projection failed"
                )
        f_next = cost.value(x_next)
        proj = coeff * coeff
        ell = cost.smoothness_ell()
        cert_residual = (f_next - f_curr) + eta * (1.0 - ell * eta / 2.0) * proj
        if cert_residual > tolerances.DESCENT_CERT_SLACK:
            raise NumericError(f"iteration {i}: descent certificate violated by {cert_residual:.3e}")
        if f_next - f_curr > tolerances.MONOTONE_SLACK * (1.0 + abs(f_curr)):
            raise NumericError(f"iteration {i}: cost increased from {f_curr!r} to {f_next!r}")
        for v in critical_values:
            if f_curr - v > _CROSSING_SLACK and v - f_next > _CROSSING_SLACK:
                crossings.append((i, float(v)))
        f_log.append(f_curr)
        g_log.append(gnorm)
        p_log.append(proj)
        c_log.append(cert_residual)
        id_log.append(direction_id)
        x = x_next
        f_curr = f_next
        iterations = i + 1

    return TrajectoryRecord(
        f=np.array(f_log),
        grad_norm=np.array(g_log),
        proj=np.array(p_log),
        cert_residual=np.array(c_log),
        direction_id=np.array(id_log, dtype=int),
        final_point=x,
        final_f=f_curr,
        iterations=iterations,
        stop_reason=stop_reason,
        crossings=crossings,
    )


def hessian_matrix(cost: CostFunction, x, fd_step: float = 1e-3) -> np.ndarray:
    """Hessian in an orthonormal tangent basis, by polarization of the quadratic form.

    Uses the analytic curve second derivative for the ground-state cost and
    the cost's own form for quadratics; otherwise central finite differences.
    """
    m = cost.manifold
    basis = m.tangent_basis(x)

    if isinstance(cost, GroundStateCost):
        def q(v):
            return cost.curve_second_derivative(x, 1j * np.asarray(v))
    else:
        def q(v):
            try:
                return cost.hessian_form(x, v)
            except NotImplementedError:
                return fd_second_derivative(cost, x, v, h=fd_step)

    d = len(basis)
    diag = [q(b) for b in basis]
    h = np.zeros((d, d))
    for k in range(d):
        h[k, k] = diag[k]
        for l in range(k + 1, d):
            qkl = q(basis[k] + basis[l])
            h[k, l] = h[l, k] = (qkl - diag[k] - diag[l]) / 2.0
    return h


def classify_critical(cost: CostFunction, x, grad_tol: float = 1e-6, lam_tol: float | None = None) -> CriticalKind:
    """Classify a point by the eigenvalue signs of its tangent-basis Hessian.

    Not critical if the gradient norm exceeds grad_tol. Otherwise: a strict
    saddle if any eigenvalue falls below -lam_tol; a minimum if none do and
    at least one exceeds +lam_tol; degenerate if every eigenvalue sits in
    the +-lam_tol band (a flat critical manifold at this resolution).
    """
    m = cost.manifold
    gnorm = m.norm(x, cost.riemannian_grad(x))
    if gnorm > grad_tol:
        return CriticalKind.NOT_CRITICAL
    h = hessian_matrix(cost, x)
    eigs = np.linalg.eigvalsh(h) if h.size > 1 else np.array([float(h[0, 0])])
    scale = float(np.max(np.abs(eigs))) if eigs.size else 0.0
    if lam_tol is None:
        lam_tol = 1e-6 * max(scale, 1e-300)
    if np.any(eigs < -lam_tol):
        return CriticalKind.STRICT_SADDLE
    if np.any(eigs > lam_tol):
        return CriticalKind.MINIMUM
    return CriticalKind.DEGENERATE


@dataclass(frozen=True)
class RealizationResult:
    realization: int
    final_f: float
    gap: float | None
    iterations: int
    stop_reason: str
    classification: str | None
    success: bool | None

    def to_dict(self) -> dict:
        return {
            "realization": self.realization,
            "final_f": self.final_f,
            "gap": self.gap,
            "iterations": self.iterations,
            "stop_reason": self.stop_reason,
            "classification": self.classification,
            "success": self.success,
        }


@dataclass
class EnsembleSummary:
    n_realizations: int
    target_value: float | None
    success_tol: float | None
    success_count: int | None
    results: list[RealizationResult]
    classification_counts: dict
    max_cert_residual: float

    @property
    def success_rate(self) -> float | None:
        if self.success_count is None:
            return None
        return self.success_count / self.n_realizations

    def to_dict(self) -> dict:
        return {
            "n_realizations": self.n_realizations,
            "target_value": self.target_value,
            "success_tol": self.success_tol,
            "success_count": self.success_count,
            "success_rate": self.success_rate,
            "classification_counts": self.classification_counts,
            "max_cert_residual": self.max_cert_residual,
            "realizations": [r.to_dict() for r in self.results],
        }


def ensemble_run(
    cost: CostFunction,
    law: DirectionLaw,
    config: RgdConfig,
    n_realizations: int,
    x0_provider,
    target_value: float | None = None,
    success_tol: float | None = None,
    classify: bool = True,
    keep_trajectories: bool = False,
    threads: int = 1,
):
    """Run independent descent realizations on streams indexed by realization.

    ``x0_provider(realization, rng)`` supplies the start point, drawing any
    randomness it needs from the realization's own stream so that results do
    not depend on scheduling. Returns (EnsembleSummary, records) where
    records is None unless ``keep_trajectories``.
    """
    if n_realizations < 1:
        raise UsageError("ensemble needs at least one realization")

    def one(k: int):
        rng = RngStream(config.seed, stream_id=k)
        x0 = x0_provider(k, rng)
        record = rgd_run(x0, cost, law, config, stream_id=n_realizations + k)
        kind = None
        if classify:
            kind = classify_critical(cost, record.final_point, grad_tol=10.0 * config.grad_tol).value
        gap = None
        success = None
        if target_value is not None:
            gap = record.final_f - target_value
            success = abs(gap) <= (success_tol if success_tol is not None else 1e-3)
        return record, RealizationResult(
            realization=k,
            final_f=record.final_f,
            gap=gap,
            iterations=record.iterations,
            stop_reason=record.stop_reason,
            classification=kind,
            success=success,
        )

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            outcomes = list(pool.map(one, range(n_realizations)))
    else:
        outcomes = [one(k) for k in range(n_realizations)]

    records = [rec for rec, _ in outcomes]
    results = [res for _, res in outcomes]
    counts: dict = {}
    for r in results:
        if r.classification is not None:
            counts[r.classification] = counts.get(r.classification, 0) + 1
    max_cert = max((float(rec.cert_residual.max()) if rec.iterations else 0.0) for rec in records)
    summary = EnsembleSummary(
        n_realizations=n_realizations,
        target_value=target_value,
        success_tol=success_tol,
        success_count=None if target_value is None else sum(1 for r in results if r.success),
        results=results,
        classification_counts=counts,
        max_cert_residual=max_cert,
    )
    return summary, (records if keep_trajectories else None)
