"""End-to-end ground-state experiments on SU(2^n).

Ensembles of randomized descent against the cost tr(A U rho U^H), with Haar
or design-conjugate direction laws, measurement-style projected derivatives,
and success statistics against the brute-force global minimum. Spectra are
kept nondegenerate in the saddle statistics so that intermediate permutation
pairings are strict saddles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .cost import GroundStateCost
from .errors import UsageError
from .linalg import check_hermitian, frobenius_norm
from .manifold import SpecialUnitary
from .rgd import CriticalKind, EnsembleSummary, RgdConfig, ensemble_run
from .rng import RngStream
from .sampler import DirectionLaw, HaarSphereLaw

_MAX_QUBITS = 3


@dataclass(frozen=True)
class GroundStateProblem:
    """Problem data: spectra of A and rho plus the initial-point policy.

    ``x0_policy`` is "haar_random" (exponential of a random unit direction
    scaled to Frobenius norm pi/2) or "identity". A rho rotation seed, when
    given, conjugates rho by a random special unitary so the two operators
    no longer share an eigenbasis.
    """

    n_qubits: int
    a_eigs: tuple
    rho_eigs: tuple
    rho_rotation_seed: int | None = None
    x0_policy: str = "haar_random"

    def __post_init__(self):
        if not 1 <= self.n_qubits <= _MAX_QUBITS:
            raise UsageError(f"n_qubits must lie in 1..{_MAX_QUBITS}")
        dim = 2**self.n_qubits
        if len(self.a_eigs) != dim or len(self.rho_eigs) != dim:
            raise UsageError(f"spectra must have length 2^n_qubits = {dim}")
        rho = np.asarray(self.rho_eigs, dtype=float)
        if np.any(rho < -1e-12):
            raise UsageError("rho eigenvalues must be nonnegative")
        if abs(float(rho.sum()) - 1.0) > 1e-10:
            raise UsageError("rho eigenvalues must sum to 1")
        if self.x0_policy not in ("haar_random", "identity"):
            raise UsageError(f"unknown x0 policy {self.x0_policy!r}")

    @property
    def dim(self) -> int:
        return 2**self.n_qubits

    def spectral_spread(self) -> float:
        a = np.asarray(self.a_eigs, dtype=float)
        return float(a.max() - a.min())

    def nondegenerate(self) -> bool:
        a = np.sort(np.asarray(self.a_eigs, dtype=float))
        r = np.sort(np.asarray(self.rho_eigs, dtype=float))
        return bool(np.all(np.diff(a) > 1e-12) and np.all(np.diff(r) > 1e-12))

    def build_cost(self) -> GroundStateCost:
        rotation = None
        if self.rho_rotation_seed is not None:
            manifold = SpecialUnitary(self.dim)
            rotation = manifold.random_point(RngStream(self.rho_rotation_seed, stream_id=0))
        a = np.sort(np.asarray(self.a_eigs, dtype=float))[::-1]
        return GroundStateCost.from_eigs(a, self.rho_eigs, rotation=rotation)

    def x0_provider(self):
        manifold = SpecialUnitary(self.dim)
        if self.x0_policy == "identity":
            eye = np.eye(self.dim, dtype=complex)
            return lambda k, rng: eye
        return lambda k, rng: manifold.random_point(rng, radius=math.pi / 2.0)


def projected_derivative(cost: GroundStateCost, u, h) -> float:
    """Measured slope of J when moving along the tangent direction i H.

    For a unit-Frobenius Hermitian H this is <grad J(U), i H> in the
    left-trivialized metric, so the update U <- exp(-i eta D H) U with
    D = projected_derivative(...) decreases J.
    """
    h = check_hermitian(h, tol=1e-10)
    if abs(frobenius_norm(h) - 1.0) > 1e-10:
        raise UsageError("direction H must have unit Frobenius norm")
    grad = cost.riemannian_grad(u)
    return float(np.real(np.sum(np.conj(grad) * (1j * h))))


@dataclass
class GroundStateEnsembleReport:
    """Ensemble summary plus the ground-state success and criticality checks."""

    summary: EnsembleSummary
    global_min: float
    spread: float
    success_tol: float
    commutator_rel: list
    distance_to_critical_value: list

    @property
    def max_commutator_rel(self) -> float:
        return max(self.commutator_rel)

    @property
    def max_distance_to_critical_value(self) -> float:
        return max(self.distance_to_critical_value)

    def to_dict(self) -> dict:
        d = self.summary.to_dict()
        d.update(
            {
                "global_min": self.global_min,
                "spectral_spread": self.spread,
                "success_tol": self.success_tol,
                "max_commutator_rel": self.max_commutator_rel,
                "max_distance_to_critical_value": self.max_distance_to_critical_value,
            }
        )
        for row, comm, dist in zip(d["realizations"], self.commutator_rel, self.distance_to_critical_value):
            row["commutator_rel"] = comm
            row["distance_to_critical_value"] = dist
        return d


def run_groundstate_ensemble(
    problem: GroundStateProblem,
    law: DirectionLaw,
    config: RgdConfig,
    n_realizations: int,
    threads: int = 1,
    keep_trajectories: bool = False,
):
    """Descent ensemble with success measured against the brute-force minimum.

    Success means the final cost sits within 1e-3 of the spectral spread of
    A above the global minimum. Returns (report, records-or-None).
    """
    cost = problem.build_cost()
    target = cost.global_min_value()
    tol = 1e-3 * max(problem.spectral_spread(), 1e-300)
    summary, records = ensemble_run(
        cost,
        law,
        config,
        n_realizations,
        problem.x0_provider(),
        target_value=target,
        success_tol=tol,
        classify=True,
        keep_trajectories=True,
        threads=threads,
    )
    norm_a = max(float(np.linalg.norm(np.asarray(cost.a_eigs))), 1e-300)
    crit_vals = np.array(cost.critical_values())
    comm_rel = []
    dist_crit = []
    for rec in records:
        comm_rel.append(cost.commutator_norm(rec.final_point) / norm_a)
        dist_crit.append(float(np.min(np.abs(crit_vals - rec.final_f))))
    report = GroundStateEnsembleReport(
        summary=summary,
        global_min=target,
        spread=problem.spectral_spread(),
        success_tol=tol,
        commutator_rel=comm_rel,
        distance_to_critical_value=dist_crit,
    )
    return report, (records if keep_trajectories else None)


def _dwell_episodes(grad_norms: np.ndarray, threshold: float) -> list:
    """Lengths of below-threshold stretches that the trajectory escaped from."""
    episodes = []
    run = 0
    for g in grad_norms:
        if g <= threshold:
            run += 1
        else:
            if run > 0:
                episodes.append(run)
            run = 0
    # A trailing run ends at the stopping point: that is convergence, not a dwell.
    return episodes


@dataclass
class SaddleStatsReport:
    n_realizations: int
    saddle_endpoints: int
    degenerate_starts: int
    dwell_episodes: list
    critical_values: tuple
    classification_counts: dict

    def to_dict(self) -> dict:
        return {
            "n_realizations": self.n_realizations,
            "saddle_endpoints": self.saddle_endpoints,
            "degenerate_starts": self.degenerate_starts,
            "dwell_episodes": self.dwell_episodes,
            "critical_values": list(self.critical_values),
            "classification_counts": self.classification_counts,
        }


def saddle_statistics(
    problem: GroundStateProblem,
    law: DirectionLaw | None,
    config: RgdConfig,
    n_realizations: int,
    threads: int = 1,
) -> SaddleStatsReport:
    """Count strict-saddle endpoints (expected zero) and near-saddle dwells.

    Requires nondegenerate spectra so the intermediate permutation pairings
    are strict saddles. Starts whose gradient already vanishes are reported
    as degenerate and not descended from. ``law`` defaults to the Haar law.
    """
    if not problem.nondegenerate():
        raise UsageError("saddle statistics require distinct A and rho eigenvalues")
    cost = problem.build_cost()
    if law is None:
        law = HaarSphereLaw(cost.manifold)
    provider = problem.x0_provider()
    manifold = cost.manifold

    degenerate = []

    def guarded_provider(k, rng):
        x0 = provider(k, rng)
        if manifold.norm(x0, cost.riemannian_grad(x0)) <= config.grad_tol:
            degenerate.append(k)
        return x0

    summary, records = ensemble_run(
        cost,
        law,
        config,
        n_realizations,
        guarded_provider,
        classify=True,
        keep_trajectories=True,
        threads=threads,
    )
    degenerate_set = set(degenerate)
    saddles = sum(
        1
        for r in summary.results
        if r.classification == CriticalKind.STRICT_SADDLE.value
        and r.realization not in degenerate_set
    )
    dwell = []
    for rec in records:
        dwell.extend(_dwell_episodes(rec.grad_norm, 10.0 * config.grad_tol))
    return SaddleStatsReport(
        n_realizations=n_realizations,
        saddle_endpoints=saddles,
        degenerate_starts=len(degenerate),
        dwell_episodes=dwell,
        critical_values=cost.critical_values(),
        classification_counts=summary.classification_counts,
    )
