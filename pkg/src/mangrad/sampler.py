"""Direction laws on unit tangent spheres and the projected-gradient map.

Three laws are provided: the rotation-invariant (Haar) law, finite discrete
laws built from vector fields with pointwise weights, and the conjugate
orbit of a seed Hermitian under a finite unitary set. The projected
gradient g(x, u) = <u, grad f(x)> u is the update direction of the
randomized descent loop.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass

import numpy as np

from .cost import CostFunction
from .errors import LawError, UsageError
from .linalg import check_hermitian, frobenius_norm
from .manifold import Manifold, SpecialUnitary
from .rng import RngStream

# |cos angle| above this counts as collinear in the span checks.
_COLLINEAR = 1.0 - 1e-9

# Weight vectors may drift from summing to one by this much before erroring.
_WEIGHT_DRIFT = 1e-9


class DirectionLaw(ABC):
    """Probability law on the unit sphere of each tangent space."""

    manifold: Manifold

    @abstractmethod
    def sample(self, x, rng: RngStream) -> tuple[np.ndarray, int]:
        """Draw a unit tangent vector at x; returns (vector, direction id).

        The id is -1 for continuous laws and the chosen index for finite ones.
        """


class HaarSphereLaw(DirectionLaw):
    """Uniform (rotation invariant) law on the unit tangent sphere."""

    def __init__(self, manifold: Manifold):
        self.manifold = manifold

    def sample(self, x, rng: RngStream) -> tuple[np.ndarray, int]:
        return self.manifold.haar_unit_tangent(x, rng), -1


class DiscreteVectorFieldLaw(DirectionLaw):
    """Finite law: direction xi_j(x)/||xi_j(x)|| with probability p_j(x).

    ``fields`` are callables x -> tangent vector; ``weights`` is either a
    constant probability vector or a callable x -> vector. The law is only
    sound when, at every point, the fields still span the tangent space
    after dropping all fields collinear with any single one; ``span_check``
    probes that condition numerically.
    """

    def __init__(self, manifold: Manifold, fields, weights):
        if len(fields) < 1:
            raise LawError("discrete law needs at least one field")
        self.manifold = manifold
        self.fields = list(fields)
        self._weights = weights

    def weights_at(self, x) -> np.ndarray:
        w = self._weights(x) if callable(self._weights) else self._weights
        w = np.asarray(w, dtype=float)
        if len(w) != len(self.fields):
            raise LawError("weight count does not match field count")
        if np.any(w <= 0.0):
            raise LawError("discrete law weights must be strictly positive")
        total = float(w.sum())
        if abs(total - 1.0) > _WEIGHT_DRIFT:
            raise LawError(f"weights sum to {total!r}, beyond the allowed drift")
        return w / total

    def directions_at(self, x) -> list[np.ndarray]:
        dirs = []
        for j, xi in enumerate(self.fields):
            v = np.asarray(xi(x))
            nrm = self.manifold.norm(x, v)
            if nrm == 0.0:
                raise LawError(f"field {j} vanishes at the queried point")
            dirs.append(v / nrm)
        return dirs

    def sample(self, x, rng: RngStream) -> tuple[np.ndarray, int]:
        w = self.weights_at(x)
        j = rng.choice_index(w)
        v = np.asarray(self.fields[j](x))
        nrm = self.manifold.norm(x, v)
        if nrm == 0.0:
            raise LawError(f"field {j} vanishes at the sampled point but has weight {w[j]}")
        return v / nrm, j

    def span_check(self, probe_points) -> None:
        """Verify the remove-one-direction span condition at the probe points."""
        m = self.manifold
        for x in probe_points:
            dirs = self.directions_at(x)
            coeffs = np.array([m.coeffs_from_tangent(x, d) for d in dirs])
            for j in range(len(dirs)):
                cos = np.abs(coeffs @ coeffs[j])
                keep = coeffs[cos < _COLLINEAR]
                if len(keep) == 0 or np.linalg.matrix_rank(keep, tol=1e-9) < m.dim:
                    raise LawError(
                        f"fields fail the span condition at a probe point when "
                        f"directions collinear with field {j} are removed"
                    )


class DesignConjugateLaw(DirectionLaw):
    """Uniform law over the normalized conjugates i U_g H U_g^H of a seed H."""

    def __init__(self, manifold: SpecialUnitary, unitaries, seed_h):
        if not isinstance(manifold, SpecialUnitary):
            raise UsageError("design-conjugate laws live on SU(n)")
        seed_h = check_hermitian(seed_h, tol=1e-10)
        if abs(np.trace(seed_h)) > 1e-10 * max(frobenius_norm(seed_h), 1e-300):
            raise UsageError("seed matrix must be traceless Hermitian")
        if frobenius_norm(seed_h) == 0.0:
            raise UsageError("seed matrix must be nonzero")
        self.manifold = manifold
        self.seed_h = seed_h
        dirs = []
        for u in unitaries:
            u = np.asarray(u, dtype=complex)
            omega = 1j * (u @ seed_h @ u.conj().T)
            dirs.append(omega / frobenius_norm(omega))
        self.directions = np.array(dirs)

    def directions_at(self, x) -> list[np.ndarray]:
        return list(self.directions)

    def sample(self, x, rng: RngStream) -> tuple[np.ndarray, int]:
        j = int(rng.uniform() * len(self.directions))
        j = min(j, len(self.directions) - 1)
        return self.directions[j], j


def sample_direction(x, law: DirectionLaw, rng: RngStream) -> np.ndarray:
    """Draw a unit tangent direction at x from the law."""
    v, _ = law.sample(x, rng)
    m = law.manifold
    nrm = m.norm(x, v)
    if abs(nrm - 1.0) > 1e-12:
        v = v / nrm
    return v


def project_gradient(cost: CostFunction, x, u) -> np.ndarray:
    """g(x, u) = <u, grad f(x)> u for a unit tangent u."""
    grad = cost.riemannian_grad(x)
    c = cost.manifold.inner(x, u, grad)
    return c * np.asarray(u)


def projection_sphere_check(cost: CostFunction, x, samples: int, rng: RngStream) -> float:
    """Max deviation of g draws from the sphere centered at grad/2 through 0.

    Every projected gradient satisfies ||g - grad/2|| = ||grad||/2 exactly;
    this measures the worst numerical violation over Haar draws.
    """
    m = cost.manifold
    grad = cost.riemannian_grad(x)
    gnorm = m.norm(x, grad)
    if gnorm == 0.0:
        raise UsageError("projection sphere check requires a nonzero gradient")
    law = HaarSphereLaw(m)
    worst = 0.0
    half = 0.5 * np.asarray(grad)
    for _ in range(samples):
        u, _ = law.sample(x, rng)
        g = m.inner(x, u, grad) * np.asarray(u)
        dev = abs(m.norm(x, g - half) - 0.5 * gnorm)
        worst = max(worst, dev)
    return worst


@dataclass(frozen=True)
class ExpectationReport:
    """Componentwise deviation of mean(g) from grad/N, with standard errors."""

    deviation: np.ndarray
    standard_error: np.ndarray
    samples: int

    @property
    def within_3se(self) -> bool:
        return bool(np.all(np.abs(self.deviation) <= 3.0 * self.standard_error + 1e-300))


def expectation_check(cost: CostFunction, x, samples: int, rng: RngStream) -> ExpectationReport:
    """Monte-Carlo check of E[g] = grad/N under the Haar law.

    Works in an orthonormal tangent basis, where the Haar law is the uniform
    law on the coefficient sphere.
    """
    m = cost.manifold
    dim = m.dim
    gc = m.coeffs_from_tangent(x, cost.riemannian_grad(x))
    z = rng.normals(samples * dim).reshape(samples, dim)
    norms = np.linalg.norm(z, axis=1)
    norms[norms == 0.0] = 1.0
    u = z / norms[:, None]
    g = (u @ gc)[:, None] * u
    dev = g.mean(axis=0) - gc / dim
    se = g.std(axis=0, ddof=1) / np.sqrt(samples)
    return ExpectationReport(deviation=dev, standard_error=se, samples=samples)


def overlap_floor(law: DirectionLaw, vector_field, probe_points) -> float:
    """min over probe points of max_j <u_j(x), v(x)>^2 for a finite law.

    Strictly positive exactly when the law's directions overlap the field
    everywhere on the probes; the quantity lower-bounds the per-step
    projected-gradient mass of the law against that field.
    """
    if not hasattr(law, "directions_at"):
        raise UsageError("overlap floor is defined for finite direction laws")
    m = law.manifold
    floor = None
    for x in probe_points:
        v = np.asarray(vector_field(x))
        best = max(m.inner(x, d, v) ** 2 for d in law.directions_at(x))
        floor = best if floor is None else min(floor, best)
    if floor is None:
        raise UsageError("overlap floor needs at least one probe point")
    return float(floor)
