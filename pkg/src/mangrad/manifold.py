"""Riemannian manifolds with closed-form exponential maps.

Three spaces are supported: Euclidean R^n, the unit sphere S^{n-1} in R^n,
and SU(n) with the bi-invariant metric. Points are plain numpy arrays
(vectors for the flat cases, unitary matrices for SU). Tangent vectors on
SU(n) are stored left-trivialized: a tangent at U is the skew-Hermitian
traceless Omega with geodesic t -> exp(t Omega) U. This avoids repeated
multiplications by U and keeps the metric the flat Frobenius one.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass

import numpy as np

from . import linalg, tolerances
from .errors import UsageError
from .rng import RngStream


class Manifold(ABC):
    """Common surface for the three supported manifolds."""

    @property
    @abstractmethod
    def dim(self) -> int:
        """Dimension of the tangent space."""

    @property
    @abstractmethod
    def injectivity_radius(self) -> float:
        """Conservative lower bound on the injectivity radius, used to cap step sizes."""

    @abstractmethod
    def check_point(self, x) -> np.ndarray: ...

    @abstractmethod
    def check_tangent(self, x, v) -> np.ndarray: ...

    @abstractmethod
    def inner(self, x, u, v) -> float: ...

    @abstractmethod
    def exp_map(self, x, v) -> np.ndarray: ...

    @abstractmethod
    def project_to_tangent(self, x, v) -> np.ndarray: ...

    @abstractmethod
    def tangent_basis(self, x) -> np.ndarray:
        """Orthonormal basis of the tangent space at x, stacked along axis 0."""

    @abstractmethod
    def haar_unit_tangent(self, x, rng: RngStream) -> np.ndarray:
        """Unit tangent vector distributed uniformly on the tangent sphere at x."""

    @abstractmethod
    def random_point(self, rng: RngStream) -> np.ndarray: ...

    @abstractmethod
    def zero_tangent(self, x) -> np.ndarray: ...

    def norm(self, x, v) -> float:
        return math.sqrt(max(self.inner(x, v, v), 0.0))

    def tangent_from_coeffs(self, x, coeffs) -> np.ndarray:
        basis = self.tangent_basis(x)
        return np.tensordot(np.asarray(coeffs, dtype=float), basis, axes=1)

    def coeffs_from_tangent(self, x, v) -> np.ndarray:
        basis = self.tangent_basis(x)
        return np.array([self.inner(x, b, v) for b in basis])


def _unit_or_resample(draw, norm_floor=1e-12):
    """Run a sampler until it produces a vector of usable norm (p=1 event)."""
    while True:
        v = draw()
        n = float(np.linalg.norm(v))
        if n > norm_floor:
            return v / n


@dataclass(frozen=True)
class Euclidean(Manifold):
    n: int

    def __post_init__(self):
        if self.n < 1:
            raise UsageError("Euclidean dimension must be positive")

    @property
    def dim(self) -> int:
        return self.n

    @property
    def injectivity_radius(self) -> float:
        return math.inf

    def check_point(self, x) -> np.ndarray:
        v = np.asarray(x, dtype=float)
        if v.shape != (self.n,):
            raise UsageError(f"expected point shape ({self.n},), got {v.shape}")
        if not np.all(np.isfinite(v)):
            raise UsageError("point entries must be finite")
        return v

    def check_tangent(self, x, v) -> np.ndarray:
        return self.check_point(v)

    def inner(self, x, u, v) -> float:
        return float(np.dot(u, v))

    def exp_map(self, x, v) -> np.ndarray:
        return np.asarray(x, dtype=float) + np.asarray(v, dtype=float)

    def project_to_tangent(self, x, v) -> np.ndarray:
        return np.asarray(v, dtype=float).copy()

    def tangent_basis(self, x) -> np.ndarray:
        return np.eye(self.n)

    def haar_unit_tangent(self, x, rng: RngStream) -> np.ndarray:
        return _unit_or_resample(lambda: rng.normals(self.n))

    def random_point(self, rng: RngStream) -> np.ndarray:
        return rng.normals(self.n)

    def zero_tangent(self, x) -> np.ndarray:
        return np.zeros(self.n)


@dataclass(frozen=True)
class Sphere(Manifold):
    """Unit sphere S^{n-1} embedded in R^n."""

    n: int

    def __post_init__(self):
        if self.n < 2:
            raise UsageError("Sphere requires ambient dimension >= 2")

    @property
    def dim(self) -> int:
        return self.n - 1

    @property
    def injectivity_radius(self) -> float:
        return math.pi

    def check_point(self, x) -> np.ndarray:
        v = np.asarray(x, dtype=float)
        if v.shape != (self.n,):
            raise UsageError(f"expected point shape ({self.n},), got {v.shape}")
        nrm = float(np.linalg.norm(v))
        if abs(nrm - 1.0) > tolerances.TANGENT:
            raise UsageError(f"point is off the unit sphere: |norm - 1| = {abs(nrm - 1):.3e}")
        return v

    def check_tangent(self, x, v) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        v = np.asarray(v, dtype=float)
        if v.shape != (self.n,):
            raise UsageError(f"expected tangent shape ({self.n},), got {v.shape}")
        nrm = max(float(np.linalg.norm(v)), 1e-300)
        if abs(float(np.dot(x, v))) > tolerances.TANGENT * nrm:
            raise UsageError("vector is not tangent to the sphere at x")
        return v

    def inner(self, x, u, v) -> float:
        return float(np.dot(u, v))

    def exp_map(self, x, v) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        v = np.asarray(v, dtype=float)
        nrm = float(np.linalg.norm(v))
        if nrm == 0.0:
            return x.copy()
        y = math.cos(nrm) * x + math.sin(nrm) * (v / nrm)
        return y / np.linalg.norm(y)

    def project_to_tangent(self, x, v) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        v = np.asarray(v, dtype=float)
        return v - float(np.dot(x, v)) * x

    def tangent_basis(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        w = x.copy()
        w[-1] -= 1.0
        wn = float(np.linalg.norm(w))
        if wn < 1e-12:
            return np.eye(self.n)[: self.n - 1]
        # Householder reflector sending e_n to x; its first n-1 columns span T_x.
        refl = np.eye(self.n) - 2.0 * np.outer(w, w) / (wn * wn)
        return refl[:, : self.n - 1].T

    def haar_unit_tangent(self, x, rng: RngStream) -> np.ndarray:
        x = np.asarray(x, dtype=float)

        def draw():
            g = rng.normals(self.n)
            return g - float(np.dot(x, g)) * x

        return _unit_or_resample(draw)

    def random_point(self, rng: RngStream) -> np.ndarray:
        return _unit_or_resample(lambda: rng.normals(self.n))

    def zero_tangent(self, x) -> np.ndarray:
        return np.zeros(self.n)


@dataclass(frozen=True)
class SpecialUnitary(Manifold):
    """SU(n) with the bi-invariant metric Re tr(O1^H O2) on the left-trivialized algebra."""

    n: int

    def __post_init__(self):
        if self.n < 2:
            raise UsageError("SpecialUnitary requires n >= 2")

    @property
    def dim(self) -> int:
        return self.n * self.n - 1

    @property
    def injectivity_radius(self) -> float:
        # Smallest geodesic loop scale under the bi-invariant metric; conservative.
        return math.pi

    def check_point(self, x) -> np.ndarray:
        m = linalg.check_unitary(x)
        if m.shape != (self.n, self.n):
            raise UsageError(f"expected point shape ({self.n}, {self.n}), got {m.shape}")
        det = complex(np.linalg.det(m))
        if abs(det - 1.0) > tolerances.UNITARY:
            raise UsageError(f"determinant is not 1: |det - 1| = {abs(det - 1):.3e}")
        return m

    def check_tangent(self, x, v) -> np.ndarray:
        m = linalg.check_skew_traceless(v, tol=tolerances.TANGENT)
        if m.shape != (self.n, self.n):
            raise UsageError(f"expected tangent shape ({self.n}, {self.n}), got {m.shape}")
        return m

    def inner(self, x, u, v) -> float:
        return float(np.real(np.sum(np.conj(u) * v)))

    def exp_map(self, x, v) -> np.ndarray:
        return linalg.exp_skew(v) @ np.asarray(x, dtype=complex)

    def project_to_tangent(self, x, v) -> np.ndarray:
        """Project an ambient matrix attached at x to the left-trivialized algebra."""
        x = np.asarray(x, dtype=complex)
        return linalg.skew_traceless_part(np.asarray(v, dtype=complex) @ x.conj().T)

    def tangent_basis(self, x) -> np.ndarray:
        return -1j * linalg.traceless_hermitian_basis(self.n)

    def haar_unit_tangent(self, x, rng: RngStream) -> np.ndarray:
        basis = linalg.traceless_hermitian_basis(self.n)

        def draw():
            h = np.tensordot(rng.normals(len(basis)), basis, axes=1)
            return -1j * h

        return _unit_or_resample(draw)

    def random_point(self, rng: RngStream, radius: float = math.pi / 2) -> np.ndarray:
        """exp of a random unit direction scaled to the given Frobenius radius."""
        omega = radius * self.haar_unit_tangent(np.eye(self.n, dtype=complex), rng)
        return linalg.exp_skew(omega)

    def zero_tangent(self, x) -> np.ndarray:
        return np.zeros((self.n, self.n), dtype=complex)

    def reproject_point(self, x) -> np.ndarray:
        """Pull a drifted point back onto SU(n) (polar factor, det renormalized)."""
        u = linalg.polar_unitary(x)
        det = complex(np.linalg.det(u))
        return u * (det ** (-1.0 / self.n))
