"""Cost functions: the quadratic saddle model and the ground-state cost.

Both expose value, Riemannian gradient, a smoothness constant, and (where
critical points are understood analytically) the Hessian quadratic form.
The ground-state cost J(U) = tr(A U rho U^H) stores A pre-diagonalized with
non-increasing eigenvalues, so permutation matrices enumerate its critical
values.
"""

from __future__ import annotations

import itertools
import math
from abc import ABC, abstractmethod

import numpy as np

from . import linalg, tolerances
from .errors import CapabilityError, UndefinedAngleError, UsageError
from .manifold import Euclidean, Manifold, SpecialUnitary


class CostFunction(ABC):
    """Smooth cost on a manifold with a known gradient-Lipschitz constant."""

    manifold: Manifold

    @abstractmethod
    def value(self, x) -> float: ...

    @abstractmethod
    def riemannian_grad(self, x): ...

    @abstractmethod
    def smoothness_ell(self) -> float: ...

    def hessian_form(self, x, direction) -> float:
        """Quadratic form of the Hessian at a critical point, when analytic."""
        raise NotImplementedError("no analytic Hessian for this cost")

    def critical_values(self):
        """Known critical values, for saddle-crossing diagnostics; None if unknown."""
        return None


def fd_directional_derivative(cost: CostFunction, x, v, h: float = 1e-6) -> float:
    """Central difference of t -> f(exp_x(t v)) at t = 0."""
    m = cost.manifold
    return (cost.value(m.exp_map(x, h * np.asarray(v))) - cost.value(m.exp_map(x, -h * np.asarray(v)))) / (
        2.0 * h
    )


def fd_second_derivative(cost: CostFunction, x, v, h: float = 1e-3) -> float:
    """Central second difference of t -> f(exp_x(t v)) at t = 0."""
    m = cost.manifold
    f0 = cost.value(x)
    fp = cost.value(m.exp_map(x, h * np.asarray(v)))
    fm = cost.value(m.exp_map(x, -h * np.asarray(v)))
    return (fp - 2.0 * f0 + fm) / (h * h)


class QuadraticSaddle(CostFunction):
    """f(x, y, z) = sum a_i x_i^2 - sum b_j y_j^2 on R^n.

    ``b`` may be empty, which degenerates the saddle into a quadratic bowl.
    The gradient is 2-max(a, b)-Lipschitz exactly.
    """

    def __init__(self, a, b=(), ambient_n: int | None = None):
        self.a = np.atleast_1d(np.asarray(a, dtype=float))
        self.b = np.atleast_1d(np.asarray(b, dtype=float)) if len(np.atleast_1d(b)) else np.zeros(0)
        if len(self.a) < 1:
            raise UsageError("quadratic saddle needs at least one positive block")
        if np.any(self.a <= 0.0) or np.any(self.b <= 0.0):
            raise UsageError("quadratic saddle coefficients must be positive")
        self.p = len(self.a)
        self.q = len(self.b)
        n = ambient_n if ambient_n is not None else self.p + self.q
        if n < self.p + self.q:
            raise UsageError("ambient dimension smaller than the coefficient blocks")
        self.manifold = Euclidean(n)

    def value(self, x) -> float:
        x = np.asarray(x, dtype=float)
        xa = x[: self.p]
        xb = x[self.p : self.p + self.q]
        return float(self.a @ (xa * xa) - (self.b @ (xb * xb) if self.q else 0.0))

    def riemannian_grad(self, x):
        x = np.asarray(x, dtype=float)
        g = np.zeros_like(x)
        g[: self.p] = 2.0 * self.a * x[: self.p]
        if self.q:
            g[self.p : self.p + self.q] = -2.0 * self.b * x[self.p : self.p + self.q]
        return g

    def smoothness_ell(self) -> float:
        coeffs = np.concatenate([self.a, self.b]) if self.q else self.a
        return 2.0 * float(coeffs.max())

    def hessian_form(self, x, direction) -> float:
        d = np.asarray(direction, dtype=float)
        da = d[: self.p]
        db = d[self.p : self.p + self.q]
        return float(2.0 * self.a @ (da * da) - (2.0 * self.b @ (db * db) if self.q else 0.0))

    def critical_values(self):
        return (0.0,)


def saddle_angle(cost: QuadraticSaddle, x) -> float:
    """Angle theta = arctan(sum b y^2 / sum a x^2) in [0, pi/2].

    Undefined (raises) when both blocks vanish, matching the model where the
    origin carries no angle.
    """
    x = np.asarray(x, dtype=float)
    xa = x[: cost.p]
    xb = x[cost.p : cost.p + cost.q]
    sa = float(cost.a @ (xa * xa))
    sb = float(cost.b @ (xb * xb)) if cost.q else 0.0
    if sa == 0.0 and sb == 0.0:
        raise UndefinedAngleError("saddle angle is undefined when both blocks vanish")
    return math.atan2(sb, sa)


class GroundStateCost(CostFunction):
    """J(U) = tr(A U rho U^H) on SU(n) with A diagonal, eigenvalues non-increasing."""

    def __init__(self, a_eigs, rho):
        self.a_eigs = np.asarray(a_eigs, dtype=float)
        n = len(self.a_eigs)
        if n < 2:
            raise UsageError("ground-state cost requires dimension >= 2")
        if np.any(np.diff(self.a_eigs) > 1e-12):
            raise UsageError("A eigenvalues must be non-increasing")
        self.rho = linalg.check_hermitian(rho, tol=1e-10)
        if self.rho.shape != (n, n):
            raise UsageError("A and rho dimensions differ")
        tr = complex(np.trace(self.rho))
        if abs(tr - 1.0) > 1e-10:
            raise UsageError(f"rho must have unit trace, got {tr}")
        w, _ = linalg.hermitian_eig(self.rho)
        if w[0] < -1e-10:
            raise UsageError(f"rho must be positive semidefinite, smallest eigenvalue {w[0]:.3e}")
        self.rho_eigs = w[::-1].copy()  # non-increasing
        self.manifold = SpecialUnitary(n)
        self._norm_a = float(np.linalg.norm(self.a_eigs))
        self._norm_rho = linalg.frobenius_norm(self.rho)

    @classmethod
    def from_eigs(cls, a_eigs, rho_eigs, rotation=None) -> "GroundStateCost":
        """Build from eigenvalue lists; rho optionally conjugated by a unitary."""
        rho_eigs = np.asarray(rho_eigs, dtype=float)
        rho = np.diag(rho_eigs).astype(complex)
        if rotation is not None:
            r = linalg.check_unitary(rotation)
            rho = r @ rho @ r.conj().T
        a = np.sort(np.asarray(a_eigs, dtype=float))[::-1]
        return cls(a, rho)

    @classmethod
    def from_matrix(cls, a_matrix, rho) -> tuple["GroundStateCost", np.ndarray]:
        """Diagonalize a Hermitian A; returns the cost and the eigenbasis V.

        J is unchanged under the substitution U -> V^H U, so minimizers of the
        returned (diagonal-A) cost map back through a left factor of V.
        """
        a_matrix = linalg.check_hermitian(a_matrix)
        w, v = linalg.hermitian_eig(a_matrix)
        order = np.argsort(w, kind="stable")[::-1]
        return cls(w[order], rho), v[:, order]

    def value(self, u) -> float:
        u = np.asarray(u, dtype=complex)
        w = u @ self.rho @ u.conj().T
        return float(np.real(self.a_eigs @ np.diag(w)))

    def conjugated_state(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=complex)
        return u @ self.rho @ u.conj().T

    def riemannian_grad(self, u):
        """Left-trivialized gradient [A, U rho U^H]; skew-Hermitian traceless."""
        w = self.conjugated_state(u)
        return self.a_eigs[:, None] * w - w * self.a_eigs[None, :]

    def commutator_norm(self, u) -> float:
        return float(np.linalg.norm(self.riemannian_grad(u)))

    def smoothness_ell(self) -> float:
        # Conservative bound on |d^2/dt^2 J(exp(t Omega) U)| for unit-Frobenius Omega.
        return 4.0 * self._norm_a * self._norm_rho

    def curve_second_derivative(self, u, direction) -> float:
        """d^2/dt^2 J(exp(-i t H) U) at t = 0 for Hermitian H, any U.

        Equals -tr(A [H, [H, W]]) with W = U rho U^H; at critical points this
        is the intrinsic Hessian quadratic form.
        """
        h = np.asarray(direction, dtype=complex)
        w = self.conjugated_state(u)
        c1 = h @ w - w @ h
        c2 = h @ c1 - c1 @ h
        return float(-np.real(self.a_eigs @ np.diag(c2)))

    def hessian_form(self, u, direction) -> float:
        """Hessian quadratic form at a critical point, along a Hermitian direction.

        Refuses non-critical base points, reporting the commutator norm.
        """
        h = linalg.check_hermitian(direction, tol=1e-10)
        w = self.conjugated_state(u)
        comm = float(np.linalg.norm(self.a_eigs[:, None] * w - w * self.a_eigs[None, :]))
        tol = tolerances.CRITICAL_COMMUTATOR_REL * max(self._norm_a, 1e-300)
        if comm > tol:
            raise UsageError(
                f"hessian_form requires a critical point: ||[A, W]||_F = {comm:.3e} > {tol:.3e}"
            )
        return self.curve_second_derivative(u, h)

    def global_min_value(self) -> float:
        """Brute-force minimum over permutation pairings of the two spectra."""
        return min(self.permutation_values())

    def permutation_values(self) -> list[float]:
        """All critical values sum_i a_i rho_{pi(i)} over permutations pi."""
        n = len(self.a_eigs)
        if n > 8:
            raise CapabilityError("permutation enumeration is capped at dimension 8")
        return [float(self.a_eigs @ np.asarray(perm)) for perm in itertools.permutations(self.rho_eigs)]

    def critical_values(self):
        vals = sorted(set(round(v, 12) for v in self.permutation_values()))
        return tuple(vals)
