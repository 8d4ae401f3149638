"""Shared test fixtures: a quadratic cost on the sphere and small utilities."""

import numpy as np

from mangrad.cost import CostFunction
from mangrad.manifold import Sphere


class SphereQuadratic(CostFunction):
    """f(x) = x^T M x restricted to the unit sphere (M symmetric)."""

    def __init__(self, m):
        m = np.asarray(m, dtype=float)
        self.m = (m + m.T) / 2.0
        self.manifold = Sphere(m.shape[0])

    def value(self, x):
        x = np.asarray(x, dtype=float)
        return float(x @ self.m @ x)

    def riemannian_grad(self, x):
        x = np.asarray(x, dtype=float)
        g = 2.0 * (self.m @ x)
        return g - float(x @ g) * x

    def smoothness_ell(self):
        # Generous bound; only step-size caps rely on it.
        return 8.0 * float(np.max(np.abs(np.linalg.eigvalsh(self.m))))


def random_hermitian(rng, n, traceless=False):
    g = rng.normals(2 * n * n)
    re = g[: n * n].reshape(n, n)
    im = g[n * n :].reshape(n, n)
    h = (re + 1j * im + (re + 1j * im).conj().T) / 2.0
    if traceless:
        h = h - (np.trace(h) / n) * np.eye(n)
    return h


def random_skew_traceless(rng, n):
    return -1j * random_hermitian(rng, n, traceless=True)
