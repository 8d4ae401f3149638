import math

import numpy as np
import pytest

from mangrad import linalg
from mangrad.cost import GroundStateCost, QuadraticSaddle
from mangrad.designs import clifford_1q
from mangrad.errors import LawError, UsageError
from mangrad.manifold import Euclidean, SpecialUnitary, Sphere
from mangrad.rng import RngStream
from mangrad.sampler import (
    DesignConjugateLaw,
    DiscreteVectorFieldLaw,
    HaarSphereLaw,
    expectation_check,
    overlap_floor,
    project_gradient,
    projection_sphere_check,
    sample_direction,
)
from mangrad.stats import component_square_law, ks_statistic, sample_unit_components

from helpers import SphereQuadratic


def test_project_gradient_examples():
    c = QuadraticSaddle([1.0], [1.0])
    x = np.array([1.0, 0.0])  # grad = (2, 0)
    assert np.allclose(project_gradient(c, x, np.array([0.0, 1.0])), [0.0, 0.0])
    assert np.allclose(project_gradient(c, x, np.array([1.0, 0.0])), [2.0, 0.0])
    u = np.array([1.0, 1.0]) / math.sqrt(2.0)
    # <u, grad> = sqrt(2), g = sqrt(2) u = (1, 1)
    assert np.allclose(project_gradient(c, x, u), [1.0, 1.0])


def test_projection_identity_across_manifolds():
    rng = RngStream(61)
    cases = [
        QuadraticSaddle([1.0, 2.0], [0.5], ambient_n=4),
        SphereQuadratic(np.diag([2.0, -1.0, 0.5])),
        GroundStateCost.from_eigs([1.0, -1.0], [0.8, 0.2]),
    ]
    for cost in cases:
        m = cost.manifold
        for _ in range(300):
            x = m.random_point(rng)
            grad = cost.riemannian_grad(x)
            u = m.haar_unit_tangent(x, rng)
            g = m.inner(x, u, grad) * np.asarray(u)
            lhs = m.inner(x, grad, g)
            mid = m.inner(x, g, g)
            rhs = m.inner(x, u, grad) ** 2
            scale = max(abs(rhs), 1e-300)
            assert abs(lhs - rhs) <= 1e-12 * scale
            assert abs(mid - rhs) <= 1e-12 * scale


def test_projection_sphere_check():
    c = QuadraticSaddle([1.0, 2.0], [0.5], ambient_n=3)
    rng = RngStream(62)
    x = np.array([0.7, -0.2, 0.4])
    dev = projection_sphere_check(c, x, 500, rng)
    gnorm = np.linalg.norm(c.riemannian_grad(x))
    assert dev <= 1e-10 * gnorm
    with pytest.raises(UsageError):
        projection_sphere_check(c, np.zeros(3), 10, rng)


def test_expectation_check_haar():
    c = QuadraticSaddle([1.0], [1.0])  # grad at (1, 0) is (2, 0); N = 2
    rng = RngStream(63)
    report = expectation_check(c, np.array([1.0, 0.0]), 100_000, rng)
    assert report.within_3se
    # mean of g should approach grad / N = (1, 0)
    flat = GroundStateCost.from_eigs([1.0, -1.0], [0.5, 0.5])
    rng2 = RngStream(64)
    rep2 = expectation_check(flat, np.eye(2, dtype=complex), 1000, rng2)
    assert np.allclose(rep2.deviation, 0.0, atol=1e-14)  # grad = 0 exactly


def test_haar_projection_coefficient_follows_beta_law():
    rng = RngStream(65)
    for n in (2, 3, 10):
        comps = sample_unit_components(n, 100_000, rng)
        law = component_square_law(n)
        stat = ks_statistic(comps * comps, law.cdf)
        assert stat <= 0.02


def test_sample_direction_unit_norm():
    rng = RngStream(66)
    for m in (Euclidean(4), Sphere(3), SpecialUnitary(2)):
        law = HaarSphereLaw(m)
        x = m.random_point(rng)
        for _ in range(50):
            u = sample_direction(x, law, rng)
            assert abs(m.norm(x, u) - 1.0) <= 1e-12


def test_haar_sample_mean_is_centered():
    m = Euclidean(3)
    law = HaarSphereLaw(m)
    rng = RngStream(67)
    x = np.zeros(3)
    draws = np.array([law.sample(x, rng)[0] for _ in range(20_000)])
    se = draws.std(axis=0, ddof=1) / math.sqrt(len(draws))
    assert np.all(np.abs(draws.mean(axis=0)) <= 4.0 * se)


def test_discrete_law_single_field_deterministic():
    m = Euclidean(2)
    law = DiscreteVectorFieldLaw(m, [lambda x: np.array([3.0, 0.0])], np.array([1.0]))
    rng = RngStream(68)
    for _ in range(10):
        u, idx = law.sample(np.zeros(2), rng)
        assert idx == 0
        assert np.allclose(u, [1.0, 0.0])


def test_discrete_law_weight_validation():
    m = Euclidean(2)
    fields = [lambda x: np.array([1.0, 0.0]), lambda x: np.array([0.0, 1.0])]
    with pytest.raises(LawError):
        DiscreteVectorFieldLaw(m, fields, np.array([0.6, 0.6])).sample(np.zeros(2), RngStream(0))
    with pytest.raises(LawError):
        DiscreteVectorFieldLaw(m, fields, np.array([1.0, -0.0])).sample(np.zeros(2), RngStream(0))
    # tiny drift is renormalized silently
    law = DiscreteVectorFieldLaw(m, fields, np.array([0.5, 0.5 + 1e-10]))
    law.sample(np.zeros(2), RngStream(0))


def test_discrete_law_vanishing_field_errors():
    m = Euclidean(2)
    law = DiscreteVectorFieldLaw(m, [lambda x: np.zeros(2)], np.array([1.0]))
    with pytest.raises(LawError):
        law.sample(np.zeros(2), RngStream(0))


def test_discrete_law_span_check():
    m = Euclidean(2)
    axes = [lambda x: np.array([1.0, 0.0]), lambda x: np.array([0.0, 1.0])]
    law = DiscreteVectorFieldLaw(m, axes, np.array([0.5, 0.5]))
    # removing either axis leaves a single direction: span fails
    with pytest.raises(LawError):
        law.span_check([np.zeros(2)])
    three = axes + [lambda x: np.array([1.0, 1.0]) / math.sqrt(2.0)]
    rich = DiscreteVectorFieldLaw(m, three, np.full(3, 1.0 / 3.0))
    rich.span_check([np.zeros(2), np.array([1.0, 2.0])])


def test_design_conjugate_law_orbit_of_sigma_z():
    cliff = clifford_1q()
    m = SpecialUnitary(2)
    law = DesignConjugateLaw(m, cliff.elements, linalg.SIGMA_Z)
    # the Clifford orbit of sigma_z is {+-sigma_x, +-sigma_y, +-sigma_z};
    # up to sign that is three distinct lines
    dirs = law.directions
    assert len(dirs) == 24
    lines = set()
    for d in dirs:
        assert abs(np.linalg.norm(d) - 1.0) <= 1e-12
        candidates = []
        for cand in (d, -d):
            flat = cand.reshape(-1)
            candidates.append(tuple(np.round(np.concatenate([flat.real, flat.imag]), 8)))
        lines.add(min(candidates))
    assert len(lines) == 3
    rng = RngStream(69)
    ids = {law.sample(np.eye(2, dtype=complex), rng)[1] for _ in range(2000)}
    assert ids == set(range(24))


def test_design_conjugate_law_validation():
    cliff = clifford_1q()
    m = SpecialUnitary(2)
    with pytest.raises(UsageError):
        DesignConjugateLaw(m, cliff.elements, np.eye(2))  # not traceless
    with pytest.raises(UsageError):
        DesignConjugateLaw(m, cliff.elements, np.zeros((2, 2)))


def test_overlap_floor():
    m = Euclidean(2)
    axes = [lambda x: np.array([1.0, 0.0]), lambda x: np.array([0.0, 1.0])]
    law = DiscreteVectorFieldLaw(m, axes, np.array([0.5, 0.5]))
    assert overlap_floor(law, lambda x: np.zeros(2), [np.zeros(2)]) == 0.0
    # v collinear with the first axis: floor is |v|^2 against the unit direction
    v = np.array([2.0, 0.0])
    assert overlap_floor(law, lambda x: v, [np.zeros(2)]) == pytest.approx(4.0)

    cliff = clifford_1q()
    su = SpecialUnitary(2)
    claw = DesignConjugateLaw(su, cliff.elements, linalg.SIGMA_Z)
    cost = GroundStateCost.from_eigs([1.0, -1.0], [0.9, 0.1])
    rng = RngStream(70)
    probes = [su.random_point(rng) for _ in range(20)]
    eps = overlap_floor(claw, cost.riemannian_grad, probes)
    assert eps > 0.0

    with pytest.raises(UsageError):
        overlap_floor(HaarSphereLaw(su), cost.riemannian_grad, probes)


def test_clifford_law_span_survives_removal():
    # the conjugate orbit of any traceless seed spans su(2) even after
    # dropping all directions collinear with any one element
    cliff = clifford_1q()
    m = SpecialUnitary(2)
    seed = linalg.SIGMA_Z + 0.5 * linalg.SIGMA_X
    law = DesignConjugateLaw(m, cliff.elements, seed)
    coeffs = np.array([m.coeffs_from_tangent(np.eye(2, dtype=complex), d) for d in law.directions])
    for j in range(len(coeffs)):
        cos = np.abs(coeffs @ coeffs[j])
        keep = coeffs[cos < 1.0 - 1e-9]
        assert np.linalg.matrix_rank(keep, tol=1e-9) == m.dim
