import math

import numpy as np
import pytest

from mangrad import linalg
from mangrad.cost import GroundStateCost
from mangrad.designs import clifford_1q
from mangrad.errors import UsageError
from mangrad.groundstate import (
    GroundStateProblem,
    projected_derivative,
    run_groundstate_ensemble,
    saddle_statistics,
)
from mangrad.rgd import RgdConfig
from mangrad.rng import RngStream
from mangrad.sampler import DesignConjugateLaw, HaarSphereLaw

I2 = np.eye(2, dtype=complex)


def _fd_slope(cost, u, h, sign, step=1e-6):
    def val(x):
        w = linalg.exp_skew(sign * 1j * x * h)
        return cost.value(w @ u)

    return (val(step) - val(-step)) / (2.0 * step)


def test_problem_validation():
    with pytest.raises(UsageError):
        GroundStateProblem(n_qubits=4, a_eigs=(1.0,) * 16, rho_eigs=(1.0 / 16,) * 16)
    with pytest.raises(UsageError):
        GroundStateProblem(n_qubits=1, a_eigs=(1.0, -1.0), rho_eigs=(0.9, 0.2))
    with pytest.raises(UsageError):
        GroundStateProblem(n_qubits=1, a_eigs=(1.0, -1.0), rho_eigs=(1.0,))
    with pytest.raises(UsageError):
        GroundStateProblem(n_qubits=1, a_eigs=(1.0, -1.0), rho_eigs=(1.0, 0.0), x0_policy="zeros")


def test_projected_derivative_requires_unit_direction():
    cost = GroundStateCost.from_eigs([1.0, -1.0], [1.0, 0.0])
    with pytest.raises(UsageError):
        projected_derivative(cost, I2, linalg.SIGMA_X)  # Frobenius norm sqrt(2)


def test_projected_derivative_commuting_direction_vanishes():
    cost = GroundStateCost.from_eigs([1.0, -1.0], [1.0, 0.0])
    h = linalg.SIGMA_Z / math.sqrt(2.0)
    assert projected_derivative(cost, I2, h) == pytest.approx(0.0, abs=1e-14)


def test_projected_derivative_sign_and_value():
    # the slope must match d/dx J(e^{+ixH} U) so that the measurement-driven
    # update U <- exp(-i eta D H) U decreases J
    rho = (np.eye(2) + linalg.SIGMA_X) / 2.0
    cost = GroundStateCost([1.0, -1.0], rho)
    h = linalg.SIGMA_Y / math.sqrt(2.0)
    d = projected_derivative(cost, I2, h)
    fd_plus = _fd_slope(cost, I2, h, sign=+1)
    assert d == pytest.approx(fd_plus, abs=1e-8)
    assert d == pytest.approx(-_fd_slope(cost, I2, h, sign=-1), abs=1e-8)
    # analytically: grad = i sigma_y, so D = Re tr((i sigma_y)^H i sigma_y)/sqrt(2)
    assert d == pytest.approx(2.0 / math.sqrt(2.0), abs=1e-12)


def test_projected_derivative_descent_update():
    rng = RngStream(101)
    cost = GroundStateCost.from_eigs([1.5, 0.2, -0.4, -2.0], [0.45, 0.3, 0.15, 0.1])
    m = cost.manifold
    basis = linalg.traceless_hermitian_basis(4)
    eta = 0.05
    for _ in range(25):
        u = m.random_point(rng)
        h = np.tensordot(rng.normals(len(basis)), basis, axes=1)
        h /= linalg.frobenius_norm(h)
        d = projected_derivative(cost, u, h)
        u_next = linalg.exp_skew(-1j * eta * d * h) @ u
        assert cost.value(u_next) <= cost.value(u) + 1e-12


def test_projected_derivative_is_real():
    rng = RngStream(102)
    cost = GroundStateCost.from_eigs([1.0, -1.0], [0.7, 0.3])
    m = cost.manifold
    for _ in range(20):
        u = m.random_point(rng)
        h = -1j * m.haar_unit_tangent(u, rng)
        d = projected_derivative(cost, u, h)
        assert isinstance(d, float)


def test_ensemble_smoke_one_qubit():
    problem = GroundStateProblem(n_qubits=1, a_eigs=(1.0, -1.0), rho_eigs=(1.0, 0.0))
    cost = problem.build_cost()
    law = HaarSphereLaw(cost.manifold)
    cfg = RgdConfig(max_iter=50_000, grad_tol=1.4e-7, seed=103)
    report, _ = run_groundstate_ensemble(problem, law, cfg, 20)
    assert report.summary.success_count == 20
    assert report.global_min == pytest.approx(-1.0)
    assert report.max_commutator_rel <= 1e-6
    assert report.max_distance_to_critical_value <= 1e-3
    assert report.summary.classification_counts.get("strict_saddle", 0) == 0


def test_ensemble_with_clifford_law():
    problem = GroundStateProblem(n_qubits=1, a_eigs=(1.0, -1.0), rho_eigs=(1.0, 0.0))
    cost = problem.build_cost()
    seed_h = linalg.SIGMA_Z + 0.5 * linalg.SIGMA_X
    law = DesignConjugateLaw(cost.manifold, clifford_1q().elements, seed_h)
    cfg = RgdConfig(max_iter=50_000, grad_tol=1.4e-7, seed=104)
    report, _ = run_groundstate_ensemble(problem, law, cfg, 10)
    assert report.summary.success_count == 10


def test_ensemble_flat_cost_converges_instantly():
    problem = GroundStateProblem(n_qubits=1, a_eigs=(1.0, -1.0), rho_eigs=(0.5, 0.5))
    cost = problem.build_cost()
    law = HaarSphereLaw(cost.manifold)
    cfg = RgdConfig(max_iter=100, grad_tol=1e-8, seed=105)
    report, _ = run_groundstate_ensemble(problem, law, cfg, 5)
    for row in report.summary.results:
        assert row.iterations == 0
        assert row.stop_reason == "grad_tol"


def test_rotated_state_problem_still_converges():
    problem = GroundStateProblem(
        n_qubits=1, a_eigs=(1.0, -1.0), rho_eigs=(0.8, 0.2), rho_rotation_seed=7
    )
    cost = problem.build_cost()
    assert cost.commutator_norm(I2) > 1e-3  # rotation made [A, rho] nonzero
    law = HaarSphereLaw(cost.manifold)
    cfg = RgdConfig(max_iter=50_000, grad_tol=1.4e-7, seed=106)
    report, _ = run_groundstate_ensemble(problem, law, cfg, 5)
    assert report.summary.success_count == 5


def test_saddle_statistics_requires_nondegenerate_spectra():
    problem = GroundStateProblem(n_qubits=1, a_eigs=(1.0, -1.0), rho_eigs=(0.5, 0.5))
    with pytest.raises(UsageError):
        saddle_statistics(problem, None, RgdConfig(), 2)


def test_saddle_statistics_counts():
    problem = GroundStateProblem(n_qubits=2, a_eigs=(3.0, 1.0, -1.0, -3.0), rho_eigs=(0.4, 0.3, 0.2, 0.1))
    cost = problem.build_cost()
    law = HaarSphereLaw(cost.manifold)
    cfg = RgdConfig(max_iter=60_000, grad_tol=4.4e-7, seed=107)
    report = saddle_statistics(problem, law, cfg, 6)
    assert report.saddle_endpoints == 0
    assert report.degenerate_starts == 0
    assert len(report.critical_values) > 1
    d = report.to_dict()
    assert d["n_realizations"] == 6


def test_saddle_statistics_degenerate_start():
    problem = GroundStateProblem(
        n_qubits=2,
        a_eigs=(3.0, 1.0, -1.0, -3.0),
        rho_eigs=(0.4, 0.3, 0.2, 0.1),
        x0_policy="identity",
    )
    cost = problem.build_cost()
    law = HaarSphereLaw(cost.manifold)
    report = saddle_statistics(problem, law, RgdConfig(max_iter=10, seed=108), 3)
    assert report.degenerate_starts == 3
    assert report.saddle_endpoints == 0
