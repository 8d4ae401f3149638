"""Experiment handlers: request model in, response model out.

Each handler assembles the deterministic output files (CSV tables and a
JSON summary) and a list of pass/fail checks. Validation failures raise
ConfigError; certificate or manifold violations surface as NumericError.
"""

from __future__ import annotations

import os

import numpy as np

from ..cost import QuadraticSaddle
from ..designs import (
    clifford_1q,
    default_seed_h,
    load_unitary_set,
    verify_design,
)
from ..errors import ConfigError, UsageError
from ..groundstate import GroundStateProblem, run_groundstate_ensemble
from ..manifold import Euclidean, SpecialUnitary
from ..rgd import CriticalKind, RgdConfig, ensemble_run
from ..rng import RngStream
from ..saddlelab import (
    AngleProcessParams,
    OuParams,
    combined_tau_approximation,
    ks_distance,
    linearized_ou_params,
    ou_hitting_lower_cdf,
    sde_angle_hitting_ensemble,
    simulate_angle_hitting_ensemble,
    simulate_ou_hitting_ensemble,
)
from ..sampler import DesignConjugateLaw, DiscreteVectorFieldLaw, HaarSphereLaw
from ..stats import ks_bound_check, moment_check, tail_bound_check
from ..tables import csv_table, json_text
from .models import (
    CheckItem,
    DesignVerifyRequest,
    OuHittingRequest,
    RgdRunRequest,
    RunResponse,
    SaddleHittingRequest,
    StatsCheckRequest,
)


def _resolve_threads(threads) -> int:
    if threads == "auto":
        return max(os.cpu_count() or 1, 1)
    if int(threads) < 1:
        raise ConfigError("threads must be positive or 'auto'")
    return int(threads)


def _matrix_from_pairs(entries) -> np.ndarray:
    try:
        return np.array([[complex(e[0], e[1]) for e in row] for row in entries])
    except (TypeError, IndexError) as exc:
        raise ConfigError(f"malformed matrix entries (expected [re, im] pairs): {exc}") from exc


def _load_set(set_name, set_file):
    if set_file is not None:
        try:
            return load_unitary_set(set_file)
        except OSError as exc:
            raise ConfigError(f"cannot read unitary set file {set_file!r}: {exc}") from exc
    if set_name == "clifford_1q":
        return clifford_1q()
    raise ConfigError(f"unknown built-in unitary set {set_name!r}")


def _build_law(req: RgdRunRequest, manifold):
    spec = req.law
    if spec.type == "haar":
        return HaarSphereLaw(manifold)
    if spec.type == "design_conjugates":
        if not isinstance(manifold, SpecialUnitary):
            raise ConfigError("design_conjugates laws require a ground_state cost")
        uset = _load_set(spec.set_name, spec.set_file)
        if uset.n != manifold.n:
            raise ConfigError(
                f"unitary set dimension {uset.n} does not match the problem dimension {manifold.n}"
            )
        seed_h = _matrix_from_pairs(spec.seed_h) if spec.seed_h is not None else default_seed_h(manifold.n)
        return DesignConjugateLaw(manifold, uset.elements, seed_h)
    if spec.type == "coordinate_axes":
        if not isinstance(manifold, Euclidean):
            raise ConfigError("coordinate_axes laws require a Euclidean cost")
        n = manifold.n
        fields = [(lambda x, _e=e: _e) for e in np.eye(n)]
        weights = np.asarray(spec.weights, dtype=float) if spec.weights else np.full(n, 1.0 / n)
        if len(weights) != n:
            raise ConfigError(f"coordinate_axes needs {n} weights")
        return DiscreteVectorFieldLaw(manifold, fields, weights)
    raise ConfigError(f"unknown law type {spec.type!r}")


def _rgd_config(req: RgdRunRequest) -> RgdConfig:
    return RgdConfig(
        eta_policy=req.eta.policy,
        eta=req.eta.value,
        max_iter=req.max_iter,
        grad_tol=req.grad_tol,
        f_tol=req.f_tol,
        window=req.window,
        seed=req.seed,
    )


def run_rgd(req: RgdRunRequest) -> RunResponse:
    threads = _resolve_threads(req.threads)
    config = _rgd_config(req)
    files: dict[str, str] = {}
    checks: list[CheckItem] = []

    if req.cost.type == "ground_state":
        problem = GroundStateProblem(
            n_qubits=req.cost.n_qubits,
            a_eigs=tuple(req.cost.a_eigs),
            rho_eigs=tuple(req.cost.rho_eigs),
            rho_rotation_seed=req.cost.rho_rotation_seed,
            x0_policy=req.x0_policy,
        )
        cost = problem.build_cost()
        law = _build_law(req, cost.manifold)
        report, records = run_groundstate_ensemble(
            problem, law, config, req.n_realizations, threads=threads, keep_trajectories=True
        )
        summary = report.to_dict()
        saddle_count = report.summary.classification_counts.get(CriticalKind.STRICT_SADDLE.value, 0)
        if req.checks.min_success_rate is not None:
            rate = report.summary.success_rate or 0.0
            checks.append(
                CheckItem(
                    name="min_success_rate",
                    passed=rate >= req.checks.min_success_rate,
                    detail=f"success_rate={rate!r}",
                )
            )
        if req.checks.max_saddle_endpoints is not None:
            checks.append(
                CheckItem(
                    name="max_saddle_endpoints",
                    passed=saddle_count <= req.checks.max_saddle_endpoints,
                    detail=f"saddle_endpoints={saddle_count}",
                )
            )
        if req.checks.max_commutator_rel is not None:
            worst = report.max_commutator_rel
            checks.append(
                CheckItem(
                    name="max_commutator_rel",
                    passed=worst <= req.checks.max_commutator_rel,
                    detail=f"max_commutator_rel={worst!r}",
                )
            )
        if req.checks.max_distance_to_critical_value is not None:
            worst = report.max_distance_to_critical_value
            checks.append(
                CheckItem(
                    name="max_distance_to_critical_value",
                    passed=worst <= req.checks.max_distance_to_critical_value,
                    detail=f"max_distance={worst!r}",
                )
            )
    else:
        cost = QuadraticSaddle(req.cost.a, req.cost.b, ambient_n=req.cost.ambient)
        law = _build_law(req, cost.manifold)
        x0 = np.asarray(req.x0_point, dtype=float)
        cost.manifold.check_point(x0)

        summary_obj, records = ensemble_run(
            cost,
            law,
            config,
            req.n_realizations,
            lambda k, rng: x0,
            classify=True,
            keep_trajectories=True,
            threads=threads,
        )
        summary = summary_obj.to_dict()
        if req.checks.max_saddle_endpoints is not None:
            saddle_count = summary_obj.classification_counts.get(CriticalKind.STRICT_SADDLE.value, 0)
            checks.append(
                CheckItem(
                    name="max_saddle_endpoints",
                    passed=saddle_count <= req.checks.max_saddle_endpoints,
                    detail=f"saddle_endpoints={saddle_count}",
                )
            )

    if req.store_trajectories:
        for k, rec in enumerate(records):
            files[f"traj_{k:03d}.csv"] = csv_table(
                ["iter", "f", "grad_norm", "proj", "cert_residual"], rec.rows()
            )
    files["summary.json"] = json_text(summary)
    return RunResponse(command="rgd-run", files=files, checks=checks, summary=summary)


def run_saddle_hitting(req: SaddleHittingRequest) -> RunResponse:
    n_steps = int(round(req.t_max / req.eta))
    params = AngleProcessParams(a=req.a, b=req.b, eta=req.eta, phi0=req.phi0, n_steps=n_steps)
    discrete = simulate_angle_hitting_ensemble(params, req.n_realizations, req.seed, stream_id=0)
    sde = sde_angle_hitting_ensemble(
        params,
        req.dt,
        req.t_max,
        req.n_realizations,
        req.seed,
        variance_matched=req.variance_matched,
        stream_id=1,
    )
    ou = linearized_ou_params(
        params, c=req.analytic_c, dt=req.dt, t_max=4.0 * req.t_max, variance_matched=req.variance_matched
    )
    analytic = combined_tau_approximation(req.analytic_c, ou, rate=req.a + req.b)

    grid = np.arange(0.0, req.t_max + req.grid_step / 2.0, req.grid_step)
    summary: dict = {
        "a": req.a,
        "b": req.b,
        "eta": req.eta,
        "phi0": req.phi0,
        "n_steps": n_steps,
        "dt": req.dt,
        "n_realizations": req.n_realizations,
        "analytic_c": req.analytic_c,
        "variance_matched": req.variance_matched,
        "censored_fraction_discrete": discrete.censored_fraction,
        "censored_fraction_sde": sde.censored_fraction,
    }
    checks: list[CheckItem] = []
    files: dict[str, str] = {}

    files["hitting_discrete.csv"] = csv_table(
        ["realization", "tau", "censored"],
        zip(range(req.n_realizations), discrete.times, discrete.censored),
    )
    files["hitting_sde.csv"] = csv_table(
        ["realization", "tau", "censored"],
        zip(range(req.n_realizations), sde.times, sde.censored),
    )
    files["analytic_cdf.csv"] = csv_table(
        ["t", "F_analytic"], zip(grid, (analytic(t) for t in grid))
    )

    if discrete.censored_fraction == 1.0 or sde.censored_fraction == 1.0:
        summary["warning"] = "empty ECDF: every realization was censored at the horizon"
        summary["ks"] = None
        files["ecdf_grid.csv"] = csv_table(["t", "F_discrete", "F_sde"], [])
    else:
        e_disc = discrete.ecdf()
        e_sde = sde.ecdf()
        ks_ds = ks_distance(e_disc, e_sde)
        ks_da = ks_distance(analytic, e_disc)
        ks_sa = ks_distance(analytic, e_sde)
        summary["ks"] = {
            "discrete_vs_sde": ks_ds,
            "discrete_vs_analytic": ks_da,
            "sde_vs_analytic": ks_sa,
        }
        files["ecdf_grid.csv"] = csv_table(
            ["t", "F_discrete", "F_sde"], zip(grid, e_disc(grid), e_sde(grid))
        )
        checks.append(
            CheckItem(
                name="ks_discrete_vs_sde",
                passed=ks_ds <= req.ks_tol,
                detail=f"ks={ks_ds!r} tol={req.ks_tol!r}",
            )
        )
        checks.append(
            CheckItem(
                name="ks_discrete_vs_analytic",
                passed=ks_da <= req.ks_tol,
                detail=f"ks={ks_da!r} tol={req.ks_tol!r}",
            )
        )
    files["summary.json"] = json_text(summary)
    return RunResponse(command="saddle-hitting", files=files, checks=checks, summary=summary)


def run_ou_hitting(req: OuHittingRequest) -> RunResponse:
    params = OuParams(kappa=req.kappa, sigma=req.sigma, c=req.c, dt=req.dt, t_max=req.t_max)
    ens = simulate_ou_hitting_ensemble(params, req.n_realizations, req.seed)
    grid = np.arange(req.grid_start, req.grid_stop + req.grid_step / 2.0, req.grid_step)

    hit = (~ens.censored)[None, :] & (ens.times[None, :] <= grid[:, None])
    frac = hit.mean(axis=1)
    bound = np.array([ou_hitting_lower_cdf(float(t), params) for t in grid])
    se = np.sqrt(np.maximum(frac * (1.0 - frac), 0.0) / req.n_realizations)
    dominated = frac >= bound - 3.0 * se
    looseness = float(np.max(frac - bound))

    summary = {
        "kappa": req.kappa,
        "sigma": req.sigma,
        "c": req.c,
        "dt": req.dt,
        "t_max": req.t_max,
        "n_realizations": req.n_realizations,
        "censored_fraction": ens.censored_fraction,
        "dominance_holds": bool(np.all(dominated)),
        "looseness": looseness,
    }
    files = {
        "hitting.csv": csv_table(
            ["realization", "tau", "censored"],
            zip(range(req.n_realizations), ens.times, ens.censored),
        ),
        "curve.csv": csv_table(
            ["t", "ecdf", "lower_bound"], zip(grid, frac, bound)
        ),
        "summary.json": json_text(summary),
    }
    checks = [
        CheckItem(
            name="ou_dominance",
            passed=bool(np.all(dominated)),
            detail=f"min(ecdf - bound + 3se) = {float(np.min(frac - bound + 3.0 * se))!r}",
        )
    ]
    return RunResponse(command="ou-hitting", files=files, checks=checks, summary=summary)


def run_design_verify(req: DesignVerifyRequest) -> RunResponse:
    uset = _load_set(req.set_name, req.set_file)
    seed_h = _matrix_from_pairs(req.seed_h) if req.seed_h is not None else None
    try:
        report = verify_design(uset, t=req.t, seed_h=seed_h)
    except UsageError as exc:
        raise ConfigError(str(exc)) from exc
    summary = report.to_dict()
    files = {"report.json": json_text(summary)}
    checks = [
        CheckItem(
            name="design_passes",
            passed=report.passes,
            detail=f"moment_deviation={report.moment_deviation!r} commutant_dim={report.commutant_dim}",
        )
    ]
    return RunResponse(command="design-verify", files=files, checks=checks, summary=summary)


def run_stats_check(req: StatsCheckRequest) -> RunResponse:
    results = []
    stream = 0
    for n in req.moment_dims:
        rng = RngStream(req.seed, stream_id=stream)
        stream += 1
        try:
            results.extend(moment_check(n, req.samples, rng))
        except UsageError as exc:
            raise ConfigError(str(exc)) from exc
    for n in req.ks_dims:
        rng = RngStream(req.seed, stream_id=stream)
        stream += 1
        try:
            results.extend(ks_bound_check(n, req.samples, rng))
        except UsageError as exc:
            raise ConfigError(str(exc)) from exc
    for spec in req.tail:
        rng = RngStream(req.seed, stream_id=stream)
        stream += 1
        try:
            results.append(tail_bound_check(spec.n, spec.k, req.samples, rng))
        except UsageError as exc:
            raise ConfigError(str(exc)) from exc

    summary = {"samples": req.samples, "checks": [r.to_dict() for r in results]}
    files = {"report.json": json_text(summary)}
    checks = [
        CheckItem(name=r.name, passed=r.passed, detail=f"statistic={r.statistic!r} bound={r.bound!r}")
        for r in results
    ]
    return RunResponse(command="stats-check", files=files, checks=checks, summary=summary)
