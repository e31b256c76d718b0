"""Numeric verification suites for the solver's theory guarantees.

Each check returns a small report object with counts and worst excesses, so
the CLI can emit machine-readable pass/fail results and the test suite can
assert on the same code paths.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bregman import BregmanGeometry, bregman_distance, diameters, mirror_step
from .core import BoxSet, OracleCounter, MaxRepresentation, SmoothPiece, box_diameter
from .interp import approx_subgradient
from .problems import load_problem
from .sampling import SamplingStrategy, build_poised_sample
from .solver import (
    RunResult,
    SolverConfig,
    build_geometry,
    compute_bound_report,
    harmonic_window_sweep,
    run,
)


@dataclass(frozen=True)
class CheckReport:
    name: str
    checked: int
    violations: int
    worst: float  # most positive violation margin seen (<= 0 means clean)

    @property
    def ok(self) -> bool:
        return self.violations == 0


# ---------------------------------------------------------------------------
# Strong convexity equivalences.


def _random_box_points(box: BoxSet, rng: np.random.Generator, n: int) -> np.ndarray:
    return rng.uniform(box.lower, box.upper, size=(n, box.dimension))


def check_strong_convexity(
    pairs: int = 1000, tol: float = 1e-10, seed: int = 20240901
) -> list[CheckReport]:
    """All three strong-convexity characterizations, plus the raw distance
    lower bound with no slack, on random pairs for both geometries."""
    setups = [
        ("euclidean", BoxSet([-1.0, -2.0], [2.0, 1.0])),
        ("entropy", BoxSet([0.1, 0.1], [1.0, 1.0])),
    ]
    reports = []
    rng = np.random.default_rng(seed)
    for kind, box in setups:
        geom = BregmanGeometry.for_box(kind, box, 1e-3)
        alpha = geom.alpha
        xs = _random_box_points(box, rng, pairs)
        ys = _random_box_points(box, rng, pairs)
        ts = rng.uniform(0.01, 0.99, size=pairs)
        viol = {"midpoint": 0, "distance": 0, "monotone": 0, "distance_raw": 0}
        worst = {name: -math.inf for name in viol}
        for x, y, t in zip(xs, ys, ts):
            # same inner-product expression the distance uses, so the euclidean
            # equality case stays bit-exact under the raw (no-slack) check
            d = x - y
            gap2 = float(d @ d)
            z = t * x + (1.0 - t) * y
            excess = geom.omega(z) - (
                t * geom.omega(x)
                + (1.0 - t) * geom.omega(y)
                - 0.5 * alpha * t * (1.0 - t) * gap2
            )
            worst["midpoint"] = max(worst["midpoint"], excess)
            if excess > tol:
                viol["midpoint"] += 1
            d = bregman_distance(geom, x, y)
            shortfall = 0.5 * alpha * gap2 - d
            worst["distance"] = max(worst["distance"], shortfall)
            worst["distance_raw"] = worst["distance"]
            if shortfall > tol:
                viol["distance"] += 1
            if shortfall > 0.0:
                viol["distance_raw"] += 1
            inner = float((geom.grad_omega(x) - geom.grad_omega(y)) @ (x - y))
            shortfall = alpha * gap2 - inner
            worst["monotone"] = max(worst["monotone"], shortfall)
            if shortfall > tol:
                viol["monotone"] += 1
        for cond in viol:
            reports.append(CheckReport(f"{kind}:{cond}", pairs, viol[cond],
                                       worst[cond]))
    return reports


# ---------------------------------------------------------------------------
# Mirror-step against grid brute force.


def _omega_values_1d(geom: BregmanGeometry, grid: np.ndarray) -> np.ndarray:
    if geom.kind == "euclidean":
        return 0.5 * grid**2
    s = grid + geom.domain_shift
    return s * np.log(s)


def _grad_omega_1d(geom: BregmanGeometry, v: float) -> float:
    if geom.kind == "euclidean":
        return v
    return 1.0 + math.log(v + geom.domain_shift)


def check_mirror_step_grid(
    instances: int = 200, grid_points: int = 2001, seed: int = 20240902
) -> CheckReport:
    """Compare the closed-form mirror step with brute-force minimization of
    its objective over a dense grid; agreement within one grid cell."""
    rng = np.random.default_rng(seed)
    violations = 0
    worst = -math.inf
    for idx in range(instances):
        dim = 1 + idx % 2
        kind = "euclidean" if (idx // 2) % 2 == 0 else "entropy"
        if kind == "entropy":
            lower = rng.uniform(0.05, 1.0, dim)
            upper = lower + rng.uniform(0.5, 3.0, dim)
        else:
            lower = rng.uniform(-3.0, 1.0, dim)
            upper = lower + rng.uniform(0.5, 4.0, dim)
        box = BoxSet(lower, upper)
        geom = BregmanGeometry.for_box(kind, box, 1e-3)
        x = rng.uniform(lower, upper)
        scale = rng.uniform(0.05, 2.0) * float(np.max(upper - lower))
        s = rng.standard_normal(dim) * scale
        z = mirror_step(geom, box, x, s)
        grids = [np.linspace(lower[i], upper[i], grid_points) for i in range(dim)]
        axis_vals = [
            (s[i] - _grad_omega_1d(geom, x[i])) * grids[i]
            + _omega_values_1d(geom, grids[i])
            for i in range(dim)
        ]
        if dim == 1:
            best = (int(np.argmin(axis_vals[0])),)
        else:
            table = axis_vals[0][:, None] + axis_vals[1][None, :]
            best = np.unravel_index(int(np.argmin(table)), table.shape)
        for i in range(dim):
            spacing = (upper[i] - lower[i]) / (grid_points - 1)
            excess = abs(z[i] - grids[i][best[i]]) - spacing
            worst = max(worst, excess)
            if excess > 1e-12:
                violations += 1
    return CheckReport("mirror_step_grid", instances, violations, worst)


# ---------------------------------------------------------------------------
# Interpolated-subgradient error bound on random quadratics.


def check_interpolation_error_bound(
    cases: int = 1000,
    deltas: tuple[float, ...] = (1e-1, 1e-2, 1e-3),
    slack: float = 1e-9,
    seed: int = 20240903,
) -> CheckReport:
    """||V - true gradient|| <= K (1 + sqrt(m) inv_norm / 2) Delta on random
    quadratic pieces of dimension 2..6 with Hessian norm up to 20."""
    rng = np.random.default_rng(seed)
    strategies = (
        SamplingStrategy("coordinate"),
        SamplingStrategy("rotated_coordinate", seed=1),
        SamplingStrategy("random_ball", seed=2),
    )
    checked = 0
    violations = 0
    worst = -math.inf
    for idx in range(cases):
        m = int(rng.integers(2, 7))
        raw = rng.standard_normal((m, m))
        sym = 0.5 * (raw + raw.T)
        target = rng.uniform(0.5, 20.0)
        sym *= target / np.max(np.abs(np.linalg.eigvalsh(sym)))
        k_bound = float(np.max(np.abs(np.linalg.eigvalsh(sym))))
        b = rng.standard_normal(m)
        center = rng.uniform(-2.0, 2.0, m)

        def quad(x, H=sym, b=b):
            return 0.5 * float(x @ H @ x) + float(b @ x)

        rep = MaxRepresentation((SmoothPiece(quad, hessian_bound=k_bound),))
        strategy = SamplingStrategy(
            strategies[idx % 3].kind, seed=int(rng.integers(2**31)), max_resamples=50
        )
        truth = sym @ center + b
        for delta in deltas:
            sample = build_poised_sample(center, delta, 10.0, strategy)
            sub = approx_subgradient(rep, sample, OracleCounter())
            bound = (
                k_bound
                * (1.0 + math.sqrt(m) * sample.inv_norm / 2.0)
                * sample.radius
            )
            err = float(np.linalg.norm(sub.vector - truth))
            checked += 1
            worst = max(worst, err - bound)
            if err > bound + slack:
                violations += 1
    return CheckReport("interpolation_error_bound", checked, violations, worst)


# ---------------------------------------------------------------------------
# Regret-style step inequality along recorded runs.


def check_regret_bound(
    result: RunResult,
    geom: BregmanGeometry,
    box: BoxSet,
    random_points: int = 20,
    slack: float = 1e-6,
    seed: int = 20240904,
) -> CheckReport:
    """sum_{k=i}^{j} t_k <E_k, x_k - u>  <=  theta + sum t_k^2 ||E_k||^2 / (2 alpha)
    for every record pair i < j and u over box corners plus random points."""
    history = [r for r in result.history if r.E_norm > 0.0]
    n = len(history)
    if n < 2:
        return CheckReport("regret_bound", 0, 0, -math.inf)
    theta = diameters(geom, box).theta
    alpha = geom.alpha
    ts = np.array([r.t for r in history])
    es = np.array([r.E for r in history])
    xs = np.array([r.x for r in history])
    q = np.concatenate([[0.0], np.cumsum(ts**2 * np.sum(es**2, axis=1))])
    rng = np.random.default_rng(seed)
    us = box.corners() + list(_random_box_points(box, rng, random_points))
    # index pairs i < j over records; lhs/rhs use prefix sums over k = i..j
    j_idx, i_idx = np.tril_indices(n, k=-1)
    rhs = theta + (q[j_idx + 1] - q[i_idx]) / (2.0 * alpha)
    checked = 0
    violations = 0
    worst = -math.inf
    for u in us:
        a = ts * np.sum(es * (xs - u[None, :]), axis=1)
        p = np.concatenate([[0.0], np.cumsum(a)])
        margin = (p[j_idx + 1] - p[i_idx]) - rhs
        checked += margin.size
        violations += int(np.sum(margin > slack))
        worst = max(worst, float(np.max(margin)))
    return CheckReport("regret_bound", checked, violations, worst)


def check_regret_bound_on_problems(
    names=("tp1", "tp2", "tp3"),
    geometries=("euclidean", "entropy"),
    iterations: int = 200,
) -> list[CheckReport]:
    reports = []
    for name in names:
        for kind in geometries:
            problem = load_problem(name).spec
            config = SolverConfig(max_iterations=iterations, geometry=kind)
            result = run(problem, config)
            geom = build_geometry(config, problem.box)
            rep = check_regret_bound(result, geom, problem.box)
            reports.append(CheckReport(f"regret:{name}:{kind}", rep.checked,
                                       rep.violations, rep.worst))
    return reports


# ---------------------------------------------------------------------------
# Convergence-constant audit and harmonic sums.


def check_bound_reports(
    names=("tp1", "tp2", "tp3"),
    geometries=("euclidean", "entropy"),
    iterations: int = 200,
) -> list[CheckReport]:
    reports = []
    for name in names:
        for kind in geometries:
            problem = load_problem(name).spec
            config = SolverConfig(max_iterations=iterations, geometry=kind)
            result = run(problem, config)
            geom = build_geometry(config, problem.box)
            audit = compute_bound_report(result, problem, config, geom, problem.box)
            bad = [p for p in audit.per_n if not p.satisfied]
            worst = max((p.lhs - p.rhs for p in audit.per_n), default=-math.inf)
            reports.append(CheckReport(f"bound:{name}:{kind}", len(audit.per_n),
                                       len(bad), worst))
    return reports


def check_harmonic_window(n_max: int = 100_000) -> CheckReport:
    ok, first_failure = harmonic_window_sweep(n_max)
    return CheckReport("harmonic_window", n_max - 3, 0 if ok else 1,
                       float(first_failure or -math.inf))


# ---------------------------------------------------------------------------
# Benchmark matrix shared by the CLI suite command and the acceptance tests.


@dataclass(frozen=True)
class SuiteRow:
    problem: str
    geometry: str
    final_f: float | None
    f_evals: int
    g_evals: int
    reference_f: float | None
    gap_to_optimum: float | None
    termination: str


def benchmark_suite(
    names=("tp1", "tp2", "tp3"),
    geometries=("euclidean", "entropy"),
    eps: float = 1e-3,
    budget: int = 200,
    seed: int = 0,
) -> list[SuiteRow]:
    rows = []
    for name in names:
        for kind in geometries:
            named = load_problem(name)
            config = SolverConfig(
                eps=eps,
                f_eval_budget=budget,
                max_iterations=10_000,
                geometry=kind,
                strategy=SamplingStrategy(seed=seed),
            )
            result = run(named.spec, config)
            ref = None
            if named.reference_values and kind in named.reference_values:
                ref = named.reference_values[kind].f
            final_f = None if result.best is None else result.best.f
            gap = None
            if final_f is not None and named.spec.known_optimum is not None:
                gap = final_f - named.spec.known_optimum
            rows.append(SuiteRow(
                problem=name,
                geometry=kind,
                final_f=final_f,
                f_evals=result.counters.f_calls,
                g_evals=result.counters.g_calls,
                reference_f=ref,
                gap_to_optimum=gap,
                termination=result.termination,
            ))
    return rows
