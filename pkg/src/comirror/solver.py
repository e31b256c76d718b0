"""Derivative-free comirror iteration loop and its theory diagnostics.

Each iteration samples a poised tuple at the current iterate, picks the
objective or constraint branch by eps-feasibility, takes a mirror step with
the sqrt(theta*alpha) / (||E|| sqrt(k)) step size, and records everything
needed to audit the convergence guarantees afterwards.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .bregman import BregmanGeometry, DiameterReport, diameters, mirror_step
from .core import (
    BoxSet,
    OracleCounter,
    OracleError,
    ProblemSpec,
    Vector,
    box_diameter,
    evaluate,
)
from .interp import WEIGHT_RULES, select_E
from .sampling import PoisednessError, SamplingStrategy, build_poised_sample

ZERO_GRADIENT_TOL = 1e-14
ZERO_GRADIENT_REBUILDS = 5  # radius halvings tried before declaring stationarity

TERM_BUDGET = "budget_exhausted"
TERM_MAX_ITERATIONS = "max_iterations"
TERM_STATIONARY = "stationary_E"
TERM_POISEDNESS = "poisedness_failure"
TERM_ORACLE = "oracle_failure"


@dataclass(frozen=True)
class DeltaSchedule:
    """Sample radius schedule delta_k = scale / sqrt(k + 1), scale in (0, 1]."""

    kind: str = "default"
    scale: float = 1.0

    def __post_init__(self) -> None:
        if self.kind not in ("default", "scaled"):
            raise ValueError(f"unknown delta schedule kind {self.kind!r}")
        if self.kind == "default" and self.scale != 1.0:
            raise ValueError("the default schedule has scale 1")
        if not 0.0 < self.scale <= 1.0:
            raise ValueError("delta scale must lie in (0, 1]")

    def radius(self, k: int) -> float:
        return self.scale / math.sqrt(k + 1)


@dataclass(frozen=True)
class SolverConfig:
    eps: float = 1e-3
    M: float = 10.0
    max_iterations: int = 1000
    f_eval_budget: int | None = None
    delta_schedule: DeltaSchedule = field(default_factory=DeltaSchedule)
    geometry: str = "euclidean"
    entropy_shift: float = 1e-3
    strategy: SamplingStrategy = field(default_factory=SamplingStrategy)
    weight_rule: str = "first_active"

    def __post_init__(self) -> None:
        if self.eps <= 0:
            raise ValueError("eps must be positive")
        if self.M < 1:
            raise ValueError("M must be at least 1")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be positive")
        if self.f_eval_budget is not None and self.f_eval_budget < 0:
            raise ValueError("f_eval_budget must be nonnegative")
        if self.weight_rule not in WEIGHT_RULES:
            raise ValueError(f"unknown weight rule {self.weight_rule!r}")


@dataclass(frozen=True)
class IterationRecord:
    k: int
    x: Vector
    f_value: float
    g_value: float
    eps_feasible: bool
    E: Vector
    E_norm: float
    t: float
    delta: float
    inv_norm: float
    boundary_truncated: bool


@dataclass(frozen=True)
class BestPoint:
    x: Vector
    f: float
    g: float


@dataclass(frozen=True)
class RunResult:
    history: list[IterationRecord]
    best: BestPoint | None
    counters: OracleCounter
    termination: str
    diagnostics: "BoundReport | None" = None


def build_geometry(config: SolverConfig, box: BoxSet) -> BregmanGeometry:
    """Geometry for the run's box, raising the entropy shift when the box has
    coordinates at or below zero.  The raised shift is what run summaries echo,
    and feeding it back reproduces the run (the rule is idempotent)."""
    if config.geometry == "euclidean":
        return BregmanGeometry.euclidean()
    shift = config.entropy_shift
    min_lower = float(np.min(box.lower))
    if min_lower + shift <= 0:
        shift = shift - min_lower
    return BregmanGeometry.for_box("entropy", box, shift)


def step_size(theta: float, alpha: float, E_norm: float, k: int) -> float:
    """sqrt(theta * alpha) / (E_norm * sqrt(k)); requires a nonzero gradient."""
    if theta <= 0 or alpha <= 0:
        raise ValueError("theta and alpha must be positive")
    if k < 1:
        raise ValueError("k must be at least 1")
    if E_norm <= ZERO_GRADIENT_TOL:
        raise ValueError("zero approximate gradient")
    return math.sqrt(theta * alpha) / (E_norm * math.sqrt(k))


def _iteration_seed(base: int, k: int, attempt: int) -> int:
    return ((base + 1) * 1_000_003 + k) * 1009 + attempt


def _ball_in_box(box: BoxSet, center: Vector, radius: float) -> bool:
    return bool(
        np.all(center - radius >= box.lower) and np.all(center + radius <= box.upper)
    )


def run(problem: ProblemSpec, config: SolverConfig) -> RunResult:
    """Execute the iteration loop until budget, iteration cap, stationarity,
    or a sampling/oracle failure; the partial history is always returned."""
    box = problem.box
    m = problem.dimension
    geom = build_geometry(config, box)
    theta = diameters(geom, box).theta
    counter = OracleCounter()
    x = problem.start.copy()
    history: list[IterationRecord] = []
    termination = TERM_MAX_ITERATIONS
    # worst f cost of one iteration: every objective piece at all m+1 points
    worst_f_cost = len(problem.objective.pieces) * (m + 1)

    try:
        for k in range(1, config.max_iterations + 1):
            if (
                config.f_eval_budget is not None
                and counter.f_calls + worst_f_cost > config.f_eval_budget
            ):
                termination = TERM_BUDGET
                break
            delta = config.delta_schedule.radius(k)
            for attempt in range(ZERO_GRADIENT_REBUILDS + 1):
                strat = replace(
                    config.strategy,
                    seed=_iteration_seed(config.strategy.seed, k, attempt),
                )
                sample = build_poised_sample(x, delta, config.M, strat)
                sub = select_E(problem, x, config.eps, sample, counter,
                               config.weight_rule)
                if sub.norm > ZERO_GRADIENT_TOL:
                    break
                delta *= 0.5
            f_value = evaluate(problem.objective, x, counter, "f").value
            g_value = evaluate(problem.constraint, x, counter, "g").value
            truncated = not _ball_in_box(box, x, sample.radius)
            if sub.norm <= ZERO_GRADIENT_TOL:
                history.append(IterationRecord(
                    k, x, f_value, g_value, g_value <= config.eps,
                    sub.vector, 0.0, 0.0, sample.radius, sample.inv_norm, truncated,
                ))
                termination = TERM_STATIONARY
                break
            t = step_size(theta, geom.alpha, sub.norm, k)
            history.append(IterationRecord(
                k, x, f_value, g_value, g_value <= config.eps,
                sub.vector, sub.norm, t, sample.radius, sample.inv_norm, truncated,
            ))
            x = mirror_step(geom, box, x, t * sub.vector)
    except PoisednessError:
        termination = TERM_POISEDNESS
    except OracleError:
        termination = TERM_ORACLE

    feasible = [r for r in history if r.eps_feasible]
    best = None
    if feasible:
        top = min(feasible, key=lambda r: r.f_value)
        best = BestPoint(top.x, top.f_value, top.g_value)
    return RunResult(history, best, counter, termination)


# ---------------------------------------------------------------------------
# Theory diagnostics: the convergence constant and the summation inequalities.


@dataclass(frozen=True)
class PerN:
    n: int
    lhs: float
    rhs: float
    satisfied: bool


@dataclass(frozen=True)
class BoundReport:
    """Convergence-rate audit for a recorded run.

    ``c_conservative`` carries an extra sqrt(2) on the kappa2 * omega_diam
    term relative to ``c_nominal``; the per-n checks use the larger one.
    """

    kappa1: float
    kappa2: float
    theta: float
    alpha: float
    omega_diam: float
    c_nominal: float
    c_conservative: float
    per_n: list[PerN]

    @property
    def all_satisfied(self) -> bool:
        return all(p.satisfied for p in self.per_n)


def convergence_constants(
    problem: ProblemSpec, config: SolverConfig, geom: BregmanGeometry, box: BoxSet
) -> tuple[float, float, float, float]:
    """(kappa1, kappa2, c_nominal, c_conservative) from analytic constants."""
    if problem.constants is None:
        raise ValueError("constants unavailable: problem has no analytic constants")
    c = problem.constants
    m = box.dimension
    kappa1 = max(c.l_f, c.l_g)
    kappa2 = max(c.k_f, c.k_g) * (1.0 + math.sqrt(m) * config.M / 2.0)
    dia = diameters(geom, box)
    base = (
        2.0
        * math.sqrt(dia.theta / geom.alpha)
        * max(kappa1, kappa2)
        * (1.0 + math.log(2.0))
        / (2.0 - math.sqrt(2.0))
    )
    omega = dia.omega_diam
    return kappa1, kappa2, base + kappa2 * omega, base + math.sqrt(2.0) * kappa2 * omega


def compute_bound_report(
    result: RunResult,
    problem: ProblemSpec,
    config: SolverConfig,
    geom: BregmanGeometry,
    box: BoxSet,
) -> BoundReport:
    """Check min{min feasible gap, eps} <= C / sqrt(n) for n = 4..len(history)."""
    if problem.constants is None or problem.known_optimum is None:
        raise ValueError(
            "constants unavailable: need analytic constants and a known optimum"
        )
    if len(result.history) < 4:
        raise ValueError("bound report needs at least 4 recorded iterations")
    kappa1, kappa2, c_nominal, c_conservative = convergence_constants(
        problem, config, geom, box
    )
    dia = diameters(geom, box)
    per_n: list[PerN] = []
    best_gap = math.inf
    for record in result.history:
        if record.eps_feasible:
            best_gap = min(best_gap, record.f_value - problem.known_optimum)
        if record.k >= 4:
            lhs = min(best_gap, config.eps)
            rhs = c_conservative / math.sqrt(record.k)
            per_n.append(PerN(record.k, lhs, rhs, lhs <= rhs))
    return BoundReport(
        kappa1, kappa2, dia.theta, geom.alpha, dia.omega_diam,
        c_nominal, c_conservative, per_n,
    )


@dataclass(frozen=True)
class WindowSums:
    n: int
    sum_inv_k: float
    bound1: float
    sum_inv_sqrt: float
    bound2: float
    ok: bool


def harmonic_window_bounds(n: int) -> WindowSums:
    """Exactly sum 1/k and 1/sqrt(k) for k in [floor(n/2), n] and compare with
    the closed-form bounds 2 ln 2 (upper) and (2 - sqrt(2)) sqrt(n) (lower)."""
    if n < 4:
        raise ValueError("n must be at least 4")
    ks = range(n // 2, n + 1)
    sum_inv_k = math.fsum(1.0 / k for k in ks)
    sum_inv_sqrt = math.fsum(1.0 / math.sqrt(k) for k in ks)
    bound1 = 2.0 * math.log(2.0)
    bound2 = (2.0 - math.sqrt(2.0)) * math.sqrt(n)
    ok = sum_inv_k <= bound1 and sum_inv_sqrt >= bound2
    return WindowSums(n, sum_inv_k, bound1, sum_inv_sqrt, bound2, ok)


def harmonic_window_sweep(n_max: int, n_min: int = 4) -> tuple[bool, int | None]:
    """Check harmonic_window_bounds for every n in [n_min, n_max].

    Maintains the window sums incrementally (the window [floor(n/2), n] gains
    one term and occasionally drops one as n grows), resyncing with exact
    summation periodically so float drift cannot accumulate.
    """
    if n_min < 4:
        raise ValueError("n_min must be at least 4")
    bound1 = 2.0 * math.log(2.0)
    two_minus_root2 = 2.0 - math.sqrt(2.0)
    lo = n_min // 2
    sum_inv_k = math.fsum(1.0 / k for k in range(lo, n_min + 1))
    sum_inv_sqrt = math.fsum(1.0 / math.sqrt(k) for k in range(lo, n_min + 1))
    for n in range(n_min, n_max + 1):
        if n > n_min:
            sum_inv_k += 1.0 / n
            sum_inv_sqrt += 1.0 / math.sqrt(n)
            new_lo = n // 2
            if new_lo > lo:
                sum_inv_k -= 1.0 / lo
                sum_inv_sqrt -= 1.0 / math.sqrt(lo)
                lo = new_lo
            if n % 8192 == 0:
                sum_inv_k = math.fsum(1.0 / k for k in range(lo, n + 1))
                sum_inv_sqrt = math.fsum(1.0 / math.sqrt(k) for k in range(lo, n + 1))
        if sum_inv_k > bound1 or sum_inv_sqrt < two_minus_root2 * math.sqrt(n):
            return False, n
    return True, None


# ---------------------------------------------------------------------------
# Run serialization: history CSV and summary JSON payloads.


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def history_csv(result: RunResult, dimension: int) -> str:
    """History table with one row per iteration, floats at full precision."""
    xs = [f"x{i + 1}" for i in range(dimension)]
    es = [f"E{i + 1}" for i in range(dimension)]
    header = ["k", *xs, "f", "g", "eps_feasible", *es,
              "E_norm", "t", "delta", "inv_norm", "boundary_truncated"]
    lines = [",".join(header)]
    for r in result.history:
        row = [
            str(r.k),
            *(_fmt(v) for v in r.x),
            _fmt(r.f_value),
            _fmt(r.g_value),
            "1" if r.eps_feasible else "0",
            *(_fmt(v) for v in r.E),
            _fmt(r.E_norm),
            _fmt(r.t),
            _fmt(r.delta),
            _fmt(r.inv_norm),
            "1" if r.boundary_truncated else "0",
        ]
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def config_to_dict(config: SolverConfig, effective_shift: float | None = None) -> dict:
    shift = config.entropy_shift if effective_shift is None else effective_shift
    return {
        "eps": config.eps,
        "M": config.M,
        "max_iterations": config.max_iterations,
        "f_eval_budget": config.f_eval_budget,
        "delta_schedule": {
            "kind": config.delta_schedule.kind,
            "scale": config.delta_schedule.scale,
        },
        "geometry": config.geometry,
        "entropy_shift": shift,
        "strategy": {
            "kind": config.strategy.kind,
            "seed": config.strategy.seed,
            "max_resamples": config.strategy.max_resamples,
        },
        "weight_rule": config.weight_rule,
    }


def config_from_dict(payload: dict) -> SolverConfig:
    defaults = SolverConfig()
    sched = payload.get("delta_schedule", {})
    strat = payload.get("strategy", {})
    return SolverConfig(
        eps=float(payload.get("eps", defaults.eps)),
        M=float(payload.get("M", defaults.M)),
        max_iterations=int(payload.get("max_iterations", defaults.max_iterations)),
        f_eval_budget=(
            None
            if payload.get("f_eval_budget") is None
            else int(payload["f_eval_budget"])
        ),
        delta_schedule=DeltaSchedule(
            kind=sched.get("kind", "default"),
            scale=float(sched.get("scale", 1.0)),
        ),
        geometry=payload.get("geometry", defaults.geometry),
        entropy_shift=float(payload.get("entropy_shift", defaults.entropy_shift)),
        strategy=SamplingStrategy(
            kind=strat.get("kind", "coordinate"),
            seed=int(strat.get("seed", 0)),
            max_resamples=int(strat.get("max_resamples", 30)),
        ),
        weight_rule=payload.get("weight_rule", defaults.weight_rule),
    )


def bound_report_to_dict(report: BoundReport) -> dict:
    return {
        "kappa1": report.kappa1,
        "kappa2": report.kappa2,
        "theta": report.theta,
        "alpha": report.alpha,
        "omega_diam": report.omega_diam,
        "c_nominal": report.c_nominal,
        "c_conservative": report.c_conservative,
        "all_satisfied": report.all_satisfied,
        "per_n": [
            {"n": p.n, "lhs": p.lhs, "rhs": p.rhs, "satisfied": p.satisfied}
            for p in report.per_n
        ],
    }


def summary_payload(
    problem_label: str,
    problem: ProblemSpec,
    config: SolverConfig,
    result: RunResult,
    diagnostics: BoundReport | None = None,
) -> dict:
    geom = build_geometry(config, problem.box)
    dia = diameters(geom, problem.box)
    return {
        "problem": problem_label,
        "config": config_to_dict(config, effective_shift=geom.domain_shift),
        "geometry": {
            "kind": geom.kind,
            "domain_shift": geom.domain_shift,
            "alpha": geom.alpha,
            "theta": dia.theta,
            "omega_diam": dia.omega_diam,
        },
        "best": (
            None
            if result.best is None
            else {
                "x": [float(v) for v in result.best.x],
                "f": result.best.f,
                "g": result.best.g,
            }
        ),
        "counters": {
            "f_calls": result.counters.f_calls,
            "g_calls": result.counters.g_calls,
            "cache_hits": result.counters.cache_hits,
        },
        "termination": result.termination,
        "iterations": len(result.history),
        "diagnostics": None if diagnostics is None else bound_report_to_dict(diagnostics),
    }
