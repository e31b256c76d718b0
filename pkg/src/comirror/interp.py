"""Linear interpolation models and interpolation-based approximate subgradients.

Each smooth piece active at the sample center gets a linear model fitted
through the m+1 sample values; the approximate subgradient is a convex
combination of the model gradients.  For pieces with Hessian norm at most K
the combination lies within K * (1 + sqrt(m) * inv_norm / 2) * Delta of a
true subgradient.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .core import (
    MaxRepresentation,
    OracleCounter,
    ProblemSpec,
    Vector,
    piece_values,
)
from .sampling import PoisedSample

WEIGHT_RULES = ("first_active", "uniform_active")

INTERPOLATION_CHECK_TOL = 1e-8  # relative residual allowed at the sample points


class SingularSystemError(RuntimeError):
    """The interpolation system could not be solved to tolerance."""


@dataclass(frozen=True)
class LinearModel:
    """Affine model intercept + gradient . x fitted through sample values."""

    intercept: float
    gradient: Vector

    def __call__(self, x) -> float:
        return self.intercept + float(self.gradient @ np.asarray(x, dtype=float))


@dataclass(frozen=True)
class ApproxSubgradient:
    """Convex combination of interpolated piece gradients at a sample center.

    ``theory_bound`` is the guaranteed distance K(1 + sqrt(m)*inv_norm/2)*Delta
    to a true subgradient, or None when no Hessian bound is available.
    """

    vector: Vector
    branch: str  # "objective" | "constraint"
    active_indices: tuple[int, ...]
    weights: Vector
    theory_bound: float | None

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.vector))


def fit_linear_model(sample: PoisedSample, values) -> LinearModel:
    """Solve the (m+1) x (m+1) interpolation system for one piece.

    Uses a direct partially pivoted factorization; the result is checked to
    reproduce every sample value to relative tolerance 1e-8.
    """
    values = np.asarray(values, dtype=float)
    pts = sample.all_points()
    if values.shape != (len(pts),):
        raise ValueError(
            f"need {len(pts)} sample values, got shape {values.shape}"
        )
    if not np.all(np.isfinite(values)):
        raise ValueError("sample values must be finite")
    system = np.hstack([np.ones((len(pts), 1)), np.array(pts)])
    try:
        coeffs = np.linalg.solve(system, values)
    except np.linalg.LinAlgError as exc:
        raise SingularSystemError(f"singular system: {exc}") from exc
    model = LinearModel(float(coeffs[0]), coeffs[1:].copy())
    residual = np.abs(system @ coeffs - values)
    allowed = INTERPOLATION_CHECK_TOL * (1.0 + np.abs(values))
    if np.any(residual > allowed):
        raise SingularSystemError(
            f"singular system: interpolation residual {residual.max():.3e}"
        )
    return model


def _theory_bound(k_bound: float | None, sample: PoisedSample) -> float | None:
    if k_bound is None:
        return None
    m = sample.dimension
    return k_bound * (1.0 + np.sqrt(m) * sample.inv_norm / 2.0) * sample.radius


def approx_subgradient(
    rep: MaxRepresentation,
    sample: PoisedSample,
    counter: OracleCounter,
    weight_rule: str = "first_active",
    branch: str = "objective",
) -> ApproxSubgradient:
    """Interpolated subgradient of ``rep`` at the sample center.

    All pieces are evaluated at all m+1 points (counted once each, with cache
    reuse), so counts do not depend on the weight rule; models are fitted only
    for the pieces carrying weight.  ``first_active`` puts weight 1 on the
    lowest active index, ``uniform_active`` spreads it evenly over the active
    set found at the center.
    """
    if weight_rule not in WEIGHT_RULES:
        raise ValueError(f"unknown weight rule {weight_rule!r}")
    which = "f" if branch == "objective" else "g"
    vals = np.array([piece_values(rep, p, counter, which) for p in sample.all_points()])
    active = rep.active_set(vals[0])
    r = len(active)
    weights = np.zeros(r)
    if weight_rule == "first_active":
        weights[0] = 1.0
    else:
        weights[:] = 1.0 / r
    vector = np.zeros(sample.dimension)
    for w, piece_idx in zip(weights, active):
        if w == 0.0:
            continue
        model = fit_linear_model(sample, vals[:, piece_idx])
        vector += w * model.gradient
    return ApproxSubgradient(
        vector=vector,
        branch=branch,
        active_indices=active,
        weights=weights,
        theory_bound=_theory_bound(rep.hessian_bound, sample),
    )


def select_E(
    problem: ProblemSpec,
    x,
    eps: float,
    sample: PoisedSample,
    counter: OracleCounter,
    weight_rule: str = "first_active",
) -> ApproxSubgradient:
    """Branching subgradient: objective when g(x) <= eps, else constraint.

    ``x`` must be the sample center; the constraint value used for the branch
    test is cached, so a constraint-branch model reuses it for free.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    x = np.asarray(x, dtype=float)
    if not np.array_equal(x, sample.center):
        raise ValueError("x must coincide with the sample center")
    g_vals = piece_values(problem.constraint, x, counter, "g")
    if float(np.max(g_vals)) <= eps:
        sub = approx_subgradient(problem.objective, sample, counter, weight_rule,
                                 branch="objective")
    else:
        sub = approx_subgradient(problem.constraint, sample, counter, weight_rule,
                                 branch="constraint")
    if problem.constants is not None:
        k = max(problem.constants.k_f, problem.constants.k_g)
        sub = replace(sub, theory_bound=_theory_bound(k, sample))
    return sub
