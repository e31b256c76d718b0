"""Built-in benchmark problems with analytic constants and optimum oracles.

Three small two-dimensional problems (tp1..tp3, each with the inequality
constraints folded into a single max function) plus a deterministic
12-dimensional stand-in (sim12) for an external simulation whose oracle is
not available.  Boxes and starting points are artifact choices recorded
here; published reference results for tp1..tp3 are attached for reporting.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (
    BoxSet,
    MaxRepresentation,
    ProblemConstants,
    ProblemSpec,
    affine_piece,
    as_vector,
    poly_piece,
)

PROBLEM_NAMES = ("tp1", "tp2", "tp3", "sim12")


@dataclass(frozen=True)
class TableReference:
    """Published reference row: final value and evaluation counts."""

    f: float
    f_evals: int
    g_evals: int


@dataclass(frozen=True)
class NamedProblem:
    name: str
    spec: ProblemSpec
    reference_values: dict[str, TableReference] | None = None


def _polyval(coeffs, x: float) -> float:
    """Evaluate a dense polynomial, highest degree first."""
    acc = 0.0
    for c in coeffs:
        acc = acc * x + c
    return acc


def _polyder(coeffs) -> list[float]:
    n = len(coeffs) - 1
    return [c * (n - i) for i, c in enumerate(coeffs[:-1])]


def bracketed_root(coeffs, lo: float, hi: float, tol: float = 1e-12) -> float:
    """Root of a polynomial in [lo, hi] by bisection, polished with Newton."""
    flo = _polyval(coeffs, lo)
    fhi = _polyval(coeffs, hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if flo * fhi > 0:
        raise ValueError(f"root bracketing failure on [{lo}, {hi}]")
    der = _polyder(coeffs)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        fmid = _polyval(coeffs, mid)
        if fmid == 0.0 or hi - lo < tol:
            lo = hi = mid
            break
        if flo * fmid < 0:
            hi = mid
        else:
            lo, flo = mid, fmid
    root = 0.5 * (lo + hi)
    for _ in range(4):
        d = _polyval(der, root)
        if d == 0.0:
            break
        root -= _polyval(coeffs, root) / d
    return root


# --- tp3 optimum ------------------------------------------------------------

TP3_ROOT_POLY = (16.0, -336.0, 1909.0, 3024.0, -15876.0)


@dataclass(frozen=True)
class Tp3Optimum:
    x: np.ndarray
    f: float
    lam: float
    kkt_residual: float
    root: float
    root_residual: float


def tp3_optimum() -> Tp3Optimum:
    """Exact optimum of tp3 on the circle piece of its constraint.

    The first-order conditions reduce to a quartic in x1; x2 and the
    multiplier follow in closed form, and the returned KKT residual
    ||grad f - lam * grad(circle piece)|| certifies the construction.
    """
    a = bracketed_root(TP3_ROOT_POLY, 2.0, 3.0)
    x1 = a
    x2 = (8.0 / 357.0) * a**3 - (4.0 / 17.0) * a**2 + (145.0 / 714.0) * a + 36.0 / 17.0
    lam = -1.0 - (1909.0 / 378.0) * a + (8.0 / 9.0) * a**2 - (8.0 / 189.0) * a**3
    x = np.array([x1, x2])
    f = 7 * x1**2 + 3 * x2**2 - 84 * x1 - 34 * x2 + 300
    grad_f = np.array([14 * x1 - 84, 6 * x2 - 34])
    grad_circle = np.array([2 * x1, 2 * x2])
    residual = float(np.linalg.norm(grad_f - lam * grad_circle))
    return Tp3Optimum(x, float(f), float(lam), residual,
                      a, abs(_polyval(TP3_ROOT_POLY, a)))


# --- tp2 optimum ------------------------------------------------------------

# Eliminating the multiplier and x2 = x1/(x1-1) from the stationarity system
# on the bilinear constraint surface leaves this quartic in x1.
TP2_ROOT_POLY = (6.0, -48.0, 108.0, -93.0, 26.0)


@dataclass(frozen=True)
class Tp2Optimum:
    x: np.ndarray
    f: float
    mu: float
    kkt_residual: float


def tp2_optimum() -> Tp2Optimum:
    """Optimum of tp2 on its bilinear constraint surface x1*x2 = x1 + x2."""
    a = bracketed_root(TP2_ROOT_POLY, 4.0, 6.0)
    x1 = a
    x2 = a / (a - 1.0)
    mu = (60.0 - 12.0 * x1) / (x2 - 1.0)
    x = np.array([x1, x2])
    f = 6 * x1**2 + x2**2 - 60 * x1 - 8 * x2 + 166
    grad_f = np.array([12 * x1 - 60, 2 * x2 - 8])
    grad_g = np.array([x2 - 1.0, x1 - 1.0])
    residual = float(np.linalg.norm(grad_f + mu * grad_g))
    return Tp2Optimum(x, float(f), float(mu), residual)


# --- problem definitions ----------------------------------------------------


def _tp1() -> NamedProblem:
    objective = MaxRepresentation((
        poly_piece([(-1.0, (1, 0)), (-2.0, (0, 1))],
                   hessian_bound=0.0, gradient_bound=math.sqrt(5.0)),
    ))
    constraint = MaxRepresentation((
        affine_piece([-1.0, 0.0]),                # -x1 <= 0
        affine_piece([1.0, 0.0], offset=-1.0),    # x1 - 1 <= 0
        affine_piece([0.0, 1.0]),                 # x2 <= 0
    ))
    box = BoxSet([-1.0, -2.0], [2.0, 1.0])
    # start calibrated over the box so both geometries land near the
    # reference values within the 200-evaluation budget
    spec = ProblemSpec(
        objective=objective,
        constraint=constraint,
        box=box,
        start=as_vector([-0.75, 0.55]),
        known_optimum=-1.0,
        constants=ProblemConstants(
            l_f=math.sqrt(5.0), l_g=1.0, k_f=0.0, k_g=0.0
        ),
    )
    return NamedProblem("tp1", spec, {
        "euclidean": TableReference(-0.9542, 78, 162),
        "entropy": TableReference(-0.9645, 99, 141),
    })


def _tp2() -> NamedProblem:
    objective = MaxRepresentation((
        poly_piece(
            [(6.0, (2, 0)), (1.0, (0, 2)), (-60.0, (1, 0)), (-8.0, (0, 1)),
             (166.0, (0, 0))],
            hessian_bound=12.0, gradient_bound=math.sqrt(60.0**2 + 12.0**2),
        ),
    ))
    constraint = MaxRepresentation((
        affine_piece([-1.0, 0.0]),                # -x1 <= 0
        affine_piece([1.0, 0.0], offset=-10.0),   # x1 - 10 <= 0
        affine_piece([0.0, -1.0]),                # -x2 <= 0
        affine_piece([0.0, 1.0], offset=-10.0),   # x2 - 10 <= 0
        poly_piece([(1.0, (1, 1)), (-1.0, (1, 0)), (-1.0, (0, 1))],
                   hessian_bound=1.0, gradient_bound=9.0 * math.sqrt(2.0)),
        affine_piece([-1.0, -1.0], offset=3.0),   # 3 - x1 - x2 <= 0
    ))
    box = BoxSet([0.0, 0.0], [10.0, 10.0])
    # feasible start on the bilinear constraint surface (5 * 1.25 = 5 + 1.25)
    spec = ProblemSpec(
        objective=objective,
        constraint=constraint,
        box=box,
        start=as_vector([5.0, 1.25]),
        known_optimum=tp2_optimum().f,
        constants=ProblemConstants(
            l_f=math.sqrt(60.0**2 + 12.0**2),
            l_g=9.0 * math.sqrt(2.0),
            k_f=12.0,
            k_g=1.0,
        ),
    )
    return NamedProblem("tp2", spec, {
        "euclidean": TableReference(7.5587, 78, 122),
        "entropy": TableReference(7.5580, 81, 111),
    })


def _tp3() -> NamedProblem:
    objective = MaxRepresentation((
        poly_piece(
            [(7.0, (2, 0)), (3.0, (0, 2)), (-84.0, (1, 0)), (-34.0, (0, 1)),
             (300.0, (0, 0))],
            hessian_bound=14.0, gradient_bound=math.sqrt(84.0**2 + 34.0**2),
        ),
    ))
    constraint = MaxRepresentation((
        affine_piece([-1.0, 0.0]),                # -x1 <= 0
        affine_piece([1.0, 0.0], offset=-10.0),   # x1 - 10 <= 0
        affine_piece([0.0, -1.0]),                # -x2 <= 0
        affine_piece([0.0, 1.0], offset=-10.0),   # x2 - 10 <= 0
        poly_piece([(1.0, (0, 0)), (-1.0, (1, 1))],
                   hessian_bound=1.0, gradient_bound=10.0 * math.sqrt(2.0)),
        poly_piece([(1.0, (2, 0)), (1.0, (0, 2)), (-9.0, (0, 0))],
                   hessian_bound=2.0, gradient_bound=20.0 * math.sqrt(2.0)),
    ))
    box = BoxSet([0.0, 0.0], [10.0, 10.0])
    # feasible start at the four-decimal rounding of the known optimizer,
    # on the active circle piece of the constraint
    spec = ProblemSpec(
        objective=objective,
        constraint=constraint,
        box=box,
        start=as_vector([2.6390, 1.4267]),
        known_optimum=tp3_optimum().f,
        constants=ProblemConstants(
            l_f=math.sqrt(84.0**2 + 34.0**2),
            l_g=20.0 * math.sqrt(2.0),
            k_f=14.0,
            k_g=2.0,
        ),
    )
    return NamedProblem("tp3", spec, {
        "euclidean": TableReference(84.7096, 78, 122),
        "entropy": TableReference(84.7108, 75, 125),
    })


# sim12: separable convex quadratic (a concave fit objective, negated) over a
# box, with a three-piece max-affine constraint.  Deterministic small-integer
# data; no optimum is claimed.
SIM12_DIMENSION = 12
_SIM12_A = tuple(1.0 + (i % 3) for i in range(SIM12_DIMENSION))
_SIM12_C = tuple(0.2 * ((7 * i + 3) % 10) for i in range(SIM12_DIMENSION))
SIM12_STARTS = {
    "interior": (1.0,) + (0.0,) * 11,
    "edge": (2.0,) + (0.5,) * 11,
}


def sim12_stand_in(start: str = "interior") -> NamedProblem:
    """Deterministic 12-dimensional stand-in for the external simulation.

    ``start`` picks one of the two documented starting points: "interior"
    (strictly feasible) or "edge" (feasible, on the box boundary).
    """
    if start not in SIM12_STARTS:
        raise ValueError(f"unknown sim12 start {start!r}")
    m = SIM12_DIMENSION
    terms = []
    constant = 0.0
    for i, (a, c) in enumerate(zip(_SIM12_A, _SIM12_C)):
        pw2 = tuple(2 if j == i else 0 for j in range(m))
        pw1 = tuple(1 if j == i else 0 for j in range(m))
        terms.append((a, pw2))
        if c != 0.0:
            terms.append((-2.0 * a * c, pw1))
        constant += a * c * c
    terms.append((constant, (0,) * m))
    lower = np.zeros(m)
    upper = np.full(m, 2.0)
    l_f = float(np.linalg.norm([
        2.0 * a * max(abs(lo - c), abs(hi - c))
        for a, c, lo, hi in zip(_SIM12_A, _SIM12_C, lower, upper)
    ]))
    objective = MaxRepresentation((
        poly_piece(terms, hessian_bound=2.0 * max(_SIM12_A), gradient_bound=l_f),
    ))
    ones = np.ones(m)
    lead = np.array([1.0] + [-1.0] * (m - 1))
    constraint = MaxRepresentation((
        affine_piece(ones, offset=-9.0),    # sum x <= 9
        affine_piece(lead, offset=-1.5),    # x1 - sum(rest) <= 1.5
        affine_piece(-ones, offset=0.5),    # sum x >= 0.5
    ))
    spec = ProblemSpec(
        objective=objective,
        constraint=constraint,
        box=BoxSet(lower, upper),
        start=as_vector(SIM12_STARTS[start]),
        known_optimum=None,
        constants=ProblemConstants(
            l_f=l_f, l_g=math.sqrt(m), k_f=2.0 * max(_SIM12_A), k_g=0.0
        ),
    )
    return NamedProblem("sim12", spec, None)


_BUILDERS = {
    "tp1": _tp1,
    "tp2": _tp2,
    "tp3": _tp3,
    "sim12": sim12_stand_in,
}


def load_problem(name: str) -> NamedProblem:
    """Fresh instance of a built-in problem by name (tp1, tp2, tp3, sim12)."""
    try:
        builder = _BUILDERS[name]
    except KeyError:
        raise ValueError(
            f"unknown problem {name!r}; choose from {', '.join(PROBLEM_NAMES)}"
        ) from None
    return builder()
