"""Problem model: max-of-smooth black-box functions over a compact box.

Objectives and constraints are pointwise maxima of smooth pieces exposed
through value-only oracles.  All evaluations run through a per-run
:class:`OracleCounter` that counts piece calls and caches piece values by
exact coordinate bytes, so re-evaluating a point already seen in the same
run is free and evaluation counts are reproducible.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, NamedTuple, Sequence

import numpy as np

Vector = np.ndarray

DEFAULT_ACTIVITY_TOLERANCE = 1e-8


class OracleError(RuntimeError):
    """A value oracle returned a non-finite number."""

    def __init__(self, piece_index: int, x: Vector, value) -> None:
        super().__init__(
            f"oracle failure: piece {piece_index} returned {value!r} "
            f"at x={np.asarray(x).tolist()}"
        )
        self.piece_index = piece_index


def as_vector(x, dim: int | None = None) -> Vector:
    """Coerce to a finite 1-d float64 array, optionally checking its length."""
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 1:
        raise ValueError(f"expected a 1-d vector, got shape {arr.shape}")
    if dim is not None and arr.size != dim:
        raise ValueError(f"dimension mismatch: expected {dim}, got {arr.size}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"vector has non-finite entries: {arr.tolist()}")
    return arr


@dataclass(frozen=True)
class SmoothPiece:
    """One smooth piece of a max representation, known only by its values.

    ``hessian_bound`` and ``gradient_bound``, when given, bound the spectral
    norm of the piece's Hessian and the Euclidean norm of its gradient over
    the feasible box; they feed the theory diagnostics only.
    """

    value_oracle: Callable[[Vector], float]
    hessian_bound: float | None = None
    gradient_bound: float | None = None


@dataclass(frozen=True)
class MaxRepresentation:
    """A function given as the pointwise max of finitely many smooth pieces."""

    pieces: tuple[SmoothPiece, ...]
    activity_tolerance: float = DEFAULT_ACTIVITY_TOLERANCE

    def __post_init__(self) -> None:
        object.__setattr__(self, "pieces", tuple(self.pieces))
        if not self.pieces:
            raise ValueError("a max representation needs at least one piece")
        if self.activity_tolerance < 0:
            raise ValueError("activity tolerance must be nonnegative")

    def raw_piece_values(self, x: Vector) -> Vector:
        """Uncached, uncounted piece values (diagnostics and tests only)."""
        vals = np.array([float(p.value_oracle(x)) for p in self.pieces])
        bad = np.flatnonzero(~np.isfinite(vals))
        if bad.size:
            raise OracleError(int(bad[0]), x, vals[bad[0]])
        return vals

    def value(self, x: Vector) -> float:
        """Uncounted max value (diagnostics and tests only)."""
        return float(np.max(self.raw_piece_values(x)))

    def active_set(self, piece_vals: Vector) -> tuple[int, ...]:
        """Indices of pieces within the relative activity tolerance of the max."""
        vmax = float(np.max(piece_vals))
        cut = vmax - self.activity_tolerance * (1.0 + abs(vmax))
        return tuple(int(i) for i in np.flatnonzero(piece_vals >= cut))

    @property
    def hessian_bound(self) -> float | None:
        bounds = [p.hessian_bound for p in self.pieces]
        if any(b is None for b in bounds):
            return None
        return max(bounds)

    @property
    def gradient_bound(self) -> float | None:
        bounds = [p.gradient_bound for p in self.pieces]
        if any(b is None for b in bounds):
            return None
        return max(bounds)


@dataclass
class OracleCounter:
    """Per-run evaluation ledger: piece-call counts plus the value cache.

    The cache is keyed by (representation id, piece index, coordinate bytes),
    so a repeated evaluation at bit-identical coordinates costs nothing and
    replaying a run gives identical counts.  Confine each counter to one run.
    """

    f_calls: int = 0
    g_calls: int = 0
    cache_hits: int = 0
    _cache: dict = field(default_factory=dict, repr=False)


class EvalResult(NamedTuple):
    value: float
    active: tuple[int, ...]


def piece_values(
    rep: MaxRepresentation, x: Vector, counter: OracleCounter, which: str = "f"
) -> Vector:
    """All piece values at ``x``, counted into ``counter`` with cache reuse."""
    if which not in ("f", "g"):
        raise ValueError(f"counter selector must be 'f' or 'g', got {which!r}")
    x = as_vector(x)
    key_base = (id(rep), x.tobytes())
    vals = np.empty(len(rep.pieces))
    fresh = 0
    for i, piece in enumerate(rep.pieces):
        key = (key_base, i)
        cached = counter._cache.get(key)
        if cached is not None:
            counter.cache_hits += 1
            vals[i] = cached
            continue
        v = float(piece.value_oracle(x))
        if not np.isfinite(v):
            raise OracleError(i, x, v)
        counter._cache[key] = v
        vals[i] = v
        fresh += 1
    if which == "f":
        counter.f_calls += fresh
    else:
        counter.g_calls += fresh
    return vals


def evaluate(
    rep: MaxRepresentation, x: Vector, counter: OracleCounter, which: str = "f"
) -> EvalResult:
    """Max value and active piece indices at ``x``, with counted oracle calls."""
    vals = piece_values(rep, x, counter, which)
    return EvalResult(float(np.max(vals)), rep.active_set(vals))


@dataclass(frozen=True)
class BoxSet:
    """Compact axis-aligned box, the only feasible-set shape supported."""

    lower: Vector
    upper: Vector

    def __post_init__(self) -> None:
        lo = as_vector(self.lower)
        up = as_vector(self.upper, dim=lo.size)
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", up)
        if np.any(lo > up):
            raise ValueError("box needs lower <= upper in every coordinate")
        if not np.any(lo < up):
            raise ValueError("box must not be a single point")

    @property
    def dimension(self) -> int:
        return self.lower.size

    def contains(self, x: Vector, tol: float = 0.0) -> bool:
        x = as_vector(x, dim=self.dimension)
        return bool(np.all(x >= self.lower - tol) and np.all(x <= self.upper + tol))

    def project(self, x: Vector) -> Vector:
        return np.clip(as_vector(x, dim=self.dimension), self.lower, self.upper)

    def corners(self, limit: int = 4096) -> list[Vector]:
        """All box corners (guarded against blowing up in high dimension)."""
        m = self.dimension
        if 2**m > limit:
            raise ValueError(f"2^{m} corners exceed the limit of {limit}")
        out = []
        for mask in range(2**m):
            c = np.where(
                [(mask >> i) & 1 for i in range(m)], self.upper, self.lower
            ).astype(float)
            out.append(c)
        return out


def project_box(box: BoxSet, x: Vector) -> Vector:
    """Euclidean-nearest point of the box: per-coordinate clamping."""
    return box.project(x)


def box_diameter(box: BoxSet) -> float:
    """Euclidean diameter of the box, attained at opposite corners."""
    return float(np.linalg.norm(box.upper - box.lower))


@dataclass(frozen=True)
class ProblemConstants:
    """Analytic bounds over the box: gradient norms (L) and Hessian norms (K)."""

    l_f: float
    l_g: float
    k_f: float
    k_g: float

    def __post_init__(self) -> None:
        for name in ("l_f", "l_g", "k_f", "k_g"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")


@dataclass(frozen=True)
class ProblemSpec:
    """A full problem instance: minimize the objective max subject to
    constraint max <= 0 over the box, starting from ``start``.

    The start must lie in the box but need not satisfy the constraint;
    infeasible iterates are handled by the solver's constraint branch.
    """

    objective: MaxRepresentation
    constraint: MaxRepresentation
    box: BoxSet
    start: Vector
    known_optimum: float | None = None
    constants: ProblemConstants | None = None

    def __post_init__(self) -> None:
        start = as_vector(self.start, dim=self.box.dimension)
        object.__setattr__(self, "start", start)
        if not self.box.contains(start):
            raise ValueError("start point lies outside the box")

    @property
    def dimension(self) -> int:
        return self.box.dimension


# ---------------------------------------------------------------------------
# Polynomial pieces and the JSON problem-definition format.


@dataclass(frozen=True)
class PolyTerm:
    coef: float
    powers: tuple[int, ...]


def poly_oracle(terms: Sequence[PolyTerm]) -> Callable[[Vector], float]:
    terms = tuple(terms)

    def value(x: Vector) -> float:
        total = 0.0
        for t in terms:
            total += t.coef * float(np.prod(np.power(x, t.powers)))
        return total

    return value


def poly_piece(
    terms: Sequence[tuple[float, Sequence[int]]],
    hessian_bound: float | None = None,
    gradient_bound: float | None = None,
) -> SmoothPiece:
    """Smooth piece for the polynomial sum of coef * prod(x_i ** power_i)."""
    parsed = [PolyTerm(float(c), tuple(int(p) for p in pw)) for c, pw in terms]
    return SmoothPiece(poly_oracle(parsed), hessian_bound, gradient_bound)


def affine_piece(
    gradient: Sequence[float],
    offset: float = 0.0,
    gradient_bound: float | None = None,
) -> SmoothPiece:
    """Smooth piece for gradient . x + offset (Hessian bound is zero)."""
    g = as_vector(gradient)
    bound = float(np.linalg.norm(g)) if gradient_bound is None else gradient_bound
    return SmoothPiece(lambda x: float(g @ x) + offset, 0.0, bound)


_ORACLE_REGISTRY: dict[str, SmoothPiece] = {}


def register_piece_oracle(name: str, piece: SmoothPiece) -> None:
    """Make a custom piece loadable from problem files as {"type": "named"}."""
    _ORACLE_REGISTRY[name] = piece


def piece_from_spec(spec: dict) -> SmoothPiece:
    kind = spec.get("type")
    if kind == "poly":
        terms = [(t["coef"], t["powers"]) for t in spec["terms"]]
        return poly_piece(terms, spec.get("hessian_bound"), spec.get("gradient_bound"))
    if kind == "named":
        name = spec["name"]
        try:
            return _ORACLE_REGISTRY[name]
        except KeyError:
            raise ValueError(f"no piece oracle registered under {name!r}") from None
    raise ValueError(f"unknown piece spec type: {kind!r}")


def rep_from_specs(
    specs: Sequence[dict], activity_tolerance: float = DEFAULT_ACTIVITY_TOLERANCE
) -> MaxRepresentation:
    return MaxRepresentation(
        tuple(piece_from_spec(s) for s in specs), activity_tolerance
    )


def problem_from_dict(payload: dict) -> ProblemSpec:
    """Build a problem from the JSON problem-definition payload."""
    dim = int(payload["dimension"])
    box = BoxSet(
        as_vector(payload["box"]["lower"], dim), as_vector(payload["box"]["upper"], dim)
    )
    constants = None
    if payload.get("constants") is not None:
        c = payload["constants"]
        constants = ProblemConstants(
            float(c["L_f"]), float(c["L_g"]), float(c["K_f"]), float(c["K_g"])
        )
    known = payload.get("known_optimum")
    return ProblemSpec(
        objective=rep_from_specs(payload["objective"]),
        constraint=rep_from_specs(payload["constraint"]),
        box=box,
        start=as_vector(payload["start"], dim),
        known_optimum=None if known is None else float(known),
        constants=constants,
    )


def problem_from_json(path: str | Path) -> ProblemSpec:
    with open(path, "r", encoding="utf-8") as handle:
        return problem_from_dict(json.load(handle))
