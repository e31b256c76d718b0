"""Poised interpolation tuples with a certified inverse-norm bound.

A tuple of m+1 points (center y0 plus m displaced points) supports a unique
linear interpolant iff the scaled displacement matrix Lhat = L / Delta is
invertible; the certificate ``inv_norm`` = 1 / sigma_min(Lhat) measures how
far from singular the geometry is and is capped by the user bound M,
resampling randomized tuples until the cap holds.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Vector, as_vector

SINGULAR_RATIO = 1e-14  # sigma_min below this multiple of sigma_max counts as singular
# Slack on the certificate test: coordinate tuples at generic centers round to
# inv_norm = 1 + O(eps), which must still pass M = 1.
CERT_SLACK = 1e-9

STRATEGY_KINDS = ("coordinate", "rotated_coordinate", "random_ball")


class PoisednessError(RuntimeError):
    """No tuple satisfying inv_norm <= M was found within the resample budget."""


@dataclass(frozen=True)
class SamplingStrategy:
    """How sample points around the current iterate are generated.

    ``coordinate`` is deterministic (axis steps, inv_norm exactly 1);
    the randomized kinds are reproducible from ``seed``.
    """

    kind: str = "coordinate"
    seed: int = 0
    max_resamples: int = 30

    def __post_init__(self) -> None:
        if self.kind not in STRATEGY_KINDS:
            raise ValueError(f"unknown sampling strategy {self.kind!r}")
        if self.max_resamples < 1:
            raise ValueError("max_resamples must be positive")


@dataclass(frozen=True)
class PoisedSample:
    """m+1 interpolation points: the center plus m points within ``radius``."""

    center: Vector
    points: tuple[Vector, ...]
    radius: float
    inv_norm: float

    def all_points(self) -> list[Vector]:
        return [self.center, *self.points]

    @property
    def dimension(self) -> int:
        return self.center.size


def inv_norm_of(points, center) -> float:
    """1 / sigma_min of the radius-scaled displacement matrix.

    Returns +inf when the matrix is singular to working precision
    (sigma_min < 1e-14 * sigma_max).
    """
    center = as_vector(center)
    m = center.size
    if len(points) != m:
        raise ValueError(f"dimension mismatch: need {m} points, got {len(points)}")
    rows = np.array([as_vector(p, dim=m) - center for p in points])
    delta = float(np.max(np.linalg.norm(rows, axis=1)))
    if delta == 0.0:
        raise ValueError("sample points must be distinct from the center")
    svals = np.linalg.svd(rows / delta, compute_uv=False)
    if svals[-1] < SINGULAR_RATIO * svals[0]:
        return float("inf")
    return float(1.0 / svals[-1])


def _directions(kind: str, m: int, rng: np.random.Generator) -> np.ndarray:
    """Unit-scale displacement directions, one per row, max row norm 1."""
    if kind == "coordinate":
        return np.eye(m)
    if kind == "rotated_coordinate":
        q, r = np.linalg.qr(rng.standard_normal((m, m)))
        return q * np.sign(np.diag(r))
    # random_ball: draw uniformly in the unit ball, rescale so the farthest
    # point sits exactly on the sphere and the realized radius matches.
    raw = rng.standard_normal((m, m))
    raw /= np.linalg.norm(raw, axis=1, keepdims=True)
    raw *= rng.uniform(size=(m, 1)) ** (1.0 / m)
    return raw / np.max(np.linalg.norm(raw, axis=1))


def build_poised_sample(
    center, radius: float, M: float, strategy: SamplingStrategy
) -> PoisedSample:
    """Generate a poised tuple around ``center`` with inv_norm <= M.

    Randomized strategies redraw until the certificate holds, up to
    ``strategy.max_resamples`` attempts; failure raises PoisednessError.
    """
    center = as_vector(center)
    if radius <= 0:
        raise ValueError(f"invalid radius: {radius}")
    if M < 1:
        raise ValueError("M must be at least 1 (coordinate tuples attain inv_norm 1)")
    rng = np.random.default_rng(strategy.seed)
    randomized = strategy.kind != "coordinate"
    attempts = strategy.max_resamples if randomized else 1
    for _ in range(attempts):
        dirs = _directions(strategy.kind, center.size, rng)
        points = tuple(center + radius * d for d in dirs)
        nu = inv_norm_of(points, center)
        if nu <= M * (1.0 + CERT_SLACK):
            realized = float(max(np.linalg.norm(p - center) for p in points))
            return PoisedSample(center, points, realized, nu)
    raise PoisednessError(
        f"poisedness failure: no tuple with inv_norm <= {M} "
        f"after {attempts} attempts ({strategy.kind})"
    )
