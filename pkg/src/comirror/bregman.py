"""Bregman geometries over boxes: distances, diameters, and the mirror step.

Two separable geometries ship: squared Euclidean (alpha = 1) and shifted
negative entropy (alpha = 1 / max(upper + shift)).  Separability makes both
the box diameter and the mirror step closed-form per coordinate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import BoxSet, Vector, as_vector, box_diameter

GEOMETRY_KINDS = ("euclidean", "entropy")

# exp() argument range that stays finite in float64; the mirror step saturates
# at the box bounds beyond it anyway.
_EXP_LO, _EXP_HI = -745.0, 709.0


class DomainError(ValueError):
    """A point lies outside the geometry's domain."""


@dataclass(frozen=True)
class BregmanGeometry:
    """A strongly convex distance generator.

    euclidean: omega(x) = ||x||^2 / 2, alpha = 1.
    entropy:   omega(x) = sum (x_i + shift) ln (x_i + shift), defined where all
               shifted coordinates are positive; alpha is valid for the box the
               geometry was built for.
    """

    kind: str
    domain_shift: float = 0.0
    alpha: float = 1.0

    def __post_init__(self) -> None:
        if self.kind not in GEOMETRY_KINDS:
            raise ValueError(f"unknown geometry kind {self.kind!r}")
        if self.domain_shift < 0:
            raise ValueError("domain shift must be nonnegative")
        if self.alpha <= 0:
            raise ValueError("alpha must be positive")

    @classmethod
    def euclidean(cls) -> "BregmanGeometry":
        return cls("euclidean", 0.0, 1.0)

    @classmethod
    def for_box(
        cls, kind: str, box: BoxSet, domain_shift: float = 1e-3
    ) -> "BregmanGeometry":
        """Geometry with the strong-convexity parameter valid over ``box``."""
        if kind == "euclidean":
            return cls.euclidean()
        if kind != "entropy":
            raise ValueError(f"unknown geometry kind {kind!r}")
        if float(np.min(box.lower)) + domain_shift <= 0:
            raise DomainError(
                f"domain violation: shift {domain_shift} leaves coordinates "
                f"down to {np.min(box.lower)} nonpositive"
            )
        alpha = 1.0 / (float(np.max(box.upper)) + domain_shift)
        return cls("entropy", domain_shift, alpha)

    def _shifted(self, x: Vector, name: str = "point") -> Vector:
        s = as_vector(x) + self.domain_shift
        if np.any(s <= 0.0):
            raise DomainError(
                f"domain violation: {name} has nonpositive shifted coordinate"
            )
        return s

    def omega(self, x: Vector) -> float:
        if self.kind == "euclidean":
            x = as_vector(x)
            return 0.5 * float(x @ x)
        s = self._shifted(x)
        return float(np.sum(s * np.log(s)))

    def grad_omega(self, x: Vector) -> Vector:
        if self.kind == "euclidean":
            return as_vector(x).copy()
        return 1.0 + np.log(self._shifted(x))


def bregman_distance(geom: BregmanGeometry, u, v) -> float:
    """D(u, v) = omega(u) - omega(v) - <grad omega(v), u - v>.

    Closed forms are used in both geometries; they avoid the cancellation of
    the three-term definition, so D(u, v) >= alpha/2 ||u - v||^2 holds without
    numerical violations.
    """
    u = as_vector(u)
    v = as_vector(v, dim=u.size)
    if geom.kind == "euclidean":
        d = u - v
        return 0.5 * float(d @ d)
    su = geom._shifted(u, "u")
    sv = geom._shifted(v, "v")
    # per coordinate: su*log(su/sv) - (su - sv), in log1p form for small gaps
    return float(np.sum(su * np.log1p((su - sv) / sv) - (su - sv)))


@dataclass(frozen=True)
class DiameterReport:
    """Bregman diameter theta and Euclidean diameter of the same box."""

    theta: float
    omega_diam: float


def _coordinate_distance(geom: BregmanGeometry, a: float, b: float) -> float:
    """One-dimensional D(a, b) for a separable geometry."""
    if geom.kind == "euclidean":
        return 0.5 * (a - b) ** 2
    sa = a + geom.domain_shift
    sb = b + geom.domain_shift
    if sa <= 0 or sb <= 0:
        raise DomainError("domain violation: nonpositive shifted coordinate")
    return sa * np.log1p((sa - sb) / sb) - (sa - sb)


def diameters(geom: BregmanGeometry, box: BoxSet) -> DiameterReport:
    """Exact sup of D over the box, summed per coordinate over both endpoint
    orderings (the distance is asymmetric), plus the Euclidean diameter."""
    theta = 0.0
    for lo, hi in zip(box.lower, box.upper):
        theta += max(
            _coordinate_distance(geom, lo, hi), _coordinate_distance(geom, hi, lo)
        )
    return DiameterReport(float(theta), box_diameter(box))


def mirror_step(geom: BregmanGeometry, box: BoxSet, x, step_times_grad) -> Vector:
    """argmin over the box of <step_times_grad - grad omega(x), z> + omega(z).

    Closed forms: Euclidean reduces to clamping x - step_times_grad; entropy
    scales shifted coordinates by exp(-step_times_grad) before clamping.
    Clamping is exact because the objective is separable and convex per
    coordinate.
    """
    x = as_vector(x, dim=box.dimension)
    s = as_vector(step_times_grad, dim=box.dimension)
    if not box.contains(x):
        raise ValueError("current iterate lies outside the box")
    if geom.kind == "euclidean":
        return box.project(x - s)
    shifted = geom._shifted(x)
    z = shifted * np.exp(np.clip(-s, _EXP_LO, _EXP_HI)) - geom.domain_shift
    return box.project(z)
