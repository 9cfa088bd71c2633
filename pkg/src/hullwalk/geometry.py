"""Exact predicates and planar measures for admissible step regions.

A walker at ``x`` with recent history ``H`` may step to ``y`` inside the unit
ball at ``x`` provided the segment from ``x`` to ``y`` (excluding ``x``) does
not meet the convex hull of the constraint set.  The constraint set is
``H + {0, x}`` in the standard (origin-anchored) mode, or the semi-infinite
cylinder ``conv(H + {x}) - t*ell`` (``t >= 0``) in the homogeneous mode that
replaces the origin by a point at infinity in direction ``-ell``.

Seen from ``x``, the blocked region is the convex cone generated by the
directions from ``x`` to the constraint points (plus the ray ``-ell`` in
homogeneous mode), so admissibility reduces to a conical-hull membership
test.  In the plane the cone is an angular sector and everything is exact
arc arithmetic.

Boundary convention: the admissible region is treated as open (its boundary
has measure zero), so classification of points within ``tol`` of the
boundary may go either way.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import nnls

from .errors import DegenerateConfiguration, InvalidInput, UnsupportedDimension

TWO_PI = 2.0 * np.pi

#: default residual tolerance for the nonnegative feasibility solve
DEFAULT_TOL = 1e-9

#: directions with norm below this are treated as degenerate and dropped
ZERO_NORM = 1e-12


def _as_point(p, name: str = "point") -> np.ndarray:
    a = np.asarray(p, dtype=float)
    if a.ndim != 1:
        raise InvalidInput(f"{name} must be a 1-d coordinate array, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InvalidInput(f"{name} has non-finite coordinates: {a}")
    return a


@dataclass(frozen=True)
class ConeGenerators:
    """A convex cone with vertex ``apex``, spanned by unit ``directions``.

    Zero-length directions (constraint points coinciding with the apex) are
    dropped at construction; an empty direction list is the degenerate cone
    consisting of the apex alone.
    """

    apex: np.ndarray
    directions: np.ndarray  # shape (m, d), rows unit-normalised

    @classmethod
    def from_constraints(cls, x, history, ell=None) -> "ConeGenerators":
        """Blocked-direction cone at ``x`` for the given constraint set.

        ``history`` is an iterable of points; the origin is appended as a
        constraint unless ``ell`` is given, in which case the ray ``-ell``
        is appended instead (cylinder mode).
        """
        x = _as_point(x, "x")
        d = x.shape[0]
        raw = []
        for p in history:
            p = _as_point(p, "history point")
            if p.shape[0] != d:
                raise InvalidInput(f"history point dimension {p.shape[0]} != {d}")
            raw.append(p - x)
        if ell is None:
            raw.append(-x)
        else:
            ell = _as_point(ell, "ell")
            if ell.shape[0] != d:
                raise InvalidInput(f"ell dimension {ell.shape[0]} != {d}")
            raw.append(-ell)
        dirs = []
        for v in raw:
            # scalar norm arithmetic keeps this path bit-comparable with the
            # compiled planar kernels
            n = math.sqrt(math.fsum(float(c) * float(c) for c in v))
            if n > ZERO_NORM:
                dirs.append(v / n)
        mat = np.array(dirs, dtype=float) if dirs else np.empty((0, d))
        return cls(apex=x, directions=mat)

    @property
    def dim(self) -> int:
        return self.apex.shape[0]


@dataclass(frozen=True)
class Arc:
    """Circular arc {start + t mod 2pi : 0 <= t <= width} on the unit circle."""

    start: float  # in [0, 2*pi)
    width: float  # in [0, 2*pi]

    def __post_init__(self):
        if not (0.0 <= self.width <= TWO_PI + 1e-12):
            raise InvalidInput(f"arc width {self.width} outside [0, 2*pi]")

    @property
    def interior_angle(self) -> float:
        """Hull interior angle at the walker: 2*pi minus the admissible width."""
        return TWO_PI - self.width

    def contains(self, angle: float, tol: float = 0.0) -> bool:
        if self.width >= TWO_PI - 1e-15:
            return True
        t = (angle - self.start) % TWO_PI
        return -tol <= t <= self.width + tol

    def boundary_distance(self, angle: float) -> float:
        """Angular distance from ``angle`` to the nearer arc endpoint."""
        t = (angle - self.start) % TWO_PI
        return min(abs(t), abs(self.width - t), abs(TWO_PI - t))


def cone_contains(direction, gens: ConeGenerators, tol: float = DEFAULT_TOL) -> bool:
    """Is ``direction`` a nonnegative combination of the cone's generators?

    Decided by a nonnegative least-squares feasibility solve on the d x m
    system (membership iff the optimal residual is ``<= tol`` after scaling
    the query direction to unit norm).  The zero direction is in every cone.
    """
    if tol <= 0:
        raise InvalidInput(f"tol must be positive, got {tol}")
    v = _as_point(direction, "direction")
    if v.shape[0] != gens.dim:
        raise InvalidInput(
            f"direction dimension {v.shape[0]} != generator dimension {gens.dim}")
    norm = float(np.linalg.norm(v))
    if norm <= ZERO_NORM:
        return True
    if gens.directions.shape[0] == 0:
        return False
    _, resid = nnls(gens.directions.T, v / norm)
    return resid <= tol


def admissible_point(y, x, history, ell=None, tol: float = DEFAULT_TOL) -> bool:
    """Can the walker at ``x`` step to ``y``?

    True iff ``y`` lies in the closed unit ball at ``x`` and the step
    direction is outside the blocked cone.  ``ell=None`` selects the
    origin-anchored constraint set, otherwise the cylinder mode with unit
    direction ``ell``.
    """
    y = _as_point(y, "y")
    x = _as_point(x, "x")
    if y.shape[0] != x.shape[0]:
        raise InvalidInput(f"y dimension {y.shape[0]} != x dimension {x.shape[0]}")
    step = y - x
    if float(np.linalg.norm(step)) > 1.0 + tol:
        return False
    gens = ConeGenerators.from_constraints(x, history, ell=ell)
    return not cone_contains(step, gens, tol=tol)


def sector_from_directions(dirs: np.ndarray, tol: float = DEFAULT_TOL) -> Arc:
    """Admissible arc complementary to the angular span of blocked directions.

    The blocked cone of planar directions whose minimal enclosing arc is
    shorter than pi is exactly that arc; the admissible set is the
    complementary arc (the largest gap between consecutive direction
    angles).  An enclosing arc of pi or more means the walker is not an
    extreme point of its hull, which legal trajectories never produce.
    """
    m = dirs.shape[0]
    if m == 0:
        return Arc(start=0.0, width=TWO_PI)
    ang = []
    for i in range(m):
        a = math.atan2(float(dirs[i, 1]), float(dirs[i, 0]))
        ang.append(a + TWO_PI if a < 0.0 else a)
    ang.sort()
    width = TWO_PI - (ang[-1] - ang[0])
    start = ang[-1]
    for i in range(m - 1):
        g = ang[i + 1] - ang[i]
        if g > width:
            width = g
            start = ang[i]
    if m > 1 and width < math.pi - tol:
        raise DegenerateConfiguration(
            f"blocked directions span {TWO_PI - width:.6f} >= pi; "
            "current point is interior to its hull")
    return Arc(start=start % TWO_PI, width=min(width, TWO_PI))


def admissible_sector_2d(x, history, ell=None, tol: float = DEFAULT_TOL) -> Arc:
    """Planar admissible region as an arc of step angles (d = 2 only).

    The returned width lies in [pi, 2*pi] for legal walker states; the hull
    interior angle is ``2*pi - width``.
    """
    x = _as_point(x, "x")
    if x.shape[0] != 2:
        raise UnsupportedDimension(f"admissible_sector_2d requires d=2, got d={x.shape[0]}")
    gens = ConeGenerators.from_constraints(x, history, ell=ell)
    return sector_from_directions(gens.directions, tol=tol)
