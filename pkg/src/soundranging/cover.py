"""Covering a ball by half-radius balls on a coordinate lattice.

The unit ball ``B[0; 1]`` is covered by the balls ``B[c; 1/2]`` whose
centers run over the grid ``{-1 + i/m : i = 0..2m}^m``; grid points with
``||c|| > 3/2`` cannot meet the unit ball and are dropped. Any point x of
the unit ball lies in the ball of the grid point nearest to it coordinate
by coordinate, because ``|x_j| <= ||x||`` for the standard basis of every
l_p norm and each coordinate is off by at most ``1/(2m)``.

Scaling by r and translating by z gives the cover of ``B[z; r]``; every
child center is then within ``3/2 r`` of z.
"""

from __future__ import annotations

import bisect
import functools
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from ._validation import check_point, check_points, frozen
from .exceptions import CapacityError, InvalidInputError
from .geometry import NormSpec

__all__ = [
    "Ball",
    "CoverLevel",
    "CENTER_DISTANCE_FACTOR",
    "CONTAINMENT_FACTOR",
    "DEFAULT_LATTICE_CAP",
    "lattice_size",
    "unit_lattice_offsets",
    "unit_lattice_centers",
    "rnd",
    "nearest_lattice_center",
    "refine_ball",
    "dedupe_centers",
]

# Children lie within K1 * r of the parent center; everything generated from
# B[c0; r] stays inside B[c0; (2 K1 + 1) r].
CENTER_DISTANCE_FACTOR = 1.5
CONTAINMENT_FACTOR = 2 * CENTER_DISTANCE_FACTOR + 1
DEFAULT_LATTICE_CAP = 10**7
_PRUNE_SLACK = 1e-12


@dataclass(frozen=True)
class Ball:
    """Closed ball ``B[center; radius]``."""

    center: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", frozen(check_point(self.center, name="center")))
        r = float(self.radius)
        if not (np.isfinite(r) and r > 0.0):
            raise InvalidInputError(f"ball radius must be positive and finite, got {self.radius}")
        object.__setattr__(self, "radius", r)

    @property
    def dim(self) -> int:
        return self.center.shape[0]

    def contains(self, norm: NormSpec, x, slack: float = 0.0) -> bool:
        x = check_point(x, self.dim)
        return float(norm.row_norms((x - self.center)[None, :])[0]) <= self.radius + slack

    def __eq__(self, other):
        if not isinstance(other, Ball):
            return NotImplemented
        return self.radius == other.radius and np.array_equal(self.center, other.center)

    def __hash__(self):
        return hash((self.radius, self.center.tobytes()))


@dataclass(frozen=True)
class CoverLevel:
    """The suspicious balls of one level: shared radius, centers as rows."""

    level: int
    radius: float
    centers: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "centers", frozen(check_points(self.centers, name="centers")))

    def __len__(self) -> int:
        return self.centers.shape[0]

    @property
    def balls(self) -> List[Ball]:
        return [Ball(c, self.radius) for c in self.centers]

    def covers(self, norm: NormSpec, x, slack: float = 1e-9) -> bool:
        """Whether `x` lies in the union of the level's balls (within `slack`)."""
        x = check_point(x, self.centers.shape[1])
        return bool(np.min(norm.distances_to(self.centers, x)) <= self.radius + slack)


def lattice_size(m: int) -> int:
    """Number of grid points before pruning, ``(2m+1)^m``."""
    return (2 * m + 1) ** m


@functools.lru_cache(maxsize=64)
def _offsets_cached(norm: NormSpec, cap: int) -> np.ndarray:
    m = norm.m
    if lattice_size(m) > cap:
        raise CapacityError(f"(2m+1)^m = {lattice_size(m)} lattice points exceed the cap {cap}")
    axes = [np.arange(-m, m + 1, dtype=np.int64)] * m
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, m)
    keep = norm.row_norms(grid / m) <= CENTER_DISTANCE_FACTOR + _PRUNE_SLACK
    out = grid[keep]
    out.setflags(write=False)
    return out


def unit_lattice_offsets(norm: NormSpec, cap: int = DEFAULT_LATTICE_CAP) -> np.ndarray:
    """Integer offsets I with centers ``I / m``, in lexicographic order."""
    return _offsets_cached(norm, int(cap))


def unit_lattice_centers(m: int, norm: NormSpec, cap: int = DEFAULT_LATTICE_CAP) -> np.ndarray:
    """Centers of the half-radius balls covering ``B[0; 1]``, one per row.

    Borderline points with ``||c|| = 3/2`` are kept.
    """
    if m != norm.m:
        raise InvalidInputError(f"m={m} does not match the norm dimension {norm.m}")
    return unit_lattice_offsets(norm, cap) / m


def rnd(x):
    """Round half up: ``floor(2x) - floor(x)``."""
    return np.floor(2.0 * np.asarray(x)) - np.floor(np.asarray(x))


def nearest_lattice_center(x, m: int, norm: Optional[NormSpec] = None) -> np.ndarray:
    """The grid center assigned to a point `x` of the unit ball.

    Each coordinate of the result is within ``1/(2m)`` of the matching
    coordinate of `x`, so ``||x - c|| <= 1/2``.
    """
    x = check_point(x, m)
    size = float(norm.row_norms(x[None, :])[0]) if norm is not None else float(np.max(np.abs(x)))
    if size > 1.0 + 1e-12:
        raise InvalidInputError(f"point of norm {size} is outside the unit ball")
    idx = np.clip(rnd(m * (1.0 + x)), 0, 2 * m)
    return -1.0 + idx / m


def refine_ball(b: Ball, norm: NormSpec, cap: int = DEFAULT_LATTICE_CAP) -> List[Ball]:
    """Cover `b` by balls of half its radius, centers ``b.center + b.radius * c``."""
    if b.dim != norm.m:
        raise InvalidInputError("ball dimension does not match the norm")
    centers = b.center + b.radius * unit_lattice_centers(norm.m, norm, cap)
    half = b.radius / 2.0
    return [Ball(c, half) for c in centers]


def dedupe_centers(
    balls: Sequence[Ball],
    origin=None,
    rel_tol: float = 1e-9,
) -> List[Ball]:
    """Drop balls whose centers coincide within ``rel_tol * r`` in the max-coordinate distance.

    All balls must share one radius r. The survivors are returned in
    lexicographic order of their centers; of a group of coincident centers
    the lexicographically first is kept. `origin` only shifts the
    coordinates before comparison.
    """
    if not balls:
        return []
    r = balls[0].radius
    if any(b.radius != r for b in balls):
        raise InvalidInputError("dedupe_centers needs balls of one radius")
    C = np.array([b.center for b in balls])
    if origin is not None:
        C = C - check_point(origin, C.shape[1], "origin")
    tol = rel_tol * r
    order = np.lexsort(C.T[::-1])
    kept: List[int] = []
    first: List[float] = []
    for idx in order:
        c = C[idx]
        lo = bisect.bisect_left(first, c[0] - tol)
        if any(np.max(np.abs(C[kept[j]] - c)) <= tol for j in range(lo, len(kept))):
            continue
        # `first` stays sorted because `order` is lexicographic.
        kept.append(int(idx))
        first.append(float(c[0]))
    return [balls[i] for i in kept]
