"""Independent checks on defect landscapes.

* :func:`grid_argmin_defect` brute-forces the minimum of a defect over an
  axis-aligned grid, as an oracle for the cover solver.
* :func:`gradient_descent_D2` is plain steepest descent on the variance
  defect with central differences and Armijo backtracking; it exhibits the
  false local minima that make descent unreliable for this problem.
* :func:`verify_local_min` samples a neighbourhood of a candidate minimum.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from ._validation import check_point
from .cover import Ball
from .exceptions import CapacityError, InvalidInputError, NumericalError
from .problem import DefectKind, SRProblem, defect_values

__all__ = [
    "GridOracleConfig",
    "GridResult",
    "GradConfig",
    "GradResult",
    "grid_argmin_defect",
    "gradient_descent_D2",
    "fd_gradient_D2",
    "verify_local_min",
]

GRID_CAP = 10**8
_GRID_CHUNK = 1 << 18
# Stencil centers closer than this (relative to the instance scale) to a
# sensor are nudged off it; the distance is not differentiable there.
_SENSOR_GUARD = 1e-9


@dataclass(frozen=True)
class GridOracleConfig:
    """Grid of spacing `step` centered on ``bounds.center``, restricted to `bounds`."""

    step: float
    bounds: Ball
    cap: int = GRID_CAP
    threads: int = 1

    def __post_init__(self):
        if not (self.step > 0 and math.isfinite(self.step)):
            raise InvalidInputError(f"grid step must be positive, got {self.step}")


@dataclass(frozen=True)
class GridResult:
    point: np.ndarray
    value: float
    evaluated: int

    def __iter__(self):
        return iter((self.point, self.value))


def grid_argmin_defect(problem: SRProblem, kind, cfg: GridOracleConfig) -> GridResult:
    """Exhaustive minimum of the defect over the grid points inside ``cfg.bounds``.

    Ties go to the lexicographically smallest grid point.
    """
    kind = DefectKind.parse(kind)
    norm = problem.norm
    m = norm.m
    b = cfg.bounds
    if b.dim != m:
        raise InvalidInputError("grid bounds dimension does not match the problem")
    half = int(math.floor(b.radius / cfg.step + 1e-9))
    side = 2 * half + 1
    total = side**m
    if total > cfg.cap:
        raise CapacityError(f"grid of {side}^{m} = {total} points exceeds the cap {cfg.cap}")

    def scan(lo_hi):
        lo, hi = lo_hi
        idx = np.stack(np.unravel_index(np.arange(lo, hi), (side,) * m), axis=1) - half
        X = b.center + cfg.step * idx
        X = X[norm.row_norms(X - b.center) <= b.radius * (1.0 + 1e-12)]
        if X.shape[0] == 0:
            return None, math.inf, 0
        vals = defect_values(problem, kind, X)
        i = int(np.argmin(vals))
        return X[i], float(vals[i]), X.shape[0]

    spans = [(lo, min(lo + _GRID_CHUNK, total)) for lo in range(0, total, _GRID_CHUNK)]
    if cfg.threads > 1 and len(spans) > 1:
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            parts = list(pool.map(scan, spans))
    else:
        parts = [scan(s) for s in spans]
    best_x, best_v, count = None, math.inf, 0
    # Chunks are in lexicographic order, so strict < keeps the first minimiser.
    for x, v, k in parts:
        count += k
        if x is not None and v < best_v:
            best_x, best_v = x, v
    return GridResult(np.asarray(best_x), best_v, count)


@dataclass(frozen=True)
class GradConfig:
    """Steepest-descent settings.

    ``fd_step=None`` uses ``1e-6 * problem.scale``.
    """

    start: np.ndarray
    fd_step: Optional[float] = None
    step_init: float = 1.0
    shrink: float = 0.5
    tol_grad: float = 1e-10
    max_iter: int = 100_000
    armijo: float = 1e-4

    def __post_init__(self):
        object.__setattr__(self, "start", check_point(self.start, name="start"))
        if not 0.0 < self.shrink < 1.0:
            raise InvalidInputError("shrink must lie in (0, 1)")
        for name in ("step_init", "tol_grad", "armijo"):
            if not getattr(self, name) > 0:
                raise InvalidInputError(f"{name} must be positive")
        if self.fd_step is not None and not self.fd_step > 0:
            raise InvalidInputError("fd_step must be positive")
        if int(self.max_iter) < 0:
            raise InvalidInputError("max_iter must be non-negative")


@dataclass(frozen=True)
class GradResult:
    point: np.ndarray
    value: float
    iterations: int
    history: List[float] = field(default_factory=list, repr=False)
    converged: bool = False

    def __iter__(self):
        return iter((self.point, self.value, self.iterations))


def _d2(problem: SRProblem, X: np.ndarray) -> np.ndarray:
    return defect_values(problem, DefectKind.D2, X)


def fd_gradient_D2(problem: SRProblem, x, h: float) -> np.ndarray:
    """Central-difference gradient of D2 at `x` with step `h`."""
    x = check_point(x, problem.m)
    m = problem.m
    guard = _SENSOR_GUARD * problem.scale
    if float(problem.norm.distances_to(problem.sensors, x).min()) <= guard:
        # Shift the stencil off the sensor along the first axis.
        x = x.copy()
        x[0] += 2.0 * h
    E = h * np.eye(m)
    vals = _d2(problem, np.vstack([x + E, x - E]))
    return (vals[:m] - vals[m:]) / (2.0 * h)


def gradient_descent_D2(problem: SRProblem, cfg: GradConfig) -> GradResult:
    """Minimise D2 from ``cfg.start`` by steepest descent.

    Each iteration halves (by ``cfg.shrink``) a trial step starting from
    ``cfg.step_init`` until the Armijo condition holds. Stops when the
    max-norm of the gradient drops below ``cfg.tol_grad``, when no step
    decreases D2 any more, or after ``cfg.max_iter`` iterations.
    """
    x = check_point(cfg.start, problem.m, "start").copy()
    h = cfg.fd_step if cfg.fd_step is not None else 1e-6 * problem.scale
    f = float(_d2(problem, x[None, :])[0])
    history = [f]
    converged = False
    it = 0
    while it < cfg.max_iter:
        if not math.isfinite(f):
            raise NumericalError(f"non-finite D2 at {x}")
        g = fd_gradient_D2(problem, x, h)
        if not np.all(np.isfinite(g)):
            raise NumericalError(f"non-finite gradient at {x}")
        if float(np.max(np.abs(g))) < cfg.tol_grad:
            converged = True
            break
        gg = float(g @ g)
        alpha = cfg.step_init
        accepted = False
        while alpha * math.sqrt(gg) > 1e-16 * max(1.0, float(np.max(np.abs(x)))):
            trial = x - alpha * g
            ft = float(_d2(problem, trial[None, :])[0])
            if ft <= f - cfg.armijo * alpha * gg:
                accepted = True
                break
            alpha *= cfg.shrink
        if not accepted:
            # No representable step decreases D2: stationary to working precision.
            converged = True
            break
        x, f = trial, ft
        history.append(f)
        it += 1
    return GradResult(x, f, it, history, converged)


def verify_local_min(
    problem: SRProblem,
    kind,
    x,
    radius: float,
    samples: int = 1000,
    seed: int = 0,
    slack: float = 1e-12,
) -> bool:
    """True iff no sampled point within `radius` of `x` has a smaller defect (up to `slack`)."""
    from .instances import sample_in_ball

    if not radius > 0:
        raise InvalidInputError("radius must be positive")
    if samples < 100:
        raise InvalidInputError("use at least 100 samples")
    x = check_point(x, problem.m)
    rng = np.random.default_rng(seed)
    X = sample_in_ball(rng, Ball(x, radius), problem.norm, samples)
    vals = defect_values(problem, kind, X)
    f0 = float(defect_values(problem, kind, x[None, :])[0])
    return bool(np.all(vals >= f0 - slack))


def locate_false_minimum(problem: SRProblem, start, **kwargs) -> Tuple[np.ndarray, float]:
    """Convenience wrapper: descend from `start` and return ``(point, D2)``."""
    res = gradient_descent_D2(problem, GradConfig(start=start, **kwargs))
    return res.point, res.value
