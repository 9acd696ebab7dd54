"""Refining cover by defect: locate the source by covering and pruning.

Starting from a ball known to contain the source, every level replaces each
surviving ball by its half-radius lattice cover and discards the children
``B[c; r]`` with ``2r < D(c)``; such a ball cannot contain the source
because ``D(c) <= 2 rho(c, s)`` for the true source s. The process halts
once all surviving centers are pairwise closer than ``2/3 delta`` and the
radius is below ``delta/3``: the source then lies in one of the surviving
balls, so any surviving center is within delta of it.

Ball centers are tracked as integer lattice keys. A ball of radius
``r_k = r 2^-k`` has center ``c0 + (2 r_k / m) K`` and its children have
keys ``2K + I`` for the lattice offsets I, so coincident children of
overlapping parents are detected exactly.
"""

from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, List, Optional

import numpy as np

from .cover import Ball, CoverLevel, unit_lattice_offsets
from .exceptions import EmptyCoverError, InvalidInputError
from .geometry import NormSpec
from .problem import DefectKind, SRProblem, backward_moments, defect, defect_values

__all__ = [
    "Status",
    "Verdict",
    "SolverConfig",
    "NoisyConfig",
    "LevelStats",
    "SolveResult",
    "prune_test",
    "stopping_check",
    "rcd_solve",
    "noisy_solve",
]

EXACT_PAIR_LIMIT = 10**4
_CHUNK = 1 << 15
_PARENT_CHUNK = 2048
_KEY_LIMIT = 2**61
DEFAULT_SLACK = 1e-9


class Status(str, enum.Enum):
    CONVERGED = "converged"
    LEVEL_CAP = "level-cap"
    BALL_CAP = "ball-cap"


class Verdict(str, enum.Enum):
    NEGATIVE = "negative"
    SUSPICIOUS = "suspicious"


@dataclass(frozen=True)
class SolverConfig:
    """Solver settings.

    `prune_slack` is absolute; ``None`` means ``1e-9 * problem.scale``.
    A ball is pruned only when ``2r < D(c) - prune_slack``. That test is a
    proof for D, D1 and DI, whose Lipschitz constant is 2; D2 is accepted
    but gives no such guarantee and shrinks the cover slowly.
    """

    delta: float = 1e-3
    defect_kind: DefectKind = DefectKind.D
    prune_slack: Optional[float] = None
    max_level: int = 60
    dedupe: bool = True
    ball_cap: int = 10**7
    threads: int = 1
    keep_levels: bool = False

    def __post_init__(self):
        if not (self.delta > 0 and math.isfinite(self.delta)):
            raise InvalidInputError(f"delta must be positive, got {self.delta}")
        if int(self.max_level) < 1:
            raise InvalidInputError("max_level must be >= 1")
        if self.prune_slack is not None and not self.prune_slack >= 0:
            raise InvalidInputError("prune_slack must be non-negative")
        if int(self.ball_cap) < 1 or int(self.threads) < 1:
            raise InvalidInputError("ball_cap and threads must be positive")
        object.__setattr__(self, "defect_kind", DefectKind.parse(self.defect_kind))

    def slack_for(self, problem: SRProblem) -> float:
        if self.prune_slack is not None:
            return float(self.prune_slack)
        return DEFAULT_SLACK * problem.scale


@dataclass(frozen=True)
class NoisyConfig:
    """Noise bound ``|xi_i| <= gamma`` on the arrival times plus the base settings."""

    gamma: float = 0.0
    base: SolverConfig = field(default_factory=SolverConfig)

    def __post_init__(self):
        if not (self.gamma >= 0 and math.isfinite(self.gamma)):
            raise InvalidInputError(f"gamma must be non-negative, got {self.gamma}")


@dataclass(frozen=True)
class LevelStats:
    level: int
    radius: float
    count: int
    min_defect: float
    max_defect: float


@dataclass(frozen=True)
class SolveResult:
    approx: np.ndarray
    emission_time: float
    status: Status
    levels: List[LevelStats]
    final: CoverLevel
    delta: float
    diameter: float
    trace: Optional[List[CoverLevel]] = None

    @property
    def converged(self) -> bool:
        return self.status is Status.CONVERGED

    @property
    def halt_level(self) -> int:
        return self.final.level


def prune_test(problem: SRProblem, b: Ball, cfg: SolverConfig) -> Verdict:
    """Classify `b` as negative (provably source-free) or suspicious."""
    d = defect(problem, cfg.defect_kind, b.center)
    if 2.0 * b.radius < d - cfg.slack_for(problem):
        return Verdict.NEGATIVE
    return Verdict.SUSPICIOUS


def _diameter_bound(centers: np.ndarray, norm: NormSpec) -> float:
    # |c'_j - c''_j| <= spread_j and l_p norms are monotone in |x_j|.
    spread = centers.max(axis=0) - centers.min(axis=0)
    return float(norm.row_norms(spread[None, :])[0])


def _all_pairs_below(centers: np.ndarray, norm: NormSpec, threshold: float) -> bool:
    k = centers.shape[0]
    rows = max(1, _CHUNK // max(k, 1))
    for start in range(0, k - 1, rows):
        block = centers[start:start + rows]
        D = block[:, None, :] - centers[None, :, :]
        d = norm.row_norms(D.reshape(-1, centers.shape[1]))
        if float(d.max()) >= threshold:
            return False
    return True


def stopping_check(level: CoverLevel, delta: float, norm: NormSpec) -> bool:
    """Both halting conditions: radius below delta/3, centers pairwise closer than 2/3 delta.

    Above ``EXACT_PAIR_LIMIT`` centers only the spread bound is consulted,
    which can answer False where the exact check would say True but never
    the other way round.
    """
    if len(level) == 0:
        raise InvalidInputError("stopping_check needs a non-empty level")
    if not level.radius < delta / 3.0:
        return False
    if len(level) == 1:
        return True
    threshold = 2.0 * delta / 3.0
    if _diameter_bound(level.centers, norm) < threshold:
        return True
    if len(level) > EXACT_PAIR_LIMIT:
        return False
    return _all_pairs_below(level.centers, norm, threshold)


def _evaluate(stat: Callable[[np.ndarray], np.ndarray], X: np.ndarray, threads: int) -> np.ndarray:
    k = X.shape[0]
    if threads <= 1 or k <= _CHUNK:
        return stat(X)
    chunks = [X[i:i + _CHUNK] for i in range(0, k, _CHUNK)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return np.concatenate(list(pool.map(stat, chunks)))


def _lex_unique(K: np.ndarray) -> np.ndarray:
    if K.shape[0] <= 1:
        return K
    lo = K.min(axis=0)
    width = K.max(axis=0) - lo + 1
    if float(np.prod(width.astype(float))) < 2.0**62:
        # Mixed-radix code, first coordinate most significant: integer order
        # of the codes is the lexicographic order of the rows.
        strides = np.ones(K.shape[1], dtype=np.int64)
        for j in range(K.shape[1] - 2, -1, -1):
            strides[j] = strides[j + 1] * width[j + 1]
        codes = np.unique((K - lo) @ strides)
        out = np.empty((codes.size, K.shape[1]), dtype=np.int64)
        for j in range(K.shape[1]):
            out[:, j], codes = np.divmod(codes, strides[j])
        return out + lo
    order = np.lexsort(K.T[::-1])
    K = K[order]
    fresh = np.ones(K.shape[0], dtype=bool)
    fresh[1:] = np.any(K[1:] != K[:-1], axis=1)
    return K[fresh]


def _children(K: np.ndarray, offsets: np.ndarray, dedupe: bool) -> np.ndarray:
    m = K.shape[1]
    if not dedupe:
        return ((2 * K)[:, None, :] + offsets[None, :, :]).reshape(-1, m)
    parts = []
    for start in range(0, K.shape[0], _PARENT_CHUNK):
        block = K[start:start + _PARENT_CHUNK]
        parts.append(_lex_unique(((2 * block)[:, None, :] + offsets[None, :, :]).reshape(-1, m)))
    return _lex_unique(np.concatenate(parts)) if len(parts) > 1 else parts[0]


def _lex_first(C: np.ndarray) -> np.ndarray:
    return C[np.lexsort(C.T[::-1])[0]]


@dataclass
class _CoverRun:
    status: Status
    levels: List[LevelStats]
    final: CoverLevel
    trace: Optional[List[CoverLevel]]


def _run_cover(
    problem: SRProblem,
    cfg: SolverConfig,
    stat: Callable[[np.ndarray], np.ndarray],
    should_halt: Callable[[CoverLevel], bool],
) -> _CoverRun:
    ball = problem.initial_ball
    if ball is None:
        raise InvalidInputError("the problem has no initial ball known to contain the source")
    norm = problem.norm
    m = norm.m
    c0, r = ball.center, ball.radius
    slack = cfg.slack_for(problem)
    offsets = unit_lattice_offsets(norm)

    K = np.zeros((1, m), dtype=np.int64)
    centers = c0[None, :].copy()
    vals = stat(centers)
    level = CoverLevel(0, r, centers)
    levels = [LevelStats(0, r, 1, float(vals[0]), float(vals[0]))]
    trace = [level] if cfg.keep_levels else None
    status = Status.LEVEL_CAP

    for k in range(1, int(cfg.max_level) + 1):
        r_k = r * 2.0 ** -k
        children = _children(K, offsets, cfg.dedupe)
        if children.size and int(np.abs(children).max()) >= _KEY_LIMIT:
            break
        cand = c0 + (2.0 * r_k / m) * children
        vals = _evaluate(stat, cand, int(cfg.threads))
        keep = ~(2.0 * r_k < vals - slack)
        if not keep.any():
            raise EmptyCoverError(
                f"all {children.shape[0]} balls of level {k} were pruned; the source is not in "
                "the initial ball, the times are inconsistent, or the prune slack is too small"
            )
        K = children[keep]
        vals = vals[keep]
        level = CoverLevel(k, r_k, cand[keep])
        levels.append(LevelStats(k, r_k, int(K.shape[0]), float(vals.min()), float(vals.max())))
        if trace is not None:
            trace.append(level)
        if should_halt(level):
            status = Status.CONVERGED
            break
        if K.shape[0] > cfg.ball_cap:
            status = Status.BALL_CAP
            break
    return _CoverRun(status, levels, level, trace)


def rcd_solve(problem: SRProblem, cfg: SolverConfig = SolverConfig()) -> SolveResult:
    """Approximate the source to within ``cfg.delta``.

    Assumes the source is unique and lies in ``problem.initial_ball``;
    neither can be verified here. When the result is converged the
    returned point is within delta of the source. On a cap status the
    result is partial and carries no precision guarantee.

    Raises
    ------
    EmptyCoverError
        When a level loses every ball, which exact data never causes.
    """
    kind = cfg.defect_kind
    run = _run_cover(
        problem,
        cfg,
        lambda X: defect_values(problem, kind, X),
        lambda lvl: stopping_check(lvl, cfg.delta, problem.norm),
    )
    # Lexicographically smallest center as the representative point.
    approx = _lex_first(run.final.centers)
    return SolveResult(
        approx=approx,
        emission_time=float(np.mean(backward_moments(problem, approx))),
        status=run.status,
        levels=run.levels,
        final=run.final,
        delta=cfg.delta,
        diameter=_diameter_bound(run.final.centers, problem.norm),
        trace=run.trace,
    )


def noisy_solve(problem: SRProblem, cfg: NoisyConfig = NoisyConfig()) -> SolveResult:
    """Cover the zero set of ``|D(c) - 2 gamma|`` for times perturbed by at most gamma.

    Halts on the radius condition alone since the cover shrinks onto a
    surface around the source rather than a point. The returned point is
    the coordinate-wise mean of the final centers; no precision is
    guaranteed, `diameter` indicates the spread of the final cover.
    """
    base = cfg.base
    kind = base.defect_kind
    two_gamma = 2.0 * float(cfg.gamma)

    def stat(X):
        return np.abs(defect_values(problem, kind, X) - two_gamma)

    run = _run_cover(problem, base, stat, lambda lvl: lvl.radius < base.delta / 3.0)
    approx = run.final.centers.mean(axis=0)
    return SolveResult(
        approx=approx,
        emission_time=float(np.mean(backward_moments(problem, approx))),
        status=run.status,
        levels=run.levels,
        final=run.final,
        delta=base.delta,
        diameter=_diameter_bound(run.final.centers, problem.norm),
        trace=run.trace,
    )


def with_threads(cfg: SolverConfig, threads: int) -> SolverConfig:
    return replace(cfg, threads=int(threads))
