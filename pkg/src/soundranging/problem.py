"""The sound-ranging instance: arrival times, backward moments and defects.

Units: the wave speed is 1, so times and distances share one unit.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from ._validation import check_point, check_points, frozen
from .cover import Ball
from .exceptions import DegenerateLayoutError, InvalidInputError, InvalidInstanceError
from .geometry import NormSpec

__all__ = [
    "DefectKind",
    "GroundTruth",
    "SRProblem",
    "forward_simulate",
    "backward_moments",
    "backward_moments_many",
    "defect",
    "defect_values",
    "interval_defect",
    "make_unique_layout",
    "MIN_SEPARATION",
]

# Relative to the instance scale max(1, max |coordinate|).
MIN_SEPARATION = 1e-9


class DefectKind(str, enum.Enum):
    """Which defect statistic of the backward moments to use.

    D   mean absolute deviation from the mean (the default statistic)
    D1  mean absolute pairwise difference, ``(1/n^2) sum_{i,j} |tau_i - tau_j|``
    D2  population variance
    DI  spread ``max tau - min tau``
    """

    D = "D"
    D1 = "D1"
    D2 = "D2"
    DI = "DI"

    @classmethod
    def parse(cls, value) -> "DefectKind":
        if isinstance(value, cls):
            return value
        key = str(value).strip().upper()
        if key == "I":
            key = "DI"
        try:
            return cls(key)
        except ValueError:
            raise InvalidInputError(f"unknown defect kind {value!r}; use one of D, D1, D2, DI") from None


def _instance_scale(sensors: np.ndarray) -> float:
    return max(1.0, float(np.max(np.abs(sensors))))


def _check_distinct(sensors: np.ndarray, norm: NormSpec) -> None:
    n = sensors.shape[0]
    tol = MIN_SEPARATION * _instance_scale(sensors)
    for i in range(n - 1):
        d = norm.distances_to(sensors[i + 1:], sensors[i])
        if d.size and float(d.min()) <= tol:
            j = i + 1 + int(np.argmin(d))
            raise InvalidInstanceError(f"sensors {i} and {j} coincide (distance {float(d.min()):.3g})")


@dataclass(frozen=True)
class GroundTruth:
    source: np.ndarray
    emission_time: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "source", frozen(check_point(self.source, name="source")))
        t0 = float(self.emission_time)
        if not np.isfinite(t0):
            raise InvalidInputError("emission_time must be finite")
        object.__setattr__(self, "emission_time", t0)


@dataclass(frozen=True)
class SRProblem:
    """Sensors ``r_i``, arrival times ``t_i``, the norm and a ball known to hold the source.

    `initial_ball` may be omitted for defect-landscape studies; the cover
    solvers require it.
    """

    sensors: np.ndarray
    times: np.ndarray
    norm: NormSpec
    initial_ball: Optional[Ball] = None

    def __post_init__(self):
        S = check_points(self.sensors, dim=self.norm.m, name="sensors")
        t = np.asarray(self.times, dtype=np.float64).reshape(-1)
        if t.shape[0] != S.shape[0]:
            raise InvalidInstanceError(f"{S.shape[0]} sensors but {t.shape[0]} arrival times")
        if not np.all(np.isfinite(t)):
            raise InvalidInstanceError("arrival times must be finite")
        _check_distinct(S, self.norm)
        if self.initial_ball is not None and self.initial_ball.dim != self.norm.m:
            raise InvalidInstanceError("initial ball dimension does not match the norm")
        object.__setattr__(self, "sensors", frozen(S))
        object.__setattr__(self, "times", frozen(t))

    @property
    def n(self) -> int:
        return self.sensors.shape[0]

    @property
    def m(self) -> int:
        return self.norm.m

    @property
    def scale(self) -> float:
        """Magnitude of the numbers involved; used to size absolute slacks."""
        s = max(_instance_scale(self.sensors), float(np.max(np.abs(self.times))))
        if self.initial_ball is not None:
            s = max(s, float(np.max(np.abs(self.initial_ball.center))) + self.initial_ball.radius)
        return s

    @property
    def max_sensor_distance(self) -> float:
        """``M = max_{i,j} rho(r_i, r_j)``."""
        best = 0.0
        for i in range(self.n - 1):
            best = max(best, float(self.norm.distances_to(self.sensors[i + 1:], self.sensors[i]).max()))
        return best

    def with_times(self, times) -> "SRProblem":
        return SRProblem(self.sensors, times, self.norm, self.initial_ball)

    def with_ball(self, ball: Optional[Ball]) -> "SRProblem":
        return SRProblem(self.sensors, self.times, self.norm, ball)


def forward_simulate(truth: GroundTruth, sensors, norm: NormSpec) -> np.ndarray:
    """Arrival times ``t_i = t0 + rho(r_i, s)`` in sensor order."""
    S = check_points(sensors, dim=norm.m, name="sensors")
    s = check_point(truth.source, norm.m, "source")
    _check_distinct(S, norm)
    return truth.emission_time + norm.distances_to(S, s)


def backward_moments_many(problem: SRProblem, X) -> np.ndarray:
    """``tau_i(x) = t_i - rho(x, r_i)`` for each row x of `X`; shape (k, n)."""
    X = check_points(X, dim=problem.m)
    out = np.empty((X.shape[0], problem.n))
    for i in range(problem.n):
        out[:, i] = problem.times[i] - problem.norm.distances_to(X, problem.sensors[i])
    return out


def backward_moments(problem: SRProblem, x) -> np.ndarray:
    x = check_point(x, problem.m)
    return backward_moments_many(problem, x[None, :])[0]


def _row_mean(T: np.ndarray) -> np.ndarray:
    acc = T[:, 0].copy()
    for i in range(1, T.shape[1]):
        acc += T[:, i]
    return acc / T.shape[1]


def _defect_from_moments(T: np.ndarray, kind: DefectKind) -> np.ndarray:
    n = T.shape[1]
    if kind is DefectKind.DI:
        return T.max(axis=1) - T.min(axis=1)
    if kind is DefectKind.D1:
        Ts = np.sort(T, axis=1)
        acc = np.zeros(T.shape[0])
        for k in range(n):
            acc += (2 * k - n + 1) * Ts[:, k]
        return 2.0 * acc / (n * n)
    mu = _row_mean(T)
    acc = np.zeros(T.shape[0])
    if kind is DefectKind.D:
        for i in range(n):
            acc += np.abs(T[:, i] - mu)
    else:
        for i in range(n):
            d = T[:, i] - mu
            acc += d * d
    return acc / n


def defect_values(problem: SRProblem, kind, X) -> np.ndarray:
    """Vectorised defect at every row of `X`."""
    return _defect_from_moments(backward_moments_many(problem, X), DefectKind.parse(kind))


def defect(problem: SRProblem, kind, x) -> float:
    """Defect of the backward moments at `x`; zero exactly at a solution."""
    x = check_point(x, problem.m)
    return float(defect_values(problem, kind, x[None, :])[0])


def interval_defect(problem: SRProblem, x) -> float:
    """``max_i tau_i(x) - min_i tau_i(x)``; a ball B[c; r] holding the source needs ``2r >= I(c)``."""
    return defect(problem, DefectKind.DI, x)


def make_unique_layout(m: int, base: Sequence) -> np.ndarray:
    """Append ``r_{m+2} = 2 r_1 - r_2`` to m+1 affinely independent points.

    In Euclidean space the resulting m+2 sensors determine the source
    uniquely. For other norms the layout is only a heuristic.
    """
    B = check_points(base, dim=m, name="base")
    if B.shape[0] != m + 1:
        raise InvalidInputError(f"need m+1 = {m + 1} base points, got {B.shape[0]}")
    diffs = B[1:] - B[0]
    sv = np.linalg.svd(diffs, compute_uv=False)
    scale = max(float(np.max(np.abs(diffs))), np.finfo(float).tiny)
    if sv[-1] <= 1e-10 * scale:
        raise DegenerateLayoutError("base points are affinely dependent")
    return np.vstack([B, 2.0 * B[0] - B[1]])
