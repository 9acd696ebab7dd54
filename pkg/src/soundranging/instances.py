"""Seeded generators for test instances and the two published sensor sets."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .cover import CONTAINMENT_FACTOR, Ball
from .exceptions import DegenerateLayoutError
from .geometry import NormSpec
from .problem import GroundTruth, SRProblem, forward_simulate, make_unique_layout

__all__ = [
    "Instance",
    "sample_in_ball",
    "random_unique_layout",
    "random_instance",
    "example1",
    "example2",
    "EXAMPLE1_SENSORS",
    "EXAMPLE2_SENSORS",
]

EXAMPLE1_SENSORS = np.array([(8.0, 6.0), (5.0, 5.0), (-2.0, 6.0), (-6.0, 4.0), (-10.0, 2.0)])
EXAMPLE2_SENSORS = np.array(
    [(1.885, 0.014), (2.523, -0.76), (2.552, -0.756), (2.94, -0.78), (2.081, 0.986)]
)
# Minimum ratio of smallest to largest singular value of the base differences.
_MIN_CONDITIONING = 0.1


@dataclass(frozen=True)
class Instance:
    problem: SRProblem
    truth: GroundTruth


def sample_in_ball(rng: np.random.Generator, ball: Ball, norm: NormSpec, size: int = 1) -> np.ndarray:
    """Uniform samples from `ball` by rejection from its bounding box."""
    m = norm.m
    out = np.empty((0, m))
    while out.shape[0] < size:
        U = rng.uniform(-1.0, 1.0, size=(max(2 * (size - out.shape[0]), 16), m))
        U = U[norm.row_norms(U) <= 1.0]
        out = np.vstack([out, ball.center + ball.radius * U])
    return out[:size]


def _regular_simplex(m: int) -> np.ndarray:
    """m+1 unit vectors in R^m pointing at the vertices of a regular simplex."""
    V = np.eye(m + 1) - 1.0 / (m + 1)
    Q, _ = np.linalg.qr(V.T)
    U = V @ Q[:, :m]
    return U / np.linalg.norm(U, axis=1, keepdims=True)


def _random_rotation(rng: np.random.Generator, m: int) -> np.ndarray:
    Q, R = np.linalg.qr(rng.normal(size=(m, m)))
    return Q * np.sign(np.diag(R))


def _affine_pieces_ok(sensors: np.ndarray, center: np.ndarray, reach: float, norm: NormSpec) -> bool:
    """For l_1 / l_inf: every distance rho(., r_i) is affine on ``B[center; reach]``
    and the gradient differences span R^m, which makes the zero of the
    defect unique on that ball."""
    D = center - sensors
    m = norm.m
    if norm.p == 1.0:
        # The l_1 ball of radius `reach` moves each coordinate by at most `reach`.
        if np.min(np.abs(D)) <= reach:
            return False
        G = np.sign(D)
    else:
        # Within the ball each coordinate moves by at most `reach`, so the
        # dominant coordinate is stable if it leads by more than 2 * reach.
        A = np.sort(np.abs(D), axis=1)
        if m > 1 and np.min(A[:, -1] - A[:, -2]) <= 2.0 * reach:
            return False
        j = np.argmax(np.abs(D), axis=1)
        G = np.zeros_like(D)
        G[np.arange(D.shape[0]), j] = np.sign(D[np.arange(D.shape[0]), j])
    sv = np.linalg.svd(G[1:] - G[0], compute_uv=False)
    return bool(sv[-1] > _MIN_CONDITIONING * sv[0])


def _face_directions(rng: np.random.Generator, m: int, p: float, count: int) -> np.ndarray:
    """Random directions near the centers of faces of the unit ball of l_1 / l_inf."""
    if p == 1.0:
        U = rng.choice([-1.0, 1.0], size=(count, m)) / np.sqrt(m)
    else:
        U = np.zeros((count, m))
        U[np.arange(count), rng.integers(0, m, size=count)] = rng.choice([-1.0, 1.0], size=count)
    U = U + rng.normal(scale=0.1, size=U.shape)
    return U / np.linalg.norm(U, axis=1, keepdims=True)


def random_unique_layout(
    rng: np.random.Generator,
    m: int,
    center=None,
    radius: float = 1.0,
    norm: Optional[NormSpec] = None,
    spread: float = 12.0,
    max_tries: int = 1000,
) -> np.ndarray:
    """m+2 sensors ``r_1..r_{m+1}, 2 r_1 - r_2`` at distance about ``spread * radius`` from `center`.

    For the Euclidean norm (and in one dimension) the base is a randomly
    rotated regular simplex surrounding ``B[center; radius]``. For l_1 and
    l_inf in two or more dimensions the base directions are drawn near face
    centers of the unit ball and redrawn until every distance to a sensor is
    affine on ``B[center; 4 radius]``, the region the cover solver visits,
    with gradient differences spanning R^m. That makes the source the only
    zero of the defect there; without it these norms readily produce flat
    zero sets.
    """
    c = np.zeros(m) if center is None else np.asarray(center, dtype=float)
    norm = NormSpec(2.0, m) if norm is None else norm
    polyhedral = m > 1 and (norm.p == 1.0 or np.isinf(norm.p))
    reach = CONTAINMENT_FACTOR * radius
    for _ in range(max_tries):
        if polyhedral:
            U = _face_directions(rng, m, norm.p, m + 1)
        else:
            U = _regular_simplex(m) @ _random_rotation(rng, m).T
        base = c + spread * radius * U
        sv = np.linalg.svd(base[1:] - base[0], compute_uv=False)
        if sv[-1] <= _MIN_CONDITIONING * sv[0]:
            continue
        sensors = make_unique_layout(m, base)
        if not polyhedral or _affine_pieces_ok(sensors, c, reach, norm):
            return sensors
    raise DegenerateLayoutError(f"no admissible sensor layout found in {max_tries} tries")


def random_instance(
    seed: int,
    m: int,
    p=2.0,
    radius: Optional[float] = None,
    center=None,
    sensor_spread: float = 12.0,
    emission_time: Optional[float] = None,
) -> Instance:
    """A forward-simulated instance with the source uniform in the initial ball.

    Sensors come from :func:`random_unique_layout` with circumradius
    ``sensor_spread * radius``.
    """
    rng = np.random.default_rng(seed)
    norm = NormSpec(p, m)
    if radius is None:
        radius = float(rng.uniform(1.0, 32.0))
    c0 = rng.uniform(-radius, radius, size=m) if center is None else np.asarray(center, dtype=float)
    ball = Ball(c0, radius)
    sensors = random_unique_layout(rng, m, c0, radius, norm, sensor_spread)
    source = sample_in_ball(rng, ball, norm)[0]
    t0 = float(rng.uniform(-radius, radius)) if emission_time is None else float(emission_time)
    truth = GroundTruth(source, t0)
    times = forward_simulate(truth, sensors, norm)
    return Instance(SRProblem(sensors, times, norm, ball), truth)


def _example(sensors: np.ndarray, radius: float) -> Instance:
    norm = NormSpec(2.0, 2)
    truth = GroundTruth(np.zeros(2), 0.0)
    times = forward_simulate(truth, sensors, norm)
    return Instance(SRProblem(sensors, times, norm, Ball(np.zeros(2), radius)), truth)


def example1(radius: float = 32.0) -> Instance:
    """Five Euclidean sensors with a false D2 minimum near (-3.6901, 21.5627); source at the origin."""
    return _example(EXAMPLE1_SENSORS, radius)


def example2(radius: float = 4.0) -> Instance:
    """Sensors where descent from the nearest sensor reaches a false minimum near (2.039, 0.253)."""
    return _example(EXAMPLE2_SENSORS, radius)
