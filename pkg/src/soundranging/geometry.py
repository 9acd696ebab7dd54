"""l_p norms on R^m, distances and Auerbach-basis validation.

Every other module measures distances through :class:`NormSpec`. To plug in
a different norm, subclass it and override :meth:`NormSpec.row_norms`; the
lattice cover stays valid as long as the standard basis is an Auerbach
basis for the new norm (true for every l_p and, more generally, for any
norm that is monotone in the absolute values of the coordinates and has
``||e_j|| = 1``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._validation import check_point, check_points
from .exceptions import DegenerateBasisError, InvalidInputError

__all__ = [
    "NormSpec",
    "Basis",
    "AuerbachReport",
    "norm",
    "distance",
    "validate_auerbach",
    "standard_basis",
    "conjugate_exponent",
]


def _parse_p(p) -> float:
    if isinstance(p, str):
        key = p.strip().lower()
        if key in {"inf", "infinity", "max", "oo"}:
            return math.inf
        p = float(key)
    p = float(p)
    if math.isnan(p) or p < 1.0:
        raise InvalidInputError(f"norm exponent p must lie in [1, inf], got {p}")
    return p


def conjugate_exponent(p: float) -> float:
    """Return q with 1/p + 1/q = 1 (q = inf for p = 1, q = 1 for p = inf)."""
    p = _parse_p(p)
    if p == 1.0:
        return math.inf
    if math.isinf(p):
        return 1.0
    return p / (p - 1.0)


def _lp_rows(D: np.ndarray, p: float) -> np.ndarray:
    # Column-by-column accumulation keeps each row's result independent of
    # how many rows are evaluated together (bit-stable under chunking).
    A = np.abs(D)
    m = A.shape[1]
    if p == 1.0:
        out = A[:, 0].copy()
        for j in range(1, m):
            out += A[:, j]
        return out
    if math.isinf(p):
        out = A[:, 0].copy()
        for j in range(1, m):
            np.maximum(out, A[:, j], out=out)
        return out
    if m == 1:
        return A[:, 0].copy()
    # Scale by the largest entry so powers neither overflow nor underflow.
    scale = A[:, 0].copy()
    for j in range(1, m):
        np.maximum(scale, A[:, j], out=scale)
    safe = np.where(scale > 0.0, scale, 1.0)
    if p == 2.0:
        B = A / safe[:, None]
        out = B[:, 0] * B[:, 0]
        for j in range(1, m):
            out += B[:, j] * B[:, j]
        return safe * np.sqrt(out)
    out = (A[:, 0] / safe) ** p
    for j in range(1, m):
        out += (A[:, j] / safe) ** p
    return np.where(scale > 0.0, safe * out ** (1.0 / p), 0.0)


@dataclass(frozen=True)
class NormSpec:
    """The norm ``||.||_p`` on ``R^m``; ``p`` may be ``math.inf``."""

    p: float = 2.0
    m: int = 2

    def __post_init__(self):
        object.__setattr__(self, "p", _parse_p(self.p))
        if int(self.m) != self.m or self.m < 1:
            raise InvalidInputError(f"dimension m must be a positive integer, got {self.m}")
        object.__setattr__(self, "m", int(self.m))

    @property
    def dual_q(self) -> float:
        return conjugate_exponent(self.p)

    @property
    def p_label(self) -> str:
        return "inf" if math.isinf(self.p) else repr(self.p)

    def row_norms(self, D: np.ndarray) -> np.ndarray:
        """Norm of every row of a (k, m) array."""
        return _lp_rows(D, self.p)

    def distances_to(self, X: np.ndarray, y: np.ndarray) -> np.ndarray:
        """``rho(X[i], y)`` for every row of `X`."""
        return self.row_norms(X - y)

    def equivalence_to_max(self) -> float:
        """Constant C with ``||x|| <= C * max_j |x_j|``."""
        if math.isinf(self.p):
            return 1.0
        return float(self.m) ** (1.0 / self.p)


def norm(spec: NormSpec, x) -> float:
    x = check_point(x, spec.m)
    return float(spec.row_norms(x[None, :])[0])


def distance(spec: NormSpec, x, y) -> float:
    x = check_point(x, spec.m, "x")
    y = check_point(y, spec.m, "y")
    return float(spec.row_norms((x - y)[None, :])[0])


@dataclass(frozen=True)
class Basis:
    """A basis of ``R^m`` stored as rows; ``dual_q`` measures the coordinate functionals."""

    vectors: np.ndarray
    dual_q: float = 2.0

    def __post_init__(self):
        V = check_points(self.vectors, name="basis")
        if V.shape[0] != V.shape[1]:
            raise InvalidInputError(f"basis must hold m vectors of dimension m, got shape {V.shape}")
        V = V.copy()
        V.setflags(write=False)
        object.__setattr__(self, "vectors", V)
        object.__setattr__(self, "dual_q", _parse_p(self.dual_q))


def standard_basis(spec: NormSpec) -> Basis:
    return Basis(np.eye(spec.m), spec.dual_q)


@dataclass(frozen=True)
class AuerbachReport:
    passed: bool
    max_violation: float
    normality: np.ndarray = field(repr=False)
    dual_normality: np.ndarray = field(repr=False)
    biorthogonality: float = 0.0


def validate_auerbach(spec: NormSpec, basis: Basis, tol: float = 1e-12) -> AuerbachReport:
    """Check ``||e_j|| = ||f_j||_* = 1`` and ``f_i(e_j) = delta_ij``.

    The functionals are the coordinate functionals of `basis`, i.e. the rows
    of ``inv(E^T)``; their dual norm is the l_q norm with ``q = basis.dual_q``.

    Raises
    ------
    DegenerateBasisError
        If the vectors are linearly dependent (relative smallest singular
        value below 1e-10).
    """
    E = basis.vectors
    if E.shape[1] != spec.m:
        raise InvalidInputError(f"basis dimension {E.shape[1]} does not match m={spec.m}")
    sv = np.linalg.svd(E, compute_uv=False)
    if sv[0] == 0.0 or sv[-1] / sv[0] < 1e-10:
        raise DegenerateBasisError("basis vectors are linearly dependent")
    F = np.linalg.inv(E.T)
    norms_e = spec.row_norms(E)
    norms_f = _lp_rows(F, basis.dual_q)
    bio = float(np.max(np.abs(F @ E.T - np.eye(spec.m))))
    violation = max(
        float(np.max(np.abs(norms_e - 1.0))),
        float(np.max(np.abs(norms_f - 1.0))),
        bio,
    )
    return AuerbachReport(
        passed=violation <= tol,
        max_violation=violation,
        normality=norms_e,
        dual_normality=norms_f,
        biorthogonality=bio,
    )
