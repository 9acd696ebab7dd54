"""scikit-learn style wrapper around the cover solvers.

``fit(X, y)`` takes sensor positions as rows of X and their arrival times
as y; the fitted source and emission time are then used by ``predict`` to
forecast arrival times at new sensor positions.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .cover import Ball
from .geometry import NormSpec
from .problem import DefectKind, SRProblem
from .solver import NoisyConfig, SolverConfig, noisy_solve, rcd_solve


class SoundRangingLocator(RegressorMixin, BaseEstimator):
    """Estimate a source position from sensor positions and arrival times.

    Parameters
    ----------
    radius : float
        Radius of a ball known to contain the source. Required.
    center : array-like of shape (m,), default=None
        Center of that ball; the sensor centroid when omitted.
    p : float or "inf", default=2.0
        Exponent of the l_p norm measuring distances.
    delta : float, default=1e-3
        Target precision.
    defect : {"D", "D1", "D2", "DI"}, default="D"
        Prune statistic.
    gamma : float, default=0.0
        Bound on the timing noise; a positive value uses the noisy solver,
        which gives no precision guarantee.
    max_level, ball_cap, prune_slack, threads
        Passed to :class:`~soundranging.solver.SolverConfig`.

    Attributes
    ----------
    source_ : ndarray of shape (m,)
    emission_time_ : float
    status_ : str
    result_ : SolveResult
    n_features_in_ : int
    """

    def __init__(
        self,
        radius=None,
        center=None,
        p=2.0,
        delta=1e-3,
        defect="D",
        gamma=0.0,
        max_level=60,
        ball_cap=10**7,
        prune_slack=None,
        threads=1,
    ):
        self.radius = radius
        self.center = center
        self.p = p
        self.delta = delta
        self.defect = defect
        self.gamma = gamma
        self.max_level = max_level
        self.ball_cap = ball_cap
        self.prune_slack = prune_slack
        self.threads = threads

    def _config(self) -> SolverConfig:
        return SolverConfig(
            delta=self.delta,
            defect_kind=DefectKind.parse(self.defect),
            prune_slack=self.prune_slack,
            max_level=self.max_level,
            ball_cap=self.ball_cap,
            threads=self.threads,
        )

    def fit(self, X, y):
        X, y = check_X_y(X, y, y_numeric=True, dtype=np.float64)
        if self.radius is None:
            raise ValueError("radius of a ball known to contain the source is required")
        m = X.shape[1]
        norm = NormSpec(self.p, m)
        center = X.mean(axis=0) if self.center is None else np.asarray(self.center, dtype=float)
        problem = SRProblem(X, y, norm, Ball(center, self.radius))
        cfg = self._config()
        if self.gamma and self.gamma > 0:
            result = noisy_solve(problem, NoisyConfig(gamma=float(self.gamma), base=cfg))
        else:
            result = rcd_solve(problem, cfg)
        self.result_ = result
        self.source_ = result.approx.copy()
        self.emission_time_ = result.emission_time
        self.status_ = result.status.value
        self.n_features_in_ = m
        self.norm_ = norm
        return self

    def predict(self, X):
        """Arrival times ``t0 + rho(x, source)`` at sensor positions X."""
        check_is_fitted(self, "source_")
        X = check_array(X, dtype=np.float64)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"X has {X.shape[1]} features, expected {self.n_features_in_}")
        return self.emission_time_ + self.norm_.distances_to(X, self.source_)
