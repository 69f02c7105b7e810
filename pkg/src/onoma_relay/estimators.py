"""scikit-learn compatible wrappers around the rate engines.

Rows of ``X`` are operating points ``[rho_db, a2]``.  ``transform`` returns
``[rate_s1, rate_s2, rate_sum]`` per row and ``predict`` the sum rate, so the
models drop into pipelines, ``clone`` and parameter grids.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .analytic import SeriesControl, avg_rate_s1_analytic, avg_rate_s2_analytic, cnoma_avg_rate_analytic
from .channel import Topology
from .montecarlo import McConfig, Scheme, estimate_rate, oracle_onoma_rate
from .rates import PowerSplit, SnrConfig

__all__ = ["AverageRateModel", "check_operating_points"]


def check_operating_points(X) -> np.ndarray:
    """Validate an ``(n, 2)`` array of ``[rho_db, a2]`` rows."""
    X = check_array(X, dtype=np.float64, ensure_2d=True)
    if X.shape[1] != 2:
        raise ValueError(f"X must have 2 columns [rho_db, a2], got {X.shape[1]}")
    a2 = X[:, 1]
    if np.any((a2 <= 0.0) | (a2 >= 0.5)):
        raise ValueError("a2 column must lie in (0, 0.5)")
    return X


class AverageRateModel(TransformerMixin, BaseEstimator):
    """Average achievable rates of one scheme over a fixed three-link topology.

    Parameters
    ----------
    k_sd, k_sr, k_rd : float
        Rician factors of the S-D, S-R and R-D links.
    omega_sd, omega_sr, omega_rd : float
        Mean powers, or amplitudes when ``omega_squared`` is set.
    omega_squared : bool
        Square the ``omega_*`` values to get mean powers.
    scheme : {"eq15", "onoma", "cnoma"}
    engine : {"analytic", "mc"}
        Series/quadrature evaluation or Monte Carlo.
    n_samples, seed, chunk_size, n_jobs
        Monte Carlo controls; ``n_jobs`` does not change the result.
    max_terms, rel_tol, quad_order
        Series truncation and quadrature order.
    """

    def __init__(
        self,
        k_sd=3.0,
        omega_sd=3.0,
        k_sr=4.0,
        omega_sr=6.0,
        k_rd=4.0,
        omega_rd=6.0,
        omega_squared=False,
        scheme="eq15",
        engine="analytic",
        n_samples=1_000_000,
        seed=0,
        chunk_size=100_000,
        n_jobs=1,
        max_terms=200,
        rel_tol=1e-10,
        quad_order=400,
    ):
        self.k_sd = k_sd
        self.omega_sd = omega_sd
        self.k_sr = k_sr
        self.omega_sr = omega_sr
        self.k_rd = k_rd
        self.omega_rd = omega_rd
        self.omega_squared = omega_squared
        self.scheme = scheme
        self.engine = engine
        self.n_samples = n_samples
        self.seed = seed
        self.chunk_size = chunk_size
        self.n_jobs = n_jobs
        self.max_terms = max_terms
        self.rel_tol = rel_tol
        self.quad_order = quad_order

    def fit(self, X=None, y=None):
        """Validate the parameters and build the topology; data is not needed."""
        if self.engine not in ("analytic", "mc"):
            raise ValueError(f"engine must be 'analytic' or 'mc', got {self.engine!r}")
        self.scheme_ = Scheme.parse(self.scheme)
        self.topology_ = Topology.from_params(
            self.k_sd, self.omega_sd, self.k_sr, self.omega_sr, self.k_rd, self.omega_rd, squared=self.omega_squared
        )
        self.series_ = SeriesControl(self.max_terms, self.rel_tol, self.quad_order)
        self.mc_ = McConfig(self.n_samples, self.seed, self.chunk_size)
        self.n_features_in_ = 2
        return self

    def _point(self, rho_db, a2):
        rho = SnrConfig.from_db(rho_db).rho
        topo, ctrl = self.topology_, self.series_
        if self.engine == "mc":
            est = estimate_rate(self.scheme_, topo, PowerSplit(a2), SnrConfig(rho), self.mc_, self.n_jobs)
            return est.s1.mean, est.s2.mean
        if self.scheme_ is Scheme.PAPER_SUM_EQ15:
            return avg_rate_s1_analytic(rho, a2, topo.sd, topo.sr, ctrl), avg_rate_s2_analytic(rho, a2, topo.sr, topo.rd, ctrl)
        if self.scheme_ is Scheme.CNOMA:
            return cnoma_avg_rate_analytic(rho, a2, topo, ctrl)
        s1, s2, _ = oracle_onoma_rate(topo, a2, rho)
        return s1, s2

    def transform(self, X):
        check_is_fitted(self, "topology_")
        X = check_operating_points(X)
        out = np.empty((X.shape[0], 3))
        for i, (rho_db, a2) in enumerate(X):
            s1, s2 = self._point(rho_db, a2)
            out[i] = (s1, s2, s1 + s2)
        return out

    def predict(self, X):
        return self.transform(X)[:, 2]

    def get_feature_names_out(self, input_features=None):
        return np.array(["rate_s1", "rate_s2", "rate_sum"], dtype=object)
