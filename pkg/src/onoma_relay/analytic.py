"""Series and quadrature expressions for the average O-NOMA rates.

The two CDFs are double Poisson-mixture series over the Rician noncentrality
terms of two links.  ``H`` and ``G`` integrate the matching survival
functions against ``1/(1+x)`` with a Gauss-Chebyshev rule after mapping
``(0, inf)`` onto ``(-1, 1]``.  Outer double sums are accumulated over shells
``n + k = s`` and cut with :class:`SeriesControl`.

Coefficients follow the usual notation: ``a = (1+K)/Omega``,
``A = a exp(-K)``, ``B(n) = K^n (1+K)^n / (Omega^n (n!)^2)`` and
``B~(n) = B(n) / a^(n+1)``.  Every power and factorial is handled in log
space.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln, logsumexp

from .channel import RicianLink, Topology
from .errors import NonConvergence

__all__ = [
    "SeriesControl",
    "SeriesCoeffs",
    "make_coeffs",
    "cdf_gamma1",
    "cdf_gamma2",
    "h_function",
    "g_function",
    "avg_rate_s1_analytic",
    "avg_rate_s2_analytic",
    "total_avg_rate_analytic",
    "cnoma_avg_rate_analytic",
]

_LN2 = math.log(2.0)


@dataclass(frozen=True)
class SeriesControl:
    """Truncation and quadrature settings.

    max_terms : cap on each series index ``n``, ``k``
    rel_tol : a shell whose contribution is below ``rel_tol`` times the
        partial sum (twice in a row) ends the outer sum
    quad_order : number of Chebyshev nodes
    """

    max_terms: int = 200
    rel_tol: float = 1e-10
    quad_order: int = 400

    def __post_init__(self):
        if int(self.max_terms) < 1:
            raise ValueError("max_terms must be >= 1")
        if not 0.0 < self.rel_tol < 1.0:
            raise ValueError("rel_tol must lie in (0, 1)")
        if int(self.quad_order) < 2:
            raise ValueError("quad_order must be >= 2")

    def doubled(self) -> "SeriesControl":
        return SeriesControl(2 * self.max_terms, self.rel_tol, 2 * self.quad_order)


@dataclass(frozen=True)
class SeriesCoeffs:
    rician_factor: float
    mean_power: float
    a: float
    big_a: float
    max_terms: int

    @property
    def log_b(self) -> np.ndarray:
        n = np.arange(self.max_terms, dtype=float)
        k = self.rician_factor
        if k == 0.0:
            return np.where(n == 0, 0.0, -np.inf)
        return n * (math.log(k) + math.log1p(k) - math.log(self.mean_power)) - 2.0 * gammaln(n + 1.0)

    @property
    def b(self) -> np.ndarray:
        return np.exp(self.log_b)

    @property
    def log_b_tilde(self) -> np.ndarray:
        n = np.arange(self.max_terms, dtype=float)
        return self.log_b - (n + 1.0) * math.log(self.a)

    @property
    def b_tilde(self) -> np.ndarray:
        return np.exp(self.log_b_tilde)

    def log_outer_weights(self) -> np.ndarray:
        """``log(A * B~(n) * n!)``; these are Poisson(K) masses."""
        n = np.arange(self.max_terms, dtype=float)
        log_big_a = math.log(self.a) - self.rician_factor
        return log_big_a + self.log_b_tilde + gammaln(n + 1.0)


def make_coeffs(link: RicianLink, max_terms: int = SeriesControl.max_terms) -> SeriesCoeffs:
    a = link.rate
    return SeriesCoeffs(
        rician_factor=link.rician_factor,
        mean_power=link.mean_power,
        a=a,
        big_a=a * math.exp(-link.rician_factor),
        max_terms=int(max_terms),
    )


def _shell_sum(terms: np.ndarray, ctrl: SeriesControl, mode: float, what: str) -> float:
    """Sum ``terms[n, k]`` shell by shell (``s = n + k``) until it settles.

    Shells below ``mode`` (the peak of the outer weights) never end the sum,
    so a slowly rising head is not mistaken for convergence.  Shells past
    ``max_terms - 1`` only hold the terms with both indices inside the cap.
    """
    n_terms = terms.shape[0]
    idx = np.add.outer(np.arange(n_terms), np.arange(n_terms))
    shells = np.bincount(idx.ravel(), weights=terms.ravel())
    partial = 0.0
    quiet = 0
    for s, contrib in enumerate(shells):
        partial += contrib
        if s >= mode and abs(contrib) <= ctrl.rel_tol * abs(partial):
            quiet += 1
            if quiet == 2:
                return partial
        else:
            quiet = 0
    raise NonConvergence(
        f"{what}: outer series not settled after {n_terms} terms per index "
        f"(last shell {shells[-1]:.3e}, partial sum {partial:.6e})"
    )


def _outer_log_weights(cx: SeriesCoeffs, cy: SeriesCoeffs) -> np.ndarray:
    return np.add.outer(cx.log_outer_weights(), cy.log_outer_weights())


def _survival_series(x: float, cx: SeriesCoeffs, cy: SeriesCoeffs, rate_y: float, ctrl, what) -> float:
    """``A_x A_y sum B~x B~y n! k! e^{-(a_x+r_y)x} sum_ij a_x^i r_y^j x^(i+j)/(i! j!)``."""
    n = np.arange(ctrl.max_terms, dtype=float)
    if x == 0.0:
        inner_x = np.ones_like(n)
        inner_y = np.ones_like(n)
    else:
        # Inner double sum factorizes into two truncated exponential series.
        inner_x = np.cumsum(np.exp(-cx.a * x + n * math.log(cx.a * x) - gammaln(n + 1.0)))
        inner_y = np.cumsum(np.exp(-rate_y * x + n * math.log(rate_y * x) - gammaln(n + 1.0)))
    terms = np.exp(_outer_log_weights(cx, cy)) * np.multiply.outer(inner_x, inner_y)
    return _shell_sum(terms, ctrl, cx.rician_factor + cy.rician_factor, what)


def _coeff_pair(first: RicianLink, second: RicianLink, ctrl: SeriesControl):
    return make_coeffs(first, ctrl.max_terms), make_coeffs(second, ctrl.max_terms)


def _cdf(x, cx, cy, rate_y, ctrl, clamp, what):
    xs = np.asarray(x, dtype=float)
    if np.any(xs < 0):
        raise ValueError("x must be nonnegative")
    out = np.array([1.0 - _survival_series(float(v), cx, cy, rate_y, ctrl, what) for v in xs.ravel()])
    if clamp:
        out = np.clip(out, 0.0, 1.0)
    out = out.reshape(xs.shape)
    return float(out) if out.ndim == 0 else out


def cdf_gamma1(x, sd: RicianLink, sr: RicianLink, ctrl: SeriesControl = SeriesControl(), clamp=True):
    """Series CDF built from the S-D and S-R link coefficients.

    Its survival is the product of the two links' survivals, so it is the
    distribution of ``min(lambda_sd, lambda_sr)``.
    """
    cx, cy = _coeff_pair(sd, sr, ctrl)
    return _cdf(x, cx, cy, cy.a, ctrl, clamp, "cdf_gamma1")


def cdf_gamma2(x, sr: RicianLink, rd: RicianLink, a2: float, ctrl: SeriesControl = SeriesControl(), clamp=True):
    """Series CDF built from the R-D coefficients and the S-R coefficients with
    rate ``a_y / a2``, i.e. the law of ``min(a2 * lambda_sr, lambda_rd)``."""
    _check_a2(a2)
    cz, cy = _coeff_pair(rd, sr, ctrl)
    return _cdf(x, cz, cy, cy.a / a2, ctrl, clamp, "cdf_gamma2")


def _check_a2(a2):
    if not 0.0 < a2 < 0.5:
        raise ValueError(f"a2 must lie in (0, 0.5), got {a2!r}")


def _chebyshev_moments(beta: float, n_moments: int, quad_order: int) -> np.ndarray:
    """``log`` of ``(pi/N) sum_t (cos th_t + 1)^(m-1) exp(-2 beta/(cos th_t + 1)) |sin th_t|``
    for ``m = 0..n_moments-1``."""
    t = np.arange(1, quad_order + 1, dtype=float)
    theta = (2.0 * t - 1.0) * math.pi / (2.0 * quad_order)
    u1 = np.cos(theta) + 1.0
    m = np.arange(n_moments, dtype=float)
    exponent = np.multiply.outer(m - 1.0, np.log(u1)) - 2.0 * beta / u1
    scale = np.abs(np.sin(theta)) * (math.pi / quad_order)
    return logsumexp(exponent, b=np.broadcast_to(scale, exponent.shape), axis=1)


def _rate_integral(rho: float, cx: SeriesCoeffs, cy: SeriesCoeffs, rate_y: float, ctrl: SeriesControl, what) -> float:
    if not rho > 0.0:
        raise ValueError("rho must be positive")
    n_terms = ctrl.max_terms
    rate_sum = cx.a + rate_y
    beta = rate_sum / rho
    log_q = _chebyshev_moments(beta, 2 * n_terms - 1, ctrl.quad_order)
    i = np.arange(n_terms, dtype=float)
    ij = np.add.outer(i, i)
    # (i+j)!/(i!j!) * a_x^i r_y^j / rho^(i+j) * e^beta * (1/(2 beta))^(i+j) * Q[i+j]
    log_m = (
        gammaln(ij + 1.0)
        - np.add.outer(gammaln(i + 1.0), gammaln(i + 1.0))
        + np.add.outer(i * math.log(cx.a), i * math.log(rate_y))
        - ij * math.log(rho)
        + beta
        - ij * math.log(2.0 * beta)
        + log_q[ij.astype(int)]
    )
    inner = np.exp(log_m).cumsum(axis=0).cumsum(axis=1)
    terms = np.exp(_outer_log_weights(cx, cy)) * inner
    return _shell_sum(terms, ctrl, cx.rician_factor + cy.rician_factor, what)


def h_function(rho: float, sd: RicianLink, sr: RicianLink, ctrl: SeriesControl = SeriesControl()) -> float:
    """Series-quadrature value of ``E[ln(1 + rho * min(lambda_sd, lambda_sr))]``."""
    cx, cy = _coeff_pair(sd, sr, ctrl)
    return _rate_integral(rho, cx, cy, cy.a, ctrl, "h_function")


def g_function(rho: float, sr: RicianLink, rd: RicianLink, a2: float, ctrl: SeriesControl = SeriesControl()) -> float:
    """As :func:`h_function` with the R-D link and the S-R link scaled by ``a2``."""
    _check_a2(a2)
    cz, cy = _coeff_pair(rd, sr, ctrl)
    return _rate_integral(rho, cz, cy, cy.a / a2, ctrl, "g_function")


def avg_rate_s1_analytic(rho, a2, sd, sr, ctrl: SeriesControl = SeriesControl()) -> float:
    _check_a2(a2)
    return (3.0 * h_function(rho, sd, sr, ctrl) - h_function(rho * a2, sd, sr, ctrl)) / (2.0 * _LN2)


def avg_rate_s2_analytic(rho, a2, sr, rd, ctrl: SeriesControl = SeriesControl()) -> float:
    return g_function(rho, sr, rd, a2, ctrl) / (2.0 * _LN2)


def total_avg_rate_analytic(rho, a2, topology: Topology, ctrl: SeriesControl = SeriesControl()) -> float:
    """Average O-NOMA sum rate in bit/s/Hz (branches summed unconditionally)."""
    return avg_rate_s1_analytic(rho, a2, topology.sd, topology.sr, ctrl) + avg_rate_s2_analytic(
        rho, a2, topology.sr, topology.rd, ctrl
    )


def cnoma_avg_rate_analytic(rho, a2, topology: Topology, ctrl: SeriesControl = SeriesControl()):
    """Average C-NOMA rates ``(s1, s2)`` from the same ``H`` and ``G``.

    The C-NOMA ``s1`` rate is set by ``min(lambda_sd, lambda_sr)`` and
    ``log2(1 + a1 rho l / (a2 rho l + 1)) = log2(1 + rho l) - log2(1 + a2 rho l)``,
    hence ``s1 = (H(rho) - H(rho a2)) / (2 ln 2)``.  ``s2`` equals the O-NOMA
    relayed term.
    """
    _check_a2(a2)
    s1 = (h_function(rho, topology.sd, topology.sr, ctrl) - h_function(rho * a2, topology.sd, topology.sr, ctrl)) / (
        2.0 * _LN2
    )
    return s1, avg_rate_s2_analytic(rho, a2, topology.sr, topology.rd, ctrl)
