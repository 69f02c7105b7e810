"""Seeded Monte Carlo estimation of average rates and quadrature oracles.

Samples are split into fixed-size chunks; chunk ``c`` always draws from
substream ``c`` of the seed and chunk statistics are merged in chunk order,
so results do not depend on how many workers evaluate the chunks.
"""

from __future__ import annotations

import enum
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy import integrate, optimize

from .channel import RandomStream, RicianLink, Topology, gain_cdf, gain_pdf, gain_sf, sample_draws
from .errors import EmptySample, QuadratureFailure
from .rates import PowerSplit, SnrConfig, cnoma_rates, combined_sum_terms, onoma_rates

__all__ = [
    "McConfig",
    "Estimate",
    "RateEstimate",
    "Scheme",
    "estimate_rate",
    "empirical_cdf",
    "ks_distance",
    "ks_distance_on_grid",
    "oracle_expected_log",
    "oracle_expected_min_log",
    "oracle_direct_probability",
    "oracle_onoma_rate",
]

_LN2 = math.log(2.0)
_TAIL_MASS = 1e-8


class Scheme(enum.Enum):
    ONOMA = "onoma"
    CNOMA = "cnoma"
    PAPER_SUM_EQ15 = "eq15"

    @classmethod
    def parse(cls, text: str) -> "Scheme":
        key = text.strip().lower().replace("-", "").replace("_", "")
        aliases = {"onoma": cls.ONOMA, "cnoma": cls.CNOMA, "eq15": cls.PAPER_SUM_EQ15, "papersumeq15": cls.PAPER_SUM_EQ15}
        try:
            return aliases[key]
        except KeyError:
            raise ValueError(f"unknown scheme {text!r}") from None


@dataclass(frozen=True)
class McConfig:
    n_samples: int = 1_000_000
    seed: int = 0
    chunk_size: int = 100_000

    def __post_init__(self):
        if int(self.n_samples) < 1:
            raise ValueError("n_samples must be >= 1")
        if int(self.chunk_size) < 1:
            raise ValueError("chunk_size must be >= 1")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    def chunks(self):
        """``(stream_index, size)`` for every chunk, in reduction order."""
        full, rest = divmod(int(self.n_samples), int(self.chunk_size))
        out = [(c, int(self.chunk_size)) for c in range(full)]
        if rest:
            out.append((full, rest))
        return out


@dataclass(frozen=True)
class Estimate:
    mean: float
    std_error: float
    n: int

    @property
    def ci95_low(self) -> float:
        return self.mean - 1.96 * self.std_error

    @property
    def ci95_high(self) -> float:
        return self.mean + 1.96 * self.std_error


@dataclass(frozen=True)
class RateEstimate:
    s1: Estimate
    s2: Estimate
    sum: Estimate
    direct_fraction: Estimate | None = None


class _Moments:
    """Count, mean and sum of squared deviations, merged pairwise in order."""

    __slots__ = ("n", "mean", "m2")

    def __init__(self, n=0, mean=0.0, m2=0.0):
        self.n, self.mean, self.m2 = n, mean, m2

    @classmethod
    def of(cls, x: np.ndarray) -> "_Moments":
        n = x.size
        mean = math.fsum(x.tolist()) / n
        d = x - mean
        return cls(n, mean, float(np.dot(d, d)))

    def merge(self, other: "_Moments") -> "_Moments":
        if self.n == 0:
            return other
        n = self.n + other.n
        delta = other.mean - self.mean
        mean = self.mean + delta * other.n / n
        m2 = self.m2 + other.m2 + delta * delta * self.n * other.n / n
        return _Moments(n, mean, m2)

    def estimate(self) -> Estimate:
        if self.n < 2:
            return Estimate(self.mean, float("nan") if self.n < 1 else 0.0, self.n)
        var = self.m2 / (self.n - 1)
        return Estimate(self.mean, math.sqrt(var / self.n), self.n)


def _per_draw(scheme: Scheme, draw, split, snr):
    if scheme is Scheme.ONOMA:
        s1, s2, direct = onoma_rates(draw, split, snr)
        return s1, s2, direct.astype(float)
    if scheme is Scheme.CNOMA:
        s1, s2 = cnoma_rates(draw, split, snr)
        return s1, s2, None
    s1, s2 = combined_sum_terms(draw, split, snr)
    return s1, s2, None


def estimate_rate(
    scheme: Scheme,
    topology: Topology,
    split: PowerSplit,
    snr: SnrConfig,
    mc: McConfig = McConfig(),
    workers: int = 1,
) -> RateEstimate:
    """Sample means of the per-draw rates of ``scheme``.

    Every scheme sees the same channel draws for a given ``mc``.  For O-NOMA
    the fraction of draws served directly is reported as well.
    """
    scheme = Scheme(scheme)

    def run_chunk(chunk):
        index, size = chunk
        draw = sample_draws(topology, RandomStream(mc.seed, index), size)
        s1, s2, direct = _per_draw(scheme, draw, split, snr)
        stats = [_Moments.of(s1), _Moments.of(s2), _Moments.of(s1 + s2)]
        if direct is not None:
            stats.append(_Moments.of(direct))
        return stats

    chunks = mc.chunks()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run_chunk, chunks))
    else:
        parts = [run_chunk(c) for c in chunks]

    totals = [_Moments() for _ in parts[0]]
    for part in parts:
        totals = [t.merge(p) for t, p in zip(totals, part)]
    est = [t.estimate() for t in totals]
    return RateEstimate(est[0], est[1], est[2], est[3] if len(est) > 3 else None)


def empirical_cdf(samples, grid) -> np.ndarray:
    """Fraction of ``samples`` at or below each point of the ascending ``grid``."""
    x = np.sort(np.asarray(samples, dtype=float).ravel())
    if x.size == 0:
        raise EmptySample("empirical_cdf needs at least one sample")
    g = np.asarray(grid, dtype=float)
    if np.any(np.diff(g) < 0):
        raise ValueError("grid must be sorted ascending")
    return np.searchsorted(x, g, side="right") / x.size


def ks_distance(samples, cdf) -> float:
    """Exact one-sample Kolmogorov-Smirnov distance against a vectorized ``cdf``."""
    x = np.sort(np.asarray(samples, dtype=float).ravel())
    if x.size == 0:
        raise EmptySample("ks_distance needs at least one sample")
    f = np.asarray(cdf(x), dtype=float)
    n = x.size
    upper = np.arange(1, n + 1) / n - f
    lower = f - np.arange(n) / n
    return float(max(upper.max(), lower.max()))


def ks_distance_on_grid(samples, grid, cdf_values) -> float:
    """KS distance restricted to ``grid``, using both one-sided empirical limits.

    Underestimates the full distance by at most the largest step of
    ``cdf_values`` between neighbouring grid points.
    """
    x = np.sort(np.asarray(samples, dtype=float).ravel())
    if x.size == 0:
        raise EmptySample("ks_distance_on_grid needs at least one sample")
    g = np.asarray(grid, dtype=float)
    f = np.asarray(cdf_values, dtype=float)
    right = np.searchsorted(x, g, side="right") / x.size
    left = np.searchsorted(x, g, side="left") / x.size
    return float(max(np.abs(right - f).max(), np.abs(left - f).max()))


def _upper_cutoff(link: RicianLink, mass: float = _TAIL_MASS) -> float:
    """Point beyond which ``link`` keeps only ``mass`` probability."""
    hi = link.mean_power
    while gain_sf(link, hi) > mass:
        hi *= 2.0
    return optimize.brentq(lambda x: gain_sf(link, x) - mass, 0.0, hi, xtol=1e-12 * hi)


def _quad(func, a, b, tol, points=None, what="integral"):
    pts = [p for p in (points or ()) if a < p < b] or None
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            value, err = integrate.quad(func, a, b, epsabs=tol / 10.0, epsrel=0.0, limit=500, points=pts)
        except integrate.IntegrationWarning as exc:
            raise QuadratureFailure(f"{what}: {exc}") from None
    if not err <= tol:
        raise QuadratureFailure(f"{what}: error estimate {err:.2e} exceeds {tol:.1e}")
    return value


def oracle_expected_log(link: RicianLink, rho: float, tol: float = 1e-6) -> float:
    """``E[log2(1 + rho * lambda)]`` by adaptive quadrature against the exact density."""
    if not rho > 0.0:
        raise ValueError("rho must be positive")
    cut = _upper_cutoff(link)
    return _quad(
        lambda x: math.log1p(rho * x) / _LN2 * gain_pdf(link, x),
        0.0,
        cut,
        tol,
        points=[1.0 / rho, link.mean_power],
        what="oracle_expected_log",
    )


def oracle_expected_min_log(sr: RicianLink, rd: RicianLink, a2: float, rho: float, tol: float = 1e-6) -> float:
    """``E[0.5 * log2(1 + rho * min(a2 * lambda_sr, lambda_rd))]`` by quadrature.

    The density of the minimum is composed from the two links' densities and
    survival functions.
    """
    if not rho > 0.0:
        raise ValueError("rho must be positive")
    if not 0.0 < a2 < 0.5:
        raise ValueError("a2 must lie in (0, 0.5)")

    def density(x):
        y = x / a2
        return gain_pdf(sr, y) / a2 * gain_sf(rd, x) + gain_pdf(rd, x) * gain_sf(sr, y)

    cut = min(a2 * _upper_cutoff(sr), _upper_cutoff(rd))
    return 0.5 * _quad(
        lambda x: math.log1p(rho * x) / _LN2 * density(x),
        0.0,
        cut,
        tol,
        points=[1.0 / rho, a2 * sr.mean_power],
        what="oracle_expected_min_log",
    )


def oracle_direct_probability(topology: Topology, tol: float = 1e-8) -> float:
    """``P(lambda_sd > lambda_sr)`` from the S-D density and the S-R CDF."""
    sd, sr = topology.sd, topology.sr
    cut = _upper_cutoff(sd, 1e-12)
    return _quad(
        lambda x: gain_pdf(sd, x) * gain_cdf(sr, x),
        0.0,
        cut,
        tol,
        points=[sd.mean_power],
        what="oracle_direct_probability",
    )


def oracle_onoma_rate(topology: Topology, a2: float, rho: float, tol: float = 1e-6):
    """Mode-weighted O-NOMA average rates ``(s1, s2, direct_probability)``.

    ``s1`` is a single integral over the S-D gain; ``s2`` is an outer integral
    over the S-R gain of the conditional relayed ``s2`` rate, which is itself
    an integral of the R-D survival function.
    """
    if not rho > 0.0:
        raise ValueError("rho must be positive")
    split = PowerSplit(a2)
    sd, sr, rd = topology.sd, topology.sr, topology.rd

    def s1_integrand(x):
        direct = gain_cdf(sr, x)
        relayed = 0.5 * (math.log1p(rho * x) - math.log1p(split.a2 * rho * x)) / _LN2
        return gain_pdf(sd, x) * (direct * math.log1p(rho * x) / _LN2 + (1.0 - direct) * relayed)

    s1 = _quad(s1_integrand, 0.0, _upper_cutoff(sd), tol, points=[1.0 / rho, sd.mean_power], what="onoma s1")

    rd_cut = _upper_cutoff(rd)

    def relayed_s2_given(y):
        # E[0.5 log2(1 + rho min(c, lambda_rd))] = 0.5 int_0^c rho S_rd(z) / ((1 + rho z) ln 2) dz
        c = min(split.a2 * y, rd_cut)
        if c <= 0.0:
            return 0.0
        return 0.5 * _quad(
            lambda z: rho * gain_sf(rd, z) / ((1.0 + rho * z) * _LN2),
            0.0,
            c,
            tol / 10.0,
            points=[1.0 / rho],
            what="onoma s2 inner",
        )

    s2 = _quad(
        lambda y: gain_pdf(sr, y) * gain_cdf(sd, y) * relayed_s2_given(y),
        0.0,
        _upper_cutoff(sr),
        tol,
        points=[sr.mean_power],
        what="onoma s2",
    )
    return s1, s2, oracle_direct_probability(topology)
