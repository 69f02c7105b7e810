"""Rician fading links: sampling of squared gains and their exact distribution.

A link is described by its Rician factor ``K`` and its mean power
``Omega = E[|h|^2]``.  Squared gains follow a scaled noncentral chi-square law
with two degrees of freedom.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import gammainc, gammaincc, gammaln, i0e

__all__ = [
    "RicianLink",
    "Topology",
    "ChannelDraw",
    "RandomStream",
    "sample_gain",
    "sample_gains",
    "sample_draw",
    "sample_draws",
    "gain_cdf",
    "gain_sf",
    "gain_pdf",
    "poisson_weights",
]

# Relative term size at which the noncentrality series is cut.
_SERIES_RTOL = 1e-12


@dataclass(frozen=True)
class RicianLink:
    """Statistics of one fading link.

    Parameters
    ----------
    rician_factor : float
        Ratio of line-of-sight power to scattered power, ``K >= 0``.
    mean_power : float
        Mean of the squared gain, ``Omega > 0``.
    """

    rician_factor: float
    mean_power: float

    def __post_init__(self):
        k = float(self.rician_factor)
        omega = float(self.mean_power)
        if not (math.isfinite(k) and k >= 0.0):
            raise ValueError(f"rician_factor must be finite and >= 0, got {self.rician_factor!r}")
        if not (math.isfinite(omega) and omega > 0.0):
            raise ValueError(f"mean_power must be finite and > 0, got {self.mean_power!r}")
        object.__setattr__(self, "rician_factor", k)
        object.__setattr__(self, "mean_power", omega)

    @property
    def rate(self) -> float:
        """``(1 + K) / Omega``, the exponential rate of the scattered part."""
        return (1.0 + self.rician_factor) / self.mean_power

    @property
    def los_amplitude(self) -> float:
        return math.sqrt(self.rician_factor * self.mean_power / (self.rician_factor + 1.0))

    @property
    def scatter_std(self) -> float:
        """Standard deviation of each quadrature of the scattered component."""
        return math.sqrt(self.mean_power / (2.0 * (self.rician_factor + 1.0)))


@dataclass(frozen=True)
class Topology:
    """The source-destination, source-relay and relay-destination links."""

    sd: RicianLink
    sr: RicianLink
    rd: RicianLink

    def __post_init__(self):
        if self.sd.mean_power >= self.sr.mean_power:
            warnings.warn(
                "S-D mean power is not below S-R mean power; "
                "the direct link is usually the weaker one",
                stacklevel=2,
            )

    @classmethod
    def from_params(cls, k_sd, omega_sd, k_sr, omega_sr, k_rd, omega_rd, squared=False):
        """Build a topology from scalar parameters.

        With ``squared=True`` each ``omega`` is read as an amplitude whose
        square is the mean power.
        """
        p = (lambda w: float(w) ** 2) if squared else float
        return cls(
            RicianLink(k_sd, p(omega_sd)),
            RicianLink(k_sr, p(omega_sr)),
            RicianLink(k_rd, p(omega_rd)),
        )


@dataclass(frozen=True)
class ChannelDraw:
    """One realization (or a batch of them) of the three squared gains."""

    lambda_sd: float | np.ndarray
    lambda_sr: float | np.ndarray
    lambda_rd: float | np.ndarray

    def __post_init__(self):
        for name in ("lambda_sd", "lambda_sr", "lambda_rd"):
            if np.any(np.asarray(getattr(self, name)) < 0):
                raise ValueError(f"{name} must be nonnegative")


@dataclass(frozen=True)
class RandomStream:
    """Seed plus substream index; maps to an independent numpy generator."""

    seed: int
    stream_index: int = 0

    def __post_init__(self):
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if int(self.stream_index) < 0:
            raise ValueError("stream_index must be nonnegative")

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(int(self.seed), spawn_key=(int(self.stream_index),))
        return np.random.Generator(np.random.PCG64(ss))


def _as_generator(rng) -> np.random.Generator:
    if isinstance(rng, RandomStream):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    raise TypeError(f"expected RandomStream or numpy Generator, got {type(rng).__name__}")


def sample_gains(link: RicianLink, rng, size: int) -> np.ndarray:
    """Draw ``size`` squared gains ``|h|^2`` of ``link``.

    ``h = (m + g1) + i*g2`` with ``m`` the line-of-sight amplitude and
    ``g1, g2`` independent zero-mean Gaussians of variance ``Omega/(2(K+1))``.
    """
    gen = _as_generator(rng)
    g = gen.standard_normal((2, size))
    g *= link.scatter_std
    g[0] += link.los_amplitude
    return g[0] * g[0] + g[1] * g[1]


def sample_gain(link: RicianLink, rng) -> float:
    return float(sample_gains(link, rng, 1)[0])


def sample_draws(topology: Topology, rng, size: int) -> ChannelDraw:
    """Draw ``size`` independent realizations of all three links.

    The three links consume the generator in a fixed order (S-D, S-R, R-D).
    """
    gen = _as_generator(rng)
    return ChannelDraw(
        sample_gains(topology.sd, gen, size),
        sample_gains(topology.sr, gen, size),
        sample_gains(topology.rd, gen, size),
    )


def sample_draw(topology: Topology, rng) -> ChannelDraw:
    d = sample_draws(topology, rng, 1)
    return ChannelDraw(float(d.lambda_sd[0]), float(d.lambda_sr[0]), float(d.lambda_rd[0]))


def poisson_weights(k: float, rtol: float = _SERIES_RTOL, max_terms: int = 100_000) -> np.ndarray:
    """Weights ``exp(-k) k^n / n!`` for ``n = 0..N-1``.

    The series is cut past its mode once a term falls below ``rtol`` times the
    running sum.  Computed in log space, so large ``k`` does not underflow the
    early terms into a wrong normalization.
    """
    if k == 0.0:
        return np.ones(1)
    # Mode is near k; the tail beyond k + 40 sqrt(k) + 40 is far below 1e-12.
    n_max = min(max_terms, int(k + 40.0 * math.sqrt(k) + 40.0))
    n = np.arange(n_max)
    w = np.exp(-k + n * math.log(k) - gammaln(n + 1.0))
    csum = np.cumsum(w)
    past_mode = n > k
    small = past_mode & (w < rtol * csum)
    if small.any():
        w = w[: int(np.argmax(small)) + 1]
    return w


def gain_cdf(link: RicianLink, x):
    """``P(lambda <= x)`` for the squared gain of ``link``.

    Evaluated as ``1 - Q1(sqrt(2K), sqrt(2(1+K)x/Omega))`` through the Poisson
    mixture form of the Marcum Q-function::

        F(x) = sum_n Pois(n; K) * P(n + 1, (1+K) x / Omega)

    with ``P`` the regularized lower incomplete gamma function.
    """
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValueError("x must be nonnegative")
    w = poisson_weights(link.rician_factor)
    y = link.rate * x
    n = np.arange(1, w.size + 1, dtype=float)
    out = np.tensordot(gammainc(n, y[..., None]), w, axes=([-1], [0]))
    out = np.clip(out, 0.0, 1.0)
    return float(out) if out.ndim == 0 else out


def gain_sf(link: RicianLink, x):
    """Survival function ``P(lambda > x)``, i.e. the Marcum Q-function itself."""
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValueError("x must be nonnegative")
    w = poisson_weights(link.rician_factor)
    y = link.rate * x
    n = np.arange(1, w.size + 1, dtype=float)
    # Weights that were cut carry at most rtol of mass, all of it in the tail.
    out = np.tensordot(gammaincc(n, y[..., None]), w, axes=([-1], [0])) + (1.0 - w.sum())
    out = np.clip(out, 0.0, 1.0)
    return float(out) if out.ndim == 0 else out


def gain_pdf(link: RicianLink, x):
    """Density of the squared gain::

        f(x) = a exp(-K - a x) I0(2 sqrt(K a x)),   a = (1+K)/Omega
    """
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValueError("x must be nonnegative")
    k = link.rician_factor
    a = link.rate
    z = 2.0 * np.sqrt(k * a * x)
    # i0e(z) = exp(-z) I0(z) keeps the exponent bounded.
    out = a * np.exp(-k - a * x + z) * i0e(z)
    return float(out) if out.ndim == 0 else out
