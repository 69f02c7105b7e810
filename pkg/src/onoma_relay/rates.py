"""Per-realization SNRs and achievable rates for C-NOMA and O-NOMA relaying.

Every function accepts a :class:`ChannelDraw` whose fields are either scalars
or equal-shape numpy arrays; the result has the same shape.  Rates are in
bit/s/Hz.  Noise power is normalized to one, so the transmit power equals the
transmit SNR ``rho``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .channel import ChannelDraw

__all__ = [
    "PowerSplit",
    "SnrConfig",
    "Mode",
    "RateBreakdown",
    "snr_relay_s1",
    "snr_relay_s2",
    "snr_dest_s1",
    "snr_rd_s2",
    "snr_direct",
    "cnoma_rates",
    "onoma_rates",
    "rate_cnoma",
    "rate_onoma",
    "combined_sum_terms",
]


@dataclass(frozen=True)
class PowerSplit:
    """Power fractions of the two superposed symbols; ``a1`` is derived."""

    a2: float

    def __post_init__(self):
        a2 = float(self.a2)
        if not 0.0 < a2 < 0.5:
            raise ValueError(f"a2 must lie in (0, 0.5), got {self.a2!r}")
        object.__setattr__(self, "a2", a2)

    @property
    def a1(self) -> float:
        return 1.0 - self.a2


@dataclass(frozen=True)
class SnrConfig:
    """Transmit SNR ``rho = P_T / sigma^2`` in linear units."""

    rho: float

    def __post_init__(self):
        rho = float(self.rho)
        if not (rho > 0.0 and math.isfinite(rho)):
            raise ValueError(f"rho must be positive and finite, got {self.rho!r}")
        object.__setattr__(self, "rho", rho)

    @classmethod
    def from_db(cls, rho_db: float) -> "SnrConfig":
        return cls(10.0 ** (rho_db / 10.0))

    @property
    def db(self) -> float:
        return 10.0 * math.log10(self.rho)


class Mode(enum.Enum):
    DIRECT = "direct"
    RELAYED = "relayed"


@dataclass(frozen=True)
class RateBreakdown:
    rate_s1: float
    rate_s2: float
    mode: Mode

    @property
    def sum(self) -> float:
        return self.rate_s1 + self.rate_s2


def snr_relay_s1(draw: ChannelDraw, split: PowerSplit, snr: SnrConfig):
    """SNR of ``s1`` at the relay, decoded with ``s2`` as interference."""
    g = snr.rho * np.asarray(draw.lambda_sr, dtype=float)
    return split.a1 * g / (split.a2 * g + 1.0)


def snr_relay_s2(draw: ChannelDraw, split: PowerSplit, snr: SnrConfig):
    """SNR of ``s2`` at the relay after ``s1`` has been cancelled."""
    return split.a2 * snr.rho * np.asarray(draw.lambda_sr, dtype=float)


def snr_dest_s1(draw: ChannelDraw, split: PowerSplit, snr: SnrConfig):
    g = snr.rho * np.asarray(draw.lambda_sd, dtype=float)
    return split.a1 * g / (split.a2 * g + 1.0)


def snr_rd_s2(draw: ChannelDraw, snr: SnrConfig):
    return snr.rho * np.asarray(draw.lambda_rd, dtype=float)


def snr_direct(draw: ChannelDraw, snr: SnrConfig):
    return snr.rho * np.asarray(draw.lambda_sd, dtype=float)


def cnoma_rates(draw: ChannelDraw, split: PowerSplit, snr: SnrConfig):
    """Array form of :func:`rate_cnoma`; returns ``(rate_s1, rate_s2)``."""
    s1 = 0.5 * np.minimum(
        np.log2(1.0 + snr_dest_s1(draw, split, snr)),
        np.log2(1.0 + snr_relay_s1(draw, split, snr)),
    )
    s2 = 0.5 * np.minimum(
        np.log2(1.0 + snr_relay_s2(draw, split, snr)),
        np.log2(1.0 + snr_rd_s2(draw, snr)),
    )
    return s1, s2


def onoma_rates(draw: ChannelDraw, split: PowerSplit, snr: SnrConfig):
    """Array form of :func:`rate_onoma`; returns ``(rate_s1, rate_s2, direct)``.

    ``direct`` is a boolean mask of draws served by direct transmission.
    Ties ``lambda_sd == lambda_sr`` go to direct transmission.
    """
    rho = snr.rho
    sd = np.asarray(draw.lambda_sd, dtype=float)
    sr = np.asarray(draw.lambda_sr, dtype=float)
    rd = np.asarray(draw.lambda_rd, dtype=float)
    direct = sd >= sr
    log_direct = np.log2(1.0 + rho * sd)
    relayed_s1 = 0.5 * log_direct - 0.5 * np.log2(1.0 + split.a2 * rho * sd)
    relayed_s2 = 0.5 * np.log2(1.0 + rho * np.minimum(split.a2 * sr, rd))
    s1 = np.where(direct, log_direct, relayed_s1)
    s2 = np.where(direct, 0.0, relayed_s2)
    return s1, s2, direct


def _scalar(x) -> float:
    return float(np.asarray(x).reshape(()))


def rate_cnoma(draw: ChannelDraw, split: PowerSplit, snr: SnrConfig) -> RateBreakdown:
    """Conventional cooperative NOMA: always two-slot relaying.

    Each symbol's rate is the weaker of its two decoding links, halved for the
    two time slots.
    """
    s1, s2 = cnoma_rates(draw, split, snr)
    return RateBreakdown(_scalar(s1), _scalar(s2), Mode.RELAYED)


def rate_onoma(draw: ChannelDraw, split: PowerSplit, snr: SnrConfig) -> RateBreakdown:
    """Opportunistic NOMA: direct transmission whenever the S-D gain is not
    below the S-R gain, relayed NOMA otherwise."""
    s1, s2, direct = onoma_rates(draw, split, snr)
    mode = Mode.DIRECT if bool(direct) else Mode.RELAYED
    return RateBreakdown(_scalar(s1), _scalar(s2), mode)


def combined_sum_terms(draw: ChannelDraw, split: PowerSplit, snr: SnrConfig):
    """Per-draw integrands ``(c_s1, c_s2)`` of the unconditional O-NOMA sum.

    ``c_s1`` adds the relayed ``s1`` rate and the direct rate on the same
    S-D gain; ``c_s2`` is the relayed ``s2`` rate.  Branches are summed, not
    weighted by how often each is selected.
    """
    rho = snr.rho
    sd = np.asarray(draw.lambda_sd, dtype=float)
    sr = np.asarray(draw.lambda_sr, dtype=float)
    rd = np.asarray(draw.lambda_rd, dtype=float)
    c_s1 = 1.5 * np.log2(1.0 + rho * sd) - 0.5 * np.log2(1.0 + split.a2 * rho * sd)
    c_s2 = 0.5 * np.log2(1.0 + rho * np.minimum(split.a2 * sr, rd))
    if c_s1.ndim == 0:
        return float(c_s1), float(c_s2)
    return c_s1, c_s2
