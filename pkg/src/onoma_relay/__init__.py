"""Achievable-rate analysis of opportunistic NOMA relaying over Rician fading."""

from .analytic import (
    SeriesControl,
    avg_rate_s1_analytic,
    avg_rate_s2_analytic,
    cdf_gamma1,
    cdf_gamma2,
    cnoma_avg_rate_analytic,
    g_function,
    h_function,
    make_coeffs,
    total_avg_rate_analytic,
)
from .channel import (
    ChannelDraw,
    RandomStream,
    RicianLink,
    Topology,
    gain_cdf,
    gain_pdf,
    gain_sf,
    sample_draw,
    sample_draws,
    sample_gain,
    sample_gains,
)
from .estimators import AverageRateModel
from .errors import (
    EmptySample,
    MissingPair,
    NonConvergence,
    ParseError,
    QuadratureFailure,
    ValidationError,
)
from .montecarlo import (
    Estimate,
    McConfig,
    RateEstimate,
    Scheme,
    empirical_cdf,
    estimate_rate,
    oracle_expected_log,
    oracle_expected_min_log,
    oracle_onoma_rate,
)
from .rates import (
    Mode,
    PowerSplit,
    RateBreakdown,
    SnrConfig,
    combined_sum_terms,
    rate_cnoma,
    rate_onoma,
)

from .scenario import PRESETS, Engine, OmegaInterpretation, Scenario, parse_scenario, preset
from .sweep import SweepRow, compare_report, emit_csv, read_csv, run_sweep
from .validation import validate

__version__ = "0.1.0"
