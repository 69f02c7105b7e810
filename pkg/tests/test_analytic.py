import math

import numpy as np
import pytest
import scipy.stats as st
from scipy import integrate

from onoma_relay import (
    ChannelDraw,
    NonConvergence,
    PowerSplit,
    RandomStream,
    RicianLink,
    SeriesControl,
    SnrConfig,
    Topology,
    avg_rate_s1_analytic,
    avg_rate_s2_analytic,
    cdf_gamma1,
    cdf_gamma2,
    cnoma_avg_rate_analytic,
    combined_sum_terms,
    g_function,
    h_function,
    make_coeffs,
    sample_draws,
    total_avg_rate_analytic,
)

LN2 = math.log(2)


def sf_ref(link, x):
    return st.ncx2.sf(2.0 * link.rate * np.asarray(x), 2, 2.0 * link.rician_factor)


def expected_log_min_ref(rho, first, second, scale=1.0):
    """E[ln(1 + rho min(X, scale*Y))] = int rho S_X(x) S_Y(x/scale) / (1 + rho x) dx."""
    f = lambda x: rho * sf_ref(first, x) * sf_ref(second, x / scale) / (1.0 + rho * x)
    upper = 200.0 * max(first.mean_power, scale * second.mean_power)
    pts = [1.0 / rho, first.mean_power]
    val, _ = integrate.quad(f, 0.0, upper, points=[p for p in pts if p < upper], epsabs=1e-11, epsrel=1e-11, limit=500)
    return val


class TestCoefficients:
    def test_rayleigh(self):
        c = make_coeffs(RicianLink(0.0, 2.0), 10)
        assert c.b[0] == 1.0 and np.all(c.b[1:] == 0.0)
        assert c.big_a == c.a == 0.5
        assert c.b_tilde[0] == pytest.approx(1 / c.a)

    def test_hand_values(self):
        c = make_coeffs(RicianLink(4.0, 6.0), 10)
        assert c.a == pytest.approx(5 / 6)
        assert c.big_a == pytest.approx(5 / 6 * math.exp(-4))
        assert c.b[1] == pytest.approx(10 / 3)
        assert np.all(c.b >= 0) and np.all(c.b_tilde >= 0)

    @pytest.mark.parametrize("k", [0.0, 0.5, 1.0, 3.0, 4.0])
    def test_normalization(self, k):
        c = make_coeffs(RicianLink(k, 3.0), 60)
        n = np.arange(60)
        total = c.big_a * np.sum(c.b_tilde * np.exp([math.lgamma(i + 1) for i in n]))
        assert total == pytest.approx(1.0, abs=1e-10)


class TestCdfSeries:
    def test_origin(self, fig4_topology):
        t = fig4_topology
        assert cdf_gamma1(0.0, t.sd, t.sr, clamp=False) <= 1e-8
        assert cdf_gamma2(0.0, t.sr, t.rd, 0.1, clamp=False) <= 1e-8

    def test_upper_limit(self, fig4_topology):
        t = fig4_topology
        assert cdf_gamma1(1e3, t.sd, t.sr) == pytest.approx(1.0, abs=1e-6)
        assert cdf_gamma2(1e3, t.sr, t.rd, 0.1) == pytest.approx(1.0, abs=1e-6)

    def test_gamma1_is_law_of_minimum(self, fig4_topology):
        t = fig4_topology
        x = np.linspace(0.0, 15.0, 40)
        ref = 1.0 - sf_ref(t.sd, x) * sf_ref(t.sr, x)
        np.testing.assert_allclose(cdf_gamma1(x, t.sd, t.sr), ref, atol=1e-9)

    @pytest.mark.parametrize("a2", [0.1, 0.25, 0.4])
    def test_gamma2_is_law_of_scaled_minimum(self, fig4_topology, a2):
        t = fig4_topology
        x = np.linspace(0.0, 4.0, 40)
        ref = 1.0 - sf_ref(t.sr, x / a2) * sf_ref(t.rd, x)
        np.testing.assert_allclose(cdf_gamma2(x, t.sr, t.rd, a2), ref, atol=1e-9)

    def test_monotone_on_fine_grid(self, fig4_topology):
        t = fig4_topology
        x = np.linspace(0.0, 20.0, 1000)
        assert np.all(np.diff(cdf_gamma2(x, t.sr, t.rd, 0.1)) >= 0)
        assert np.all(np.diff(cdf_gamma1(x, t.sd, t.sr)) >= 0)

    def test_a2_range(self, fig4_topology):
        with pytest.raises(ValueError):
            cdf_gamma2(1.0, fig4_topology.sr, fig4_topology.rd, 0.5)

    def test_nonconvergence(self):
        big = RicianLink(1000.0, 1.0)
        with pytest.raises(NonConvergence):
            cdf_gamma1(1.0, big, big, SeriesControl(max_terms=50))


class TestQuadratureSeries:
    @pytest.mark.parametrize("rho", [1.0, 10.0, 100.0, 1000.0])
    def test_h_is_expected_log_of_minimum(self, fig4_topology, rho):
        t = fig4_topology
        assert h_function(rho, t.sd, t.sr) == pytest.approx(expected_log_min_ref(rho, t.sd, t.sr), rel=1e-4)

    @pytest.mark.parametrize("a2", [0.1, 0.4])
    def test_g_is_expected_log_of_scaled_minimum(self, fig4_topology, a2):
        t = fig4_topology
        ref = expected_log_min_ref(100.0, t.rd, t.sr, scale=a2)
        assert g_function(100.0, t.sr, t.rd, a2) == pytest.approx(ref, rel=1e-4)

    def test_h_positive_increasing(self, fig4_topology):
        t = fig4_topology
        h = [h_function(r, t.sd, t.sr) for r in (1.0, 10.0, 100.0)]
        assert 0 < h[0] < h[1] < h[2]

    def test_g_increasing(self, fig4_topology):
        t = fig4_topology
        g = [g_function(r, t.sr, t.rd, 0.1) for r in (1.0, 10.0, 100.0)]
        assert 0 < g[0] < g[1] < g[2]
        by_split = [g_function(100.0, t.sr, t.rd, a2) for a2 in (0.1, 0.2, 0.3, 0.4)]
        assert np.all(np.diff(by_split) > 0)

    def test_deterministic_channel_limit(self):
        link = RicianLink(1000.0, 1.0)
        h = h_function(100.0, link, link, SeriesControl(max_terms=1400))
        assert h == pytest.approx(math.log(101.0), rel=0.02)

    def test_doubling_controls(self, fig9_topology):
        ctrl = SeriesControl()
        for rho in (10.0, 100.0, 1000.0):
            a = total_avg_rate_analytic(rho, 0.1, fig9_topology, ctrl)
            b = total_avg_rate_analytic(rho, 0.1, fig9_topology, ctrl.doubled())
            assert abs(a - b) / a < 1e-4


class TestAverageRates:
    def test_total_is_sum(self, fig4_topology):
        t = fig4_topology
        s1 = avg_rate_s1_analytic(100.0, 0.2, t.sd, t.sr)
        s2 = avg_rate_s2_analytic(100.0, 0.2, t.sr, t.rd)
        assert total_avg_rate_analytic(100.0, 0.2, t) == pytest.approx(s1 + s2, abs=1e-12)

    def test_continuity_near_half(self, fig4_topology):
        t = fig4_topology
        a = avg_rate_s1_analytic(100.0, 0.499, t.sd, t.sr)
        b = avg_rate_s1_analytic(100.0, 0.4989, t.sd, t.sr)
        assert a == pytest.approx(b, rel=1e-3)

    def test_against_monte_carlo(self, fig4_topology):
        d = sample_draws(fig4_topology, RandomStream(21), 2_000_000)
        c1, c2 = combined_sum_terms(d, PowerSplit(0.1), SnrConfig(100.0))
        assert avg_rate_s1_analytic(100.0, 0.1, fig4_topology.sd, fig4_topology.sr) == pytest.approx(c1.mean(), rel=0.05)
        assert avg_rate_s2_analytic(100.0, 0.1, fig4_topology.sr, fig4_topology.rd) == pytest.approx(c2.mean(), rel=0.05)

    def test_cnoma_closed_form(self, fig4_topology):
        from onoma_relay.rates import cnoma_rates

        d = sample_draws(fig4_topology, RandomStream(22), 2_000_000)
        s1, s2 = cnoma_rates(d, PowerSplit(0.1), SnrConfig(100.0))
        a1, a2 = cnoma_avg_rate_analytic(100.0, 0.1, fig4_topology)
        for ana, x in ((a1, s1), (a2, s2)):
            se = x.std() / math.sqrt(x.size)
            assert abs(ana - x.mean()) < 4 * se + 1e-4


class TestReferenceFigureValues:
    """Fig. 4 values, reproduced when omega is read as an amplitude."""

    @pytest.mark.parametrize("a2,s1,s2", [(0.1, 10.89, 4.123), (0.4, 9.905, 5.043)])
    def test_component_rates(self, fig4_squared, a2, s1, s2):
        t = fig4_squared
        assert avg_rate_s1_analytic(100.0, a2, t.sd, t.sr) == pytest.approx(s1, rel=0.02)
        assert avg_rate_s2_analytic(100.0, a2, t.sr, t.rd) == pytest.approx(s2, rel=0.02)

    def test_sum_rate(self, fig4_squared):
        assert total_avg_rate_analytic(100.0, 0.1, fig4_squared) == pytest.approx(15.0, rel=0.02)

    def test_fig9_gain(self):
        t = Topology.from_params(3, 3, 4, 12, 4, 12, squared=True)
        gain = total_avg_rate_analytic(1000.0, 0.1, t) - sum(cnoma_avg_rate_analytic(1000.0, 0.1, t))
        assert gain == pytest.approx(12.535, rel=0.10)

    def test_fig4_cnoma(self, fig4_squared):
        s1, s2 = cnoma_avg_rate_analytic(100.0, 0.1, fig4_squared)
        assert s1 == pytest.approx(1.64, rel=0.02)
        assert s1 + s2 == pytest.approx(5.753, rel=0.02)
        s1_hi, _ = cnoma_avg_rate_analytic(100.0, 0.4, fig4_squared)
        assert s1_hi == pytest.approx(0.657, rel=0.02)
