import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as hst

from onoma_relay import ChannelDraw, Mode, PowerSplit, SnrConfig, combined_sum_terms, rate_cnoma, rate_onoma
from onoma_relay.rates import snr_dest_s1, snr_direct, snr_rd_s2, snr_relay_s1, snr_relay_s2

gains = hst.floats(0.0, 100.0)
splits = hst.floats(0.001, 0.499).map(PowerSplit)
snrs = hst.floats(-20.0, 50.0).map(SnrConfig.from_db)


def draw(sd=0.0, sr=0.0, rd=0.0):
    return ChannelDraw(sd, sr, rd)


class TestTypes:
    def test_split_derives_a1(self):
        s = PowerSplit(0.1)
        assert s.a1 + s.a2 == 1.0
        assert s.a1 > s.a2

    @pytest.mark.parametrize("a2", [0.0, 0.5, 0.6, -0.1])
    def test_split_range(self, a2):
        with pytest.raises(ValueError):
            PowerSplit(a2)

    def test_snr_db(self):
        assert SnrConfig.from_db(20).rho == pytest.approx(100.0)
        assert SnrConfig(1000.0).db == pytest.approx(30.0)
        with pytest.raises(ValueError):
            SnrConfig(0.0)

    def test_negative_gain_rejected(self):
        with pytest.raises(ValueError):
            ChannelDraw(-1.0, 0.0, 0.0)


class TestSnr:
    def test_relay_s1(self):
        assert snr_relay_s1(draw(sr=0.0), PowerSplit(0.1), SnrConfig(10)) == 0.0
        assert snr_relay_s1(draw(sr=1.0), PowerSplit(0.1), SnrConfig(10)) == pytest.approx(4.5)
        assert snr_relay_s1(draw(sr=1.0), PowerSplit(0.1), SnrConfig(1e9)) == pytest.approx(9.0, abs=1e-6)

    def test_relay_s2(self):
        assert snr_relay_s2(draw(sr=0.0), PowerSplit(0.1), SnrConfig(10)) == 0.0
        assert snr_relay_s2(draw(sr=6.0), PowerSplit(0.1), SnrConfig(100)) == pytest.approx(60.0)
        assert snr_relay_s2(draw(sr=1.0), PowerSplit(0.4999999999), SnrConfig(2)) == pytest.approx(1.0)

    def test_dest_s1(self):
        assert snr_dest_s1(draw(), PowerSplit(0.1), SnrConfig(10)) == 0.0
        assert snr_dest_s1(draw(sd=1.0), PowerSplit(0.1), SnrConfig(10)) == pytest.approx(4.5)
        assert snr_dest_s1(draw(sd=2.0), PowerSplit(1e-8), SnrConfig(10)) == pytest.approx(20.0, abs=1e-5)

    def test_rd_and_direct(self):
        assert snr_rd_s2(draw(), SnrConfig(100)) == 0.0
        assert snr_rd_s2(draw(rd=6.0), SnrConfig(100)) == pytest.approx(600.0)
        assert snr_rd_s2(draw(rd=1.0), SnrConfig(1)) == 1.0
        assert snr_direct(draw(sd=3.0), SnrConfig(100)) == pytest.approx(300.0)
        d = draw(sd=2.5, rd=7.0)
        swapped = draw(sd=7.0, rd=2.5)
        assert snr_direct(d, SnrConfig(3)) == snr_rd_s2(swapped, SnrConfig(3))


class TestCnoma:
    def test_zero_gains(self):
        r = rate_cnoma(draw(), PowerSplit(0.2), SnrConfig(100))
        assert (r.rate_s1, r.rate_s2, r.sum) == (0.0, 0.0, 0.0)
        assert r.mode is Mode.RELAYED

    @pytest.mark.parametrize("a2", [0.05, 0.1, 0.3, 0.49])
    def test_equal_gains_telescope(self, a2):
        r = rate_cnoma(draw(1.5, 1.5, 1.5), PowerSplit(a2), SnrConfig(10))
        assert r.sum == pytest.approx(2.0, abs=1e-12)

    def test_hand_evaluation(self):
        r = rate_cnoma(draw(1.0, 2.0, 50.0), PowerSplit(0.1), SnrConfig(100))
        assert r.rate_s1 == pytest.approx(0.5 * math.log2(1 + 90 / 11))
        assert r.rate_s2 == pytest.approx(0.5 * math.log2(21))


class TestOnoma:
    def test_direct_branch(self):
        r = rate_onoma(draw(3.0, 1.0, 5.0), PowerSplit(0.1), SnrConfig(1.0))
        assert r.mode is Mode.DIRECT
        assert r.rate_s2 == 0.0
        assert r.sum == pytest.approx(2.0)

    def test_relayed_branch(self):
        r = rate_onoma(draw(1.0, 4.0, 4.0), PowerSplit(0.1), SnrConfig(10))
        assert r.mode is Mode.RELAYED
        assert r.rate_s1 == pytest.approx(0.5 * math.log2(11 / 2))
        assert r.rate_s2 == pytest.approx(0.5 * math.log2(5))

    def test_tie_goes_direct(self):
        assert rate_onoma(draw(2.0, 2.0, 2.0), PowerSplit(0.1), SnrConfig(10)).mode is Mode.DIRECT


class TestCombined:
    def test_zero(self):
        assert combined_sum_terms(draw(), PowerSplit(0.1), SnrConfig(10)) == (0.0, 0.0)

    def test_hand_evaluation(self):
        c1, _ = combined_sum_terms(draw(sd=1.0), PowerSplit(0.1), SnrConfig(10))
        assert c1 == pytest.approx(1.5 * math.log2(11) - 0.5)


@settings(max_examples=300, deadline=None)
@given(sd=gains, sr=gains, rd=gains, split=splits, snr=snrs)
def test_onoma_dominates_cnoma(sd, sr, rd, split, snr):
    d = draw(sd, sr, rd)
    assert rate_onoma(d, split, snr).sum >= rate_cnoma(d, split, snr).sum - 1e-12


@settings(max_examples=200, deadline=None)
@given(lam=gains, split=splits, snr=snrs)
def test_telescoping_identity(lam, split, snr):
    r = rate_cnoma(draw(lam, lam, lam), split, snr)
    assert abs(r.sum - 0.5 * math.log2(1 + snr.rho * lam)) < 1e-12


@settings(max_examples=200, deadline=None)
@given(sd=gains, split=splits, snr=snrs)
def test_combined_term_is_sum_of_branches(sd, split, snr):
    c1, _ = combined_sum_terms(draw(sd=sd), split, snr)
    relayed = rate_onoma(draw(sd, math.inf, 0.0), split, snr)
    direct = rate_onoma(draw(sd, 0.0, 0.0), split, snr)
    assert relayed.mode is Mode.RELAYED and direct.mode is Mode.DIRECT
    assert abs(c1 - relayed.rate_s1 - direct.rate_s1) < 1e-12
    assert c1 >= math.log2(1 + snr.rho * sd) - 1e-12


@settings(max_examples=200, deadline=None)
@given(sd=gains, sr=gains, rd=gains, a=hst.floats(0.001, 0.499), b=hst.floats(0.001, 0.499), snr=snrs)
def test_onoma_monotone_in_split(sd, sr, rd, a, b, snr):
    lo, hi = sorted((a, b))
    d = draw(sd, sr, rd)
    r_lo, r_hi = rate_onoma(d, PowerSplit(lo), snr), rate_onoma(d, PowerSplit(hi), snr)
    assert r_hi.rate_s2 >= r_lo.rate_s2 - 1e-12
    assert r_hi.rate_s1 <= r_lo.rate_s1 + 1e-12


@settings(max_examples=200, deadline=None)
@given(sd=gains, sr=gains, rd=gains, bump=hst.floats(0.0, 50.0), which=hst.sampled_from("abc"), split=splits, snr=snrs)
def test_rates_nonnegative_and_monotone_in_gains(sd, sr, rd, bump, which, split, snr):
    base = draw(sd, sr, rd)
    up = {"a": draw(sd + bump, sr, rd), "b": draw(sd, sr + bump, rd), "c": draw(sd, sr, rd + bump)}[which]
    for fn in (rate_cnoma, rate_onoma):
        r = fn(base, split, snr)
        assert r.rate_s1 >= 0 and r.rate_s2 >= 0
        assert abs(r.sum - (r.rate_s1 + r.rate_s2)) <= 1e-12
    assert rate_cnoma(up, split, snr).sum >= rate_cnoma(base, split, snr).sum - 1e-12
    if which != "b":
        assert rate_onoma(up, split, snr).sum >= rate_onoma(base, split, snr).sum - 1e-12


def test_onoma_not_monotone_in_relay_gain():
    # Raising the S-R gain past the S-D gain forces relaying through a weak R-D hop.
    split, snr = PowerSplit(0.1), SnrConfig(100)
    before = rate_onoma(draw(1.0, 0.9, 0.001), split, snr)
    after = rate_onoma(draw(1.0, 1.1, 0.001), split, snr)
    assert before.mode is Mode.DIRECT and after.mode is Mode.RELAYED
    assert after.sum < before.sum


def test_vectorized_matches_scalar():
    from onoma_relay.rates import cnoma_rates, onoma_rates

    gen = np.random.default_rng(0)
    lam = gen.exponential(3.0, size=(3, 50))
    split, snr = PowerSplit(0.2), SnrConfig(50)
    s1, s2, direct = onoma_rates(ChannelDraw(*lam), split, snr)
    c1, c2 = cnoma_rates(ChannelDraw(*lam), split, snr)
    for i in range(50):
        d = ChannelDraw(*lam[:, i])
        o = rate_onoma(d, split, snr)
        c = rate_cnoma(d, split, snr)
        assert (o.rate_s1, o.rate_s2, o.mode is Mode.DIRECT) == (s1[i], s2[i], direct[i])
        assert (c.rate_s1, c.rate_s2) == (c1[i], c2[i])
