import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import channel_oracle, ckz_of

from fdivkit.ratedist import (InfeasibleError, binary_entropy, blahut_arimoto, channel_rate,
                              distortion_range, dr_classical, entropy_rate_bound, f_dr_ckz,
                              f_rd_ckz, f_rd_ckz_point, hamming, lagrangian_dual_newton,
                              lb_finite_blocklength, mbgya_dr, mbgya_rd, rd_classical,
                              rd_classical_point, rd_curve, single_letter_gap)

D_GRID = [0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45]
UNIFORM = np.array([0.5, 0.5])




@pytest.mark.parametrize("D", D_GRID)
def test_blahut_arimoto_binary(D):
    assert rd_classical(UNIFORM, hamming(2), D) / math.log(2) == pytest.approx(
        1 - float(binary_entropy(D)), abs=1e-6)


@pytest.mark.parametrize("D", D_GRID)
def test_f_rd_square_closed_form(D):
    assert f_rd_ckz(UNIFORM, hamming(2), D, "alpha:2") == pytest.approx((2 * D - 1) ** 2, abs=1e-6)


@pytest.mark.parametrize("D", [0.05, 0.12, 0.2])
@pytest.mark.parametrize("g", ["kl", "alpha:1.5", "chi2", "skew:0.5"])
def test_f_rd_matches_channel_oracle(D, g):
    PX = np.array([0.3, 0.7])
    assert f_rd_ckz(PX, hamming(2), D, g) == pytest.approx(channel_oracle(PX, D, ckz_of(g)), abs=1e-6)


@pytest.mark.parametrize("D", [0.05, 0.15, 0.25])
def test_classical_rd_matches_channel_oracle(D):
    PX = np.array([0.4, 0.6])
    assert rd_classical(PX, hamming(2), D) == pytest.approx(channel_oracle(PX, D, ckz_of("kl")), abs=1e-7)


def test_nonuniform_binary_closed_form():
    p = 0.2
    for D in (0.02, 0.1, 0.19):
        expect = float(binary_entropy(p, math.e) - binary_entropy(D, math.e))
        assert rd_classical([p, 1 - p], hamming(2), D) == pytest.approx(expect, abs=1e-8)


@pytest.mark.parametrize("g", [None, "alpha:2", "skew:0.5"])
def test_rate_distortion_roundtrip(g):
    PX, d = np.array([0.5, 0.2, 0.3]), hamming(3)
    for D in (0.1, 0.3, 0.45):
        if g is None:
            R = rd_classical(PX, d, D)
            back = dr_classical(PX, d, R)
        else:
            R = f_rd_ckz(PX, d, D, g)
            back = f_dr_ckz(PX, d, R, g)
        assert back == pytest.approx(D, abs=1e-6)


@pytest.mark.parametrize("lam", [0.3, 1.0, 4.0, 20.0])
def test_dual_newton_matches_blahut_arimoto(lam):
    PX = np.array([0.5, 0.01, 0.49])
    d = hamming(3)
    a = blahut_arimoto(PX, d, lam, tol=1e-13)
    b = lagrangian_dual_newton(PX, d, lam)
    assert b.rate + lam * b.distortion == pytest.approx(a.rate + lam * a.distortion, abs=1e-8)


def test_blahut_arimoto_zero_rate_shortcut():
    # slope of h(p) - h(D) at D = p is ln 4 for p = 0.2; smaller multipliers give rate zero
    pt = blahut_arimoto([0.2, 0.8], hamming(2), 0.5)
    assert pt.rate == 0.0 and pt.iterations == 0
    assert blahut_arimoto([0.2, 0.8], hamming(2), 2.0).rate > 0


@settings(max_examples=15)
@given(st.integers(0, 10_000))
def test_rate_monotone_in_distortion(seed):
    rng = np.random.default_rng(seed)
    PX = rng.dirichlet(np.ones(3))
    d = hamming(3)
    lo, hi = distortion_range(PX, d)
    Ds = np.linspace(lo + 0.05 * (hi - lo), hi, 4)
    Rs = [rd_classical(PX, d, D) for D in Ds]
    assert all(a >= b - 1e-9 for a, b in zip(Rs, Rs[1:]))
    assert Rs[-1] == 0.0


def test_rate_zero_at_and_above_max_distortion():
    assert rd_classical(UNIFORM, hamming(2), 0.5) == 0.0
    assert f_rd_ckz(UNIFORM, hamming(2), 0.7, "chi2") == 0.0


def test_infeasible_distortion():
    d = np.array([[0.1, 1.0], [1.0, 0.1]])
    with pytest.raises(InfeasibleError):
        rd_classical(UNIFORM, d, 0.05)


def test_minimum_distortion_point():
    pt = rd_classical_point(UNIFORM, hamming(2), 0.0)
    assert pt.rate == pytest.approx(math.log(2), abs=1e-9)
    assert pt.rate_bits == pytest.approx(1.0, abs=1e-9)


def test_distortion_at_rate_zero():
    PX = np.array([0.5, 0.01, 0.49])
    assert dr_classical(PX, hamming(3), 0.0) == pytest.approx(0.5)
    assert dr_classical(PX, hamming(3), 5.0) == pytest.approx(0.0, abs=1e-12)


def test_negative_rate_rejected():
    with pytest.raises(ValueError):
        dr_classical(UNIFORM, hamming(2), -0.1)


def test_rd_curve_is_monotone():
    c = rd_curve(np.array([0.2, 0.3, 0.5]), hamming(3), n=12)
    assert np.all(np.diff(c.rates) >= -1e-9)
    assert np.all(np.diff(c.distortions) <= 1e-9)


def test_channel_rate_reproduces_point():
    pt = f_rd_ckz_point(UNIFORM, hamming(2), 0.2, "alpha:2")
    assert channel_rate(UNIFORM, pt.channel, "alpha:2", "ckz") == pytest.approx(pt.rate, abs=1e-12)


def test_mbgya_equals_shannon_for_kl():
    PX = np.array([0.3, 0.7])
    for D in (0.05, 0.2):
        assert mbgya_rd(PX, hamming(2), D, "kl") == pytest.approx(rd_classical(PX, hamming(2), D), abs=1e-6)


def test_mbgya_below_ckz():
    PX = np.array([0.3, 0.7])
    for D in (0.05, 0.2):
        assert mbgya_rd(PX, hamming(2), D, "alpha:2") <= f_rd_ckz(PX, hamming(2), D, "alpha:2") + 1e-8
    assert mbgya_dr(PX, hamming(2), 0.05, "alpha:2") <= f_dr_ckz(PX, hamming(2), 0.05, "alpha:2") + 1e-8


def test_unknown_flavor():
    from fdivkit.ratedist import _f_problem
    with pytest.raises(ValueError):
        _f_problem(UNIFORM, hamming(2), "kl", "pv")


def test_finite_blocklength_value():
    # (2D - 1)^2 = 0.04 at D = 0.4; the converse inverts (2^{nR} - 1)/n
    assert lb_finite_blocklength(0.4, 8) == pytest.approx(math.log2(8 * 0.04 + 1) / 8, rel=1e-12)
    assert lb_finite_blocklength(0.4, 8) == pytest.approx(0.050067241198, abs=1e-12)


def test_finite_blocklength_generic_generator_branch():
    # t^2 - t and t^2 - 1 share CKZ information and the entropy bound
    for D, n in ((0.3, 1), (0.4, 8), (0.45, 16)):
        assert lb_finite_blocklength(D, n, "chi2b") == pytest.approx(lb_finite_blocklength(D, n), abs=1e-6)


def test_entropy_rate_bound_square():
    for n, R in ((1, 0.5), (4, 0.25)):
        M = 2 ** (n * R)
        assert entropy_rate_bound(n, R, "alpha:2") == pytest.approx((M - 1) / n, rel=1e-12)
    with pytest.raises(ValueError):
        entropy_rate_bound(0, 0.1, "kl")


def test_single_letter_gap_nonnegative():
    # identity-with-noise block channel at n = 2; the single-letter D_f cannot beat it
    e = 0.1
    W1 = np.array([[1 - e, e], [e, 1 - e]])
    W = np.kron(W1, W1)
    assert single_letter_gap(UNIFORM, hamming(2), W, 2, "alpha:2") >= -1e-9
    with pytest.raises(ValueError):
        single_letter_gap(UNIFORM, hamming(2), W1, 2, "alpha:2")
