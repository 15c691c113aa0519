import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import hamming_lb1, hamming_lb2, two_point_oracle

from fdivkit.lowerbounds import (amemiya_norm, f_dual_lb, gaussian_entropy, lb1_reference,
                                 lb2_dual, lp_ball_volume, orlicz_norm, psi2_norm,
                                 shannon_lb_rnorm, smoothed_expectation, subgaussian_lb)
from fdivkit.ratedist import dr_classical, f_dr_ckz, hamming

SOURCE = np.array([0.5, 0.01, 0.49])



@settings(max_examples=15)
@given(st.integers(0, 10_000), st.floats(0.0, 1.2))
def test_reference_bounds_below_distortion_rate(seed, R):
    rng = np.random.default_rng(seed)
    P = rng.dirichlet(np.ones(3))
    d = hamming(3)
    D = dr_classical(P, d, R)
    assert lb1_reference(P, d, R).value <= D + 1e-7
    assert lb2_dual(P, d, R).value <= D + 1e-7


@given(st.integers(0, 10_000), st.floats(0.0, 2.0))
def test_lb2_dominates_subgaussian_relaxation(seed, R):
    # Hoeffding's lemma on each reconstruction column
    rng = np.random.default_rng(seed)
    P = rng.dirichlet(np.ones(3))
    d = rng.uniform(0, 1, size=(3, 4))
    sigma2 = (d.max() - d.min()) ** 2 / 4
    base = float(np.min(P @ d)) + subgaussian_lb(sigma2, R)
    assert lb2_dual(P, d, R).value >= base - 1e-9


def test_lb2_at_zero_rate_is_best_constant():
    assert lb2_dual(SOURCE, hamming(3), 0.0).value == pytest.approx(dr_classical(SOURCE, hamming(3), 0.0))


def test_lb2_accepts_negative_distortion():
    d = hamming(3) - 0.5
    assert lb2_dual(SOURCE, d, 0.2).value == pytest.approx(lb2_dual(SOURCE, hamming(3), 0.2).value - 0.5)


@pytest.mark.parametrize("R", [0.1, 0.45, 0.687, 1.0])
def test_reference_bounds_match_hamming_closed_forms(R):
    d = hamming(3)
    assert lb1_reference(SOURCE, d, R).value == pytest.approx(max(hamming_lb1(SOURCE, R), 0.0), abs=1e-8)
    assert lb2_dual(SOURCE, d, R).value == pytest.approx(max(hamming_lb2(SOURCE, R), 0.0), abs=1e-8)


def test_counting_bound_can_beat_moment_bound():
    # on this skewed source the counting-measure bound is the larger one at moderate rates
    R = 0.687
    assert hamming_lb1(SOURCE, R) > hamming_lb2(SOURCE, R) + 1e-3
    assert lb1_reference(SOURCE, hamming(3), R).value > lb2_dual(SOURCE, hamming(3), R).value + 1e-3


def test_lb1_input_checks():
    with pytest.raises(ValueError):
        lb1_reference(SOURCE, hamming(3) - 0.5, 0.1)
    with pytest.raises(ValueError):
        lb1_reference(SOURCE, hamming(3) + 0.1, 0.1)


def test_lb1_large_rate_limit():
    assert lb1_reference(SOURCE, hamming(3), 5.0).value == pytest.approx(0.0, abs=1e-9)


def test_subgaussian_lb_value():
    assert subgaussian_lb(0.25, 0.5) == pytest.approx(-0.5)


@pytest.mark.parametrize("g", ["alpha:2", "chi2", "kl-norm", "skew:0.5"])
@pytest.mark.parametrize("R", [0.05, 0.3])
def test_f_dual_lb_below_f_distortion_rate(g, R):
    P = np.array([0.5, 0.2, 0.3])
    assert f_dual_lb(P, hamming(3), R, g).value <= f_dr_ckz(P, hamming(3), R, g) + 1e-7


def test_f_dual_lb_closed_inner_matches_numeric():
    P = np.array([0.5, 0.2, 0.3])
    a = f_dual_lb(P, hamming(3), 0.1, "kl-norm").value
    b = f_dual_lb(P, hamming(3), 0.1, "kl-norm", inner="numeric").value
    assert a == pytest.approx(b, abs=1e-9)
    # with the normalised t ln t the bound coincides with the moment-generating one
    assert a == pytest.approx(lb2_dual(P, hamming(3), 0.1).value, abs=1e-9)
    with pytest.raises(ValueError):
        f_dual_lb(P, hamming(3), 0.1, "kl", inner="x")


@pytest.mark.parametrize("g", ["kl", "chi2", "alpha:1.5", "skew:0.5"])
@pytest.mark.parametrize("p,gvals,R", [(0.3, [0.0, 1.0], 0.05), (0.7, [2.0, -1.0], 0.2),
                                       (0.5, [0.0, 1.0], 0.01), (0.2, [0.0, 1.0], 3.0)])
def test_smoothed_expectation_two_point(g, p, gvals, R):
    got = smoothed_expectation([p, 1 - p], gvals, R, g)
    assert got == pytest.approx(two_point_oracle(p, np.array(gvals), R, g), abs=1e-6)


def test_smoothed_expectation_edges():
    assert smoothed_expectation([0.5, 0.5], [1.0, 1.0], 0.3, "kl") == 1.0
    assert smoothed_expectation([0.3, 0.7], [0.0, 1.0], 0.0, "kl") == pytest.approx(0.7)
    with pytest.raises(ValueError):
        smoothed_expectation([0.5, 0.5], [1.0], 0.1, "kl")


@settings(max_examples=50)
@given(st.integers(0, 10_000))
def test_orlicz_sandwich(seed):
    rng = np.random.default_rng(seed)
    k = int(rng.integers(2, 6))
    mu = rng.dirichlet(np.ones(k))
    x = rng.normal(size=k) * rng.uniform(0.1, 3)
    orl = orlicz_norm(mu, x, "kl-norm")
    am = amemiya_norm(mu, x, "kl-norm", check=False)
    assert orl - 1e-9 <= am <= 2 * orl + 1e-9


def test_orlicz_constant_value():
    c = -1.7
    assert orlicz_norm([0.25, 0.75], [c, c], "kl-norm") == pytest.approx(abs(c) / math.log(2), abs=1e-9)


def test_psi2_constant_value():
    c = 0.8
    assert psi2_norm([0.5, 0.5], [c, c]) == pytest.approx(c / math.sqrt(math.log(2)), abs=1e-12)


def test_norms_of_zero():
    assert orlicz_norm([0.5, 0.5], [0.0, 0.0], "kl-norm") == 0.0
    assert psi2_norm([0.5, 0.5], [0.0, 0.0]) == 0.0
    assert amemiya_norm([0.5, 0.5], [0.0, 0.0], "kl-norm") == 0.0


def test_orlicz_rejects_conjugate_above_one():
    with pytest.raises(ValueError):
        orlicz_norm([0.5, 0.5], [1.0, 2.0], "alpha:2")


def test_ball_volumes():
    assert lp_ball_volume(3, 2) == pytest.approx(4 * math.pi / 3, rel=1e-12)
    assert lp_ball_volume(2, 1) == pytest.approx(2.0, rel=1e-12)
    assert lp_ball_volume(2, 2) == pytest.approx(math.pi, rel=1e-12)


def test_gaussian_entropy():
    assert gaussian_entropy(1.0) == pytest.approx(0.5 * math.log(2 * math.pi * math.e))
    assert gaussian_entropy(2.0, 3) == pytest.approx(3 * gaussian_entropy(2.0))


@pytest.mark.parametrize("k,sigma2,R", [(1, 1.0, 0.5), (3, 2.0, 0.7), (5, 0.3, 2.0)])
def test_shannon_lb_gaussian_is_tight(k, sigma2, R):
    # squared error on an iid Gaussian vector: k sigma^2 exp(-2R/k)
    assert shannon_lb_rnorm(gaussian_entropy(sigma2, k), k, 2, R) == pytest.approx(
        k * sigma2 * math.exp(-2 * R / k), rel=1e-12)


def test_shannon_lb_input_checks():
    with pytest.raises(ValueError):
        shannon_lb_rnorm(1.0, 0, 2, 0.1)
    with pytest.raises(ValueError):
        shannon_lb_rnorm(math.inf, 1, 2, 0.1)
    assert shannon_lb_rnorm(1.0, 1, 2, math.inf) == 0.0
