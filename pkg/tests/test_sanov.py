import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fdivkit.divergence import f_divergence
from fdivkit.props import random_tail_instance
from fdivkit.sanov import (TailInstance, chernoff_exponent, exact_tail_probability,
                           f_sanov_rhs, grid_min, hypothesis_test_bounds, invert_f_sanov,
                           sanov_exponent_dual, sanov_lhs, tail_bound)


def binary_kl(a, b):
    return a * math.log(a / b) + (1 - a) * math.log((1 - a) / (1 - b))


@pytest.mark.parametrize("p,delta,n", [(0.3, 0.5, 1), (0.3, 0.5, 7), (0.1, 0.9, 3), (0.6, 0.61, 2)])
def test_chernoff_bernoulli(p, delta, n):
    # a single hypothesis with a 0/1 loss: the exponent is binary relative entropy
    inst = TailInstance([1 - p, p], [1.0], [[0.0], [1.0]], n, delta)
    assert chernoff_exponent(inst) == pytest.approx(binary_kl(delta, p), rel=1e-8)
    assert sanov_exponent_dual(inst) == pytest.approx(binary_kl(delta, p), rel=1e-8)


@settings(max_examples=25)
@given(st.integers(0, 10_000))
def test_sanov_equals_chernoff(seed):
    inst = random_tail_instance(np.random.default_rng(seed))
    assert sanov_exponent_dual(inst) == pytest.approx(chernoff_exponent(inst), abs=1e-6)


def test_exponent_edges():
    inst = TailInstance([0.5, 0.5], [1.0], [[0.0], [1.0]], 3, 0.4)
    assert chernoff_exponent(inst) == 0.0
    top = TailInstance([0.5, 0.5], [1.0], [[0.0], [1.0]], 3, 1.0)
    # reaching the largest loss needs every sample to hit it
    assert chernoff_exponent(top) == pytest.approx(math.log(2), rel=1e-9)
    over = TailInstance([0.5, 0.5], [1.0], [[0.0], [1.0]], 3, 1.5)
    assert math.isinf(chernoff_exponent(over))


@pytest.mark.parametrize("seed", range(5))
def test_kl_rhs_is_n_times_exponent(seed):
    inst = random_tail_instance(np.random.default_rng(seed))
    res = f_sanov_rhs(inst, "kl")
    assert res.method == "barrier"
    assert res.value / inst.n == pytest.approx(sanov_exponent_dual(inst), abs=1e-6)


@pytest.mark.parametrize("g", ["chi2b", "alpha:1.5", "skew:0.5", "alpha:3"])
def test_rhs_matches_simplex_grid(g):
    inst = TailInstance([0.5, 0.5], [0.4, 0.6], [[0.0, 0.2], [1.0, 0.7]], 4, 0.6)
    res = f_sanov_rhs(inst, g)
    assert res.grid_ok
    # grid steps of 1/48 leave a small gap above the true minimum
    assert res.value <= res.grid_value + 1e-9
    assert res.value >= res.grid_value - 0.05 * max(res.grid_value, 1.0)
    assert grid_min(inst, g) * inst.n == pytest.approx(res.grid_value)


def test_rhs_outside_class_uses_multistart():
    inst = TailInstance([0.5, 0.5], [0.4, 0.6], [[0.0, 0.2], [1.0, 0.7]], 4, 0.6)
    res = f_sanov_rhs(inst, "alpha:3")
    assert res.method == "slsqp-multistart" and math.isnan(res.certified_gap)


def test_rhs_trivial_and_infeasible():
    inst = TailInstance([0.5, 0.5], [1.0], [[0.0], [1.0]], 2, 0.2)
    assert f_sanov_rhs(inst, "kl").value == 0.0
    over = TailInstance([0.5, 0.5], [1.0], [[0.0], [1.0]], 2, 2.0)
    assert math.isinf(f_sanov_rhs(over, "kl").value)
    assert tail_bound(over, "kl") == 0.0


@pytest.mark.parametrize("seed", range(4))
@pytest.mark.parametrize("g", ["kl", "chi2b", "skew:0.5"])
def test_tail_bound_dominates_exact(seed, g):
    inst = random_tail_instance(np.random.default_rng(100 + seed), max_size=3, max_n=6)
    assert tail_bound(inst, g) >= exact_tail_probability(inst) - 1e-9


def test_exact_tail_probability_binomial():
    from scipy.stats import binom
    inst = TailInstance([0.7, 0.3], [1.0], [[0.0], [1.0]], 10, 0.5)
    assert exact_tail_probability(inst) == pytest.approx(binom.sf(4, 10, 0.3), rel=1e-12)


@pytest.mark.parametrize("g", ["chi2b", "kl", "skew:0.5", "alpha:1.5", "chi2", "kl-norm"])
@pytest.mark.parametrize("rhs", [1e-4, 0.3, 2.0])
def test_invert_roundtrip(g, rhs):
    gamma = invert_f_sanov(rhs, g)
    if gamma > 0:
        assert sanov_lhs(gamma, g) == pytest.approx(rhs, rel=1e-9)


def test_invert_edges():
    assert invert_f_sanov(0.0, "kl") == 1.0
    assert invert_f_sanov(math.inf, "kl") == 0.0
    with pytest.raises(ValueError):
        invert_f_sanov(-1.0, "kl")
    assert sanov_lhs(0.0, "kl") == math.inf


def test_sanov_lhs_values():
    assert sanov_lhs(0.25, "kl") == pytest.approx(math.log(4))
    assert sanov_lhs(0.25, "chi2b") == pytest.approx(3.0)
    assert sanov_lhs(1.0, "skew:0.3") == pytest.approx(0.0, abs=1e-15)


def exact_test_bounds(n, c):
    """Both bounds at eta = c / (2 sqrt n), rearranged in rationals where possible."""
    c2 = Fraction(c) ** 2
    chi = (n - c2) / ((1 + c2) * n - c2)
    kl = (1 - c2 / n) ** Fraction(n, 2) if n % 2 == 0 else float(1 - c2 / n) ** (n / 2)
    return float(chi), float(kl)


@pytest.mark.parametrize("n,c", [(4, Fraction(1, 2)), (10, Fraction(3, 10)), (51, Fraction(9, 10))])
def test_hypothesis_test_bounds_closed_form(n, c):
    got = hypothesis_test_bounds(n, float(c) / (2 * math.sqrt(n)))
    assert got == pytest.approx(exact_test_bounds(n, c), rel=1e-12)


def test_hypothesis_test_spot_values():
    chi, kl = hypothesis_test_bounds(4, 0.5 / (2 * math.sqrt(4)))
    assert chi == pytest.approx(0.789474, abs=1e-6)
    assert kl == pytest.approx(0.878906, abs=1e-6)


@pytest.mark.parametrize("eta", [0.05, 0.2, 0.4])
def test_hypothesis_test_bounds_from_inversion(eta):
    # the bounds invert n times the divergence between the fair coin and the biased one
    n = 7
    fair, biased = [0.5, 0.5], [0.5 + eta, 0.5 - eta]
    chi, kl = hypothesis_test_bounds(n, eta)
    assert invert_f_sanov(n * f_divergence(fair, biased, "chi2b"), "chi2b") == pytest.approx(chi, rel=1e-12)
    assert invert_f_sanov(n * f_divergence(fair, biased, "kl"), "kl") == pytest.approx(kl, rel=1e-12)


def test_hypothesis_test_bound_errors():
    with pytest.raises(ValueError):
        hypothesis_test_bounds(3, 0.5)
    with pytest.raises(ValueError):
        hypothesis_test_bounds(0, 0.1)


@pytest.mark.parametrize("kw", [dict(n=0), dict(n=1.5), dict(delta=math.nan),
                                dict(loss=[[0.0, 1.0], [1.0, 0.0]])])
def test_tail_instance_validation(kw):
    base = dict(PX=[0.5, 0.5], PW=[1.0], loss=[[0.0], [1.0]], n=2, delta=0.5)
    base.update(kw)
    with pytest.raises(ValueError):
        TailInstance(**base)
