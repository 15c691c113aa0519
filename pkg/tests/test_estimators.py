import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from fdivkit import GeneralizationBound, MutualInformation, RateDistortionEstimator
from fdivkit.genbounds import psi_fstar, product_loss_instance, u2, u2_f
from fdivkit.information import shannon_mi
from fdivkit.ratedist import f_rd_ckz, hamming, rd_classical


def test_params_roundtrip():
    est = RateDistortionEstimator(generator="sq", flavor="ckz")
    assert est.get_params() == {"generator": "sq", "flavor": "ckz"}
    c = clone(est)
    assert c.get_params() == est.get_params() and not hasattr(c, "source_")
    assert GeneralizationBound().set_params(bound="u1").bound == "u1"


def test_rate_distortion_estimator():
    P, d = np.array([0.3, 0.7]), hamming(2)
    est = RateDistortionEstimator().fit(P, d)
    assert est.distortion_range_ == (0.0, 0.3)
    assert est.rate([0.1])[0] == pytest.approx(rd_classical(P, d, 0.1))
    R = est.rate(0.1)[0]
    assert est.distortion(R)[0] == pytest.approx(0.1, abs=1e-6)
    ckz = RateDistortionEstimator("sq", "ckz").fit(P, d)
    assert ckz.rate(0.1)[0] == pytest.approx(f_rd_ckz(P, d, 0.1, "sq"))
    mb = RateDistortionEstimator("sq", "mbgya").fit(P, d)
    assert mb.rate(0.1)[0] <= ckz.rate(0.1)[0] + 1e-8
    assert mb.distortion(0.05)[0] <= ckz.distortion(0.05)[0] + 1e-8


def test_rate_distortion_estimator_errors():
    with pytest.raises(NotFittedError):
        RateDistortionEstimator().rate(0.1)
    with pytest.raises(ValueError):
        RateDistortionEstimator(flavor="pv").fit([0.5, 0.5], hamming(2))


def test_mutual_information_from_samples():
    x = np.array([0, 0, 1, 1, 1, 0, 1, 1])
    y = np.array([0, 1, 1, 1, 0, 0, 1, 1])
    est = MutualInformation("kl").fit(x, y)
    J = np.zeros((2, 2))
    np.add.at(J, (x, y), 1 / 8)
    assert est.score() == pytest.approx(shannon_mi(J))
    assert np.allclose(est.joint_, J)
    ch = est.ordering()
    assert max(ch) - min(ch) < 1e-12


def test_mutual_information_joint_and_errors():
    J = np.array([[0.4, 0.1], [0.1, 0.4]])
    assert MutualInformation("alpha:2", "pv").fit(J).score() <= MutualInformation("alpha:2").fit(J).score() + 1e-12
    with pytest.raises(NotFittedError):
        MutualInformation().score()
    with pytest.raises(ValueError):
        MutualInformation().fit([0, 1], [0])
    with pytest.raises(ValueError):
        MutualInformation().fit([-1, 1], [0, 1])


def test_generalization_bound():
    inst = product_loss_instance(0.5)
    est = GeneralizationBound().fit(inst.mu, inst.loss)
    rep = est.evaluate(0.1)
    assert rep.value == pytest.approx(u2(inst, 0.1)) and rep.bound_name == "u2" and rep.unit == "nats"
    assert est.curve([0.0, 0.1]).tolist() == pytest.approx([0.0, u2(inst, 0.1)])
    f = GeneralizationBound("u2f", "sq").fit(inst.mu, inst.loss)
    assert f.evaluate(0.2).value == pytest.approx(u2_f(inst, 0.2, "sq"))
    p = GeneralizationBound("psi", "kl-norm").fit(inst.mu, inst.loss)
    assert p.evaluate(0.2).value == pytest.approx(psi_fstar(inst, 0.2, "kl-norm"))
    blk = GeneralizationBound("u1", n=4).fit(inst.mu, inst.loss)
    assert blk.evaluate(0.4).value == pytest.approx(u2(inst, 0.1))


def test_generalization_bound_errors():
    with pytest.raises(NotFittedError):
        GeneralizationBound().evaluate(0.1)
    with pytest.raises(ValueError):
        GeneralizationBound("u3").fit([0.5, 0.5], np.eye(2))
    with pytest.raises(ValueError):
        GeneralizationBound("psi").fit([0.5, 0.5], np.eye(2))
