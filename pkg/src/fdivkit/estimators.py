"""Thin scikit-learn style wrappers over the functional API.

The functions stay the primary interface; these classes hold a fitted
problem so repeated queries read naturally and parameters round-trip through
``get_params`` / ``set_params``.
"""

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from . import genbounds
from .information import mutual_information, ordering_chain
from .ratedist import (distortion_range, dr_classical, f_dr_ckz, f_rd_ckz, mbgya_dr,
                       mbgya_rd, rd_classical)
from ._validation import check_joint, check_matrix, check_pmf


def _check_fitted(est, attr):
    if not hasattr(est, attr):
        raise NotFittedError(f"{type(est).__name__} is not fitted yet; call fit first")


class RateDistortionEstimator(BaseEstimator):
    """R(D) and D(R) for a fixed source and distortion.

    ``flavor`` is 'shannon' (generator ignored), 'ckz' or 'mbgya'.
    """

    def __init__(self, generator="kl", flavor="shannon"):
        self.generator = generator
        self.flavor = flavor

    def fit(self, PX, distortion):
        self.source_ = check_pmf(PX, "PX")
        self.distortion_ = check_matrix(distortion, len(self.source_), "distortion")
        if self.flavor not in ("shannon", "ckz", "mbgya"):
            raise ValueError(f"unknown flavor {self.flavor!r}")
        self.distortion_range_ = distortion_range(self.source_, self.distortion_)
        return self

    def rate(self, D):
        _check_fitted(self, "source_")
        fn = {"shannon": lambda D: rd_classical(self.source_, self.distortion_, D),
              "ckz": lambda D: f_rd_ckz(self.source_, self.distortion_, D, self.generator),
              "mbgya": lambda D: mbgya_rd(self.source_, self.distortion_, D, self.generator)}
        return np.array([fn[self.flavor](float(d)) for d in np.atleast_1d(D)])

    def distortion(self, R):
        _check_fitted(self, "source_")
        fn = {"shannon": lambda R: dr_classical(self.source_, self.distortion_, R),
              "ckz": lambda R: f_dr_ckz(self.source_, self.distortion_, R, self.generator),
              "mbgya": lambda R: mbgya_dr(self.source_, self.distortion_, R, self.generator)}
        return np.array([fn[self.flavor](float(r)) for r in np.atleast_1d(R)])


class MutualInformation(BaseEstimator):
    """Mutual f-information of a joint pmf, or of paired integer samples."""

    def __init__(self, generator="kl", flavor="ckz"):
        self.generator = generator
        self.flavor = flavor

    def fit(self, X, y=None):
        if y is None:
            self.joint_ = check_joint(X, "joint")
        else:
            a, b = np.asarray(X, dtype=int).ravel(), np.asarray(y, dtype=int).ravel()
            if a.shape != b.shape or a.size == 0:
                raise ValueError("X and y must be nonempty and of equal length")
            if a.min() < 0 or b.min() < 0:
                raise ValueError("samples must be nonnegative integer labels")
            J = np.zeros((a.max() + 1, b.max() + 1))
            np.add.at(J, (a, b), 1.0)
            self.joint_ = J / a.size
        self.value_ = mutual_information(self.joint_, self.generator, self.flavor)
        return self

    def score(self, X=None, y=None):
        _check_fitted(self, "value_")
        return self.value_

    def ordering(self):
        """(kappa I, CKZ, PV, MBGYA) for the fitted joint."""
        _check_fitted(self, "joint_")
        return ordering_chain(self.joint_, self.generator)


_BOUNDS = {
    "u2": genbounds.u2,
    "u1": genbounds.u1_upper,
}


class GeneralizationBound(BaseEstimator):
    """Bounds on expected generalization gap for a fitted learning instance.

    ``bound`` is 'u2' (per-sample budget), 'u1' (whole-sample budget via
    its single-letter upper bound), 'u2f' (f-information budget, needs
    ``generator``) or 'psi' (conjugate bound, needs ``generator``).
    """

    def __init__(self, bound="u2", generator=None, n=1):
        self.bound = bound
        self.generator = generator
        self.n = n

    def fit(self, mu, loss):
        self.instance_ = genbounds.LearningInstance(mu, loss, self.n)
        if self.bound not in ("u2", "u1", "u2f", "psi"):
            raise ValueError(f"unknown bound {self.bound!r}")
        if self.bound in ("u2f", "psi") and self.generator is None:
            raise ValueError(f"bound {self.bound!r} needs a generator")
        return self

    def evaluate(self, budget):
        """A BoundReport for one information budget (nats)."""
        _check_fitted(self, "instance_")
        inst = self.instance_
        if self.bound in _BOUNDS:
            value = _BOUNDS[self.bound](inst, budget)
        elif self.bound == "u2f":
            value = genbounds.u2_f(inst, budget, self.generator)
        else:
            value = genbounds.psi_fstar(inst, budget, self.generator)
        return genbounds.BoundReport(self.bound, float(value),
                                     {"budget": float(budget), "n": inst.n,
                                      "generator": self.generator}, "nats")

    def curve(self, budgets):
        return np.array([self.evaluate(b).value for b in np.atleast_1d(budgets)])
