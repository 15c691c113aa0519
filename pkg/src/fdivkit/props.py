"""Seeded invariant suites behind ``fdivkit props``.

Every suite returns a :class:`SuiteReport` whose ``worst_margin`` is the
smallest slack observed (negative beyond the tolerance means failure).
"""

from dataclasses import dataclass, field
import math

import numpy as np

from .divergence import supermodularity_gap
from .figures import LB_RF_N, claim1_region
from .generators import class_F_generators
from .information import ab_gap, ordering_chain
from .ratedist import binary_entropy, lb_finite_blocklength
from .sanov import TailInstance, chernoff_exponent, sanov_exponent_dual

ORDERING_GENERATORS = ("skew:0.5", "alpha:1.5", "alpha:2")


@dataclass
class SuiteReport:
    suite: str
    seed: int
    trials: int
    tol: float
    worst_margin: float = math.inf
    worst_case: str = ""
    failures: list = field(default_factory=list)

    @property
    def passed(self):
        return not self.failures

    def record(self, margin, label):
        if margin < self.worst_margin:
            self.worst_margin, self.worst_case = float(margin), label
        if margin < -self.tol:
            self.failures.append(f"{label}: margin {margin:.3e}")

    def summary(self):
        status = "PASS" if self.passed else "FAIL"
        return (f"{status} {self.suite} seed={self.seed} trials={self.trials} "
                f"worst_margin={self.worst_margin:.3e} ({self.worst_case})")


def random_pmf(rng, k, floor=0.0):
    p = rng.dirichlet(np.ones(k))
    if floor:
        p = (p + floor) / (1.0 + k * floor)
    return p


def random_joint(rng, shape):
    return rng.dirichlet(np.ones(int(np.prod(shape)))).reshape(shape)


def _sizes(rng, n, hi=4):
    return tuple(int(v) for v in rng.integers(2, hi + 1, size=n))


def supermodularity_suite(seed=0, trials=500, tol=1e-9):
    rng = np.random.default_rng(seed)
    gens = class_F_generators()
    rep = SuiteReport("supermodularity", seed, trials, tol)
    for t in range(trials):
        a, b, c = _sizes(rng, 3)
        p = random_joint(rng, (a, b, c))
        qs = [random_pmf(rng, k) for k in (a, b, c)]
        for g in gens:
            rep.record(supermodularity_gap(p, *qs, g), f"trial {t} {g.name}")
    return rep


def random_ab_joint(rng, a=None, b=None, u=None):
    """Independent X1, X2 with an arbitrary channel to U."""
    a, b, u = (k if k is not None else int(rng.integers(2, 4)) for k in (a, b, u))
    p12 = np.outer(random_pmf(rng, a), random_pmf(rng, b))
    ch = rng.dirichlet(np.ones(u), size=(a, b))
    return p12[:, :, None] * ch


def ab_suite(seed=0, trials=500, tol=1e-9, flavor="ckz"):
    rng = np.random.default_rng(seed)
    gens = class_F_generators()
    rep = SuiteReport(f"ab-{flavor}", seed, trials, tol)
    for t in range(trials):
        J = random_ab_joint(rng)
        for g in gens:
            rep.record(ab_gap(J, g, flavor), f"trial {t} {g.name}")
    return rep


def ordering_suite(seed=0, trials=100, tol=1e-8, generators=ORDERING_GENERATORS):
    """kappa I >= CKZ >= PV >= MBGYA >= 0, and all equal to I for t ln t.

    Trial 0 is the product joint, where every entry must vanish.
    """
    rng = np.random.default_rng(seed)
    rep = SuiteReport("ordering", seed, trials, tol)
    for t in range(trials):
        k = 2 if t % 2 == 0 else 3
        J = np.outer(random_pmf(rng, k), random_pmf(rng, k)) if t == 0 else random_joint(rng, (k, k))
        for g in generators:
            ch = ordering_chain(J, g)
            v = list(ch)
            margin = min(v[0] - v[1], v[1] - v[2], v[2] - v[3], v[3])
            if t == 0:
                margin = min(margin, -max(abs(x) for x in v))
            rep.record(margin, f"trial {t} {g}")
        ch = ordering_chain(J, "kl")
        rep.record(-(max(ch) - min(ch)), f"trial {t} kl equality")
    return rep


def random_tail_instance(rng, max_size=4, max_n=10):
    kx, kw = (int(v) for v in rng.integers(2, max_size + 1, size=2))
    PX, PW = random_pmf(rng, kx, 0.05), random_pmf(rng, kw, 0.05)
    loss = rng.uniform(0.0, 1.0, size=(kx, kw))
    n = int(rng.integers(1, max_n + 1))
    mean = float(PX @ loss @ PW)
    delta = mean + rng.uniform(0.05, 0.95) * (loss.max() - mean)
    return TailInstance(PX, PW, loss, n, delta)


def sanov_eq_suite(seed=0, trials=20, tol=1e-6):
    """The dual Sanov exponent coincides with the Chernoff exponent."""
    rng = np.random.default_rng(seed)
    rep = SuiteReport("sanov-eq", seed, trials, tol)
    for t in range(trials):
        inst = random_tail_instance(rng)
        e_sa, e_ch = sanov_exponent_dual(inst), chernoff_exponent(inst)
        rep.record(-abs(e_sa - e_ch), f"trial {t} n={inst.n}")
    return rep


def claim1_suite(seed=0, trials=None, tol=1e-9, n_list=LB_RF_N, step=1e-3):
    """Finite-blocklength converse against R(D) on the whole dominance region."""
    rep = SuiteReport("claim1", seed, 0, tol)
    for n in n_list:
        lo, hi = claim1_region(n)
        for D in np.arange(hi, lo - 1e-15, -step)[::-1]:
            R = 1.0 - binary_entropy(D) if D < 0.5 else 0.0
            rep.record(lb_finite_blocklength(D, n) - R, f"n={n} D={D:.4f}")
            rep.trials += 1
    return rep


SUITES = {
    "supermodularity": supermodularity_suite,
    "ab": ab_suite,
    "ordering": ordering_suite,
    "sanov-eq": sanov_eq_suite,
    "claim1": claim1_suite,
}


def props_run(suite, seed=0, trials=None):
    """Run one named suite, or all of them for ``suite='all'``; returns a list of reports."""
    names = list(SUITES) if suite == "all" else [suite]
    out = []
    for name in names:
        if name not in SUITES:
            raise ValueError(f"unknown suite {name!r}; choose from {', '.join(SUITES)} or all")
        kw = {"seed": seed}
        if trials is not None and name != "claim1":
            kw["trials"] = trials
        out.append(SUITES[name](**kw))
    return out
