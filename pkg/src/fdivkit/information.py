"""Mutual f-information in three flavours and the matching f-entropies.

* ``ckz``   : D_f(P_AB || P_A x P_B)
* ``pv``    : min_Q D_f(P_AB || P_A x Q)
* ``mbgya`` : min_Q [D_f(P_AB || P_A x Q) - D_f(P_B || Q)]

The minimisations run over Q supported on supp(P_B). Moving mass outside
that support never helps: the directional derivative of the objective in
that direction is f(0) - E[f(r) - r f'(r)] >= 0 by convexity of f.
"""

from dataclasses import dataclass
import math
from typing import NamedTuple
import warnings

import numpy as np
from scipy.special import xlogy

from ._simplex import minimize_simplex
from ._validation import check_joint, check_pmf
from .divergence import IndeterminateError, _divergence_terms
from .generators import get_generator

FLAVORS = ("ckz", "pv", "mbgya")


@dataclass(frozen=True)
class MutualInfoResult:
    value: float
    minimizer_q: np.ndarray | None
    iterations: int
    certified_gap: float
    converged: bool = True
    flavor: str = ""
    generator: str = ""

    def __float__(self):
        return float(self.value)

    def to_record(self):
        return {"flavor": self.flavor, "generator": self.generator,
                "value_nats": self.value, "residual": self.certified_gap}


def shannon_mi(J):
    """I(A;B) in nats."""
    J = np.asarray(J, dtype=float)
    pa, pb = J.sum(axis=1), J.sum(axis=0)
    i, j = np.nonzero(J > 0)
    # logs of each factor separately: the product pa * pb can underflow
    v = J[i, j]
    return float(np.sum(v * (np.log(v) - np.log(pa[i]) - np.log(pb[j]))))


def shannon_entropy(p):
    p = np.asarray(p, dtype=float)
    return float(-np.sum(xlogy(p, p)))


def _flavor(flavor):
    key = str(flavor).lower()
    if key not in FLAVORS:
        raise ValueError(f"unknown flavor {flavor!r}; expected one of {FLAVORS}")
    return key


def mi_ckz(J, g):
    """D_f(P_AB || P_A x P_B)."""
    g = get_generator(g)
    J = check_joint(J, "J")
    return _divergence_terms(J, np.outer(J.sum(axis=1), J.sum(axis=0)), g)


class _QProblem:
    """Separable objective in Q for the PV and MBGYA minimisations."""

    def __init__(self, J, g, subtract_marginal):
        pa = J.sum(axis=1)
        pb = J.sum(axis=0)
        self.support = pb > 0
        rows = pa > 0
        self.w = pa[rows]
        self.C = J[rows][:, self.support] / pa[rows, None]
        self.pb = pb[self.support]
        self.g = g
        self.sub = subtract_marginal

    def value(self, q):
        g = self.g
        r = self.C / q
        val = float(np.sum(q * (self.w @ np.asarray(g.f(r)))))
        if self.sub:
            val -= float(np.sum(q * np.asarray(g.f(self.pb / q))))
        return val

    def grad(self, q):
        g = self.g
        r = self.C / q
        out = self.w @ (np.asarray(g.f(r)) - g.tf1(r))
        if self.sub:
            s = self.pb / q
            out = out - (np.asarray(g.f(s)) - g.tf1(s))
        return out

    def hess(self, q):
        g = self.g
        r = self.C / q
        out = (self.w @ g.t2f2(r)) / q
        if self.sub:
            out = out - g.t2f2(self.pb / q) / q
        return out

    def embed(self, q):
        full = np.zeros(self.support.size)
        full[self.support] = q
        return full


def _solve_q(problem, starts, tol, max_iter):
    best = None
    for q0 in starts:
        res = minimize_simplex(problem.value, problem.grad, q0, hess_diag=problem.hess,
                               tol=tol, max_iter=max_iter)
        if best is None or res.fun < best.fun - 1e-15:
            best = res
    return best


def _sibson_pv(J, a):
    pa = J.sum(axis=1)
    rows = pa > 0
    C = J[rows] / pa[rows, None]
    c = pa[rows] @ C ** a
    return float(np.sum(c ** (1.0 / a)) ** a - 1.0)


def _alpha_mbgya(J, a):
    pa = J.sum(axis=1)
    pb = J.sum(axis=0)
    rows = pa > 0
    C = J[rows] / pa[rows, None]
    d = np.maximum(pa[rows] @ C ** a - pb ** a, 0.0)
    return float(np.sum(d ** (1.0 / a)) ** a)


def _is_kl_family(g):
    return g.name in ("kl", "kl-norm", "kl-bits") or g.name == "skew:0"


def mi_pv(J, g, method="auto", tol=1e-9, max_iter=100_000):
    """min over Q_B of D_f(P_AB || P_A x Q_B).

    ``method="auto"`` uses closed forms for the t ln t family and for
    t^a - 1 (Sibson); ``method="solver"`` always runs the simplex solver.
    """
    g = get_generator(g)
    J = check_joint(J, "J")
    if method not in ("auto", "solver"):
        raise ValueError("method must be 'auto' or 'solver'")
    pb = J.sum(axis=0)
    if method == "auto":
        if _is_kl_family(g):
            val = mi_ckz(J, g)
            return MutualInfoResult(val, pb.copy(), 0, 0.0, True, "pv", g.name)
        if g.name.startswith("alpha:"):
            return MutualInfoResult(_sibson_pv(J, g.params[0]), None, 0, 0.0, True, "pv", g.name)
    prob = _QProblem(J, g, subtract_marginal=False)
    res = _solve_q(prob, [prob.pb.copy()], tol, max_iter)
    return MutualInfoResult(max(res.fun, 0.0) if res.fun > -1e-12 else res.fun,
                            prob.embed(res.x), res.n_iter, res.gap, res.converged,
                            "pv", g.name)


def mi_mbgya(J, g, method="auto", n_restarts=8, seed=0, tol=1e-9, max_iter=5000):
    """min over Q_B of D_f(P_AB || P_A x Q_B) - D_f(P_B || Q_B).

    Uses P_B, the PV minimiser and ``n_restarts`` random Dirichlet points as
    starting values and keeps the best (earliest on ties). Minimisers on the
    boundary make the gap close slowly, hence the modest iteration cap.
    """
    g = get_generator(g)
    J = check_joint(J, "J")
    if not g.in_class_F:
        warnings.warn(f"generator {g.name} is not flagged as class F; the MBGYA "
                      "quantity may fail to be a dependence measure", stacklevel=2)
    pb = J.sum(axis=0)
    if method == "auto":
        if _is_kl_family(g):
            return MutualInfoResult(mi_ckz(J, g), pb.copy(), 0, 0.0, True, "mbgya", g.name)
        if g.name.startswith("alpha:"):
            return MutualInfoResult(_alpha_mbgya(J, g.params[0]), None, 0, 0.0, True,
                                    "mbgya", g.name)
    elif method != "solver":
        raise ValueError("method must be 'auto' or 'solver'")
    prob = _QProblem(J, g, subtract_marginal=True)
    pv = _solve_q(_QProblem(J, g, subtract_marginal=False), [prob.pb.copy()], tol, max_iter)
    rng = np.random.default_rng(seed)
    k = int(prob.support.sum())
    starts = [prob.pb.copy(), pv.x] + [rng.dirichlet(np.ones(k)) for _ in range(n_restarts)]
    res = _solve_q(prob, starts, tol, max_iter)
    val = res.fun
    if -1e-12 < val < 0:
        val = 0.0
    return MutualInfoResult(val, prob.embed(res.x), res.n_iter, res.gap, res.converged,
                            "mbgya", g.name)


def mutual_information(J, g, flavor="ckz", **kw):
    """Dispatch on ``flavor``; returns a float."""
    flavor = _flavor(flavor)
    if flavor == "ckz":
        return mi_ckz(J, g)
    if flavor == "pv":
        return mi_pv(J, g, **kw).value
    return mi_mbgya(J, g, **kw).value


def f_entropy(P, g, flavor="ckz", **kw):
    """H_f(X) = I_f(X;X) in the requested flavour."""
    g = get_generator(g)
    P = check_pmf(P, "P")
    flavor = _flavor(flavor)
    if flavor == "ckz":
        p = P[P > 0]
        s2 = float(np.sum(p * p))
        return g.f_at_zero * (1.0 - s2) + float(np.sum(p * p * np.asarray(g.f(1.0 / p))))
    return mutual_information(np.diag(P), g, flavor, **kw)


def ab_gap(J12U, g, flavor="ckz", experimental=False, **kw):
    """I_f(X1,X2;U) - I_f(X1;U) - I_f(X2;U) for independent X1, X2.

    The PV flavour is accepted only with ``experimental=True``; its sign is
    not known in general.
    """
    g = get_generator(g)
    J = check_joint(J12U, "J12U", ndim=3)
    flavor = _flavor(flavor)
    if flavor == "pv" and not experimental:
        raise ValueError("the PV flavour of ab_gap requires experimental=True")
    p12 = J.sum(axis=2)
    if np.max(np.abs(p12 - np.outer(p12.sum(axis=1), p12.sum(axis=0)))) > 1e-10:
        raise ValueError("X1 and X2 are not independent")
    n1, n2, nu = J.shape
    parts = [mutual_information(J.reshape(n1 * n2, nu), g, flavor, **kw),
             mutual_information(J.sum(axis=1), g, flavor, **kw),
             mutual_information(J.sum(axis=0), g, flavor, **kw)]
    if math.isinf(parts[0]) and any(math.isinf(p) for p in parts[1:]):
        raise IndeterminateError("AB gap is inf - inf")
    return parts[0] - parts[1] - parts[2]


class OrderingChain(NamedTuple):
    kappa_shannon: float
    ckz: float
    pv: float
    mbgya: float

    def violations(self, tol=1e-8):
        v = list(self)
        bad = [i for i in range(3) if v[i] < v[i + 1] - tol]
        if v[3] < -tol:
            bad.append(3)
        return bad


def ordering_chain(J, g, **kw):
    """(kappa * I, I_CKZ, I_PV, I_MBGYA), expected to be nonincreasing."""
    g = get_generator(g)
    J = check_joint(J, "J")
    mi = shannon_mi(J)
    if abs(mi) < 1e-14:
        mi = 0.0
    k = g.kappa
    scaled = 0.0 if mi == 0.0 else k * mi
    return OrderingChain(scaled, mi_ckz(J, g), mi_pv(J, g, **kw).value,
                         mi_mbgya(J, g, **kw).value)
