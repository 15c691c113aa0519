"""Generalization-error bounds for learning algorithms with limited dependence.

A learning problem is a finite hypothesis set, a finite instance set carrying a
distribution ``mu`` and a loss table ``loss[w, z]``. The per-sample gap is
``gen(w, z) = L_mu(w) - loss(w, z)`` with ``L_mu(w) = E_mu loss(w, Z)``.

The sharpest bound given a per-sample information budget R is a
distortion-rate problem with the (signed) distortion ``-gen``:

    u2(R) = sup { E gen(W, Z) : I(W; Z) <= R } = -D(R) for d(z, w) = -gen(w, z).
"""

from dataclasses import asdict, dataclass, field
import itertools
import json
import math
from typing import NamedTuple

import numpy as np
from scipy.special import logsumexp
from scipy.optimize import linprog
from scipy.stats import multinomial

from ._scalar import invert_decreasing_convex, maximize_unimodal_log, minimize_convex
from ._validation import check_matrix, check_nonnegative, check_pmf, check_positive
from .generators import get_generator
from ._barrier import barrier_channel
from .ratedist import _CKZProblem, InfeasibleError, dr_classical, dr_classical_point, f_dr_ckz, mbgya_dr


@dataclass(frozen=True)
class LearningInstance:
    """mu over instances, loss[w, z] over hypotheses x instances, sample size n."""

    mu: np.ndarray
    loss: np.ndarray
    n: int = 1
    hypotheses: np.ndarray | None = None
    sigma2: float | None = None

    def __post_init__(self):
        mu = check_pmf(self.mu, "mu")
        loss = np.asarray(self.loss, dtype=float)
        if loss.ndim != 2 or loss.shape[1] != mu.size:
            raise ValueError(f"loss must have shape (|W|, {mu.size}), got {loss.shape}")
        if not np.isfinite(loss).all():
            raise ValueError("loss must be finite")
        if int(self.n) != self.n or self.n < 1:
            raise ValueError("n must be a positive integer")
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "loss", loss)
        object.__setattr__(self, "n", int(self.n))
        if self.hypotheses is not None:
            object.__setattr__(self, "hypotheses", np.asarray(self.hypotheses, dtype=float))

    @property
    def risk(self):
        """Population risk L_mu(w) per hypothesis."""
        return self.loss @ self.mu

    @property
    def gap(self):
        """gen(w, z) = L_mu(w) - loss(w, z)."""
        return self.risk[:, None] - self.loss

    @property
    def distortion(self):
        """Rows are instances, columns hypotheses: d(z, w) = -gen(w, z)."""
        return -self.gap.T

    @property
    def loss_range(self):
        return float(self.loss.max() - self.loss.min())

    @property
    def subgaussian_sigma2(self):
        """Explicit sigma2 if given, else (range / 2)^2 from Hoeffding's lemma."""
        if self.sigma2 is not None:
            return float(self.sigma2)
        return (self.loss_range / 2.0) ** 2

    def with_mu(self, mu):
        return LearningInstance(mu, self.loss, self.n, self.hypotheses, self.sigma2)


@dataclass
class BoundReport:
    bound_name: str
    value: float
    inputs: dict = field(default_factory=dict)
    unit: str = "raw"

    def __float__(self):
        return float(self.value)

    def to_dict(self):
        out = asdict(self)
        out["value"] = self.value if math.isfinite(self.value) else str(self.value)
        return out

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True, default=_jsonable)


def _jsonable(x):
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    return str(x)


# explicit formulas -----------------------------------------------------------

def xu_raginsky(sigma2, I, n):
    """sqrt(2 sigma2 I / n)."""
    sigma2 = check_nonnegative(sigma2, "sigma2")
    I = check_nonnegative(I, "I")
    n = check_positive(n, "n")
    return math.sqrt(2.0 * sigma2 * I / n)


def bu_individual(sigma2, I_list):
    """Average of sqrt(2 sigma2 I_i) over the per-sample informations."""
    sigma2 = check_nonnegative(sigma2, "sigma2")
    I = np.asarray(I_list, dtype=float)
    if I.ndim != 1 or I.size == 0 or (I < 0).any():
        raise ValueError("I_list must be a nonempty vector of nonnegative values")
    return float(np.mean(np.sqrt(2.0 * sigma2 * I)))


def chi2_gen_bound(sigma2, chi2_joint, n):
    """sqrt(sigma2 * chi2 / n) for losses with variance at most sigma2."""
    sigma2 = check_nonnegative(sigma2, "sigma2")
    chi2_joint = check_nonnegative(chi2_joint, "chi2_joint")
    n = check_positive(n, "n")
    return math.sqrt(sigma2 * chi2_joint / n)


def chi2_gen_bound_individual(sigma2, chi2_list):
    """Average of sqrt(sigma2 * chi2_i) over per-sample chi-square informations."""
    c = np.asarray(chi2_list, dtype=float)
    if c.ndim != 1 or c.size == 0 or (c < 0).any():
        raise ValueError("chi2_list must be a nonempty vector of nonnegative values")
    return float(np.mean(np.sqrt(check_nonnegative(sigma2, "sigma2") * c)))


def uniform_f_entropy(card_W, g):
    """f(0)(1 - 1/k) + f(k)/k, the f-entropy of a uniform variable on k points."""
    g = get_generator(g)
    k = int(card_W)
    if k < 1:
        raise ValueError("card_W must be >= 1")
    return g.f_at_zero * (1.0 - 1.0 / k) + float(g.f(float(k))) / k


def optimal_skew(card_W):
    if card_W < 3:
        raise ValueError("the optimal skew parameter needs card_W >= 3")
    return 1.0 / (card_W - 1.0)


def finite_hypothesis_bound(card_W, sigma2, n, alpha=0.0):
    """sqrt(2 sigma2 H / ((1 - alpha)^2 n)) with H the skew-generator entropy of W_unif.

    ``alpha="optimal"`` uses alpha = 1/(card_W - 1).
    """
    sigma2 = check_nonnegative(sigma2, "sigma2")
    n = check_positive(n, "n")
    if isinstance(alpha, str):
        if alpha != "optimal":
            raise ValueError("alpha must be a number in [0, 1) or 'optimal'")
        alpha = optimal_skew(card_W)
    if not 0.0 <= alpha < 1.0:
        raise ValueError("alpha must lie in [0, 1)")
    H = uniform_f_entropy(card_W, f"skew:{alpha!r}")
    return math.sqrt(2.0 * sigma2 * H / ((1.0 - alpha) ** 2 * n))


class GaussianMeanCalc(NamedTuple):
    I_per_sample: float
    erm_gen_exact: float
    u2hat_bound: float


def gaussian_mean_calc(d, sigma2, n, c=1.0):
    """Mean estimation of N(beta, sigma2 I_d) under squared loss.

    Returns the per-sample information of the sample mean, its exact
    generalization gap and the variance-constrained rate-distortion bound
    at that information level, for an estimator of variance c sigma2 d / n.
    """
    if int(d) != d or d < 1:
        raise ValueError("d must be a positive integer")
    if int(n) != n or n < 2:
        raise ValueError("n must be an integer >= 2")
    sigma2 = check_positive(sigma2, "sigma2")
    I = 0.5 * d * math.log(n / (n - 1.0))
    var_z = sigma2 * d
    erm = 2.0 * var_z / n
    bound = c * var_z / n + var_z * (1.0 - math.exp(-2.0 * I / d))
    return GaussianMeanCalc(I, erm, bound)


# rate-distortion bounds ---------------------------------------------------------

def u2(inst, R, **kw):
    """sup E gen(W, Z) over kernels with I(W; Z) <= R (nats)."""
    R = check_nonnegative(R, "R")
    if R == 0:
        # every hypothesis has zero expected gap
        return 0.0
    return 0.0 - dr_classical(inst.mu, inst.distortion, R, **kw)


def u2_point(inst, R, **kw):
    """Like :func:`u2` but returns the optimising RDPoint (distortion = -value)."""
    return dr_classical_point(inst.mu, inst.distortion, check_nonnegative(R, "R"), **kw)


def u1_upper(inst, I, **kw):
    """Single-letter upper bound u2(I / n) on the block bound u1(I)."""
    return u2(inst, check_nonnegative(I, "I") / inst.n, **kw)


def _block(inst):
    k = inst.mu.size
    seqs = list(itertools.product(range(k), repeat=inst.n))
    src = np.array([np.prod(inst.mu[list(s)]) for s in seqs])
    emp = np.array([inst.loss[:, list(s)].mean(axis=1) for s in seqs])
    return src, emp


def u1_exact(inst, R, max_cells=4096, **kw):
    """sup E gen(W, S) over kernels from the whole sample with I(W; S) <= R.

    Solved on the product source, so the cost grows like |Z|^n.
    """
    R = check_nonnegative(R, "R")
    if inst.mu.size ** inst.n * inst.loss.shape[0] > max_cells:
        raise ValueError("instance too large for the block computation")
    src, emp = _block(inst)
    d = emp - inst.risk[None, :]
    return -dr_classical(src, d, R, **kw)


def u2_f(inst, R, g, flavor="ckz", **kw):
    """u2 with the f-information constraint I_f(W; Z) <= R (CKZ or MBGYA)."""
    R = check_nonnegative(R, "R")
    flavor = str(flavor).lower()
    if flavor == "ckz":
        return -f_dr_ckz(inst.mu, inst.distortion, R, g, **kw)
    if flavor == "mbgya":
        return -mbgya_dr(inst.mu, inst.distortion, R, g, **kw)
    raise ValueError("flavor must be 'ckz' or 'mbgya'")


def max_over_mu_u2(inst, R, step=0.01, refine=True):
    """Heuristic envelope max over binary mu of u2(R): 0.01 grid plus local refinement.

    Returns (value, p) with mu = (1 - p, p).
    """
    if inst.mu.size != 2:
        raise ValueError("max over mu is implemented for two-point instance sets")
    ps = np.round(np.arange(step, 1.0, step), 12)
    vals = np.array([u2(inst.with_mu([1.0 - p, p]), R) for p in ps])
    k = int(np.argmax(vals))
    best_v, best_p = float(vals[k]), float(ps[k])
    if refine and R > 0:
        lo, hi = ps[max(k - 1, 0)], ps[min(k + 1, ps.size - 1)]
        if hi > lo:
            p, v = minimize_convex(lambda p: -u2(inst.with_mu([1.0 - p, p]), R)
                                   if lo <= p <= hi else math.inf, lo, hi)
            if -v > best_v:
                best_v, best_p = -v, p
    return best_v, best_p


# conjugate-based explicit bound --------------------------------------------------

def psi_closed_form(g, sigma2, x):
    """Closed forms of the conjugate bound: kl-norm sqrt(2 s x), chi2 sqrt(s x)."""
    g = get_generator(g)
    x = check_nonnegative(x, "x")
    sigma2 = check_nonnegative(sigma2, "sigma2")
    if g.name == "kl-norm":
        return math.sqrt(2.0 * sigma2 * x)
    if g.name == "chi2":
        return math.sqrt(sigma2 * x)
    raise ValueError(f"no closed form registered for {g.name}")


def psi_fstar(inst, x, g, sigma2=None):
    """inf over lam >= 0 and a of (a + x)/lam + (1/lam) sup_w E f*(lam gen(w, Z) - a).

    With ``inst=None`` the closed form for ``sigma2`` is returned. Otherwise
    the infimum is computed numerically. It is written in the temperature
    t = 1/lam and shift b = a/lam as
    inf_t,b  t x + b + t sup_w E f*((gen(w, Z) - b)/t),
    which is jointly convex in (t, b).
    """
    g = get_generator(g)
    x = check_nonnegative(x, "x")
    if inst is None:
        if sigma2 is None:
            raise ValueError("either an instance or sigma2 is required")
        return psi_closed_form(g, sigma2, x)
    mu = inst.mu
    live = mu > 0
    c = inst.gap[:, live]
    m = mu[live]
    lo_c, hi_c = float(c.min()), float(c.max())
    spread = hi_c - lo_c
    if spread <= 1e-15 * max(1.0, abs(hi_c)):
        return 0.0
    worst = float(c.max(axis=1).max())
    slope1 = float(np.asarray(g.f1(np.array([1.0])))[0])

    def at(t):
        def h(s):
            b = s - t * slope1
            vals = np.asarray(g.fstar((c - b) / t), dtype=float) @ m
            return t * x + b + t * float(vals.max())
        return minimize_convex(h, lo_c, hi_c)[1]

    value, _, _ = maximize_unimodal_log(lambda t: -at(t), 1e-8 * spread, 1e8 * spread, 161)
    return max(min(-value, worst), 0.0)


# auxiliary loss ------------------------------------------------------------------

def _check_aux(inst, aux_loss):
    aux = np.asarray(aux_loss, dtype=float)
    if aux.shape != inst.loss.shape or not np.isfinite(aux).all():
        raise ValueError("aux_loss must be finite with the shape of the loss table")
    return aux


def max_aux_risk(inst, R, aux_loss):
    """Largest E aux(W, Z) reachable with I(W; Z) <= R."""
    aux = _check_aux(inst, aux_loss)
    return -dr_classical(inst.mu, -aux.T, R)


def _aux_lp(inst, aux, v_n):
    """Smallest E[-gen] over all kernels with E aux >= v_n (no rate limit)."""
    live = inst.mu > 0
    P = inst.mu[live]
    d = inst.distortion[live]
    a = aux.T[live]
    k, m = d.shape
    eq = np.kron(np.eye(k), np.ones(m))
    res = linprog((P[:, None] * d).ravel(), A_ub=[-(P[:, None] * a).ravel()], b_ub=[-v_n],
                  A_eq=eq, b_eq=np.ones(k), bounds=(0, None), method="highs")
    if res.status != 0:
        raise InfeasibleError(f"no kernel reaches aux risk {v_n}")
    return float(res.fun), res.x.reshape(k, m)


def aux_loss_u2(inst, R, aux_loss, v_n, tol=1e-10):
    """sup E gen(W, Z) over kernels with I(W; Z) <= R and E aux(W, Z) >= v_n.

    Solved in primal form. For a distortion level D the barrier method
    minimises the rate under the two linear constraints E[-gen] <= D and
    E aux >= v_n; the rate budget R is then met by a safeguarded Newton
    iteration on D.
    """
    R = check_nonnegative(R, "R")
    aux = _check_aux(inst, aux_loss)
    if v_n == -math.inf:
        return u2(inst, R)
    const = aux @ inst.mu
    k = int(np.argmax(const))
    # an ERM value is at most min_w E aux(w, Z); below the best constant the
    # constant kernel on that hypothesis is strictly feasible
    if v_n > const[k] - 1e-12:
        raise InfeasibleError(f"v_n = {v_n} is not below the best constant aux risk {const[k]}")
    if R == 0:
        return 0.0
    free = u2_point(inst, R)
    if float(np.sum(inst.mu[:, None] * free.channel * aux.T)) >= v_n:
        # the unconstrained optimum already meets the aux constraint
        return 0.0 - free.distortion
    Dlo, W_lp = _aux_lp(inst, aux, v_n)
    if Dlo >= -1e-15:
        return 0.0
    live = inst.mu > 0
    P = inst.mu[live]
    prob = _CKZProblem(inst.mu, inst.distortion, get_generator("kl"))
    m = aux.shape[0]
    Wk = np.zeros_like(W_lp)
    Wk[:, k] = 1.0
    U = np.full_like(W_lp, 1.0 / m)
    lin = P[:, None] * prob.dl
    aux_lin = -P[:, None] * aux.T[live]

    def start(D):
        theta = 0.5 * (1.0 - D / Dlo)
        W = (1.0 - theta) * W_lp + theta * Wk
        for eps in 0.5 ** np.arange(1, 60):
            W0 = (1.0 - eps) * W + eps * U
            if float(np.sum(lin * W0)) < D and float(np.sum(aux_lin * W0)) < -v_n:
                return W0
        raise InfeasibleError("no strictly feasible kernel found")

    def solve(D):
        res = barrier_channel(prob._rate, prob._grad, prob._hess, lin, start(D), "rate", D,
                              tol=tol, extra=[(aux_lin, -v_n)])
        return res.rate, res.multiplier, res

    edge = Dlo + 1e-9 * abs(Dlo)
    r_edge, _, res_edge = solve(edge)
    if r_edge <= R:
        return 0.0 - res_edge.linear
    # the Lagrangian dual bounds the answer from above, so -dual sits left of the root
    guess = max(edge, -aux_loss_dual(inst, R, aux, v_n), free.distortion)
    res = invert_decreasing_convex(solve, R, edge, 0.0, x0=guess if guess < 0 else None)[1]
    return 0.0 - res.linear


def aux_loss_dual(inst, R, aux_loss, v_n, eta=None):
    """min over lam, eta >= 0 of lam R - eta v_n + lam sup_w ln E exp((gen + eta aux)/lam).

    The objective is jointly convex (a perspective of log-sum-exp), so two
    nested convex line searches suffice. ``eta`` pins the aux multiplier;
    ``eta=0`` gives the dual of the plain u2.
    """
    R = check_nonnegative(R, "R")
    aux = _check_aux(inst, aux_loss)
    live = inst.mu > 0
    m = inst.mu[live]
    logm = np.log(m)
    c = inst.gap[:, live]
    a = aux[:, live]

    def inner(e):
        h = c + e * a
        spread = float(h.max() - h.min())
        top = float(h.max(axis=1).max())
        best = top
        if R == 0:
            best = min(best, float((h @ m).max()))
        if spread > 1e-15:
            def obj(lam):
                if lam <= 0:
                    return math.inf
                return lam * R + lam * float(logsumexp(h / lam + logm, axis=1).max())
            best = min(best, minimize_convex(obj, 0.0, spread)[1])
        return best - e * v_n

    if eta is not None:
        return inner(check_nonnegative(eta, "eta"))
    if v_n == -math.inf:
        return inner(0.0)
    scale = max(inst.loss_range, 1e-12) / max(float(aux.max() - aux.min()), 1e-12)
    val = minimize_convex(lambda e: inner(e) if e >= 0 else math.inf, 0.0, scale)[1]
    return min(val, inner(0.0))


def erm_value(counts, aux_loss):
    """min_w of the empirical aux risk for instance counts."""
    counts = np.asarray(counts, dtype=float)
    return float(np.min(np.asarray(aux_loss, float) @ counts) / counts.sum())


def vn_exact(mu, aux_loss, n):
    """Expected empirical aux risk of ERM over n i.i.d. samples, by type enumeration."""
    mu = check_pmf(mu, "mu")
    aux = check_matrix(np.asarray(aux_loss, float).T, mu.size, "aux_loss").T
    if int(n) != n or n < 1:
        raise ValueError("n must be a positive integer")
    k = mu.size
    total = 0.0
    for cut in itertools.combinations(range(n + k - 1), k - 1):
        bounds = (-1,) + cut + (n + k - 1,)
        counts = np.diff(bounds) - 1
        p = float(multinomial.pmf(counts, n, mu))
        if p > 0:
            total += p * erm_value(counts, aux)
    return total


class Interval(NamedTuple):
    low: float
    center: float
    high: float


def vn_estimate(samples, aux_loss, confidence=0.95):
    """ERM aux risk on the sample +- the McDiarmid half-width.

    ``samples`` are instance indices into the columns of ``aux_loss``. The
    bounded-difference constant is the largest per-hypothesis range of aux.
    """
    aux = np.asarray(aux_loss, dtype=float)
    s = np.asarray(samples)
    if s.ndim != 1 or s.size == 0:
        raise ValueError("samples must be a nonempty vector of instance indices")
    if not 0.0 < confidence < 1.0:
        raise ValueError("confidence must lie in (0, 1)")
    counts = np.bincount(s.astype(int), minlength=aux.shape[1])
    center = erm_value(counts, aux)
    c = float((aux.max(axis=1) - aux.min(axis=1)).max())
    t = c * math.sqrt(math.log(2.0 / (1.0 - confidence)) / (2.0 * s.size))
    return Interval(center - t, center, center + t)


class BudgetVerdict(NamedTuple):
    ok: bool
    total: float
    budget: float


def entropy_budget_check(I_list, card_W, g, tol=1e-9):
    """Sum of per-sample f-informations against the f-entropy of a uniform W."""
    I = np.asarray(I_list, dtype=float)
    total = float(I.sum())
    budget = uniform_f_entropy(card_W, g)
    return BudgetVerdict(total <= budget + tol, total, budget)


# instances used by the figure drivers ------------------------------------------

def product_loss_instance(p=0.5, n=1):
    """W = Z = {0, 1}, loss(w, z) = w z, mu = Bern(p)."""
    w = np.array([0.0, 1.0])
    return LearningInstance([1.0 - p, p], np.outer(w, w), n, w)


def absolute_loss_instance(p=0.5, n=1, n_grid=101):
    """W = [0, 1] on an even grid, Z = {0, 1}, loss(w, z) = |w - z|, mu = Bern(p)."""
    w = np.linspace(0.0, 1.0, n_grid)
    z = np.array([0.0, 1.0])
    return LearningInstance([1.0 - p, p], np.abs(w[:, None] - z[None, :]), n, w)


def squared_aux(inst):
    z = np.arange(inst.mu.size, dtype=float)
    w = inst.hypotheses if inst.hypotheses is not None else np.arange(inst.loss.shape[0], dtype=float)
    return (w[:, None] - z[None, :]) ** 2


def mismatch_aux(inst):
    z = np.arange(inst.mu.size, dtype=float)
    w = inst.hypotheses if inst.hypotheses is not None else np.arange(inst.loss.shape[0], dtype=float)
    return -(w[:, None] != z[None, :]).astype(float)

