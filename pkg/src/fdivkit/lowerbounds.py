"""Explicit lower bounds on distortion-rate functions and related norms.

All bounds here are suprema over a single scale parameter lam >= 0. Each
objective is concave in 1/lam, so a log-spaced grid followed by a bounded
Brent refinement in log(lam) finds the supremum. The lam -> 0 and
lam -> inf limits are evaluated analytically and compete with the interior
optimum.
"""

from dataclasses import dataclass
import math

import numpy as np
from scipy.optimize import brentq, minimize_scalar
from scipy.special import gammaln, logsumexp

from ._validation import check_matrix, check_nonnegative, check_pmf
from .generators import get_generator
from ._scalar import maximize_unimodal_log, minimize_convex as _minimize_convex
from .information import shannon_entropy

LAM_LO = 1e-6
LAM_HI = 1e6


@dataclass(frozen=True)
class DualBoundResult:
    value: float
    lambda_star: float
    a_star: float | None = None
    inner_sup_argmax: int | None = None
    boundary: str | None = None

    def __float__(self):
        return float(self.value)


def _source(PX, d):
    PX = check_pmf(PX, "PX")
    d = check_matrix(d, len(PX), "d")
    return PX, d


def _sup_over_log_lambda(objective, lo=LAM_LO, hi=LAM_HI, n_grid=241):
    return maximize_unimodal_log(objective, lo, hi, n_grid)


def _best(interior, limits):
    """Combine the interior search with analytic limit candidates."""
    value, lam, edge = interior
    result = (value, lam, "interior-edge" if edge else None)
    for name, lam_lim, v in limits:
        if v > result[0] + 1e-15:
            result = (v, lam_lim, name)
    return result


def lb1_reference(PX, d, R):
    """Counting-measure reference bound on D(R) for nonnegative distortions.

    Requires d >= 0 and a zero in every row (each source letter has a
    distortion-free reconstruction).
    """
    PX, d = _source(PX, d)
    R = check_nonnegative(R, "R")
    if (d < 0).any():
        raise ValueError("lb1_reference needs a nonnegative distortion")
    if np.any(d.min(axis=1) > 0):
        raise ValueError("every source letter needs a zero-distortion reconstruction")
    H = shannon_entropy(PX)
    n = len(PX)

    def value(lam):
        log_nu = float(np.max(logsumexp(-lam * d, axis=0)))
        return -(R + log_nu - H) / lam

    limits = []
    # lam -> inf: log nu stays bounded, so the ratio vanishes
    limits.append(("lambda->inf", math.inf, 0.0))
    if R == 0 and abs(H - math.log(n)) < 1e-12:
        limits.append(("lambda->0", 0.0, float(np.min(d.mean(axis=0)))))
    v, lam, flag = _best(_sup_over_log_lambda(value), limits)
    return DualBoundResult(v, lam, None, None, flag)


def _lb2_log_mgf(PX, d, lam):
    """sup over reconstructions of ln E exp(-lam d), with its argmax."""
    vals = logsumexp(-lam * d, axis=0, b=PX[:, None])
    k = int(np.argmax(vals))
    return float(vals[k]), k


def lb2_dual(PX, d, R):
    """sup_lam -(R + sup_xhat ln E exp(-lam d(X, xhat))) / lam.

    Valid for any real distortion, including negative values.
    """
    PX, d = _source(PX, d)
    R = check_nonnegative(R, "R")

    def value(lam):
        return -(R + _lb2_log_mgf(PX, d, lam)[0]) / lam

    means = PX @ d
    live = d[PX > 0]
    limits = [("lambda->inf", math.inf, float(np.min(live)))]
    if R == 0:
        limits.append(("lambda->0", 0.0, float(np.min(means))))
    else:
        # Hoeffding's lemma; wins only when the optimal lam is below the grid
        spread = float(live.max() - live.min())
        lam_h = math.sqrt(8.0 * R) / spread if spread > 0 else math.inf
        limits.append(("lambda->0", lam_h, float(np.min(means)) - spread * math.sqrt(R / 2.0)))
    v, lam, flag = _best(_sup_over_log_lambda(value), limits)
    if math.isinf(lam):
        k = int(np.argmin(np.min(np.where(PX[:, None] > 0, d, np.inf), axis=0)))
    elif lam == 0.0:
        k = int(np.argmin(means))
    else:
        k = _lb2_log_mgf(PX, d, lam)[1]
    return DualBoundResult(v, lam, None, k, flag)


def subgaussian_lb(sigma2, R):
    """-sqrt(2 sigma2 R)."""
    sigma2 = check_nonnegative(sigma2, "sigma2")
    R = check_nonnegative(R, "R")
    return -math.sqrt(2.0 * sigma2 * R)


def _phi_f(PX, d, g, lam, a):
    vals = PX @ np.asarray(g.fstar(-lam * d - a), dtype=float)
    k = int(np.argmax(vals))
    return float(vals[k]), k


def f_dual_lb(PX, d, R, g, inner="auto"):
    """Conjugate lower bound on the f-distortion-rate function.

    sup over lam >= 0 and real a of -(a + R)/lam - (1/lam) sup_xhat E f*(-lam d - a).
    For t ln t - t + 1 the inner minimum over a is ln of the largest moment
    generating value; ``inner="numeric"`` forces the 1D search anyway.
    """
    g = get_generator(g)
    PX, d = _source(PX, d)
    R = check_nonnegative(R, "R")
    if inner not in ("auto", "numeric"):
        raise ValueError("inner must be 'auto' or 'numeric'")
    closed = inner == "auto" and g.name == "kl-norm"
    slope1 = float(np.asarray(g.f1(np.array([1.0])))[0])
    live = d[PX > 0]
    dmin, dmax = float(live.min()), float(live.max())

    def inner_min(lam):
        if closed:
            m, _ = _lb2_log_mgf(PX, d, lam)
            return m, m
        # a = -lam * s - f'(1) keeps the bracket [dmin, dmax] in s independent of lam
        s, val = _minimize_convex(
            lambda s: -lam * s - slope1 + _phi_f(PX, d, g, lam, -lam * s - slope1)[0],
            dmin, dmax)
        return val, -lam * s - slope1

    def value(lam):
        return -(R + inner_min(lam)[0]) / lam

    limits = [("lambda->inf", math.inf, dmin)]
    if R == 0:
        limits.append(("lambda->0", 0.0, float(np.min(PX @ d))))
    v, lam, flag = _best(_sup_over_log_lambda(value), limits)
    a_star, k = None, None
    if 0 < lam < math.inf:
        a_star = inner_min(lam)[1]
        k = _phi_f(PX, d, g, lam, a_star)[1]
    return DualBoundResult(v, lam, a_star, k, flag)


def smoothed_expectation(mu, gvals, R, g):
    """Dual value of sup { E_nu[g] : D_f(nu || mu) <= R }.

    Evaluates inf over lam >= 0 and b of lam R + b + lam E_mu f*((g - b)/lam),
    which is jointly convex in (lam, b).
    """
    g = get_generator(g)
    mu = check_pmf(mu, "mu")
    gv = np.asarray(gvals, dtype=float)
    if gv.shape != mu.shape or not np.isfinite(gv).all():
        raise ValueError("gvals must be finite and match mu")
    R = check_nonnegative(R, "R")
    live = gv[mu > 0]
    lo_g, hi_g = float(live.min()), float(live.max())
    mean = float(mu @ gv)
    if hi_g - lo_g <= 1e-15 * max(1.0, abs(hi_g)):
        return mean
    slope1 = float(np.asarray(g.f1(np.array([1.0])))[0])

    def at(lam):
        # b = c - lam f'(1) with c between the extremes of g
        def h(c):
            b = c - lam * slope1
            return lam * R + b + lam * float(mu @ np.asarray(g.fstar((gv - b) / lam), dtype=float))
        return _minimize_convex(h, lo_g, hi_g)[1]

    scale = hi_g - lo_g
    grid = np.linspace(math.log(1e-8 * scale), math.log(1e8 * scale), 161)
    vals = np.array([at(math.exp(s)) for s in grid])
    vals = np.where(np.isnan(vals), np.inf, vals)
    k = int(np.argmin(vals))
    best = float(vals[k])
    a, b = grid[max(k - 1, 0)], grid[min(k + 1, grid.size - 1)]
    res = minimize_scalar(lambda s: at(math.exp(s)), bounds=(a, b), method="bounded",
                          options={"xatol": 1e-12, "maxiter": 200})
    best = min(best, float(res.fun), hi_g)
    if R == 0:
        best = min(best, mean)
    return max(best, mean)


def orlicz_norm(mu, gvals, g):
    """inf { t > 0 : E_mu f*(|g|/t) <= 1 } by bisection on log t."""
    g = get_generator(g)
    mu = check_pmf(mu, "mu")
    x = np.abs(np.asarray(gvals, dtype=float))
    if x.shape != mu.shape:
        raise ValueError("gvals must match mu")
    if not (x[mu > 0] > 0).any():
        return 0.0
    if float(np.asarray(g.fstar(np.array([0.0])))[0]) >= 1.0:
        raise ValueError("f*(0) >= 1: the unit ball condition is never met")

    def excess(s):
        return float(mu @ np.asarray(g.fstar(x / math.exp(s)), dtype=float)) - 1.0

    top = float(x.max())
    lo, hi = math.log(top) - 1.0, math.log(top) + 1.0
    while excess(lo) <= 0:
        lo -= 2.0
    while excess(hi) > 0:
        hi += 2.0
    return math.exp(brentq(excess, lo, hi, xtol=1e-15))


def psi2_norm(mu, gvals):
    """Sub-Gaussian norm: inf { t > 0 : E exp(g^2/t^2) <= 2 }."""
    mu = check_pmf(mu, "mu")
    x = np.abs(np.asarray(gvals, dtype=float))
    if not (x[mu > 0] > 0).any():
        return 0.0

    def excess(s):
        return float(logsumexp((x / math.exp(s)) ** 2, b=mu)) - math.log(2.0)

    top = float(x.max())
    lo, hi = math.log(top) - 1.0, math.log(top) + 1.0
    while excess(lo) <= 0:
        lo -= 2.0
    while excess(hi) > 0:
        hi += 2.0
    return math.exp(brentq(excess, lo, hi, xtol=1e-15))


def amemiya_norm(mu, gvals, g, check=True):
    """inf_{t > 0} (1 + E_mu f*(t|g|)) / t.

    With ``check=True`` and f*(0) = 0 the Orlicz sandwich
    ||g|| <= ||g||_A <= 2 ||g|| is verified and a violation raises.
    """
    g = get_generator(g)
    mu = check_pmf(mu, "mu")
    x = np.abs(np.asarray(gvals, dtype=float))
    if not (x[mu > 0] > 0).any():
        return 0.0

    def value(s):
        t = math.exp(s)
        return (1.0 + float(mu @ np.asarray(g.fstar(t * x), dtype=float))) / t

    centre = -math.log(float(x.max()))
    grid = np.linspace(centre - 30.0, centre + 30.0, 601)
    vals = np.array([value(s) for s in grid])
    k = int(np.nanargmin(vals))
    a, b = grid[max(k - 1, 0)], grid[min(k + 1, grid.size - 1)]
    res = minimize_scalar(value, bounds=(a, b), method="bounded",
                          options={"xatol": 1e-13, "maxiter": 500})
    out = min(float(vals[k]), float(res.fun))
    if check and float(np.asarray(g.fstar(np.array([0.0])))[0]) == 0.0:
        orl = orlicz_norm(mu, x, g)
        tol = 1e-9 * max(1.0, orl)
        if not (orl - tol <= out <= 2 * orl + tol):
            raise ArithmeticError(f"Orlicz sandwich violated: {orl} vs {out}")
    return out


def lp_ball_volume(k, r):
    """Volume of the unit r-norm ball in R^k."""
    return math.exp(k * math.log(2.0 * math.exp(gammaln(1.0 + 1.0 / r)))
                    - gammaln(1.0 + k / r))


def gaussian_entropy(sigma2, k=1):
    """Differential entropy (nats) of N(0, sigma2 I_k)."""
    return 0.5 * k * math.log(2.0 * math.pi * math.e * sigma2)


def shannon_lb_rnorm(h_source, k, r, R):
    """Shannon lower bound on D(R) for d(x, y) = ||x - y||_r^r in R^k."""
    if k < 1 or r <= 0:
        raise ValueError("need k >= 1 and r > 0")
    if not math.isfinite(h_source):
        raise ValueError("source entropy must be finite")
    R = check_nonnegative(R, "R")
    if math.isinf(R):
        return 0.0
    log_vk = k * math.log(2.0) + k * gammaln(1.0 + 1.0 / r) - gammaln(1.0 + k / r)
    expo = (r / k) * (h_source - R - gammaln(1.0 + k / r) - log_vk)
    return (k / (r * math.e)) * math.exp(expo)
