"""Rate-distortion and distortion-rate functions, Shannon and f-information versions.

All solvers trace the Lagrangian ``min_W I(W) + lam * E[d]`` and bisect on
the multiplier. The returned value is always certified by a concrete channel:
the final answer is the time-sharing mixture of the two bracketing solutions
that meets the target exactly, so ``rd_*`` values are achievable rates and
``dr_*`` values achievable distortions.
"""

from dataclasses import dataclass, field
import itertools
import math

import numpy as np
from scipy.optimize import brentq
from scipy.special import logsumexp, xlog1py, xlogy

from ._barrier import barrier_channel
from ._scalar import invert_decreasing_convex
from ._simplex import TINY
from ._validation import check_matrix, check_nonnegative, check_pmf
from .divergence import _divergence_terms
from .generators import LN2, get_generator
from .information import _QProblem, _solve_q, mi_ckz, mi_mbgya, shannon_mi


class InfeasibleError(ValueError):
    """Target distortion is below the smallest achievable one."""


class ConvergenceError(RuntimeError):
    """An iterative solver hit its iteration cap."""


@dataclass(frozen=True)
class RDPoint:
    rate: float
    distortion: float
    multiplier: float
    channel: np.ndarray = field(repr=False)
    unit: str = "nats"
    iterations: int = 0
    converged: bool = True
    residual: float = 0.0

    @property
    def rate_bits(self):
        return self.rate / LN2 if self.unit == "nats" else self.rate


@dataclass(frozen=True)
class RDCurve:
    rates: np.ndarray
    distortions: np.ndarray
    multipliers: np.ndarray
    unit: str = "nats"


# helpers -------------------------------------------------------------------

def binary_entropy(p, base=2.0):
    p = np.asarray(p, dtype=float)
    h = -(xlogy(p, p) + xlog1py(1.0 - p, -p))
    return h / math.log(base)


def hamming(k, m=None):
    """Hamming distortion between a k-ary source and an m-ary reproduction."""
    m = k if m is None else m
    return 1.0 - np.eye(k, m)


def rd_binary_hamming(D):
    """1 - H2(D) bits for a uniform binary source, zero for D >= 1/2."""
    D = np.asarray(D, dtype=float)
    return np.where(D >= 0.5, 0.0, 1.0 - binary_entropy(np.clip(D, 0.0, 0.5)))


def f_rd_binary_hamming_sq(D):
    """(2D - 1)^2 for g = t^2 - 1 on a uniform binary source, zero for D >= 1/2."""
    D = np.asarray(D, dtype=float)
    return np.where(D >= 0.5, 0.0, (2.0 * D - 1.0) ** 2)


def _is_binary_uniform_hamming(PX, d):
    return (len(PX) == 2 and np.allclose(PX, 0.5, atol=1e-15)
            and np.shape(d) == (2, 2) and np.array_equal(np.asarray(d), hamming(2)))


def _check_problem(PX, d):
    PX = check_pmf(PX, "PX")
    d = check_matrix(d, len(PX), "d")
    return PX, d


def expected_distortion(PX, d, W):
    return float(np.sum(PX[:, None] * W * d))


# Blahut-Arimoto -----------------------------------------------------------

def blahut_arimoto(PX, d, multiplier, tol=1e-10, max_iter=100_000, q0=None, mask=None,
                   raise_on_cap=False):
    """Alternating minimisation of I(W) + multiplier * E[d] (Shannon, nats).

    Stops when Blahut's upper and lower bounds on the Lagrangian minimum
    agree to ``tol`` (relative to max(1, |value|)).
    """
    PX, d = _check_problem(PX, d)
    lam = check_nonnegative(multiplier, "multiplier")
    m = d.shape[1]
    allowed = np.ones(d.shape, bool) if mask is None else np.asarray(mask, bool)
    live = PX > 0
    if not allowed[live].any(axis=1).all():
        raise ValueError("mask leaves a source symbol without reproductions")
    P = PX[live]
    dl = d[live]
    shift = np.where(allowed[live], dl, np.inf).min(axis=1)
    K = np.where(allowed[live], np.exp(-lam * (dl - shift[:, None])), 0.0)
    q = np.full(m, 1.0 / m) if q0 is None else np.maximum(np.asarray(q0, float), TINY)
    q = q / q.sum()
    base = -lam * float(P @ shift)
    # zero-rate shortcut: a point mass at the best constant reproduction is
    # optimal exactly when its Kuhn-Tucker ratios c_y are all <= 1
    cols = np.flatnonzero(allowed[live].all(axis=0))
    if cols.size:
        ystar = cols[np.argmin(P @ dl[:, cols])]
        expo = np.where(allowed[live], -lam * (dl - dl[:, [ystar]]), -np.inf)
        if logsumexp(expo, axis=0, b=P[:, None]).max() <= 1e-14:
            W = np.zeros(d.shape)
            W[:, ystar] = 1.0
            return RDPoint(0.0, expected_distortion(PX, d, W), lam, W, "nats", 0, True, 0.0)
    gap = np.inf
    upper = 0.0
    for it in range(1, max_iter + 1):
        Z = K @ q
        c = (P / Z) @ K
        with np.errstate(divide="ignore"):
            logc = np.log(c)
        head = -float(P @ np.log(Z)) + base
        on = q > 0
        upper = head - float(np.sum(q[on] * xlogy(c[on], c[on])))
        lower = head - float(np.max(logc[c > 0]))
        gap = upper - lower
        q = q * c
        q /= q.sum()
        if gap <= tol * max(1.0, abs(upper)):
            break
    converged = gap <= tol * max(1.0, abs(upper))
    if not converged and raise_on_cap:
        raise ConvergenceError(f"Blahut-Arimoto did not converge in {max_iter} iterations")
    W = np.full(d.shape, 1.0 / m)
    Kq = K * q[None, :]
    W[live] = Kq / Kq.sum(axis=1, keepdims=True)
    rate = shannon_mi(PX[:, None] * W)
    return RDPoint(rate, expected_distortion(PX, d, W), lam, W, "nats", it, converged, gap)


def lagrangian_dual_newton(PX, d, multiplier, tol=1e-12, max_newton=500):
    """Minimise I(W) + multiplier * E[d] through its concave dual.

    The dual is max sum_x P(x) log u_x over u >= 0 with
    sum_x u_x exp(-multiplier d(x, y)) <= 1 for every y: one variable per
    source letter and linear constraints, so a log-barrier Newton method
    converges in a handful of steps per stage. The output distribution is
    read off the barrier multipliers. Meant for the small multipliers where
    Blahut-Arimoto crawls.
    """
    PX, d = _check_problem(PX, d)
    lam = check_nonnegative(multiplier, "multiplier")
    live = PX > 0
    P = PX[live]
    dl = d[live]
    K = np.exp(-lam * (dl - dl.min(axis=1, keepdims=True)))
    u = np.full(P.size, 0.5 / K.sum(axis=0).max())
    m = K.shape[1]

    def value(u, t):
        slack = 1.0 - u @ K
        if (u <= 0).any() or (slack <= 0).any():
            return np.inf, slack
        return -t * float(P @ np.log(u)) - float(np.sum(np.log(slack))), slack

    t = 1.0
    n_newton = 0
    while True:
        for _ in range(100):
            val, slack = value(u, t)
            Ks = K / slack
            grad = -t * P / u + Ks.sum(axis=1)
            H = np.diag(t * P / u ** 2) + Ks @ Ks.T
            step = np.linalg.solve(H, -grad)
            dec = float(-grad @ step)
            n_newton += 1
            if dec / 2 <= 1e-9 or n_newton > max_newton:
                break
            a = 1.0
            while a > 1e-12:
                if value(u + a * step, t)[0] <= val - 0.01 * a * dec:
                    break
                a *= 0.5
            else:
                break
            u = u + a * step
            if a < 1e-4:
                # roundoff stall at large t
                break
        if m / t <= tol or n_newton > max_newton:
            break
        t *= 20.0
    q = 1.0 / (t * value(u, t)[1])
    q /= q.sum()
    logits = np.log(np.maximum(q, 1e-300))[None, :] - lam * d
    W = np.exp(logits - logsumexp(logits, axis=1, keepdims=True))
    return RDPoint(shannon_mi(PX[:, None] * W), expected_distortion(PX, d, W), lam, W,
                   "nats", n_newton, n_newton <= max_newton, m / t)


# generic Lagrangian tracing --------------------------------------------------

class _ShannonProblem:
    def __init__(self, PX, d, tol=1e-10, max_iter=100_000):
        self.PX, self.d = PX, d
        self.tol, self.max_iter = tol, max_iter

    def rate(self, W):
        return shannon_mi(self.PX[:, None] * W)

    def solve(self, lam, warm=None):
        q0 = None if warm is None else self.PX @ warm
        pt = blahut_arimoto(self.PX, self.d, lam, self.tol, min(self.max_iter, 300), q0=q0)
        if pt.converged:
            return pt
        dual = lagrangian_dual_newton(self.PX, self.d, lam)
        polished = blahut_arimoto(self.PX, self.d, lam, self.tol, 300, q0=self.PX @ dual.channel)
        return min((pt, dual, polished), key=lambda p: p.rate + lam * p.distortion)

    def solve_restricted(self, mask):
        return blahut_arimoto(self.PX, self.d, 0.0, self.tol, self.max_iter, mask=mask)


class _CKZProblem:
    """I_f^CKZ over channels; convex in W for every convex generator.

    Solved directly in constrained form by a log-barrier Newton method, so
    no multiplier search is needed.
    """

    def __init__(self, PX, d, g, tol=1e-10):
        self.PX, self.d, self.g = PX, d, g
        self.tol = tol
        self.live = PX > 0
        self.P = PX[self.live]
        self.dl = d[self.live]

    # objective on the live rows ------------------------------------------
    def _rate(self, W):
        return _divergence_terms(self.P[:, None] * W, np.outer(self.P, self.P @ W), self.g)

    def _grad(self, W):
        g, P = self.g, self.P
        r = W / (P @ W)[None, :]
        col = P @ (np.asarray(g.f(r)) - g.tf1(r))
        return P[:, None] * (np.asarray(g.f1(r)) + col[None, :])

    def _hess(self, W):
        P = self.P
        n, m = W.shape
        q = P @ W
        r = W / q[None, :]
        a = P[:, None] * np.asarray(self.g.f2(r))
        b = a * r
        S = np.sum(b * r, axis=0)
        # one n x n block per output column, stacked along the first axis
        blk = (np.einsum("iy,ij->yij", a, np.eye(n)) - np.einsum("iy,j->yij", b, P)
               - np.einsum("i,jy->yij", P, b) + S[:, None, None] * np.outer(P, P)[None])
        H = np.zeros((n, m, n, m))
        H[:, np.arange(m), :, np.arange(m)] = blk / q[:, None, None]
        return H.reshape(n * m, n * m)

    # helpers -----------------------------------------------------------------
    def _full(self, Wl):
        W = np.full(self.d.shape, 1.0 / self.d.shape[1])
        W[self.live] = Wl
        return W

    def rate(self, W):
        return self._rate(np.asarray(W)[self.live])

    def _point(self, res, mult):
        W = self._full(res.W)
        return RDPoint(self._rate(res.W), expected_distortion(self.PX, self.d, W), mult, W,
                       "nats", res.n_newton, res.converged, res.gap)

    def _run(self, mode, level, W0, mask=None):
        return barrier_channel(self._rate, self._grad, self._hess, self.P[:, None] * self.dl,
                               W0, mode, level, mask=mask, tol=self.tol)

    def solve_rd(self, D):
        n, m = self.dl.shape
        Wmin = np.zeros((n, m))
        Wmin[np.arange(n), np.argmin(self.dl, axis=1)] = 1.0
        U = np.full((n, m), 1.0 / m)
        Dmin = float(self.P @ self.dl.min(axis=1))
        DU = float(self.P @ self.dl.mean(axis=1))
        eps = 0.5 if DU <= Dmin else min(0.5, 0.5 * (D - Dmin) / (DU - Dmin))
        res = self._run("rate", D, (1 - eps) * Wmin + eps * U)
        return self._point(res, res.multiplier)

    def solve_dr(self, R):
        # D(R) inverts the convex decreasing R(D); each R(D) is a rate-mode
        # solve, whose linear constraint keeps the barrier well conditioned
        Dmin = float(self.P @ self.dl.min(axis=1))
        D0 = float(np.min(self.P @ self.dl))

        def solve(D):
            pt = self.solve_rd(D)
            return pt.rate, pt.multiplier, pt

        return invert_decreasing_convex(solve, R, Dmin, D0)[1]

    def solve_restricted(self, mask):
        ml = np.asarray(mask, bool)[self.live]
        W0 = np.where(ml, 1.0, 0.0)
        W0 /= W0.sum(axis=1, keepdims=True)
        if ml.sum(axis=1).max() == 1:
            return RDPoint(self._rate(W0), expected_distortion(self.PX, self.d, self._full(W0)),
                           math.inf, self._full(W0))
        res = self._run("free", None, W0, mask=ml)
        return self._point(res, math.inf)


class _MBGYAProblem(_CKZProblem):
    """min_Q [D_f(P_XW || P_X Q) - D_f(P_W || Q)] over channels.

    The gradient follows from the envelope theorem. The Hessian is the
    fixed-Q Hessian minus the Schur correction from the inner minimisation;
    the fixed-Q part is positive semidefinite exactly when 1/f'' is concave.
    """

    def __init__(self, PX, d, g, tol=1e-10):
        super().__init__(PX, d, g, tol)
        self._cache_key = None
        self._cache = None

    def _inner(self, W):
        key = W.tobytes()
        if key != self._cache_key:
            J = self.P[:, None] * W
            prob = _QProblem(J, self.g, subtract_marginal=True)
            starts = [prob.pb.copy()]
            if self._cache is not None and self._cache[1].shape == prob.pb.shape:
                starts.append(self._cache[1])
            res = _solve_q(prob, starts, 1e-14, 10_000)
            self._cache_key = key
            self._cache = (res.fun, res.x, prob.support)
        return self._cache

    def _rate(self, W):
        return max(self._inner(W)[0], 0.0)

    def _grad(self, W):
        _, Qs, sup = self._inner(W)
        Q = np.full(W.shape[1], TINY)
        Q[sup] = Qs
        g, P = self.g, self.P
        q = P @ W
        return P[:, None] * (np.asarray(g.f1(W / Q[None, :])) - np.asarray(g.f1(q / Q))[None, :])

    def _hess(self, W):
        _, Qs, sup = self._inner(W)
        Q = np.full(W.shape[1], TINY)
        Q[sup] = Qs
        g, P = self.g, self.P
        n, m = W.shape
        u = W / Q[None, :]
        s = (P @ W) / Q
        fu = np.asarray(g.f2(u))
        fs = np.asarray(g.f2(s))
        H = np.zeros((n * m, n * m))
        v = np.zeros(n * m)
        asum = 0.0
        for y in range(m):
            ids = np.arange(n) * m + y
            blk = (np.diag(P * fu[:, y]) - fs[y] * np.outer(P, P)) / Q[y]
            B = -(P / Q[y]) * (u[:, y] * fu[:, y] - s[y] * fs[y])
            h = (float(P @ (u[:, y] ** 2 * fu[:, y])) - s[y] ** 2 * fs[y]) / Q[y]
            scale = float(P @ (u[:, y] ** 2 * fu[:, y])) / Q[y]
            if h > 1e-10 * max(scale, 1e-300):
                a = 1.0 / h
                blk = blk - a * np.outer(B, B)
                v[ids] = a * B
                asum += a
            H[np.ix_(ids, ids)] = blk
        if asum > 0:
            H += np.outer(v, v) / asum
        return H


def _zero_rate(PX, d):
    k = int(np.argmin(PX @ d))
    W = np.zeros(d.shape)
    W[:, k] = 1.0
    return RDPoint(0.0, float(PX @ d[:, k]), 0.0, W)


def _min_distortion_mask(PX, d):
    return d <= d.min(axis=1, keepdims=True) + 1e-12


def distortion_range(PX, d):
    """(smallest achievable distortion, distortion reachable at rate zero)."""
    PX, d = _check_problem(PX, d)
    return float(PX @ d.min(axis=1)), float(np.min(PX @ d))


def _limit_point(problem, PX, d):
    pt = problem.solve_restricted(_min_distortion_mask(PX, d))
    return RDPoint(pt.rate, pt.distortion, math.inf, pt.channel, pt.unit,
                   pt.iterations, pt.converged, pt.residual)


def _bracket(problem, PX, d, key, target, lam_lo=1e-6, lam_hi=1e6, max_bisect=200):
    """Bisect log(multiplier) so that the traced quantity ``key`` brackets ``target``.

    ``key`` is 'distortion' (decreasing in the multiplier) or 'rate'
    (increasing). Returns (low-multiplier point, high-multiplier point).
    """
    def below_target_side(pt):
        # True when the point sits on the high-multiplier side of the target
        return pt.distortion <= target if key == "distortion" else pt.rate >= target

    # expand outwards from multiplier 1; BA is slow at tiny multipliers, so
    # they are only visited when the target needs them
    lo = hi = None
    lam, pt = 1.0, problem.solve(1.0)
    while True:
        if below_target_side(pt):
            hi, lam = pt, lam / 10.0
        else:
            lo, lam = pt, lam * 10.0
        if (lo is not None and hi is not None) or not lam_lo <= lam <= lam_hi:
            break
        pt = problem.solve(lam, warm=pt.channel)
    if lo is None:
        lo = _zero_rate(PX, d)
    if hi is None:
        hi = _limit_point(problem, PX, d)
    a, b = math.log(max(lo.multiplier, lam_lo)), math.log(min(hi.multiplier, lam_hi))
    for _ in range(max_bisect):
        if b - a < 1e-12:
            break
        mid = 0.5 * (a + b)
        warm = hi.channel if math.isfinite(hi.multiplier) else lo.channel
        pt = problem.solve(math.exp(mid), warm=warm)
        if below_target_side(pt):
            hi, b = pt, mid
        else:
            lo, a = pt, mid
        if abs(getattr(pt, key) - target) <= 1e-10 * max(1.0, abs(target)):
            break
    return lo, hi


def _mix_for_distortion(problem, PX, d, lo, hi, D):
    if lo is hi or lo.distortion - hi.distortion <= 0:
        return lo
    theta = (lo.distortion - D) / (lo.distortion - hi.distortion)
    theta = min(max(theta, 0.0), 1.0)
    W = (1.0 - theta) * lo.channel + theta * hi.channel
    lam = hi.multiplier if math.isfinite(hi.multiplier) else lo.multiplier
    return RDPoint(problem.rate(W), expected_distortion(PX, d, W), lam, W, "nats",
                   lo.iterations + hi.iterations, lo.converged and hi.converged,
                   max(lo.residual, hi.residual))


def _mix_for_rate(problem, PX, d, lo, hi, R):
    if lo is hi or hi.rate - lo.rate <= 0:
        return lo if lo.rate <= R + 1e-12 else hi

    def mixed(theta):
        return (1.0 - theta) * lo.channel + theta * hi.channel

    f0, f1 = problem.rate(lo.channel) - R, problem.rate(hi.channel) - R
    if f0 >= 0 or f1 <= 0:
        # roundoff at tiny rates can put both ends on one side
        W = lo.channel if f0 >= 0 else hi.channel
    else:
        theta = brentq(lambda t: problem.rate(mixed(t)) - R, 0.0, 1.0, xtol=1e-15, rtol=1e-15)
        W = mixed(theta)
    lam = hi.multiplier if math.isfinite(hi.multiplier) else lo.multiplier
    return RDPoint(problem.rate(W), expected_distortion(PX, d, W), lam, W, "nats",
                   lo.iterations + hi.iterations, lo.converged and hi.converged,
                   max(lo.residual, hi.residual))


def _rd_point(problem, PX, d, D):
    Dmin, D0 = float(PX @ d.min(axis=1)), float(np.min(PX @ d))
    if D >= D0:
        return _zero_rate(PX, d)
    if D < Dmin - 1e-12:
        raise InfeasibleError(f"distortion {D} is below the minimum achievable {Dmin}")
    if D <= Dmin + 1e-12:
        return _limit_point(problem, PX, d)
    if hasattr(problem, "solve_rd"):
        return problem.solve_rd(D)
    lo, hi = _bracket(problem, PX, d, "distortion", D)
    return _mix_for_distortion(problem, PX, d, lo, hi, D)


def _dr_point(problem, PX, d, R):
    R = check_nonnegative(R, "R")
    D0 = float(np.min(PX @ d))
    if R == 0:
        return _zero_rate(PX, d)
    top = _limit_point(problem, PX, d)
    if R >= top.rate:
        return top
    if hasattr(problem, "solve_dr"):
        pt = problem.solve_dr(R)
        return _zero_rate(PX, d) if pt.distortion > D0 else pt
    lo, hi = _bracket(problem, PX, d, "rate", R)
    pt = _mix_for_rate(problem, PX, d, lo, hi, R)
    if pt.distortion > D0:
        return _zero_rate(PX, d)
    return pt


# public API ------------------------------------------------------------------

def rd_classical_point(PX, d, D, **kw):
    PX, d = _check_problem(PX, d)
    return _rd_point(_ShannonProblem(PX, d, **kw), PX, d, float(D))


def rd_classical(PX, d, D, **kw):
    """Shannon R(D) in nats."""
    return rd_classical_point(PX, d, D, **kw).rate


def dr_classical_point(PX, d, R, **kw):
    PX, d = _check_problem(PX, d)
    return _dr_point(_ShannonProblem(PX, d, **kw), PX, d, R)


def dr_classical(PX, d, R, **kw):
    """Shannon D(R) with R in nats."""
    return dr_classical_point(PX, d, R, **kw).distortion


def rd_curve(PX, d, multipliers=None, n=64, **kw):
    """Blahut-Arimoto sweep over log-spaced multipliers."""
    PX, d = _check_problem(PX, d)
    if multipliers is None:
        multipliers = np.logspace(-3, 3, n)
    prob = _ShannonProblem(PX, d, **kw)
    pts, warm = [], None
    for lam in np.asarray(multipliers, dtype=float):
        pt = prob.solve(float(lam), warm=warm)
        warm = pt.channel
        pts.append(pt)
    return RDCurve(np.array([p.rate for p in pts]), np.array([p.distortion for p in pts]),
                   np.array([p.multiplier for p in pts]))


def _f_problem(PX, d, g, flavor, **kw):
    g = get_generator(g)
    if flavor == "ckz":
        return _CKZProblem(PX, d, g, **kw)
    if flavor == "mbgya":
        return _MBGYAProblem(PX, d, g, **kw)
    raise ValueError("flavor must be 'ckz' or 'mbgya'")


def f_rd_ckz_point(PX, d, D, g, **kw):
    PX, d = _check_problem(PX, d)
    return _rd_point(_f_problem(PX, d, g, "ckz", **kw), PX, d, float(D))


def f_rd_ckz(PX, d, D, g, **kw):
    """min I_f^CKZ(X; Xhat) subject to E[d] <= D."""
    return f_rd_ckz_point(PX, d, D, g, **kw).rate


def f_dr_ckz_point(PX, d, R, g, **kw):
    PX, d = _check_problem(PX, d)
    return _dr_point(_f_problem(PX, d, g, "ckz", **kw), PX, d, R)


def f_dr_ckz(PX, d, R, g, **kw):
    """min E[d] subject to I_f^CKZ(X; Xhat) <= R."""
    return f_dr_ckz_point(PX, d, R, g, **kw).distortion


def mbgya_rd_point(PX, d, D, g, **kw):
    PX, d = _check_problem(PX, d)
    return _rd_point(_f_problem(PX, d, g, "mbgya", **kw), PX, d, float(D))


def mbgya_rd(PX, d, D, g, **kw):
    """min I_f^MBGYA(X; Xhat) subject to E[d] <= D."""
    return mbgya_rd_point(PX, d, D, g, **kw).rate


def mbgya_dr_point(PX, d, R, g, **kw):
    PX, d = _check_problem(PX, d)
    return _dr_point(_f_problem(PX, d, g, "mbgya", **kw), PX, d, R)


def mbgya_dr(PX, d, R, g, **kw):
    return mbgya_dr_point(PX, d, R, g, **kw).distortion


def channel_rate(PX, W, g=None, flavor="shannon"):
    """Re-evaluate the rate of a channel from scratch."""
    PX = check_pmf(PX, "PX")
    J = PX[:, None] * np.asarray(W, dtype=float)
    if flavor == "shannon" or g is None:
        return shannon_mi(J)
    if flavor == "ckz":
        return mi_ckz(J, g)
    return mi_mbgya(J, g).value


# finite blocklength -----------------------------------------------------------

def entropy_rate_bound(n, R, g):
    """(1/n) [f(0)(1 - 2^-nR) + 2^-nR f(2^nR)] with R in bits."""
    g = get_generator(g)
    if n < 1:
        raise ValueError("n must be >= 1")
    R = check_nonnegative(R, "R")
    M = 2.0 ** (n * R)
    return (g.f_at_zero * (1.0 - 1.0 / M) + float(g.f(M)) / M) / n


def lb_finite_blocklength(D, n, g="alpha:2", PX=(0.5, 0.5), d=None):
    """Smallest rate (bits) allowed by the finite-blocklength converse at distortion D."""
    g = get_generator(g)
    PX = check_pmf(PX, "PX")
    d = hamming(len(PX)) if d is None else check_matrix(d, len(PX), "d")
    if _is_binary_uniform_hamming(PX, d) and g.name == "alpha:2":
        Rf = float(f_rd_binary_hamming_sq(D))
    else:
        Rf = f_rd_ckz(PX, d, D, g)
    if Rf <= 0:
        return 0.0
    if g.name == "alpha:2":
        return math.log2(n * Rf + 1.0) / n
    hi = 1.0
    while entropy_rate_bound(n, hi, g) < Rf:
        hi *= 2.0
        if hi > 1e3:
            raise ValueError("entropy_rate_bound never reaches the f-rate")
    return brentq(lambda r: entropy_rate_bound(n, r, g) - Rf, 0.0, hi, xtol=1e-14)


def single_letter_gap(PX, d, block_channel, n, g):
    """Average per-letter distortion minus D_f^CKZ at the per-letter f-information."""
    g = get_generator(g)
    PX, d = _check_problem(PX, d)
    k, m = d.shape
    W = np.asarray(block_channel, dtype=float)
    if W.shape != (k ** n, m ** n):
        raise ValueError(f"block channel must have shape {(k ** n, m ** n)}")
    src = np.array([np.prod([PX[i] for i in xs]) for xs in itertools.product(range(k), repeat=n)])
    xs = list(itertools.product(range(k), repeat=n))
    ys = list(itertools.product(range(m), repeat=n))
    dblock = np.array([[np.mean([d[a, b] for a, b in zip(x, y)]) for y in ys] for x in xs])
    avg = float(np.sum(src[:, None] * W * dblock))
    budget = mi_ckz(src[:, None] * W, g) / n
    return avg - f_dr_ckz(PX, d, budget, g)
