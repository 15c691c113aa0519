"""Minimisation over a product of probability simplices.

Exponentiated-gradient (mirror descent) steps with backtracking, optionally
preceded by a diagonal Newton step when the objective is separable. The
stopping rule is the Frank-Wolfe gap, which upper-bounds the suboptimality
for convex objectives.
"""

from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

TINY = 1e-300


@dataclass
class SimplexResult:
    x: np.ndarray
    fun: float
    gap: float
    n_iter: int
    converged: bool


def frank_wolfe_gap(x, grad, mask):
    """sum over rows of <x, g> - min_{allowed} g."""
    g = np.where(mask, grad, np.inf)
    inner = np.sum(np.where(mask, x * grad, 0.0), axis=1)
    return float(np.sum(inner - g.min(axis=1)))


def _rows(a):
    a = np.asarray(a, dtype=float)
    return a[None, :] if a.ndim == 1 else a


def _normalise(x, mask):
    x = np.where(mask, np.maximum(x, TINY), 0.0)
    return x / x.sum(axis=1, keepdims=True)


def minimize_simplex(fun, grad, x0, mask=None, hess_diag=None, tol=1e-9,
                     max_iter=100_000):
    """Minimise ``fun`` over row-stochastic arrays shaped like ``x0``.

    ``fun`` and ``grad`` receive arrays of the original shape of ``x0``.
    ``mask`` marks the entries allowed to carry mass; others stay at zero.
    ``hess_diag`` (optional) returns the diagonal of the Hessian; it is only
    trusted when the objective is separable across coordinates of a row.
    """
    shape = np.shape(x0)
    x = _rows(x0).copy()
    mask = np.ones_like(x, dtype=bool) if mask is None else _rows(mask).astype(bool)
    x = _normalise(x, mask)

    def F(z):
        return float(fun(z.reshape(shape)))

    def G(z):
        return _rows(grad(z.reshape(shape)))

    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        # trial points near the boundary may evaluate to inf; steps reject them
        return _minimize(F, G, x, mask, shape, hess_diag, tol, max_iter)


def _minimize(F, G, x, mask, shape, hess_diag, tol, max_iter):
    fx = F(x)
    eta = None
    gap = np.inf
    it = 0
    stall = 0
    for it in range(1, max_iter + 1):
        g = G(x)
        gap = frank_wolfe_gap(x, g, mask)
        if gap <= tol:
            break
        slack = 1e-15 * max(1.0, abs(fx))
        moved = False
        if hess_diag is not None:
            x_new, f_new = _newton_step(F, x, fx, g, _rows(hess_diag(x.reshape(shape))),
                                        mask, slack)
            if x_new is not None:
                moved = True
        if not moved:
            x_new, f_new, eta = _eg_step(F, x, fx, g, mask, eta, slack)
        if f_new >= fx - slack:
            stall += 1
            if stall > 50:
                break
        else:
            stall = 0
        x, fx = x_new, f_new
    return SimplexResult(x.reshape(shape), fx, gap, it, bool(gap <= tol))


def _eg_step(F, x, fx, g, mask, eta, slack):
    gm = np.where(mask, g, 0.0)
    spread = float(np.max(np.where(mask, g, -np.inf)) - np.min(np.where(mask, g, np.inf)))
    if eta is None:
        eta = 1.0 / max(spread, 1e-12)
    else:
        eta *= 2.0
    logx = np.where(mask, np.log(np.maximum(x, TINY)), -np.inf)
    for _ in range(80):
        z = logx - eta * gm
        z = z - logsumexp(z, axis=1, keepdims=True)
        x_new = _normalise(np.exp(z), mask)
        f_new = F(x_new)
        with np.errstate(divide="ignore", invalid="ignore"):
            kl = np.sum(np.where(mask & (x_new > 0), x_new * (np.log(x_new) - logx), 0.0))
        lin = float(np.sum(gm * (x_new - x)))
        if np.isfinite(f_new) and f_new <= fx + lin + kl / eta + slack:
            return x_new, f_new, eta
        eta *= 0.25
    return x, fx, eta


def _newton_step(F, x, fx, g, h, mask, slack):
    if not (np.where(mask, h, 1.0) > 0).all() or not np.isfinite(np.where(mask, h, 1.0)).all():
        return None, fx
    inv = np.where(mask, 1.0 / np.where(mask, h, 1.0), 0.0)
    nu = np.sum(inv * np.where(mask, g, 0.0), axis=1, keepdims=True) / inv.sum(axis=1, keepdims=True)
    d = np.where(mask, -(g - nu) * inv, 0.0)
    slope = float(np.sum(np.where(mask, g * d, 0.0)))
    if not slope < 0:
        return None, fx
    neg = d < 0
    tmax = np.min(np.where(neg, x / np.where(neg, -d, 1.0), np.inf))
    t = min(1.0, 0.99 * tmax)
    for _ in range(40):
        x_new = _normalise(x + t * d, mask)
        f_new = F(x_new)
        if np.isfinite(f_new) and f_new <= fx + 1e-4 * t * slope + slack:
            return x_new, f_new
        t *= 0.5
        if t < 1e-8:
            break
    return None, fx
