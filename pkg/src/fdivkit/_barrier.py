"""Log-barrier Newton method for convex programs over channels.

Variables are the entries of a row-stochastic matrix W restricted to a mask.
Three programs are supported:

* ``"rate"``: minimise rate(W) subject to <lin, W> <= level
* ``"dist"``: minimise <lin, W> subject to rate(W) <= level
* ``"free"``: minimise rate(W)

Further linear constraints <a, W> <= b can be passed as ``extra``.

The rate must be convex with supplied gradient and Hessian (dense, in
row-major order of the full matrix).
"""

from dataclasses import dataclass

import numpy as np


@dataclass
class BarrierResult:
    W: np.ndarray
    rate: float
    linear: float
    multiplier: float
    gap: float
    n_newton: int
    converged: bool


def _null_basis(rows, n, x):
    """Free coordinates and their pivots for the null space of the row sums.

    Direction i of the basis is e_i - e_pivot(i); the pivot of each row is
    its largest entry, since a small pivot would spread its huge barrier
    curvature 1/x^2 over every column of the reduced Hessian.
    """
    order = np.lexsort((-x, rows))
    first = np.ones(rows.size, bool)
    first[1:] = rows[order][1:] != rows[order][:-1]
    pivots_of_rows = np.full(n, -1)
    pivots_of_rows[rows[order][first]] = order[first]
    free = np.sort(order[~first])
    return free, pivots_of_rows[rows[free]]


def _newton_dir(H, U, g, basis):
    """Newton step for the Hessian H + U U' restricted to the row-sum null space.

    The rank-k part carries the 1/slack^2 curvature of the constraint
    barriers. Keeping it out of the factorised matrix (Woodbury) avoids the
    loss of precision that comes with adding a huge rank-one term.
    """
    free, piv = basis
    dx = np.zeros_like(g)
    if free.size == 0:
        return dx
    Hr = H[np.ix_(free, free)] - H[np.ix_(free, piv)] - H[np.ix_(piv, free)] + H[np.ix_(piv, piv)]
    gr = g[free] - g[piv]
    Ur = U[free] - U[piv]
    # symmetric diagonal scaling; barrier terms make the diagonal span many decades
    s = 1.0 / np.sqrt(np.maximum(np.diag(Hr), 1e-300))
    Hs = Hr * np.outer(s, s)
    Us = Ur * s[:, None]
    rhs = np.column_stack([-gr * s, Us])
    try:
        sol = np.linalg.solve(Hs, rhs)
        y, Y = sol[:, 0], sol[:, 1:]
        if Y.shape[1]:
            core = np.eye(Y.shape[1]) + Us.T @ Y
            y = y - Y @ np.linalg.solve(core, Us.T @ y)
        ok = np.isfinite(y).all() and float(-gr @ (s * y)) > 0
    except np.linalg.LinAlgError:
        ok = False
    if not ok and np.abs(gr).max() > 0:
        # eigenvalue-clipped solve of the full reduced system
        ev, V = np.linalg.eigh(Hs + Us @ Us.T)
        ev = np.maximum(ev, 1e-14 * max(ev.max(), 1e-300))
        y = V @ ((V.T @ (-gr * s)) / ev)
    elif not ok:
        return dx
    step = s * y
    dx[free] = step
    np.add.at(dx, piv, -step)
    return dx


def _kkt_multiplier(grad_obj, grad_con, x, rows, n, fallback):
    """Least-squares multiplier from stationarity on the support of x."""
    live = x > 1e-7 * x.max()
    k = int(live.sum())
    M = np.zeros((k, n + 1))
    M[:, 0] = grad_con[live]
    M[np.arange(k), 1 + rows[live]] = -1.0
    if np.linalg.matrix_rank(M) < n + 1 or k <= n + 1:
        return fallback
    sol = np.linalg.lstsq(M, -grad_obj[live], rcond=None)[0]
    return float(sol[0]) if sol[0] >= 0 else fallback


def barrier_channel(rate, rate_grad, rate_hess, lin, W0, mode, level=None, mask=None,
                    tol=1e-10, t0=1.0, mu=20.0, max_newton=2000, extra=()):
    lin = np.asarray(lin, dtype=float)
    n, m = lin.shape
    mask = np.ones((n, m), bool) if mask is None else np.asarray(mask, bool)
    idx = np.flatnonzero(mask.ravel())
    N = idx.size
    rows = np.repeat(np.arange(n), m)[idx]
    c = lin.ravel()[idx]
    A = np.array([np.asarray(a, dtype=float).ravel()[idx] for a, _ in extra]).reshape(len(extra), N)
    b = np.array([float(lev) for _, lev in extra])

    def to_W(x):
        W = np.zeros(n * m)
        W[idx] = x
        return W.reshape(n, m)

    x = np.asarray(W0, dtype=float).ravel()[idx].copy()
    if (x <= 0).any():
        raise ValueError("barrier start must be strictly positive on the mask")

    def pieces(x, t, order):
        W = to_W(x)
        F = rate(W)
        L = float(c @ x)
        if mode == "rate":
            obj, slack = F, level - L
        elif mode == "dist":
            obj, slack = L, level - F
        else:
            obj, slack = F, None
        if slack is not None and slack <= 0:
            return np.inf, None, None, None
        es = b - A @ x
        if (es <= 0).any():
            return np.inf, None, None, None
        val = t * obj - np.sum(np.log(x)) - (np.log(slack) if slack is not None else 0.0)
        val -= float(np.sum(np.log(es)))
        if order == 0:
            return val, None, None, None
        gF = rate_grad(W).ravel()[idx]
        HF = rate_hess(W)[np.ix_(idx, idx)]
        if mode == "rate":
            g = t * gF - 1.0 / x + c / slack
            H = t * HF + np.diag(1.0 / x ** 2)
            U = [c / slack]
        elif mode == "dist":
            g = t * c - 1.0 / x + gF / slack
            H = np.diag(1.0 / x ** 2) + HF / slack
            U = [gF / slack]
        else:
            g = t * gF - 1.0 / x
            H = t * HF + np.diag(1.0 / x ** 2)
            U = []
        if b.size:
            As = A / es[:, None]
            g = g + As.sum(axis=0)
            U.extend(As)
        return val, g, H, np.array(U).reshape(len(U), N).T

    n_ineq = N + (0 if mode == "free" else 1) + b.size
    t = t0
    total = 0
    converged = False
    while True:
        for _ in range(200):
            val, g, H, U = pieces(x, t, 2)
            dx = _newton_dir(H, U, g, _null_basis(rows, n, x))
            dec = float(-g @ dx)
            total += 1
            if dec / 2 <= 1e-10 or total > max_newton:
                break
            neg = dx < 0
            s = 1.0
            if neg.any():
                s = min(1.0, 0.99 * float(np.min(-x[neg] / dx[neg])))
            accepted = False
            for _ in range(60):
                new_val = pieces(x + s * dx, t, 0)[0]
                if new_val <= val - 0.01 * s * dec + 1e-13 * max(1.0, abs(val)):
                    accepted = True
                    break
                s *= 0.5
            if not accepted:
                break
            x = x + s * dx
            if val - new_val <= 1e-14 * max(1.0, abs(val)):
                # no measurable progress left at working precision
                break
        if n_ineq / t <= tol:
            converged = True
            break
        if total > max_newton:
            break
        t *= mu
    W = to_W(x)
    F = rate(W)
    L = float(c @ x)
    gF = rate_grad(W).ravel()[idx]
    if mode == "rate" and b.size:
        mult = 1.0 / (t * (level - L))
    elif mode == "rate":
        mult = _kkt_multiplier(gF, c, x, rows, n, 1.0 / (t * (level - L)))
    elif mode == "dist":
        mult = _kkt_multiplier(c, gF, x, rows, n, t * (level - F))
    else:
        mult = np.inf
    return BarrierResult(W, F, L, mult, n_ineq / t, total, converged)
