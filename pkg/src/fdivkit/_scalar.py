"""One-dimensional helpers shared by the bound calculators."""

import math

import numpy as np
from scipy.optimize import minimize_scalar


def minimize_convex(fun, lo, hi):
    """Minimise a convex function of one variable, starting from [lo, hi]."""
    if not hi > lo:
        hi = lo + 1.0

    def safe(x):
        with np.errstate(over="ignore", invalid="ignore"):
            v = fun(x)
        return v if math.isfinite(v) else 1e300

    mid = 0.5 * (lo + hi)
    f_lo, f_mid, f_hi = safe(lo), safe(mid), safe(hi)
    for _ in range(80):
        if f_lo < f_mid:
            hi, f_hi, mid, f_mid = mid, f_mid, lo, f_lo
            lo = mid - 2.0 * (hi - mid)
            f_lo = safe(lo)
        elif f_hi < f_mid:
            lo, f_lo, mid, f_mid = mid, f_mid, hi, f_hi
            hi = mid + 2.0 * (mid - lo)
            f_hi = safe(hi)
        else:
            break
    res = minimize_scalar(safe, bounds=(lo, hi), method="bounded",
                          options={"xatol": 1e-13 * max(1.0, hi - lo), "maxiter": 500})
    if res.fun <= f_mid:
        return float(res.x), float(res.fun)
    return mid, f_mid


def maximize_unimodal_log(fun, lo=1e-6, hi=1e6, n_grid=241):
    """Maximise a unimodal fun(x) over x in [lo, hi] on a log grid, then refine."""
    grid = np.linspace(math.log(lo), math.log(hi), n_grid)
    vals = np.array([fun(math.exp(s)) for s in grid])
    vals = np.where(np.isnan(vals), -np.inf, vals)
    k = int(np.argmax(vals))
    best_s, best_v = grid[k], vals[k]
    a, b = grid[max(k - 1, 0)], grid[min(k + 1, n_grid - 1)]
    if b > a:
        res = minimize_scalar(lambda s: -fun(math.exp(s)), bounds=(a, b),
                              method="bounded", options={"xatol": 1e-12, "maxiter": 200})
        if np.isfinite(res.fun) and -res.fun > best_v:
            best_s, best_v = float(res.x), float(-res.fun)
    edge = k == 0 or k == n_grid - 1
    return float(best_v), math.exp(best_s), edge


def invert_decreasing_convex(solve, target, lo, hi, rtol=1e-12, max_iter=60, x0=None):
    """Find x in (lo, hi) with F(x) = target for a convex decreasing F.

    ``solve(x)`` returns (F(x), -F'(x), payload). Newton steps from the left
    of the root never overshoot for such F; bisection guards the rest.
    Returns (x, payload) for the last evaluation with F(x) >= target - tol.
    """
    tol = rtol * max(1.0, abs(target))
    x = 0.5 * (lo + hi) if x0 is None else x0
    best = None
    for _ in range(max_iter):
        val, slope, payload = solve(x)
        if val >= target - tol:
            best = (x, payload)
        if abs(val - target) <= tol:
            break
        if val > target:
            lo = x
        else:
            hi = x
        step = x + (val - target) / slope if slope > 0 and math.isfinite(slope) else math.nan
        x = step if lo < step < hi else 0.5 * (lo + hi)
        if hi - lo <= 1e-15 * max(1.0, abs(lo), abs(hi)):
            break
    if best is None:
        best = (x, solve(x)[2])
    return best
