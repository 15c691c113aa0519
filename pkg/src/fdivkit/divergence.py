"""f-divergences on finite alphabets and the class-F / supermodularity checks."""

from dataclasses import dataclass
from itertools import combinations
import math

import numpy as np

from ._validation import check_channel, check_pmf, check_same_shape
from .generators import get_generator, numeric_kappa


class IndeterminateError(ArithmeticError):
    """Raised when an expression evaluates to inf - inf."""


def _divergence_terms(p, q, g):
    """Unchecked core of :func:`f_divergence`; p and q are same-shape arrays."""
    p = np.asarray(p, dtype=float).ravel()
    q = np.asarray(q, dtype=float).ravel()
    pos = q > 0
    total = 0.0
    if pos.any():
        ratio = p[pos] / q[pos]
        total = float(np.sum(q[pos] * np.asarray(g.f(ratio), dtype=float)))
    leak = float(p[~pos].sum())
    if leak > 0:
        total += math.inf if math.isinf(g.slope_inf) else leak * g.slope_inf
    return total


def f_divergence(P, Q, g):
    """D_f(P||Q) = sum_x Q(x) f(P(x)/Q(x)).

    Cells with P = Q = 0 are skipped. Cells with Q = 0 < P contribute
    P * lim f(t)/t, which is infinite for superlinear generators.
    Accepts vectors or equal-shape arrays (treated as flattened pmfs).
    """
    g = get_generator(g)
    P = np.asarray(P, dtype=float)
    Q = np.asarray(Q, dtype=float)
    check_same_shape(P, Q)
    if np.isnan(P).any() or np.isnan(Q).any():
        raise ValueError("NaN in distribution")
    if (P < 0).any() or (Q < 0).any():
        raise ValueError("negative mass in distribution")
    return _divergence_terms(P, Q, g)


def conditional_f_divergence(PY_X, QY_X, PX, g):
    """sum_x P_X(x) D_f(P(.|x) || Q(.|x))."""
    g = get_generator(g)
    PX = check_pmf(PX, "PX")
    A = check_channel(PY_X, len(PX), "PY_X")
    B = check_channel(QY_X, len(PX), "QY_X")
    check_same_shape(A, B, ("PY_X", "QY_X"))
    total = 0.0
    for x, px in enumerate(PX):
        if px > 0:
            total += px * _divergence_terms(A[x], B[x], g)
    return total


def renyi_from_alpha(value, a):
    """Renyi divergence of order a from D_f with f = t^a - 1."""
    if a <= 1:
        raise ValueError("order must exceed 1")
    return math.log1p(value) / (a - 1.0)


@dataclass(frozen=True)
class ClassFVerdict:
    member: bool
    reason: str
    violation: tuple | None = None
    n_triples: int = 0


def class_f_check(g, grid, tol=1e-9):
    """Numerical membership test for the class F.

    Checks f(1) = 0, f'' > 0 on the grid and concavity of 1/f'' on every
    ordered grid triple (a < b < c): the value at b must not fall below the
    chord through a and c by more than ``tol`` (relative to the magnitude).
    """
    g = get_generator(g)
    x = np.asarray(grid, dtype=float)
    if x.ndim != 1 or x.size < 5:
        raise ValueError("grid needs at least 5 points")
    if not (x > 0).all() or not np.isfinite(x).all():
        raise ValueError("grid must be strictly positive and finite")
    x = np.unique(x)
    if x.size < 5:
        raise ValueError("grid needs at least 5 distinct points")
    f1 = float(np.asarray(g.f(np.array([1.0])))[0])
    if abs(f1) > 1e-14:
        return ClassFVerdict(False, f"f(1) = {f1:.3e} != 0")
    h2 = np.asarray(g.f2(x), dtype=float)
    if not np.isfinite(h2).all():
        raise ValueError("non-finite second derivative on grid")
    if (h2 <= 0).any():
        k = int(np.flatnonzero(h2 <= 0)[0])
        return ClassFVerdict(False, f"f'' <= 0 at t = {x[k]:.6g}", (float(x[k]),))
    h = 1.0 / h2
    idx = np.array(list(combinations(range(x.size), 3)))
    i, j, k = idx.T
    lam = (x[k] - x[j]) / (x[k] - x[i])
    chord = lam * h[i] + (1.0 - lam) * h[k]
    scale = np.maximum(1.0, np.maximum(np.abs(h[i]), np.abs(h[k])))
    bad = h[j] < chord - tol * scale
    if bad.any():
        b = int(np.flatnonzero(bad)[0])
        trip = (float(x[i[b]]), float(x[j[b]]), float(x[k[b]]))
        return ClassFVerdict(False, "1/f'' is not concave", trip, len(idx))
    return ClassFVerdict(True, "ok", None, len(idx))


def _product(*qs):
    out = np.asarray(qs[0], dtype=float)
    for q in qs[1:]:
        out = np.multiply.outer(out, np.asarray(q, dtype=float))
    return out


def supermodularity_gap(p123, q1, q2, q3, g):
    """D(p123||q1q2q3) + D(p3||q3) - D(p13||q1q3) - D(p23||q2q3)."""
    g = get_generator(g)
    p = np.asarray(p123, dtype=float)
    if p.ndim != 3:
        raise ValueError("p123 must be a 3-way array")
    q1, q2, q3 = (check_pmf(q, f"q{i + 1}") for i, q in enumerate((q1, q2, q3)))
    if p.shape != (len(q1), len(q2), len(q3)):
        raise ValueError(f"p123 shape {p.shape} does not match the marginals")
    if np.isnan(p).any() or (p < 0).any() or abs(p.sum() - 1) > 1e-12:
        raise ValueError("p123 is not a pmf")
    plus = [_divergence_terms(p, _product(q1, q2, q3), g),
            _divergence_terms(p.sum(axis=(0, 1)), q3, g)]
    minus = [_divergence_terms(p.sum(axis=1), _product(q1, q3), g),
             _divergence_terms(p.sum(axis=0), _product(q2, q3), g)]
    if any(math.isinf(v) for v in plus) and any(math.isinf(v) for v in minus):
        raise IndeterminateError("supermodularity gap is inf - inf")
    return sum(plus) - sum(minus)


def kappa(g):
    """lim_{t -> inf} t f''(t); analytic for registered generators."""
    g = get_generator(g)
    if g.kappa is not None and not math.isnan(g.kappa):
        return g.kappa
    return numeric_kappa(g.f2)
