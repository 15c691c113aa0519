"""Convex generators f with f(1) = 0, their derivatives and conjugates.

Every generator is a frozen :class:`Generator` record. Registered families are
addressed by strings such as ``"kl"``, ``"alpha:1.5"`` or ``"skew:0.5"``; see
:func:`get_generator`.

The conjugate is always taken over the nonnegative half-line,
``fstar(y) = sup_{t >= 0} (t*y - f(t))``.
"""

from dataclasses import dataclass, field
from functools import partial
import math
from typing import Callable

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.special import xlogy

LN2 = math.log(2.0)


@dataclass(frozen=True)
class Generator:
    name: str
    f: Callable
    f1: Callable
    f2: Callable
    fstar: Callable
    f_at_zero: float
    kappa: float
    slope_inf: float
    params: tuple = ()
    in_class_F: bool = False
    closed_form_conjugate: bool = True
    _tf1: Callable = field(default=None, repr=False, compare=False)

    def __call__(self, t):
        return self.f(t)

    def tf1(self, t):
        """t * f'(t), extended by its limit 0 at t = 0."""
        t = np.asarray(t, dtype=float)
        if self._tf1 is not None:
            return self._tf1(t)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = t * self.f1(t)
        return np.where(t == 0, 0.0, out)

    def t2f2(self, t):
        """t**2 * f''(t), extended by 0 at t = 0."""
        t = np.asarray(t, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = t * t * self.f2(t)
        return np.where(t == 0, 0.0, out)


def _arr(t):
    return np.asarray(t, dtype=float)


# t ln t -----------------------------------------------------------------

def _kl_f(t, scale=1.0):
    t = _arr(t)
    return xlogy(t, t) / scale


def _kl_f1(t, scale=1.0):
    t = _arr(t)
    with np.errstate(divide="ignore"):
        return (np.log(t) + 1.0) / scale


def _kl_tf1(t, scale=1.0):
    return (xlogy(t, t) + t) / scale


def _kl_f2(t, scale=1.0):
    t = _arr(t)
    with np.errstate(divide="ignore"):
        return 1.0 / (t * scale)


def _kl_fstar(y, scale=1.0):
    # maximiser t = exp(scale*y - 1)
    y = _arr(y)
    with np.errstate(over="ignore"):
        return np.exp(scale * y - 1.0) / scale


# t ln t - t + 1 ---------------------------------------------------------

def _kln_f(t):
    t = _arr(t)
    return xlogy(t, t) - t + 1.0


def _kln_f1(t):
    t = _arr(t)
    with np.errstate(divide="ignore"):
        return np.log(t)


def _kln_tf1(t):
    return xlogy(t, t)


def _kln_fstar(y):
    with np.errstate(over="ignore"):
        return np.expm1(_arr(y))


# (t - 1)^2 ---------------------------------------------------------------

def _chi2_f(t):
    t = _arr(t)
    return (t - 1.0) ** 2


def _chi2_f1(t):
    return 2.0 * (_arr(t) - 1.0)


def _const2(t):
    return np.full_like(_arr(t), 2.0)


def _chi2_fstar(y):
    y = _arr(y)
    return np.where(y >= -2.0, y + y * y / 4.0, -1.0)


# t^2 - t -----------------------------------------------------------------

def _chi2b_f(t):
    t = _arr(t)
    return t * t - t


def _chi2b_f1(t):
    return 2.0 * _arr(t) - 1.0


def _chi2b_fstar(y):
    y = _arr(y)
    return np.where(y >= -1.0, (y + 1.0) ** 2 / 4.0, 0.0)


# t^a - 1, a > 1 ------------------------------------------------------------

def _alpha_f(t, a):
    return _arr(t) ** a - 1.0


def _alpha_f1(t, a):
    return a * _arr(t) ** (a - 1.0)


def _alpha_f2(t, a):
    t = _arr(t)
    with np.errstate(divide="ignore"):
        return a * (a - 1.0) * t ** (a - 2.0)


def _alpha_fstar(y, a):
    y = _arr(y)
    yp = np.maximum(y, 0.0)
    with np.errstate(over="ignore"):
        return np.where(y > 0, (a - 1.0) * (yp / a) ** (a / (a - 1.0)) + 1.0, 1.0)


# (a + (1-a) t) ln(a + (1-a) t) -----------------------------------------------

def _skew_f(t, a):
    u = a + (1.0 - a) * _arr(t)
    return xlogy(u, u)


def _skew_f1(t, a):
    b = 1.0 - a
    u = a + b * _arr(t)
    with np.errstate(divide="ignore"):
        return b * (np.log(u) + 1.0)


def _skew_tf1(t, a):
    b = 1.0 - a
    t = _arr(t)
    u = a + b * t
    with np.errstate(divide="ignore", invalid="ignore"):
        out = b * t * (np.log(u) + 1.0)
    return np.where(t == 0, 0.0, out)


def _skew_f2(t, a):
    b = 1.0 - a
    with np.errstate(divide="ignore"):
        return b * b / (a + b * _arr(t))


def _skew_fstar(y, a):
    b = 1.0 - a
    y = _arr(y)
    if a == 0.0:
        with np.errstate(over="ignore"):
            return np.exp(y - 1.0)
    thr = b * (1.0 + math.log(a))
    with np.errstate(over="ignore"):
        inner = np.exp(y / b - 1.0) - (a / b) * y
    return np.where(y >= thr, inner, -a * math.log(a))


# |t - 1| -------------------------------------------------------------------

def _tv_f(t):
    return np.abs(_arr(t) - 1.0)


def _tv_f1(t):
    return np.sign(_arr(t) - 1.0)


def _zero2(t):
    return np.zeros_like(_arr(t))


def _tv_fstar(y):
    y = _arr(y)
    return np.where(y <= -1.0, -1.0, np.where(y <= 1.0, y, np.inf))


# registry -------------------------------------------------------------------

def _make_kl():
    return Generator("kl", _kl_f, _kl_f1, _kl_f2, _kl_fstar, 0.0, 1.0, math.inf,
                     in_class_F=True, _tf1=_kl_tf1)


def _make_kl_bits():
    s = LN2
    return Generator("kl-bits", partial(_kl_f, scale=s), partial(_kl_f1, scale=s),
                     partial(_kl_f2, scale=s), partial(_kl_fstar, scale=s),
                     0.0, 1.0 / s, math.inf, in_class_F=True,
                     _tf1=partial(_kl_tf1, scale=s))


def _make_kl_norm():
    return Generator("kl-norm", _kln_f, _kln_f1, _kl_f2, _kln_fstar, 1.0, 1.0, math.inf,
                     in_class_F=True, _tf1=_kln_tf1)


def _make_chi2():
    return Generator("chi2", _chi2_f, _chi2_f1, _const2, _chi2_fstar, 1.0, math.inf,
                     math.inf, in_class_F=True)


def _make_chi2b():
    return Generator("chi2b", _chi2b_f, _chi2b_f1, _const2, _chi2b_fstar, 0.0, math.inf,
                     math.inf, in_class_F=True)


def _make_alpha(a):
    if not a > 1.0:
        raise ValueError(f"alpha generator needs a > 1, got {a}")
    return Generator(f"alpha:{a:g}", partial(_alpha_f, a=a), partial(_alpha_f1, a=a),
                     partial(_alpha_f2, a=a), partial(_alpha_fstar, a=a), -1.0,
                     math.inf, math.inf, params=(a,), in_class_F=a <= 2.0)


def _make_skew(a):
    if not 0.0 <= a < 1.0:
        raise ValueError(f"skew generator needs 0 <= a < 1, got {a}")
    f0 = a * math.log(a) if a > 0 else 0.0
    return Generator(f"skew:{a:g}", partial(_skew_f, a=a), partial(_skew_f1, a=a),
                     partial(_skew_f2, a=a), partial(_skew_fstar, a=a), f0, 1.0 - a,
                     math.inf, params=(a,), in_class_F=True,
                     _tf1=partial(_skew_tf1, a=a))


def _make_tv():
    return Generator("tv", _tv_f, _tv_f1, _zero2, _tv_fstar, 1.0, 0.0, 1.0)


_FIXED = {
    "kl": _make_kl,
    "kl-bits": _make_kl_bits,
    "kl-norm": _make_kl_norm,
    "chi2": _make_chi2,
    "chi2b": _make_chi2b,
    "tv": _make_tv,
}
_PARAMETRIC = {"alpha": _make_alpha, "skew": _make_skew}

# t^2 - 1 shows up often enough to deserve a name
_ALIASES = {"sq": "alpha:2"}


def registered_names():
    """Names accepted by :func:`get_generator` (parametric ones shown with a placeholder)."""
    return sorted(_FIXED) + [f"{k}:<a>" for k in sorted(_PARAMETRIC)] + sorted(_ALIASES)


def get_generator(spec):
    """Resolve ``spec`` (a name string or a Generator) to a Generator."""
    if isinstance(spec, Generator):
        return spec
    if not isinstance(spec, str):
        raise TypeError(f"generator must be a name or Generator, got {type(spec).__name__}")
    key = spec.strip().lower()
    key = _ALIASES.get(key, key)
    if key in _FIXED:
        return _FIXED[key]()
    family, sep, arg = key.partition(":")
    if sep and family in _PARAMETRIC:
        try:
            a = float(arg)
        except ValueError:
            raise ValueError(f"bad generator parameter in {spec!r}") from None
        return _PARAMETRIC[family](a)
    raise ValueError(f"unknown generator {spec!r}; known: {', '.join(registered_names())}")


def class_F_generators():
    """Registered generators carrying the analytic class-F flag, one per family."""
    names = ["kl", "kl-bits", "kl-norm", "chi2", "chi2b", "alpha:1.5", "alpha:2",
             "skew:0", "skew:0.3", "skew:0.5", "skew:0.9"]
    return [get_generator(n) for n in names]


# user-supplied generators ----------------------------------------------------

def _numeric_fstar(y, f):
    """sup_{t>=0} (t*y - f(t)) by a log grid followed by a bounded refinement."""
    y = np.atleast_1d(_arr(y))
    ts = np.concatenate([[0.0], np.logspace(-8, 8, 1601)])
    fv = np.asarray(f(ts), dtype=float)
    out = np.empty_like(y)
    for i, yi in enumerate(y):
        vals = ts * yi - fv
        k = int(np.nanargmax(vals))
        if k == len(ts) - 1:
            out[i] = math.inf
            continue
        lo = math.log(ts[max(k - 1, 1)])
        hi = math.log(ts[min(k + 1, len(ts) - 1)])
        res = minimize_scalar(lambda s: -(math.exp(s) * yi - float(f(math.exp(s)))),
                              bounds=(lo, hi), method="bounded",
                              options={"xatol": 1e-12})
        out[i] = max(vals[k], -res.fun)
    return out


def numeric_kappa(f2, t_grid=None):
    """lim t*f''(t) from a geometric grid; returns inf when the sequence keeps growing."""
    ts = np.logspace(4, 12, 9) if t_grid is None else np.asarray(t_grid, dtype=float)
    v = ts * np.asarray(f2(ts), dtype=float)
    if not np.isfinite(v).all():
        raise ValueError("non-finite t*f''(t) on the kappa grid")
    last, prev, prev2 = v[-1], v[-2], v[-3]
    if last > 0 and prev > 0 and last / prev > 1.5 and prev / prev2 > 1.5:
        return math.inf
    # Richardson step assuming a geometric error decay between grid points
    d1, d2 = prev - prev2, last - prev
    if d1 != 0 and 0 < d2 / d1 < 1:
        r = d2 / d1
        return float(last + d2 * r / (1 - r))
    return float(last)


def custom_generator(name, f, f1, f2, fstar=None, f_at_zero=None, kappa=None,
                     slope_inf=None, in_class_F=False):
    """Wrap user callables into a Generator, filling missing constants numerically."""
    if f_at_zero is None:
        f_at_zero = float(f(np.array([1e-14]))[0])
    if kappa is None:
        kappa = numeric_kappa(f2)
    if slope_inf is None:
        big = np.array([1e12, 1e14])
        s = np.asarray(f(big), dtype=float) / big
        slope_inf = math.inf if s[1] > 2 * abs(s[0]) + 1 else float(s[1])
    closed = fstar is not None
    if fstar is None:
        fstar = partial(_numeric_fstar, f=f)
    return Generator(name, f, f1, f2, fstar, float(f_at_zero), float(kappa),
                     float(slope_inf), in_class_F=in_class_F,
                     closed_form_conjugate=closed)
