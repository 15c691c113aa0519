"""Input validation helpers shared by the numerical modules and estimators."""

import numpy as np

PMF_ATOL = 1e-12


def _as_float_array(x, ndim, name):
    arr = np.asarray(x, dtype=float)
    if arr.ndim != ndim:
        raise ValueError(f"{name} must be {ndim}-dimensional, got shape {arr.shape}")
    if np.isnan(arr).any():
        raise ValueError(f"{name} contains NaN")
    return arr


def check_pmf(p, name="pmf", atol=PMF_ATOL):
    """Return ``p`` as a read-only float vector after checking it is a pmf."""
    arr = _as_float_array(p, 1, name)
    if arr.size == 0:
        raise ValueError(f"{name} is empty")
    if (arr < 0).any():
        raise ValueError(f"{name} has negative entries")
    if abs(arr.sum() - 1.0) > atol:
        raise ValueError(f"{name} sums to {arr.sum():.15g}, expected 1")
    arr = arr.copy()
    arr.setflags(write=False)
    return arr


def check_joint(p, name="joint", ndim=2, atol=PMF_ATOL):
    arr = _as_float_array(p, ndim, name)
    if (arr < 0).any():
        raise ValueError(f"{name} has negative entries")
    if abs(arr.sum() - 1.0) > atol:
        raise ValueError(f"{name} sums to {arr.sum():.15g}, expected 1")
    arr = arr.copy()
    arr.setflags(write=False)
    return arr


def check_channel(w, n_inputs=None, name="channel", atol=PMF_ATOL):
    """Row-stochastic matrix check; rows index inputs."""
    arr = _as_float_array(w, 2, name)
    if n_inputs is not None and arr.shape[0] != n_inputs:
        raise ValueError(f"{name} has {arr.shape[0]} rows, expected {n_inputs}")
    if (arr < 0).any():
        raise ValueError(f"{name} has negative entries")
    bad = np.abs(arr.sum(axis=1) - 1.0) > atol
    if bad.any():
        raise ValueError(f"{name} rows {np.flatnonzero(bad).tolist()} do not sum to 1")
    arr = arr.copy()
    arr.setflags(write=False)
    return arr


def check_matrix(m, shape0=None, name="matrix"):
    """Finite real matrix, optionally with a fixed number of rows."""
    arr = _as_float_array(m, 2, name)
    if not np.isfinite(arr).all():
        raise ValueError(f"{name} has non-finite entries")
    if shape0 is not None and arr.shape[0] != shape0:
        raise ValueError(f"{name} has {arr.shape[0]} rows, expected {shape0}")
    return arr


def check_same_shape(a, b, names=("P", "Q")):
    if np.shape(a) != np.shape(b):
        raise ValueError(f"{names[0]} and {names[1]} have shapes {np.shape(a)} and {np.shape(b)}")


def check_positive(x, name):
    x = float(x)
    if not np.isfinite(x) or x <= 0:
        raise ValueError(f"{name} must be positive and finite, got {x}")
    return x


def check_nonnegative(x, name):
    x = float(x)
    if np.isnan(x) or x < 0:
        raise ValueError(f"{name} must be nonnegative, got {x}")
    return x
