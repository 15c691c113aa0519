"""Tables behind the four reproduced figures.

Each ``figure_*`` function returns a :class:`~fdivkit.reporting.Table`;
``figure_svg`` turns one into a plot. Output depends only on the arguments.
"""

from concurrent.futures import ProcessPoolExecutor
import math

import numpy as np

from .genbounds import (absolute_loss_instance, aux_loss_dual, aux_loss_u2, max_over_mu_u2,
                        mismatch_aux, product_loss_instance, squared_aux, u2, vn_exact,
                        xu_raginsky)
from .lowerbounds import lb1_reference, lb2_dual
from .ratedist import binary_entropy, dr_classical, hamming, lb_finite_blocklength
from .reporting import Table, svg_plot

LB_RF_N = (1, 2, 4, 8, 16, 32, 64)
COMPARE_SOURCE = (0.5, 0.01, 0.49)
GEN_R_GRID = (0.0, 0.01, 0.02, 0.05, 0.1, 0.2, 0.3, 0.5)
AUX_R_GRID = (0.0, 0.01, 0.05, 0.1, 0.2, 0.3)


def _map(fn, items, jobs):
    if jobs <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


def claim1_region(n):
    """Distortions D in [1/2 - 1/(2 sqrt n), 1/2], where the converse beats R(D)."""
    return 0.5 - 0.5 / math.sqrt(n), 0.5


def figure_lb_rf(n_list=LB_RF_N, d_grid=None):
    """Binary uniform source, Hamming distortion, g(t) = t^2 - 1; rates in bits."""
    d_grid = np.round(np.linspace(0.0, 0.5, 51), 12) if d_grid is None else d_grid
    cols = ["D", "R_bits"]
    for n in n_list:
        cols += [f"LB_n{n}_bits", f"claim1_n{n}"]
    rows = []
    for D in d_grid:
        R = 1.0 - binary_entropy(D) if D < 0.5 else 0.0
        row = [float(D), max(R, 0.0)]
        for n in n_list:
            lb = lb_finite_blocklength(D, n)
            lo, _ = claim1_region(n)
            if D >= lo - 1e-12:
                row += [lb, "ok" if lb >= R - 1e-9 else "fail"]
            else:
                row += [lb, "na"]
        rows.append(row)
    return Table("figure lb-rf", cols, rows,
                 {"unit": "bits", "generator": "t^2-1", "source": "binary-uniform",
                  "distortion": "hamming"})


def figure_lb_compare(steps=64):
    """LB1 and LB2 on D(R) against rate (nats) for the three-letter source."""
    P = np.array(COMPARE_SOURCE)
    d = hamming(3)
    rows = []
    for R in np.round(np.linspace(0.0, math.log(3.0), steps), 12):
        rows.append([float(R), lb1_reference(P, d, R).value, lb2_dual(P, d, R).value,
                     dr_classical(P, d, R)])
    return Table("figure lb-compare", ["R_nats", "LB1", "LB2", "D_of_R"], rows,
                 {"unit": "nats", "generator": "kl", "source": "0.5,0.01,0.49",
                  "distortion": "hamming"})


def _gen_row(args):
    R, mu_step = args
    row = [R, xu_raginsky(0.25, R, 1)]
    for make in (product_loss_instance, absolute_loss_instance):
        if R == 0:
            row += [0.0, None, row[1]]
            continue
        v, p = max_over_mu_u2(make(0.5, 1), R, step=mu_step)
        row += [v, p, row[1] - v]
    return row


def figure_gen_bounds(r_grid=GEN_R_GRID, mu_step=0.01, jobs=1):
    """sqrt(R/2) against max over Bernoulli mu of u2(R), for both losses in [0, 1]."""
    rows = _map(_gen_row, [(float(R), mu_step) for R in r_grid], jobs)
    cols = ["R_nats", "xu_raginsky", "u2max_product", "p_product", "gap_product",
            "u2max_absolute", "p_absolute", "gap_absolute"]
    return Table("figure gen-bounds", cols, rows,
                 {"unit": "nats", "generator": "kl", "losses": "w*z,|w-z|",
                  "sigma2": "0.25", "mu_step": mu_step})


def aux_instances(n=10):
    """(label, instance, aux loss, exact v_n) for the two auxiliary-loss examples."""
    out = []
    for label, make, aux_of in (("absolute", absolute_loss_instance, squared_aux),
                                ("product", product_loss_instance, mismatch_aux)):
        inst = make(0.5, n)
        aux = aux_of(inst)
        out.append((label, inst, aux, vn_exact(inst.mu, aux, n)))
    return out


def _aux_row(args):
    R, n = args
    row = [R]
    for _, inst, aux, vn in aux_instances(n):
        row += [u2(inst, R), aux_loss_u2(inst, R, aux, vn), aux_loss_dual(inst, R, aux, vn)]
    return row


def figure_aux_loss(r_grid=AUX_R_GRID, n=10, jobs=1):
    """u2 against its auxiliary-loss refinement and the dual form, mu = Bernoulli(1/2)."""
    rows = _map(_aux_row, [(float(R), n) for R in r_grid], jobs)
    cols = ["R_nats"]
    meta = {"unit": "nats", "generator": "kl", "n": n, "mu": "0.5,0.5"}
    for label, _, _, vn in aux_instances(n):
        cols += [f"u2_{label}", f"u2aux_{label}", f"dual_{label}"]
        meta[f"vn_{label}"] = f"{vn:.12g}"
    return Table("figure aux-loss", cols, rows, meta)


_PLOTS = {
    "figure lb-rf": ("D", "rate (bits)"),
    "figure lb-compare": ("R_nats", "distortion"),
    "figure gen-bounds": ("R_nats", "bound on expected gap"),
    "figure aux-loss": ("R_nats", "bound on expected gap"),
}


def figure_svg(table):
    xname, ylabel = _PLOTS.get(table.name, (table.columns[0], ""))
    xs = table.column(xname)
    series = {}
    for c in table.columns:
        if c == xname or c.startswith(("claim1", "p_", "gap_")):
            continue
        series[c] = (xs, table.column(c))
    return svg_plot(series, xname, ylabel, table.name)
