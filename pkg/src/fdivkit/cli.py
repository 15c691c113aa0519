"""Command line driver: ``fdivkit {rd,lb,sanov,gen,mi,figure,props}``.

Every command accepts ``--config FILE`` with ``key = value`` lines that
mirror the long flags; flags given on the command line win.

Exit codes: 0 success, 1 bad input, 2 invariant violation, 3 solver
non-convergence.
"""

import argparse
import math
import os
import sys

from . import figures, genbounds, lowerbounds, props, reporting, sanov
from .information import mi_ckz, mi_mbgya, mi_pv
from .ratedist import (LN2, ConvergenceError, InfeasibleError, f_dr_ckz_point, f_rd_ckz_point,
                       dr_classical_point, hamming, mbgya_dr_point, mbgya_rd_point,
                       rd_classical_point)

EXIT_OK, EXIT_INVARIANT, EXIT_NONCONVERGENCE = 0, 2, 3

GEN_BOUNDS = ("xr", "bu", "u2", "u1", "u2f", "psi", "chi2", "finite", "gaussmean", "aux",
              "auxdual")

# flag defaults, applied after the config file so that explicit flags win
DEFAULTS = {
    "seed": "0",
    "unit": "nats",
    "distortion": "hamming",
    "out": "-",
    "out_dir": ".",
    "jobs": "1",
    "n": "1",
    "instance": "product",
    "bound": "u2",
    "budget": "0:1:11",
    "sigma2": "",
    "mu": "0.5,0.5",
}


class InvariantViolation(Exception):
    pass


class NonConvergence(Exception):
    pass


def _common(p):
    p.add_argument("--config", help="key = value file mirroring the long flags")
    p.add_argument("--out", help="output file, '-' for stdout")
    p.add_argument("--seed", type=int)


def build_parser():
    ap = argparse.ArgumentParser(prog="fdivkit", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("rd", help="rate-distortion sweep (CSV)")
    _common(p)
    p.add_argument("--source", required=False, help="pmf '0.5,0.5' or CSV file")
    p.add_argument("--distortion", help="'hamming' or CSV matrix file")
    p.add_argument("--generator")
    p.add_argument("--flavor", choices=("shannon", "ckz", "mbgya"))
    p.add_argument("--d-grid", help="distortion grid start:stop:steps or list")
    p.add_argument("--r-grid", help="rate grid (nats) start:stop:steps or list")
    p.add_argument("--unit", choices=("bits", "nats"))

    p = sub.add_parser("lb", help="dual lower bounds on D(R) (CSV)")
    _common(p)
    p.add_argument("--source")
    p.add_argument("--distortion")
    p.add_argument("--generator", help="adds the f-dual bound for this generator")
    p.add_argument("--r-grid")

    p = sub.add_parser("sanov", help="tail exponents for one instance (JSON)")
    _common(p)
    p.add_argument("--px")
    p.add_argument("--pw")
    p.add_argument("--loss", help="CSV matrix loss[x, w]")
    p.add_argument("--n", type=int)
    p.add_argument("--delta", type=float)
    p.add_argument("--generator")

    p = sub.add_parser("gen", help="generalization bounds (JSON lines of BoundReport)")
    _common(p)
    p.add_argument("--bound", help="comma list from " + ",".join(GEN_BOUNDS))
    p.add_argument("--instance", help="'product', 'absolute' or a CSV loss[w, z] file")
    p.add_argument("--mu")
    p.add_argument("--n", type=int)
    p.add_argument("--budget", help="information budget grid (nats)")
    p.add_argument("--generator")
    p.add_argument("--sigma2", help="sub-Gaussian parameter; default (range/2)^2")
    p.add_argument("--card-w", type=int, help="hypothesis count for 'finite'")
    p.add_argument("--alpha", help="skew parameter for 'finite' or 'optimal'")
    p.add_argument("--dim", type=int, help="dimension for 'gaussmean'")
    p.add_argument("--aux", help="'squared', 'mismatch' or a CSV aux[w, z] file")
    p.add_argument("--vn", type=float, help="ERM aux risk; default exact enumeration")

    p = sub.add_parser("mi", help="mutual f-information records (JSON)")
    _common(p)
    p.add_argument("--joint", help="CSV joint pmf matrix")
    p.add_argument("--generator")
    p.add_argument("--flavor", help="ckz, pv, mbgya or all")

    p = sub.add_parser("figure", help="regenerate a figure as CSV + SVG")
    _common(p)
    p.add_argument("name", choices=("lb-rf", "lb-compare", "gen-bounds", "aux-loss"))
    p.add_argument("--out-dir")
    p.add_argument("--jobs", type=int)
    p.add_argument("--r-grid")
    p.add_argument("--mu-step", type=float)
    p.add_argument("--n-list", help="block lengths for lb-rf")
    p.add_argument("--d-grid", help="distortion grid for lb-rf")
    p.add_argument("--steps", type=int, help="rows for lb-compare")

    p = sub.add_parser("props", help="run an invariant suite")
    _common(p)
    p.add_argument("suite", choices=tuple(props.SUITES) + ("all",))
    p.add_argument("--trials", type=int)
    return ap


def resolve(args):
    """Merge config file and defaults under the explicitly given flags."""
    cfg = reporting.read_config(args.config) if getattr(args, "config", None) else {}
    out = dict(vars(args))
    for k, v in cfg.items():
        if k not in out:
            raise ValueError(f"unknown config key {k!r}")
        if out[k] is None:
            out[k] = v
    for k, v in DEFAULTS.items():
        if k in out and out[k] is None:
            out[k] = v
    return argparse.Namespace(**out)


def _emit(text, dest):
    if dest in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(dest, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _source(args):
    if args.source is None:
        raise ValueError("--source is required")
    P = reporting.load_vector(args.source)
    d = hamming(P.size) if args.distortion == "hamming" else reporting.load_matrix(args.distortion)
    return P, d


# commands ------------------------------------------------------------------------

def cmd_rd(args):
    P, d = _source(args)
    g, flavor = args.generator or "kl", args.flavor or "shannon"
    scale = 1.0 / LN2 if args.unit == "bits" else 1.0
    rows, bad = [], []
    if args.r_grid:
        solver = {"shannon": lambda R: dr_classical_point(P, d, R),
                  "ckz": lambda R: f_dr_ckz_point(P, d, R, g),
                  "mbgya": lambda R: mbgya_dr_point(P, d, R, g)}[flavor]
        cols = [f"R_{args.unit}", "D"]
        for R in reporting.parse_grid(args.r_grid):
            pt = solver(R / scale)
            rows.append([R, pt.distortion])
            bad += [] if pt.converged else [R]
    else:
        solver = {"shannon": lambda D: rd_classical_point(P, d, D),
                  "ckz": lambda D: f_rd_ckz_point(P, d, D, g),
                  "mbgya": lambda D: mbgya_rd_point(P, d, D, g)}[flavor]
        cols = ["D", f"R_{args.unit}"]
        for D in reporting.parse_grid(args.d_grid or "0:0.5:11"):
            pt = solver(D)
            rows.append([D, pt.rate * scale])
            bad += [] if pt.converged else [D]
    gen_name = "shannon" if flavor == "shannon" else f"{g} ({flavor})"
    table = reporting.Table("rd", cols, rows, {"unit": args.unit, "generator": gen_name})
    _emit(table.to_csv(), args.out)
    if bad:
        raise NonConvergence(f"solver did not converge at {bad}")


def cmd_lb(args):
    P, d = _source(args)
    cols = ["R_nats", "LB1", "LB2"] + (["LB_f"] if args.generator else [])
    rows = []
    for R in reporting.parse_grid(args.r_grid or f"0:{math.log(P.size)}:11"):
        row = [R, lowerbounds.lb1_reference(P, d, R).value, lowerbounds.lb2_dual(P, d, R).value]
        if args.generator:
            row.append(lowerbounds.f_dual_lb(P, d, R, args.generator).value)
        rows.append(row)
    meta = {"unit": "nats", "generator": args.generator or "kl"}
    _emit(reporting.Table("lb", cols, rows, meta).to_csv(), args.out)


def cmd_sanov(args):
    for key in ("px", "pw", "loss", "delta"):
        if getattr(args, key) is None:
            raise ValueError(f"--{key} is required")
    inst = sanov.TailInstance(reporting.load_vector(args.px), reporting.load_vector(args.pw),
                              reporting.load_matrix(args.loss), int(args.n), float(args.delta))
    g = args.generator or "kl"
    e_ch, e_sa = sanov.chernoff_exponent(inst), sanov.sanov_exponent_dual(inst)
    res = sanov.f_sanov_rhs(inst, g)
    record = {"generator": g, "n": inst.n, "delta": inst.delta,
              "chernoff_exponent": e_ch, "sanov_exponent": e_sa,
              "f_sanov_rhs": res.value, "method": res.method, "residual": res.certified_gap,
              "tail_bound": sanov.invert_f_sanov(res.value, g),
              "exact_tail": sanov.exact_tail_probability(inst)}
    _emit(reporting.to_json(record) + "\n", args.out)
    if abs(e_ch - e_sa) > 1e-6 or record["exact_tail"] > record["tail_bound"] + 1e-9:
        raise InvariantViolation("Sanov and Chernoff exponents disagree or the tail bound fails")


def _learning_instance(args):
    mu = reporting.load_vector(args.mu)
    n = int(args.n)
    if args.instance == "product":
        inst = genbounds.product_loss_instance(float(mu[1]), n)
    elif args.instance == "absolute":
        inst = genbounds.absolute_loss_instance(float(mu[1]), n)
    else:
        inst = genbounds.LearningInstance(mu, reporting.load_matrix(args.instance), n)
    if args.sigma2:
        inst = genbounds.LearningInstance(inst.mu, inst.loss, inst.n, inst.hypotheses,
                                          float(args.sigma2))
    return inst


def _aux_table(args, inst):
    if args.aux in (None, "squared"):
        if inst.hypotheses is None:
            raise ValueError("'squared' aux loss needs hypotheses on a grid; pass --aux FILE")
        return genbounds.squared_aux(inst)
    if args.aux == "mismatch":
        return genbounds.mismatch_aux(inst)
    return reporting.load_matrix(args.aux)


def gen_reports(args):
    """BoundReports for every requested bound and budget."""
    inst = _learning_instance(args)
    sigma2 = inst.subgaussian_sigma2
    names = [b.strip() for b in args.bound.split(",") if b.strip()]
    for b in names:
        if b not in GEN_BOUNDS:
            raise ValueError(f"unknown bound {b!r}; choose from {', '.join(GEN_BOUNDS)}")
    if {"u2f", "psi"} & set(names) and not args.generator:
        raise ValueError("bounds u2f and psi need --generator")
    out = []
    base = {"n": inst.n, "sigma2": sigma2, "instance": args.instance}
    for b in names:
        if b == "finite":
            card = args.card_w or inst.loss.shape[0]
            alpha = args.alpha or "0"
            alpha = alpha if alpha == "optimal" else float(alpha)
            v = genbounds.finite_hypothesis_bound(card, sigma2, inst.n, alpha)
            out.append(genbounds.BoundReport(b, v, dict(base, card_W=card, alpha=alpha)))
            continue
        if b == "gaussmean":
            calc = genbounds.gaussian_mean_calc(args.dim or 2, sigma2, inst.n)
            out.append(genbounds.BoundReport(b, calc.u2hat_bound, dict(
                base, dim=args.dim or 2, info_per_sample=calc.I_per_sample,
                erm_gen_exact=calc.erm_gen_exact)))
            continue
        for R in reporting.parse_grid(args.budget):
            inputs = dict(base, budget=R)
            if b == "xr":
                v = genbounds.xu_raginsky(sigma2, R, inst.n)
            elif b == "bu":
                v = genbounds.bu_individual(sigma2, [R] * inst.n)
            elif b == "chi2":
                v = genbounds.chi2_gen_bound(sigma2, R, inst.n)
            elif b == "u2":
                v = genbounds.u2(inst, R)
            elif b == "u1":
                v = genbounds.u1_upper(inst, R)
            elif b == "u2f":
                v = genbounds.u2_f(inst, R, args.generator)
                inputs["generator"] = args.generator
            elif b == "psi":
                v = genbounds.psi_fstar(inst, R, args.generator)
                inputs["generator"] = args.generator
            else:
                aux = _aux_table(args, inst)
                vn = args.vn if args.vn is not None else genbounds.vn_exact(inst.mu, aux, inst.n)
                fn = genbounds.aux_loss_u2 if b == "aux" else genbounds.aux_loss_dual
                v = fn(inst, R, aux, vn)
                inputs["v_n"] = vn
            out.append(genbounds.BoundReport(b, float(v), inputs, "nats"))
    return out


def cmd_gen(args):
    reports = gen_reports(args)
    _emit("".join(r.to_json() + "\n" for r in reports), args.out)
    by_budget = {}
    for r in reports:
        by_budget.setdefault(r.inputs.get("budget"), {})[r.bound_name] = r.value
    for R, vals in by_budget.items():
        if "u2" in vals and "xr" in vals and vals["u2"] > vals["xr"] + 1e-9:
            raise InvariantViolation(f"u2 exceeds the sub-Gaussian bound at budget {R}")
        if "aux" in vals and "u2" in vals and vals["aux"] > vals["u2"] + 1e-9:
            raise InvariantViolation(f"aux-loss bound exceeds u2 at budget {R}")


def cmd_mi(args):
    if args.joint is None:
        raise ValueError("--joint is required")
    J = reporting.load_matrix(args.joint)
    g = args.generator or "kl"
    flavors = ("ckz", "pv", "mbgya") if args.flavor in (None, "all") else (args.flavor,)
    for fl in flavors:
        if fl not in ("ckz", "pv", "mbgya"):
            raise ValueError(f"unknown flavor {fl!r}")
    lines = []
    for fl in flavors:
        if fl == "ckz":
            rec = {"flavor": "ckz", "generator": g, "value_nats": mi_ckz(J, g), "residual": 0.0}
        else:
            res = (mi_pv if fl == "pv" else mi_mbgya)(J, g)
            rec = res.to_record()
        lines.append(reporting.to_json(rec) + "\n")
    _emit("".join(lines), args.out)


def figure_table(args):
    name = args.name
    if name == "lb-rf":
        n_list = tuple(int(v) for v in args.n_list.split(",")) if args.n_list else figures.LB_RF_N
        d_grid = reporting.parse_grid(args.d_grid) if args.d_grid else None
        return figures.figure_lb_rf(n_list, d_grid)
    if name == "lb-compare":
        return figures.figure_lb_compare(int(args.steps or 64))
    r_grid = reporting.parse_grid(args.r_grid) if args.r_grid else None
    jobs = int(args.jobs)
    if name == "gen-bounds":
        return figures.figure_gen_bounds(r_grid or figures.GEN_R_GRID,
                                         float(args.mu_step or 0.01), jobs)
    return figures.figure_aux_loss(r_grid or figures.AUX_R_GRID, 10, jobs)


def figure_violations(table):
    """Rows breaking the invariants each figure is supposed to exhibit."""
    bad = []
    if table.name == "figure lb-rf":
        bad = [f"D={r[0]}" for r in table.rows if "fail" in r]
    elif table.name == "figure lb-compare":
        bad = [f"R={r[0]:.6g} LB1={r[1]:.6g} > LB2={r[2]:.6g}" for r in table.rows
               if r[1] > r[2] + 1e-9]
    elif table.name == "figure gen-bounds":
        bad = [f"R={r[0]}" for r in table.rows if min(r[4], r[7]) < -1e-9]
    elif table.name == "figure aux-loss":
        bad = [f"R={r[0]}" for r in table.rows
               if r[2] > r[1] + 1e-9 or r[5] > r[4] + 1e-9
               or r[3] < r[2] - 1e-6 or r[6] < r[5] - 1e-6]
    return bad


def cmd_figure(args):
    table = figure_table(args)
    os.makedirs(args.out_dir, exist_ok=True)
    stem = os.path.join(args.out_dir, args.name)
    _emit(table.to_csv(), stem + ".csv")
    _emit(figures.figure_svg(table), stem + ".svg")
    print(f"wrote {stem}.csv and {stem}.svg")
    bad = figure_violations(table)
    if bad:
        raise InvariantViolation(f"{len(bad)} rows break the expected ordering, first: {bad[0]}")


def cmd_props(args):
    trials = args.trials if args.trials is None else int(args.trials)
    reports = props.props_run(args.suite, int(args.seed), trials)
    text = "".join(r.summary() + "\n" + "".join(f"  {f}\n" for f in r.failures[:10])
                   for r in reports)
    _emit(text, args.out)
    if not all(r.passed for r in reports):
        raise InvariantViolation("property suite failed")


COMMANDS = {"rd": cmd_rd, "lb": cmd_lb, "sanov": cmd_sanov, "gen": cmd_gen, "mi": cmd_mi,
            "figure": cmd_figure, "props": cmd_props}


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        args = resolve(args)
        COMMANDS[args.command](args)
    except InvariantViolation as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except (NonConvergence, ConvergenceError) as exc:
        print(f"non-convergence: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGENCE
    except (ValueError, InfeasibleError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
