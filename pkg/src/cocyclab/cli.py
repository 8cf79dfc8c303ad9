"""Command-line experiment runner.

Every subcommand writes a CSV table (``--out`` or stdout) and a JSON
summary (``<out>.json`` or stderr). Exit status: 0 for a completed run,
2 when a hypothesis gate rejects the run, 1 for any other error.
"""
import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import avalanche, continuity, ldt, multiscale
from .cocycle import Constant, Perturbed, finite_scale_le_exact, log_sv_samples, spectral_gap
from .config import (RESULT_SCHEMA, ExperimentConfig, default_profile, load_cocycle, load_config,
                     load_system, read_json_arg)
from .dynamics import BoxIndicator, CylinderIndicator
from .errors import CocycLabError, GateError
from .montecarlo import derive_seed, mean_and_error

DEFAULT_SAMPLES = 10_000
EXIT_OK, EXIT_ERROR, EXIT_GATE = 0, 1, 2


class UsageError(CocycLabError):
    pass


# --------------------------------------------------------------------------
# formatting


def fmt(v):
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return format(v, ".17g")
    return str(v)


def render_csv(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt(v) for v in r])
    return buf.getvalue()


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else fmt(v)
    if hasattr(v, "__dataclass_fields__"):
        return {k: _jsonable(getattr(v, k)) for k in v.__dataclass_fields__}
    return str(v)


class Output:
    def __init__(self, out, dat=None):
        self.out = Path(out) if out else None
        self.dat = Path(dat) if dat else None

    def table(self, header, rows, dat_columns=None):
        text = render_csv(header, rows)
        if self.out:
            self.out.parent.mkdir(parents=True, exist_ok=True)
            self.out.write_text(text)
        else:
            sys.stdout.write(text)
        if self.dat and dat_columns:
            i, j = (header.index(c) for c in dat_columns)
            lines = [f"# {dat_columns[0]} {dat_columns[1]}"]
            lines += [f"{fmt(r[i])} {fmt(r[j])}" for r in rows]
            self.dat.write_text("\n".join(lines) + "\n")

    def summary(self, payload):
        payload = {"schema": RESULT_SCHEMA, **_jsonable(payload)}
        text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
        if self.out:
            self.out.with_suffix(".json").write_text(text)
        else:
            sys.stderr.write(text)


# --------------------------------------------------------------------------
# argument helpers


def int_list(text):
    return [int(float(t)) for t in str(text).split(",") if t.strip()]


def float_list(text):
    return [float(t) for t in str(text).split(",") if t.strip()]


def _param(args, cfg, name, default=None, conv=None, required=False):
    v = getattr(args, name, None)
    if v is None:
        v = cfg.params.get(name)
        if v is not None and conv is not None:
            v = conv(",".join(map(str, v))) if isinstance(v, list) else conv(v)
    if v is None:
        if required:
            raise UsageError(f"missing parameter --{name.replace('_', '-')} (flag or params.{name})")
        v = default
    return v


def _cocycle(cfg, required=True):
    if cfg.cocycle is None and required:
        raise UsageError("no cocycle given (use --cocycle or the config's 'cocycle' field)")
    return cfg.cocycle


def _system(cfg):
    if cfg.system is None:
        raise UsageError("no base system given (use --system or the config's 'system' field)")
    if cfg.cocycle is not None:
        cfg.cocycle.check_system(cfg.system)
    return cfg.system


def _direction(cfg, dim):
    if cfg.direction is not None:
        return cfg.direction
    E = np.zeros((dim, dim))
    E[0, 0] = 1.0
    return Constant(E)


def _profile(cfg, epsilon=0.1):
    return cfg.profile if cfg.profile is not None else default_profile(epsilon)


# --------------------------------------------------------------------------
# subcommands


def cmd_estimate_le(args, cfg, out):
    A, system = _cocycle(cfg), _system(cfg)
    scales = _param(args, cfg, "n", conv=int_list, required=True)
    k = _param(args, cfg, "k", 1, int)
    rows = []
    if args.exact:
        for n in scales:
            rows.append([n, k, finite_scale_le_exact(A, system, n, k), 0.0, 0, args.seed, 0, "exact"])
    else:
        vals = log_sv_samples(A, system, scales, args.samples, args.seed, k, args.workers)
        for j, n in enumerate(scales):
            m, e, neg = mean_and_error(vals[:, j] / n)
            rows.append([n, k, m, e, args.samples, args.seed, neg, "monte_carlo"])
    out.table(["n", "k", "value", "std_error", "samples", "seed", "neg_inf", "method"], rows, ("n", "value"))
    out.summary({"command": "estimate-le", "seed": args.seed, "samples": args.samples})


def cmd_spectrum(args, cfg, out):
    A, system = _cocycle(cfg), _system(cfg)
    n = _param(args, cfg, "n", conv=int, required=True)
    s = continuity.le_spectrum(A, system, n, args.samples, args.seed, args.workers)
    rows = [[k + 1, s.values[k], s.errors[k], s.blocks[k], s.block_errors[k]] for k in range(len(s.values))]
    out.table(["k", "lambda", "std_error", "block", "block_error"], rows, ("k", "lambda"))
    out.summary({"command": "spectrum", "n": n, "seed": args.seed, "samples": args.samples})


def cmd_verify_ap(args, cfg, out):
    n = _param(args, cfg, "n", 10, int)
    count = _param(args, cfg, "trials", 100, int)
    eps = _param(args, cfg, "epsilon", 0.5, float)
    kappa = _param(args, cfg, "kappa", 1e-4, float)
    c_ap = _param(args, cfg, "c_ap", avalanche.DEFAULT_C_AP, float)
    c_gate = _param(args, cfg, "c_gate", avalanche.DEFAULT_C_GATE, float)
    hyp = avalanche.APHypotheses(eps, kappa, c_gate)
    if "chain" in cfg.raw:
        chains = [np.asarray(cfg.raw["chain"], dtype=float)]
    else:
        rng = np.random.default_rng(np.random.SeedSequence(args.seed))
        chains = avalanche.hyperbolic_chains(rng, count, n, eps, kappa)
    rows = []
    for i, ch in enumerate(chains):
        r = avalanche.verify_ap(ch, hyp, c_ap)
        rows.append([i, r.n, r.lhs_defect, r.bound, r.roundoff, r.hypotheses_ok, r.satisfied])
    out.table(["index", "n", "defect", "bound", "roundoff", "hypotheses_ok", "satisfied"], rows,
              ("index", "defect"))
    out.summary({"command": "verify-ap", "c_ap": c_ap, "epsilon": eps, "kappa": kappa,
                 "all_satisfied": all(r[-1] for r in rows)})


def cmd_ldt_probe(args, cfg, out):
    system = _system(cfg)
    eps = _param(args, cfg, "epsilon", 0.1, float)
    grid = _param(args, cfg, "n_grid", conv=int_list, required=True)
    A = cfg.cocycle
    rows, estimates = [], []
    for i, n in enumerate(grid):
        s = derive_seed(args.seed, i)
        if A is not None:
            e = ldt.empirical_fiber_ldt(A, system, n, args.samples, s, eps, workers=args.workers)
        else:
            xi = cfg.observable
            if xi is None:
                xi = CylinderIndicator((0,)) if system.kind == "shift" else BoxIndicator(
                    (0.0,) * system.dim, (0.5,) + (1.0,) * (system.dim - 1))
            e = ldt.empirical_base_ldt(system, xi, n, args.samples, s, eps, workers=args.workers)
        estimates.append(e)
        rows.append([n, e.measure, e.ci_radius, e.deviation, e.mean, e.neg_inf])
    out.table(["n", "measure", "ci_radius", "deviation", "mean", "neg_inf"], rows, ("n", "measure"))
    summary = {"command": "ldt-probe", "probe": "fiber" if A is not None else "base", "epsilon": eps}
    if len(estimates) >= 4:
        f = ldt.fit_mesf(estimates, args.samples)
        summary["fit"] = {"c": f.c, "r_squared": f.r_squared, "slope": f.slope,
                          "intercept": f.intercept, "corrected": list(f.corrected)}
    out.summary(summary)


def cmd_multiscale(args, cfg, out):
    B, system = _cocycle(cfg), _system(cfg)
    A = cfg.reference if cfg.reference is not None else B
    n0 = _param(args, cfg, "n0", conv=int, required=True)
    growth = _param(args, cfg, "growth", multiscale.DEFAULT_GROWTH, float)
    steps = _param(args, cfg, "steps", 1, int)
    scales = _param(args, cfg, "scales", None, int_list)
    kappa = _param(args, cfg, "kappa", None, float)
    if kappa is None:
        kappa = spectral_gap(A, system, 4 * n0, args.samples, derive_seed(args.seed, 101), workers=args.workers).kappa
    eps = _param(args, cfg, "epsilon", None, float)
    if eps is None:
        eps = kappa / 100
    C = _param(args, cfg, "C", None, float)
    if C is None:
        C = multiscale.estimate_step_constant(B, system, n0, args.samples, derive_seed(args.seed, 102), args.workers)
    profile = _profile(cfg, eps)
    camp = multiscale.run_campaign(B, system, n0, steps, eps, kappa, C, profile, args.samples, args.seed,
                                   reference=cfg.reference, growth=growth, scales=scales, workers=args.workers)
    rows = [[r.k, r.n, r.eta, r.theta, r.lam, r.lam_error, r.bound, r.measured, r.sigma, r.verdict]
            for r in camp.rows]
    out.table(["k", "n_k", "eta_k", "theta_k", "lambda_k", "lambda_error", "bound", "measured", "sigma",
               "verdict"], rows, ("n_k", "lambda_k"))
    summary = {"command": "multiscale", "kappa": kappa, "epsilon": eps, "C": C, "growth": growth,
               "profile": profile.to_config()}
    if camp.rejected is not None:
        raise GateError(camp.rejected.reason, str(camp.rejected), summary=summary, **camp.rejected.details)
    out.summary(summary)


def cmd_continuity_scan(args, cfg, out):
    A, system = _cocycle(cfg), _system(cfg)
    grid = _param(args, cfg, "n_grid", conv=int_list, required=True)
    C1 = _param(args, cfg, "C1", 1.0, float)
    p = _param(args, cfg, "p", 2.0, float)
    profile = _profile(cfg)
    rep = continuity.continuity_scan(A, _direction(cfg, A.dim), system, grid, profile, C1,
                                     args.samples, args.seed, p, args.workers)
    rows = [[int(r.x), h, r.measured, r.sigma, r.bound, r.verdict] for r, h in zip(rep.rows, rep.notes["h"])]
    out.table(["n", "h", "measured", "sigma", "bound", "verdict"], rows, ("n", "measured"))
    out.summary({"command": "continuity-scan", "C1": C1, "p": p, "profile": profile.to_config()})


def cmd_usc_probe(args, cfg, out):
    A, system = _cocycle(cfg), _system(cfg)
    grid = _param(args, cfg, "n_grid", conv=int_list, required=True)
    level = _param(args, cfg, "level", 0.05, float)
    mode = _param(args, cfg, "mode", "finite", str)
    h = _param(args, cfg, "h", 0.0, float)
    delta = _param(args, cfg, "delta", None, float)
    B = Perturbed(A, _direction(cfg, A.dim), h) if h > 0 else A
    profile = cfg.profile
    l1 = _param(args, cfg, "l1", None, float)
    if mode == "finite" and l1 is None:
        l1 = continuity.l1_proxy(A, system, continuity.proxy_scale(max(grid)), args.samples,
                                 derive_seed(args.seed, 10**6), args.workers)
    rows = []
    for i, n in enumerate(grid):
        u = continuity.usc_probe(A, B, system, n, level, mode, args.samples, derive_seed(args.seed, i),
                                 delta, l1, profile, args.workers)
        pr = u.l1
        rows.append([n, u.violation, u.ci_radius, u.threshold, u.predicted,
                     None if pr is None else pr.value, None if pr is None else pr.std_error,
                     None if pr is None else pr.scale, None if pr is None else pr.exact])
    out.table(["n", "violation", "ci_radius", "threshold", "predicted", "l1", "l1_error", "l1_scale",
               "l1_exact"], rows, ("n", "violation"))
    out.summary({"command": "usc-probe", "mode": mode, "level": level, "h": h})


def cmd_speed_probe(args, cfg, out):
    B, system = _cocycle(cfg), _system(cfg)
    grid = _param(args, cfg, "n_grid", conv=int_list, required=True)
    C = _param(args, cfg, "C", None, float)
    if C is None:
        C = multiscale.estimate_step_constant(B, system, min(grid), args.samples,
                                              derive_seed(args.seed, 102), args.workers)
    n_max = _param(args, cfg, "n_max", None, int)
    proxy_samples = _param(args, cfg, "proxy_samples", None, int)
    profile = _profile(cfg)
    rep = continuity.speed_probe(B, system, profile, grid, C, args.samples, args.seed, n_max,
                                 proxy_samples, args.workers)
    trunc = set(rep.notes["truncated"])
    rows = [[int(r.x), r.label, r.measured, r.sigma, r.bound, r.verdict, int(r.x) in trunc] for r in rep.rows]
    out.table(["n", "inequality", "measured", "sigma", "bound", "verdict", "truncated"], rows,
              ("n", "measured"))
    out.summary({"command": "speed-probe", "C": C, "l1_proxy": rep.notes["l1_proxy"],
                 "iota_prev_sqrt": rep.notes["iota_prev_sqrt"], "profile": profile.to_config()})


def cmd_modulus_scan(args, cfg, out):
    A = _cocycle(cfg)
    system = cfg.system
    if system is not None:
        A.check_system(system)
    hs = _param(args, cfg, "h_grid", [0.0] + [10.0 ** -k for k in range(1, 7)], float_list)
    C1 = _param(args, cfg, "C1", 1.0, float)
    c = _param(args, cfg, "c", None, float)
    p = _param(args, cfg, "p", 2.0, float)
    scale = _param(args, cfg, "scale", None, int)
    profile = _profile(cfg)
    rep = continuity.modulus_scan(A, _direction(cfg, A.dim), system, hs, profile, c, C1, p, scale,
                                  args.samples, args.seed, args.workers)
    rows = [[r.x, r.measured, r.sigma, r.bound, r.verdict] for r in rep.rows]
    out.table(["h", "measured", "sigma", "bound", "verdict"], rows, ("h", "measured"))
    out.summary({"command": "modulus-scan", **rep.notes, "profile": profile.to_config()})


COMMANDS = {
    "estimate-le": (cmd_estimate_le, "finite-scale Lyapunov exponent; columns n,k,value,std_error,samples,seed,neg_inf,method"),
    "spectrum": (cmd_spectrum, "all finite-scale exponents; columns k,lambda,std_error,block,block_error"),
    "verify-ap": (cmd_verify_ap, "avalanche principle on generated chains; columns index,n,defect,bound,roundoff,hypotheses_ok,satisfied"),
    "ldt-probe": (cmd_ldt_probe, "empirical deviation-set measures; columns n,measure,ci_radius,deviation,mean,neg_inf"),
    "multiscale": (cmd_multiscale, "inductive-step campaign; columns k,n_k,eta_k,theta_k,lambda_k,lambda_error,bound,measured,sigma,verdict"),
    "continuity-scan": (cmd_continuity_scan, "finite-scale continuity; columns n,h,measured,sigma,bound,verdict"),
    "usc-probe": (cmd_usc_probe, "upper semicontinuity; columns n,violation,ci_radius,threshold,predicted,l1,l1_error,l1_scale,l1_exact"),
    "speed-probe": (cmd_speed_probe, "speed of convergence; columns n,inequality,measured,sigma,bound,verdict,truncated"),
    "modulus-scan": (cmd_modulus_scan, "modulus of continuity; columns h,measured,sigma,bound,verdict"),
}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON experiment config")
    common.add_argument("--system", help="system description as JSON text or file (overrides config)")
    common.add_argument("--cocycle", help="cocycle description as JSON text or file (overrides config)")
    common.add_argument("--seed", type=int, help="master seed (required here or in the config)")
    common.add_argument("--samples", type=int, help=f"Monte Carlo samples (default {DEFAULT_SAMPLES})")
    common.add_argument("--workers", type=int, default=1, help="threads; results do not depend on it")
    common.add_argument("--out", help="CSV output path (default stdout); summary goes to <out>.json")
    common.add_argument("--dat", help="optional two-column plot-ready data file")

    p = argparse.ArgumentParser(prog="cocyclab", description="Experiments on linear cocycles.")
    sub = p.add_subparsers(dest="command", required=True)
    parsers = {}
    for name, (_, help_text) in COMMANDS.items():
        parsers[name] = sub.add_parser(name, parents=[common], help=help_text, description=help_text)

    parsers["estimate-le"].add_argument("--n", type=int_list, help="scales, comma separated")
    parsers["estimate-le"].add_argument("--k", type=int, help="singular value index (default 1)")
    parsers["estimate-le"].add_argument("--exact", action="store_true", help="enumerate all words instead")
    parsers["spectrum"].add_argument("--n", type=int, help="scale")

    ap = parsers["verify-ap"]
    ap.add_argument("--n", type=int, help="chain length (default 10)")
    ap.add_argument("--trials", type=int, help="number of generated chains (default 100)")
    ap.add_argument("--epsilon", type=float, help="angle parameter (default 0.5)")
    ap.add_argument("--kappa", type=float, help="gap parameter (default 1e-4)")
    ap.add_argument("--c-ap", dest="c_ap", type=float, help="AP constant (default: calibrated)")
    ap.add_argument("--c-gate", dest="c_gate", type=float, help="hypothesis constant c in kappa <= c eps^2")

    lp = parsers["ldt-probe"]
    lp.add_argument("--epsilon", type=float, help="deviation size (default 0.1)")
    lp.add_argument("--n-grid", dest="n_grid", type=int_list, help="scales, comma separated")

    mp = parsers["multiscale"]
    mp.add_argument("--n0", type=int, help="initial scale")
    mp.add_argument("--growth", type=float, help="exponent a in n_{k+1} = n_k^{1+a}")
    mp.add_argument("--steps", type=int, help="number of inductive steps (default 1)")
    mp.add_argument("--scales", type=int_list, help="explicit scale sequence (overrides n0/growth/steps)")
    mp.add_argument("--epsilon", type=float, help="run parameter epsilon (default kappa/100)")
    mp.add_argument("--kappa", type=float, help="spectral gap (default: estimated at 4 n0)")
    mp.add_argument("--C", type=float, help="step constant (default: 2x empirical L2 bound at n0)")

    cp = parsers["continuity-scan"]
    cp.add_argument("--n-grid", dest="n_grid", type=int_list, help="scales")
    cp.add_argument("--C1", type=float, help="distance exponent, dist < e^{-C1 n} (default 1)")
    cp.add_argument("--p", type=float, help="L^p exponent of the distance (default 2)")

    up = parsers["usc-probe"]
    up.add_argument("--n-grid", dest="n_grid", type=int_list, help="scales")
    up.add_argument("--level", type=float, help="epsilon (finite mode) or t (neg_inf mode)")
    up.add_argument("--mode", choices=["finite", "neg_inf"], help="bound type (default finite)")
    up.add_argument("--h", type=float, help="B = A + h E (default 0)")
    up.add_argument("--delta", type=float, help="require dist(A, B) < delta")
    up.add_argument("--l1", type=float, help="known L1(A), skips the proxy run")

    sp = parsers["speed-probe"]
    sp.add_argument("--n-grid", dest="n_grid", type=int_list, help="scales")
    sp.add_argument("--C", type=float, help="constant C (default: 2x empirical L2 bound)")
    sp.add_argument("--n-max", dest="n_max", type=int, help="L1 proxy scale (default min(1e6, 100 max n))")
    sp.add_argument("--proxy-samples", dest="proxy_samples", type=int, help="samples for the proxy run")

    mo = parsers["modulus-scan"]
    mo.add_argument("--h-grid", dest="h_grid", type=float_list, help="perturbation sizes")
    mo.add_argument("--C1", type=float, help="finite-scale continuity constant (default 1)")
    mo.add_argument("--c", type=float, help="omega constant (default 1/(2 C1))")
    mo.add_argument("--p", type=float, help="exponent p in omega (default 2)")
    mo.add_argument("--scale", type=int, help="proxy scale for non-constant families (default 1000)")
    return p


def _load(args):
    cfg = load_config(args.config) if args.config else ExperimentConfig()
    if args.system:
        cfg.system = load_system(read_json_arg(args.system, "--system"))
    if args.cocycle:
        cfg.cocycle = load_cocycle(read_json_arg(args.cocycle, "--cocycle"))
    if args.seed is None:
        args.seed = cfg.seed
    if args.seed is None:
        raise UsageError("a seed is required (--seed or the config's 'seed' field)")
    if args.seed < 0:
        raise UsageError("seed must be non-negative")
    if args.samples is None:
        args.samples = cfg.samples or DEFAULT_SAMPLES
    if args.samples < 1:
        raise UsageError("samples must be positive")
    return cfg


def run(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    out = Output(args.out, args.dat)
    try:
        cfg = _load(args)
        COMMANDS[args.command][0](args, cfg, out)
        return EXIT_OK
    except GateError as e:
        payload = {"status": "rejected", "reason": e.reason, "message": str(e), "details": e.details}
        if out.out:
            out.summary(payload)
        sys.stderr.write(json.dumps({"schema": RESULT_SCHEMA, **_jsonable(payload)}, sort_keys=True) + "\n")
        return EXIT_GATE
    except (CocycLabError, ValueError, OSError) as e:
        sys.stderr.write(f"cocyclab {args.command}: error: {e}\n")
        return EXIT_ERROR


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
