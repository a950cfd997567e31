"""Command-line front end.

Subcommands:
  steady    convergence table for a steady benchmark problem
  ac-study  same machinery with an h-coupled horizon rule
  evolve    time-dependent run; writes solution snapshots and, when an
            exact solution exists, the final error
  verify    inequality diagnostics sweep

Configuration may come from a plain key=value file (--config); command-line
flags override file values, and unknown keys are rejected.  Symbolic pi
expressions like "pi/6" or "2pi" are accepted wherever a real number is.
"""

import argparse
import math
import re
import sys

import numpy as np

from . import diagnostics, reporting
from .assembly import assemble_forms, nbz, nip, nnipg
from .imex import imex_evolve
from .kernel import make_kernel
from .mesh import build_mesh
from .problems import get_problem
from .space import DGSpace, snapshot
from .steady import convergence_study, l2_error

_PI_RE = re.compile(r"^\s*(\d+(?:\.\d+)?)?\s*\*?\s*pi\s*(?:/\s*(\d+(?:\.\d+)?))?\s*$")


def parse_real(text):
    """Parse a float, allowing pi expressions: 'pi', '2pi', 'pi/6', '2*pi/5'."""
    if isinstance(text, (int, float)):
        return float(text)
    m = _PI_RE.match(text)
    if m:
        num = float(m.group(1)) if m.group(1) else 1.0
        den = float(m.group(2)) if m.group(2) else 1.0
        return num * math.pi / den
    return float(text)


def parse_delta_rule(text):
    """A horizon specification: literal value, '2.5h', or 'sqrt_h'."""
    if text in ("sqrt_h",):
        return text
    if isinstance(text, str) and text.endswith("h"):
        return ("coupled", float(text[:-1]))
    return parse_real(text)


def _rule_fn(rule):
    if isinstance(rule, tuple) and rule[0] == "coupled":
        c = rule[1]
        return lambda h: c * h
    return rule


def parse_int_list(text):
    return [int(t) for t in str(text).split(",") if t.strip()]


def parse_real_list(text):
    return [parse_real(t) for t in str(text).split(",") if t.strip()]


def make_variant(tag, k, c=None):
    tag = tag.lower()
    if tag == "nip":
        return nip(5.0 if c is None else c)
    if tag == "nnipg":
        return nnipg(5.0 if c is None else c)
    if tag == "nbz":
        return nbz(k, 1.0 if c is None else c)
    raise ValueError(f"unknown scheme {tag!r} (expected nip, nnipg or nbz)")


def _apply_config_file(args, parser, argv):
    """Merge key=value pairs from --config; CLI flags win."""
    if not getattr(args, "config", None):
        return args
    known = {a.dest for a in parser._actions}
    overrides = {}
    with open(args.config) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise SystemExit(f"malformed config line: {line!r}")
            key, val = (s.strip() for s in line.split("=", 1))
            key = key.replace("-", "_")
            if key not in known:
                raise SystemExit(f"unknown configuration key: {key!r}")
            overrides[key] = val
    explicit = {a.replace("--", "").replace("-", "_").split("=")[0]
                for a in argv if a.startswith("--")}
    for key, val in overrides.items():
        if key in explicit:
            continue
        setattr(args, key, val)
    return args


def _add_common(p):
    p.add_argument("--config", help="key=value configuration file")
    p.add_argument("--out", default=None, help="output CSV path")


def build_parser():
    ap = argparse.ArgumentParser(prog="nldg",
                                 description="Penalty DG solvers for 1D nonlocal diffusion")
    sub = ap.add_subparsers(dest="command", required=True)

    ps = sub.add_parser("steady", help="steady convergence table")
    ps.add_argument("--example", required=True, choices=["ex1", "ex2"])
    ps.add_argument("--scheme", default="nip")
    ps.add_argument("--k", type=int, default=1)
    ps.add_argument("--alpha", default="0.5")
    ps.add_argument("--delta", default="pi/6")
    ps.add_argument("--N", default="24,36,48,60,72,84,96")
    ps.add_argument("--mu-coeff", dest="mu_coeff", default=None)
    _add_common(ps)

    pa = sub.add_parser("ac-study", help="horizon-coupled convergence study")
    pa.add_argument("--example", default="ex1", choices=["ex1", "ex2"])
    pa.add_argument("--scheme", default="nip")
    pa.add_argument("--k", type=int, default=1)
    pa.add_argument("--alpha", default="0.5")
    pa.add_argument("--delta-rule", dest="delta_rule", default="2.5h",
                    help="'2.5h', 'sqrt_h', or any coupled 'Ch'")
    pa.add_argument("--N", default="24,36,48,60,72,84,96")
    pa.add_argument("--mu-coeff", dest="mu_coeff", default=None)
    _add_common(pa)

    pe = sub.add_parser("evolve", help="time-dependent run")
    pe.add_argument("--example", required=True,
                    choices=["ex3", "ex4_i", "ex4_ii", "ex5"])
    pe.add_argument("--scheme", default="nip")
    pe.add_argument("--k", type=int, default=2)
    pe.add_argument("--alpha", default=None)
    pe.add_argument("--delta", default=None)
    pe.add_argument("--N", type=int, required=True)
    pe.add_argument("--sigma", default=None)
    pe.add_argument("--cfl", default=None)
    pe.add_argument("--mu-coeff", dest="mu_coeff", default=None)
    pe.add_argument("--imex", default="imex4", choices=["imex4", "imex3"])
    pe.add_argument("--strict", action="store_true",
                    help="run the integrator order self-test first")
    _add_common(pe)

    pv = sub.add_parser("verify", help="inequality diagnostics sweep")
    pv.add_argument("--quantity", required=True,
                    choices=["stability", "c0", "boundedness", "poincare"])
    pv.add_argument("--scheme", default="nip")
    pv.add_argument("--N", default="16,32,64,96")
    pv.add_argument("--k", default="1,2,3")
    pv.add_argument("--alpha", default="0.5,2.5")
    pv.add_argument("--delta", default="pi/6")
    pv.add_argument("--mu-coeff", dest="mu_coeff", default="5")
    pv.add_argument("--seed", type=int, default=0)
    pv.add_argument("--trials", type=int, default=1000)
    _add_common(pv)
    return ap


def cmd_steady(args, coupled=False):
    problem = get_problem(args.example)
    k = int(args.k)
    alpha = parse_real(args.alpha)
    c = parse_real(args.mu_coeff) if args.mu_coeff is not None else None
    variant = make_variant(args.scheme, k, c)
    rule = _rule_fn(parse_delta_rule(args.delta_rule if coupled else args.delta))
    Ns = parse_int_list(args.N)
    report = convergence_study(problem, Ns, k, variant, alpha, rule)
    out = args.out or f"{args.example}_{variant.tag}_k{k}.csv"
    reporting.report_to_csv(report, out)
    print(f"wrote {out}")
    for row in report.rows:
        print(f"N={row.N:4d}  L2={reporting.fmt_error(row.l2_error)}"
              f"  order={reporting.fmt_order(row.l2_order)}")
    return 0


def cmd_evolve(args):
    problem = get_problem(args.example)
    k = int(args.k)
    alpha = parse_real(args.alpha) if args.alpha else problem.default_alpha
    delta = parse_real(args.delta) if args.delta else problem.default_delta
    if args.sigma is not None:
        problem = problem.with_sigma(parse_real(args.sigma))
    ks = make_kernel(alpha, delta)
    if args.mu_coeff is not None:
        c = parse_real(args.mu_coeff)
    else:
        c = 7.0 if k == 3 else 5.0
    variant = make_variant(args.scheme, k, c)
    cfl = parse_real(args.cfl) if args.cfl else None
    fld, _ = imex_evolve(problem, int(args.N), k, variant, ks,
                         cfl=cfl, scheme=args.imex, strict=args.strict)
    out = args.out or f"{args.example}_N{args.N}_k{k}_snapshot.csv"
    xs, us = snapshot(fld)
    reporting.snapshot_to_csv(xs, us, out)
    print(f"wrote {out}")
    if problem.exact is not None:
        err = l2_error(fld, lambda x: problem.exact(x, problem.final_time))
        print(f"final L2 error: {reporting.fmt_error(err)}")
    return 0


def cmd_verify(args):
    Ns = parse_int_list(args.N)
    ks_list = parse_int_list(args.k)
    alphas = parse_real_list(args.alpha)
    rule = _rule_fn(parse_delta_rule(args.delta))
    mu_coeff = parse_real(args.mu_coeff)
    configs = []
    for N in Ns:
        for k in ks_list:
            for alpha in alphas:
                h = math.pi / N
                delta = rule(h) if callable(rule) else float(rule)
                kern = make_kernel(alpha, delta)
                mesh = build_mesh(0.0, math.pi, N, delta)
                space = DGSpace(mesh, k)
                forms = assemble_forms(space, kern)
                configs.append((forms, N, k, alpha, delta))
    reports = diagnostics.run_sweep(args.quantity, configs, mu_coeff=mu_coeff,
                                    seed=args.seed, trials=args.trials)
    out = args.out or f"verify_{args.quantity}.csv"
    reporting.inequalities_to_csv(reports, out)
    print(f"wrote {out}")
    vals = np.array([r.estimate for r in reports])
    print(f"{args.quantity}: min={vals.min():.6e} max={vals.max():.6e}")
    return 0


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    args = _apply_config_file(args, parser, argv)
    try:
        if args.command == "steady":
            return cmd_steady(args)
        if args.command == "ac-study":
            return cmd_steady(args, coupled=True)
        if args.command == "evolve":
            return cmd_evolve(args)
        if args.command == "verify":
            return cmd_verify(args)
        raise SystemExit(f"unknown command {args.command!r}")
    except (ValueError, RuntimeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
