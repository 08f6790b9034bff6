"""Command-line front end.

    sdgtime solve      --problem dahlquist --scheme ImSDG --p 3 --K 6 --steps 10
    sdgtime converge   --problem vanderpol --scheme SISDG --p 3 --K 6 --dt 0.025,0.0125
    sdgtime stability  --scheme ExSDG --p 4 --K 4 --csv scan.csv --pgm scan.pgm
    sdgtime mlrun      --lam -10 --p 6 --dt 0.2 --levels 6,3 --iters 20

Exit codes: 0 ok, 2 bad flags or settings, 3 solver failure.  Run
metadata goes to stderr as a single line starting with '#'.
"""

import argparse
import sys

import numpy as np

from . import kernels
from .convergence import RK_METHODS, run_convergence, steps_for
from .dgref import dg_step_linear
from .ivp import MissingSplit
from .multilevel import build_hierarchy, iteration_history
from .problems import (VDP_SPLITS, make_advection, make_bad_example, make_dahlquist,
                       make_vanderpol)
from .schemes import INITS, VARIANTS, NewtonFailure, NewtonOptions, SchemeConfig, integrate
from .stability import (DEFAULT_IM, DEFAULT_RE, DEFAULT_RESOLUTION, a_stability_probe,
                        region_scan)

PROBLEMS = ("dahlquist", "vanderpol", "bad", "advection")
EXIT_USAGE = 2
EXIT_SOLVER = 3


class UsageError(Exception):
    pass


def fmt(x):
    if isinstance(x, (complex, np.complexfloating)):
        if x.imag == 0:
            return format(x.real, ".17g")
        return format(x.real, ".17g") + format(x.imag, "+.17g") + "j"
    return format(float(x), ".17g")


def _number(text):
    try:
        v = complex(text.replace(" ", ""))
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    return v.real if v.imag == 0 else v


def _floats(text):
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers: {text!r}")


def _ints(text):
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers: {text!r}")


def _pair(conv):
    def parse(text):
        vals = conv(text)
        if len(vals) != 2:
            raise argparse.ArgumentTypeError(f"expected two values: {text!r}")
        return tuple(vals)
    return parse


def _scheme_flags(p, default_variant="ImSDG", allow_rk=False):
    choices = VARIANTS + (tuple(RK_METHODS) if allow_rk else ())
    p.add_argument("--scheme", choices=choices, default=default_variant)
    p.add_argument("--p", type=int, default=3, help="polynomial degree")
    p.add_argument("--K", type=int, default=None, help="iterations per step (default 2p)")
    p.add_argument("--theta", type=float, default=1.0)
    p.add_argument("--init", choices=INITS, default="euler-march")
    p.add_argument("--newton-tol", type=float, default=1e-12)
    p.add_argument("--newton-maxit", type=int, default=25)


def _problem_flags(p):
    p.add_argument("--problem", choices=PROBLEMS, default="dahlquist")
    p.add_argument("--lam", type=_number, default=-1.0, help="Dahlquist lambda (may be complex)")
    p.add_argument("--eps", type=float, default=0.1, help="Van der Pol epsilon")
    p.add_argument("--split", choices=VDP_SPLITS, default="literal",
                   help="Van der Pol stiff/non-stiff split")
    p.add_argument("--cells", type=int, default=160, help="advection cells")
    p.add_argument("--tend", type=float, default=None, help="final time")


def build_parser():
    parser = argparse.ArgumentParser(prog="sdgtime", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", default=None, help="key=value settings file")
        p.add_argument("--jobs", type=int, default=None, help="worker threads")

    s = sub.add_parser("solve", help="integrate a problem, print the trajectory")
    common(s)
    _problem_flags(s)
    _scheme_flags(s)
    s.add_argument("--steps", type=int, default=10)
    s.add_argument("--out", default="-")

    c = sub.add_parser("converge", help="convergence study")
    common(c)
    _problem_flags(c)
    _scheme_flags(c, allow_rk=True)
    c.add_argument("--dt", type=_floats, default=None, help="comma-separated, decreasing")
    c.add_argument("--ref-steps", type=int, default=None)
    c.add_argument("--out", default="-")

    st = sub.add_parser("stability", help="amplification scan and A-stability probe")
    common(st)
    _scheme_flags(st)
    st.add_argument("--re", type=_pair(_floats), default=DEFAULT_RE)
    st.add_argument("--im", type=_pair(_floats), default=DEFAULT_IM)
    st.add_argument("--res", type=_pair(_ints), default=DEFAULT_RESOLUTION)
    st.add_argument("--csv", default="-", help="re,im,abs_am table ('-' for stdout)")
    st.add_argument("--pgm", default=None, help="plain graymap of the region")

    m = sub.add_parser("mlrun", help="one-level vs multilevel iteration history")
    common(m)
    _scheme_flags(m)
    m.add_argument("--lam", type=_number, default=-10.0)
    m.add_argument("--dt", type=float, default=0.2)
    m.add_argument("--levels", type=_ints, default=None, help="degrees, finest first")
    m.add_argument("--iters", type=int, default=20)
    m.add_argument("--out", default="-")
    m.set_defaults(p=6)
    return parser


def _config_argv(path, subparser):
    """Turn a key=value file into flags placed before the command line ones."""
    known = {}
    for action in subparser._actions:
        for opt in action.option_strings:
            if opt.startswith("--"):
                known[opt[2:]] = action
    argv = []
    try:
        lines = open(path).read().splitlines()
    except OSError as err:
        raise UsageError(f"cannot read config {path}: {err.strerror}")
    for no, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{no}: expected key=value: {raw.strip()}")
        key, value = (t.strip() for t in line.split("=", 1))
        key = key.replace("_", "-")
        if key not in known or key in ("config", "help"):
            raise UsageError(f"{path}:{no}: unknown key {key!r}: {raw.strip()}")
        argv += [f"--{key}", value]
    return argv


def parse_args(argv):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        subparser = parser._subparsers._group_actions[0].choices[args.command]
        try:
            extra = _config_argv(args.config, subparser)
        except UsageError as err:
            parser.error(str(err))
        args = parser.parse_args([args.command] + extra + list(argv[1:]))
    return args


def _config(args):
    K = 2 * args.p if args.K is None else args.K
    return SchemeConfig(args.scheme, args.p, K, args.theta, args.init,
                        NewtonOptions(args.newton_tol, args.newton_maxit))


def _problem(args):
    kw = {} if args.tend is None else {"t_end": args.tend}
    if args.problem == "dahlquist":
        return make_dahlquist(args.lam, **kw)
    if args.problem == "vanderpol":
        return make_vanderpol(args.eps, split=args.split, **kw)
    if args.problem == "bad":
        return make_bad_example(**kw)
    return make_advection(args.cells, **kw)


def _open(path):
    return sys.stdout if path == "-" else open(path, "w", newline="")


def _meta(**items):
    print("# " + " ".join(f"{k}={v}" for k, v in items.items()), file=sys.stderr)


def cmd_solve(args):
    problem = _problem(args)
    config = _config(args)
    traj = integrate(problem, config, args.steps)
    _meta(command="solve", problem=problem.name, scheme=config.label, init=config.init,
          steps=args.steps)
    out = _open(args.out)
    d = problem.dimension
    out.write("t," + ",".join(f"comp{i}" for i in range(d)) + "\n")
    for t, u in zip(traj.times, traj.states):
        out.write(fmt(t) + "," + ",".join(fmt(x) for x in u) + "\n")
    if out is not sys.stdout:
        out.close()


def cmd_converge(args):
    problem = _problem(args)
    method = RK_METHODS[args.scheme] if args.scheme in RK_METHODS else _config(args)
    dts = args.dt or [problem.t_end / n for n in (10, 20, 40)]
    for d in dts:
        steps_for(problem.t_end, d)
    table = run_convergence(problem, method, dts, reference_steps=args.ref_steps)
    _meta(command="converge", problem=problem.name, method=table.method,
          reference=table.reference.replace(" ", "_"))
    out = _open(args.out)
    d = problem.dimension
    out.write("dt," + ",".join(f"err_comp{i},order_comp{i}" for i in range(d)) + "\n")
    for dt, err, ords in table.rows():
        cells = []
        for e, o in zip(err, ords):
            cells += [fmt(e), "" if o is None else fmt(o)]
        out.write(fmt(dt) + "," + ",".join(cells) + "\n")
    if out is not sys.stdout:
        out.close()


def cmd_stability(args):
    config = _config(args)
    scan = region_scan(config, args.re, args.im, args.res, jobs=args.jobs)
    probe = a_stability_probe(config)
    _meta(command="stability", scheme=config.label, predictor=scan.metadata["predictor"],
          backend=kernels.BACKEND, re=f"{args.re[0]}:{args.re[1]}",
          im=f"{args.im[0]}:{args.im[1]}", res=f"{args.res[0]}x{args.res[1]}")
    out = _open(args.csv)
    out.write("re,im,abs_am\n")
    for i, x in enumerate(scan.re):
        for j, y in enumerate(scan.im):
            out.write(f"{fmt(x)},{fmt(y)},{fmt(scan.values[i, j])}\n")
    if out is not sys.stdout:
        out.close()
    if args.pgm:
        nx, ny = scan.resolution
        with open(args.pgm, "w", newline="") as f:
            f.write(f"P2\n{nx} {ny}\n255\n")
            for row in scan.pgm_rows():
                f.write(" ".join(str(int(v)) for v in row) + "\n")
    summary = (f"summary scheme={config.label} stable_cells={scan.stable_count} "
               f"total_cells={scan.values.size} probe={probe.verdict} "
               f"max_abs_am={fmt(probe.max_abs)} worst_lambda={fmt(probe.worst_lambda)}")
    print(summary, file=sys.stderr if args.csv == "-" else sys.stdout)


def cmd_mlrun(args):
    config = _config(args)
    levels = args.levels or [config.degree, config.degree // 2]
    if levels[0] != config.degree:
        raise UsageError("first level must equal --p")
    build_hierarchy(levels)
    problem = make_dahlquist(args.lam, t_end=args.dt)
    u_n = problem.u0
    ref = dg_step_linear(args.lam, config.degree, u_n, args.dt)
    one, multi = iteration_history(problem, config, levels, u_n, 0.0, args.dt,
                                   args.iters, ref)
    _meta(command="mlrun", scheme=config.variant, p=config.degree, dt=args.dt,
          levels=",".join(map(str, levels)), lam=fmt(args.lam))
    out = _open(args.out)
    out.write("iter,err_1level,err_mlevel\n")
    for k, (a, b) in enumerate(zip(one, multi)):
        out.write(f"{k},{fmt(a)},{fmt(b)}\n")
    if out is not sys.stdout:
        out.close()


COMMANDS = {"solve": cmd_solve, "converge": cmd_converge, "stability": cmd_stability,
            "mlrun": cmd_mlrun}


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    args = parse_args(argv)
    try:
        COMMANDS[args.command](args)
    except (NewtonFailure, FloatingPointError, np.linalg.LinAlgError) as err:
        print(f"error: solver failure: {err}", file=sys.stderr)
        return EXIT_SOLVER
    except (UsageError, MissingSplit, ValueError, TypeError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_USAGE
    return 0


if __name__ == "__main__":
    sys.exit(main())
