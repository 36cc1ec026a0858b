"""``maxdrag`` command line: evaluate, sweep, optimise, export and reproduce.

Exit codes: 0 success, 1 reproduction gate failure, 2 invalid shape or
arguments, 3 evaluation failure.  Outputs are built in memory and written
atomically together with a manifest, so a failed run leaves nothing behind.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import logging
import math
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import __version__
from .analytic import F_psi, mushroom_bound
from .errors import ConvergenceError, InvalidParameterError, MaxdragError
from .functional import CSV_HEADER, QuadratureSpec, evaluate_F, evaluate_F_adaptive
from .geometry import Cavity, build_cavity, canonical_family, family_arity, make_canonical_zigzag, make_mushroom
from .io import cavity_to_json, cavity_to_svg, load_cavity
from .optimize import (Method, OptimizationProblem, default_bounds, optimize, optimize_piecewise_quadratic,
                       sweep_F_alpha)
from .pseudo import evaluate_F_pseudo
from .reproduce import PSI0, format_table, run_suite
from .tracer import DEFAULT_MAX_REFLECTIONS, TraceLimits

log = logging.getLogger("maxdrag")

EXIT_OK, EXIT_GATE, EXIT_SHAPE, EXIT_EVAL = 0, 1, 2, 3


class Outputs:
    """Files of one run, committed atomically with a manifest."""

    def __init__(self, out_dir: Path, command: str, config: dict):
        self.dir = Path(out_dir)
        self.command = command
        self.config = config
        self.files: dict[str, bytes] = {}

    def add(self, name: str, content) -> None:
        self.files[name] = content.encode() if isinstance(content, str) else content

    @staticmethod
    def blob_hash(data: bytes) -> str:
        return hashlib.sha1(b"blob %d\0" % len(data) + data).hexdigest()

    def commit(self) -> None:
        manifest = {
            "tool": "maxdrag",
            "version": __version__,
            "command": self.command,
            "config": self.config,
            "outputs": {k: self.blob_hash(v) for k, v in sorted(self.files.items())},
        }
        self.files["manifest.json"] = (json.dumps(manifest, indent=2, sort_keys=True) + "\n").encode()
        self.dir.mkdir(parents=True, exist_ok=True)
        for name, data in self.files.items():
            fd, tmp = tempfile.mkstemp(dir=self.dir, prefix=f".{name}.")
            try:
                with os.fdopen(fd, "wb") as fh:
                    fh.write(data)
                os.replace(tmp, self.dir / name)
            except BaseException:
                if os.path.exists(tmp):
                    os.unlink(tmp)
                raise


def _csv(rows, header) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _g(x) -> str:
    return repr(float(x))


# ------------------------------------------------------------------ config and shapes

def _load_config(path) -> dict:
    p = Path(path)
    try:
        raw = p.read_bytes()
    except OSError as exc:
        raise InvalidParameterError(f"cannot read config {path}: {exc}") from None
    try:
        if p.suffix.lower() == ".toml":
            try:
                import tomllib
            except ModuleNotFoundError:  # Python < 3.11
                import tomli as tomllib
            cfg = tomllib.loads(raw.decode())
        else:
            cfg = json.loads(raw)
    except ValueError as exc:
        raise InvalidParameterError(f"malformed config {path}: {exc}") from None
    if not isinstance(cfg, dict):
        raise InvalidParameterError("config must be a table/object")
    quad = cfg.pop("quadrature", None)
    if isinstance(quad, dict):
        cfg.setdefault("n1", quad.get("n1"))
        cfg.setdefault("n2", quad.get("n2"))
    bounds = cfg.pop("bounds", None)
    if isinstance(bounds, dict):
        cfg.setdefault("lower", bounds.get("lower"))
        cfg.setdefault("upper", bounds.get("upper"))
    return {k.replace("-", "_"): v for k, v in cfg.items()}


def _merge_config(args) -> None:
    """Config file values fill whatever was not given on the command line."""
    if getattr(args, "config", None):
        for key, value in _load_config(args.config).items():
            if hasattr(args, key) and getattr(args, key) is None:
                setattr(args, key, value)


def _spec(args, default: int) -> QuadratureSpec:
    n1 = int(args.n1) if args.n1 is not None else default
    n2 = int(args.n2) if args.n2 is not None else n1
    return QuadratureSpec(n1, n2)


def _limits(args) -> TraceLimits:
    cap = getattr(args, "max_reflections", None)
    return TraceLimits(int(cap) if cap is not None else DEFAULT_MAX_REFLECTIONS)


def _need(args, *names):
    missing = [n for n in names if getattr(args, n, None) is None]
    if missing:
        raise InvalidParameterError(f"{args.family} needs --{', --'.join(missing)}")
    return [float(getattr(args, n)) for n in names]


def resolve_shape(args) -> Cavity:
    if getattr(args, "shape_file", None):
        return load_cavity(args.shape_file)
    if not args.family:
        raise InvalidParameterError("give --family or --shape-file")
    fam = canonical_family(args.family)
    m = int(args.m) if args.m is not None else None
    if args.params is not None:
        return build_cavity(fam, args.params, m)
    if fam == "two-segment-line":
        a = _need(args, "alpha")[0]
        return build_cavity(fam, [a, float(args.beta) if args.beta is not None else a])
    if fam == "symmetric-two-segment-line":
        return build_cavity(fam, _need(args, "alpha"))
    if fam == "symmetric-two-segment-quadratic":
        return build_cavity(fam, _need(args, "alpha", "beta"))
    if fam == "canonical-zigzag":
        psi = _need(args, "psi")[0]
        if m is None:
            raise InvalidParameterError("canonical-zigzag needs --m")
        return make_canonical_zigzag(psi, m)
    if fam == "mushroom":
        return make_mushroom(_need(args, "eps")[0])
    if fam == "rectangle":
        return build_cavity(fam, _need(args, "height"))
    family_arity(fam, m)  # rejects unknown names
    raise InvalidParameterError(f"{fam} needs --params")


def _set_threads(args) -> int:
    import numba

    n = args.threads
    if n is None and os.environ.get("MAXDRAG_THREADS"):
        n = os.environ["MAXDRAG_THREADS"]
    hw = numba.config.NUMBA_NUM_THREADS
    n = hw if n is None else int(n)
    if n < 1:
        raise InvalidParameterError("--threads must be positive")
    numba.set_num_threads(min(n, hw))
    return n


# ------------------------------------------------------------------ commands

def cmd_eval(args, out: Outputs) -> int:
    cav = resolve_shape(args)
    limits = _limits(args)
    if args.target_se is not None:
        est = evaluate_F_adaptive(cav, float(args.target_se), limits)
    else:
        est = evaluate_F(cav, _spec(args, 2000), limits)
    if not math.isfinite(est.value):
        raise ConvergenceError("non-finite functional value", est)
    out.add("estimate.json", est.to_json() + "\n")
    out.add("estimate.csv", _csv([est.csv_row()], CSV_HEADER))
    print(f"{est.label}: F = {est.value:.9f}  (grid {est.spec.n1}x{est.spec.n2}, "
          f"discarded {est.discarded_fraction:.2e})")
    return EXIT_OK


def cmd_export_svg(args, out: Outputs) -> int:
    cav = resolve_shape(args)
    out.add("shape.svg", cavity_to_svg(cav))
    out.add("shape.json", cavity_to_json(cav) + "\n")
    print(f"exported {cav.label}")
    return EXIT_OK


def cmd_optimize(args, out: Outputs) -> int:
    if not args.family:
        raise InvalidParameterError("optimize needs --family")
    fam = canonical_family(args.family)
    m = int(args.m) if args.m is not None else None
    spec = _spec(args, 1000)
    kw = dict(quadrature=spec, limits=_limits(args))
    for key in ("budget", "seed", "restarts"):
        if getattr(args, key) is not None:
            kw[key] = int(getattr(args, key))
    if args.method is not None:
        kw["method"] = Method(args.method)
    if args.x0 is not None:
        kw["x0"] = [float(v) for v in args.x0]
    if fam == "piecewise-quadratic" and args.lower is None and args.upper is None:
        if m is None:
            raise InvalidParameterError("piecewise-quadratic needs --m")
        rep = optimize_piecewise_quadratic(m, **kw)
    else:
        lower, upper = args.lower, args.upper
        if lower is None or upper is None:
            lower, upper = default_bounds(fam, m)
        rep = optimize(OptimizationProblem(fam, lower, upper, m=m, **kw))
    if rep.best_value <= 0:
        raise ConvergenceError("no feasible shape found within the budget", rep)
    buf = io.StringIO()
    rep.write_history_csv(buf)
    out.add("report.json", rep.to_json() + "\n")
    out.add("history.csv", buf.getvalue())
    out.add("best.svg", cavity_to_svg(rep.best_cavity()))
    final = "" if rep.final_value is None else f", at 2x grid {rep.final_value:.9f}"
    print(f"{fam}: best F = {rep.best_value:.9f}{final} at {[round(p, 6) for p in rep.best_params]} "
          f"({rep.evaluations} evaluations)")
    return EXIT_OK


def cmd_sweep_psi(args, out: Outputs) -> int:
    n = int(args.points)
    if n < 2:
        raise InvalidParameterError("--points must be at least 2")
    grid = np.linspace(0.0, math.pi / 2, n)
    rows = [[_g(p), _g(F_psi(p))] for p in grid]
    out.add("sweep_psi.csv", _csv(rows, ["psi", "F_analytic"]))
    best = max(rows, key=lambda r: float(r[1]))
    print(f"{n} points; largest F_psi = {float(best[1]):.6f} at psi = {float(best[0]):.4f}")
    return EXIT_OK


def cmd_sweep_alpha(args, out: Outputs) -> int:
    n = int(args.points)
    if n < 1:
        raise InvalidParameterError("--points must be positive")
    grid = np.linspace(float(args.alpha_min), float(args.alpha_max), n)
    res = sweep_F_alpha(grid, _spec(args, 500), _limits(args))
    out.add("sweep_alpha.csv", _csv([[_g(a), _g(f)] for a, f in res], ["alpha", "F"]))
    a, f = max(res, key=lambda r: r[1])
    print(f"{n} points; largest F = {f:.6f} at alpha = {a:.4f}")
    return EXIT_OK


def cmd_zigzag_converge(args, out: Outputs) -> int:
    psi = float(args.psi) if args.psi is not None else PSI0
    spec = _spec(args, 1000)
    limits = _limits(args)
    fa = F_psi(psi)
    fp = evaluate_F_pseudo(psi, spec).value
    rows = []
    for m in args.m_list:
        fb = evaluate_F(make_canonical_zigzag(psi, int(m)), spec, limits).value
        rows.append([_g(psi), int(m), _g(fb), _g(fp), _g(fa)])
        print(f"m = {int(m):3d}: F = {fb:.6f}  (pseudo {fp:.6f}, analytic {fa:.6f})")
    out.add("zigzag_convergence.csv", _csv(rows, ["psi", "m", "F_billiard", "F_pseudo", "F_analytic"]))
    return EXIT_OK


def cmd_mushroom(args, out: Outputs) -> int:
    spec = _spec(args, 1000)
    limits = _limits(args)
    rows = []
    for eps in args.eps_list:
        stem, bound = mushroom_bound(eps)
        est = evaluate_F(make_mushroom(eps), spec, limits)
        rows.append([_g(eps), _g(stem), _g(bound), _g(est.value), _g(est.discarded_fraction)])
        print(f"eps = {eps:g}: F = {est.value:.6f}, lower bound {bound:.6f}")
    out.add("mushroom.csv", _csv(rows, ["eps", "stem_measure", "F_bound", "F_billiard", "discarded_fraction"]))
    return EXIT_OK


def cmd_reproduce(args, out: Outputs) -> int:
    seed = int(args.seed) if args.seed is not None else 0
    gates = run_suite(args.suite, progress=lambda g: print(g.row(), flush=True), seed=seed)
    table = format_table(gates)
    print(table.splitlines()[-1])
    out.add("gates.json", json.dumps([g.to_dict() for g in gates], indent=2) + "\n")
    out.add("gates.txt", table + "\n")
    return EXIT_OK if all(g.passed for g in gates) else EXIT_GATE


COMMANDS = {
    "eval": cmd_eval,
    "optimize": cmd_optimize,
    "sweep-psi": cmd_sweep_psi,
    "sweep-alpha": cmd_sweep_alpha,
    "zigzag-converge": cmd_zigzag_converge,
    "mushroom": cmd_mushroom,
    "reproduce": cmd_reproduce,
    "export-svg": cmd_export_svg,
}


def _floats(text: str) -> list[float]:
    return [float(v) for v in text.replace(",", " ").split()]


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", type=Path, default=None, help="output directory (default: maxdrag-out)")
    common.add_argument("--config", help="JSON or TOML run config; flags take precedence")
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--threads", type=int, default=None, help="worker threads (env MAXDRAG_THREADS)")
    common.add_argument("--n1", type=int, default=None, help="grid points in xi")
    common.add_argument("--n2", type=int, default=None, help="grid points in phi (default: n1)")
    common.add_argument("--max-reflections", type=int, default=None)
    common.add_argument("-v", "--verbose", action="count", default=0)

    shape = argparse.ArgumentParser(add_help=False)
    shape.add_argument("--family", help="shape family, e.g. two-segment-line or TwoSegmentLine")
    shape.add_argument("--shape-file", help="cavity JSON document")
    shape.add_argument("--params", type=_floats, default=None, help="raw parameter vector")
    shape.add_argument("--alpha", type=float)
    shape.add_argument("--beta", type=float)
    shape.add_argument("--psi", type=float)
    shape.add_argument("--eps", type=float)
    shape.add_argument("--height", type=float)
    shape.add_argument("--m", type=int)

    p = argparse.ArgumentParser(prog="maxdrag", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"maxdrag {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    e = sub.add_parser("eval", parents=[common, shape], help="evaluate F for one shape")
    e.add_argument("--target-se", type=float, default=None, help="adaptive grid doubling to this change")

    o = sub.add_parser("optimize", parents=[common, shape], help="maximise F over a family")
    o.add_argument("--lower", type=_floats, default=None)
    o.add_argument("--upper", type=_floats, default=None)
    o.add_argument("--x0", type=_floats, default=None)
    o.add_argument("--budget", type=int, default=None)
    o.add_argument("--restarts", type=int, default=None)
    o.add_argument("--method", choices=[mm.value for mm in Method], default=None)

    s = sub.add_parser("sweep-psi", parents=[common], help="tabulate the fine-zigzag limit F(psi)")
    s.add_argument("--points", type=int, default=181)

    a = sub.add_parser("sweep-alpha", parents=[common], help="F of symmetric two-segment lines vs slope")
    a.add_argument("--alpha-min", type=float, default=0.1)
    a.add_argument("--alpha-max", type=float, default=10.0)
    a.add_argument("--points", type=int, default=100)

    z = sub.add_parser("zigzag-converge", parents=[common], help="F of canonical zigzags as m grows")
    z.add_argument("--psi", type=float, default=None)
    z.add_argument("--m-list", type=lambda t: [int(v) for v in _floats(t)], default=[2, 4, 6, 10, 20, 50])

    mu = sub.add_parser("mushroom", parents=[common], help="mushroom cavities against their lower bound")
    mu.add_argument("--eps-list", type=_floats, default=[0.3, 0.1, 0.03, 0.01])

    r = sub.add_parser("reproduce", parents=[common], help="run the reproduction gates")
    r.add_argument("--suite", choices=["analytic", "numeric", "properties", "all"], default="all")

    sub.add_parser("export-svg", parents=[common, shape], help="write a shape as SVG and JSON")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2), format="%(levelname)s %(message)s")
    try:
        _merge_config(args)
        threads = _set_threads(args)
        config = {k: (str(v) if isinstance(v, Path) else v) for k, v in sorted(vars(args).items())
                  if v is not None and k not in ("verbose",)}
        config["threads"] = threads
        out = Outputs(args.out or Path("maxdrag-out"), args.command, config)
        code = COMMANDS[args.command](args, out)
        out.commit()
        return code
    except ConvergenceError as exc:
        log.error("evaluation failed: %s", exc)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_EVAL
    except (InvalidParameterError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SHAPE
    except (MaxdragError, ArithmeticError, FloatingPointError) as exc:
        print(f"error: evaluation failed: {exc}", file=sys.stderr)
        return EXIT_EVAL


if __name__ == "__main__":
    sys.exit(main())
