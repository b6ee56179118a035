"""Command line frontend: ``pmch2r {phase,orbit,classify,surface,verify,reproduce}``.

Delimited output (CSV or JSON) goes to stdout; figures and meshes go to files
under ``--out``.  Exit codes: 0 success, 1 usage, 2 truncated or
inconclusive, 3 invariant failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
from pathlib import Path

from . import __version__
from . import classifier as C
from . import core, figures, plotting, verify
from .config import RunConfig, canonical_json
from .core import PhaseState, PrescribedFunction
from .integrator import (EventKind, HorizontalPlane, IntegrationError, OrbitState, integrate, integrate_axis,
                         reconstruct_profile)
from .surface import (HYPERBOLOID_TOL, ConstraintError, mean_curvature_residual, revolve, truncate_profile,
                      two_sided_profile, write_mesh)

log = logging.getLogger("pmch2r")

EXIT_OK, EXIT_USAGE, EXIT_INCONCLUSIVE, EXIT_INVARIANT = 0, 1, 2, 3
RESIDUAL_LIMIT = 1e-6
_ABSORBING = {EventKind.EQUILIBRIUM, EventKind.LINE, EventKind.AXIS}
_INTEGRATOR_FLAGS = {"smax": "s_max", "xmax": "x_max", "rtol": "rel_tol", "atol": "abs_tol"}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# ---------------------------------------------------------------- parsing helpers

def _sign(text: str) -> int:
    try:
        v = int(float(text))
    except ValueError:
        v = 0
    if v not in (1, -1):
        raise argparse.ArgumentTypeError(f"expected +1 or -1, got {text!r}")
    return v


def _floats(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma separated numbers, got {text!r}") from None


def _point(text: str):
    if text == "eq":
        return "eq"
    parts = text.split(",")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"expected x,y,+-1 or 'eq', got {text!r}")
    x, y = _floats(",".join(parts[:2]))
    return [x, y, _sign(parts[2])]


def _add_function(p):
    g = p.add_argument_group("prescribed function")
    g.add_argument("--lambda", dest="lam", type=float, help="h(y) = a*y + lambda")
    g.add_argument("--a", type=float, default=None, help="slope of the linear law (default 1)")
    g.add_argument("--h0", type=float, help="constant law h = h0")
    g.add_argument("--poly", type=_floats, help="polynomial coefficients c0,c1,... (ascending)")
    g.add_argument("--config", type=Path, help="JSON run config; explicit flags override it")


def _add_integrator(p):
    g = p.add_argument_group("integrator")
    g.add_argument("--smax", type=float, help="arc-length budget")
    g.add_argument("--xmax", type=float, help="truncate beyond this distance to the axis")
    g.add_argument("--rtol", type=float, help="relative tolerance")
    g.add_argument("--atol", type=float, help="absolute tolerance")


def _add_start(p, required=True):
    g = p.add_mutually_exclusive_group(required=required)
    g.add_argument("--axis", type=_sign, help="start on the axis with angle function +1 or -1")
    g.add_argument("--point", type=_point, help="start at x,y,eps or at the equilibrium ('eq')")
    p.add_argument("--direction", type=_sign, default=None, help="integrate forward (+1) or backward (-1)")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="pmch2r", description="Rotational prescribed mean curvature surfaces in H^2 x R.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    ph = sub.add_parser("phase", help="nullcline samples (CSV) and a phase portrait (SVG)")
    _add_function(ph)
    _add_integrator(ph)
    ph.add_argument("--eps", type=_sign, default=1, help="phase plane sign")
    ph.add_argument("--xcap", type=float, default=3.0, help="right edge of the plot")
    ph.add_argument("--seeds", type=int, default=0, help="orbits seeded on y = 0, both directions")
    ph.add_argument("--out", type=Path, help="directory for phase.svg")
    ph.add_argument("--format", choices=("csv", "json", "svg"), default="csv")

    ob = sub.add_parser("orbit", help="integrate one orbit; samples as CSV, events as JSON")
    _add_function(ob)
    _add_integrator(ob)
    _add_start(ob, required=False)
    ob.add_argument("--out", type=Path, help="directory for orbit.csv and events.json")
    ob.add_argument("--format", choices=("csv", "json"), default="csv")

    cl = sub.add_parser("classify", help="surface class records for a lambda sweep (JSON)")
    cl.add_argument("--lambda", dest="lams", type=_floats, required=True, help="comma separated lambda values")
    _add_integrator(cl)
    _add_start(cl)
    cl.add_argument("--out", type=Path, help="directory for classify.json")
    cl.add_argument("--format", choices=("json", "csv"), default="json")

    sf = sub.add_parser("surface", help="revolve an orbit into a mesh; prints the curvature residual")
    _add_function(sf)
    _add_integrator(sf)
    _add_start(sf, required=False)
    sf.add_argument("--ntheta", type=int, default=48, help="angular resolution")
    sf.add_argument("--xcap", type=float, default=None, help="cut the profile at this distance to the axis")
    sf.add_argument("--out", type=Path, default=Path("."), help="directory for surface.obj / surface.csv")
    sf.add_argument("--format", choices=("obj", "csv"), default="obj")

    vf = sub.add_parser("verify", help="run the invariant suites")
    lv = vf.add_mutually_exclusive_group()
    lv.add_argument("--quick", action="store_true", help="closed-form and counting checks only")
    lv.add_argument("--deep", action="store_true", help="double the budgets of trend certificates")
    _add_integrator(vf)
    vf.add_argument("--format", choices=("csv", "json"), default="csv")

    rp = sub.add_parser("reproduce", help="regenerate figures 1..9 (SVG, OBJ and JSON sidecars)")
    rp.add_argument("figures", nargs="+", help="figure ids 1..9 or 'all'")
    _add_integrator(rp)
    rp.add_argument("--out", type=Path, default=Path("figures"), help="output directory")
    rp.add_argument("--format", choices=("csv", "json"), default="csv")
    return p


# ---------------------------------------------------------------- config assembly

def _run_config(args) -> RunConfig:
    base = {}
    if getattr(args, "config", None) is not None:
        try:
            text = args.config.read_text()
        except OSError as exc:
            raise UsageError(f"cannot read config {args.config}: {exc.strerror}") from exc
        try:
            base = RunConfig.from_json(text).to_dict()
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
    fn = _function_from_flags(args)
    if fn is not None:
        base["function"] = fn.to_dict()
    if "function" not in base:
        raise UsageError("a prescribed function is required: --lambda, --h0, --poly or --config")
    integ = dict(base.get("integrator", {}))
    for flag, name in _INTEGRATOR_FLAGS.items():
        v = getattr(args, flag, None)
        if v is not None:
            integ[name] = v
    base["integrator"] = integ
    start = _start_from_flags(args)
    if start is not None:
        base["start"] = start
    if getattr(args, "direction", None) is not None:
        base["direction"] = args.direction
    try:
        rc = RunConfig.from_dict(base)
        rc.integrator_config
    except (ValueError, TypeError, KeyError) as exc:
        raise UsageError(f"invalid configuration: {exc}") from exc
    return rc


def _function_from_flags(args):
    given = [k for k in ("lam", "h0", "poly") if getattr(args, k, None) is not None]
    if len(given) > 1:
        raise UsageError("use only one of --lambda, --h0, --poly")
    if args.a is not None and getattr(args, "lam", None) is None:
        raise UsageError("--a needs --lambda")
    if getattr(args, "lam", None) is not None:
        return PrescribedFunction.linear(1.0 if args.a is None else args.a, args.lam)
    if getattr(args, "h0", None) is not None:
        return PrescribedFunction.constant(args.h0)
    if getattr(args, "poly", None) is not None:
        if not args.poly:
            raise UsageError("--poly needs at least one coefficient")
        return PrescribedFunction.polynomial(args.poly)
    return None


def _start_from_flags(args):
    if getattr(args, "axis", None) is not None:
        return {"axis": args.axis}
    pt = getattr(args, "point", None)
    if pt == "eq":
        return {"equilibrium": 1}
    if pt is not None:
        return {"point": pt}
    return None


def _integrator_only(args):
    integ = {name: getattr(args, flag) for flag, name in _INTEGRATOR_FLAGS.items() if getattr(args, flag, None) is not None}
    try:
        return RunConfig({"kind": "constant", "h0": 0.0}, integ).integrator_config
    except ValueError as exc:
        raise UsageError(f"invalid configuration: {exc}") from exc


def _phase_start(rc: RunConfig) -> OrbitState:
    start = rc.start
    if "equilibrium" in start:
        eq = core.equilibrium(rc.prescribed, start["equilibrium"])
        if eq is None:
            raise UsageError("this prescribed function has no equilibrium in Theta_+1")
        return OrbitState.from_phase(eq.x0, 0.0, eq.epsilon)
    x, y, eps = start["point"]
    try:
        return OrbitState.from_phase(x, y, eps)
    except core.DomainError as exc:
        raise UsageError(str(exc)) from exc


def _emit_csv(rows, header, out=None):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    text = buf.getvalue()
    sys.stdout.write(text)
    if out is not None:
        out.write_text(text)


def _emit_json(obj, out=None):
    text = json.dumps(obj, indent=2, sort_keys=True) + "\n"
    sys.stdout.write(text)
    if out is not None:
        out.write_text(text)


def _outdir(path: Path | None) -> Path | None:
    if path is not None:
        path.mkdir(parents=True, exist_ok=True)
    return path


# ---------------------------------------------------------------- commands

def cmd_phase(args) -> int:
    rc = _run_config(args)
    f, eps, cfg = rc.prescribed, args.eps, rc.integrator_config
    pieces = plotting.gamma_components(f, eps, x_cap=args.xcap)
    orbits = []
    eq = core.equilibrium(f, eps)
    x_lo = 0.1 * args.xcap
    for k in range(args.seeds):
        x = x_lo + (args.xcap - x_lo) * (k + 0.5) / args.seeds
        if eq is not None and abs(x - eq.x0) < 1e-9:
            continue
        for d in (1, -1):
            orbits.append((integrate(f, OrbitState.from_phase(x, 0.0, eps), d, cfg), "tab:blue", None))
    out = _outdir(args.out)
    if out is not None or args.format == "svg":
        fig, (ax,) = plotting.new_figure(1, 0, width=5.0)
        plotting.draw_phase_plane(ax, f, eps, args.xcap, orbits)
        meta = RunConfig(rc.function, rc.integrator, extra={"eps": eps, "xcap": args.xcap, "seeds": args.seeds})
        path = plotting.save_svg(fig, (out or Path(".")) / "phase.svg", meta.to_json())
        log.info("wrote %s", path)
    summary = {"components": len(plotting.gamma_components(f, eps)),
               "asymptotes": [r for r in C.escape_roots(f, eps) if abs(r) < 1.0],
               "equilibrium": None if eq is None else {"x0": eq.x0, "stability": eq.stability.value}}
    if args.format == "json":
        _emit_json({"config": rc.to_dict(), "epsilon": eps, **summary,
                    "gamma": [p.tolist() for p in pieces]})
    else:
        rows = [(i, repr(float(x)), repr(float(y))) for i, p in enumerate(pieces) for x, y in p]
        _emit_csv(rows, ("component", "x", "y"))
    return EXIT_OK


def _run_orbit(rc: RunConfig):
    f, cfg = rc.prescribed, rc.integrator_config
    if rc.start is None:
        raise UsageError("a start is required: --axis or --point")
    if "axis" in rc.start:
        return integrate_axis(f, rc.start["axis"], cfg)
    return integrate(f, _phase_start(rc), rc.direction or 1, cfg)


def cmd_orbit(args) -> int:
    rc = _run_config(args)
    try:
        orbit = _run_orbit(rc)
    except HorizontalPlane as hp:
        _emit_json({"config": rc.to_dict(), "degenerate": "HorizontalPlane", "delta": hp.delta,
                    "curvatures": {"kappa1": 0.0, "kappa2": 0.0}})
        return EXIT_OK
    fate = C.classify_orbit_fate(orbit, core.equilibrium(orbit.f, 1))
    out = _outdir(args.out)
    if out is not None:
        (out / "orbit.csv").write_text(orbit.to_csv())
        (out / "events.json").write_text(orbit.events_json() + "\n")
    if args.format == "json":
        _emit_json({"config": rc.to_dict(), "events": [e.to_dict() for e in orbit.events], "fate": fate.to_dict()})
    else:
        sys.stdout.write(orbit.to_csv())
    return EXIT_OK if orbit.terminal.kind in _ABSORBING else EXIT_INCONCLUSIVE


def cmd_classify(args) -> int:
    cfg = _integrator_only(args)
    start = _start_from_flags(args)
    records, status = [], EXIT_OK
    for lam in args.lams:
        ctx = {"lambda": lam, "start": start}
        try:
            if "axis" in start:
                sc = C.classify_axis_surface(lam, start["axis"], cfg)
            else:
                if start.get("equilibrium"):
                    eq = core.equilibrium(core.linear_law(lam), 1)
                    if eq is None:
                        raise UsageError(f"lambda={lam} has no equilibrium")
                    st = PhaseState(eq.x0, 0.0, 1)
                else:
                    st = PhaseState(*start["point"])
                sc = C.classify_off_axis_surface(lam, st, cfg)
            records.append(sc.to_dict(**ctx))
        except C.ClassificationMismatch as exc:
            records.append({**ctx, "class": None, "error": f"mismatch: {exc}"})
            status = max(status, EXIT_INVARIANT)
        except (C.InconsistentFate, IntegrationError) as exc:
            records.append({**ctx, "class": None, "error": f"inconclusive: {exc}"})
            status = max(status, EXIT_INCONCLUSIVE)
    out = _outdir(args.out)
    if args.format == "csv":
        rows = [(r["lambda"], canonical_json(r["start"]), r.get("class"), r.get("theoremItem", ""))
                for r in records]
        _emit_csv(rows, ("lambda", "start", "class", "theoremItem"), None if out is None else out / "classify.csv")
    else:
        _emit_json(records, None if out is None else out / "classify.json")
    return status


def cmd_surface(args) -> int:
    rc = _run_config(args)
    if args.ntheta < 3:
        raise UsageError("--ntheta must be at least 3")
    try:
        if "axis" in (rc.start or {}):
            orbit = _run_orbit(rc)
            profile, f, halves = reconstruct_profile(orbit), orbit.f, None
            truncated = orbit.terminal.kind is EventKind.TRUNCATED
        else:
            st = _phase_start(RunConfig(rc.function, rc.integrator, rc.start or {}))
            cfg = rc.integrator_config
            fw = integrate(rc.prescribed, st, 1, cfg)
            bw = integrate(rc.prescribed, st, -1, cfg)
            halves = reconstruct_profile(bw), reconstruct_profile(fw)
            profile, f = two_sided_profile(*halves), fw.f
            truncated = fw.terminal.kind is EventKind.TRUNCATED and bw.terminal.kind is EventKind.TRUNCATED
    except HorizontalPlane as hp:
        raise UsageError(f"{hp}; nothing to revolve") from None
    residual = mean_curvature_residual(profile, f)
    if args.xcap is not None:
        profile = two_sided_profile(*halves, args.xcap) if halves else truncate_profile(profile, args.xcap)
    out = _outdir(args.out)
    status = EXIT_OK
    try:
        mesh = revolve(profile, args.ntheta)
        defect = mesh.hyperboloid_defect()
        path = write_mesh(mesh, out / f"surface.{args.format}", args.format)
    except ConstraintError as exc:
        log.error("%s", exc)
        return EXIT_INVARIANT
    if residual >= RESIDUAL_LIMIT or defect > HYPERBOLOID_TOL:
        status = EXIT_INVARIANT
    rows = [("file", str(path)), ("samples", mesh.ns), ("ntheta", mesh.n_theta),
            ("mean_curvature_residual", f"{residual:.3e}"), ("hyperboloid_defect", f"{defect:.3e}"),
            ("truncated", str(truncated).lower())]
    _emit_csv(rows, ("key", "value"))
    return status


def cmd_verify(args) -> int:
    level = "quick" if args.quick else "deep" if args.deep else "default"
    results = verify.run_suite(level, _integrator_only(args))
    if args.format == "json":
        _emit_json([{"check": r.name, "passed": r.passed, "detail": r.detail, "seconds": round(r.seconds, 3)}
                    for r in results])
    else:
        _emit_csv([r.row() for r in results], ("check", "status", "detail", "seconds"))
    return EXIT_OK if all(r.passed for r in results) else EXIT_INVARIANT


def cmd_reproduce(args) -> int:
    ids = []
    for tok in args.figures:
        if tok == "all":
            ids.extend(figures.RECIPES)
            continue
        try:
            ids.append(int(tok))
        except ValueError:
            raise UsageError(f"unknown figure id {tok!r}") from None
    for i in ids:
        if i not in figures.RECIPES:
            raise UsageError(f"unknown figure id {i}; expected 1..{max(figures.RECIPES)}")
    cfg = _integrator_only(args)
    results = [figures.reproduce(i, args.out, cfg) for i in ids]
    if args.format == "json":
        _emit_json([r.metadata() for r in results])
    else:
        _emit_csv([(r.figure, k, v) for r in results for k, v in r.rows()], ("figure", "key", "value"))
    return EXIT_OK


COMMANDS = {"phase": cmd_phase, "orbit": cmd_orbit, "classify": cmd_classify, "surface": cmd_surface,
            "verify": cmd_verify, "reproduce": cmd_reproduce}


def _setup_logging() -> None:
    level = os.environ.get("PMC_LOG", "error").lower()
    levels = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}
    if level not in levels:
        raise UsageError(f"PMC_LOG must be one of {sorted(levels)}, got {level!r}")
    logging.basicConfig(level=levels[level], stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")


_VALUE_FLAGS = {"--poly", "--point", "--lambda", "--a", "--h0", "--axis", "--eps", "--direction"}


def _glue_negative_values(argv: list[str]) -> list[str]:
    """``--poly -1,0,1`` would read ``-1,0,1`` as an option; rewrite it as ``--poly=-1,0,1``."""
    out, i = [], 0
    while i < len(argv):
        tok = argv[i]
        if tok in _VALUE_FLAGS and i + 1 < len(argv) and argv[i + 1].startswith("-") and argv[i + 1][1:2] not in ("-", ""):
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
            continue
        out.append(tok)
        i += 1
    return out


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    argv = _glue_negative_values(list(sys.argv[1:] if argv is None else argv))
    try:
        _setup_logging()
        try:
            args = parser.parse_args(argv)
        except SystemExit as exc:
            # --help and --version exit with 0, parse errors with EXIT_USAGE
            return int(exc.code or 0)
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"pmch2r: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except core.DomainError as exc:
        print(f"pmch2r: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except BrokenPipeError:
        # reader went away (e.g. piped into head); silence the flush at exit
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        return EXIT_OK
    except OSError as exc:
        print(f"pmch2r: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
