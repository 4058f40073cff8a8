"""Command line entry point: ``degspin {verify,tensors,lift,solve}``.

Exit codes: 0 success, 1 verification or computation failure, 2 usage or
configuration error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
import warnings

import numpy as np

from . import newton_cartan as nc
from .config import load_config
from .errors import ConfigError, DegSpinError, InvalidInputError
from .flat import GaussianFamily, planewave_check, reduce_check
from .solver import MODES, RunReport, SolveConfig, evolve_wavepacket
from .spinor import lift_connection

log = logging.getLogger("degspin")


def _floats(n):
    def parse(text):
        try:
            vals = tuple(float(v) for v in text.split(","))
        except ValueError:
            raise argparse.ArgumentTypeError(f"expected {n} comma-separated numbers, got {text!r}") from None
        if len(vals) != n:
            raise argparse.ArgumentTypeError(f"expected {n} comma-separated numbers, got {len(vals)}")
        return vals

    return parse


def _complex_pair(text):
    try:
        vals = tuple(complex(v.replace(" ", "")) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected two comma-separated complex numbers, got {text!r}") from None
    if len(vals) != 2 or not any(vals):
        raise argparse.ArgumentTypeError("spinor needs two entries, not both zero")
    return vals


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", default=argparse.SUPPRESS,
                        help="machine-readable output")
    parser = argparse.ArgumentParser(prog="degspin", parents=[common],
                                     description="Degenerate Clifford algebra, Newton-Cartan and Levy-Leblond tools")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", parents=[common], help="run every invariant suite")
    p.add_argument("--suite", action="append", help="run only this suite (repeatable)")

    for name, text in (("tensors", "metric data and adapted frame at a point"),
                       ("lift", "connection form and lifted spinor connection at a point")):
        p = sub.add_parser(name, parents=[common], help=text)
        p.add_argument("--config", required=True, help="manifold config (YAML)")
        p.add_argument("--point", type=_floats(4), default=None, metavar="T,X,Y,Z",
                       help="evaluation point (default: origin, or first interior node of a sampled grid); "
                            "write --point=-1,0,0,0 for negative leading values")
        p.add_argument("--fd-step", type=float, default=None, help="finite-difference half-width")
        if name == "lift":
            p.add_argument("--so-tol", type=float, default=1e-6,
                           help="tolerance for components outside so(1,0,3) (default 1e-6)")

    d = SolveConfig()
    p = sub.add_parser("solve", parents=[common], help="flat Levy-Leblond checks and the 1D Schrodinger solver")
    p.add_argument("--mode", choices=MODES, default=d.mode)
    p.add_argument("--mass", type=float, default=d.mass)
    p.add_argument("--k", type=_floats(3), default=d.k, metavar="KX,KY,KZ", help="plane-wave momentum")
    p.add_argument("--energy", type=float, default=None, help="override the plane-wave energy")
    p.add_argument("--spinor", type=_complex_pair, default=d.spinor, metavar="U0,U1",
                   help="constant lower 2-spinor, e.g. 1,0 or 1,1j")
    p.add_argument("--grid-points", type=int, default=d.grid_points)
    p.add_argument("--dx", type=float, default=d.dx)
    p.add_argument("--dt", type=float, default=d.dt)
    p.add_argument("--steps", type=int, default=d.steps)
    p.add_argument("--sigma0", type=float, default=d.sigma0)
    p.add_argument("--k0", type=float, default=d.k0)
    p.add_argument("--x0", type=float, default=d.x0)
    p.add_argument("--save-every", type=int, default=d.save_every)
    p.add_argument("--static", action="store_true", help="reduce-check: freeze the Gaussian (not a solution)")
    p.add_argument("--output", default="trajectory.csv", help="trajectory CSV (wavepacket mode)")
    p.add_argument("--report", default=None, help="also write the run report as JSON to this file")
    return parser


# --------------------------------------------------------------------------
# output helpers


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        if np.iscomplexobj(obj):
            return {"re": obj.real.tolist(), "im": obj.imag.tolist()}
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    return obj


def _fmt_matrix(m) -> str:
    m = np.asarray(m)
    if np.iscomplexobj(m) and not np.any(m.imag):
        m = m.real
    return np.array2string(m + 0.0, precision=6, suppress_small=True, max_line_width=120)


def _emit(doc: dict, as_json: bool, out=None):
    out = out or sys.stdout
    if as_json:
        json.dump(_jsonable(doc), out, indent=2)
        out.write("\n")
        return
    _emit_mapping(doc, 0, out)


def _emit_mapping(doc: dict, depth: int, out):
    pad = "  " * depth
    for key, val in doc.items():
        if isinstance(val, dict):
            out.write(f"{pad}{key}:\n")
            _emit_mapping(val, depth + 1, out)
        elif isinstance(val, np.ndarray) and val.ndim >= 2:
            inner = pad + "  "
            out.write(f"{pad}{key}:\n{inner}" + _fmt_matrix(val).replace("\n", "\n" + inner) + "\n")
        elif isinstance(val, np.ndarray):
            out.write(f"{pad}{key}: {_fmt_matrix(val)}\n")
        elif isinstance(val, float):
            out.write(f"{pad}{key}: {val:.6g}\n")
        else:
            out.write(f"{pad}{key}: {val}\n")


# --------------------------------------------------------------------------
# commands


def cmd_verify(args) -> int:
    from .verify import SUITES, run_all

    names = args.suite or list(SUITES)
    unknown = [n for n in names if n not in SUITES]
    if unknown:
        print(f"error: unknown suite(s) {', '.join(unknown)}; choose from {', '.join(SUITES)}", file=sys.stderr)
        return 2
    results = run_all(names)
    if args.json:
        _emit({"suites": [r.as_dict() for r in results], "passed": all(r.passed for r in results)}, True)
    else:
        print(f"{'suite':<16}{'result':<8}{'time [s]':>10}  detail")
        for r in results:
            detail = r.error or (", ".join(r.failed()) if r.failed() else f"{len(r.checks)} checks")
            print(f"{r.name:<16}{'PASS' if r.passed else 'FAIL':<8}{r.seconds:>10.3f}  {detail}")
    return 0 if all(r.passed for r in results) else 1


class UsageError(Exception):
    pass


def _point(field, args) -> np.ndarray:
    """Requested point, or a default; off-grid points of sampled fields are usage errors."""
    if args.point is not None:
        point = np.asarray(args.point)
        if isinstance(field, nc.SampledField):
            try:
                field.index_of(point)
            except InvalidInputError as exc:
                raise UsageError(str(exc)) from None
        return point
    if isinstance(field, nc.SampledField):
        try:
            return field.node(field.interior_indices()[0])
        except DegSpinError:
            return field.origin.copy()
    return np.zeros(4)


def cmd_tensors(args) -> int:
    field = load_config(args.config)
    point = _point(field, args)
    data = field.at(point)
    report = nc.validate(data)
    doc = {"preset": field.kind, "point": point, "validation": report.as_dict()}
    if not args.json:
        doc["validation"] = {
            c.name: f"{'pass' if c.passed else 'FAIL'}  residual {c.residual:.3g}" + (f"  ({c.detail})" if c.detail else "")
            for c in report.checks
        }
        doc["validation"]["torsion"] = report.torsion
    if not report.ok:
        _emit(doc, args.json)
        print(f"error: point data invalid: {', '.join(report.failed())}", file=sys.stderr)
        return 1
    gb = nc.gbar(data.g, data.tau)
    hb = nc.hbar(gb)
    h = nc.hfield(data.V, hb, data.g, data.tau)
    frame = nc.adapted_frame(data)
    doc.update({
        "gbar": gb,
        "hbar": hb,
        "h": h,
        "frame_X": frame.X,
        "coframe_e": frame.e,
        "frame_seed": list(frame.seed),
        "diagnostics": {
            "hbar_gbar_residual": float(np.max(np.abs(hb @ gb - np.eye(4)))),
            "h_g_residual": nc.hfield_identity_residual(h, data.g, data.V, data.tau),
            **{f"frame_{k}": v for k, v in frame.residuals(data).items()},
        },
    })
    try:
        comp = nc.compatibility_check(field, args.fd_step, points=[point])
        doc["compatibility"] = comp.as_dict()
    except DegSpinError as exc:
        doc["compatibility"] = {"skipped": str(exc)}
    _emit(doc, args.json)
    return 0


def cmd_lift(args) -> int:
    field = load_config(args.config)
    point = _point(field, args)
    gam = nc.frame_christoffels(field, point, fd_step=args.fd_step)
    form = nc.connection_form(gam, tol=args.so_tol)
    lifted = lift_connection(form)
    doc = {
        "preset": field.kind,
        "point": point,
        "connection_form": {
            f"X{c}": {"boost": form.boost[c], "rotation": form.rotation[c]} for c in range(4)
        },
        "omega": {f"X{c}": form.matrix(c) for c in range(4)},
        "lifted": {f"X{c}": lifted.matrices[c] for c in range(4)},
        "span_residual": lifted.span_residual(),
    }
    if args.json:
        doc["connection_form"] = form.as_dict()
    _emit(doc, args.json)
    return 0


def _solve_config(args) -> SolveConfig:
    return SolveConfig(
        mass=args.mass, grid_points=args.grid_points, dx=args.dx, dt=args.dt, steps=args.steps,
        sigma0=args.sigma0, k0=args.k0, x0=args.x0, mode=args.mode, k=args.k, spinor=args.spinor,
        save_every=args.save_every,
    )


def cmd_solve(args) -> int:
    cfg = _solve_config(args)
    try:
        cfg.validate()
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    start = time.perf_counter()
    if cfg.mode == "planewave":
        r = planewave_check(cfg.k, cfg.mass, cfg.spinor, energy=args.energy)
        report = RunReport("planewave", r, r, None, None, None, 0.0,
                           extra={"k": list(cfg.k), "energy": args.energy})
    elif cfg.mode == "reduce-check":
        fam = GaussianFamily(cfg.mass, (cfg.sigma0,) * 3, (cfg.k0, 0.0, 0.0), (cfg.x0, 0.0, 0.0),
                             cfg.spinor, static=args.static)
        t = np.linspace(0.0, cfg.steps * cfg.dt, 5)
        x = cfg.x0 + np.linspace(-3, 3, 13) * cfg.sigma0
        pts = np.array([(ti, xi, yi, 0.0) for ti in t for xi in x for yi in (-0.5, 0.0, 0.5)])
        res = reduce_check(fam, cfg.mass, pts)
        report = RunReport("reduce-check", res.ll_residual, res.ll_rms, None, None, None, 0.0,
                           extra=res.as_dict())
        if not res.consistent:
            report.wall_time = time.perf_counter() - start
            _emit(report.as_dict(), args.json)
            print("error: LL and Schrodinger residuals disagree", file=sys.stderr)
            return 1
    else:
        report, _ = evolve_wavepacket(cfg, output=args.output)
    report.wall_time = time.perf_counter() - start
    if args.report:
        with open(args.report, "w") as fh:
            json.dump(_jsonable(report.as_dict()), fh, indent=2)
    _emit(report.as_dict(), args.json)
    return 0


COMMANDS = {"verify": cmd_verify, "tensors": cmd_tensors, "lift": cmd_lift, "solve": cmd_solve}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse exits 2 on usage errors, 0 on --help
        return int(exc.code or 0)
    if not hasattr(args, "json"):
        args.json = False
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    logging.captureWarnings(True)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"error: config {exc}", file=sys.stderr)
        return 2
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except DegSpinError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
