"""Batch command line: build, sample, analyze and solve from JSON configs.

Exit codes: 0 on success, 2 on schema or domain errors in the inputs, 3 when
a solve is infeasible or numerically singular.  Errors are reported as a
single JSON object on stderr.  All JSON reports carry a `meta` block echoing
the command and options that produced them.
"""

from __future__ import annotations

import argparse
import json
import os
import sys as _sys

import numpy as np

from . import __version__
from .calculus import moments, panel_quadrature, transform, transform_residual
from .errors import (
    CumulativeMismatch,
    DerivativeScaleViolation,
    FraclibError,
    SchemaError,
    SingularSystem,
    ZeroTotalArea,
)
from .evaluate import chaos_game, minkowski_dimension, sample_grid, self_residual, sup_bound
from .histopolation import (
    Histogram,
    areas,
    histospline,
    solve_continuous,
    solve_offsets,
    solve_scales,
)
from .serialize import (
    dataset_from_obj,
    dump_json,
    histogram_from_obj,
    load_json,
    pp_from_obj,
    solution_to_obj,
    system_from_obj,
    system_to_obj,
    variant_report_to_obj,
    write_points_csv,
    write_samples_csv,
)
from .system import ScaleFactors, build_affine_fif, build_interpolatory_discontinuous, validate

_SOLVER_ERRORS = (SingularSystem, ZeroTotalArea, DerivativeScaleViolation,
                  CumulativeMismatch)


def _float_list(text: str) -> list[float]:
    try:
        return [float(tok) for tok in text.split(",") if tok.strip() != ""]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated reals, got {text!r}") from exc


def _meta(command: str, args: argparse.Namespace) -> dict:
    options = {}
    for key, value in sorted(vars(args).items()):
        if key in ("func", "command") or value is None:
            continue
        options[key] = value
    return {"tool": "fraclib", "version": __version__,
            "command": command, "options": options}


def _write_json(obj, path: str):
    if path == "-":
        dump_json(obj, _sys.stdout)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            dump_json(obj, fh)


def _write_csv(writer, samples, path: str):
    if path == "-":
        writer(samples, _sys.stdout)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer(samples, fh)


def _figure_path(args) -> str | None:
    """--plot without a value derives <output stem>.svg."""
    if args.plot is None:
        return None
    if args.plot != "":
        return args.plot
    if args.output == "-":
        raise SchemaError("--plot needs an explicit path when output is stdout")
    return os.path.splitext(args.output)[0] + ".svg"


def _load_system(path: str):
    return system_from_obj(load_json(path))


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def _cmd_build(args) -> int:
    data = dataset_from_obj(load_json(args.data))
    scales = ScaleFactors(np.asarray(args.alpha))
    if args.free_slopes is not None:
        sys_ = build_interpolatory_discontinuous(data, scales, args.free_slopes)
    else:
        sys_ = build_affine_fif(data, scales)
    obj = system_to_obj(sys_, source="cli:build")
    obj["meta"].update(_meta("build", args))
    _write_json(obj, args.output)
    fig = _figure_path(args)
    if fig:
        from .plotting import plot_samples
        plot_samples(sample_grid(sys_, args.plot_depth), fig)
    return 0


def _cmd_eval(args) -> int:
    sys_ = _load_system(args.system)
    samples = sample_grid(sys_, args.depth)
    _write_csv(write_samples_csv, samples, args.output)
    fig = _figure_path(args)
    if fig:
        from .plotting import plot_samples
        plot_samples(samples, fig)
    return 0


def _cmd_chaos(args) -> int:
    sys_ = _load_system(args.system)
    samples = chaos_game(sys_, args.n, seed=args.seed, burn_in=args.burn_in)
    _write_csv(write_points_csv, samples, args.output)
    fig = _figure_path(args)
    if fig:
        from .plotting import plot_points
        plot_points(samples, fig)
    return 0


def _cmd_moments(args) -> int:
    sys_ = _load_system(args.system)
    table = moments(sys_, args.m_max)
    oracle_diff = None
    if args.oracle_depth is not None:
        integrands = [(lambda x, m=m: x ** m) for m in range(args.m_max + 1)]
        oracle = panel_quadrature(sys_, integrands, args.oracle_depth)
        oracle_diff = [abs(float(table.values[m]) - oracle[m].real)
                       for m in range(args.m_max + 1)]
    report = {
        "moments": [float(v) for v in table.values],
        "q_moments": [float(v) for v in table.q_moments],
        "method": table.method,
        "oracle_diff": oracle_diff,
        "meta": _meta("moments", args),
    }
    _write_json(report, args.output)
    return 0


def _cmd_transform(args) -> int:
    sys_ = _load_system(args.system)
    entries = []
    for s in args.s:
        value = transform(sys_, args.kind, s, method=args.method,
                          depth=args.depth, tol=args.series_tol)
        residual = None
        if not args.no_residual:
            residual = transform_residual(sys_, args.kind, s, depth=args.depth)
        entries.append({
            "s": s,
            "kind": args.kind,
            "value": [value.real, value.imag],
            "residual": residual,
        })
    report = {
        "kind": args.kind,
        "method": args.method,
        "entries": entries,
        "meta": _meta("transform", args),
    }
    _write_json(report, args.output)
    return 0


def _cmd_histo(args) -> int:
    hist = histogram_from_obj(load_json(args.hist))
    if args.mode == "scales":
        if args.shifts is None:
            raise SchemaError("--mode scales needs --shifts")
        shift_objs = load_json(args.shifts)
        if not isinstance(shift_objs, list):
            raise SchemaError("--shifts file must hold a JSON array of shift maps")
        sol = solve_scales(hist, [pp_from_obj(o) for o in shift_objs])
    elif args.mode == "offsets":
        if args.alpha is None or args.slopes is None:
            raise SchemaError("--mode offsets needs --alpha and --slopes")
        sol = solve_offsets(hist, ScaleFactors(np.asarray(args.alpha)),
                            np.asarray(args.slopes))
    elif args.mode == "continuous":
        if args.alpha is None:
            raise SchemaError("--mode continuous needs --alpha")
        sol = solve_continuous(hist, ScaleFactors(np.asarray(args.alpha)), args.y0)
    else:
        if args.spline is None:
            raise SchemaError("--mode spline needs --spline")
        sol = histospline(_load_system(args.spline), hist)
    report = solution_to_obj(sol, source=f"cli:histo:{args.mode}")
    report["meta"] = _meta("histo", args)
    _write_json(report, args.output)
    fig = _figure_path(args)
    if fig and sol.system is not None:
        from .plotting import plot_histopolation
        plot_histopolation(hist, sample_grid(sol.system, args.plot_depth), fig)
    if not sol.feasible:
        json.dump({"error": {"type": "InfeasibleSolution",
                             "message": "solved scale factors leave the "
                                        "admissible range; see the report"}},
                  _sys.stderr)
        _sys.stderr.write("\n")
        return 3
    return 0


def _cmd_dim(args) -> int:
    sys_ = _load_system(args.system)
    report = {
        "dimension": minkowski_dimension(sys_),
        "scale_sum": float(np.sum(np.abs(sys_.scales.alpha))),
        "formula_domain": "affine-fif",
        "meta": _meta("dim", args),
    }
    _write_json(report, args.output)
    return 0


def _cmd_verify(args) -> int:
    sys_ = _load_system(args.system)
    data = dataset_from_obj(load_json(args.data)) if args.data else None
    report = variant_report_to_obj(validate(sys_, tol=args.tol, data=data))
    report["self_residual"] = self_residual(sys_, args.depth)
    report["sup_bound"] = sup_bound(sys_)
    got = areas(sys_)
    report["areas"] = [float(v) for v in got]
    if args.hist:
        hist = histogram_from_obj(load_json(args.hist))
        if len(hist.frequencies) != sys_.n:
            raise SchemaError("histogram and system meshes differ in cell count")
        report["area_residuals"] = [float(v) for v in got - hist.targets]
    else:
        report["area_residuals"] = None
    report["meta"] = _meta("verify", args)
    _write_json(report, args.output)
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def _add_output(p: argparse.ArgumentParser, default="-"):
    p.add_argument("-o", "--output", default=default,
                   help="output path, or - for stdout")


def _add_plot(p: argparse.ArgumentParser):
    p.add_argument("--plot", nargs="?", const="", default=None, metavar="FIG",
                   help="also render a figure (SVG/PNG); without a value, "
                        "derives <output stem>.svg")
    p.add_argument("--plot-depth", type=int, default=10,
                   help="sampling depth used for figures (default 10)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fraclib",
        description="Self-affine fractal functions: construction, sampling, "
                    "calculus and histopolation.",
    )
    parser.add_argument("--version", action="version",
                        version=f"fraclib {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build", help="construct a system from interpolation data")
    p.add_argument("--data", required=True, help="data JSON with 'xs' and 'ys'")
    p.add_argument("--alpha", type=_float_list, required=True,
                   help="comma-separated scale factors")
    p.add_argument("--free-slopes", type=_float_list, default=None,
                   help="shift slopes; selects the discontinuous interpolant")
    _add_output(p)
    _add_plot(p)
    p.set_defaults(func=_cmd_build)

    p = sub.add_parser("eval", help="sample a system on its address grid")
    p.add_argument("--system", required=True)
    p.add_argument("--depth", type=int, required=True)
    _add_output(p)
    _add_plot(p)
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("chaos", help="render the graph closure by the chaos game")
    p.add_argument("--system", required=True)
    p.add_argument("--n", type=int, default=10_000, help="points to emit")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--burn-in", type=int, default=64)
    _add_output(p)
    _add_plot(p)
    p.set_defaults(func=_cmd_chaos)

    p = sub.add_parser("moments", help="closed-form moments, optionally checked "
                                       "against the quadrature oracle")
    p.add_argument("--system", required=True)
    p.add_argument("--m-max", type=int, default=6)
    p.add_argument("--oracle-depth", type=int, default=None)
    _add_output(p)
    p.set_defaults(func=_cmd_moments)

    p = sub.add_parser("transform", help="Laplace/Stieltjes/Fourier transform values")
    p.add_argument("--system", required=True)
    p.add_argument("--kind", required=True,
                   choices=["laplace", "stieltjes", "fourier"])
    p.add_argument("--s", type=_float_list, required=True,
                   help="comma-separated transform arguments")
    p.add_argument("--method", choices=["quadrature", "series"],
                   default="quadrature")
    p.add_argument("--depth", type=int, default=12)
    p.add_argument("--series-tol", type=float, default=1e-8)
    p.add_argument("--no-residual", action="store_true",
                   help="skip the functional-equation residual check")
    _add_output(p)
    p.set_defaults(func=_cmd_transform)

    p = sub.add_parser("histo", help="solve a histopolation problem")
    p.add_argument("--hist", required=True,
                   help="histogram JSON with 'knots' and 'frequencies'")
    p.add_argument("--mode", required=True,
                   choices=["scales", "offsets", "continuous", "spline"])
    p.add_argument("--shifts", default=None,
                   help="JSON array of shift maps (mode=scales)")
    p.add_argument("--alpha", type=_float_list, default=None,
                   help="scale factors (modes offsets/continuous)")
    p.add_argument("--slopes", type=_float_list, default=None,
                   help="shift slopes (mode=offsets)")
    p.add_argument("--y0", type=float, default=0.0,
                   help="left endpoint value (mode=continuous)")
    p.add_argument("--spline", default=None,
                   help="system JSON of the cumulative spline (mode=spline)")
    _add_output(p)
    _add_plot(p)
    p.set_defaults(func=_cmd_histo)

    p = sub.add_parser("dim", help="Minkowski dimension of the graph")
    p.add_argument("--system", required=True)
    _add_output(p)
    p.set_defaults(func=_cmd_dim)

    p = sub.add_parser("verify", help="classification, self-consistency and areas")
    p.add_argument("--system", required=True)
    p.add_argument("--data", default=None, help="data JSON to classify against")
    p.add_argument("--hist", default=None, help="histogram JSON for area residuals")
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--depth", type=int, default=10,
                   help="grid depth for the self-consistency residual")
    _add_output(p)
    p.set_defaults(func=_cmd_verify)

    return parser


def _error_obj(exc: Exception) -> dict:
    info = {"type": type(exc).__name__, "message": str(exc)}
    condition = getattr(exc, "condition", None)
    if condition is not None:
        info["condition"] = condition
    return {"error": info}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except _SOLVER_ERRORS as exc:
        json.dump(_error_obj(exc), _sys.stderr)
        _sys.stderr.write("\n")
        return 3
    except (FraclibError, ValueError) as exc:
        json.dump(_error_obj(exc), _sys.stderr)
        _sys.stderr.write("\n")
        return 2
    except OSError as exc:
        json.dump({"error": {"type": "IOError", "message": str(exc)}}, _sys.stderr)
        _sys.stderr.write("\n")
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
