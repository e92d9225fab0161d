"""Command-line driver: ``layerdiff solve|converge|compare|preset-dump``.

Exit codes: 0 success, 1 comparison verdict failed or output not writable,
2 invalid input, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__, kernels, presets, studies
from .assembly import Solver, layer_grid
from .classical import MAX_LAYERS
from .config import ConfigError, RunConfig, dumps, load, to_dict
from .model import ValidationError, UnsupportedFeatureError, reaction_substitution_wrap, validate

EXIT_OK, EXIT_FAIL, EXIT_INVALID, EXIT_NUMERICAL = 0, 1, 2, 3


class UsageError(ValueError):
    pass


def _fmt(v):
    return format(float(v), ".17g")


def _float_list(text):
    try:
        return [float(v) for v in text.replace(" ", "").split(",") if v]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _int_list(text):
    try:
        return [int(v) for v in text.replace(" ", "").split(",") if v]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


# --------------------------------------------------------------------------
# run configuration
# --------------------------------------------------------------------------

def _resolve(args) -> tuple[RunConfig, str | None]:
    if (args.config is None) == (args.preset is None):
        raise UsageError("give exactly one of --config or --preset")
    if args.preset is not None:
        try:
            cfg = presets.preset(args.preset)
        except KeyError as exc:
            raise UsageError(exc.args[0]) from None
        return cfg, args.preset
    try:
        return load(args.config), None
    except OSError as exc:
        raise UsageError(f"cannot read config {args.config}: {exc.strerror}") from None


def _times(args, cfg):
    times = args.times if args.times is not None else cfg.times
    if not times:
        raise UsageError("no output times: pass --times or set 'times' in the config")
    times = np.asarray(times, dtype=float)
    if np.any(times < 0) or not np.all(np.isfinite(times)):
        raise UsageError("times must be finite and non-negative")
    return times


def _settings(args, cfg):
    N = args.eigenvalues if args.eigenvalues is not None else cfg.N
    Np = args.inversion_order if args.inversion_order is not None else cfg.Np
    if N < 1:
        raise UsageError("--eigenvalues must be positive")
    return N, Np


class _Output:
    """CSV destination (file or stdout) plus the manifest written next to it."""

    def __init__(self, out):
        self.path = None if out in (None, "-") else Path(out)

    def manifest_path(self):
        return None if self.path is None else self.path.with_name(self.path.name + ".manifest.json")

    def write(self, header, rows, manifest):
        if self.path is None:
            fh = sys.stdout
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            w.writerows(rows)
            return
        with open(self.path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            w.writerows(rows)
        manifest = dict(manifest, outputs={"csv": str(self.path),
                                           "manifest": str(self.manifest_path())})
        with open(self.manifest_path(), "w", encoding="utf-8") as fh:
            json.dump(manifest, fh, indent=2, sort_keys=True, allow_nan=True)
            fh.write("\n")


def _manifest(command, cfg, preset, **extra):
    return {"command": command, "preset": preset, "version": __version__,
            "backend": kernels.BACKEND, "problem": to_dict(cfg), **extra}


# --------------------------------------------------------------------------
# subcommands
# --------------------------------------------------------------------------

def cmd_solve(args):
    cfg, preset = _resolve(args)
    times = _times(args, cfg)
    N, Np = _settings(args, cfg)
    ppl = args.points_per_layer or cfg.points_per_layer
    problem = validate(cfg.spec)
    x = layer_grid(problem, ppl)
    field = Solver(problem, N, Np).evaluate(x, times)
    u = list(field.u)
    if cfg.reaction_rate is not None:
        wrap = reaction_substitution_wrap(cfg.spec, cfg.reaction_rate)
        u = [wrap.rescale(ui, times) for ui in u]
    header = ["layer", "x", "t", "u"]
    factors = None
    if cfg.derived is not None:
        header.append(cfg.derived["name"])
        factors = cfg.derived["layer_factors"]
    rows = []
    for k, t in enumerate(times):
        for i in range(problem.m):
            for j, xj in enumerate(x[i]):
                row = [str(i + 1), _fmt(xj), _fmt(t), _fmt(u[i][k, j])]
                if factors is not None:
                    row.append(_fmt(u[i][k, j] * factors[i]))
                rows.append(row)
    manifest = _manifest("solve", cfg, preset, solver={"N": N, "Np": Np},
                         grid={"points_per_layer": ppl, "times": [float(t) for t in times]},
                         rescaled_by_reaction=cfg.reaction_rate is not None)
    _Output(args.out).write(header, rows, manifest)
    return EXIT_OK


def _check_classical(problem):
    if not problem.constant_boundaries:
        raise UsageError("the classical reference needs time-independent boundary data "
                         "(its steady state and eigen-expansion assume fixed g0, gm); "
                         "use --reference fdm")
    if problem.m > MAX_LAYERS:
        raise UsageError(f"the classical reference is limited to {MAX_LAYERS} layers; "
                         "use --reference fdm")
    if problem.left.is_neumann and problem.right.is_neumann:
        raise UsageError("the classical reference needs a unique steady state; "
                         "both ends are Neumann; use --reference fdm")


def cmd_converge(args):
    cfg, preset = _resolve(args)
    times = _times(args, cfg)
    _, Np = _settings(args, cfg)
    problem = validate(cfg.spec)
    if args.reference == "classical":
        _check_classical(problem)
    table = studies.convergence_study(problem, args.ns, times, reference=args.reference,
                                      divisions=args.divisions, Np=Np, window=args.window)
    with_slope = len(args.ns) > 1
    header = ["t", "N", "epsilon"] + (["slope"] if with_slope else [])
    rows = []
    for t, N, eps, slope in table.rows():
        row = [_fmt(t), str(N), _fmt(eps)]
        if with_slope:
            row.append("" if np.isnan(slope) else _fmt(slope))
        rows.append(row)
    manifest = _manifest("converge", cfg, preset, solver={"Ns": list(args.ns), "Np": Np},
                         reference=args.reference,
                         grid={"divisions": args.divisions, "times": [float(t) for t in times]},
                         window=args.window)
    _Output(args.out).write(header, rows, manifest)
    return EXIT_OK


def cmd_compare(args):
    cfg, preset = _resolve(args)
    times = _times(args, cfg)
    times = times[times > 0]
    N = args.eigenvalues if args.eigenvalues is not None else 300
    _, Np = _settings(args, cfg)
    problem = validate(cfg.spec)
    report = studies.compare_with_fdm(problem, times, N=N, Np=Np, intervals=args.fdm_intervals,
                                      dt=args.dt, divisions=args.divisions)
    header = ["t", "difference", "estimate", "tolerance", "pass"]
    rows = [[_fmt(t), _fmt(d), _fmt(e), _fmt(tol), "true" if ok else "false"]
            for t, d, e, tol, ok in report.rows()]
    extra = {}
    if report.mass is not None:
        drift = studies.mass_drift(report.mass)
        extra["conservation"] = {"field": "pre-rescale u" if cfg.reaction_rate else "u",
                                 "mass": [float(v) for v in report.mass],
                                 "relative_drift": drift}
        print(f"mass drift over t in [{times[0]:g}, {times[-1]:g}]: {drift:.3e}", file=sys.stderr)
    verdict = bool(np.all(report.passed))
    print(f"verdict: {'pass' if verdict else 'fail'}", file=sys.stderr)
    manifest = _manifest("compare", cfg, preset, semi={"N": N, "Np": Np},
                         fdm={k: report.settings[k] for k in ("intervals", "dt", "divisions")},
                         verdict=verdict, **extra)
    _Output(args.out).write(header, rows, manifest)
    return EXIT_OK if verdict else EXIT_FAIL


def cmd_preset_dump(args):
    if args.preset is None:
        for name in presets.PRESET_NAMES:
            print(name)
        return EXIT_OK
    try:
        text = dumps(presets.preset(args.preset))
    except KeyError as exc:
        raise UsageError(exc.args[0]) from None
    if args.out in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(args.out).write_text(text, encoding="utf-8")
    return EXIT_OK


# --------------------------------------------------------------------------
# parser
# --------------------------------------------------------------------------

def build_parser():
    parser = argparse.ArgumentParser(
        prog="layerdiff",
        description="Solve and verify one-dimensional multilayer diffusion problems.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, n_default_note="config value"):
        src = p.add_mutually_exclusive_group()
        src.add_argument("--config", help="YAML run configuration")
        src.add_argument("--preset", choices=presets.PRESET_NAMES, help="built-in problem")
        p.add_argument("--times", type=_float_list, help="comma-separated output times")
        p.add_argument("--eigenvalues", type=int, help=f"eigenvalues per layer N ({n_default_note})")
        p.add_argument("--inversion-order", type=int, choices=(12, 14, 16),
                       help="Laplace inversion order N_p")
        p.add_argument("--out", help="output CSV (default stdout)")

    p = sub.add_parser("solve", help="evaluate the field on a grid")
    common(p)
    p.add_argument("--points-per-layer", type=int, help="grid points per layer (default 101)")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("converge", help="error versus N against a reference")
    common(p)
    p.add_argument("--ns", type=_int_list, default=[16, 32, 64, 128, 256],
                   help="comma-separated N values")
    p.add_argument("--reference", choices=("classical", "fdm"), default="classical")
    p.add_argument("--divisions", type=int, default=5, help="grid divisions per layer N_x")
    p.add_argument("--window", type=int, help="trailing points in the slope fit (default all)")
    p.set_defaults(func=cmd_converge)

    p = sub.add_parser("compare", help="semi-analytical versus finite differences")
    common(p, "default 300")
    p.add_argument("--fdm-intervals", type=int, default=200, help="coarse FDM intervals per layer")
    p.add_argument("--dt", type=float, help="coarse FDM time step")
    p.add_argument("--divisions", type=int, default=10, help="comparison points per layer minus 1")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("preset-dump", help="write a preset as an editable config")
    p.add_argument("--preset", choices=presets.PRESET_NAMES)
    p.add_argument("--out", help="output YAML (default stdout)")
    p.set_defaults(func=cmd_preset_dump)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ValidationError, UnsupportedFeatureError, UsageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (ArithmeticError, RuntimeError, np.linalg.LinAlgError) as exc:
        # includes every numerical failure class raised by the solvers
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
