"""Command-line front end.

Subcommands::

    coherence   one state, one measure -> JSON
    sweep       one parameter over a grid -> CSV
    threshold   parameter value where coherence reaches a target -> JSON
    asymptote   coherence along a ladder of thermal occupations -> JSON
    validate    closed form vs Fock-space oracle -> JSON report

Exit codes: 0 success, 2 usage, 3 convergence, 4 partial sweep,
5 validation failure.
"""

from __future__ import annotations

import argparse
import configparser
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import fields, replace
from typing import Sequence

import numpy as np

from . import fock
from .coherence import (
    DEFAULT_LADDER,
    Measure,
    OptimizerOptions,
    asymptote,
    coherence,
    threshold_search,
)
from .errors import ConvergenceError, InvalidStateError, NonMonotoneError
from .states import Family, StateParams, family_state, resolve_params

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_CONVERGENCE = 3
EXIT_PARTIAL = 4
EXIT_VALIDATION = 5

CSV_HEADER = "varied,c_bures,c_hellinger,argmax_ni_bures,argmax_ni_hellinger"
STATE_FLAGS = ("r", "psi", "beta", "n_th", "n_sq", "n_coh")
VARIABLES = ("r", "beta", "n_th", "psi", "n_sq", "n_coh")


class UsageError(Exception):
    pass


def _sig12(x: float) -> float:
    return float(f"{x:.12g}")


def _csv_float(x: float | None) -> str:
    if x is None:
        return ""
    if math.isnan(x):
        return "nan"
    return f"{x:.11e}"


def _json_params(params: dict) -> dict:
    out = {}
    for key, value in params.items():
        value = complex(value)
        out[key] = _sig12(value.real) if value.imag == 0 else [_sig12(value.real), _sig12(value.imag)]
    return out


def _emit(record: dict) -> None:
    print(json.dumps(record))


# Configuration ------------------------------------------------------------

OPTIMIZER_KEYS = {f.name: f.type for f in fields(OptimizerOptions)}
TRUNCATION_KEYS = {f.name: f.type for f in fields(fock.TruncationSpec)}


def load_config(path: str | None) -> tuple[OptimizerOptions, fock.TruncationSpec]:
    """Read a flat ``key = value`` file overriding optimizer and truncation defaults."""
    opts, spec = OptimizerOptions(), fock.TruncationSpec()
    if path is None:
        return opts, spec
    parser = configparser.ConfigParser()
    try:
        with open(path) as fh:
            parser.read_string("[config]\n" + fh.read())
    except (OSError, configparser.Error) as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    opt_over, spec_over = {}, {}
    for key, raw in parser["config"].items():
        try:
            if key in OPTIMIZER_KEYS:
                opt_over[key] = int(raw) if OPTIMIZER_KEYS[key] == "int" else float(raw)
            elif key in TRUNCATION_KEYS:
                spec_over[key] = int(raw) if TRUNCATION_KEYS[key] == "int" else float(raw)
            else:
                raise UsageError(f"unknown config key {key!r}")
        except ValueError as exc:
            raise UsageError(f"bad value for {key}: {raw!r}") from exc
    try:
        return replace(opts, **opt_over), replace(spec, **spec_over)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


# Argument helpers ---------------------------------------------------------

def _add_state_flags(p: argparse.ArgumentParser, with_family: bool = True) -> None:
    if with_family:
        p.add_argument("--family", required=True, choices=[f.value for f in Family])
    p.add_argument("--r", type=float, help="squeezing magnitude")
    p.add_argument("--psi", type=float, help="squeezing phase")
    p.add_argument("--beta", type=float, help="displacement amplitude (real part)")
    p.add_argument("--beta-im", type=float, default=0.0, help="imaginary part of beta")
    p.add_argument("--n-th", type=float, help="mean thermal photon number")
    p.add_argument("--n-sq", type=float, help="squeezing photons sinh^2 r (sets r)")
    p.add_argument("--n-coh", type=float, help="coherent photons |beta|^2 (sets beta)")


def _bindings(args: argparse.Namespace, skip: Sequence[str] = ()) -> dict:
    out = {}
    for name in STATE_FLAGS:
        value = getattr(args, name)
        if value is None or name in skip:
            continue
        out[name] = complex(value, args.beta_im) if name == "beta" else value
    if args.beta_im and "beta" not in out:
        raise UsageError("--beta-im needs --beta")
    return out


def _measures(text: str) -> list[Measure]:
    try:
        return [Measure(t.strip()) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise UsageError(f"unknown measure in {text!r}") from exc


def _floats(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise UsageError(f"expected comma-separated numbers, got {text!r}") from exc


# Subcommands --------------------------------------------------------------

def cmd_coherence(args, opts, spec) -> int:
    family = Family(args.family)
    bindings = _bindings(args)
    params = resolve_params(family, bindings)
    result = coherence(family_state(family, **bindings), Measure(args.measure), opts)
    _emit(
        {
            "family": family.value,
            "params": _json_params(params),
            "measure": args.measure,
            "coherence": _sig12(result.value),
            "argmax_ni": _sig12(result.argmax_ni),
            "converged": result.converged,
        }
    )
    return EXIT_OK if result.converged else EXIT_CONVERGENCE


def sweep_values(start: float, stop: float, points: int, scale: str) -> np.ndarray:
    if points < 2:
        raise UsageError("--points must be at least 2")
    if not start < stop:
        raise UsageError("--from must be smaller than --to")
    if scale == "log":
        if start <= 0:
            raise UsageError("log scale needs --from > 0")
        return np.logspace(math.log10(start), math.log10(stop), points)
    return np.linspace(start, stop, points)


def sweep_row(family: Family, bindings: dict, vary: str, x: float, measures, opts):
    """One CSV row: (x, {measure: (coherence, argmax) or None on failure})."""
    out = {}
    for m in measures:
        try:
            res = coherence(family_state(family, **{**bindings, vary: x}), m, opts)
            out[m] = (res.value, res.argmax_ni) if res.converged else None
        except (ConvergenceError, InvalidStateError):
            out[m] = None
    return x, out


def _sweep_row_star(job):
    return sweep_row(*job)


def format_sweep(rows, measures) -> tuple[str, bool]:
    lines = [CSV_HEADER]
    partial = False
    for x, results in rows:
        cells = {}
        for m in Measure:
            if m not in measures:
                cells[m] = (None, None)
            elif results[m] is None:
                partial = True
                cells[m] = (math.nan, math.nan)
            else:
                cells[m] = results[m]
        b, h = cells[Measure.BURES], cells[Measure.HELLINGER]
        lines.append(",".join(_csv_float(v) for v in (x, b[0], h[0], b[1], h[1])))
    return "\n".join(lines) + "\n", partial


def cmd_sweep(args, opts, spec) -> int:
    family = Family(args.family)
    if getattr(args, args.vary) is not None:
        raise UsageError(f"--{args.vary.replace('_', '-')} is the varied parameter")
    bindings = _bindings(args, skip=(args.vary,))
    measures = _measures(args.measures)
    xs = sweep_values(args.start, args.stop, args.points, args.scale)
    # Validate the bindings once before launching the grid.
    resolve_params(family, {**bindings, args.vary: float(xs[0])})
    jobs = [(family, bindings, args.vary, float(x), measures, opts) for x in xs]
    if args.workers > 1:
        with ProcessPoolExecutor(max_workers=args.workers) as pool:
            rows = list(pool.map(_sweep_row_star, jobs))
    else:
        rows = [sweep_row(*job) for job in jobs]
    text, partial = format_sweep(rows, measures)
    if args.out in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
    return EXIT_PARTIAL if partial else EXIT_OK


def cmd_threshold(args, opts, spec) -> int:
    family = Family(args.family)
    fixed = _bindings(args, skip=(args.vary,))
    try:
        value = threshold_search(
            family, Measure(args.measure), args.target, fixed, args.vary, args.lo, args.hi, opts
        )
    except NonMonotoneError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    _emit(
        {
            "family": family.value,
            "measure": args.measure,
            "target": args.target,
            "vary": args.vary,
            "threshold": "never" if value is None else _sig12(value),
        }
    )
    return EXIT_OK


def cmd_asymptote(args, opts, spec) -> int:
    family = Family(args.family)
    bindings = _bindings(args, skip=("n_th",))
    ladder = _floats(args.ladder)
    m = Measure(args.measure)
    res = asymptote(family, bindings, m, ladder, opts)
    initial = coherence(family_state(family, **bindings, n_th=0.0), m, opts)
    _emit(
        {
            "family": family.value,
            "params": _json_params(resolve_params(family, {**bindings, "n_th": 0.0})),
            "measure": m.value,
            "ladder": list(res.ladder),
            "values": [_sig12(v) for v in res.values],
            "initial": _sig12(initial.value),
            "plateau": _sig12(res.plateau),
            "is_plateau": res.is_plateau,
        }
    )
    return EXIT_OK if res.converged and initial.converged else EXIT_CONVERGENCE


def parse_grid(text: str) -> tuple[list[StateParams], Sequence[StateParams]]:
    """``default``, ``thermal``, or ``beta=0,1;r=0,0.3;n_th=0,1;psi=0``."""
    if text == "default":
        return fock.default_grid(), fock.DEFAULT_REFERENCES
    if text == "thermal":
        grid = [StateParams(n_th=n) for n in (0.0, 1.0, 2.0)]
        return grid, (StateParams(), StateParams(n_th=1.0))
    axes = {"beta": [0.0], "r": [0.0], "n_th": [0.0], "psi": [0.0]}
    for part in text.split(";"):
        key, _, values = part.partition("=")
        key = key.strip()
        if key not in axes or not values:
            raise UsageError(f"bad grid component {part!r}")
        axes[key] = _floats(values)
    return fock.parameter_grid(**axes), fock.DEFAULT_REFERENCES


def cmd_validate(args, opts, spec) -> int:
    if args.dim is not None:
        try:
            spec = replace(spec, dim=args.dim)
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
    grid, references = parse_grid(args.grid)
    quantities = [q.strip() for q in args.quantities.split(",") if q.strip()]
    unknown = set(quantities) - set(fock.QUANTITIES)
    if unknown:
        raise UsageError(f"unknown quantities {sorted(unknown)}")
    try:
        report = fock.oracle_equivalence(grid, references, spec, quantities)
    except ConvergenceError as exc:
        print(f"error: oracle did not converge: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    passed = report.passed(args.tol)
    _emit(
        {
            "dim": spec.dim,
            "max_dim": report.max_dim,
            "comparisons": report.comparisons,
            "max_deviation": {k: float(f"{v:.6g}") for k, v in report.max_deviation.items()},
            "tolerance": args.tol,
            "passed": passed,
        }
    )
    return EXIT_OK if passed else EXIT_VALIDATION


# Parser -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gaussian-coherence",
        description="Bures and Hellinger coherence of single-mode Gaussian states.",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key=value file overriding defaults")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("coherence", parents=[common], help="coherence of one state")
    _add_state_flags(p)
    p.add_argument("--measure", required=True, choices=[m.value for m in Measure])
    p.set_defaults(func=cmd_coherence)

    p = sub.add_parser("sweep", parents=[common], help="coherence along one parameter")
    _add_state_flags(p)
    p.add_argument("--vary", required=True, choices=VARIABLES)
    p.add_argument("--from", dest="start", type=float, required=True)
    p.add_argument("--to", dest="stop", type=float, required=True)
    p.add_argument("--points", type=int, default=20)
    p.add_argument("--scale", choices=("linear", "log"), default="linear")
    p.add_argument("--measures", default="bures,hellinger")
    p.add_argument("--out", help="CSV path, '-' or omitted for stdout")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("threshold", parents=[common], help="parameter reaching a target")
    _add_state_flags(p)
    p.add_argument("--measure", required=True, choices=[m.value for m in Measure])
    p.add_argument("--target", type=float, default=0.99)
    p.add_argument("--vary", required=True, choices=VARIABLES)
    p.add_argument("--lo", type=float, required=True)
    p.add_argument("--hi", type=float, required=True)
    p.set_defaults(func=cmd_threshold)

    p = sub.add_parser("asymptote", parents=[common], help="large-n_th behaviour")
    _add_state_flags(p, with_family=False)
    p.add_argument("--family", default="sts", choices=[f.value for f in Family])
    p.add_argument("--measure", default="bures", choices=[m.value for m in Measure])
    p.add_argument("--ladder", default=",".join(f"{x:g}" for x in DEFAULT_LADDER))
    p.set_defaults(func=cmd_asymptote)

    p = sub.add_parser("validate", parents=[common], help="closed form vs Fock oracle")
    p.add_argument("--dim", type=int)
    p.add_argument("--grid", default="default")
    p.add_argument("--quantities", default="fidelity,affinity")
    p.add_argument("--tol", type=float, default=1e-6)
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        opts, spec = load_config(args.config)
        return args.func(args, opts, spec)
    except (UsageError, InvalidStateError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE


if __name__ == "__main__":
    sys.exit(main())
