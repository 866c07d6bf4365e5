"""Command-line interface.

Subcommands: catalog, check, sigma, solve, sweep.  Machine-readable results
go to stdout (JSON by default, CSV for sweeps); diagnostics go to stderr.
Exit codes: 0 success, 2 invalid input, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from itertools import product

import numpy as np

from .curvature import scalar_curvature
from .sigma_apical import NoProperSubalgebraError, SigmaContext, existence_check
from .solver import SolverError, SolverOptions, maximize_S_on_MT, verify_prescribed_ricci
from .space_model import (
    HomogeneousSpaceSpec,
    SpecError,
    builtin_names,
    builtin_space,
    load_space_spec,
    space_spec_to_document,
)
from .subalgebras import intermediate_subalgebras

EXIT_OK = 0
EXIT_INVALID_INPUT = 2
EXIT_NUMERICAL_FAILURE = 3


def _fmt(x: float) -> str:
    return "%.17g" % x


def _parse_number(text: str, what: str) -> float:
    try:
        return float(Fraction(text))
    except (ValueError, ZeroDivisionError):
        try:
            return float(text)
        except ValueError:
            raise SpecError(f"cannot parse {text!r} as a number", what) from None


def _parse_tensor(text: str, s: int) -> tuple[float, ...]:
    parts = [p.strip() for p in text.split(",")]
    values = tuple(_parse_number(p, "--T") for p in parts)
    if len(values) != s:
        raise SpecError(f"--T needs {s} comma-separated values, got {len(values)}", "--T")
    if any(v <= 0 for v in values):
        raise SpecError("--T components must be positive", "--T")
    return values


def _load_spec(args) -> HomogeneousSpaceSpec:
    if args.builtin is not None:
        return builtin_space(args.builtin)
    with open(args.space, "r", encoding="utf-8") as handle:
        return load_space_spec(handle.read())


def _solver_options(args) -> SolverOptions:
    return SolverOptions(seed=args.seed, restarts=args.restarts)


def _emit_json(payload: dict) -> None:
    sys.stdout.write(json.dumps(payload, indent=2) + "\n")


def _add_space_arguments(parser: argparse.ArgumentParser) -> None:
    group = parser.add_mutually_exclusive_group(required=True)
    group.add_argument("--builtin", metavar="NAME", help="catalogued space name")
    group.add_argument("--space", metavar="FILE", help="path to a space description file")


def _add_solver_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seed", type=int, default=0, help="restart grid seed (default 0)")
    parser.add_argument("--restarts", type=int, default=16, help="optimizer restarts (default 16)")


# ---------------------------------------------------------------------------
# sweep grid
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SweepAxis:
    index: int          # 1-based tensor coordinate
    minimum: float
    maximum: float
    steps: int

    def values(self) -> np.ndarray:
        return np.linspace(self.minimum, self.maximum, self.steps)


@dataclass(frozen=True)
class SweepGrid:
    axes: tuple[SweepAxis, ...]
    base: tuple[float, ...]
    normalize: bool = False

    def points(self) -> list[tuple[float, ...]]:
        grids = [axis.values() for axis in self.axes]
        out = []
        for combo in product(*grids):
            z = list(self.base)
            for axis, value in zip(self.axes, combo):
                z[axis.index - 1] = float(value)
            out.append(tuple(z))
        return out


def parse_grid_axis(text: str, s: int) -> SweepAxis:
    """Parse an axis description ``i=min:max:steps``."""
    try:
        index_part, range_part = text.split("=", 1)
        lo, hi, steps = range_part.split(":")
    except ValueError:
        raise SpecError(f"grid axis {text!r} must look like i=min:max:steps", "--grid") from None
    try:
        index = int(index_part)
        n = int(steps)
    except ValueError:
        raise SpecError(f"grid axis {text!r}: index and steps must be integers", "--grid") from None
    minimum = _parse_number(lo, "--grid")
    maximum = _parse_number(hi, "--grid")
    if not 1 <= index <= s:
        raise SpecError(f"grid axis index {index} out of range 1..{s}", "--grid")
    if minimum <= 0:
        raise SpecError("grid minimum must be positive", "--grid")
    if n < 1:
        raise SpecError("grid steps must be >= 1", "--grid")
    return SweepAxis(index=index, minimum=minimum, maximum=maximum, steps=n)


def build_sweep_grid(axis_texts: list[str], base: tuple[float, ...], s: int,
                     normalize: bool) -> SweepGrid:
    axes = [parse_grid_axis(text, s) for text in axis_texts]
    if not axes:
        raise SpecError("at least one --grid axis is required", "--grid")
    if len(axes) > 2:
        raise SpecError("at most 2 free axes per sweep", "--grid")
    if len({axis.index for axis in axes}) != len(axes):
        raise SpecError("grid axes must use distinct coordinates", "--grid")
    return SweepGrid(axes=tuple(axes), base=base, normalize=normalize)


@dataclass(frozen=True)
class SweepRow:
    z: tuple[float, ...]
    fields: dict
    note: str = ""


def _sweep_point(spec: HomogeneousSpaceSpec, z: tuple[float, ...], options: SolverOptions,
                 normalize: bool, solve: bool) -> SweepRow:
    scaled = z
    if normalize:
        total = sum(spec.d[i] * z[i] for i in range(spec.s))
        scaled = tuple(v / total for v in z)
    fields: dict = {"status": "", "apical": "", "sigma": "", "margin": ""}
    if solve:
        fields["c"] = ""
        fields["residual"] = ""
    try:
        verdict = existence_check(spec, scaled, options)
    except (SolverError, NoProperSubalgebraError, ValueError) as exc:
        fields["status"] = "error"
        return SweepRow(z=scaled, fields=fields, note=f"{exc}")
    fields["status"] = verdict.status.value
    if verdict.apical is not None:
        fields["apical"] = "+".join(str(i) for i in verdict.apical.sorted)
        fields["sigma"] = _fmt(verdict.sigma.value)
        fields["margin"] = _fmt(verdict.margin)
    note = ""
    if solve:
        report = maximize_S_on_MT(spec, scaled, options)
        if report.converged:
            verification = verify_prescribed_ricci(spec, report.argmax, scaled)
            fields["c"] = _fmt(verification.c)
            fields["residual"] = _fmt(verification.residual)
        else:
            note = f"solver did not converge: {report.diagnostics}"
    return SweepRow(z=scaled, fields=fields, note=note)


def emit_sweep(spec: HomogeneousSpaceSpec, grid: SweepGrid, options: SolverOptions,
               solve: bool = False, workers: int = 1) -> tuple[str, list[str]]:
    """Render the sweep as CSV text; returns (csv, diagnostic notes).

    Rows are emitted in row-major grid order and are identical for any
    worker count: every point is evaluated independently and
    deterministically, and the pool only changes scheduling.
    """
    points = grid.points()

    def evaluate(z: tuple[float, ...]) -> SweepRow:
        return _sweep_point(spec, z, options, grid.normalize, solve)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(evaluate, points))
    else:
        rows = [evaluate(z) for z in points]

    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    header = [f"z{i}" for i in range(1, spec.s + 1)] + ["status", "apical", "sigma", "margin"]
    if solve:
        header += ["c", "residual"]
    writer.writerow(header)
    notes = []
    for row in rows:
        record = [_fmt(v) for v in row.z]
        record += [row.fields["status"], row.fields["apical"], row.fields["sigma"], row.fields["margin"]]
        if solve:
            record += [row.fields["c"], row.fields["residual"]]
        writer.writerow(record)
        if row.note:
            notes.append(f"z={','.join(_fmt(v) for v in row.z)}: {row.note}")
    return buffer.getvalue(), notes


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def _cmd_catalog(args) -> int:
    if args.action == "list":
        _emit_json({"builtins": list(builtin_names())})
        return EXIT_OK
    spec = builtin_space(args.name)
    _emit_json(space_spec_to_document(spec))
    return EXIT_OK


def _cmd_check(args) -> int:
    spec = _load_spec(args)
    z = _parse_tensor(args.T, spec.s)
    verdict = existence_check(spec, z, _solver_options(args))
    payload = {"space": spec.name, "T": list(z)}
    payload.update(verdict.as_dict())
    _emit_json(payload)
    return EXIT_OK


def _cmd_sigma(args) -> int:
    spec = _load_spec(args)
    z = _parse_tensor(args.T, spec.s)
    ctx = SigmaContext(spec, z, _solver_options(args))
    lattice = intermediate_subalgebras(spec)
    rows = [ctx.sigma(J) for J in lattice.all_proper]
    if args.format == "csv":
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(["J", "sigma", "attained", "witness", "source"])
        for row in rows:
            writer.writerow([
                "+".join(str(i) for i in row.J.sorted),
                _fmt(row.value),
                str(row.attained).lower(),
                "" if row.witness is None else "+".join(_fmt(v) for v in row.witness),
                row.source.value,
            ])
        sys.stdout.write(buffer.getvalue())
    else:
        _emit_json({"space": spec.name, "T": list(z), "rows": [r.as_dict() for r in rows]})
    return EXIT_OK


def _cmd_solve(args) -> int:
    spec = _load_spec(args)
    z = _parse_tensor(args.T, spec.s)
    report = maximize_S_on_MT(spec, z, _solver_options(args))
    if not report.converged:
        print(f"solver did not converge: {report.diagnostics}", file=sys.stderr)
        return EXIT_NUMERICAL_FAILURE
    verification = verify_prescribed_ricci(spec, report.argmax, z)
    _emit_json({
        "space": spec.name,
        "T": list(z),
        "x": list(report.argmax),
        "S": scalar_curvature(spec, report.argmax),
        "c": verification.c,
        "residual": verification.residual,
        "positive": verification.positive,
        "verified": verification.verified,
        "converged": report.converged,
        "first_order_residual": report.first_order_residual,
        "iterations": report.iterations,
        "stationary_points": [list(p) for p in report.stationary_points],
    })
    return EXIT_OK


def _cmd_sweep(args) -> int:
    spec = _load_spec(args)
    base = _parse_tensor(args.T, spec.s)
    grid = build_sweep_grid(args.grid, base, spec.s, args.normalize)
    text, notes = emit_sweep(spec, grid, _solver_options(args), solve=args.solve,
                             workers=args.workers)
    if args.format == "json":
        reader = csv.DictReader(io.StringIO(text))
        _emit_json({"space": spec.name, "rows": list(reader)})
    else:
        sys.stdout.write(text)
    for note in notes:
        print(note, file=sys.stderr)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="homricci",
        description="Existence checks and solvers for invariant metrics with "
                    "prescribed Ricci curvature on compact homogeneous spaces.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_catalog = sub.add_parser("catalog", help="inspect the built-in space catalog")
    catalog_sub = p_catalog.add_subparsers(dest="action", required=True)
    catalog_sub.add_parser("list", help="list built-in space names")
    p_show = catalog_sub.add_parser("show", help="print one built-in space as JSON")
    p_show.add_argument("name")

    p_check = sub.add_parser("check", help="existence verdict for a prescribed tensor")
    _add_space_arguments(p_check)
    p_check.add_argument("--T", required=True, help="comma-separated tensor coefficients")
    _add_solver_arguments(p_check)

    p_sigma = sub.add_parser("sigma", help="sigma table over all intermediate subalgebras")
    _add_space_arguments(p_sigma)
    p_sigma.add_argument("--T", required=True)
    p_sigma.add_argument("--format", choices=("json", "csv"), default="json")
    _add_solver_arguments(p_sigma)

    p_solve = sub.add_parser("solve", help="maximize S and verify Ric = cT at the maximizer")
    _add_space_arguments(p_solve)
    p_solve.add_argument("--T", required=True)
    _add_solver_arguments(p_solve)

    p_sweep = sub.add_parser("sweep", help="grid sweep of the existence verdict, CSV output")
    _add_space_arguments(p_sweep)
    p_sweep.add_argument("--T", required=True, help="base tensor coefficients")
    p_sweep.add_argument("--grid", action="append", default=[], metavar="i=min:max:steps",
                         help="sweep axis (repeat for a second axis, at most 2)")
    p_sweep.add_argument("--normalize", action="store_true",
                         help="rescale every point to unit weighted sum")
    p_sweep.add_argument("--solve", action="store_true",
                         help="also solve for the maximizer at every point")
    p_sweep.add_argument("--workers", type=int, default=1, help="worker threads (default 1)")
    p_sweep.add_argument("--format", choices=("csv", "json"), default="csv")
    _add_solver_arguments(p_sweep)

    return parser


_COMMANDS = {
    "catalog": _cmd_catalog,
    "check": _cmd_check,
    "sigma": _cmd_sigma,
    "solve": _cmd_solve,
    "sweep": _cmd_sweep,
}


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_INVALID_INPUT
    try:
        return _COMMANDS[args.command](args)
    except (SpecError, NoProperSubalgebraError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID_INPUT
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID_INPUT
    except SolverError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL_FAILURE


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
