"""pycoherence command line interface.

Subcommands: measure, verify-theorem2, verify-monotonicity, ordering and sweep.

Exit codes are a stable contract: 0 success, 2 usage or parse error, 3 invalid state,
4 solver failure, 5 verification failure.
"""

import sys
from argparse import ArgumentParser, Namespace
from concurrent.futures import ThreadPoolExecutor
from csv import writer
from datetime import datetime, timezone
from functools import partial
from json import JSONDecodeError, dumps
from logging import DEBUG, Logger, NullHandler, basicConfig, getLogger
from math import ceil
from typing import Any, Callable, Iterable, Sequence, TextIO, TypeVar

import numpy as np
from text_token import register_token_code, text_token

from . import __version__
from .base_validator import base_validator
from .channels import check_c2b_family, explore_c2b_family, random_sio_instrument
from .common import derive_seed, rng_from_seed
from .errors import ConvergenceError, EigenConvergenceError, GenerationError, SIOError, coherence_error
from .measures import c_l1, c_rel_entropy, c_tr_family_closed, measure_ordering_mc
from .pycoherence_typing import MeasureName, RunManifest, SolverConfig
from .row_iterators import tuple_iter
from .solver import closest_incoherent, coherence, normalise_config, verify_theorem2
from .states import density_matrix, diagonal_state, family_a_interval_uniform, family_state, load_state, random_family_state, uniform_family_state
from .validators import sweep_arguments_validator, verify_arguments_validator

_logger: Logger = getLogger(__name__)
_logger.addHandler(NullHandler())
_LOG_DEBUG: bool = _logger.isEnabledFor(DEBUG)

register_token_code("E06000", "{command}: {error}")
register_token_code("E06001", "Invalid arguments:\n{error}")
register_token_code("I06000", "{command}: {rows} rows, max abs_gap {max_abs_gap}, max argmin_gap {max_argmin_gap}, {failures} failed.")
register_token_code("I06001", "{command}: {rows} rows, {failures} did not hold.")
register_token_code("I06002", "{command}: {rows} points, {skipped} skipped.")
register_token_code("W06000", "{command}: trial d={d}, index {trial} failed: {error}")
register_token_code("W06001", "{command}: numeric solver gave no value at {value}: {error}")

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_STATE = 3
EXIT_SOLVER = 4
EXIT_VERIFY = 5

MEASURES: tuple[MeasureName, ...] = ("l1", "rel_entropy", "trace_dist_closed", "trace_dist_numeric")
THEOREM2_COLUMNS: tuple[str, ...] = ("d", "a", "closed", "numeric", "abs_gap", "argmin_gap", "status")
MONOTONICITY_COLUMNS: tuple[str, ...] = ("d", "a", "n_kraus", "avg", "d_abs_a", "ctr", "holds", "status")
ORDERING_COLUMNS: tuple[str, ...] = ("d", "ctr", "cr", "cl1", "ordered")
SWEEP_COLUMNS: tuple[str, ...] = ("value", "c_l1", "c_rel_entropy", "c_tr_closed", "c_tr_numeric", "skipped")
_AUTO_EXTRA_KRAUS = 3

_T = TypeVar("_T")
_R = TypeVar("_R")


def _flag(value: Any) -> str:
    return "" if value is None else ("true" if value else "false")


_FLAGS: dict[str, Callable[[Any], str]] = {"holds": _flag, "ordered": _flag, "skipped": _flag}


def _fail(command: str, code: int, exc: BaseException) -> int:
    _logger.error(text_token({"E06000": {"command": command, "error": exc}}))
    return code


def _validated(validator: base_validator, document: dict[str, Any]) -> dict[str, Any]:
    """Validate and normalise a CLI argument document. A failure is a usage error."""
    if not validator.validate(document):
        raise ValueError(text_token({"E06001": {"error": validator.error_str()}}))
    return validator.normalized(document)


def _solver_config(args: Namespace, seed: int) -> SolverConfig:
    config: dict[str, Any] = {"seed": seed}
    for key in ("max_iters", "step_init", "restarts", "window"):
        if getattr(args, key, None) is not None:
            config[key] = getattr(args, key)
    return normalise_config(config)  # type: ignore


def _fan_out(task: Callable[[_T], _R], items: Iterable[_T], threads: int) -> list[_R]:
    """Map task over items, on threads workers if threads > 1. Results keep the order of items."""
    if threads == 1:
        return list(map(task, items))
    with ThreadPoolExecutor(max_workers=threads) as executor:
        return list(executor.map(task, items))


def _manifest(command: str, seed: int, parameters: dict[str, Any]) -> RunManifest:
    return {
        "command": command,
        "seed": seed,
        "parameters": parameters,
        "artifact_version": __version__,
        "timestamp": datetime.now(timezone.utc).isoformat(),
    }


def _write_report(stream: TextIO, columns: Sequence[str], rows: Iterable[Sequence[Any]], manifest: RunManifest) -> None:
    """CSV header and body followed by the manifest as a '#' prefixed JSON line."""
    csv_writer = writer(stream, lineterminator="\n")
    csv_writer.writerow(columns)
    csv_writer.writerows(tuple_iter(columns, rows, _FLAGS))
    stream.write("# " + dumps(manifest, sort_keys=True) + "\n")


def _emit(out: str | None, columns: Sequence[str], rows: Iterable[Sequence[Any]], manifest: RunManifest) -> TextIO:
    """Write a report to out (or standard output). Returns the stream a summary should go to."""
    if out is None:
        _write_report(sys.stdout, columns, rows, manifest)
        return sys.stderr
    with open(out, "w", encoding="utf8", newline="") as file_ptr:
        _write_report(file_ptr, columns, rows, manifest)
    return sys.stdout


def cmd_measure(args: Namespace) -> int:
    """Evaluate a measure on a state file and print the MeasureReport JSON then the manifest line."""
    command = "measure"
    try:
        state: density_matrix | family_state | diagonal_state = load_state(args.state_file)
    except coherence_error as exc:
        return _fail(command, EXIT_STATE, exc)
    except (OSError, ValueError) as exc:
        return _fail(command, EXIT_USAGE, exc)
    if isinstance(state, diagonal_state):
        state = family_state(state.p, 0.0) if state.dim >= 2 else state.to_density()
    try:
        config: SolverConfig = _solver_config(args, args.seed)
        if args.tol is not None:
            config["tol"] = args.tol
            config = normalise_config(config)
        report = coherence(args.measure, state, config)
    except (ConvergenceError, EigenConvergenceError) as exc:
        return _fail(command, EXIT_SOLVER, exc)
    except ValueError as exc:
        return _fail(command, EXIT_USAGE, exc)
    parameters: dict[str, Any] = {"state_file": args.state_file, "measure": args.measure, "solver": dict(config)}
    text = dumps(report.to_json()) + "\n# " + dumps(_manifest(command, args.seed, parameters), sort_keys=True) + "\n"
    if args.out is None:
        sys.stdout.write(text)
    else:
        with open(args.out, "w", encoding="utf8") as file_ptr:
            file_ptr.write(text)
    return EXIT_OK


def _verify_parameters(args: Namespace) -> dict[str, Any]:
    return _validated(
        verify_arguments_validator,
        {
            "d_min": args.d_min,
            "d_max": args.d_max,
            "trials": args.trials,
            "seed": args.seed,
            "tol": args.tol if args.tol is not None else 1e-6,
            "threads": args.threads,
            "n_kraus": getattr(args, "n_kraus", "auto"),
            "out_dim": getattr(args, "out_dim", 2),
            "out": args.out,
        },
    )


def _trials(parameters: dict[str, Any]) -> list[tuple[int, int]]:
    return [(d, trial) for d in range(parameters["d_min"], parameters["d_max"] + 1) for trial in range(parameters["trials"])]


def _theorem2_trial(seed: int, tol: float, solver: SolverConfig, key: tuple[int, int]) -> tuple[Any, ...]:
    """One verify-theorem2 row. Failures are recorded in the status column."""
    d, trial = key
    trial_seed: int = derive_seed(seed, d, trial)
    try:
        f: family_state = random_family_state(d, trial_seed)
    except GenerationError as exc:
        _logger.warning(text_token({"W06000": {"command": "verify-theorem2", "d": d, "trial": trial, "error": exc}}))
        return (d, None, None, None, None, None, "generation_error")
    try:
        check = verify_theorem2(f, {**solver, "seed": trial_seed})
    except (ConvergenceError, EigenConvergenceError) as exc:
        _logger.warning(text_token({"W06000": {"command": "verify-theorem2", "d": d, "trial": trial, "error": exc}}))
        return (d, f.a, c_tr_family_closed(f).value, None, None, None, "convergence_error")
    abs_gap: float = abs(check.numeric - check.closed)
    return (d, f.a, check.closed, check.numeric, abs_gap, check.argmin_gap, "ok" if abs_gap <= tol else "gap")


def cmd_verify_theorem2(args: Namespace) -> int:
    """Monte-Carlo comparison of the closed form with the numeric solver over random family states."""
    command = "verify-theorem2"
    parameters: dict[str, Any] = _verify_parameters(args)
    parameters.pop("n_kraus")
    parameters.pop("out_dim")
    solver: SolverConfig = _solver_config(args, parameters["seed"])
    task = partial(_theorem2_trial, parameters["seed"], parameters["tol"], solver)
    rows = _fan_out(task, _trials(parameters), parameters["threads"])
    summary_stream = _emit(parameters["out"], THEOREM2_COLUMNS, rows, _manifest(command, parameters["seed"], parameters))
    failures: int = sum(row[-1] != "ok" for row in rows)
    abs_gaps = [row[4] for row in rows if row[4] is not None]
    argmin_gaps = [row[5] for row in rows if row[5] is not None]
    summary = {
        "command": command,
        "rows": len(rows),
        "max_abs_gap": max(abs_gaps, default=None),
        "max_argmin_gap": max(argmin_gaps, default=None),
        "failures": failures,
    }
    print(text_token({"I06000": summary}), file=summary_stream)
    return EXIT_VERIFY if failures else EXIT_OK


def _monotonicity_trial(seed: int, n_kraus: str, out_dim: int, solver: SolverConfig, key: tuple[int, int]) -> tuple[Any, ...]:
    """One verify-monotonicity row. Failures are recorded in the status column.

    Rows with out_dim above 2 use the numeric solver and are marked exploratory.
    """
    d, trial = key
    trial_seed: int = derive_seed(seed, d, trial)
    count: int = ceil(d / out_dim) + int(rng_from_seed(trial_seed).integers(_AUTO_EXTRA_KRAUS)) if n_kraus == "auto" else int(n_kraus)
    try:
        f: family_state = random_family_state(d, derive_seed(trial_seed, 0))
        inst = random_sio_instrument(d, count, derive_seed(trial_seed, 1), out_dim)
        if out_dim == 2:
            check = check_c2b_family(f, inst)
        else:
            check = explore_c2b_family(f, inst, {**solver, "seed": trial_seed})
    except coherence_error as exc:
        _logger.warning(text_token({"W06000": {"command": "verify-monotonicity", "d": d, "trial": trial, "error": exc}}))
        return (d, None, count, None, None, None, False, type(exc).__name__)
    if out_dim != 2:
        return (d, f.a, count, check.avg, check.bound_da, check.ctr, check.holds, "exploratory")
    return (d, f.a, count, check.avg, check.bound_da, check.ctr, check.holds, "ok" if check.holds else "violated")


def cmd_verify_monotonicity(args: Namespace) -> int:
    """Monte-Carlo check of avg <= d|a| <= 2(d - 1)|a| over random family states and 2 x d SIO instruments.

    With --out-dim above 2 the rows are recorded but never fail the run.
    """
    command = "verify-monotonicity"
    parameters: dict[str, Any] = _verify_parameters(args)
    parameters.pop("tol")
    out_dim: int = parameters["out_dim"]
    task = partial(_monotonicity_trial, parameters["seed"], parameters["n_kraus"], out_dim, _solver_config(args, parameters["seed"]))
    rows = _fan_out(task, _trials(parameters), parameters["threads"])
    summary_stream = _emit(parameters["out"], MONOTONICITY_COLUMNS, rows, _manifest(command, parameters["seed"], parameters))
    failures: int = sum(not row[6] for row in rows) if out_dim == 2 else 0
    print(text_token({"I06001": {"command": command, "rows": len(rows), "failures": failures}}), file=summary_stream)
    return EXIT_VERIFY if failures else EXIT_OK


def cmd_ordering(args: Namespace) -> int:
    """Print C_tr, C_r and C_l1 of the maximally coherent state for d = 2..d_max."""
    command = "ordering"
    if args.d_max < 2:
        return _fail(command, EXIT_USAGE, ValueError(f"d_max must be >= 2 but got {args.d_max}."))
    rows = [(d, *measure_ordering_mc(d)) for d in range(2, args.d_max + 1)]
    _emit(args.out, ORDERING_COLUMNS, rows, _manifest(command, args.seed, {"d_max": args.d_max}))
    return EXIT_OK if all(row[-1] for row in rows) else EXIT_VERIFY


def _sweep_point(x: Sequence[float] | None, fixed: float, vary: str, solver: SolverConfig, value: float | int) -> tuple[Any, ...]:
    """One sweep row: the four measures of the family state at value, or a skipped row if it is not a state."""
    d: int = int(value) if vary == "d" else (len(x) if x is not None else int(fixed))
    a: float = fixed if vary == "d" else float(value)
    if d < 2:
        return (value, None, None, None, None, True)
    if x is None or vary == "d":
        low, high = family_a_interval_uniform(d)
        if not low <= a <= high:
            return (value, None, None, None, None, True)
        f: family_state = uniform_family_state(d, a)
    else:
        try:
            f = family_state(x, a)
        except coherence_error:
            return (value, None, None, None, None, True)
    rho: density_matrix = f.to_density()
    try:
        numeric: float | None = closest_incoherent(rho, solver).value
    except (ConvergenceError, EigenConvergenceError) as exc:
        _logger.warning(text_token({"W06001": {"command": "sweep", "value": value, "error": exc}}))
        numeric = None
    return (value, c_l1(rho), c_rel_entropy(rho), c_tr_family_closed(f).value, numeric, False)


def cmd_sweep(args: Namespace) -> int:
    """Emit the measures of a family state along a line in a or d."""
    command = "sweep"
    parameters: dict[str, Any] = _validated(
        sweep_arguments_validator,
        {
            "vary": args.vary,
            "x": args.x,
            "d": args.d,
            "a": args.a,
            "start": args.start,
            "stop": args.stop,
            "steps": args.steps,
            "seed": args.seed,
            "threads": args.threads,
            "out": args.out,
        },
    )
    points: list[float | int] = [float(v) for v in np.linspace(parameters["start"], parameters["stop"], parameters["steps"])]
    if parameters["vary"] == "d":
        if parameters["x"] is not None:
            return _fail(command, EXIT_USAGE, ValueError("--x cannot be used with --vary d."))
        points = list(dict.fromkeys(int(round(v)) for v in points))
    solver: SolverConfig = _solver_config(args, parameters["seed"])
    # With vary a, d is the length of x or the --d value.
    fixed: float = parameters["a"] if parameters["vary"] == "d" else parameters["d"]
    task = partial(_sweep_point, parameters["x"], fixed, parameters["vary"], solver)
    rows = _fan_out(task, points, parameters["threads"])
    summary_stream = _emit(parameters["out"], SWEEP_COLUMNS, rows, _manifest(command, parameters["seed"], parameters))
    print(text_token({"I06002": {"command": command, "rows": len(rows), "skipped": sum(row[-1] for row in rows)}}), file=summary_stream)
    return EXIT_OK


def _parser() -> ArgumentParser:
    common = ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="64-bit unsigned base seed.")
    common.add_argument("--tol", type=float, default=None, help="Tolerance (solver tolerance for measure, gap tolerance for verify-theorem2).")
    common.add_argument("--threads", type=int, default=1, help="Worker threads for Monte-Carlo trials.")
    common.add_argument("--out", default=None, help="Output file. Standard output if omitted.")
    common.add_argument("--log-level", default="WARNING", choices=("DEBUG", "INFO", "WARNING", "ERROR"), help="Log level on standard error.")

    solver = ArgumentParser(add_help=False)
    solver.add_argument("--max-iters", type=int, default=None, help="Iteration cap per restart.")
    solver.add_argument("--step-init", type=float, default=None, help="Initial step scale.")
    solver.add_argument("--restarts", type=int, default=None, help="Number of restarts.")
    solver.add_argument("--window", type=int, default=None, help="Iterations between stagnation checks.")

    span = ArgumentParser(add_help=False)
    span.add_argument("--d-min", type=int, default=2, help="Smallest dimension (>= 2).")
    span.add_argument("--d-max", type=int, default=8, help="Largest dimension (<= 8).")
    span.add_argument("--trials", type=int, default=25, help="Trials per dimension.")

    parser = ArgumentParser(prog="pycoherence", description="Quantum coherence measures and verification suites.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    commands = parser.add_subparsers(dest="command", required=True)

    measure = commands.add_parser("measure", parents=[common, solver], help="Evaluate a coherence measure on a state file.")
    measure.add_argument("state_file", help="DensityMatrix, FamilyState or DiagonalState JSON file.")
    measure.add_argument("--measure", required=True, choices=MEASURES)
    measure.set_defaults(handler=cmd_measure)

    theorem2 = commands.add_parser("verify-theorem2", parents=[common, solver, span], help="Closed form vs. numeric solver.")
    theorem2.set_defaults(handler=cmd_verify_theorem2)

    monotonicity = commands.add_parser("verify-monotonicity", parents=[common, solver, span], help="Selective SIO monotonicity chain.")
    monotonicity.add_argument("--n-kraus", default="auto", help="'auto' or a fixed number of Kraus operators.")
    monotonicity.add_argument("--out-dim", type=int, default=2, help="Kraus operator rows. Above 2 the rows are exploratory.")
    monotonicity.set_defaults(handler=cmd_verify_monotonicity)

    ordering = commands.add_parser("ordering", parents=[common], help="Measure ordering of the maximally coherent state.")
    ordering.add_argument("--d-max", type=int, default=16)
    ordering.set_defaults(handler=cmd_ordering)

    sweep = commands.add_parser("sweep", parents=[common, solver], help="Measures along a line in a or d.")
    sweep.add_argument("--vary", required=True, choices=("a", "d"))
    sweep.add_argument("--x", type=float, nargs="+", default=None, help="Diagonal template (vary a only). Uniform if omitted.")
    sweep.add_argument("--d", type=int, default=3, help="Dimension of the uniform template when varying a.")
    sweep.add_argument("--a", type=float, default=0.1, help="Off-diagonal value when varying d.")
    sweep.add_argument("--start", type=float, required=True)
    sweep.add_argument("--stop", type=float, required=True)
    sweep.add_argument("--steps", type=int, default=50)
    sweep.set_defaults(handler=cmd_sweep)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    """Run the command line. Returns the exit code."""
    try:
        args: Namespace = _parser().parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    basicConfig(level=args.log_level, stream=sys.stderr, format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    try:
        return args.handler(args)
    except (ConvergenceError, EigenConvergenceError) as exc:
        return _fail(args.command, EXIT_SOLVER, exc)
    except (OSError, JSONDecodeError, ValueError) as exc:
        return _fail(args.command, EXIT_USAGE, exc)
