"""Closest incoherent state search and the characteristic polynomial predicates.

The trace distance coherence is min over diagonal states delta of tr|rho - delta|. The objective
is convex on the probability simplex so a projected subgradient descent with several restarts
finds the global minimum. For the constant off-diagonal family the closed form 2(d - 1)|a| is
attained at delta = diag(rho); the predicates here make each step of that argument checkable.
"""

from itertools import combinations, islice
from logging import DEBUG, Logger, NullHandler, getLogger
from math import comb, inf, sqrt
from threading import Lock
from typing import Any, Iterator, NamedTuple

import numpy as np
from numpy.linalg import eigvalsh
from numpy.random import SeedSequence
from scipy.linalg import det
from scipy.optimize import bisect
from text_token import register_token_code, text_token

from .common import ZERO_TOL, descending_order, rng_from_seed
from .errors import ConvergenceError, DimensionError, PreconditionError
from .matcore import eig_hermitian, hermitian_trace_norm
from .measures import c_l1, c_rel_entropy, c_tr_family_closed, c_tr_qubit, measure_report
from .pycoherence_typing import MeasureName, ProofBranch, RealVector, SolverConfig, SolverConfigNorm
from .states import density_matrix, dephase, diagonal_state, family_state
from .validators import solver_config_validator

_logger: Logger = getLogger(__name__)
_logger.addHandler(NullHandler())
_LOG_DEBUG: bool = _logger.isEnabledFor(DEBUG)

register_token_code("E04000", "Solver configuration error: See lines below.\n{error}")
register_token_code("I04000", "Restart {restart} from {start}: value {value} after {iterations} iterations, stabilised {stabilised}.")
register_token_code("I04001", "Grid oracle d={d}, steps={steps}: {points} lattice points, minimum {value}.")
register_token_code("W04000", "Restart {restart} did not stabilise in {iterations} iterations. Best value {value}.")

_GRID_MAX_DIM = 4
_GRID_MIN_STEPS = 20
_GRID_CHUNK = 1 << 15
_RESTART_MIX = 0.5
_BISECT_XTOL = 1e-12
_PRODUCT_RTOL = 1e-8
_ARGMIN_TOL = 1e-12
_config_lock = Lock()


class descent(NamedTuple):
    """Outcome of one projected subgradient restart."""

    value: float
    p: RealVector
    iterations: int
    residual: float
    stabilised: bool


class char_poly_point(NamedTuple):
    """det[lambda I - (rho - delta)] at lam with y = x - delta.

    product_agrees is None when a factor of the product form vanishes.
    """

    lam: float
    value: float
    y: RealVector
    product_agrees: bool | None


class bracket(NamedTuple):
    """Root of the characteristic polynomial found beyond (d - 1)a."""

    eigenvalue_beyond: bool
    witness: float


class theorem2_check(NamedTuple):
    """Closed form vs. numeric trace distance coherence of a family state."""

    closed: float
    numeric: float
    argmin_gap: float


def normalise_config(config: SolverConfig | None = None) -> SolverConfigNorm:
    """Validate a solver configuration and fill in the defaults.

    Args
    ----
    config: A (possibly partial) solver configuration. See formats/solver_config_format.json.

    Returns
    -------
    The normalized configuration.
    """
    document: dict[str, Any] = dict(config or {})
    with _config_lock:
        if not solver_config_validator.validate(document):
            raise ValueError(text_token({"E04000": {"error": solver_config_validator.error_str()}}))
        return solver_config_validator.normalized(document)


def default_config() -> SolverConfigNorm:
    """Get a solver config template."""
    return normalise_config({})


def trace_distance_objective(rho: density_matrix, p: RealVector) -> float:
    """tr|rho - diag(p)|."""
    return hermitian_trace_norm(rho.entries - np.diag(p))


def _value_and_subgradient(entries: np.ndarray, p: RealVector) -> tuple[float, RealVector]:
    eigenvalues, eigenvectors = eig_hermitian(entries - np.diag(p))
    return float(np.sum(np.abs(eigenvalues))), -(np.abs(eigenvectors) ** 2) @ np.sign(eigenvalues)


def subgradient(rho: density_matrix, p: RealVector) -> RealVector:
    """A subgradient of tr|rho - diag(p)| with respect to p.

    Component i is -sum_k sign(lambda_k) |u_ik|^2 for the eigenpairs (lambda_k, u_k) of
    rho - diag(p), with sign(0) = 0.
    """
    return _value_and_subgradient(rho.entries, np.asarray(p, dtype=float))[1]


def project_to_simplex(v: RealVector) -> RealVector:
    """Euclidean projection of v onto the probability simplex (sort and threshold)."""
    vector: RealVector = np.asarray(v, dtype=float)
    ordered: RealVector = vector[descending_order(vector)]
    shifted_sums: RealVector = np.cumsum(ordered) - 1.0
    support: int = int(np.nonzero(ordered - shifted_sums / np.arange(1, vector.size + 1) > 0)[0][-1])
    return np.maximum(vector - shifted_sums[support] / (support + 1), 0.0)


def _descend(entries: np.ndarray, start: RealVector, config: SolverConfigNorm) -> descent:
    """Projected subgradient descent from start.

    The step at iteration k is scale / sqrt(k). After every window of iterations where the best
    value fell by less than tol the scale halves. The search has stabilised once a step cannot
    move the objective by more than tol.
    """
    root_d: float = sqrt(start.size)
    p: RealVector = start.copy()
    best_value, gradient = _value_and_subgradient(entries, p)
    best_p: RealVector = p.copy()
    scale: float = config["step_init"]
    checkpoint: float = best_value
    residual: float = inf
    for iteration in range(1, config["max_iters"] + 1):
        p = project_to_simplex(p - scale / sqrt(iteration) * gradient)
        value, gradient = _value_and_subgradient(entries, p)
        if value < best_value:
            best_value, best_p = value, p.copy()
        if iteration % config["window"] == 0:
            residual = checkpoint - best_value
            if residual < config["tol"]:
                scale /= 2
                if scale / sqrt(iteration) * root_d < config["tol"]:
                    return descent(best_value, best_p, iteration, residual, True)
            checkpoint = best_value
    return descent(best_value, best_p, config["max_iters"], residual, False)


def _restart_points(rho: density_matrix, config: SolverConfigNorm) -> Iterator[RealVector]:
    """dephase(rho) (unless dephased_start is false) followed by seeded Dirichlet perturbations of it."""
    origin: RealVector = dephase(rho).p
    perturbed: int = config["restarts"]
    if config["dephased_start"]:
        yield origin
        perturbed -= 1
    for child in SeedSequence(config["seed"]).spawn(perturbed):
        yield project_to_simplex((1 - _RESTART_MIX) * origin + _RESTART_MIX * rng_from_seed(child).dirichlet(np.ones(rho.dim)))


def closest_incoherent(rho: density_matrix, config: SolverConfig | None = None) -> measure_report:
    """Numerically minimise tr|rho - delta| over diagonal states delta.

    Restarts run in index order and the best value wins, ties going to the lower index.

    Args
    ----
    rho: The state.
    config: Solver configuration (see default_config()).

    Returns
    -------
    measure_report("trace_dist_numeric") with the minimising diagonal state and the iterations and
    last window decrease of the winning restart. Raises ConvergenceError if no restart stabilised.
    """
    cfg: SolverConfigNorm = normalise_config(config)
    best: descent | None = None
    total_iterations = 0
    best_value: float = inf
    for restart, start in enumerate(_restart_points(rho, cfg)):
        result: descent = _descend(rho.entries, start, cfg)
        total_iterations += result.iterations
        best_value = min(best_value, result.value)
        if _LOG_DEBUG:
            _logger.debug(
                text_token(
                    {
                        "I04000": {
                            "restart": restart,
                            "start": start.tolist(),
                            "value": result.value,
                            "iterations": result.iterations,
                            "stabilised": result.stabilised,
                        }
                    }
                )
            )
        if not result.stabilised:
            _logger.warning(text_token({"W04000": {"restart": restart, "iterations": result.iterations, "value": result.value}}))
        if result.stabilised and (best is None or result.value < best.value):
            best = result
    if best is None:
        raise ConvergenceError(best_value, total_iterations)
    return measure_report(
        "trace_dist_numeric",
        best.value,
        diagonal_state(best.p),
        {"iterations": best.iterations, "residual": float(best.residual)},
    )


def _lattice(d: int, steps: int) -> Iterator[RealVector]:
    """Chunks of the lattice {k / steps : k_i >= 0, sum k_i = steps} (stars and bars)."""
    bars = combinations(range(steps + d - 1), d - 1)
    while chunk := list(islice(bars, _GRID_CHUNK)):
        positions = np.array(chunk, dtype=np.int64).reshape(len(chunk), d - 1)
        padded = np.hstack([np.full((len(chunk), 1), -1), positions, np.full((len(chunk), 1), steps + d - 1)])
        yield (np.diff(padded, axis=1) - 1) / steps


def grid_oracle(rho: density_matrix, steps: int) -> measure_report:
    """Exhaustive minimum of tr|rho - diag(p)| over a lattice on the simplex.

    The lattice minimum is within d / steps of the true minimum because the trace norm is
    1-Lipschitz in each diagonal coordinate. diagnostics.iterations is the number of lattice
    points and diagnostics.residual that bound.

    Raises DimensionError for dim > 4 and PreconditionError for steps < 20.
    """
    d: int = rho.dim
    if not 2 <= d <= _GRID_MAX_DIM:
        raise DimensionError(f"The grid oracle supports 2 <= dim <= {_GRID_MAX_DIM} but got {d}.")
    if steps < _GRID_MIN_STEPS:
        raise PreconditionError(f"The grid oracle needs steps >= {_GRID_MIN_STEPS} but got {steps}.")
    best_value: float = inf
    best_p: RealVector = np.full(d, 1.0 / d)
    identity = np.eye(d)
    for points in _lattice(d, steps):
        values = np.sum(np.abs(eigvalsh(rho.entries[None, :, :] - points[:, :, None] * identity[None, :, :])), axis=1)
        index = int(np.argmin(values))
        if values[index] < best_value:
            best_value, best_p = float(values[index]), points[index]
    total: int = comb(steps + d - 1, d - 1)
    _logger.info(text_token({"I04001": {"d": d, "steps": steps, "points": total, "value": best_value}}))
    return measure_report("trace_dist_numeric", best_value, diagonal_state(best_p), {"iterations": total, "residual": d / steps})


def _check_pair(f: family_state, delta: diagonal_state) -> RealVector:
    if f.dim != delta.dim:
        raise DimensionError(f"Family state dim {f.dim} differs from diagonal state dim {delta.dim}.")
    return f.x - delta.p


def char_poly_eval(lam: float, f: family_state, delta: diagonal_state) -> float:
    """det[lam I - (rho - delta)] by LU factorisation of the assembled matrix."""
    _check_pair(f, delta)
    return float(det(lam * np.eye(f.dim) - (f.matrix() - np.diag(delta.p))))


def char_poly_product(lam: float, f: family_state, delta: diagonal_state) -> float | None:
    """Rank one update form (1 - sum a / (lam - y_i + a)) prod (lam - y_i + a), None at a pole."""
    factors: RealVector = lam - _check_pair(f, delta) + f.a
    if np.any(np.abs(factors) < ZERO_TOL):
        return None
    return float((1.0 - np.sum(f.a / factors)) * np.prod(factors))


def char_poly_sample(lam: float, f: family_state, delta: diagonal_state) -> char_poly_point:
    """Evaluate the characteristic polynomial both ways and report whether they agree."""
    y: RealVector = _check_pair(f, delta)
    value: float = char_poly_eval(lam, f, delta)
    product: float | None = char_poly_product(lam, f, delta)
    if product is None:
        return char_poly_point(lam, value, y, None)
    scale = max(1.0, abs(value), float(np.prod(np.abs(lam - y + f.a))))
    return char_poly_point(lam, value, y, abs(product - value) <= _PRODUCT_RTOL * scale)


def proof_branch(f: family_state, delta: diagonal_state) -> ProofBranch:
    """Which argument bounds tr|rho - delta| below by 2(d - 1)|a|.

    "diagonal": delta = diag(rho), the bound is attained.
    "bolzano": 0 < max|y_i| < d|a|, an eigenvalue lies beyond (d - 1)a.
    "majorization": some |y_i| >= d|a|, the largest singular value is at least d|a|.
    """
    y: RealVector = np.abs(_check_pair(f, delta))
    if np.all(y <= ZERO_TOL):
        return "diagonal"
    if np.any(y >= f.dim * abs(f.a)):
        return "majorization"
    return "bolzano"


def bolzano_bracket(f: family_state, delta: diagonal_state) -> bracket:
    """Find an eigenvalue of rho - delta beyond (d - 1)a by bisection.

    For a > 0 the polynomial is negative at (d - 1)a and positive at (d - 1)a + d, so a root lies
    in between. For a < 0 it changes sign on [(d - 1)a - d, (d - 1)a].

    Requires a != 0, some y_i != 0 and |y_i| < d|a| for all i, else PreconditionError.
    """
    y: RealVector = _check_pair(f, delta)
    d, a = f.dim, f.a
    if a == 0:
        raise PreconditionError("a must be non-zero.")
    if np.all(np.abs(y) <= ZERO_TOL):
        raise PreconditionError("delta equals diag(rho), every y_i is 0.")
    if np.any(np.abs(y) >= d * abs(a)):
        raise PreconditionError(f"max |y_i| = {np.max(np.abs(y))} is not below d|a| = {d * abs(a)}.")
    anchor: float = (d - 1) * a
    lower, upper = (anchor, anchor + d) if a > 0 else (anchor - d, anchor)
    if char_poly_eval(lower, f, delta) * char_poly_eval(upper, f, delta) >= 0:
        return bracket(False, anchor)
    witness = float(bisect(char_poly_eval, lower, upper, args=(f, delta), xtol=_BISECT_XTOL))
    return bracket(witness > anchor if a > 0 else witness < anchor, witness)


def verify_theorem2(f: family_state, config: SolverConfig | None = None) -> theorem2_check:
    """Compare 2(d - 1)|a| with the numeric minimum and its argmin with x (l-infinity).

    The solver runs without the dephased start point, which is the closed form argmin, and with
    tol at most 1e-12. The objective is flat to first order at diag(rho) so the argmin is only
    resolved to about sqrt(tol).
    """
    cfg: SolverConfigNorm = normalise_config(config)
    cfg = normalise_config({**cfg, "dephased_start": False, "tol": min(cfg["tol"], _ARGMIN_TOL)})
    report: measure_report = closest_incoherent(f.to_density(), cfg)
    argmin: diagonal_state = report.argmin if report.argmin is not None else dephase(f.to_density())
    return theorem2_check(c_tr_family_closed(f).value, report.value, float(np.max(np.abs(argmin.p - f.x))))


def coherence(measure: MeasureName, state: density_matrix | family_state, config: SolverConfig | None = None) -> measure_report:
    """Evaluate measure on state.

    trace_dist_closed needs a family state or a qubit. trace_dist_numeric runs closest_incoherent().
    """
    rho: density_matrix = state.to_density() if isinstance(state, family_state) else state
    if measure == "l1":
        return measure_report("l1", c_l1(rho))
    if measure == "rel_entropy":
        return measure_report("rel_entropy", c_rel_entropy(rho))
    if measure == "trace_dist_closed":
        if isinstance(state, family_state):
            return c_tr_family_closed(state)
        if rho.dim == 2:
            return measure_report("trace_dist_closed", c_tr_qubit(rho), dephase(rho))
        raise PreconditionError("trace_dist_closed needs a family state or a qubit density matrix.")
    return closest_incoherent(rho, config)
