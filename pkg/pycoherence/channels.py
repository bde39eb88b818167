"""Kraus operator instruments and the coherence monotonicity checks built on them.

An instrument is a list of Kraus operators K_n (out_dim x in_dim) with sum_n K_n^dagger K_n = I.
"""

from logging import DEBUG, Logger, NullHandler, getLogger
from math import pi
from typing import Any, Iterable, NamedTuple, Sequence

import numpy as np
from text_token import register_token_code, text_token

from .common import TOL, ZERO_TOL, rng_from_seed
from .errors import CompletenessError, DimensionError, GenerationError, PreconditionError, ShapeError, SIOError
from .matcore import as_complex_matrix
from .measures import c_l1, c_rel_entropy, c_tr_qubit
from .pycoherence_typing import ComplexMatrix, InstrumentJSON, KrausJSON, MeasureName, SolverConfig
from .solver import closest_incoherent
from .states import density_matrix, family_state
from .validators import instrument_validator

_logger: Logger = getLogger(__name__)
_logger.addHandler(NullHandler())
_LOG_DEBUG: bool = _logger.isEnabledFor(DEBUG)

register_token_code("E05000", "Invalid instrument document:\n{error}")
register_token_code("I05000", "random_sio_instrument(d={d}, n_kraus={n_kraus}, seed={seed}): column slots {slots}.")
register_token_code("W05000", "Selective monotonicity bound broken: avg {avg} > d|a| {bound_da} for family state {state}.")

_C2B_SLACK = 1e-9
_CHAIN_SLACK = 1e-12
_C3_SLACK = 1e-9
_C2A_SLACK = 1e-6
_NUMERIC_MAX_DIM = 4


class kraus_operator:
    """A single out_dim x in_dim Kraus operator with finite entries."""

    __slots__ = ("entries",)

    def __init__(self, entries: Any) -> None:
        matrix: ComplexMatrix = as_complex_matrix(entries)
        matrix.setflags(write=False)
        self.entries: ComplexMatrix = matrix

    def __repr__(self) -> str:
        return f"kraus_operator({self.entries.tolist()!r})"

    @property
    def out_dim(self) -> int:
        """Number of rows."""
        return self.entries.shape[0]

    @property
    def in_dim(self) -> int:
        """Number of columns."""
        return self.entries.shape[1]

    def to_json(self) -> KrausJSON:
        """JSON form {"re": [[...]], "im": [[...]]}."""
        return {"re": np.real(self.entries).tolist(), "im": np.imag(self.entries).tolist()}


class instrument:
    """A complete, shape consistent list of Kraus operators. Create with validate_instrument()."""

    __slots__ = ("kraus",)

    def __init__(self, kraus: tuple[kraus_operator, ...]) -> None:
        self.kraus: tuple[kraus_operator, ...] = kraus

    def __len__(self) -> int:
        return len(self.kraus)

    def __iter__(self):
        return iter(self.kraus)

    @property
    def out_dim(self) -> int:
        """Output dimension of every operator."""
        return self.kraus[0].out_dim

    @property
    def in_dim(self) -> int:
        """Input dimension of every operator."""
        return self.kraus[0].in_dim

    def to_json(self) -> InstrumentJSON:
        """JSON form {"out_dim": ..., "in_dim": d, "kraus": [{"re": ..., "im": ...}, ...]}."""
        return {"out_dim": self.out_dim, "in_dim": self.in_dim, "kraus": [k.to_json() for k in self.kraus]}

    @classmethod
    def from_json(cls, document: dict[str, Any]) -> "instrument":
        """Create (and validate) from the JSON form."""
        if not instrument_validator.validate(document):
            raise ValueError(text_token({"E05000": {"error": instrument_validator.error_str()}}))
        return validate_instrument(
            [kraus_operator(np.array(k["re"], dtype=float) + 1j * np.array(k["im"], dtype=float)) for k in document["kraus"]]
        )


class selective_outcome(NamedTuple):
    """Probability of outcome n and the normalised post-measurement state (None if p < 1e-12)."""

    probability: float
    state: density_matrix | None


class c2b_check(NamedTuple):
    """The chain avg <= d|a| <= 2(d - 1)|a| for one family state and instrument."""

    avg: float
    bound_da: float
    ctr: float
    holds: bool


class c3_check(NamedTuple):
    """Average coherence of an ensemble (lhs) vs. coherence of its mixture (rhs)."""

    lhs: float
    rhs: float
    holds: bool


class c2a_check(NamedTuple):
    """Trace distance coherence before and after a nonselective channel."""

    before: float
    after: float
    holds: bool


def _nonzero(entries: ComplexMatrix) -> np.ndarray:
    return np.abs(entries) > ZERO_TOL


def is_incoherent_kraus(k: kraus_operator) -> bool:
    """True if every column has at most one non-zero entry (maps diagonal states to diagonal states)."""
    return bool(np.all(np.sum(_nonzero(k.entries), axis=0) <= 1))


def is_strictly_incoherent(k: kraus_operator) -> bool:
    """True if every column and every row has at most one non-zero entry."""
    nonzero = _nonzero(k.entries)
    return bool(np.all(np.sum(nonzero, axis=0) <= 1) and np.all(np.sum(nonzero, axis=1) <= 1))


def validate_instrument(ks: Sequence[kraus_operator]) -> instrument:
    """Check a list of Kraus operators is shape consistent and complete.

    Raises ShapeError for an empty or inconsistent list and CompletenessError (carrying the worst
    entry deviation) when sum K^dagger K differs from the identity by more than 1e-10.
    """
    if not ks:
        raise ShapeError("An instrument needs at least one Kraus operator.")
    shape = ks[0].entries.shape
    for index, k in enumerate(ks):
        if k.entries.shape != shape:
            raise ShapeError(f"Kraus operator {index} has shape {k.entries.shape}, expected {shape}.")
    total: ComplexMatrix = sum((k.entries.conj().T @ k.entries for k in ks), np.zeros((shape[1], shape[1]), dtype=complex))
    deviation = float(np.max(np.abs(total - np.eye(shape[1]))))
    if deviation > TOL:
        raise CompletenessError(deviation)
    return instrument(tuple(ks))


def _check_input(inst: instrument, rho: density_matrix) -> None:
    if inst.in_dim != rho.dim:
        raise DimensionError(f"Instrument input dimension {inst.in_dim} differs from state dimension {rho.dim}.")


def apply_selective(inst: instrument, rho: density_matrix) -> list[selective_outcome]:
    """Outcome n has probability tr(K_n rho K_n^dagger) and state K_n rho K_n^dagger / p_n."""
    _check_input(inst, rho)
    outcomes: list[selective_outcome] = []
    for k in inst:
        branch: ComplexMatrix = k.entries @ rho.entries @ k.entries.conj().T
        branch = (branch + branch.conj().T) / 2
        probability = max(0.0, float(np.real(np.trace(branch))))
        outcomes.append(selective_outcome(probability, density_matrix(branch / probability) if probability >= ZERO_TOL else None))
    return outcomes


def apply_channel(inst: instrument, rho: density_matrix) -> density_matrix:
    """sum_n K_n rho K_n^dagger."""
    _check_input(inst, rho)
    return density_matrix(sum(k.entries @ rho.entries @ k.entries.conj().T for k in inst))


def random_sio_instrument(d: int, n_kraus: int, seed: int, out_dim: int = 2) -> instrument:
    """Seeded random strictly incoherent instrument of n_kraus out_dim x d operators.

    Each operator row is a slot that hosts at most one column. Every column gets one slot by a
    random matching, then each spare slot is given, with probability 1/2, a random column its
    operator does not already host. The squared magnitudes of a column split by a flat Dirichlet
    over its slots and every entry gets a random phase, so sum K^dagger K = I.

    Raises GenerationError if n_kraus * out_dim < d.
    """
    if d < 2 or out_dim < 1 or n_kraus < 1:
        raise DimensionError(f"Need d >= 2, out_dim >= 1 and n_kraus >= 1 but got {d}, {out_dim}, {n_kraus}.")
    if n_kraus * out_dim < d:
        raise GenerationError(0, f"{n_kraus} operators with {out_dim} rows cannot host {d} columns.")
    rng = rng_from_seed(seed)
    slots: list[tuple[int, int]] = [(n, r) for n in range(n_kraus) for r in range(out_dim)]
    order = rng.permutation(len(slots))
    column_slots: list[list[tuple[int, int]]] = [[] for _ in range(d)]
    hosted: list[set[int]] = [set() for _ in range(n_kraus)]
    for column, slot in enumerate(order[:d]):
        column_slots[column].append(slots[slot])
        hosted[slots[slot][0]].add(column)
    for slot in order[d:]:
        operator = slots[slot][0]
        free = [column for column in range(d) if column not in hosted[operator]]
        if free and rng.random() < 0.5:
            column = free[int(rng.integers(len(free)))]
            column_slots[column].append(slots[slot])
            hosted[operator].add(column)
    matrices = np.zeros((n_kraus, out_dim, d), dtype=complex)
    for column, covering in enumerate(column_slots):
        weights = rng.dirichlet(np.ones(len(covering)))
        phases = rng.uniform(0.0, 2 * pi, len(covering))
        for (operator, row), weight, phase in zip(sorted(covering), weights, phases):
            matrices[operator, row, column] = np.sqrt(weight) * np.exp(1j * phase)
    if _LOG_DEBUG:
        _logger.debug(text_token({"I05000": {"d": d, "n_kraus": n_kraus, "seed": seed, "slots": column_slots}}))
    return validate_instrument([kraus_operator(matrix) for matrix in matrices])


def random_incoherent_instrument(d: int, seed: int, out_dim: int | None = None, groups: int = 2) -> instrument:
    """Seeded random incoherent instrument of out_dim x d operators (out_dim defaults to d).

    Every group draws a random map from columns to rows, so several columns may share a row. A
    group with largest row load m contributes m operators K_n with entry sqrt(t_j) w^(n g_j) e^(i phi_j)
    in column j, where w = exp(2 pi i / m) and g_j numbers the columns sharing a row. Columns
    sharing a row have distinct g_j, so the Fourier sum cancels their cross terms in sum K^dagger K.
    The weights t_j of a column split over the groups by a flat Dirichlet, so sum K^dagger K = I.
    """
    rows: int = d if out_dim is None else out_dim
    if d < 2 or rows < 1 or groups < 1:
        raise DimensionError(f"Need d >= 2, out_dim >= 1 and groups >= 1 but got {d}, {rows}, {groups}.")
    rng = rng_from_seed(seed)
    weights = rng.dirichlet(np.ones(groups), size=d)
    matrices: list[ComplexMatrix] = []
    for group in range(groups):
        targets = rng.integers(rows, size=d)
        labels = np.zeros(d, dtype=int)
        for row in np.unique(targets):
            members = np.nonzero(targets == row)[0]
            labels[members] = np.arange(members.size)
        m = int(np.max(np.bincount(targets)))
        phases = np.exp(1j * rng.uniform(0.0, 2 * pi, d))
        for n in range(m):
            matrix = np.zeros((rows, d), dtype=complex)
            matrix[targets, np.arange(d)] = np.sqrt(weights[:, group]) * np.exp(2j * pi * n * labels / m) * phases / np.sqrt(m)
            matrices.append(matrix)
    return validate_instrument([kraus_operator(matrix) for matrix in matrices])


def avg_coherence_selective(inst: instrument, rho: density_matrix) -> float:
    """sum_n p_n C_tr(rho_n) for a qubit output instrument. Zero probability branches add 0."""
    if inst.out_dim != 2:
        raise DimensionError(f"Average selective coherence needs out_dim 2 but got {inst.out_dim}.")
    return float(sum(o.probability * c_tr_qubit(o.state) for o in apply_selective(inst, rho) if o.state is not None))


def avg_coherence_selective_numeric(inst: instrument, rho: density_matrix, config: SolverConfig | None = None) -> float:
    """sum_n p_n C_tr(rho_n) with the numeric solver, for out_dim up to 4."""
    if inst.out_dim > _NUMERIC_MAX_DIM:
        raise DimensionError(f"Numeric selective coherence is limited to out_dim <= {_NUMERIC_MAX_DIM} but got {inst.out_dim}.")
    return float(sum(o.probability * closest_incoherent(o.state, config).value for o in apply_selective(inst, rho) if o.state is not None))


def check_c2b_family(f: family_state, inst: instrument) -> c2b_check:
    """Check sum_n p_n C_tr(rho_n) <= d|a| <= 2(d - 1)|a| for a strictly incoherent 2 x d instrument.

    Raises SIOError naming the first operator that is not strictly incoherent.
    """
    for index, k in enumerate(inst):
        if not is_strictly_incoherent(k):
            raise SIOError(index)
    avg: float = avg_coherence_selective(inst, f.to_density())
    bound_da: float = f.dim * abs(f.a)
    ctr: float = 2 * (f.dim - 1) * abs(f.a)
    holds: bool = avg <= bound_da + _C2B_SLACK and bound_da <= ctr + _CHAIN_SLACK
    if not holds:
        _logger.warning(text_token({"W05000": {"avg": avg, "bound_da": bound_da, "state": f}}))
    return c2b_check(avg, bound_da, ctr, holds)


def explore_c2b_family(f: family_state, inst: instrument, config: SolverConfig | None = None) -> c2b_check:
    """The c2b chain for a strictly incoherent instrument of any out_dim up to 4.

    Qubit outputs use the closed form. Other outputs use the numeric solver and the result is a
    record, not a claim: nothing is logged when the chain does not hold.
    """
    for index, k in enumerate(inst):
        if not is_strictly_incoherent(k):
            raise SIOError(index)
    if inst.out_dim == 2:
        return check_c2b_family(f, inst)
    avg: float = avg_coherence_selective_numeric(inst, f.to_density(), config)
    bound_da: float = f.dim * abs(f.a)
    ctr: float = 2 * (f.dim - 1) * abs(f.a)
    return c2b_check(avg, bound_da, ctr, avg <= bound_da + _C2B_SLACK and bound_da <= ctr + _CHAIN_SLACK)


def _measure(measure: MeasureName, rho: density_matrix, config: SolverConfig | None) -> float:
    if measure == "l1":
        return c_l1(rho)
    if measure == "rel_entropy":
        return c_rel_entropy(rho)
    if rho.dim == 2:
        return c_tr_qubit(rho)
    if rho.dim > _NUMERIC_MAX_DIM:
        raise DimensionError(f"Trace distance convexity checks are limited to dim <= {_NUMERIC_MAX_DIM}.")
    return closest_incoherent(rho, config).value


def check_c3_convexity(
    measure: MeasureName, ensemble: Iterable[tuple[float, density_matrix]], config: SolverConfig | None = None
) -> c3_check:
    """Check sum_n p_n C(rho_n) >= C(sum_n p_n rho_n).

    Trace distance variants use the qubit closed form at dim 2 and the numeric solver up to dim 4.
    """
    members: list[tuple[float, density_matrix]] = list(ensemble)
    if not members:
        raise PreconditionError("The ensemble is empty.")
    weights = np.array([weight for weight, _ in members], dtype=float)
    if np.any(weights < 0) or abs(float(np.sum(weights)) - 1.0) > TOL:
        raise PreconditionError(f"Ensemble weights {weights.tolist()} are not a probability vector.")
    dim: int = members[0][1].dim
    if any(rho.dim != dim for _, rho in members):
        raise DimensionError("Ensemble members have different dimensions.")
    lhs = float(sum(weight * _measure(measure, rho, config) for weight, rho in members))
    mixture = density_matrix(sum(weight * rho.entries for weight, rho in members))
    rhs = _measure(measure, mixture, config)
    return c3_check(lhs, rhs, lhs >= rhs - _C3_SLACK)


def check_c2a_nonselective(inst: instrument, rho: density_matrix, config: SolverConfig | None = None) -> c2a_check:
    """Check C_tr(Lambda(rho)) <= C_tr(rho) + 1e-6 for an incoherent channel Lambda, dims <= 4."""
    if not all(is_incoherent_kraus(k) for k in inst):
        raise PreconditionError("Every Kraus operator must be incoherent.")
    if max(rho.dim, inst.out_dim) > _NUMERIC_MAX_DIM:
        raise DimensionError(f"The nonselective check is limited to dims <= {_NUMERIC_MAX_DIM}.")
    before: float = closest_incoherent(rho, config).value
    after: float = closest_incoherent(apply_channel(inst, rho), config).value
    return c2a_check(before, after, after <= before + _C2A_SLACK)
