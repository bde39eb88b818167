"""Quantum states in a fixed incoherent (computational) basis.

Values are immutable after construction: the underlying numpy arrays are marked read-only.
"""

from json import load
from logging import DEBUG, Logger, NullHandler, getLogger
from math import sqrt
from typing import Any, Iterable

import numpy as np
from numpy.linalg import eigvalsh
from text_token import register_token_code, text_token

from .common import HERMITIAN_TOL, SUM_TOL, TOL, ZERO_TOL, rng_from_seed
from .errors import DimensionError, GenerationError, NormalizationError, NotAStateError, ShapeError
from .matcore import as_hermitian
from .pycoherence_typing import (
    ComplexMatrix,
    DensityMatrixJSON,
    DiagonalStateJSON,
    FamilyStateJSON,
    RealVector,
)
from .validators import density_matrix_validator, diagonal_state_validator, family_state_validator

_logger: Logger = getLogger(__name__)
_logger.addHandler(NullHandler())
_LOG_DEBUG: bool = _logger.isEnabledFor(DEBUG)

register_token_code("E02000", "Invalid {kind} document:\n{error}")
register_token_code("E02001", "Cannot tell which kind of state the document describes. Keys: {keys}.")
register_token_code("I02000", "random_family_state(d={d}, seed={seed}) accepted a={a} after {attempts} attempts.")

_MAX_ATTEMPTS = 1000


def _read_only(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


def _min_eigenvalue(matrix: np.ndarray) -> float:
    return float(eigvalsh(matrix)[0])


class density_matrix:
    """A d x d Hermitian, positive semidefinite, unit trace matrix.

    Construction checks Hermiticity within hermitian_tol (1e-12) and then symmetrises exactly, checks
    the trace is 1 within tol (1e-10) and checks the smallest eigenvalue >= -tol.
    """

    __slots__ = ("entries",)

    def __init__(self, entries: Any, tol: float = TOL, hermitian_tol: float = HERMITIAN_TOL) -> None:
        """Validate and store entries (anything numpy converts to a square complex matrix)."""
        try:
            matrix: ComplexMatrix = as_hermitian(entries, hermitian_tol)
        except ShapeError as exc:
            raise DimensionError(str(exc)) from exc
        except ValueError as exc:
            raise NotAStateError(float("nan"), hermitian_tol) from exc
        trace = float(np.real(np.trace(matrix)))
        if abs(trace - 1.0) > tol:
            raise NormalizationError(trace, tol)
        min_eigenvalue: float = _min_eigenvalue(matrix)
        if min_eigenvalue < -tol:
            raise NotAStateError(min_eigenvalue, tol)
        self.entries: ComplexMatrix = _read_only(matrix)

    def __repr__(self) -> str:
        return f"density_matrix({self.entries.tolist()!r})"

    @property
    def dim(self) -> int:
        """Hilbert space dimension d."""
        return self.entries.shape[0]

    def min_eigenvalue(self) -> float:
        """Smallest eigenvalue of the state."""
        return _min_eigenvalue(self.entries)

    def is_diagonal(self) -> bool:
        """True if every off-diagonal entry is exactly zero."""
        return not np.any(self.entries[~np.eye(self.dim, dtype=bool)])

    def to_json(self) -> DensityMatrixJSON:
        """JSON form {"dim": d, "re": [[...]], "im": [[...]]}."""
        return {"dim": self.dim, "re": np.real(self.entries).tolist(), "im": np.imag(self.entries).tolist()}

    @classmethod
    def from_json(cls, document: dict[str, Any]) -> "density_matrix":
        """Create from the JSON form."""
        if not density_matrix_validator.validate(document):
            raise ValueError(text_token({"E02000": {"kind": "density matrix", "error": density_matrix_validator.error_str()}}))
        return cls(np.array(document["re"], dtype=float) + 1j * np.array(document["im"], dtype=float))


class diagonal_state:
    """An incoherent state given by its probability vector p."""

    __slots__ = ("p",)

    def __init__(self, p: Iterable[float]) -> None:
        """Validate p_i >= 0 (within ZERO_TOL) and sum(p) = 1 within SUM_TOL."""
        vector: RealVector = np.array(list(p), dtype=float)
        if vector.ndim != 1 or vector.size == 0:
            raise DimensionError("A diagonal state needs a non-empty probability vector.")
        if np.any(vector < -ZERO_TOL):
            raise NotAStateError(float(vector.min()), ZERO_TOL)
        total = float(np.sum(vector))
        if abs(total - 1.0) > SUM_TOL:
            raise NormalizationError(total, SUM_TOL)
        self.p: RealVector = _read_only(vector)

    def __repr__(self) -> str:
        return f"diagonal_state({self.p.tolist()!r})"

    @property
    def dim(self) -> int:
        """Hilbert space dimension d."""
        return self.p.size

    def to_density(self) -> density_matrix:
        """diag(p) as a density matrix."""
        return density_matrix(np.diag(self.p))

    def to_json(self) -> DiagonalStateJSON:
        """JSON form {"p": [...]}."""
        return {"p": self.p.tolist()}

    @classmethod
    def from_json(cls, document: dict[str, Any]) -> "diagonal_state":
        """Create from the JSON form."""
        if not diagonal_state_validator.validate(document):
            raise ValueError(text_token({"E02000": {"kind": "diagonal state", "error": diagonal_state_validator.error_str()}}))
        return cls(document["p"])


class family_state:
    """Arbitrary real diagonal x with one common real off-diagonal element a.

    The assembled matrix has x on the diagonal and a in every off-diagonal slot.
    """

    __slots__ = ("x", "a")

    def __init__(self, x: Iterable[float], a: float) -> None:
        """Validate and store (x, a). See make_family_state()."""
        vector: RealVector = np.array(list(x), dtype=float)
        if vector.ndim != 1 or vector.size < 2:
            raise DimensionError(f"A family state needs d >= 2 populations but got {vector.size}.")
        total = float(np.sum(vector))
        if abs(total - 1.0) > SUM_TOL:
            raise NormalizationError(total, SUM_TOL)
        self.x: RealVector = _read_only(vector)
        self.a: float = float(a)
        min_eigenvalue: float = _min_eigenvalue(self.matrix())
        if min_eigenvalue < -TOL:
            raise NotAStateError(min_eigenvalue, TOL)

    def __repr__(self) -> str:
        return f"family_state(x={self.x.tolist()!r}, a={self.a!r})"

    @property
    def dim(self) -> int:
        """Hilbert space dimension d."""
        return self.x.size

    def matrix(self) -> np.ndarray:
        """The assembled real symmetric matrix."""
        matrix = np.full((self.dim, self.dim), self.a)
        np.fill_diagonal(matrix, self.x)
        return matrix

    def to_density(self) -> density_matrix:
        """The assembled d x d density matrix."""
        return density_matrix(self.matrix())

    def to_json(self) -> FamilyStateJSON:
        """JSON form {"x": [...], "a": a}."""
        return {"x": self.x.tolist(), "a": self.a}

    @classmethod
    def from_json(cls, document: dict[str, Any]) -> "family_state":
        """Create from the JSON form."""
        if not family_state_validator.validate(document):
            raise ValueError(text_token({"E02000": {"kind": "family state", "error": family_state_validator.error_str()}}))
        return cls(document["x"], document["a"])


def make_family_state(x: Iterable[float], a: float) -> family_state:
    """Create a validated family state.

    Args
    ----
    x: Diagonal populations, length d >= 2, summing to 1 within 1e-12.
    a: The common real off-diagonal element.

    Returns
    -------
    family_state. Raises DimensionError, NormalizationError or NotAStateError (which reports
    the most negative eigenvalue of the assembled matrix).
    """
    return family_state(x, a)


def uniform_family_state(d: int, a: float) -> family_state:
    """Family state with x_i = 1/d."""
    return family_state(np.full(d, 1.0 / d), a)


def family_a_interval_uniform(d: int) -> tuple[float, float]:
    """PSD-feasible interval of a for the uniform family x_i = 1/d.

    The spectrum is {1/d + (d - 1)a, 1/d - a (d - 1 times)}.
    """
    if d < 2:
        raise DimensionError(f"d must be >= 2 but got {d}.")
    return -1.0 / (d * (d - 1)), 1.0 / d


def maximally_coherent(d: int) -> density_matrix:
    """Projector onto the uniform superposition: every entry is 1/d."""
    if d < 2:
        raise DimensionError(f"The maximally coherent state needs d >= 2 but got {d}.")
    return density_matrix(np.full((d, d), 1.0 / d))


def dephase(rho: density_matrix) -> diagonal_state:
    """Delete every off-diagonal element, returning the diagonal as a probability vector."""
    diagonal: RealVector = np.real(np.diagonal(rho.entries)).copy()
    diagonal[diagonal < 0] = 0.0
    if abs(np.sum(diagonal) - 1.0) > SUM_TOL:
        diagonal /= np.sum(diagonal)
    return diagonal_state(diagonal)


def random_density_matrix(d: int, seed: int) -> density_matrix:
    """Seeded random mixed state G G^dagger / tr(G G^dagger) with G a complex Ginibre matrix."""
    if d < 2:
        raise DimensionError(f"d must be >= 2 but got {d}.")
    rng = rng_from_seed(seed)
    ginibre: ComplexMatrix = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    product: ComplexMatrix = ginibre @ ginibre.conj().T
    return density_matrix(product / np.real(np.trace(product)))


def random_family_state(d: int, seed: int) -> family_state:
    """Seeded random family state.

    x is drawn from a flat Dirichlet. |a| is drawn uniformly below the 2x2 minor bound
    min sqrt(x_i x_j) and halved until the assembled matrix is PSD. The sign of a is +/-1 with
    equal probability.

    Raises GenerationError if no PSD sample is found in 1000 attempts.
    """
    if d < 2:
        raise DimensionError(f"d must be >= 2 but got {d}.")
    rng = rng_from_seed(seed)
    x: RealVector = rng.dirichlet(np.ones(d))
    x = x / np.sum(x)
    sign: float = 1.0 if rng.random() < 0.5 else -1.0
    sorted_x = np.sort(x)
    a: float = sign * rng.uniform(0.0, sqrt(sorted_x[0] * sorted_x[1]))
    matrix = np.full((d, d), a)
    for attempt in range(1, _MAX_ATTEMPTS + 1):
        np.fill_diagonal(matrix, x)
        if _min_eigenvalue(matrix) >= -TOL:
            if _LOG_DEBUG:
                _logger.debug(text_token({"I02000": {"d": d, "seed": seed, "a": a, "attempts": attempt}}))
            return family_state(x, a)
        a /= 2
        matrix.fill(a)
    raise GenerationError(_MAX_ATTEMPTS, f"no PSD family state found for d={d}, seed={seed}.")


def state_from_json(document: dict[str, Any]) -> density_matrix | family_state | diagonal_state:
    """Create the state described by a JSON document, detecting its kind from its keys."""
    if "re" in document:
        return density_matrix.from_json(document)
    if "x" in document:
        return family_state.from_json(document)
    if "p" in document:
        return diagonal_state.from_json(document)
    raise ValueError(text_token({"E02001": {"keys": sorted(document)}}))


def load_state(path: str) -> density_matrix | family_state | diagonal_state:
    """Load a state from a JSON file."""
    with open(path, "r", encoding="utf8") as file_ptr:
        document: Any = load(file_ptr)
    if not isinstance(document, dict):
        raise ValueError(text_token({"E02001": {"keys": type(document).__name__}}))
    return state_from_json(document)
