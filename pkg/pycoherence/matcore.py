"""Dense complex matrix primitives.

Eigen and singular value problems are delegated to LAPACK through numpy.
All functions are pure: inputs are never modified and results are new arrays.
"""

from logging import DEBUG, Logger, NullHandler, getLogger
from typing import Any, NamedTuple

import numpy as np
from numpy.linalg import LinAlgError, eigh, eigvalsh, svd
from text_token import register_token_code, text_token

from .common import HERMITIAN_TOL, TOL, descending_order
from .errors import EigenConvergenceError, ShapeError
from .pycoherence_typing import ComplexMatrix, HermitianMatrix, RealVector

_logger: Logger = getLogger(__name__)
_logger.addHandler(NullHandler())
_LOG_DEBUG: bool = _logger.isEnabledFor(DEBUG)

register_token_code("I01000", "eig_hermitian: dim {dim}, reconstruction residual {residual}, unitarity residual {unitarity}.")
register_token_code("E01000", "Matrix is not Hermitian: max |m - m^dagger| = {deviation} exceeds {tol}.")

# Reconstruction residual above this (relative to the largest entry) is treated as solver failure.
_RESIDUAL_CAP: float = 1e-8


class eigen_system(NamedTuple):
    """Eigenvalues (descending) and the unitary whose columns are the eigenvectors."""

    eigenvalues: RealVector
    eigenvectors: ComplexMatrix


class majorization(NamedTuple):
    """Result of the diagonal vs. singular value majorization check."""

    holds: bool
    prefix_gaps: RealVector


def as_complex_matrix(m: Any) -> ComplexMatrix:
    """Coerce m to a 2-D complex128 array with finite entries.

    Args
    ----
    m: Anything numpy can turn into a 2-D array.

    Returns
    -------
    A new complex128 array.
    """
    matrix: ComplexMatrix = np.array(m, dtype=np.complex128)
    if matrix.ndim != 2 or 0 in matrix.shape:
        raise ShapeError(f"Expected a non-empty 2-D matrix but got shape {matrix.shape}.")
    if not np.all(np.isfinite(matrix)):
        raise ValueError("Matrix entries must be finite (no NaN or Inf).")
    return matrix


def as_hermitian(m: Any, tol: float = HERMITIAN_TOL) -> HermitianMatrix:
    """Validate m is Hermitian within tol and return the exactly Hermitian (m + m^dagger) / 2."""
    matrix: ComplexMatrix = as_complex_matrix(m)
    if matrix.shape[0] != matrix.shape[1]:
        raise ShapeError(f"A Hermitian matrix must be square but got shape {matrix.shape}.")
    deviation = float(np.max(np.abs(matrix - matrix.conj().T)))
    if deviation > tol:
        raise ValueError(text_token({"E01000": {"deviation": deviation, "tol": tol}}))
    return (matrix + matrix.conj().T) / 2


def eig_hermitian(m: HermitianMatrix) -> eigen_system:
    """Eigendecomposition of a Hermitian matrix with eigenvalues in descending order.

    Ties keep the order LAPACK returns them in. U diag(lambda) U^dagger reproduces m.

    Args
    ----
    m: A Hermitian matrix (see as_hermitian()).

    Returns
    -------
    eigen_system(eigenvalues, eigenvectors)
    """
    matrix: HermitianMatrix = np.asarray(m, dtype=np.complex128)
    dim: int = matrix.shape[0]
    try:
        values, vectors = eigh(matrix)
    except LinAlgError as exc:
        raise EigenConvergenceError(dim, float("nan")) from exc
    order = descending_order(values)
    values, vectors = values[order], vectors[:, order]
    scale: float = max(1.0, float(np.max(np.abs(matrix))))
    residual = float(np.max(np.abs((vectors * values) @ vectors.conj().T - matrix)))
    if residual > _RESIDUAL_CAP * scale:
        raise EigenConvergenceError(dim, residual)
    if _LOG_DEBUG:
        unitarity = float(np.max(np.abs(vectors.conj().T @ vectors - np.eye(dim))))
        _logger.debug(text_token({"I01000": {"dim": dim, "residual": residual, "unitarity": unitarity}}))
    return eigen_system(values, vectors)


def singular_values(m: ComplexMatrix) -> RealVector:
    """Singular values of m, descending, min(rows, cols) of them."""
    matrix: ComplexMatrix = as_complex_matrix(m)
    try:
        return svd(matrix, compute_uv=False)
    except LinAlgError as exc:
        raise EigenConvergenceError(min(matrix.shape), float("nan")) from exc


def trace_norm(m: ComplexMatrix) -> float:
    """Sum of the singular values of m."""
    return float(np.sum(singular_values(m)))


def hermitian_trace_norm(m: HermitianMatrix) -> float:
    """Sum of |eigenvalues| of a Hermitian m. Equal to trace_norm(m) but cheaper."""
    try:
        return float(np.sum(np.abs(eigvalsh(m))))
    except LinAlgError as exc:
        raise EigenConvergenceError(len(m), float("nan")) from exc


def check_diag_majorization(m: ComplexMatrix, tol: float = TOL) -> majorization:
    """Check the main diagonal magnitudes are weakly majorized by the singular values.

    Every prefix sum of the absolutely descending diagonal entries must not exceed the
    matching prefix sum of the descending singular values. The check is a theorem so a
    failure indicates a numerical problem.

    Args
    ----
    m: Any finite complex matrix.
    tol: Absolute slack on each prefix comparison.

    Returns
    -------
    majorization(holds, prefix_gaps) where prefix_gaps[i] is the singular value prefix sum
    minus the diagonal prefix sum over the first i + 1 terms.
    """
    matrix: ComplexMatrix = as_complex_matrix(m)
    diagonal: RealVector = np.abs(np.diagonal(matrix))
    diagonal = diagonal[descending_order(diagonal)]
    gaps: RealVector = np.cumsum(singular_values(matrix)) - np.cumsum(diagonal)
    return majorization(bool(np.all(gaps >= -tol)), gaps)
