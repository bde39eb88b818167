"""Closed form coherence measures."""

from logging import DEBUG, Logger, NullHandler, getLogger
from math import log2
from typing import Any, NamedTuple

import numpy as np
from numpy.linalg import eigvalsh
from text_token import register_token_code, text_token

from .common import ENTROPY_CUTOFF
from .errors import DimensionError
from .pycoherence_typing import Diagnostics, MeasureName, MeasureReportJSON, RealVector
from .states import density_matrix, dephase, diagonal_state, family_state
from .validators import measure_report_validator

_logger: Logger = getLogger(__name__)
_logger.addHandler(NullHandler())
_LOG_DEBUG: bool = _logger.isEnabledFor(DEBUG)

register_token_code("E03000", "Measure value {value} is negative.")
register_token_code("E03001", "Measure {measure} cannot carry an argmin.")
register_token_code("E03002", "Invalid measure report document:\n{error}")
register_token_code("I03000", "C_rel_entropy: S(dephased) = {s_diag}, S(rho) = {s_rho}.")

TRACE_DISTANCE_MEASURES: tuple[MeasureName, ...] = ("trace_dist_closed", "trace_dist_numeric")


class measure_report:
    """A coherence value with, for trace distance measures, the closest incoherent state found."""

    __slots__ = ("measure", "value", "argmin", "diagnostics")

    def __init__(
        self,
        measure: MeasureName,
        value: float,
        argmin: diagonal_state | None = None,
        diagnostics: Diagnostics | None = None,
    ) -> None:
        if value < 0:
            raise ValueError(text_token({"E03000": {"value": value}}))
        if argmin is not None and measure not in TRACE_DISTANCE_MEASURES:
            raise ValueError(text_token({"E03001": {"measure": measure}}))
        self.measure: MeasureName = measure
        self.value: float = float(value)
        self.argmin: diagonal_state | None = argmin
        self.diagnostics: Diagnostics | None = diagnostics

    def __repr__(self) -> str:
        return f"measure_report({self.to_json()!r})"

    def to_json(self) -> MeasureReportJSON:
        """JSON form {"measure": ..., "value": v, "argmin": {"p": [...]} | null, "diagnostics": {...} | null}."""
        return {
            "measure": self.measure,
            "value": self.value,
            "argmin": None if self.argmin is None else self.argmin.to_json(),
            "diagnostics": None if self.diagnostics is None else dict(self.diagnostics),  # type: ignore
        }

    @classmethod
    def from_json(cls, document: dict[str, Any]) -> "measure_report":
        """Create from the JSON form."""
        if not measure_report_validator.validate(document):
            raise ValueError(text_token({"E03002": {"error": measure_report_validator.error_str()}}))
        argmin = None if document.get("argmin") is None else diagonal_state(document["argmin"]["p"])
        return cls(document["measure"], document["value"], argmin, document.get("diagnostics"))


class mc_ordering(NamedTuple):
    """Trace distance, relative entropy and l1 coherence of the maximally coherent state."""

    ctr: float
    cr: float
    cl1: float
    ordered: bool


def c_l1(rho: density_matrix) -> float:
    """Sum of the magnitudes of every off-diagonal entry."""
    return float(np.sum(np.abs(rho.entries[~np.eye(rho.dim, dtype=bool)])))


def _entropy(eigenvalues: RealVector) -> float:
    kept = eigenvalues[eigenvalues >= ENTROPY_CUTOFF]
    return float(-np.sum(kept * np.log2(kept)))


def von_neumann_entropy(rho: density_matrix) -> float:
    """Von Neumann entropy in bits. Eigenvalues below 1e-14 contribute 0."""
    return _entropy(eigvalsh(rho.entries))


def c_rel_entropy(rho: density_matrix) -> float:
    """S(dephase(rho)) - S(rho) in bits. Exactly 0 for diagonal states."""
    if rho.is_diagonal():
        return 0.0
    s_diag: float = _entropy(dephase(rho).p)
    s_rho: float = von_neumann_entropy(rho)
    if _LOG_DEBUG:
        _logger.debug(text_token({"I03000": {"s_diag": s_diag, "s_rho": s_rho}}))
    return max(0.0, s_diag - s_rho)


def c_tr_family_closed(f: family_state) -> measure_report:
    """Closed form trace distance coherence 2(d - 1)|a|, attained at the dephased state."""
    return measure_report("trace_dist_closed", 2 * (f.dim - 1) * abs(f.a), diagonal_state(f.x))


def c_tr_qubit(rho: density_matrix) -> float:
    """Trace distance coherence of a qubit, 2|rho_01|."""
    if rho.dim != 2:
        raise DimensionError(f"The qubit closed form needs dim 2 but got {rho.dim}.")
    return 2 * float(abs(rho.entries[0, 1]))


def measure_ordering_mc(d: int) -> mc_ordering:
    """Coherence of the d dimensional maximally coherent state under three measures.

    Returns (2(d - 1)/d, log2 d, d - 1) and whether they are ordered ctr <= cr <= cl1.
    """
    if d < 2:
        raise DimensionError(f"d must be >= 2 but got {d}.")
    ctr, cr, cl1 = 2 * (d - 1) / d, log2(d), float(d - 1)
    return mc_ordering(ctr, cr, cl1, ctr <= cr <= cl1)
