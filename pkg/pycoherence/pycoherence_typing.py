"""pycoherence typing."""

from typing import Any, Literal, NotRequired, TypedDict

import numpy as np
from numpy.typing import NDArray

ComplexMatrix = NDArray[np.complex128]
HermitianMatrix = NDArray[np.complex128]
RealVector = NDArray[np.float64]
MeasureName = Literal["l1", "rel_entropy", "trace_dist_closed", "trace_dist_numeric"]
ProofBranch = Literal["diagonal", "bolzano", "majorization"]


class SolverConfig(TypedDict):
    """Solver configuration."""

    max_iters: NotRequired[int]
    step_init: NotRequired[float]
    tol: NotRequired[float]
    restarts: NotRequired[int]
    window: NotRequired[int]
    seed: NotRequired[int]
    dephased_start: NotRequired[bool]


class SolverConfigNorm(TypedDict):
    """Normalized solver configuration."""

    max_iters: int
    step_init: float
    tol: float
    restarts: int
    window: int
    seed: int
    dephased_start: bool


class Diagnostics(TypedDict):
    """Solver diagnostics carried by a measure report."""

    iterations: int
    residual: float


class DensityMatrixJSON(TypedDict):
    """JSON form of a density matrix."""

    dim: int
    re: list[list[float]]
    im: list[list[float]]


class FamilyStateJSON(TypedDict):
    """JSON form of a family state."""

    x: list[float]
    a: float


class DiagonalStateJSON(TypedDict):
    """JSON form of a diagonal state."""

    p: list[float]


class MeasureReportJSON(TypedDict):
    """JSON form of a measure report."""

    measure: MeasureName
    value: float
    argmin: DiagonalStateJSON | None
    diagnostics: Diagnostics | None


class KrausJSON(TypedDict):
    """JSON form of a single Kraus operator."""

    re: list[list[float]]
    im: list[list[float]]


class InstrumentJSON(TypedDict):
    """JSON form of an instrument."""

    out_dim: int
    in_dim: int
    kraus: list[KrausJSON]


class RunManifest(TypedDict):
    """Reproducibility record embedded in every report."""

    command: str
    seed: int
    parameters: dict[str, Any]
    artifact_version: str
    timestamp: str


StateJSON = DensityMatrixJSON | FamilyStateJSON | DiagonalStateJSON
