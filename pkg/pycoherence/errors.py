"""Domain errors for pycoherence.

Every error is a ValueError whose message is a rendered text_token.
"""

from text_token import register_token_code, text_token

register_token_code("E00000", "Trace {trace} differs from 1 by more than {tol}.")
register_token_code("E00001", "Not a quantum state: smallest eigenvalue {min_eigenvalue} is below -{tol}.")
register_token_code("E00002", "Dimension error: {reason}")
register_token_code("E00003", "Generation failed after {attempts} attempts: {reason}")
register_token_code("E00004", "Solver did not stabilise in {iterations} iterations. Best value found {best_value}.")
register_token_code("E00005", "Eigensolver failed for a {dim}x{dim} matrix. Reconstruction residual {residual}.")
register_token_code("E00006", "Precondition violated: {reason}")
register_token_code("E00007", "Kraus operators are not complete. Worst deviation from identity {deviation}.")
register_token_code("E00008", "Shape error: {reason}")
register_token_code("E00009", "Kraus operator {index} is not strictly incoherent.")


class coherence_error(ValueError):
    """Base of all pycoherence domain errors."""


class NormalizationError(coherence_error):
    """Trace (or probability sum) is not 1."""

    def __init__(self, trace: float, tol: float) -> None:
        self.trace: float = trace
        super().__init__(text_token({"E00000": {"trace": trace, "tol": tol}}))


class NotAStateError(coherence_error):
    """Matrix is not positive semidefinite (or not Hermitian)."""

    def __init__(self, min_eigenvalue: float, tol: float) -> None:
        self.min_eigenvalue: float = min_eigenvalue
        super().__init__(text_token({"E00001": {"min_eigenvalue": min_eigenvalue, "tol": tol}}))


class DimensionError(coherence_error):
    """Dimension outside of the supported range."""

    def __init__(self, reason: str) -> None:
        super().__init__(text_token({"E00002": {"reason": reason}}))


class GenerationError(coherence_error):
    """A seeded generator could not produce a valid sample."""

    def __init__(self, attempts: int, reason: str) -> None:
        self.attempts: int = attempts
        super().__init__(text_token({"E00003": {"attempts": attempts, "reason": reason}}))


class ConvergenceError(coherence_error):
    """The closest incoherent state search did not stabilise."""

    def __init__(self, best_value: float, iterations: int) -> None:
        self.best_value: float = best_value
        self.iterations: int = iterations
        super().__init__(text_token({"E00004": {"best_value": best_value, "iterations": iterations}}))


class EigenConvergenceError(coherence_error):
    """The Hermitian eigensolver or SVD failed."""

    def __init__(self, dim: int, residual: float) -> None:
        self.dim: int = dim
        self.residual: float = residual
        super().__init__(text_token({"E00005": {"dim": dim, "residual": residual}}))


class PreconditionError(coherence_error):
    """An operation was called outside its domain."""

    def __init__(self, reason: str) -> None:
        super().__init__(text_token({"E00006": {"reason": reason}}))


class CompletenessError(coherence_error):
    """Sum of K^dagger K is not the identity."""

    def __init__(self, deviation: float) -> None:
        self.deviation: float = deviation
        super().__init__(text_token({"E00007": {"deviation": deviation}}))


class ShapeError(coherence_error):
    """Matrix shapes are inconsistent."""

    def __init__(self, reason: str) -> None:
        super().__init__(text_token({"E00008": {"reason": reason}}))


class SIOError(coherence_error):
    """An instrument member is not a strictly incoherent operator."""

    def __init__(self, index: int) -> None:
        self.index: int = index
        super().__init__(text_token({"E00009": {"index": index}}))
