"""Validators for pycoherence."""

from json import load
from logging import Logger, NullHandler, getLogger
from os.path import dirname, join
from typing import Any

from .base_validator import base_validator

_logger: Logger = getLogger(__name__)
_logger.addHandler(NullHandler())


def _load_format(name: str) -> dict[str, Any]:
    """Load a cerberus schema from the formats folder."""
    with open(join(dirname(__file__), "formats", name), "r", encoding="utf8") as file_ptr:
        return load(file_ptr)


class _coherence_validator(base_validator):
    """Shared pycoherence check_with rules."""

    def _check_with_strictly_positive(self, field: str, value: Any) -> None:
        """Validate value > 0."""
        if value is not None and not value > 0:
            self._error(field, f"{value} must be strictly positive.")

    def _check_with_writeable_path(self, field: str, value: Any) -> None:
        """Validate an output path can be written."""
        if value is not None:
            self._iswriteable(field, value)

    def _check_with_not_below_d_min(self, field: str, value: Any) -> None:
        """Validate d_max >= d_min."""
        if value < self.document.get("d_min", 2):
            self._error(field, f"d_max {value} is less than d_min {self.document.get('d_min')}.")


class _density_matrix_validator(_coherence_validator):
    def _check_with_valid_part(self, field: str, value: Any) -> None:
        """Validate a real or imaginary part is a dim x dim matrix of finite numbers."""
        dim = self.document.get("dim")
        if self._isfinitematrix(field, value) and (len(value) != dim or len(value[0]) != dim):
            self._error(field, f"Expected a {dim}x{dim} matrix.")


class _instrument_validator(_coherence_validator):
    def _check_with_valid_kraus_shapes(self, field: str, value: Any) -> None:
        """Validate every Kraus operator is out_dim x in_dim."""
        shape: tuple[Any, Any] = (self.document.get("out_dim"), self.document.get("in_dim"))
        for index, kraus in enumerate(value):
            for part in ("re", "im"):
                matrix = kraus.get(part, [])
                if not self._isfinitematrix(f"{field}[{index}].{part}", matrix):
                    continue
                if (len(matrix), len(matrix[0])) != shape:
                    self._error(field, f"Kraus operator {index} {part} part is not {shape[0]}x{shape[1]}.")


PYCOHERENCE_SOLVER_CONFIG_SCHEMA: dict[str, Any] = _load_format("solver_config_format.json")
solver_config_validator: _coherence_validator = _coherence_validator(PYCOHERENCE_SOLVER_CONFIG_SCHEMA, purge_unknown=True)
density_matrix_validator: _density_matrix_validator = _density_matrix_validator(_load_format("density_matrix_format.json"))
family_state_validator: _coherence_validator = _coherence_validator(_load_format("family_state_format.json"))
diagonal_state_validator: _coherence_validator = _coherence_validator(_load_format("diagonal_state_format.json"))
measure_report_validator: _coherence_validator = _coherence_validator(_load_format("measure_report_format.json"))
instrument_validator: _instrument_validator = _instrument_validator(_load_format("instrument_format.json"))
verify_arguments_validator: _coherence_validator = _coherence_validator(_load_format("verify_arguments_format.json"), purge_unknown=True)
sweep_arguments_validator: _coherence_validator = _coherence_validator(_load_format("sweep_arguments_format.json"), purge_unknown=True)
