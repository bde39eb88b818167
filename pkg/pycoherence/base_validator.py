"""Extension to the Cerberus Validator with common checks."""

from logging import Logger, NullHandler, getLogger
from math import isfinite
from os import W_OK, access
from os.path import abspath, dirname, isdir, isfile
from pprint import pformat
from typing import Any, Callable

from cerberus import Validator

_logger: Logger = getLogger(__name__)
_logger.addHandler(NullHandler())


class base_validator(Validator):
    """Additional format checks."""

    def __init__(self, *args, **kwargs) -> None:
        # Cerberus does some complex dynamic definition that pyright cannot statically resolve
        self.document: Any = None
        super().__init__(*args, **kwargs)
        self._error: Callable[[str, str], None] = super()._error  # type: ignore
        self.schema: Any = super().schema  # type: ignore
        self.normalized: Callable = super().normalized  # type: ignore
        self.validate: Callable = super().validate  # type: ignore

    def error_str(self) -> str:
        """Prettier format to a list of errors."""
        return "\n".join((field + ": " + pformat(error) for field, error in self.errors.items()))  # type: ignore

    def _iswriteable(self, field: str, value: Any) -> bool:
        """Validate value is a path that can be created or overwritten."""
        folder: str = dirname(abspath(value))
        if isfile(value) and not access(value, W_OK):
            self._error(field, f"{value} is not writeable.")
            return False
        if not isdir(folder) or not access(folder, W_OK):
            self._error(field, f"{folder} is not a writeable directory.")
            return False
        return True

    def _isfinitematrix(self, field: str, value: Any) -> bool:
        """Validate value is a rectangular list of lists of finite numbers."""
        if not value or any(len(row) != len(value[0]) for row in value):
            self._error(field, "Matrix rows must be non-empty and of equal length.")
            return False
        if not all(isfinite(entry) for row in value for entry in row):
            self._error(field, "Matrix entries must be finite.")
            return False
        return True
