"""Row iterators for report output."""

from logging import DEBUG, Logger, NullHandler, getLogger
from typing import Any, Callable, Iterable, Iterator, Mapping, Self

from .common import format_double

_logger: Logger = getLogger(__name__)
_logger.addHandler(NullHandler())
_LOG_DEBUG: bool = _logger.isEnabledFor(DEBUG)


class _base_iter:
    """Iterator returning a container of converted values from rows.

    The order of the containers returned is the same as the order of rows.
    Each value is converted by the conversion function given for its column or by
    format_double() if none was given.
    """

    def __init__(
        self,
        columns: Iterable[str],
        rows: Iterable[Iterable[Any]],
        conversions: Mapping[str, Callable[[Any], Any]] | None = None,
    ) -> None:
        """Initialise.

        Args
        ----
        columns: Column names for each of the rows.
        rows: Rows with values in the order of columns.
        conversions: Per column conversion functions.
        """
        self.columns: tuple[str, ...] = tuple(columns)
        self.rows: Iterator[Iterable[Any]] = iter(rows)
        _conversions = conversions or {}
        self.conversions: tuple[Callable[[Any], Any], ...] = tuple(_conversions.get(c, format_double) for c in self.columns)

    def __iter__(self) -> Self:
        """Self iteration."""
        return self

    def __next__(self) -> Any:
        """Never gets run."""
        raise NotImplementedError


class tuple_iter(_base_iter):
    """Iterator returning a tuple of converted values."""

    def __next__(self) -> tuple[Any, ...]:
        """Return next value."""
        return tuple(f(v) for f, v in zip(self.conversions, next(self.rows), strict=True))

