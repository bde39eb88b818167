"""Common constants and helpers for pycoherence."""

from typing import Any

import numpy as np
from numpy.random import Generator, SeedSequence, default_rng

# Absolute tolerances. Operands are differences of density matrices so entries are O(1).
TOL: float = 1e-10
HERMITIAN_TOL: float = 1e-12
SUM_TOL: float = 1e-12
ZERO_TOL: float = 1e-12
ENTROPY_CUTOFF: float = 1e-14


def rng_from_seed(seed: int | SeedSequence) -> Generator:
    """Create a numpy generator from a 64-bit unsigned seed or a SeedSequence.

    Args
    ----
    seed: A non-negative integer < 2**64 or a SeedSequence.

    Returns
    -------
    A PCG64 backed numpy Generator. No global RNG state is touched.
    """
    if isinstance(seed, SeedSequence):
        return default_rng(seed)
    if not 0 <= int(seed) < 2**64:
        raise ValueError(f"Seed {seed} is not a 64-bit unsigned integer.")
    return default_rng(int(seed))


def derive_seed(*keys: int) -> int:
    """Derive a 64-bit unsigned seed from a tuple of non-negative integer keys.

    Used to give every Monte-Carlo trial its own independent, reproducible stream.
    """
    return int(SeedSequence(list(keys)).generate_state(1, dtype=np.uint64)[0])


def format_double(value: Any) -> str:
    """Format a number with 17 significant digits (lossless for IEEE-754 doubles).

    Non-floats (ints, bools, strings, None) are returned via str().
    """
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    if value is None:
        return ""
    return str(value)


def descending_order(values: np.ndarray) -> np.ndarray:
    """Indices that sort values descending. Ties keep their original order."""
    return np.argsort(-np.asarray(values), kind="stable")
