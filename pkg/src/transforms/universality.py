"""
Moment-concentration diagnostic for equivalent channels J = A Xi.
"""
from typing import Sequence

import numpy as np
from scipy.sparse.linalg import LinearOperator, aslinearoperator

from utils.errors import DimensionError

MAX_MOMENT = 4
MAX_DIAGNOSTIC_SIZE = 2048


def equivalent_operator(channel, transform) -> LinearOperator:
    """J = A Xi as a matrix-free operator."""
    if channel.n != transform.size:
        raise DimensionError(f"channel has {channel.n} columns, transform size is {transform.size}")

    def matmat(x):
        return channel.apply(transform.apply(x))

    def rmatmat(r):
        return transform.adjoint(channel.adjoint(r))

    return LinearOperator(
        (channel.m, channel.n),
        matvec=matmat,
        rmatvec=rmatmat,
        matmat=matmat,
        rmatmat=rmatmat,
        dtype=complex,
    )


def universality_diagnostic(operator, k: int = 1, probes: int = 128) -> float:
    """
    Max-norm distance of (J^H J)^k from its scaled identity.

    Columns of (J^H J)^k are formed exactly by pushing ``probes`` unit vectors
    at a time through the operator, 2k applications per column.
    """
    if not 1 <= k <= MAX_MOMENT:
        raise ValueError(f"moment order k must be in [1, {MAX_MOMENT}], got {k}")
    if probes < 1:
        raise ValueError(f"probes must be positive, got {probes}")
    op = aslinearoperator(operator)
    n = op.shape[1]
    if n > MAX_DIAGNOSTIC_SIZE:
        raise DimensionError(f"diagnostic is exact only up to N = {MAX_DIAGNOSTIC_SIZE}, got {n}")

    columns = []
    for start in range(0, n, probes):
        stop = min(start + probes, n)
        e = np.zeros((n, stop - start), dtype=complex)
        e[np.arange(start, stop), np.arange(stop - start)] = 1.0
        for _ in range(k):
            e = op.rmatmat(op.matmat(e))
        columns.append(e)
    gram_power = np.concatenate(columns, axis=1)
    scale = np.trace(gram_power).real / n
    return float(np.max(np.abs(gram_power - scale * np.eye(n))))


def concentration_slope(sizes: Sequence[int], values: Sequence[float]) -> float:
    """Least-squares slope of log(value) against log(N)."""
    sizes = np.asarray(sizes, dtype=float)
    values = np.asarray(values, dtype=float)
    if sizes.size < 2 or sizes.size != values.size:
        raise ValueError("need at least two (N, value) pairs of equal length")
    if np.any(values <= 0):
        raise ValueError("diagnostic values must be positive to fit a log-log slope")
    slope, _ = np.polyfit(np.log(sizes), np.log(values), 1)
    return float(slope)
