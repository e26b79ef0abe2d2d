"""
Random unitary modulation operators.

A RandomTransform is immutable after construction, so one instance can be
shared read-only by worker threads. Vectors are transformed along axis 0, which
lets callers pass an (N, B) block of columns.
"""
import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np
from scipy import fft as sp_fft

from utils.errors import DimensionError
from utils.validation import as_complex_vector, is_power_of_two

logger = logging.getLogger(__name__)

IID_MAX_SIZE = 2048


class TransformKind(str, Enum):
    IID = "iid"
    HAAR = "haar"
    PERMUTATION_DFT = "permutation_dft"
    PERMUTATION_HADAMARD = "permutation_hadamard"


def fwht(x: np.ndarray) -> np.ndarray:
    """Unitary fast Walsh-Hadamard transform (Sylvester ordering) along axis 0."""
    y = np.array(x, dtype=complex, copy=True)
    n = y.shape[0]
    if not is_power_of_two(n):
        raise ValueError(f"Hadamard transform needs a power-of-two length, got {n}")
    tail = y.shape[1:]
    h = 1
    while h < n:
        y = y.reshape((n // (2 * h), 2, h) + tail)
        top = y[:, 0] + y[:, 1]
        bottom = y[:, 0] - y[:, 1]
        y = np.stack((top, bottom), axis=1)
        h *= 2
    return y.reshape((n,) + tail) / np.sqrt(n)


@dataclass(frozen=True)
class RandomTransform:
    """Unitary (or approximately unitary, for IID) operator Xi."""

    kind: TransformKind
    size: int
    seed: int
    permutation: Optional[np.ndarray] = field(default=None, repr=False)
    dense_matrix: Optional[np.ndarray] = field(default=None, repr=False)

    def apply(self, s) -> np.ndarray:
        """x = Xi s."""
        s = as_complex_vector(s, self.size, "symbol vector")
        if self.dense_matrix is not None:
            return self.dense_matrix @ s
        if self.kind is TransformKind.PERMUTATION_DFT:
            u = sp_fft.fft(s, axis=0, norm="ortho")
        else:
            u = fwht(s)
        return u[self.permutation]

    def adjoint(self, x) -> np.ndarray:
        """s = Xi^H x."""
        x = as_complex_vector(x, self.size, "signal vector")
        if self.dense_matrix is not None:
            return self.dense_matrix.conj().T @ x
        z = np.empty_like(x)
        z[self.permutation] = x
        if self.kind is TransformKind.PERMUTATION_DFT:
            return sp_fft.ifft(z, axis=0, norm="ortho")
        return fwht(z)

    def to_dense(self) -> np.ndarray:
        """Materialize Xi; desk-scale diagnostics only."""
        if self.dense_matrix is not None:
            return self.dense_matrix.copy()
        return self.apply(np.eye(self.size, dtype=complex))


def _haar_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def make_transform(kind, size: int, seed: int) -> RandomTransform:
    """
    Build a random modulation operator.

    Equal (kind, size, seed) produce bit-identical operators.
    """
    try:
        kind = TransformKind(kind)
    except ValueError as e:
        raise ValueError(f"Unknown transform kind: {kind!r}") from e
    if size < 2:
        raise DimensionError(f"Transform size must be at least 2, got {size}")

    rng = np.random.default_rng(seed)
    if kind is TransformKind.IID:
        if size > IID_MAX_SIZE:
            raise DimensionError(f"IID transform is limited to N <= {IID_MAX_SIZE}, got {size}")
        dense = (rng.standard_normal((size, size)) + 1j * rng.standard_normal((size, size))) / np.sqrt(2.0 * size)
        return RandomTransform(kind, size, seed, dense_matrix=dense)
    if kind is TransformKind.HAAR:
        return RandomTransform(kind, size, seed, dense_matrix=_haar_unitary(size, rng))

    if kind is TransformKind.PERMUTATION_HADAMARD and not is_power_of_two(size):
        raise DimensionError(f"Hadamard size not a power of two: {size}")
    permutation = rng.permutation(size)
    permutation.setflags(write=False)
    logger.debug("Built %s transform N=%d seed=%d", kind.value, size, seed)
    return RandomTransform(kind, size, seed, permutation=permutation)
