"""
Sparse doubly-selective time-domain channels.

Each path contributes a circularly shifted, Doppler-rotated, RRC-shaped band
to the channel matrix, so rows hold at most paths x rrc_taps nonzeros. MIMO
channels are stacked antenna-major: column block j belongs to transmit
antenna j, row block k to receive antenna k.
"""
import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional

import numpy as np
from pydantic import BaseModel, Field, model_validator
from scipy import sparse

from channel.spectrum import SpectralSummary, spectral_summary
from utils.errors import ConfigError, DimensionError
from utils.validation import as_complex_vector

logger = logging.getLogger(__name__)

RRC_TAPS = 8
TAP_FLOOR = 1e-12


class MimoSpec(BaseModel):
    """Antenna configuration with exponential (Kronecker) correlation."""

    tx: int = Field(ge=1)
    rx: int = Field(ge=1)
    correlation: float = Field(default=0.0, ge=0.0, lt=1.0)


class ChannelSpec(BaseModel):
    """Parameters of a sparse doubly-selective channel draw."""

    n: int = Field(ge=2, description="columns N (all transmit antennas)")
    delta: float = Field(default=1.0, gt=0.0, description="row/column ratio M/N")
    paths: int = Field(default=5, ge=1)
    max_delay_taps: int = Field(default=8, ge=0)
    doppler_max_hz: float = Field(default=1111.0, ge=0.0)
    symbol_rate_hz: float = Field(default=15000.0, gt=0.0)
    rrc_rolloff: float = Field(default=0.4, ge=0.0, le=1.0)
    rrc_taps: int = Field(default=RRC_TAPS, ge=1)
    mimo: Optional[MimoSpec] = None
    seed: int = 0

    @model_validator(mode="after")
    def _check_paths(self):
        if self.paths > self.max_delay_taps + 1:
            raise ValueError(
                f"paths={self.paths} exceeds the {self.max_delay_taps + 1} available delay taps"
            )
        problem = self.dimension_problem()
        if problem:
            raise ValueError(problem)
        return self

    @property
    def m(self) -> int:
        return int(round(self.delta * self.n))

    @property
    def antennas(self):
        """(tx, rx), (1, 1) for SISO."""
        return (self.mimo.tx, self.mimo.rx) if self.mimo else (1, 1)

    def dimension_problem(self) -> Optional[str]:
        """Why N, M and the delay spread do not fit the antenna layout, or None."""
        tx, rx = self.antennas
        if self.n % tx or self.m % rx:
            return f"N={self.n}, M={self.m} not divisible by antenna counts (tx={tx}, rx={rx})"
        if self.max_delay_taps >= self.n // tx:
            return f"max_delay_taps={self.max_delay_taps} must be below {self.n // tx} symbols per antenna"
        return None


def rrc_pulse(t: np.ndarray, rolloff: float) -> np.ndarray:
    """Root-raised-cosine impulse response at symbol-spaced times ``t`` (unit symbol period)."""
    t = np.asarray(t, dtype=float)
    beta = rolloff
    if beta == 0.0:
        return np.sinc(t)
    out = np.empty_like(t)
    at_zero = np.isclose(t, 0.0)
    singular = np.isclose(np.abs(t), 1.0 / (4.0 * beta))
    regular = ~(at_zero | singular)

    out[at_zero] = 1.0 - beta + 4.0 * beta / np.pi
    out[singular] = (beta / np.sqrt(2.0)) * (
        (1.0 + 2.0 / np.pi) * np.sin(np.pi / (4.0 * beta))
        + (1.0 - 2.0 / np.pi) * np.cos(np.pi / (4.0 * beta))
    )
    tr = t[regular]
    num = np.sin(np.pi * tr * (1.0 - beta)) + 4.0 * beta * tr * np.cos(np.pi * tr * (1.0 + beta))
    den = np.pi * tr * (1.0 - (4.0 * beta * tr) ** 2)
    out[regular] = num / den
    return out


def rrc_taps(rolloff: float, taps: int = RRC_TAPS):
    """Integer tap offsets and unit-energy RRC weights, tiny taps dropped."""
    half = taps // 2
    offsets = np.arange(-half, taps - half)
    weights = rrc_pulse(offsets, rolloff)
    keep = np.abs(weights) > TAP_FLOOR * np.max(np.abs(weights))
    offsets, weights = offsets[keep], weights[keep]
    return offsets, weights / np.linalg.norm(weights)


@dataclass(frozen=True)
class ChannelMatrix:
    """Sparse operator A with its spectral summary."""

    matrix: sparse.csr_matrix = field(repr=False)
    spectral: SpectralSummary = field(repr=False)
    energy_norm: float = 1.0

    @property
    def m(self) -> int:
        return self.matrix.shape[0]

    @property
    def n(self) -> int:
        return self.matrix.shape[1]

    @property
    def max_row_nonzeros(self) -> int:
        return int(np.max(np.diff(self.matrix.indptr))) if self.m else 0

    @cached_property
    def _adjoint_matrix(self) -> sparse.csr_matrix:
        return self.matrix.conj().T.tocsr()

    def apply(self, x) -> np.ndarray:
        """A x in O(K N)."""
        return self.matrix @ as_complex_vector(x, self.n, "channel input")

    def adjoint(self, r) -> np.ndarray:
        """A^H r in O(K N)."""
        return self._adjoint_matrix @ as_complex_vector(r, self.m, "channel output")

    @cached_property
    def trace_gram(self) -> float:
        """tr(A A^H)."""
        return float(np.sum(np.abs(self.matrix.data) ** 2))

    @cached_property
    def dense_svd(self):
        """Full SVD (U, sigma, Vh) of A; desk scale only."""
        return np.linalg.svd(self.matrix.toarray(), full_matrices=True)

    @classmethod
    def from_sparse(cls, matrix, dense_limit: int = 4096) -> "ChannelMatrix":
        """Wrap an existing matrix without renormalizing it."""
        csr = sparse.csr_matrix(matrix, dtype=complex)
        csr.eliminate_zeros()
        n = csr.shape[1]
        energy = float(np.sum(np.abs(csr.data) ** 2)) / n
        return cls(csr, spectral_summary(csr, dense_limit=dense_limit), energy)

    @classmethod
    def from_diagonal(cls, values) -> "ChannelMatrix":
        """Diagonal system y_i = values_i x_i + n_i; its spectrum is read off the diagonal."""
        values = np.asarray(values, dtype=complex)
        if values.ndim != 1 or values.size < 1:
            raise DimensionError(f"diagonal must be a nonempty vector, got shape {values.shape}")
        csr = sparse.diags(values, format="csr")
        csr.eliminate_zeros()
        magnitudes = np.sort(np.abs(values))[::-1]
        spectral = SpectralSummary(float(magnitudes[-1] ** 2), float(magnitudes[0] ** 2), magnitudes)
        return cls(csr, spectral, float(np.sum(magnitudes ** 2)) / values.size)


def _path_pattern(m_rows: int, n_cols: int, delay: int, doppler_hz: float,
                  spec: ChannelSpec, offsets: np.ndarray, weights: np.ndarray):
    """Row, column and value triplets of one path's band within one antenna block."""
    rows = np.arange(m_rows)
    phase = np.exp(2j * np.pi * doppler_hz * rows / (n_cols * spec.symbol_rate_hz))
    all_rows, all_cols, all_vals = [], [], []
    for q, g in zip(offsets, weights):
        all_rows.append(rows)
        all_cols.append((rows - delay - q) % n_cols)
        all_vals.append(g * phase)
    return np.concatenate(all_rows), np.concatenate(all_cols), np.concatenate(all_vals)


def _correlation_sqrt(size: int, rho: float) -> np.ndarray:
    idx = np.arange(size)
    corr = rho ** np.abs(idx[:, None] - idx[None, :])
    eigval, eigvec = np.linalg.eigh(corr)
    return (eigvec * np.sqrt(np.clip(eigval, 0.0, None))) @ eigvec.T


def generate_channel(spec: ChannelSpec, dense_limit: int = 4096) -> ChannelMatrix:
    """
    Draw a normalized channel with (1/N) tr(A^H A) = 1.

    Path gains are CN(0, 1/P), delays distinct uniform taps, and Doppler
    shifts follow the Jakes model nu_max cos(theta) with uniform theta.
    """
    tx, rx = spec.antennas
    m = spec.m
    # specs edited with model_copy skip validation
    problem = spec.dimension_problem()
    if problem:
        raise ConfigError(problem, field="channel")
    n_sym, m_sym = spec.n // tx, m // rx

    rng = np.random.default_rng(spec.seed)
    p = spec.paths
    gains = (rng.standard_normal((p, rx, tx)) + 1j * rng.standard_normal((p, rx, tx))) / np.sqrt(2.0 * p)
    if spec.mimo and spec.mimo.correlation > 0.0:
        r_rx = _correlation_sqrt(rx, spec.mimo.correlation)
        r_tx = _correlation_sqrt(tx, spec.mimo.correlation)
        gains = r_rx[None] @ gains @ r_tx[None]
    delays = rng.choice(spec.max_delay_taps + 1, size=p, replace=False)
    dopplers = spec.doppler_max_hz * np.cos(rng.uniform(0.0, 2.0 * np.pi, size=p))
    offsets, weights = rrc_taps(spec.rrc_rolloff, spec.rrc_taps)

    rows, cols, vals = [], [], []
    for path in range(p):
        r, c, v = _path_pattern(m_sym, n_sym, delays[path], dopplers[path], spec, offsets, weights)
        for k in range(rx):
            for j in range(tx):
                rows.append(r + k * m_sym)
                cols.append(c + j * n_sym)
                vals.append(gains[path, k, j] * v)

    coo = sparse.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(m, spec.n)
    )
    csr = coo.tocsr()
    csr.sum_duplicates()
    energy = float(np.sum(np.abs(csr.data) ** 2)) / spec.n
    csr = csr * (1.0 / np.sqrt(energy))
    logger.debug("Generated %dx%d channel, %d paths, seed %d", m, spec.n, p, spec.seed)
    return ChannelMatrix(csr, spectral_summary(csr, dense_limit=dense_limit), 1.0)


def identity_channel(n: int) -> ChannelMatrix:
    return ChannelMatrix.from_diagonal(np.ones(n))
