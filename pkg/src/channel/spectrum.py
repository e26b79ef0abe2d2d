"""
Spectral summary of a channel: singular values and the extremal eigenvalues
of A A^H that set the memory filter's relaxation point.
"""
import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import ArpackNoConvergence, LinearOperator, eigsh
from scipy.stats import ks_2samp

from utils.errors import ConvergenceError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SpectralSummary:
    lambda_min: float
    lambda_max: float
    singular_values: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def lambda_dagger(self) -> float:
        return 0.5 * (self.lambda_max + self.lambda_min)

    def padded_singular_values(self, n: int) -> np.ndarray:
        """sigma_i, descending, zero-padded to length n."""
        if self.singular_values is None:
            raise ValueError("singular values are only available at desk scale")
        out = np.zeros(n)
        k = min(n, self.singular_values.size)
        out[:k] = self.singular_values[:k]
        return out


def _extremal_eigenvalues(matrix: sparse.csr_matrix, tol: float = 1e-10):
    m, n = matrix.shape
    adjoint = matrix.conj().T.tocsr()
    gram = LinearOperator((m, m), matvec=lambda r: matrix @ (adjoint @ r), dtype=complex)
    try:
        lam_max = eigsh(gram, k=1, which="LA", tol=tol, return_eigenvectors=False)[0]
        if m > n:
            lam_min = 0.0
        else:
            lam_min = eigsh(gram, k=1, which="SA", tol=tol, return_eigenvectors=False)[0]
    except ArpackNoConvergence as e:
        residual = float(np.max(np.abs(e.eigenvalues))) if len(e.eigenvalues) else float("nan")
        raise ConvergenceError("Lanczos iteration on A A^H did not converge", residual=residual) from e
    return max(float(lam_min), 0.0), float(lam_max)


def spectral_summary(matrix, dense_limit: int = 4096) -> SpectralSummary:
    """
    Singular values (dense SVD when N <= dense_limit) or extremal eigenvalues
    of A A^H by Lanczos iteration otherwise.
    """
    matrix = sparse.csr_matrix(matrix)
    m, n = matrix.shape
    if max(m, n) <= dense_limit:
        sigma = np.linalg.svd(matrix.toarray(), compute_uv=False)
        lam_max = float(sigma[0] ** 2)
        lam_min = 0.0 if m > n else float(sigma[-1] ** 2)
        sigma.setflags(write=False)
        return SpectralSummary(lam_min, lam_max, sigma)
    logger.info("N=%d above dense limit, using Lanczos for extremal eigenvalues", n)
    lam_min, lam_max = _extremal_eigenvalues(matrix)
    return SpectralSummary(lam_min, lam_max)


def spectral_ks_distance(first: SpectralSummary, second: SpectralSummary) -> float:
    """Kolmogorov-Smirnov distance between the squared-singular-value distributions."""
    if first.singular_values is None or second.singular_values is None:
        raise ValueError("both summaries need singular values")
    return float(ks_2samp(first.singular_values ** 2, second.singular_values ** 2).statistic)
