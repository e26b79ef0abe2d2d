"""
Observable error-covariance estimates and variance-optimal damping.
"""
import numpy as np

from utils.errors import DimensionError

JITTER = 1e-12


def covariance_from_residuals(residuals: np.ndarray, noise_var: float, trace_gram: float) -> np.ndarray:
    """
    v_ij = [(y - A x_i)^H (y - A x_j) - M sigma^2] / tr(A A^H) for residual columns.

    Raw (unclipped) real part; estimates of (1/N) <x_i - x, x_j - x>.
    """
    residuals = residuals.reshape(residuals.shape[0], -1)
    m = residuals.shape[0]
    gram = (residuals.conj().T @ residuals).real
    return (gram - m * noise_var) / trace_gram


def clip_psd(matrix: np.ndarray) -> np.ndarray:
    """Symmetrize and floor eigenvalues at zero."""
    sym = 0.5 * (matrix + matrix.T)
    eigval, eigvec = np.linalg.eigh(sym)
    return (eigvec * np.clip(eigval, 0.0, None)) @ eigvec.T


def estimate_error_covariance(candidates, y, channel, noise_var: float) -> np.ndarray:
    """PSD estimate of the pairwise error covariances of candidate estimates x_i."""
    if len(candidates) < 1:
        raise ValueError("need at least one candidate")
    x = np.column_stack([np.asarray(c, dtype=complex) for c in candidates])
    residuals = np.asarray(y, dtype=complex)[:, None] - channel.apply(x)
    return clip_psd(covariance_from_residuals(residuals, noise_var, channel.trace_gram))


def optimize_damping(history_cov) -> np.ndarray:
    """zeta = V^{-1} 1 / (1^T V^{-1} 1), minimizing zeta^T V zeta with sum(zeta) = 1."""
    v = np.asarray(history_cov, dtype=float)
    if v.ndim != 2 or v.shape[0] != v.shape[1]:
        raise DimensionError(f"covariance must be square, got shape {v.shape}")
    dim = v.shape[0]
    v = 0.5 * (v + v.T)
    eigval = np.linalg.eigvalsh(v)
    scale = np.trace(v) / dim
    if eigval[0] <= JITTER * max(eigval[-1], 0.0):
        v = v + JITTER * (scale if scale > 0.0 else 1.0) * np.eye(dim)
        eigval = np.linalg.eigvalsh(v)
    if eigval[0] <= 0.0:
        raise ValueError(f"damping covariance is not positive semidefinite (min eigenvalue {eigval[0]:.3e})")
    ones = np.ones(dim)
    weights = np.linalg.solve(v, ones)
    return weights / weights.sum()
