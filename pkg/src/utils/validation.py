import numpy as np

from utils.errors import DimensionError


def is_power_of_two(n: int) -> bool:
    """True for 1, 2, 4, 8, ..."""
    return n >= 1 and (n & (n - 1)) == 0


def as_complex_vector(x, length: int, name: str = "vector") -> np.ndarray:
    """Return ``x`` as a complex array whose first axis has ``length`` entries."""
    arr = np.asarray(x, dtype=complex)
    if arr.ndim not in (1, 2) or arr.shape[0] != length:
        raise DimensionError(f"{name} has shape {arr.shape}, expected first axis {length}")
    return arr


def validate_snr_grid(snr_db) -> bool:
    """A usable SNR grid is nonempty, finite and sorted ascending."""
    grid = np.asarray(list(snr_db), dtype=float)
    if grid.size == 0 or not np.all(np.isfinite(grid)):
        return False
    return bool(np.all(np.diff(grid) >= 0))


def validate_power_profile(p, p_sum: float, tol: float = 1e-9) -> bool:
    """Nonnegative entries summing to ``p_sum``."""
    p = np.asarray(p, dtype=float)
    if p.ndim != 1 or p.size == 0:
        return False
    if np.any(p < -1e-12):
        return False
    return abs(p.sum() - p_sum) <= tol * max(1.0, abs(p_sum))
