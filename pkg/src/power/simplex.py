import numpy as np


def project_simplex(x, total: float) -> np.ndarray:
    """Euclidean projection onto {p >= 0, sum(p) = total} by the sorted-threshold rule."""
    x = np.asarray(x, dtype=float)
    if total <= 0.0:
        raise ValueError(f"simplex total must be positive, got {total}")
    u = np.sort(x)[::-1]
    css = np.cumsum(u) - total
    ranks = np.arange(1, x.size + 1)
    k = np.nonzero(u - css / ranks > 0.0)[0][-1]
    tau = css[k] / (k + 1)
    return np.maximum(x - tau, 0.0)
