"""
R-transform of an empirical spectral distribution on [0, inf).

R(-z) = s + 1/z where s < min(0, min d) solves G(s) = -z for the Stieltjes
transform G(s) = mean(1/(s - d_i)). Substituting s = R - 1/z turns the root
problem into mean((R - d_i) / (1 + z (d_i - R))) = 0, whose root lies in
[min d, max d] and stays well conditioned as z -> 0.
"""
import numpy as np

from utils.errors import BranchRangeError

_BISECTIONS = 200


def branch_limit(d) -> float:
    """Largest z on the branch, |G(0^-)| = mean(1/d); infinite if some d_i = 0."""
    d = np.asarray(d, dtype=float)
    if np.any(d == 0.0):
        return np.inf
    return float(np.mean(1.0 / d))


def r_transform(d, z):
    """R(-z) for z >= 0, elementwise in z; R(0) = mean(d)."""
    d = np.asarray(d, dtype=float)
    z_arr = np.atleast_1d(np.asarray(z, dtype=float))
    if np.any(d < 0.0):
        raise ValueError("spectrum entries must be nonnegative")
    if np.any(z_arr < 0.0):
        raise ValueError("z must be nonnegative")
    limit = branch_limit(d)
    if np.any(z_arr > limit):
        raise BranchRangeError(f"z={z_arr.max():.6g} beyond the branch range {limit:.6g}")

    d_min, d_max = d.min(), d.max()
    out = np.full(z_arr.shape, d.mean())
    work = (z_arr > 0.0) & (d_max > d_min)
    if not np.any(work):
        return out if np.ndim(z) else float(out[0])

    zw = z_arr[work]
    lo = np.full(zw.shape, d_min)
    hi = np.minimum(d_max, d_min + (1.0 - 1e-12) / zw)

    def residual(r):
        return np.mean((r[:, None] - d[None, :]) / (1.0 + zw[:, None] * (d[None, :] - r[:, None])), axis=1)

    for _ in range(_BISECTIONS):
        mid = 0.5 * (lo + hi)
        negative = residual(mid) < 0.0
        lo = np.where(negative, mid, lo)
        hi = np.where(negative, hi, mid)
        if np.all(hi - lo <= 1e-16 * np.maximum(np.abs(hi), 1e-300)):
            break
    out[work] = 0.5 * (lo + hi)
    return out if np.ndim(z) else float(out[0])


def scaled_r_transform(v, d, noise_var: float):
    """
    sigma^{-2} R(-sigma^{-2} v), continued by 1/v beyond the branch.

    Beyond the branch the LMMSE stage cannot produce variance v at any input
    precision; the continuation 1/v corresponds to zero input precision.
    """
    v_arr = np.atleast_1d(np.asarray(v, dtype=float))
    snr = 1.0 / noise_var
    z = snr * v_arr
    inside = z <= branch_limit(d)
    out = np.empty_like(v_arr)
    if np.any(inside):
        out[inside] = snr * np.atleast_1d(r_transform(d, z[inside]))
    out[~inside] = 1.0 / v_arr[~inside]
    return out if np.ndim(v) else float(out[0])
