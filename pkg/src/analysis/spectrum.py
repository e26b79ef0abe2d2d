"""
Effective spectrum of a (precoded) channel and the scalar LMMSE transfer
function built on it.
"""
from dataclasses import dataclass, field

import numpy as np

_NEWTON_STEPS = 200


@dataclass(frozen=True)
class EffectiveSpectrum:
    """Eigenvalues d_i = p_i sigma_i^2 of the precoded Gram matrix, length N."""

    d: np.ndarray = field(repr=False)
    noise_var: float

    def __post_init__(self):
        d = np.asarray(self.d, dtype=float)
        if d.ndim != 1 or d.size == 0:
            raise ValueError("spectrum must be a nonempty vector")
        if np.any(d < 0.0):
            raise ValueError("spectrum entries must be nonnegative")
        if self.noise_var <= 0.0:
            raise ValueError(f"noise variance must be positive, got {self.noise_var}")
        object.__setattr__(self, "d", d)

    @classmethod
    def from_singular_values(cls, sigmas, p, noise_var: float) -> "EffectiveSpectrum":
        sigmas = np.asarray(sigmas, dtype=float)
        p = np.asarray(p, dtype=float)
        if sigmas.shape != p.shape:
            raise ValueError(f"{sigmas.size} singular values for {p.size} powers")
        return cls(p * sigmas ** 2, noise_var)

    @property
    def n(self) -> int:
        return self.d.size

    @property
    def snr(self) -> float:
        return 1.0 / self.noise_var

    @property
    def gains(self) -> np.ndarray:
        """d_i / sigma^2."""
        return self.d / self.noise_var


def gamma_se_hat(v, spec: EffectiveSpectrum):
    """LMMSE output variance (1/N) sum_i (1/v + d_i/sigma^2)^{-1}."""
    v_arr = np.atleast_1d(np.asarray(v, dtype=float))
    if np.any(v_arr <= 0.0):
        raise ValueError("v must be positive")
    out = np.mean(1.0 / (1.0 / v_arr[:, None] + spec.gains[None, :]), axis=1)
    return out if np.ndim(v) else float(out[0])


def gamma_se(v, spec: EffectiveSpectrum):
    """Extrinsic SNR handed to the denoiser: 1/gamma_hat(v) - 1/v."""
    return 1.0 / np.asarray(gamma_se_hat(v, spec)) - 1.0 / np.asarray(v, dtype=float)


def lmmse_precision(v, gains: np.ndarray):
    """
    Solve mean(1 / (w + gains)) = v for w >= 0, elementwise in v.

    Returns (w, attainable). Where v exceeds the largest attainable LMMSE
    variance the solution is clamped to w = 0 and ``attainable`` is False.
    F(w) = mean(1/(w+g)) - v is convex and decreasing, so Newton started
    left of the root increases monotonically onto it.
    """
    v = np.atleast_1d(np.asarray(v, dtype=float))
    gains = np.asarray(gains, dtype=float)
    zero_fraction = np.mean(gains == 0.0)
    g = gains[None, :]

    w = np.maximum.reduce([np.zeros_like(v), 1.0 / v - gains.max(), zero_fraction / v])
    with np.errstate(divide="ignore"):
        f0 = np.mean(1.0 / (w[:, None] + g), axis=1) - v
    attainable = f0 >= 0.0
    w = np.where(attainable, w, 0.0)

    active = attainable.copy()
    for _ in range(_NEWTON_STEPS):
        if not np.any(active):
            break
        inv = 1.0 / (w[active, None] + g)
        f = inv.mean(axis=1) - v[active]
        step = f / np.mean(inv ** 2, axis=1)
        new = w[active] + np.maximum(step, 0.0)
        done = np.abs(new - w[active]) <= 1e-15 * np.maximum(new, 1e-300)
        w[active] = new
        idx = np.nonzero(active)[0]
        active[idx[done]] = False
    return w, attainable
