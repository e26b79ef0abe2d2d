"""
Circularly-symmetric Gaussian analysis prior, s ~ CN(0, 1).

Every scalar function has a closed form, which makes this prior the ground
truth for the analysis and allocation modules.
"""
import numpy as np

from prior.base import SignalPrior


class GaussianPrior(SignalPrior):
    name = "gaussian"
    bits_per_symbol = 0

    def __repr__(self):
        return "GaussianPrior()"

    def sample(self, n: int, rng):
        rng = np.random.default_rng(rng)
        s = (rng.standard_normal(n) + 1j * rng.standard_normal(n)) / np.sqrt(2.0)
        return s, np.zeros((n, 0), dtype=np.int8)

    def denoise(self, r, v: float):
        if v <= 0.0:
            raise ValueError(f"noise variance must be positive, got {v}")
        r = np.asarray(r, dtype=complex)
        return r / (1.0 + v), v / (1.0 + v)

    def mmse(self, rho):
        rho = np.asarray(rho, dtype=float)
        if np.any(rho < 0.0):
            raise ValueError("rho must be nonnegative")
        out = 1.0 / (1.0 + rho)
        return out if out.ndim else float(out)

    def mmse_inv(self, v):
        v = np.asarray(v, dtype=float)
        if np.any((v <= 0.0) | (v > 1.0)):
            raise ValueError("mmse_inv needs v in (0, 1]")
        out = 1.0 / v - 1.0
        return out if out.ndim else float(out)

    def mutual_information(self, rho):
        out = np.log1p(np.asarray(rho, dtype=float))
        return out if out.ndim else float(out)

    def map_ber(self, rho):
        raise ValueError("the Gaussian analysis prior carries no bits")

    def hard_decide(self, r):
        raise ValueError("the Gaussian analysis prior carries no bits")
