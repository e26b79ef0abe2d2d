"""
Common interface of symbol priors and the cached mmse table.
"""
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from functools import cached_property
from typing import Tuple

import numpy as np
from scipy.interpolate import PchipInterpolator

from utils.errors import ConfigError

TABLE_POINTS = 400
TABLE_RHO_MIN = 1e-4
TABLE_RHO_MAX = 1e4
INVERSE_RTOL = 1e-10
_MAX_BISECTIONS = 400


class SignalPrior(ABC):
    """Unit-power symbol prior P_s together with its scalar-channel functions."""

    name: str
    bits_per_symbol: int

    @abstractmethod
    def sample(self, n: int, rng) -> Tuple[np.ndarray, np.ndarray]:
        """Return (symbols, bits) with bits of shape (n, bits_per_symbol)."""

    @abstractmethod
    def denoise(self, r, v: float) -> Tuple[np.ndarray, float]:
        """Posterior mean of s given r = s + sqrt(v) z and the average posterior variance."""

    @abstractmethod
    def mmse(self, rho):
        """MMSE of the scalar channel sqrt(rho) s + z, z ~ CN(0, 1)."""

    @abstractmethod
    def mutual_information(self, rho):
        """I(s; sqrt(rho) s + z) in nats."""

    @abstractmethod
    def map_ber(self, rho):
        """Per-bit MAP demodulation error rate of the scalar channel."""

    @abstractmethod
    def hard_decide(self, r) -> np.ndarray:
        """Nearest-point decisions mapped back to bits."""

    def mmse_inv(self, v):
        """rho with mmse(rho) = v, by bisection to relative tolerance 1e-10."""
        v_arr = np.atleast_1d(np.asarray(v, dtype=float))
        if np.any((v_arr <= 0.0) | (v_arr > 1.0)):
            raise ValueError("mmse_inv needs v in (0, 1]")
        table = self.scalar_functions
        lo, hi = table.bracket(v_arr)
        out = _bisect_decreasing(self.mmse, v_arr, lo, hi)
        out[v_arr >= 1.0] = 0.0
        return out if np.ndim(v) else float(out[0])

    @cached_property
    def scalar_functions(self) -> "ScalarChannelFns":
        rho = np.geomspace(TABLE_RHO_MIN, TABLE_RHO_MAX, TABLE_POINTS)
        values = np.minimum.accumulate(np.atleast_1d(self.mmse(rho)))
        return ScalarChannelFns(rho, values, self)


def _bisect_decreasing(fn, target, lo, hi):
    """Solve fn(x) = target for decreasing fn, elementwise, inside [lo, hi]."""
    lo = np.array(lo, dtype=float)
    hi = np.array(hi, dtype=float)
    for _ in range(_MAX_BISECTIONS):
        mid = 0.5 * (lo + hi)
        above = np.atleast_1d(fn(mid)) > target
        lo = np.where(above, mid, lo)
        hi = np.where(above, hi, mid)
        if np.all(hi - lo <= INVERSE_RTOL * hi):
            break
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class ScalarChannelFns:
    """mmse on a log-spaced rho grid with monotone interpolation."""

    rho_grid: np.ndarray = field(repr=False)
    mmse_table: np.ndarray = field(repr=False)
    prior: SignalPrior = field(repr=False)

    @cached_property
    def _interpolant(self):
        return PchipInterpolator(np.log(self.rho_grid), self.mmse_table, extrapolate=False)

    def mmse(self, rho):
        """Table lookup; linear to 1 below the grid, exponential tail above it."""
        rho = np.atleast_1d(np.asarray(rho, dtype=float))
        out = np.empty_like(rho)
        low = rho < self.rho_grid[0]
        high = rho > self.rho_grid[-1]
        mid = ~(low | high)
        out[mid] = self._interpolant(np.log(rho[mid]))
        out[low] = 1.0 - (1.0 - self.mmse_table[0]) * rho[low] / self.rho_grid[0]
        last, prev = self.mmse_table[-1], self.mmse_table[-2]
        if last > 0.0 and prev > last:
            rate = np.log(prev / last) / (self.rho_grid[-1] - self.rho_grid[-2])
            out[high] = last * np.exp(-rate * (rho[high] - self.rho_grid[-1]))
        else:
            out[high] = last
        return out

    def ber(self, rho):
        return self.prior.map_ber(rho)

    def bracket(self, v: np.ndarray):
        """Grid nodes enclosing mmse^{-1}(v); exact because table nodes are exact."""
        descending = -self.mmse_table
        idx = np.searchsorted(descending, -v, side="left")
        rho = np.concatenate(([0.0], self.rho_grid, [TABLE_RHO_MAX * 1e4]))
        return rho[idx], rho[idx + 1]


def make_prior(name: str, **kwargs) -> SignalPrior:
    """Prior by config name: bpsk, qpsk, 16qam or gaussian."""
    from prior.constellation import bpsk, qam16, qpsk
    from prior.gaussian import GaussianPrior

    factories = {"bpsk": bpsk, "qpsk": qpsk, "16qam": qam16, "gaussian": GaussianPrior}
    key = name.strip().lower().replace("-", "")
    if key not in factories:
        raise ConfigError(f"unknown constellation {name!r}; choose from {sorted(factories)}", field="constellation")
    return factories[key](**kwargs)
