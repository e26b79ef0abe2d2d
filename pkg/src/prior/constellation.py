"""
Discrete square constellations built as products of Gray-labelled PAM axes.

Every supported constellation factors over its real and imaginary axes, so
the complex-noise quadratures reduce exactly to sums of per-axis real
Gauss-Hermite quadratures with real noise variance 1/2.
"""
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Tuple

import numpy as np
from scipy.optimize import brentq
from scipy.special import logsumexp, softmax
from scipy.stats import norm

from prior.base import SignalPrior


QUADRATURE_NODES = 64
_NOISE_STD = np.sqrt(0.5)


@lru_cache(maxsize=8)
def hermite_rule(nodes: int):
    """Gauss-Hermite nodes and weights normalised to the N(0, 1/2) density."""
    x, w = np.polynomial.hermite.hermgauss(nodes)
    return x, w / np.sqrt(np.pi)


def gray_labels(levels: int) -> np.ndarray:
    """Binary-reflected Gray labels, most significant bit first, shape (levels, log2 levels)."""
    bits = int(np.log2(levels))
    codes = np.arange(levels) ^ (np.arange(levels) >> 1)
    return ((codes[:, None] >> np.arange(bits - 1, -1, -1)) & 1).astype(np.int8)


def _region_point(lower: float, upper: float) -> float:
    """A point strictly inside (lower, upper); either end may be infinite."""
    if np.isinf(lower) and np.isinf(upper):
        return 0.0
    if np.isinf(lower):
        return upper - 1.0
    if np.isinf(upper):
        return lower + 1.0
    return 0.5 * (lower + upper)


@dataclass(frozen=True)
class PamAxis:
    """Equiprobable real PAM alphabet on one axis."""

    levels: np.ndarray
    labels: np.ndarray

    @property
    def bits(self) -> int:
        return self.labels.shape[1]

    def posterior(self, x: np.ndarray, v: float) -> np.ndarray:
        """Posterior weights over levels for x = a + noise of variance v/2."""
        logits = -((x[..., None] - self.levels) ** 2) / v
        return softmax(logits, axis=-1)

    def mmse(self, rho: np.ndarray, nodes: int) -> np.ndarray:
        xq, wq = hermite_rule(nodes)
        root = np.sqrt(rho)[:, None, None]
        y = root * self.levels[None, :, None] + xq[None, None, :]
        logits = -((y[..., None] - root[..., None] * self.levels) ** 2)
        post = softmax(logits, axis=-1)
        estimate = post @ self.levels
        err = (self.levels[None, :, None] - estimate) ** 2
        return err.mean(axis=1) @ wq

    def mutual_information(self, rho: np.ndarray, nodes: int) -> np.ndarray:
        xq, wq = hermite_rule(nodes)
        root = np.sqrt(rho)[:, None, None, None]
        diff = root * (self.levels[None, :, None, None] - self.levels[None, None, None, :])
        noise = xq[None, None, :, None]
        exponent = -((diff + noise) ** 2) + noise ** 2
        inner = logsumexp(exponent, axis=-1) - np.log(self.levels.size)
        return -(inner.mean(axis=1) @ wq)

    def bit_error_rates(self, rho: float) -> np.ndarray:
        """Exact per-bit MAP error rates: Gaussian mass of the wrong decision regions."""
        if rho <= 0.0:
            return np.full(self.bits, 0.5)
        means = np.sqrt(rho) * self.levels
        if self.levels.size == 2:
            gap = abs(means[1] - means[0]) / 2.0
            return np.full(self.bits, norm.sf(gap / _NOISE_STD))
        out = np.empty(self.bits)
        for k in range(self.bits):
            one = self.labels[:, k] == 1

            def llr(y, one=one):
                ll = -((y - means) ** 2)
                return logsumexp(ll[one]) - logsumexp(ll[~one])

            span = 10.0 * _NOISE_STD
            grid = np.linspace(means.min() - span, means.max() + span, 4000)
            values = np.array([llr(y) for y in grid])
            flips = np.nonzero(np.sign(values[:-1]) != np.sign(values[1:]))[0]
            edges = [brentq(llr, grid[i], grid[i + 1], xtol=1e-14) for i in flips]
            bounds = np.concatenate(([-np.inf], edges, [np.inf]))
            decide_one = np.array([llr(_region_point(a, b)) > 0 for a, b in zip(bounds[:-1], bounds[1:])])
            err = 0.0
            for a_idx, mu in enumerate(means):
                wrong = decide_one != one[a_idx]
                cdf = norm.cdf((bounds - mu) / _NOISE_STD)
                err += np.sum((cdf[1:] - cdf[:-1])[wrong])
            out[k] = err / means.size
        return out

    def nearest(self, x: np.ndarray) -> np.ndarray:
        return np.argmin(np.abs(x[..., None] - self.levels), axis=-1)


class ConstellationPrior(SignalPrior):
    """Equiprobable product constellation with Gray labelling."""

    def __init__(self, name: str, real_axis: PamAxis, imag_axis: Optional[PamAxis] = None,
                 nodes: int = QUADRATURE_NODES):
        if nodes < 32:
            raise ValueError("quadrature needs at least 32 nodes per axis")
        self.name = name
        self.real_axis = real_axis
        self.imag_axis = imag_axis
        self.nodes = nodes
        self.bits_per_symbol = real_axis.bits + (imag_axis.bits if imag_axis else 0)
        self.points, self.bit_labels = self._enumerate()
        self.probs = np.full(self.points.size, 1.0 / self.points.size)
        power = float(np.sum(self.probs * np.abs(self.points) ** 2))
        if abs(power - 1.0) > 1e-12:
            raise ValueError(f"{name} has average power {power}, expected 1")

    def __repr__(self):
        return f"ConstellationPrior({self.name!r}, points={self.points.size})"

    @property
    def axes(self):
        return [a for a in (self.real_axis, self.imag_axis) if a is not None]

    def _enumerate(self) -> Tuple[np.ndarray, np.ndarray]:
        re, im = self.real_axis, self.imag_axis
        if im is None:
            return re.levels.astype(complex), re.labels.copy()
        points = (re.levels[:, None] + 1j * im.levels[None, :]).ravel()
        labels = np.concatenate(
            (np.repeat(re.labels, im.levels.size, axis=0), np.tile(im.labels, (re.levels.size, 1))),
            axis=1,
        )
        return points, labels

    def sample(self, n: int, rng):
        rng = np.random.default_rng(rng)
        idx = rng.integers(0, self.points.size, size=n)
        return self.points[idx], self.bit_labels[idx]

    def denoise(self, r, v: float):
        if v <= 0.0:
            raise ValueError(f"noise variance must be positive, got {v}")
        r = np.asarray(r, dtype=complex)
        w_re = self.real_axis.posterior(r.real, v)
        mean = w_re @ self.real_axis.levels
        var = w_re @ self.real_axis.levels ** 2 - mean ** 2
        if self.imag_axis is not None:
            w_im = self.imag_axis.posterior(r.imag, v)
            mean_im = w_im @ self.imag_axis.levels
            var = var + w_im @ self.imag_axis.levels ** 2 - mean_im ** 2
            mean = mean + 1j * mean_im
        return mean.astype(complex), float(np.mean(np.clip(var, 0.0, None)))

    def mmse(self, rho):
        rho_arr = np.atleast_1d(np.asarray(rho, dtype=float))
        if np.any(rho_arr < 0.0):
            raise ValueError("rho must be nonnegative")
        total = sum(axis.mmse(rho_arr, self.nodes) for axis in self.axes)
        total = np.clip(total, 0.0, 1.0)
        total[rho_arr == 0.0] = 1.0
        return total if np.ndim(rho) else float(total[0])

    def mutual_information(self, rho):
        rho_arr = np.atleast_1d(np.asarray(rho, dtype=float))
        total = sum(axis.mutual_information(rho_arr, self.nodes) for axis in self.axes)
        total = np.clip(total, 0.0, np.log(self.points.size))
        return total if np.ndim(rho) else float(total[0])

    def map_ber(self, rho):
        rho_arr = np.atleast_1d(np.asarray(rho, dtype=float))
        out = np.empty_like(rho_arr)
        for i, value in enumerate(rho_arr):
            errors = np.concatenate([axis.bit_error_rates(value) for axis in self.axes])
            out[i] = errors.mean()
        return out if np.ndim(rho) else float(out[0])

    def hard_decide(self, r) -> np.ndarray:
        r = np.asarray(r, dtype=complex)
        bits = [self.real_axis.labels[self.real_axis.nearest(r.real)]]
        if self.imag_axis is not None:
            bits.append(self.imag_axis.labels[self.imag_axis.nearest(r.imag)])
        return np.concatenate(bits, axis=-1)


def _pam(levels) -> PamAxis:
    levels = np.asarray(levels, dtype=float)
    return PamAxis(levels, gray_labels(levels.size))


def bpsk(nodes: int = QUADRATURE_NODES) -> ConstellationPrior:
    return ConstellationPrior("bpsk", _pam([-1.0, 1.0]), None, nodes)


def qpsk(nodes: int = QUADRATURE_NODES) -> ConstellationPrior:
    axis = _pam(np.array([-1.0, 1.0]) / np.sqrt(2.0))
    return ConstellationPrior("qpsk", axis, axis, nodes)


def qam16(nodes: int = QUADRATURE_NODES) -> ConstellationPrior:
    axis = _pam(np.array([-3.0, -1.0, 1.0, 3.0]) / np.sqrt(10.0))
    return ConstellationPrior("16qam", axis, axis, nodes)
