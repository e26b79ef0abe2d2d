"""
Replica constrained capacity per transmit symbol, in nats.

Two evaluations are provided: the R-transform integral at the replica point
and the area under min{eta_SE(v), mmse^{-1}(v)} over v in (0, 1]. They agree
up to quadrature error and cross-check each other.
"""
import logging
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy.integrate import quad

from analysis.r_transform import r_transform
from analysis.spectrum import EffectiveSpectrum, lmmse_precision
from analysis.state_evolution import replica_mmse
from prior.base import SignalPrior
from utils.errors import ConvergenceError

logger = logging.getLogger(__name__)

AREA_GRID_POINTS = 2000
AREA_V_MIN = 1e-8


class CapacityMethod(str, Enum):
    R_TRANSFORM = "r_transform_form"
    AREA = "area_form"


@dataclass(frozen=True)
class AreaGrid:
    """
    Log-spaced v grid with mmse^{-1} precomputed.

    The integrand min{eta_SE, mmse^{-1}} is integrated piecewise linearly, with
    every cell where the two curves cross split at the interpolated crossing,
    so the discretized area is continuously differentiable in the gains.
    """

    v: np.ndarray = field(repr=False)
    mmse_inv: np.ndarray = field(repr=False)
    v_min: float = AREA_V_MIN

    @classmethod
    def build(cls, prior: SignalPrior, points: int = AREA_GRID_POINTS, v_min: float = AREA_V_MIN) -> "AreaGrid":
        v = np.geomspace(v_min, 1.0, points)
        return cls(v, np.atleast_1d(prior.mmse_inv(v)), v_min)

    def eta(self, gains: np.ndarray) -> np.ndarray:
        """eta_SE on the grid, continued by 1/v where v is not attainable."""
        w, _ = lmmse_precision(self.v, gains)
        return 1.0 / self.v - w

    def split_weights(self, eta: np.ndarray):
        """Per-point quadrature weights (on eta, on mmse^{-1}) of the area under the pointwise min."""
        diff = eta - self.mmse_inv
        low = diff < 0.0
        h = np.diff(self.v)
        a, b = diff[:-1], diff[1:]
        split = low[:-1] != low[1:]
        with np.errstate(divide="ignore", invalid="ignore"):
            t = np.where(split, a / (a - b), 0.0)
        t = np.clip(np.nan_to_num(t, nan=1.0), 0.0, 1.0)

        # end-point weights of the piece left of the crossing, then of the piece right of it
        left = np.where(split, t * h * (2.0 - t) / 2.0, h / 2.0)
        left_far = np.where(split, t * t * h / 2.0, h / 2.0)
        right_near = np.where(split, (1.0 - t) ** 2 * h / 2.0, 0.0)
        right = np.where(split, (1.0 - t) * h * (1.0 + t) / 2.0, 0.0)

        eta_w = np.zeros_like(self.v)
        inv_w = np.zeros_like(self.v)
        on_eta = low[:-1]
        for side, weights in ((on_eta, eta_w), (~on_eta, inv_w)):
            np.add.at(weights, np.nonzero(side)[0], left[side])
            np.add.at(weights, np.nonzero(side)[0] + 1, left_far[side])
        for side, weights in ((on_eta & split, inv_w), (~on_eta & split, eta_w)):
            np.add.at(weights, np.nonzero(side)[0], right_near[side])
            np.add.at(weights, np.nonzero(side)[0] + 1, right[side])
        # rectangle on (0, v_min]
        (eta_w if low[0] else inv_w)[0] += self.v_min
        return eta_w, inv_w

    def integrate(self, gains: np.ndarray) -> float:
        eta = self.eta(gains)
        eta_w, inv_w = self.split_weights(eta)
        return float(eta_w @ eta + inv_w @ self.mmse_inv)

    def gradient(self, unit_gains: np.ndarray, p: np.ndarray) -> np.ndarray:
        """
        d/dp of the discretized area for gains = p * unit_gains.

        Implicit differentiation of mean(1/(w + p_i g_i)) = v gives
        d eta / d p_i = g_i (w + p_i g_i)^{-2} / (N mean((w + p g)^{-2})).
        Moving a crossing changes nothing to first order, both curves agree there.
        """
        gains = p * unit_gains
        w, _ = lmmse_precision(self.v, gains)
        eta_w, _ = self.split_weights(1.0 / self.v - w)
        active = eta_w > 0.0
        inv_sq = 1.0 / (w[active, None] + gains[None, :]) ** 2
        d_eta = unit_gains[None, :] * inv_sq / (gains.size * inv_sq.mean(axis=1, keepdims=True))
        return eta_w[active] @ d_eta


def capacity_r_transform_form(spec: EffectiveSpectrum, prior: SignalPrior) -> float:
    v_star = replica_mmse(spec, prior)
    rho_star = float(prior.mmse_inv(v_star))
    upper = v_star * spec.snr
    integral, abserr = quad(lambda z: float(r_transform(spec.d, z)), 0.0, upper,
                            epsabs=1e-10, epsrel=1e-8, limit=200)
    if not np.isfinite(integral) or abserr > 1e-6:
        raise ConvergenceError("R-transform integral did not converge", residual=abserr)
    return integral + float(prior.mutual_information(rho_star)) - rho_star * v_star


def capacity_area_form(spec: EffectiveSpectrum, prior: SignalPrior, grid: AreaGrid = None) -> float:
    grid = grid or AreaGrid.build(prior)
    return grid.integrate(spec.gains)


def constrained_capacity(spec: EffectiveSpectrum, prior: SignalPrior, method=CapacityMethod.R_TRANSFORM) -> float:
    """Replica constrained capacity in nats per transmit symbol."""
    method = CapacityMethod(method)
    if method is CapacityMethod.R_TRANSFORM:
        return capacity_r_transform_form(spec, prior)
    return capacity_area_form(spec, prior)


def parallel_rate(spec: EffectiveSpectrum, prior: SignalPrior) -> float:
    """(1/N) sum_i I(s; sqrt(g_i) s + z): per-subchannel detection with no coupling."""
    return float(np.mean(np.atleast_1d(prior.mutual_information(spec.gains))))
