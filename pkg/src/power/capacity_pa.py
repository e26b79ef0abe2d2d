"""
Constrained-capacity power allocation: spectral projected gradient ascent of
the area-form capacity over the scaled simplex.
"""
import logging
from enum import Enum

import numpy as np

from analysis.capacity import AreaGrid
from power.profile import ObjectiveKind, PowerProfile
from power.simplex import project_simplex
from prior.base import SignalPrior

logger = logging.getLogger(__name__)

MAX_ITERS = 5000
ARMIJO = 1e-4
MAX_BACKTRACKS = 40
STEP_TOL = 1e-14
KKT_TOL = 1e-8
SUPPORT_TOL = 1e-12
ALPHA_MIN = 1e-10
ALPHA_MAX = 1e10
FD_STEP = 1e-6


class GradientMethod(str, Enum):
    IMPLICIT = "implicit"
    CENTRAL = "central"


def _central_gradient(grid: AreaGrid, unit_gains: np.ndarray, p: np.ndarray, p_sum: float) -> np.ndarray:
    h = FD_STEP * p_sum
    grad = np.empty(p.size)
    for i in range(p.size):
        up = p.copy()
        up[i] += h
        down = p.copy()
        down[i] = max(p[i] - h, 0.0)
        grad[i] = (grid.integrate(up * unit_gains) - grid.integrate(down * unit_gains)) / (up[i] - down[i])
    return grad


def kkt_gap(g: np.ndarray, p: np.ndarray, p_sum: float) -> float:
    """max_i g_i - min_{p_i > 0} g_i; zero exactly at a stationary point of the simplex program."""
    support = p > SUPPORT_TOL * p_sum
    return float(np.max(g) - np.min(g[support]))


def optimize_pa_capacity(sigmas, prior: SignalPrior, noise_var: float, p_sum: float,
                         gradient=GradientMethod.IMPLICIT, grid: AreaGrid = None,
                         max_iters: int = MAX_ITERS) -> PowerProfile:
    """
    Maximize C(p) = integral of min{eta_SE(v, p), mmse^{-1}(v)} dv.

    Spectral projected gradient: a Barzilai-Borwein step sets the projected
    search direction, Armijo backtracking keeps the ascent monotone, and the
    loop stops once the KKT gap falls below KKT_TOL relative to the gradient.
    """
    gradient = GradientMethod(gradient)
    sigmas = np.asarray(sigmas, dtype=float)
    unit_gains = sigmas ** 2 / noise_var
    grid = grid or AreaGrid.build(prior)

    def capacity(p):
        return grid.integrate(p * unit_gains)

    def grad_at(p):
        if gradient is GradientMethod.IMPLICIT:
            return grid.gradient(unit_gains, p)
        return _central_gradient(grid, unit_gains, p, p_sum)

    p = np.full(sigmas.size, p_sum / sigmas.size)
    value = capacity(p)
    g = grad_at(p)
    norm = np.linalg.norm(g)
    alpha = p_sum / norm if norm > 0.0 else 1.0
    iters = 0
    for iters in range(1, max_iters + 1):
        scale = np.max(np.abs(g))
        if scale == 0.0 or kkt_gap(g, p, p_sum) <= KKT_TOL * scale:
            break
        direction = project_simplex(p + alpha * g, p_sum) - p
        slope = g @ direction
        if np.linalg.norm(direction) <= STEP_TOL * p_sum or slope <= 0.0:
            break
        t = 1.0
        for _ in range(MAX_BACKTRACKS):
            candidate = p + t * direction
            cand_value = capacity(candidate)
            if cand_value >= value + ARMIJO * t * slope:
                break
            t *= 0.5
        else:
            logger.debug("capacity allocation: line search stalled at iteration %d", iters)
            break
        g_next = grad_at(candidate)
        s, y = candidate - p, g_next - g
        curvature = -(s @ y)
        alpha = float(np.clip(s @ s / curvature, ALPHA_MIN, ALPHA_MAX)) if curvature > 0.0 else ALPHA_MAX
        p, value, g = candidate, cand_value, g_next

    logger.debug("capacity allocation: C=%.9g nats, KKT gap %.3e after %d iterations",
                 value, kkt_gap(g, p, p_sum), iters)
    return PowerProfile(project_simplex(p, p_sum), p_sum, ObjectiveKind.CAPACITY)
