"""
MAP-BER power allocation.

For a target extrinsic variance v_goal the allocation problem is the
concave max-min

    max_p  min_{v in V_goal}  gamma_SE(v, p) - phi_SE^{-1}(v)
    s.t.   p >= 0, sum(p) = P_sum

over log-spaced samples V_goal of [v_goal, 1). A goal counts as reached when
the optimum is nonnegative and the state evolution run on the maximizer
actually passes below v_goal; the smallest such v_goal is found by bisection
and its maximizer is the allocation. An allocation whose reached BER is above
the uniform one is replaced by uniform power.
"""
import logging
from dataclasses import dataclass, field

import numpy as np

from analysis.spectrum import EffectiveSpectrum
from analysis.state_evolution import se_fixed_point, se_passes_below
from power.profile import ObjectiveKind, PowerProfile
from power.simplex import project_simplex
from prior.base import SignalPrior
from utils.errors import ConvergenceError, NoCrossingError

logger = logging.getLogger(__name__)

RHO_LOW = 1e-12
RHO_HIGH = 1e6
GOAL_SAMPLES = 100
GOAL_MIN = 1e-6
GOAL_MAX = 1.0 - 1e-6
GOAL_LOG_TOL = 1e-4
MAX_BISECTIONS = 60
SUBGRADIENT_ITERS = 2000
STEP_SCALE = 0.2
_LOG_TOL = 1e-14
_MAX_LOG_BISECTIONS = 200
BER_SLACK = 1e-9


def phi_se_inverse(v, prior: SignalPrior):
    """
    rho with 1 / (1/mmse(rho) - rho) = v, i.e. mmse(rho) (1/v + rho) = 1.

    Log-domain bisection over [1e-12, 1e6]; vectorized over v.
    """
    v_arr = np.atleast_1d(np.asarray(v, dtype=float))
    if np.any((v_arr <= 0.0) | (v_arr >= 1.0)):
        raise ValueError("phi_se_inverse needs v in (0, 1)")

    def excess(log_rho):
        rho = np.exp(log_rho)
        return np.atleast_1d(prior.mmse(rho)) * (1.0 / v_arr + rho) - 1.0

    lo = np.full(v_arr.shape, np.log(RHO_LOW))
    hi = np.full(v_arr.shape, np.log(RHO_HIGH))
    if np.any(excess(hi) > 0.0):
        bad = v_arr[excess(hi) > 0.0]
        raise NoCrossingError(
            f"mmse(rho)(1/v + rho) stays above 1 on [{RHO_LOW:g}, {RHO_HIGH:g}] for v={bad.min():.6g}"
        )
    at_floor = excess(lo) <= 0.0
    for _ in range(_MAX_LOG_BISECTIONS):
        if np.all(hi - lo <= _LOG_TOL):
            break
        mid = 0.5 * (lo + hi)
        above = excess(mid) > 0.0
        lo = np.where(above, mid, lo)
        hi = np.where(above, hi, mid)
    out = np.exp(0.5 * (lo + hi))
    out[at_floor] = RHO_LOW
    return out if np.ndim(v) else float(out[0])


@dataclass(frozen=True)
class MaxMinResult:
    p: np.ndarray = field(repr=False)
    value: float
    active_v: float
    iterations: int


class _MaxMinObjective:
    """gamma_SE(v, p) - phi_SE^{-1}(v) over a fixed sample set."""

    def __init__(self, v_samples, sigmas, noise_var: float, phi_inv):
        order = np.argsort(v_samples)
        self.v = np.asarray(v_samples, dtype=float)[order]
        self.phi_inv = np.asarray(phi_inv, dtype=float)[order]
        self.unit_gains = np.asarray(sigmas, dtype=float) ** 2 / noise_var

    def values(self, p):
        denom = 1.0 / self.v[:, None] + (p * self.unit_gains)[None, :]
        gamma_hat = np.mean(1.0 / denom, axis=1)
        return 1.0 / gamma_hat - 1.0 / self.v - self.phi_inv, gamma_hat, denom

    def __call__(self, p):
        """(objective, subgradient, active v); ties go to the smallest v."""
        vals, gamma_hat, denom = self.values(p)
        k = int(np.argmin(vals))
        grad = self.unit_gains / denom[k] ** 2 / (gamma_hat[k] ** 2 * p.size)
        return float(vals[k]), grad, float(self.v[k])


def _ascend(objective, p, p_sum: float, iterations: int, scale: float, best):
    for t in range(1, iterations + 1):
        value, grad, active_v = objective(p)
        if value > best[0]:
            best = (value, p, active_v)
        norm = np.linalg.norm(grad)
        if norm == 0.0:
            break
        p = project_simplex(p + scale * p_sum / np.sqrt(t) * grad / norm, p_sum)
    value, _, active_v = objective(p)
    if value > best[0]:
        best = (value, p, active_v)
    return best


def inner_maxmin(v_samples, sigmas, prior: SignalPrior, noise_var: float, p_sum: float,
                 phi_inv=None, p0=None, iterations: int = SUBGRADIENT_ITERS) -> MaxMinResult:
    """Projected subgradient ascent on the max-min program, best iterate then polished."""
    v_samples = np.asarray(v_samples, dtype=float)
    if v_samples.size == 0 or np.any((v_samples <= 0.0) | (v_samples >= 1.0)):
        raise ValueError("v samples must be a nonempty set inside (0, 1)")
    sigmas = np.asarray(sigmas, dtype=float)
    if phi_inv is None:
        phi_inv = phi_se_inverse(v_samples, prior)
    objective = _MaxMinObjective(v_samples, sigmas, noise_var, phi_inv)

    uniform = np.full(sigmas.size, p_sum / sigmas.size)
    value, _, active_v = objective(uniform)
    best = (value, uniform, active_v)
    start = uniform if p0 is None else project_simplex(p0, p_sum)

    best = _ascend(objective, start, p_sum, iterations, STEP_SCALE, best)
    best = _ascend(objective, best[1], p_sum, iterations // 4, STEP_SCALE / 10.0, best)
    return MaxMinResult(best[1], best[0], best[2], iterations + iterations // 4)


def goal_samples(v_goal: float, count: int = GOAL_SAMPLES) -> np.ndarray:
    """``count`` log-uniform samples of [v_goal, 1)."""
    return np.logspace(np.log10(v_goal), 0.0, count, endpoint=False)


def reached_ber(sigmas, p, prior: SignalPrior, noise_var: float) -> float:
    """MAP BER at the first SE fixed point under powers ``p``; inf if SE does not settle."""
    spec = EffectiveSpectrum.from_singular_values(sigmas, p, noise_var)
    try:
        rho = se_fixed_point(spec, prior).rho_star
    except ConvergenceError:
        return float("inf")
    return float(prior.map_ber(rho))


def optimize_pa_map(sigmas, prior: SignalPrior, noise_var: float, p_sum: float,
                    iterations: int = SUBGRADIENT_ITERS) -> PowerProfile:
    """Allocation reaching the smallest v_goal, never worse than uniform at the SE fixed point."""
    if not prior.bits_per_symbol:
        raise ValueError("MAP-BER allocation needs a discrete constellation prior")
    sigmas = np.asarray(sigmas, dtype=float)
    uniform = PowerProfile.uniform(sigmas.size, p_sum)

    def attempt(log_goal, p0):
        v_goal = np.exp(log_goal)
        samples = goal_samples(v_goal)
        result = inner_maxmin(samples, sigmas, prior, noise_var, p_sum,
                              phi_inv=phi_se_inverse(samples, prior), p0=p0, iterations=iterations)
        if result.value < 0.0:
            return False, result
        # sampled max-min can miss a crossing between samples
        spec = EffectiveSpectrum.from_singular_values(sigmas, project_simplex(result.p, p_sum), noise_var)
        return se_passes_below(spec, prior, v_goal), result

    lo, hi = np.log(GOAL_MIN), np.log(GOAL_MAX)
    feasible, result = attempt(hi, None)
    if not feasible:
        logger.warning("no v_goal below 1 is reachable (max-min value %.3e); keeping uniform power", result.value)
        return uniform
    best_p = result.p

    feasible, result = attempt(lo, best_p)
    if feasible:
        best_p = result.p
    else:
        for step in range(MAX_BISECTIONS):
            if hi - lo <= GOAL_LOG_TOL:
                break
            mid = 0.5 * (lo + hi)
            feasible, result = attempt(mid, best_p)
            if feasible:
                hi, best_p = mid, result.p
            else:
                lo = mid
        logger.info("MAP-BER allocation reached v_goal=%.6g after %d bisections", np.exp(hi), step + 1)

    profile = PowerProfile(project_simplex(best_p, p_sum), p_sum, ObjectiveKind.MAP_BER)
    tuned = reached_ber(sigmas, profile.p, prior, noise_var)
    flat = reached_ber(sigmas, uniform.p, prior, noise_var)
    if tuned > flat + BER_SLACK:
        logger.warning("MAP-BER allocation reaches BER %.3e above uniform %.3e; keeping uniform power", tuned, flat)
        return uniform
    return profile
