"""
Scalar state evolution of the orthogonal detector and the replica fixed point.

The SE runs on the extrinsic variance v (LE input) starting from the prior
variance 1:

    rho_t   = 1 / gamma_hat(v_t) - 1 / v_t
    v_{t+1} = 1 / (1 / mmse(rho_t) - rho_t)

Its first fixed point has posterior MMSE v* = mmse(rho*), which is also the
root of mmse^{-1}(v) = sigma^{-2} R(-sigma^{-2} v).
"""
import logging
from dataclasses import dataclass, field
from typing import List, Tuple

import numpy as np

from analysis.r_transform import branch_limit, scaled_r_transform
from analysis.spectrum import EffectiveSpectrum, gamma_se, lmmse_precision
from prior.base import SignalPrior
from utils.errors import BranchRangeError, ConvergenceError, MultipleFixedPointsError

logger = logging.getLogger(__name__)

SE_TOL = 1e-12
SE_MAX_ITERS = 10_000
SCAN_POINTS = 1000
_VAR_FLOOR = 1e-300


@dataclass(frozen=True)
class FixedPoint:
    rho_star: float
    v_star: float
    v_extrinsic: float
    iterations: int
    trace: List[Tuple[float, float]] = field(default_factory=list, repr=False)


def _next_extrinsic(rho: float, prior: SignalPrior) -> float:
    m = max(float(prior.mmse(rho)), _VAR_FLOOR)
    denom = 1.0 / m - rho
    return 1.0 / denom if denom > 0.0 else 1.0


def se_fixed_point(spec: EffectiveSpectrum, prior: SignalPrior,
                   tol: float = SE_TOL, max_iters: int = SE_MAX_ITERS) -> FixedPoint:
    """First fixed point of the scalar SE reached from v = 1."""
    v = 1.0
    trace = []
    for it in range(1, max_iters + 1):
        rho = max(float(gamma_se(v, spec)), 0.0)
        v_next = _next_extrinsic(rho, prior)
        trace.append((v, rho))
        if abs(v_next - v) < tol:
            v = v_next
            rho = max(float(gamma_se(v, spec)), 0.0)
            return FixedPoint(rho, float(prior.mmse(rho)), v, it, trace)
        v = v_next
    raise ConvergenceError(f"state evolution did not settle in {max_iters} iterations", residual=abs(v_next - v))


def se_passes_below(spec: EffectiveSpectrum, prior: SignalPrior, v_goal: float,
                    max_iters: int = SE_MAX_ITERS) -> bool:
    """Whether the extrinsic variance of the SE started at v = 1 drops to v_goal."""
    v = 1.0
    for _ in range(max_iters):
        if v <= v_goal:
            return True
        rho = max(float(gamma_se(v, spec)), 0.0)
        v_next = _next_extrinsic(rho, prior)
        if v - v_next <= SE_TOL * v:
            return v_next <= v_goal
        v = v_next
    return False


def se_trajectory(spec: EffectiveSpectrum, prior: SignalPrior, iterations: int):
    """Per-iteration (rho_t, predicted MSE mmse(rho_t)) of the scalar SE."""
    v = 1.0
    rhos, mses = [], []
    for _ in range(iterations):
        rho = max(float(gamma_se(v, spec)), 0.0)
        rhos.append(rho)
        mses.append(float(prior.mmse(rho)))
        v = _next_extrinsic(rho, prior)
    return np.array(rhos), np.array(mses)


def _replica_residual(v, spec: EffectiveSpectrum, prior: SignalPrior):
    return prior.mmse_inv(v) - scaled_r_transform(v, spec.d, spec.noise_var)


def _refine_on_v(v_lo: float, v_hi: float, spec, prior) -> float:
    """Bisection on v for the sign change of the replica residual."""
    f_lo = _replica_residual(v_lo, spec, prior)
    for _ in range(200):
        mid = 0.5 * (v_lo + v_hi)
        f_mid = _replica_residual(mid, spec, prior)
        if f_mid == 0.0:
            return mid
        if np.sign(f_mid) == np.sign(f_lo):
            v_lo, f_lo = mid, f_mid
        else:
            v_hi = mid
        if v_hi - v_lo <= 1e-15 * v_hi:
            break
    return 0.5 * (v_lo + v_hi)


def replica_roots(spec: EffectiveSpectrum, prior: SignalPrior) -> List[float]:
    """All roots v of the replica equation, located by a log-grid sign scan."""
    if np.all(spec.d == 0.0):
        return [1.0]
    rho_hi = spec.snr * spec.d.max() * (1.0 + 1e-9) + 1e-9
    rho = np.concatenate(([0.0], np.geomspace(min(1e-10, rho_hi * 1e-6), rho_hi, SCAN_POINTS - 1)))
    v = np.clip(np.atleast_1d(prior.mmse(rho)), _VAR_FLOOR, 1.0)
    residual = rho - np.atleast_1d(scaled_r_transform(v, spec.d, spec.noise_var))

    roots = [float(v[i]) for i in np.nonzero(residual == 0.0)[0]]
    sign = np.sign(residual)
    for i in np.nonzero(sign[:-1] * sign[1:] < 0.0)[0]:
        if v[i + 1] == v[i]:
            roots.append(float(v[i]))
            continue
        roots.append(_refine_on_v(float(v[i + 1]), float(v[i]), spec, prior))
    return sorted(set(roots), reverse=True)


def replica_mmse(spec: EffectiveSpectrum, prior: SignalPrior) -> float:
    """v* solving mmse^{-1}(v) = sigma^{-2} R(-sigma^{-2} v); several roots are an error."""
    roots = replica_roots(spec, prior)
    if len(roots) > 1:
        raise MultipleFixedPointsError(roots)
    return roots[0]


def predict_ber(spec: EffectiveSpectrum, prior: SignalPrior) -> float:
    """Replica MAP BER Q_S(rho*)."""
    v_star = replica_mmse(spec, prior)
    return float(prior.map_ber(prior.mmse_inv(v_star)))


def eta_se(v, spec: EffectiveSpectrum):
    """Variational transform 1/v - 1/gamma_hat^{-1}(v)."""
    v_arr = np.atleast_1d(np.asarray(v, dtype=float))
    if np.any((v_arr <= 0.0) | (v_arr >= 1.0)):
        raise ValueError("eta_se needs v in (0, 1)")
    w, attainable = lmmse_precision(v_arr, spec.gains)
    if not np.all(attainable):
        raise BranchRangeError(
            f"v={v_arr[~attainable].min():.6g} exceeds the attainable LMMSE variance "
            f"{spec.noise_var * branch_limit(spec.d):.6g}"
        )
    out = 1.0 / v_arr - w
    return out if np.ndim(v) else float(out[0])
