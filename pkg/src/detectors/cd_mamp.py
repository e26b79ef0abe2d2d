"""
Cross-domain memory AMP.

The linear stage is a long-memory matched filter

    r_t = theta_t (lambda_dagger I - A A^H) r_{t-1} + xi_t (y - A x_t)

whose output is made divergence-free with weights built from the spectral
moments w_k = (1/N) tr{(lambda_dagger I - A A^H)^k A A^H}. The relaxation
theta_t = 1 / (lambda_dagger + sigma^2 / v_t) shrinks the filter toward the
LMMSE solve at the current input error v_t. Only sparse
matvecs and fast transforms touch length-N data; the history is O(N T).
"""
import logging
from dataclasses import dataclass, field
from typing import List

import numpy as np
from scipy.optimize import minimize_scalar

from detectors.common import (
    PERFECT_VAR,
    VAR_FLOOR,
    DetectorConfig,
    DetectorTrajectory,
    DetectorVariant,
    finalize,
    orthogonal_denoise,
)
from detectors.damping import clip_psd, covariance_from_residuals, optimize_damping
from utils.errors import ConvergenceError, DegenerateNormalizerError, DimensionError

logger = logging.getLogger(__name__)

NORMALIZER_FLOOR = 1e-12


def spectral_moments(channel, order: int, cfg: DetectorConfig) -> np.ndarray:
    """w_0..w_order, exact from singular values or by Hutchinson probes."""
    lam = channel.spectral.lambda_dagger
    sigma = channel.spectral.singular_values
    if sigma is not None:
        eig = sigma ** 2
        powers = (lam - eig)[None, :] ** np.arange(order + 1)[:, None]
        return powers @ eig / channel.n

    rng = np.random.default_rng(cfg.probe_seed)
    probes = rng.choice([-1.0, 1.0], size=(channel.m, cfg.trace_probes)).astype(complex)
    q = channel.apply(channel.adjoint(probes))
    moments = np.empty(order + 1)
    for k in range(order + 1):
        moments[k] = np.sum(probes.conj() * q).real / (cfg.trace_probes * channel.n)
        q = lam * q - channel.apply(channel.adjoint(q))
    return moments


@dataclass
class MemoryState:
    """History the memory filter and damping need."""

    lambda_dagger: float
    noise_var: float
    trace_gram: float
    moments: np.ndarray = field(repr=False)
    inputs: List[np.ndarray] = field(default_factory=list, repr=False)
    residuals: List[np.ndarray] = field(default_factory=list, repr=False)
    thetas: List[float] = field(default_factory=list)
    xis: List[float] = field(default_factory=list)
    cov: np.ndarray = field(default_factory=lambda: np.zeros((0, 0)), repr=False)

    def next_theta(self, adaptive: bool) -> float:
        """1 / (lambda_dagger + sigma^2 / v_t) from the latest input error, or 1 / lambda_dagger."""
        if not adaptive:
            return 1.0 / self.lambda_dagger
        v_in = max(float(self.cov[-1, -1]), VAR_FLOOR)
        return 1.0 / (self.lambda_dagger + self.noise_var / v_in)

    def add_input(self, x: np.ndarray, residual: np.ndarray):
        self.inputs.append(x)
        self.residuals.append(residual)
        stacked = np.column_stack(self.residuals)
        row = (np.real(stacked.conj().T @ residual) - residual.size * self.noise_var) / self.trace_gram
        t = row.size
        cov = np.zeros((t, t))
        cov[:-1, :-1] = self.cov
        cov[-1, :] = row
        cov[:, -1] = row
        self.cov = cov

    def weights(self, xis) -> np.ndarray:
        """vartheta_{t,i} = xi_i prod_{j=i+1..t} theta_j."""
        xis = np.asarray(xis, dtype=float)
        thetas = np.asarray(self.thetas[:xis.size], dtype=float)
        tail = np.append(np.cumprod(thetas[:0:-1])[::-1], 1.0)
        return xis * tail

    def lags(self, t: int) -> np.ndarray:
        return np.arange(t - 1, -1, -1)

    def normalizer(self, vartheta: np.ndarray) -> float:
        return float(vartheta @ self.moments[self.lags(vartheta.size)])

    def predicted_variance(self, vartheta: np.ndarray, cov_psd: np.ndarray) -> float:
        """SE-predicted LE output variance v^gamma_{t,t} for memory weights vartheta."""
        w = self.moments
        a = self.lags(vartheta.size)
        s = a[:, None] + a[None, :]
        interference = self.lambda_dagger * w[s] - w[s + 1] - np.outer(w[a], w[a])
        kernel = self.noise_var * w[s] + cov_psd * interference
        eps = self.normalizer(vartheta)
        return float(vartheta @ kernel @ vartheta) / eps ** 2


def _choose_xi(state: MemoryState, cov_psd: np.ndarray, cfg: DetectorConfig) -> float:
    if not state.xis or not cfg.optimize_xi:
        return 1.0
    scale = abs(state.xis[-1]) or 1.0

    def objective(u):
        xi = scale * u / (1.0 - u)
        vartheta = state.weights(state.xis + [xi])
        eps = state.normalizer(vartheta)
        if abs(eps) < NORMALIZER_FLOOR:
            return np.inf
        return state.predicted_variance(vartheta, cov_psd)

    result = minimize_scalar(objective, bounds=(0.0, 1.0 - 1e-9), method="bounded", options={"xatol": 1e-10})
    fallback = objective(0.5)
    if not np.isfinite(result.fun) or result.fun > fallback:
        return scale
    return scale * result.x / (1.0 - result.x)


def run_cd_mamp(y, channel, transform, prior, noise_var: float,
                cfg: DetectorConfig = None, truth=None) -> DetectorTrajectory:
    """Detect s from y = A Xi s + n with O(KN + N log N) work per iteration."""
    cfg = cfg or DetectorConfig()
    if noise_var <= 0.0:
        raise ValueError(f"noise variance must be positive, got {noise_var}")
    y = np.asarray(y, dtype=complex)
    if y.shape != (channel.m,) or transform.size != channel.n:
        raise DimensionError(
            f"y has shape {y.shape}, channel is {channel.m}x{channel.n}, transform size {transform.size}"
        )

    spectral = channel.spectral
    lam = spectral.lambda_dagger
    if lam <= 0.0:
        raise DegenerateNormalizerError("channel has no energy (lambda_dagger = 0)")
    # theta_t <= 1 / lambda_dagger, so this bounds every iteration
    contraction = (spectral.lambda_max - lam) / lam
    if contraction > 1.0 + 1e-12:
        raise ConvergenceError("memory filter is not a contraction", residual=contraction)

    state = MemoryState(lam, noise_var, channel.trace_gram, spectral_moments(channel, 2 * cfg.max_iters + 1, cfg))
    state.add_input(np.zeros(channel.n, dtype=complex), y.copy())
    r_hat = np.zeros(channel.m, dtype=complex)
    trajectory = DetectorTrajectory(DetectorVariant.CD_MAMP)
    previous = None

    for t in range(1, cfg.max_iters + 1):
        cov_psd = clip_psd(state.cov)
        theta = state.next_theta(cfg.adaptive_theta)
        state.thetas.append(theta)
        xi = _choose_xi(state, cov_psd, cfg)
        state.xis.append(xi)
        vartheta = state.weights(state.xis)
        p = vartheta * state.moments[state.lags(t)]
        eps = float(p.sum())
        if abs(eps) < NORMALIZER_FLOOR:
            raise DegenerateNormalizerError(f"normalizer {eps:.3e} at iteration {t}")
        v_gamma = max(state.predicted_variance(vartheta, cov_psd), VAR_FLOOR)

        r_hat = theta * (lam * r_hat - channel.apply(channel.adjoint(r_hat))) + xi * state.residuals[-1]
        memory = sum(p_i * x_i for p_i, x_i in zip(p, state.inputs))
        x_out = (channel.adjoint(r_hat) + memory) / eps

        s_in = transform.adjoint(x_out)
        s_post, v_nld, s_out, _ = orthogonal_denoise(prior, s_in, v_gamma)
        trajectory.record(s_post, v_nld, 1.0 / v_gamma, truth)
        if not np.all(np.isfinite(s_post)):
            raise ConvergenceError(f"non-finite estimate at iteration {t}")
        if v_nld <= PERFECT_VAR or (previous is not None and abs(v_nld - previous) < cfg.convergence_tol):
            break
        previous = v_nld

        candidate = transform.apply(s_out)
        cand_residual = y - channel.apply(candidate)
        window = slice(max(0, len(state.inputs) - cfg.damping_window), None)
        cands = state.inputs[window] + [candidate]
        cand_res = state.residuals[window] + [cand_residual]
        cand_cov = clip_psd(covariance_from_residuals(np.column_stack(cand_res), noise_var, channel.trace_gram))
        zeta = optimize_damping(cand_cov)
        x_next = sum(z * c for z, c in zip(zeta, cands))
        r_next = sum(z * r for z, r in zip(zeta, cand_res))
        state.add_input(x_next, r_next)

    logger.debug("CD-MAMP stopped after %d iterations, v=%.3e", trajectory.iterations, trajectory.variances[-1])
    return finalize(trajectory, prior)
