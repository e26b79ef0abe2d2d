"""
Cross-domain OAMP: LMMSE estimation in the time domain, Bayes denoising in
the transform domain, both orthogonalized.
"""
import logging

import numpy as np
from scipy.sparse.linalg import LinearOperator, cg

from detectors.common import (
    PERFECT_VAR,
    VAR_FLOOR,
    DetectorConfig,
    DetectorTrajectory,
    DetectorVariant,
    LinearSolver,
    finalize,
    orthogonal_denoise,
)
from utils.errors import ConvergenceError, DimensionError

logger = logging.getLogger(__name__)

CG_RTOL = 1e-10


class _SvdLinearStage:
    """x_post = x + v A^H (sigma^2 I + v A A^H)^{-1} (y - A x) through the SVD of A."""

    def __init__(self, channel, noise_var: float):
        u, sigma, vh = channel.dense_svd
        r = sigma.size
        self.u = u[:, :r]
        self.v_right = vh[:r].conj().T
        self.sigma = sigma
        self.noise_var = noise_var
        self.n = channel.n
        self.gains = np.zeros(channel.n)
        self.gains[:r] = sigma ** 2 / noise_var

    def __call__(self, x_in, residual, v):
        coeff = self.sigma / (self.noise_var + v * self.sigma ** 2)
        x_post = x_in + v * (self.v_right @ (coeff * (self.u.conj().T @ residual)))
        v_post = float(np.mean(1.0 / (1.0 / v + self.gains)))
        return x_post, v_post


class _CgLinearStage:
    """Same update by conjugate gradients; the trace term by Hutchinson probes."""

    def __init__(self, channel, noise_var: float, probes: int, seed: int):
        self.channel = channel
        self.noise_var = noise_var
        rng = np.random.default_rng(seed)
        self.probes = rng.choice([-1.0, 1.0], size=(channel.n, probes)).astype(complex)

    def _solve(self, rhs, v):
        ch = self.channel
        op = LinearOperator(
            (ch.m, ch.m),
            matvec=lambda r: self.noise_var * r + v * ch.apply(ch.adjoint(r)),
            dtype=complex,
        )
        sol, info = cg(op, rhs, rtol=CG_RTOL, maxiter=10 * ch.m)
        if info != 0:
            residual = float(np.linalg.norm(op.matvec(sol) - rhs) / max(np.linalg.norm(rhs), VAR_FLOOR))
            raise ConvergenceError("conjugate-gradient solve did not converge", residual=residual)
        return sol

    def __call__(self, x_in, residual, v):
        ch = self.channel
        x_post = x_in + v * ch.adjoint(self._solve(residual, v))
        quad = 0.0
        for k in range(self.probes.shape[1]):
            u = self.probes[:, k]
            au = ch.apply(u)
            quad += np.vdot(au, self._solve(au, v)).real
        quad /= self.probes.shape[1]
        v_post = max(v - v * v * quad / ch.n, VAR_FLOOR)
        return x_post, v_post


def _linear_stage(channel, noise_var: float, cfg: DetectorConfig):
    solver = cfg.linear_solver
    if solver is LinearSolver.AUTO:
        solver = LinearSolver.SVD if channel.n <= cfg.svd_limit else LinearSolver.CG
    if solver is LinearSolver.SVD:
        return _SvdLinearStage(channel, noise_var)
    return _CgLinearStage(channel, noise_var, cfg.trace_probes, cfg.probe_seed)


def run_cd_oamp(y, channel, transform, prior, noise_var: float,
                cfg: DetectorConfig = None, truth=None) -> DetectorTrajectory:
    """
    Detect s from y = A Xi s + n.

    ``truth`` (the transmitted symbols), when given, adds the empirical MSE
    of every iterate to the trajectory.
    """
    cfg = cfg or DetectorConfig(variant=DetectorVariant.CD_OAMP)
    if noise_var <= 0.0:
        raise ValueError(f"noise variance must be positive, got {noise_var}")
    y = np.asarray(y, dtype=complex)
    if y.shape != (channel.m,) or transform.size != channel.n:
        raise DimensionError(
            f"y has shape {y.shape}, channel is {channel.m}x{channel.n}, transform size {transform.size}"
        )

    linear = _linear_stage(channel, noise_var, cfg)
    trajectory = DetectorTrajectory(DetectorVariant.CD_OAMP)
    x_in = np.zeros(channel.n, dtype=complex)
    v = 1.0
    previous = None
    for t in range(cfg.max_iters):
        residual = y - channel.apply(x_in)
        x_post, v_post = linear(x_in, residual, v)
        v_post = min(max(v_post, VAR_FLOOR), v * (1.0 - 1e-12))
        eps = v_post / v
        x_out = (x_post - eps * x_in) / (1.0 - eps)
        v_le = 1.0 / (1.0 / v_post - 1.0 / v)

        s_in = transform.adjoint(x_out)
        s_post, v_nld, s_out, v = orthogonal_denoise(prior, s_in, v_le)
        trajectory.record(s_post, v_nld, 1.0 / v_le, truth)
        if not np.all(np.isfinite(s_post)):
            raise ConvergenceError(f"non-finite estimate at iteration {t + 1}")

        if v_nld <= PERFECT_VAR or (previous is not None and abs(v_nld - previous) < cfg.convergence_tol):
            break
        previous = v_nld
        x_in = transform.apply(s_out)

    logger.debug("CD-OAMP stopped after %d iterations, v=%.3e", trajectory.iterations, trajectory.variances[-1])
    return finalize(trajectory, prior)
