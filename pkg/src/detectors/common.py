"""
Pieces shared by the cross-domain detectors: configuration, the recorded
trajectory and the orthogonalized denoiser step in the symbol domain.
"""
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional

import numpy as np
from pydantic import BaseModel, Field

from prior.base import SignalPrior

VAR_FLOOR = 1e-300
PERFECT_VAR = 1e-13


class DetectorVariant(str, Enum):
    CD_MAMP = "cd_mamp"
    CD_OAMP = "cd_oamp"


class LinearSolver(str, Enum):
    AUTO = "auto"
    SVD = "svd"
    CG = "cg"


class DetectorConfig(BaseModel):
    max_iters: int = Field(default=32, ge=1)
    damping_window: int = Field(default=3, ge=1)
    convergence_tol: float = Field(default=1e-6, gt=0.0)
    variant: DetectorVariant = DetectorVariant.CD_MAMP
    optimize_xi: bool = True
    adaptive_theta: bool = True
    linear_solver: LinearSolver = LinearSolver.AUTO
    svd_limit: int = Field(default=2048, ge=2, description="largest N solved by eigendecomposition")
    trace_probes: int = Field(default=16, ge=1)
    probe_seed: int = 0


@dataclass
class DetectorTrajectory:
    """Per-iteration record of one detector run."""

    variant: DetectorVariant
    estimates: List[np.ndarray] = field(default_factory=list, repr=False)
    mse: List[float] = field(default_factory=list)
    variances: List[float] = field(default_factory=list)
    rhos: List[float] = field(default_factory=list)
    decisions: Optional[np.ndarray] = field(default=None, repr=False)

    def record(self, estimate: np.ndarray, variance: float, rho: float, truth=None):
        self.estimates.append(estimate)
        self.variances.append(max(float(variance), 0.0))
        self.rhos.append(float(rho))
        if truth is not None:
            self.mse.append(float(np.mean(np.abs(estimate - truth) ** 2)))

    @property
    def iterations(self) -> int:
        return len(self.estimates)

    @property
    def final_estimate(self) -> np.ndarray:
        return self.estimates[-1]

    @property
    def final_mse(self) -> Optional[float]:
        return self.mse[-1] if self.mse else None


def orthogonal_denoise(prior: SignalPrior, s_in: np.ndarray, v_in: float):
    """
    Posterior denoising followed by the divergence-free correction
    out = (post - eps * in) / (1 - eps), eps = v_post / v_in.

    Returns (posterior mean, posterior variance, orthogonal output, extrinsic variance).
    """
    v_in = max(v_in, VAR_FLOOR)
    post, v_post = prior.denoise(s_in, v_in)
    v_post = min(max(v_post, VAR_FLOOR), v_in * (1.0 - 1e-9))
    eps = v_post / v_in
    out = (post - eps * s_in) / (1.0 - eps)
    v_ext = 1.0 / (1.0 / v_post - 1.0 / v_in)
    return post, v_post, out, min(v_ext, 1.0)


def finalize(trajectory: DetectorTrajectory, prior: SignalPrior) -> DetectorTrajectory:
    if prior.bits_per_symbol:
        trajectory.decisions = prior.hard_decide(trajectory.final_estimate)
    return trajectory
