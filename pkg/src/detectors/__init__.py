from detectors.cd_mamp import run_cd_mamp, spectral_moments
from detectors.cd_oamp import run_cd_oamp
from detectors.common import DetectorConfig, DetectorTrajectory, DetectorVariant, LinearSolver
from detectors.damping import estimate_error_covariance, optimize_damping


def run_detector(y, channel, transform, prior, noise_var: float, cfg: DetectorConfig = None, truth=None):
    """Dispatch on ``cfg.variant``."""
    cfg = cfg or DetectorConfig()
    runner = run_cd_mamp if cfg.variant is DetectorVariant.CD_MAMP else run_cd_oamp
    return runner(y, channel, transform, prior, noise_var, cfg=cfg, truth=truth)


__all__ = [
    "run_cd_mamp",
    "run_cd_oamp",
    "run_detector",
    "spectral_moments",
    "DetectorConfig",
    "DetectorTrajectory",
    "DetectorVariant",
    "LinearSolver",
    "estimate_error_covariance",
    "optimize_damping",
]
