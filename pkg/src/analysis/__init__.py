from analysis.capacity import (
    AreaGrid,
    CapacityMethod,
    capacity_area_form,
    capacity_r_transform_form,
    constrained_capacity,
    parallel_rate,
)
from analysis.r_transform import branch_limit, r_transform, scaled_r_transform
from analysis.spectrum import EffectiveSpectrum, gamma_se, gamma_se_hat, lmmse_precision
from analysis.state_evolution import (
    FixedPoint,
    eta_se,
    predict_ber,
    replica_mmse,
    replica_roots,
    se_fixed_point,
    se_passes_below,
    se_trajectory,
)

__all__ = [
    "AreaGrid",
    "CapacityMethod",
    "capacity_area_form",
    "capacity_r_transform_form",
    "constrained_capacity",
    "parallel_rate",
    "branch_limit",
    "r_transform",
    "scaled_r_transform",
    "EffectiveSpectrum",
    "gamma_se",
    "gamma_se_hat",
    "lmmse_precision",
    "FixedPoint",
    "eta_se",
    "predict_ber",
    "replica_mmse",
    "replica_roots",
    "se_fixed_point",
    "se_passes_below",
    "se_trajectory",
]
