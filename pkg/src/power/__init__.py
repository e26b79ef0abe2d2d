from power.capacity_pa import GradientMethod, kkt_gap, optimize_pa_capacity
from power.map_ber import MaxMinResult, goal_samples, inner_maxmin, optimize_pa_map, phi_se_inverse, reached_ber
from power.precoder import PrecoderFactors, build_precoder, channel_singular_values
from power.profile import ObjectiveKind, PowerProfile, read_power_profile, write_power_profile
from power.simplex import project_simplex
from power.water_filling import water_filling, water_level

__all__ = [
    "GradientMethod",
    "kkt_gap",
    "optimize_pa_capacity",
    "MaxMinResult",
    "goal_samples",
    "inner_maxmin",
    "optimize_pa_map",
    "phi_se_inverse",
    "reached_ber",
    "PrecoderFactors",
    "build_precoder",
    "channel_singular_values",
    "ObjectiveKind",
    "PowerProfile",
    "read_power_profile",
    "write_power_profile",
    "project_simplex",
    "water_filling",
    "water_level",
]
