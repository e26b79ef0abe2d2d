import numpy as np

from power.profile import ObjectiveKind, PowerProfile

_BISECTIONS = 200


def water_level(gains, p_sum: float) -> float:
    """mu with sum_i max(mu - 1/g_i, 0) = p_sum over the positive gains."""
    gains = np.asarray(gains, dtype=float)
    if gains.ndim != 1 or gains.size == 0:
        raise ValueError("gains must be a nonempty vector")
    if np.any(gains < 0.0):
        raise ValueError("gains must be nonnegative")
    if not np.any(gains > 0.0):
        raise ValueError("water-filling needs at least one positive gain")
    if p_sum <= 0.0:
        raise ValueError(f"total power must be positive, got {p_sum}")

    floors = 1.0 / gains[gains > 0.0]
    lo, hi = floors.min(), floors.max() + p_sum
    for _ in range(_BISECTIONS):
        mu = 0.5 * (lo + hi)
        if np.maximum(mu - floors, 0.0).sum() > p_sum:
            hi = mu
        else:
            lo = mu
    # exact level on the active set found by bisection
    active = floors < 0.5 * (lo + hi)
    return float((p_sum + floors[active].sum()) / active.sum())


def water_filling(gains, p_sum: float) -> PowerProfile:
    """p_i = max(mu - 1/g_i, 0); subchannels with g_i = 0 get nothing."""
    gains = np.asarray(gains, dtype=float)
    mu = water_level(gains, p_sum)
    p = np.zeros(gains.size)
    positive = gains > 0.0
    p[positive] = np.maximum(mu - 1.0 / gains[positive], 0.0)
    # absorb rounding so the profile sums to p_sum
    p[positive] *= p_sum / p.sum()
    return PowerProfile(p, p_sum, ObjectiveKind.WATER_FILLING)
