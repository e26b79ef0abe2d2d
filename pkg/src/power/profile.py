"""
Power profiles p over the N right-singular directions and their CSV form.
"""
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np
import pandas as pd

from utils.validation import validate_power_profile

PROFILE_COLUMNS = ["index", "sigma_i", "p_i"]


class ObjectiveKind(str, Enum):
    AVERAGE = "average"
    MAP_BER = "map_ber"
    CAPACITY = "capacity"
    WATER_FILLING = "water_filling"


@dataclass(frozen=True)
class PowerProfile:
    """Nonnegative powers summing to ``p_sum``."""

    p: np.ndarray = field(repr=False)
    p_sum: float
    objective_kind: ObjectiveKind = ObjectiveKind.AVERAGE

    def __post_init__(self):
        p = np.asarray(self.p, dtype=float).copy()
        if not validate_power_profile(p, self.p_sum):
            raise ValueError(
                f"invalid power profile: sum {p.sum() if p.size else 0.0:.12g}, "
                f"min {p.min() if p.size else 0.0:.3g}, expected total {self.p_sum}"
            )
        p[p < 0.0] = 0.0
        p.setflags(write=False)
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "objective_kind", ObjectiveKind(self.objective_kind))

    @classmethod
    def uniform(cls, n: int, p_sum: float) -> "PowerProfile":
        if n < 1:
            raise ValueError(f"need at least one subchannel, got {n}")
        return cls(np.full(n, p_sum / n), p_sum, ObjectiveKind.AVERAGE)

    @property
    def n(self) -> int:
        return self.p.size


def write_power_profile(profile: PowerProfile, sigmas, path) -> Path:
    """Write (index, sigma_i, p_i) rows for inspection and replay."""
    sigmas = np.asarray(sigmas, dtype=float)
    if sigmas.shape != profile.p.shape:
        raise ValueError(f"{sigmas.size} singular values for {profile.n} powers")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame = pd.DataFrame({"index": np.arange(profile.n), "sigma_i": sigmas, "p_i": profile.p})
    frame.to_csv(path, index=False, float_format="%.17g")
    return path


def read_power_profile(path, objective_kind=ObjectiveKind.AVERAGE):
    """Return (profile, sigmas) from a file written by :func:`write_power_profile`."""
    frame = pd.read_csv(path)
    missing = [c for c in PROFILE_COLUMNS if c not in frame.columns]
    if missing:
        raise ValueError(f"power profile file {path} lacks columns {missing}")
    frame = frame.sort_values("index")
    p = frame["p_i"].to_numpy(dtype=float)
    return PowerProfile(p, float(p.sum()), objective_kind), frame["sigma_i"].to_numpy(dtype=float)
