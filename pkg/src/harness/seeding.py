"""
Counter-based random streams: every (snr index, trial) pair owns its seed
sequence, so results do not depend on scheduling or worker count.
"""
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class TrialStreams:
    channel_seed: int
    transform_seed: int
    symbols: np.random.Generator
    noise: np.random.Generator


def trial_sequence(seed: int, snr_index: int, trial: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(seed, spawn_key=(snr_index, trial))


def trial_streams(seed: int, snr_index: int, trial: int) -> TrialStreams:
    channel, transform, symbols, noise = trial_sequence(seed, snr_index, trial).spawn(4)
    return TrialStreams(
        int(channel.generate_state(1)[0]),
        int(transform.generate_state(1)[0]),
        np.random.default_rng(symbols),
        np.random.default_rng(noise),
    )


def complex_noise(rng: np.random.Generator, size: int, noise_var: float) -> np.ndarray:
    """CN(0, noise_var) samples."""
    scale = np.sqrt(noise_var / 2.0)
    return scale * (rng.standard_normal(size) + 1j * rng.standard_normal(size))
