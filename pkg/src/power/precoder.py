"""
Precoder P = V_A diag(sqrt(p)) aligned with the right singular vectors of A.

With this precoder the system y = A P Xi s + n is unitarily equivalent to
y~ = Sigma_A Sigma_P Xi s + n~, whose Gram spectrum is {p_i sigma_i^2}.
"""
import logging
from dataclasses import dataclass, field

import numpy as np

from analysis.spectrum import EffectiveSpectrum
from power.profile import PowerProfile
from utils.errors import DimensionError

logger = logging.getLogger(__name__)

SPECTRUM_ATOL = 1e-8
ORTHOGONALITY_ATOL = 1e-9


@dataclass(frozen=True)
class PrecoderFactors:
    v_a: np.ndarray = field(repr=False)
    sqrt_p: np.ndarray = field(repr=False)

    @property
    def precoder(self) -> np.ndarray:
        return self.v_a * self.sqrt_p[None, :]


def channel_singular_values(channel) -> np.ndarray:
    """sigma_i of A, descending, zero-padded to length N."""
    _, sigma, _ = channel.dense_svd
    out = np.zeros(channel.n)
    k = min(channel.n, sigma.size)
    out[:k] = sigma[:k]
    return out


def build_precoder(channel, profile: PowerProfile, noise_var: float, verify: bool = True):
    """Return (PrecoderFactors, EffectiveSpectrum) for power profile ``profile``."""
    if profile.n != channel.n:
        raise DimensionError(f"power profile has {profile.n} entries for a channel with {channel.n} inputs")
    _, _, vh = channel.dense_svd
    sigmas = channel_singular_values(channel)
    factors = PrecoderFactors(vh.conj().T, np.sqrt(profile.p))
    spectrum = EffectiveSpectrum.from_singular_values(sigmas, profile.p, noise_var)
    if verify:
        _verify(channel, factors, profile, spectrum)
    return factors, spectrum


def _verify(channel, factors: PrecoderFactors, profile: PowerProfile, spectrum: EffectiveSpectrum):
    precoder = factors.precoder
    gram_p = precoder.conj().T @ precoder
    if not np.allclose(gram_p, np.diag(profile.p), atol=ORTHOGONALITY_ATOL * max(1.0, profile.p.max())):
        raise ValueError("precoder columns are not orthogonal with powers p")

    effective = channel.matrix @ precoder
    eigvals = np.linalg.eigvalsh(effective.conj().T @ effective)
    expected = np.sort(spectrum.d)
    scale = max(1.0, expected.max())
    gap = float(np.max(np.abs(np.sort(eigvals) - expected)))
    if gap > SPECTRUM_ATOL * scale:
        raise ValueError(f"precoded spectrum deviates from p_i sigma_i^2 by {gap:.3e}")
    logger.debug("precoder verified, spectrum gap %.2e", gap)
