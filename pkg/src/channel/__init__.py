from channel.doubly_selective import (
    ChannelMatrix,
    ChannelSpec,
    MimoSpec,
    generate_channel,
    identity_channel,
    rrc_pulse,
    rrc_taps,
)
from channel.spectrum import SpectralSummary, spectral_ks_distance, spectral_summary
from channel.triplets import dump_channel, load_channel

__all__ = [
    "ChannelMatrix",
    "ChannelSpec",
    "MimoSpec",
    "generate_channel",
    "identity_channel",
    "rrc_pulse",
    "rrc_taps",
    "SpectralSummary",
    "spectral_ks_distance",
    "spectral_summary",
    "dump_channel",
    "load_channel",
]
