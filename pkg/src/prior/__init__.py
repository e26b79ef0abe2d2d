from prior.base import ScalarChannelFns, SignalPrior, make_prior
from prior.constellation import ConstellationPrior, PamAxis, bpsk, gray_labels, qam16, qpsk
from prior.gaussian import GaussianPrior


def sample_symbols(prior: SignalPrior, n: int, seed):
    """IID symbols and their bit labels; ``seed`` may be an int or a Generator."""
    if n < 1:
        raise ValueError(f"need at least one symbol, got {n}")
    return prior.sample(n, seed)


__all__ = [
    "ScalarChannelFns",
    "SignalPrior",
    "make_prior",
    "ConstellationPrior",
    "PamAxis",
    "bpsk",
    "gray_labels",
    "qam16",
    "qpsk",
    "GaussianPrior",
    "sample_symbols",
]
