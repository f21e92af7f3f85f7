"""BPSK modulation, AWGN sampling, channel LLRs, and SNR bookkeeping.

Bit-to-symbol mapping is fixed as 0 -> +1, so a positive LLR means
"0 more likely" and the hard decision rule is u = 0 iff L >= 0.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

#: Saturation bound applied to channel LLRs; score comparisons only need
#: ordering, so clipping has no effect on decoding decisions.
LLR_SAT = 1e6


@dataclass(frozen=True)
class ChannelParams:
    """AWGN noise level, sigma per real dimension."""

    sigma: float

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError(f"sigma must be > 0, got {self.sigma}")

    @property
    def sigma2(self) -> float:
        return self.sigma * self.sigma


def modulate_bpsk(c) -> np.ndarray:
    """0 -> +1.0, 1 -> -1.0."""
    c = np.asarray(c)
    return 1.0 - 2.0 * c.astype(np.float64)


def awgn_sample(x, params: ChannelParams, rng: np.random.Generator) -> np.ndarray:
    """Add i.i.d. zero-mean Gaussian noise with std sigma."""
    x = np.asarray(x, dtype=np.float64)
    return x + params.sigma * rng.standard_normal(x.shape)


def channel_llr(y, params: ChannelParams) -> np.ndarray:
    """LLR log W{0|y}/W{1|y} = 2 y / sigma^2 for BPSK over AWGN."""
    y = np.asarray(y, dtype=np.float64)
    return np.clip(2.0 * y / params.sigma2, -LLR_SAT, LLR_SAT)


def ebn0_to_sigma(ebn0_db: float, rate: float) -> ChannelParams:
    """Noise std for a given Eb/N0 in dB at the given code rate."""
    if not 0.0 < rate <= 1.0:
        raise ValueError(f"rate must be in (0, 1], got {rate}")
    ebn0 = 10.0 ** (ebn0_db / 10.0)
    return ChannelParams(sigma=1.0 / np.sqrt(2.0 * rate * ebn0))
