"""BPSK over AWGN followed by a symmetric 1-bit ADC.

The composite channel is a BSC with crossover ``p = Q(sqrt(SNR))`` where
``SNR = 1 / sigma^2`` (unit symbol energy, no rate normalisation).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq
from scipy.special import erfc, log_ndtr


class DegenerateChannel(ValueError):
    pass


def q_function(x: float) -> float:
    """Gaussian tail probability ``Q(x) = erfc(x / sqrt 2) / 2``."""
    return 0.5 * float(erfc(x / math.sqrt(2.0)))


def snr_to_sigma2(snr_db: float) -> float:
    return 10.0 ** (-snr_db / 10.0)


def bsc_transition_prob(snr_db: float) -> float:
    return q_function(math.sqrt(10.0 ** (snr_db / 10.0)))


def bsc_llr_magnitude(snr_db: float) -> float:
    """``ln((1 - p) / p)`` evaluated in the log domain.

    Stays finite at SNRs where ``p`` itself underflows to zero.
    """
    x = math.sqrt(10.0 ** (snr_db / 10.0))
    log_p = float(log_ndtr(-x))
    log_1mp = float(log_ndtr(x))
    return log_1mp - log_p


@dataclass(frozen=True)
class ChannelParams:
    snr_db: float
    sigma2: float
    p: float

    @classmethod
    def from_snr(cls, snr_db: float) -> "ChannelParams":
        return cls(snr_db, snr_to_sigma2(snr_db), bsc_transition_prob(snr_db))

    @property
    def sigma(self) -> float:
        return math.sqrt(self.sigma2)

    @property
    def llr_magnitude(self) -> float:
        return bsc_llr_magnitude(self.snr_db)


def binary_entropy(p: float) -> float:
    if p <= 0.0 or p >= 1.0:
        return 0.0
    return -p * math.log2(p) - (1.0 - p) * math.log2(1.0 - p)


def channel_capacity(p: float) -> float:
    """Capacity ``1 - h(p)`` of a BSC, in bits per channel use."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"probability out of range: {p}")
    return 1.0 - binary_entropy(p)


def capacity_inverse(c: float, lo: float = -30.0, hi: float = 30.0) -> float:
    """SNR in dB at which the quantized channel's capacity equals ``c``."""
    if not 0.0 < c < 1.0:
        raise ValueError(f"capacity target must lie in (0, 1), got {c}")
    return brentq(lambda s: channel_capacity(bsc_transition_prob(s)) - c, lo, hi, xtol=1e-12)


def bpsk_modulate(c) -> np.ndarray:
    c = np.asarray(c, dtype=np.int8)
    return (1 - 2 * c).astype(np.float64)


def awgn_quantize(x, params: ChannelParams, rng: np.random.Generator) -> np.ndarray:
    """Add N(0, sigma^2) noise and keep only the sign; ``sign(0) = +1``."""
    x = np.asarray(x, dtype=np.float64)
    y = x + params.sigma * rng.standard_normal(x.shape)
    return np.where(y >= 0.0, 1, -1).astype(np.int8)


def demap_hard(q) -> np.ndarray:
    q = np.asarray(q)
    return ((1 - q) // 2).astype(np.uint8)


def demap_llr(q, p: float) -> np.ndarray:
    """Two-valued LLRs ``q * ln((1-p)/p)``; positive means bit 0."""
    if not 0.0 < p < 0.5:
        raise DegenerateChannel(f"crossover probability must be in (0, 1/2), got {p}")
    return np.asarray(q, dtype=np.float64) * math.log((1.0 - p) / p)
