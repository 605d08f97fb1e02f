"""Separation benchmark: instantaneous MIMO capacity and a Gaussian
rate-distortion proxy for the image codec."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import ChannelParams, ChannelState, Seed, sample_channels
from .numerics import hermitian, logdet_hpd

__all__ = ["CapacityReport", "mimo_capacity", "ergodic_capacity", "separation_distortion"]


@dataclass(frozen=True)
class CapacityReport:
    per_realization: np.ndarray
    ergodic_mean: float
    ergodic_std: float


def mimo_capacity(state: ChannelState, params: ChannelParams):
    """``log2 det(I_nt + (P/sigma^2) H^H H)`` in bits per channel use."""
    state.check(params)
    h = state.h
    m = np.eye(params.nt) + params.snr_linear * (hermitian(h) @ h)
    c = logdet_hpd(m)
    # guard tiny negative round-off at H = 0
    return np.maximum(c, 0.0) if np.ndim(c) else max(float(c), 0.0)


def ergodic_capacity(params: ChannelParams, trials: int, seed: Seed) -> CapacityReport:
    if trials < 1:
        raise ValueError("trials must be >= 1")
    caps = mimo_capacity(sample_channels(params, seed, trials), params)
    caps = np.atleast_1d(caps)
    std = float(np.std(caps, ddof=1)) if trials > 1 else 0.0
    return CapacityReport(per_realization=caps, ergodic_mean=float(np.mean(caps)), ergodic_std=std)


def separation_distortion(capacity_bits_per_use, k: int, n: int, src_variance: float = 1.0):
    """Distortion of an ideal Gaussian codec at ``k C / n`` bits per real sample."""
    if n < 1:
        raise ValueError("n must be >= 1")
    rate = k * np.asarray(capacity_bits_per_use, dtype=float) / n
    return src_variance * np.exp2(-2.0 * rate)
