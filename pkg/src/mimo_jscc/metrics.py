"""Signal-level figures of merit: post-receiver SINR, outage probability and
empirical diversity order."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import ChannelParams, ChannelState, Seed, noise_var_for_snr, sample_channels
from .errors import InsufficientTrialsError, SchemeError
from .numerics import frobenius_norm_sq
from .receiver import mmse_error_variance
from .stm import StmScheme

__all__ = [
    "SinrSample",
    "OutageCurve",
    "sinr_diversity",
    "sinr_mmse",
    "sinr_mmse_stream",
    "scheme_sinr",
    "outage_probability",
    "outage_curve",
    "diversity_order_estimate",
    "MIN_OUTAGE_TRIALS",
]

MIN_OUTAGE_TRIALS = 1000
# Trials are drawn in fixed-size blocks keyed by block index, so results do
# not depend on how many trials are requested per call.
OUTAGE_BLOCK = 1 << 16


@dataclass(frozen=True)
class SinrSample:
    scheme: StmScheme
    snr_db: float
    values: np.ndarray


@dataclass(frozen=True)
class OutageCurve:
    snr_grid_db: np.ndarray
    prob: np.ndarray
    threshold_db: float
    trials: int

    def __post_init__(self):
        grid = np.asarray(self.snr_grid_db, dtype=float)
        prob = np.asarray(self.prob, dtype=float)
        if grid.shape != prob.shape:
            raise ValueError("SNR grid and probabilities must have the same length")
        if np.any((prob < 0) | (prob > 1)):
            raise ValueError("probabilities must lie in [0, 1]")
        object.__setattr__(self, "snr_grid_db", grid)
        object.__setattr__(self, "prob", prob)


def sinr_diversity(state: ChannelState, params: ChannelParams, scheme: StmScheme):
    """SINR of each decoupled OSTBC symbol: ``P * c * a^2 * ||H||_F^2 / sigma^2``.

    ``c`` is the code gain and ``a`` the frame power constant; for Alamouti
    both are 1 and the result is ``P ||H||_F^2 / sigma^2``.
    """
    if not scheme.is_ostbc:
        raise SchemeError("multiplexing SINR is per stream; use sinr_mmse_stream")
    state.check(params)
    g = scheme.code_gain * frobenius_norm_sq(state.h)
    return params.snr_linear * g * scheme.power_scale ** 2


def sinr_mmse(state: ChannelState, params: ChannelParams) -> np.ndarray:
    """Per-stream MMSE SINR, shape ``(..., nt)``."""
    state.check(params)
    return 1.0 / mmse_error_variance(state, params) - 1.0


def sinr_mmse_stream(state: ChannelState, params: ChannelParams, stream: int):
    if not 0 <= stream < params.nt:
        raise IndexError(f"stream {stream} out of range for nt={params.nt}")
    return sinr_mmse(state, params)[..., stream]


def scheme_sinr(scheme: StmScheme, state: ChannelState, params: ChannelParams):
    """Frame SINR used for outage: the worst stream for multiplexing."""
    if scheme.is_ostbc:
        return sinr_diversity(state, params, scheme)
    return np.min(sinr_mmse(state, params), axis=-1)


def _channel_blocks(params: ChannelParams, seed: Seed, trials: int):
    done, block = 0, 0
    while done < trials:
        state = sample_channels(params, seed, OUTAGE_BLOCK, salt=block)
        take = min(OUTAGE_BLOCK, trials - done)
        yield ChannelState(state.h[:take])
        done += take
        block += 1


def outage_probability(
    scheme: StmScheme, params: ChannelParams, threshold_db: float, trials: int, seed: Seed
) -> float:
    """Fraction of channel draws whose scheme SINR falls below the threshold."""
    if trials < MIN_OUTAGE_TRIALS:
        raise InsufficientTrialsError(f"outage estimates need >= {MIN_OUTAGE_TRIALS} trials, got {trials}")
    if scheme.nt != params.nt:
        raise SchemeError(f"{scheme.name} uses nt={scheme.nt}, params have nt={params.nt}")
    threshold = 10.0 ** (threshold_db / 10.0)
    below = 0
    for state in _channel_blocks(params, seed, trials):
        below += int(np.count_nonzero(scheme_sinr(scheme, state, params) < threshold))
    return below / trials


def outage_curve(
    scheme: StmScheme,
    nr: int,
    snr_grid_db,
    threshold_db: float,
    trials: int,
    seed: Seed,
    power: float = 1.0,
) -> OutageCurve:
    """Outage probability over an SNR grid with common random numbers:
    every grid point sees the same channel draws."""
    grid = np.asarray(snr_grid_db, dtype=float)
    prob = [
        outage_probability(
            scheme,
            ChannelParams(scheme.nt, nr, power, noise_var_for_snr(s, scheme.nt, power)),
            threshold_db,
            trials,
            seed,
        )
        for s in grid
    ]
    return OutageCurve(grid, np.array(prob), threshold_db, trials)


def diversity_order_estimate(curve: OutageCurve, lo_idx: int, hi_idx: int) -> float:
    """Negative log-log slope of the outage curve between two grid points."""
    grid = curve.snr_grid_db
    if np.any(np.diff(grid) <= 0):
        raise ValueError("SNR grid must be strictly increasing")
    if not lo_idx < hi_idx:
        raise ValueError("lo_idx must be smaller than hi_idx")
    p_lo, p_hi = curve.prob[lo_idx], curve.prob[hi_idx]
    for p, i in ((p_lo, lo_idx), (p_hi, hi_idx)):
        if not 0 < p < 1:
            raise InsufficientTrialsError(
                f"outage probability {p} at grid index {i} is degenerate; increase trials"
            )
    dlog_p = math.log10(p_hi) - math.log10(p_lo)
    dlog_snr = (grid[hi_idx] - grid[lo_idx]) / 10.0
    return -dlog_p / dlog_snr
