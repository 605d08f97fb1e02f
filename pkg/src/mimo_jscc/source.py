"""Gaussian source with a linear pair-packing codec.

Stands in for a learned image encoder/decoder: the source is i.i.d. Gaussian,
so the end-to-end distortion of every link has a closed form that the Monte
Carlo pipeline can be checked against.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import SOURCE_DRAW, Seed, rng_for
from .errors import DimensionError
from .receiver import EqualizedLatent
from .stm import normalize_latent

__all__ = [
    "GaussianSource",
    "LinearCodec",
    "SourceLatent",
    "DistortionReport",
    "sample_source",
    "sample_sources",
    "encode_source",
    "decode_source",
    "analytic_distortion",
    "psnr",
    "distortion_report",
]


@dataclass(frozen=True)
class GaussianSource:
    n: int
    variance: float = 1.0

    def __post_init__(self):
        if self.n < 2 or self.n % 2:
            raise ValueError(f"source length must be a positive even integer, got {self.n}")
        if not self.variance > 0:
            raise ValueError(f"source variance must be positive, got {self.variance}")


@dataclass(frozen=True)
class LinearCodec:
    """Packs the first ``2 l`` real samples into ``l`` complex symbols."""

    n: int
    l: int

    def __post_init__(self):
        if self.l < 1:
            raise ValueError(f"latent length must be at least 1, got {self.l}")
        if 2 * self.l > self.n:
            raise ValueError(f"2*l = {2 * self.l} exceeds source length n = {self.n}")


@dataclass(frozen=True)
class SourceLatent:
    """Normalized latent and the per-vector factor applied to reach ``||z||^2 = l``."""

    z: np.ndarray
    norm: np.ndarray


@dataclass(frozen=True)
class DistortionReport:
    mse: float
    psnr_db: float
    analytic_mse: float


def sample_sources(src: GaussianSource, seed: Seed, count: int) -> np.ndarray:
    rng = rng_for(seed, SOURCE_DRAW)
    return rng.standard_normal((count, src.n)) * math.sqrt(src.variance)


def sample_source(src: GaussianSource, seed: Seed) -> np.ndarray:
    return sample_sources(src, seed, 1)[0]


def _pack(codec: LinearCodec, x):
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != codec.n:
        raise DimensionError(f"source vector has length {x.shape[-1]}, codec expects {codec.n}")
    kept = x[..., : 2 * codec.l]
    return (kept[..., 0::2] + 1j * kept[..., 1::2]) / math.sqrt(2.0)


def encode_source(codec: LinearCodec, x) -> SourceLatent:
    raw = _pack(codec, x)
    z = normalize_latent(raw)
    # every entry of raw was scaled by the same factor
    energy = np.sum(np.abs(raw) ** 2, axis=-1)
    return SourceLatent(z=z, norm=np.sqrt(codec.l / energy))


def decode_source(codec: LinearCodec, z_hat: EqualizedLatent | np.ndarray, norm=1.0) -> np.ndarray:
    """Unpack estimated symbols into a length-``n`` real vector.

    Coordinates that were never transmitted are filled with their prior mean,
    zero. ``norm`` is the factor reported by :func:`encode_source`.
    """
    symbols = z_hat.symbols if isinstance(z_hat, EqualizedLatent) else np.asarray(z_hat)
    if symbols.shape[-1] != codec.l:
        raise DimensionError(f"got {symbols.shape[-1]} symbols, codec expects l = {codec.l}")
    raw = symbols * (math.sqrt(2.0) / np.asarray(norm, dtype=float)[..., np.newaxis])
    out = np.zeros(symbols.shape[:-1] + (codec.n,))
    out[..., 0 : 2 * codec.l : 2] = raw.real
    out[..., 1 : 2 * codec.l : 2] = raw.imag
    return out


def analytic_distortion(codec: LinearCodec, err_var, variance: float = 1.0):
    """Predicted per-sample MSE: dropped coordinates plus symbol estimation error."""
    err_var = np.asarray(err_var, dtype=float)
    total = (codec.n - 2 * codec.l) * variance + 2.0 * variance * np.sum(err_var, axis=-1)
    return total / codec.n


def psnr(mse, max_val: float = 1.0):
    """PSNR in dB; ``inf`` when ``mse == 0``."""
    mse = np.asarray(mse, dtype=float)
    if np.any(mse < 0):
        raise ValueError("mse must be nonnegative")
    with np.errstate(divide="ignore"):
        out = 10.0 * np.log10(max_val ** 2 / mse)
    return float(out) if out.ndim == 0 else out


def distortion_report(x, x_hat, codec: LinearCodec, err_var, variance=1.0, max_val=1.0) -> DistortionReport:
    mse = float(np.mean((np.asarray(x) - np.asarray(x_hat)) ** 2))
    analytic = float(np.mean(analytic_distortion(codec, err_var, variance)))
    return DistortionReport(mse=mse, psnr_db=psnr(mse, max_val), analytic_mse=analytic)
