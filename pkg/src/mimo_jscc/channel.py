"""Block Rayleigh fading MIMO channel ``Y = sqrt(P) H S + N``."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, PowerConstraintError
from .numerics import frobenius_norm_sq

__all__ = [
    "ChannelParams",
    "ChannelState",
    "Seed",
    "rng_for",
    "complex_normal",
    "sample_channel",
    "sample_channels",
    "transmit",
    "snr_db",
    "noise_var_for_snr",
]

# Purpose tags mixed into the seed so that the channel, noise and source draws
# of one trial are independent even when they share a Seed.
CHANNEL_DRAW = 0
NOISE_DRAW = 1
SOURCE_DRAW = 2

_U64 = (1 << 64) - 1


@dataclass(frozen=True)
class Seed:
    """Key of a reproducible random stream.

    ``(master, stream)`` fully determines every draw made from it. Sweeps use
    the trial (or trial-block) index as ``stream``.
    """

    master: int
    stream: int = 0

    def __post_init__(self):
        for name in ("master", "stream"):
            v = getattr(self, name)
            if not 0 <= v <= _U64:
                raise ValueError(f"seed {name} must be an unsigned 64-bit integer, got {v}")


def rng_for(seed: Seed, purpose: int, *salt: int) -> np.random.Generator:
    """Counter-based (Philox) generator keyed by ``seed``, a purpose tag and
    optional extra integers."""
    ss = np.random.SeedSequence([seed.master, seed.stream, purpose, *salt])
    return np.random.Generator(np.random.Philox(ss))


def complex_normal(rng: np.random.Generator, shape, var: float = 1.0) -> np.ndarray:
    """Circularly-symmetric complex Gaussian samples with ``E|x|^2 = var``."""
    scale = math.sqrt(var / 2.0)
    re = rng.standard_normal(shape)
    im = rng.standard_normal(shape)
    return (re + 1j * im) * scale


@dataclass(frozen=True)
class ChannelParams:
    nt: int
    nr: int
    power: float
    noise_var: float

    def __post_init__(self):
        if int(self.nt) != self.nt or self.nt < 1:
            raise ValueError(f"nt must be a positive integer, got {self.nt}")
        if int(self.nr) != self.nr or self.nr < 1:
            raise ValueError(f"nr must be a positive integer, got {self.nr}")
        if not self.power > 0 or not math.isfinite(self.power):
            raise ValueError(f"power must be positive, got {self.power}")
        if not self.noise_var > 0 or not math.isfinite(self.noise_var):
            raise ValueError(f"noise_var must be positive, got {self.noise_var}")

    @classmethod
    def from_snr_db(cls, snr: float, nt: int, nr: int, power: float = 1.0) -> "ChannelParams":
        return cls(nt=nt, nr=nr, power=power, noise_var=noise_var_for_snr(snr, nt, power))

    @property
    def snr_linear(self) -> float:
        """``P / sigma^2`` (not divided by ``nt``)."""
        return self.power / self.noise_var


@dataclass(frozen=True)
class ChannelState:
    """One channel realization ``H`` of shape ``(nr, nt)``.

    ``h`` may also hold a stack ``(..., nr, nt)`` of independent realizations;
    every receiver and metric function broadcasts over the leading axes.
    """

    h: np.ndarray

    def __post_init__(self):
        h = np.array(self.h, dtype=np.complex128)
        if h.ndim < 2:
            raise DimensionError(f"channel matrix must be at least 2-D, got shape {h.shape}")
        if not np.all(np.isfinite(h)):
            raise ValueError("channel matrix entries must be finite")
        h.flags.writeable = False
        object.__setattr__(self, "h", h)

    @property
    def nr(self) -> int:
        return self.h.shape[-2]

    @property
    def nt(self) -> int:
        return self.h.shape[-1]

    def check(self, params: ChannelParams) -> None:
        if (self.nr, self.nt) != (params.nr, params.nt):
            raise DimensionError(
                f"channel is {self.nr}x{self.nt} but params declare nr={params.nr}, nt={params.nt}"
            )


def sample_channels(params: ChannelParams, seed: Seed, count: int, salt: int = 0) -> ChannelState:
    """``count`` i.i.d. realizations stacked along axis 0.

    The draw depends only on ``(seed, salt)`` and the antenna counts, never on
    power or noise, so SNR grids that reuse a seed share channels.
    """
    rng = rng_for(seed, CHANNEL_DRAW, salt)
    re = rng.standard_normal((count, 2, params.nr, params.nt))
    h = (re[:, 0] + 1j * re[:, 1]) * math.sqrt(0.5)
    return ChannelState(h)


def sample_channel(params: ChannelParams, seed: Seed) -> ChannelState:
    return ChannelState(sample_channels(params, seed, 1).h[0])


def transmit(
    s,
    state: ChannelState,
    params: ChannelParams,
    seed: Seed | None = None,
    *,
    noiseless: bool = False,
) -> np.ndarray:
    """Pass frame(s) ``s`` of shape ``(..., nt, k)`` through the channel.

    Parameters
    ----------
    s : array_like
        Unit-budget transmit frame; ``||s||_F^2 <= nt k`` is enforced per frame.
    state : ChannelState
        Realization(s) ``H``; broadcast against the leading axes of ``s``.
    params : ChannelParams
    seed : Seed
        Key of the noise draw. Required unless ``noiseless``.
    noiseless : bool
        Drop the noise term entirely (oracle testing only).

    Returns
    -------
    numpy.ndarray
        ``Y`` of shape ``(..., nr, k)``.
    """
    state.check(params)
    s = np.asarray(s, dtype=np.complex128)
    if s.ndim < 2 or s.shape[-2] != params.nt:
        raise DimensionError(f"frame shape {s.shape} does not match nt={params.nt}")
    k = s.shape[-1]
    energy = np.atleast_1d(frobenius_norm_sq(s))
    budget = params.nt * k + 1e-6
    if np.any(energy > budget):
        raise PowerConstraintError(
            f"frame energy {float(np.max(energy)):.9g} exceeds budget nt*k = {params.nt * k}"
        )
    y = math.sqrt(params.power) * (state.h @ s)
    if noiseless:
        return y
    if seed is None:
        raise ValueError("a noise seed is required unless noiseless=True")
    rng = rng_for(seed, NOISE_DRAW)
    return y + complex_normal(rng, y.shape, params.noise_var)


def snr_db(params: ChannelParams) -> float:
    """Average SNR per receive antenna, ``P / (nt sigma^2)``, in dB."""
    return 10.0 * math.log10(params.power / (params.nt * params.noise_var))


def noise_var_for_snr(snr_db: float, nt: int, power: float = 1.0) -> float:
    return power / (nt * 10.0 ** (snr_db / 10.0))
