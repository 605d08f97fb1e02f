"""Space-time mapping of latent vectors onto transmit antennas.

Four mappings are supported:

========== ============== ==== ==== ==========================
name       kind           K    N    antennas
========== ============== ==== ==== ==========================
mux        Multiplexing   nt   1    any
alamouti   Alamouti       2    2    2
ostbc3-r12 Ostbc3Rate12   4    8    3
ostbc3-r34 Ostbc3Rate34   3    4    3
========== ============== ==== ==== ==========================

``K`` symbols are carried by each block of ``N`` slots. Frames are laid out
antennas x slots, i.e. column ``t`` is what the antennas radiate in slot ``t``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple

import numpy as np

from .errors import ConfigError, DegenerateInputError, DimensionError, SchemeError

__all__ = [
    "SchemeKind",
    "StmScheme",
    "ImageDims",
    "Frame",
    "normalize_latent",
    "zero_pad",
    "encode",
    "map_frame",
    "block_matrix",
    "channel_uses",
    "latent_length",
    "parse_rho",
]

_R2 = math.sqrt(2.0)


class SchemeKind(enum.Enum):
    MULTIPLEXING = "mux"
    ALAMOUTI = "alamouti"
    OSTBC3_RATE12 = "ostbc3-r12"
    OSTBC3_RATE34 = "ostbc3-r34"


# kind -> (K, N, required nt or None, code gain c in B B^H = c sum|x|^2 I)
_SHAPES = {
    SchemeKind.ALAMOUTI: (2, 2, 2, 1.0),
    SchemeKind.OSTBC3_RATE12: (4, 8, 3, 2.0),
    SchemeKind.OSTBC3_RATE34: (3, 4, 3, 1.0),
}

# Amplitude applied to whole frames so a normalized latent fills the
# nt*k energy budget exactly.
_POWER_SCALE = {
    SchemeKind.MULTIPLEXING: 1.0,
    SchemeKind.ALAMOUTI: 1.0,
    SchemeKind.OSTBC3_RATE12: 1.0,
    SchemeKind.OSTBC3_RATE34: math.sqrt(4.0 / 3.0),
}


@dataclass(frozen=True)
class StmScheme:
    kind: SchemeKind
    nt: int

    def __post_init__(self):
        if int(self.nt) != self.nt or self.nt < 1:
            raise SchemeError(f"nt must be a positive integer, got {self.nt}")
        if self.kind in _SHAPES and _SHAPES[self.kind][2] != self.nt:
            raise SchemeError(
                f"scheme {self.kind.value!r} requires nt={_SHAPES[self.kind][2]}, got nt={self.nt}"
            )

    @classmethod
    def from_name(cls, name: str, nt: int) -> "StmScheme":
        try:
            kind = SchemeKind(name)
        except ValueError:
            known = ", ".join(k.value for k in SchemeKind)
            raise SchemeError(f"unknown scheme {name!r}; expected one of {known}") from None
        return cls(kind, nt)

    @property
    def name(self) -> str:
        return self.kind.value

    @property
    def is_ostbc(self) -> bool:
        return self.kind is not SchemeKind.MULTIPLEXING

    @property
    def symbols_per_block(self) -> int:
        if self.kind is SchemeKind.MULTIPLEXING:
            return self.nt
        return _SHAPES[self.kind][0]

    @property
    def slots_per_block(self) -> int:
        if self.kind is SchemeKind.MULTIPLEXING:
            return 1
        return _SHAPES[self.kind][1]

    @property
    def rate(self) -> Fraction:
        """Complex symbols per channel use."""
        return Fraction(self.symbols_per_block, self.slots_per_block)

    @property
    def code_gain(self) -> float:
        """``c`` in ``B B^H = c (sum |x_i|^2) I`` for one unscaled block."""
        if self.kind is SchemeKind.MULTIPLEXING:
            raise SchemeError("multiplexing has no orthogonal block structure")
        return _SHAPES[self.kind][3]

    @property
    def power_scale(self) -> float:
        return _POWER_SCALE[self.kind]


class ImageDims(NamedTuple):
    channels: int
    height: int
    width: int

    @property
    def size(self) -> int:
        return self.channels * self.height * self.width


@dataclass(frozen=True)
class Frame:
    """Transmit frame plus the number of zeros appended to the latent."""

    s: np.ndarray
    n_pad: int
    scheme: StmScheme


def normalize_latent(raw) -> np.ndarray:
    """Scale ``raw`` (shape ``(..., l)``) so that ``||z||^2 == l`` per vector."""
    raw = np.asarray(raw, dtype=np.complex128)
    if raw.ndim == 0 or raw.shape[-1] == 0:
        raise DegenerateInputError("latent vector is empty")
    l = raw.shape[-1]
    peak = np.max(np.abs(raw), axis=-1, keepdims=True)
    if np.any(peak == 0):
        raise DegenerateInputError("cannot normalize an all-zero latent vector")
    # pre-scaling keeps tiny or huge inputs from under/overflowing the energy
    unit = raw / peak
    energy = np.sum(unit.real ** 2 + unit.imag ** 2, axis=-1, keepdims=True)
    return unit * np.sqrt(l / energy)


def zero_pad(scheme: StmScheme, z) -> tuple[np.ndarray, int]:
    """Append zeros so the latent length is a multiple of the block size."""
    z = np.asarray(z, dtype=np.complex128)
    n_pad = -z.shape[-1] % scheme.symbols_per_block
    if n_pad:
        pad = np.zeros(z.shape[:-1] + (n_pad,), dtype=np.complex128)
        z = np.concatenate([z, pad], axis=-1)
    return z, n_pad


def _blocks_alamouti(x):
    x1, x2 = x[..., 0], x[..., 1]
    rows = [
        [x1, x2],
        [-np.conj(x2), np.conj(x1)],
    ]
    return rows


def _blocks_r12(x):
    x1, x2, x3, x4 = (x[..., i] for i in range(4))
    rows = [
        [x1, x2, x3],
        [-x2, x1, -x4],
        [-x3, x4, x1],
        [-x4, -x3, x2],
    ]
    return rows + [[np.conj(v) for v in r] for r in rows]


def _blocks_r34(x):
    x1, x2, x3 = x[..., 0], x[..., 1], x[..., 2]
    c1, c2, c3 = np.conj(x1), np.conj(x2), np.conj(x3)
    return [
        [x1, x2, x3 / _R2],
        [-c2, c1, x3 / _R2],
        [c3 / _R2, c3 / _R2, (-x1 - c1 + x2 - c2) / 2],
        [c3 / _R2, -c3 / _R2, (x2 + c2 + x1 - c1) / 2],
    ]


_BLOCK_BUILDERS = {
    SchemeKind.ALAMOUTI: _blocks_alamouti,
    SchemeKind.OSTBC3_RATE12: _blocks_r12,
    SchemeKind.OSTBC3_RATE34: _blocks_r34,
}


def block_matrix(scheme: StmScheme, x) -> np.ndarray:
    """Unscaled transmission matrix ``B`` (antennas x slots) of one block.

    ``x`` has shape ``(..., K)``; the result has shape ``(..., nt, N)``.
    """
    x = np.asarray(x, dtype=np.complex128)
    if x.shape[-1] != scheme.symbols_per_block:
        raise DimensionError(
            f"{scheme.name} blocks carry {scheme.symbols_per_block} symbols, got {x.shape[-1]}"
        )
    if scheme.kind is SchemeKind.MULTIPLEXING:
        return x[..., :, np.newaxis]
    rows = _BLOCK_BUILDERS[scheme.kind](x)
    g = np.stack([np.stack(r, axis=-1) for r in rows], axis=-2)  # (..., N, nt)
    return np.swapaxes(g, -1, -2)


def encode(scheme: StmScheme, z) -> np.ndarray:
    """Map latent(s) ``z`` of shape ``(..., l)`` to frames ``(..., nt, slots)``.

    ``l`` must be a multiple of the block size; use :func:`map_frame` to pad
    automatically. The output is scaled by the scheme's power constant but
    not by ``sqrt(P)``, which the channel applies.
    """
    z = np.asarray(z, dtype=np.complex128)
    if z.ndim == 0 or z.shape[-1] == 0:
        raise DegenerateInputError("latent vector is empty")
    K = scheme.symbols_per_block
    l = z.shape[-1]
    if l % K:
        raise DimensionError(f"latent length {l} is not a multiple of {scheme.name} block size {K}")
    lead = z.shape[:-1]
    nblocks = l // K
    x = z.reshape(lead + (nblocks, K))
    b = block_matrix(scheme, x)  # (..., nblocks, nt, N)
    b = np.moveaxis(b, -3, -2)  # (..., nt, nblocks, N)
    s = b.reshape(lead + (scheme.nt, nblocks * scheme.slots_per_block))
    return s * scheme.power_scale


def map_frame(scheme: StmScheme, z) -> Frame:
    padded, n_pad = zero_pad(scheme, z)
    return Frame(encode(scheme, padded), n_pad, scheme)


def parse_rho(rho) -> Fraction:
    """Bandwidth ratio as an exact fraction (accepts ``"5/24"``, ``0.125``, Fraction)."""
    if isinstance(rho, Fraction):
        out = rho
    elif isinstance(rho, str):
        try:
            out = Fraction(rho.strip())
        except (ValueError, ZeroDivisionError):
            raise ConfigError(f"cannot parse bandwidth ratio {rho!r}") from None
    elif isinstance(rho, int):
        out = Fraction(rho)
    else:
        out = Fraction(float(rho)).limit_denominator(1_000_000)
    if out <= 0:
        raise ConfigError(f"bandwidth ratio must be positive, got {out}")
    return out


def channel_uses(rho, dims: ImageDims) -> int:
    """Number of channel uses ``k = rho * C * H * W``."""
    k = parse_rho(rho) * dims.size
    if k.denominator != 1 or k <= 0:
        raise ConfigError(
            f"rho * C*H*W = {k} ({float(k):.6g}) is not a positive integer number of channel uses"
        )
    return int(k)


def latent_length(scheme: StmScheme, k: int) -> int:
    """Complex latent symbols carried by ``k`` channel uses."""
    N = scheme.slots_per_block
    if k <= 0 or k % N:
        raise ConfigError(f"{scheme.name} needs k divisible by {N}, got k={k}")
    return k // N * scheme.symbols_per_block
