"""Receivers: OSTBC decoupling with scalar MMSE, and linear MMSE equalization
with a pluggable post-equalizer for the multiplexing path."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Dict

import numpy as np

from .channel import ChannelParams, ChannelState
from .errors import DimensionError, SchemeError
from .numerics import frobenius_norm_sq, hermitian, inv_hpd, solve_hpd
from .stm import StmScheme, block_matrix

__all__ = [
    "EquivalentChannel",
    "EqualizedLatent",
    "alamouti_decouple",
    "ostbc_scalar_mmse",
    "equivalent_channel",
    "ostbc_decode",
    "mmse_filter",
    "mmse_error_variance",
    "mmse_equalize",
    "PostEqualizer",
    "AffineHook",
    "zero_hook",
    "register_post_equalizer",
    "get_post_equalizer",
    "post_equalize",
]


@dataclass(frozen=True)
class EquivalentChannel:
    """Real-valued model ``y_real = sqrt(P) * scale * a @ x_real + n`` of one block.

    ``a`` has shape ``(..., 2*N*nr, 2*K)`` and satisfies ``a.T @ a == gain * I``.
    ``x_real`` is ``[Re x; Im x]`` and ``y_real`` stacks the real then
    imaginary parts of the row-major flattened ``nr x N`` received block.
    ``gain`` equals ``scheme.code_gain * ||H||_F^2``; ``scale`` is the scheme's
    frame power constant, so the decoder sees an effective gain
    ``scale**2 * gain``.
    """

    a: np.ndarray
    gain: np.ndarray
    scale: float

    @property
    def effective_gain(self):
        return self.scale ** 2 * self.gain


@dataclass(frozen=True)
class EqualizedLatent:
    """Symbol estimates with per-symbol shrinkage and residual error variance.

    ``per_symbol_err_var`` is the predicted ``E|z_hat - z|^2`` for a
    unit-variance symbol; ``per_symbol_gain`` is ``E[z_hat | z] / z``.
    """

    symbols: np.ndarray
    per_symbol_gain: np.ndarray
    per_symbol_err_var: np.ndarray

    def __post_init__(self):
        shape = np.shape(self.symbols)
        for name in ("per_symbol_gain", "per_symbol_err_var"):
            v = np.broadcast_to(np.asarray(getattr(self, name), dtype=float), shape)
            object.__setattr__(self, name, v)

    def __len__(self):
        return np.shape(self.symbols)[-1]


def _as_column(y, nr):
    y = np.asarray(y, dtype=np.complex128)
    if y.ndim >= 2 and y.shape[-2:] == (nr, 1):
        y = y[..., 0]
    if y.shape[-1] != nr:
        raise DimensionError(f"received column has shape {y.shape}, expected (..., {nr})")
    return y


def alamouti_decouple(y1, y2, state: ChannelState, power: float):
    """Alamouti combining of the two received slot columns of one block.

    Returns ``(m1, m2)``; without noise ``m_i == P * ||H||_F^2 * z_i``.
    """
    h = state.h
    if state.nt != 2:
        raise SchemeError(f"Alamouti decoupling needs nt=2, got nt={state.nt}")
    y1, y2 = (_as_column(v, state.nr) for v in (y1, y2))
    ha, hb = h[..., :, 0], h[..., :, 1]
    sp = math.sqrt(power)
    m1 = sp * np.sum(np.conj(ha) * y1, axis=-1) + sp * np.sum(np.conj(y2) * hb, axis=-1)
    m2 = sp * np.sum(np.conj(hb) * y1, axis=-1) - sp * np.sum(np.conj(y2) * ha, axis=-1)
    return m1, m2


def ostbc_scalar_mmse(m, gain, power: float, noise_var: float):
    """``m / (P g + sigma^2)``."""
    return np.asarray(m) / (power * np.asarray(gain) + noise_var)


def _basis_blocks(scheme: StmScheme) -> np.ndarray:
    # (2K, nt, N): block matrices for x = e_k and x = j e_k
    K = scheme.symbols_per_block
    eye = np.eye(K, dtype=np.complex128)
    return block_matrix(scheme, np.concatenate([eye, 1j * eye], axis=0))


def equivalent_channel(scheme: StmScheme, state: ChannelState) -> EquivalentChannel:
    if not scheme.is_ostbc:
        raise SchemeError("multiplexing has no orthogonal structure; use mmse_equalize")
    if state.nt != scheme.nt:
        raise SchemeError(f"{scheme.name} uses nt={scheme.nt}, channel has nt={state.nt}")
    basis = _basis_blocks(scheme)
    h = state.h[..., np.newaxis, :, :]
    hb = h @ basis  # (..., 2K, nr, N)
    flat = hb.reshape(hb.shape[:-2] + (-1,))
    cols = np.concatenate([flat.real, flat.imag], axis=-1)  # (..., 2K, 2 nr N)
    a = np.swapaxes(cols, -1, -2)
    gain = scheme.code_gain * frobenius_norm_sq(state.h)
    return EquivalentChannel(a=a, gain=gain, scale=scheme.power_scale)


def _strip(x, n_pad):
    return x[..., : x.shape[-1] - n_pad] if n_pad else x


def ostbc_decode(
    scheme: StmScheme,
    y,
    state: ChannelState,
    params: ChannelParams,
    n_pad: int = 0,
) -> EqualizedLatent:
    """Matched filter on the equivalent channel, then scalar MMSE per symbol.

    Parameters
    ----------
    y : array_like
        Received frame(s), shape ``(..., nr, N * num_blocks)``.
    n_pad : int
        Trailing zero symbols appended by the transmitter; dropped here.
    """
    state.check(params)
    y = np.asarray(y, dtype=np.complex128)
    N, K = scheme.slots_per_block, scheme.symbols_per_block
    if y.ndim < 2 or y.shape[-2] != params.nr or y.shape[-1] % N:
        raise DimensionError(
            f"received frame {y.shape} is not nr={params.nr} x multiple of {N} slots"
        )
    eq = equivalent_channel(scheme, state)
    nblocks = y.shape[-1] // N
    lead = y.shape[:-2]
    blocks = y.reshape(lead + (params.nr, nblocks, N))
    blocks = np.moveaxis(blocks, -2, -3).reshape(lead + (nblocks, params.nr * N))
    y_real = np.concatenate([blocks.real, blocks.imag], axis=-1)  # (..., nblocks, 2 nr N)
    a_eff = eq.scale * eq.a
    # m_real = sqrt(P) a_eff^T y_real, per block
    m_real = math.sqrt(params.power) * np.einsum("...rk,...br->...bk", a_eff, y_real)
    m = m_real[..., :K] + 1j * m_real[..., K:]
    g = np.asarray(eq.effective_gain)[..., np.newaxis, np.newaxis]
    denom = params.power * g + params.noise_var
    z_hat = (m / denom).reshape(m.shape[:-2] + (nblocks * K,))
    gain = np.broadcast_to(params.power * g / denom, m.shape).reshape(z_hat.shape)
    err = np.broadcast_to(params.noise_var / denom, m.shape).reshape(z_hat.shape)
    return EqualizedLatent(_strip(z_hat, n_pad), _strip(gain, n_pad), _strip(err, n_pad))


def mmse_filter(state: ChannelState, params: ChannelParams) -> np.ndarray:
    """Linear MMSE filter ``W`` (``nt x nr``) estimating unit-variance ``Z`` from
    ``Y = sqrt(P) H Z + N``.

    ``W = P^{-1/2} H^H (H H^H + sigma^2/P I)^{-1}``. At ``P = 1`` this is the
    textbook ``H^H (H H^H + sigma^2 I)^{-1}``.
    """
    state.check(params)
    h = state.h
    gram = h @ hermitian(h) + (params.noise_var / params.power) * np.eye(params.nr)
    return hermitian(solve_hpd(gram, h)) / math.sqrt(params.power)


def mmse_error_variance(state: ChannelState, params: ChannelParams) -> np.ndarray:
    """Diagonal of ``(I + (P/sigma^2) H^H H)^{-1}``, one entry per stream."""
    h = state.h
    m = np.eye(params.nt) + params.snr_linear * (hermitian(h) @ h)
    return np.real(np.diagonal(inv_hpd(m), axis1=-2, axis2=-1))


def mmse_equalize(y, state: ChannelState, params: ChannelParams, n_pad: int = 0) -> EqualizedLatent:
    """Column-wise linear MMSE estimate of a multiplexed frame.

    The filter is computed once per channel realization and applied to all
    ``k`` columns. Symbols are returned in the column-major order used by
    the multiplexing mapper.
    """
    state.check(params)
    y = np.asarray(y, dtype=np.complex128)
    if y.ndim < 2 or y.shape[-2] != params.nr:
        raise DimensionError(f"received frame {y.shape} does not have nr={params.nr} rows")
    w = mmse_filter(state, params)
    z = w @ y  # (..., nt, k)
    err = mmse_error_variance(state, params)  # (..., nt)
    k = y.shape[-1]
    symbols = np.swapaxes(z, -1, -2).reshape(z.shape[:-2] + (params.nt * k,))
    err_full = np.broadcast_to(err[..., np.newaxis, :], z.shape[:-2] + (k, params.nt))
    err_full = err_full.reshape(symbols.shape[:-1] + (params.nt * k,))
    return EqualizedLatent(_strip(symbols, n_pad), _strip(1.0 - err_full, n_pad), _strip(err_full, n_pad))


# Post-equalizer hooks: callables (y, h) -> correction, with y of shape
# (..., nr, k), h of shape (..., nr, nt) and a correction of shape (..., nt, k).
PostEqualizer = Callable[[np.ndarray, np.ndarray], np.ndarray]


def zero_hook(y, h):
    return np.zeros(np.shape(h)[:-2] + (np.shape(h)[-1], np.shape(y)[-1]), dtype=np.complex128)


@dataclass(frozen=True)
class AffineHook:
    """Correction ``M @ y + c``; used to exercise the hook seam in tests."""

    matrix: np.ndarray
    offset: complex = 0.0

    def __call__(self, y, h):
        m = np.asarray(self.matrix, dtype=np.complex128)
        return m @ np.asarray(y) + self.offset


_REGISTRY: Dict[str, PostEqualizer] = {"zero": zero_hook}


def register_post_equalizer(name: str, hook: PostEqualizer) -> None:
    _REGISTRY[name] = hook


def get_post_equalizer(name: str) -> PostEqualizer:
    try:
        return _REGISTRY[name]
    except KeyError:
        raise KeyError(f"unknown post-equalizer {name!r}; registered: {sorted(_REGISTRY)}") from None


def post_equalize(hook: PostEqualizer | str, z_mmse: EqualizedLatent, y, state: ChannelState) -> EqualizedLatent:
    """Add a learned-style residual correction ``hook(Y, H)`` to an MMSE estimate."""
    if isinstance(hook, str):
        hook = get_post_equalizer(hook)
    if hook is zero_hook:
        return z_mmse
    corr = np.asarray(hook(np.asarray(y), state.h), dtype=np.complex128)
    flat = np.swapaxes(corr, -1, -2).reshape(corr.shape[:-2] + (-1,))
    flat = flat[..., : len(z_mmse)]
    return EqualizedLatent(z_mmse.symbols + flat, z_mmse.per_symbol_gain, z_mmse.per_symbol_err_var)
