"""Deterministic, optionally parallel execution of sweep grids.

Trials are processed in fixed blocks of ``TRIAL_BLOCK``. Block ``b`` of the
cells with ``nr`` receive antennas draws all its randomness from
``Seed(master_seed, (nr << 32) | b)``, so every scheme, SNR point and
bandwidth ratio sees the same channels and sources (common random numbers),
and the result does not depend on which worker ran which block. Per-trial
values are concatenated in block order before any reduction.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from ..baseline import mimo_capacity, separation_distortion
from ..channel import ChannelParams, Seed, sample_channels, transmit
from ..metrics import scheme_sinr, sinr_diversity, sinr_mmse
from ..receiver import mmse_equalize, ostbc_decode, post_equalize
from ..source import GaussianSource, LinearCodec, analytic_distortion, decode_source, encode_source, psnr, sample_sources
from ..stm import ImageDims, StmScheme, channel_uses, latent_length, map_frame
from .config import SEPARATION, SweepConfig
from .results import Row, SweepResult

TRIAL_BLOCK = 64
Z95 = 1.959963984540054


@dataclass(frozen=True)
class FrameJob:
    """Everything needed to simulate one block of trials of one grid cell."""

    scheme: str
    nt: int
    nr: int
    snr_db: float
    rho: Fraction
    dims: ImageDims
    source_variance: float
    power: float
    post_equalizer: str
    seed: Seed
    count: int
    outage_threshold_db: float | None = None


def block_seed(master: int, nr: int, block: int) -> Seed:
    return Seed(master, (nr << 32) | block)


def codec_for(scheme: StmScheme, k: int, n: int) -> LinearCodec:
    """Codec sized to the scheme's latent length, capped at ``n/2`` symbols."""
    return LinearCodec(n, min(latent_length(scheme, k), n // 2))


def simulate_frames(job: FrameJob) -> dict:
    """Run ``job.count`` frames end to end; returns per-trial arrays.

    Keys: ``mse`` always; ``mse_analytic``, ``sinr`` for transmission schemes;
    ``capacity`` for the separation baseline; ``outage`` when a threshold is
    given.
    """
    params = ChannelParams.from_snr_db(job.snr_db, job.nt, job.nr, job.power)
    k = channel_uses(job.rho, job.dims)
    n = job.dims.size
    state = sample_channels(params, job.seed, job.count)
    x = sample_sources(GaussianSource(n, job.source_variance), job.seed, job.count)

    if job.scheme == SEPARATION:
        cap = np.atleast_1d(mimo_capacity(state, params))
        return {"mse": separation_distortion(cap, k, n, job.source_variance), "capacity": cap}

    scheme = StmScheme.from_name(job.scheme, job.nt)
    l = latent_length(scheme, k)
    codec = codec_for(scheme, k, n)
    enc = encode_source(codec, x)
    z = np.concatenate([enc.z, np.zeros((job.count, l - codec.l), dtype=np.complex128)], axis=-1)
    frame = map_frame(scheme, z)
    y = transmit(frame.s, state, params, job.seed)
    n_pad = frame.n_pad + (l - codec.l)
    if scheme.is_ostbc:
        est = ostbc_decode(scheme, y, state, params, n_pad=n_pad)
        sinr = sinr_diversity(state, params, scheme)
    else:
        est = post_equalize(job.post_equalizer, mmse_equalize(y, state, params, n_pad=n_pad), y, state)
        sinr = np.mean(sinr_mmse(state, params), axis=-1)
    x_hat = decode_source(codec, est, enc.norm)
    out = {
        "mse": np.mean((x - x_hat) ** 2, axis=-1),
        "mse_analytic": analytic_distortion(codec, est.per_symbol_err_var, job.source_variance),
        "sinr": np.atleast_1d(sinr),
    }
    if job.outage_threshold_db is not None:
        thr = 10.0 ** (job.outage_threshold_db / 10.0)
        out["outage"] = (np.atleast_1d(scheme_sinr(scheme, state, params)) < thr).astype(float)
    return out


def _mean_ci(v: np.ndarray) -> tuple[float, float]:
    mean = float(np.mean(v))
    if v.size < 2:
        return mean, 0.0
    return mean, Z95 * float(np.std(v, ddof=1)) / math.sqrt(v.size)


def _db_with_ci(mean: float, ci: float) -> tuple[float, float]:
    # delta method: d(10 log10 u) = 10 / (u ln 10) du
    if mean <= 0:
        return -math.inf, 0.0
    return 10.0 * math.log10(mean), 10.0 / math.log(10.0) * ci / mean


def _cells(cfg: SweepConfig):
    for rho in cfg.rho_list:
        for scheme in cfg.schemes:
            for nr in cfg.nr_list:
                for snr in cfg.snr_db_grid:
                    yield scheme, nr, snr, rho


def _jobs(cfg: SweepConfig):
    nblocks = -(-cfg.trials // TRIAL_BLOCK)
    for scheme, nr, snr, rho in _cells(cfg):
        for b in range(nblocks):
            count = min(TRIAL_BLOCK, cfg.trials - b * TRIAL_BLOCK)
            yield FrameJob(
                scheme=scheme,
                nt=cfg.nt,
                nr=nr,
                snr_db=snr,
                rho=rho,
                dims=cfg.dims,
                source_variance=cfg.source_variance,
                power=cfg.power,
                post_equalizer=cfg.post_equalizer,
                seed=block_seed(cfg.master_seed, nr, b),
                count=count,
                outage_threshold_db=None if scheme == SEPARATION else cfg.outage_threshold_db,
            )


def sweep_meta(cfg: SweepConfig) -> dict:
    schemes = {}
    for name in cfg.schemes:
        if name == SEPARATION:
            schemes[name] = {"rate_distortion": "variance * 2**(-2 k C / n)", "capacity_identity": "I_nt"}
            continue
        sc = StmScheme.from_name(name, cfg.nt)
        entry = {
            "symbols_per_block": sc.symbols_per_block,
            "slots_per_block": sc.slots_per_block,
            "power_scale": sc.power_scale,
        }
        if sc.is_ostbc:
            entry["code_gain"] = sc.code_gain
        entry["latent_length"] = {
            str(rho): latent_length(sc, cfg.channel_uses(rho)) for rho in cfg.rho_list
        }
        entry["codec_symbols"] = {
            str(rho): codec_for(sc, cfg.channel_uses(rho), cfg.n).l for rho in cfg.rho_list
        }
        schemes[name] = entry
    return {
        "source_n": cfg.n,
        "channel_uses": {str(rho): cfg.channel_uses(rho) for rho in cfg.rho_list},
        "schemes": schemes,
        "mux_sinr_db_aggregate": "mean over streams",
        "mux_outage_aggregate": "min over streams",
        "trial_block": TRIAL_BLOCK,
        "ci95": "normal approximation, 1.96 * std / sqrt(trials)",
    }


def run_sweep(cfg: SweepConfig, workers: int = 1) -> SweepResult:
    """Run every grid cell of ``cfg`` and reduce to one row per cell and metric."""
    cfg.validate()
    jobs = list(_jobs(cfg))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outs = list(pool.map(simulate_frames, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    else:
        outs = [simulate_frames(j) for j in jobs]

    nblocks = -(-cfg.trials // TRIAL_BLOCK)
    rows = []
    for i, (scheme, nr, snr, rho) in enumerate(_cells(cfg)):
        parts = outs[i * nblocks:(i + 1) * nblocks]
        merged = {key: np.concatenate([p[key] for p in parts]) for key in parts[0]}

        def row(metric, value, ci):
            return Row(scheme, cfg.nt, nr, snr, rho, metric, value, ci, cfg.trials, cfg.master_seed)

        mse, mse_ci = _mean_ci(merged["mse"])
        rows.append(row("mse", mse, mse_ci))
        p = psnr(mse, cfg.max_val)
        rows.append(row("psnr_db", p, 10.0 / math.log(10.0) * mse_ci / mse if mse > 0 else 0.0))
        if "sinr" in merged:
            rows.append(row("sinr_db", *_db_with_ci(*_mean_ci(merged["sinr"]))))
        if "outage" in merged:
            rows.append(row("outage_prob", *_mean_ci(merged["outage"])))
        if "capacity" in merged:
            rows.append(row("capacity_bpcu", *_mean_ci(merged["capacity"])))
    return SweepResult(rows=rows, meta=sweep_meta(cfg))
