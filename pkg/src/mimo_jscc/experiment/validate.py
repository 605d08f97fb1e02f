"""Cross-module invariant suite behind ``mimo-jscc validate``."""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate, special

from ..baseline import ergodic_capacity
from ..channel import ChannelParams, ChannelState, Seed, complex_normal, sample_channels, transmit
from ..metrics import diversity_order_estimate, outage_curve, outage_probability, sinr_mmse
from ..numerics import frobenius_norm_sq
from ..receiver import (
    alamouti_decouple,
    equivalent_channel,
    mmse_equalize,
    ostbc_decode,
    ostbc_scalar_mmse,
)
from ..stm import ImageDims, StmScheme, encode, normalize_latent
from .runner import FrameJob, block_seed, simulate_frames

OSTBC = (("alamouti", 2), ("ostbc3-r12", 3), ("ostbc3-r34", 3))


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str
    seconds: float


def _random_h(rng, count, nr, nt):
    return ChannelState(complex_normal(rng, (count, nr, nt)))


def check_orthogonality(trials: int = 1000) -> tuple[bool, str]:
    rng = np.random.default_rng(101)
    worst = 0.0
    for name, nt in OSTBC:
        sc = StmScheme.from_name(name, nt)
        for nr in (1, 2, 4):
            eq = equivalent_channel(sc, _random_h(rng, trials, nr, nt))
            gram = np.swapaxes(eq.a, -1, -2) @ eq.a
            target = eq.gain[:, None, None] * np.eye(gram.shape[-1])
            err = np.max(np.abs(gram - target), axis=(-2, -1)) / eq.gain
            worst = max(worst, float(np.max(err)))
    return worst <= 1e-9, f"max relative Gram deviation {worst:.2e} (tol 1e-9)"


def check_alamouti_closed_form(trials: int = 1000) -> tuple[bool, str]:
    rng = np.random.default_rng(102)
    sc = StmScheme.from_name("alamouti", 2)
    worst = 0.0
    for nr in (1, 2, 4):
        p = ChannelParams(2, nr, 1.3, 0.4)
        st = _random_h(rng, trials, nr, 2)
        z = normalize_latent(complex_normal(rng, (trials, 2)))
        y = transmit(encode(sc, z), st, p, Seed(102, nr))
        generic = ostbc_decode(sc, y, st, p).symbols
        m1, m2 = alamouti_decouple(y[..., 0], y[..., 1], st, p.power)
        g = frobenius_norm_sq(st.h)
        closed = np.stack([ostbc_scalar_mmse(m, g, p.power, p.noise_var) for m in (m1, m2)], axis=-1)
        worst = max(worst, float(np.max(np.abs(generic - closed) / np.maximum(np.abs(closed), 1e-300))))
    return worst <= 1e-9, f"generic vs closed-form Alamouti max relative diff {worst:.2e}"


def check_shrinkage(trials: int = 1000) -> tuple[bool, str]:
    rng = np.random.default_rng(103)
    worst = 0.0
    for name, nt in OSTBC:
        sc = StmScheme.from_name(name, nt)
        power, nv = rng.uniform(0.1, 10), rng.uniform(0.01, 5)
        p = ChannelParams(nt, 2, power, nv)
        st = _random_h(rng, trials, 2, nt)
        z = normalize_latent(complex_normal(rng, (trials, sc.symbols_per_block * 3)))
        y = transmit(encode(sc, z), st, p, noiseless=True)
        out = ostbc_decode(sc, y, st, p).symbols
        g = sc.power_scale ** 2 * equivalent_channel(sc, st).gain[:, None]
        expect = power * g / (power * g + nv) * z
        worst = max(worst, float(np.max(np.abs(out - expect) / np.abs(expect))))
    return worst <= 1e-9, f"max relative shrinkage error {worst:.2e} (tol 1e-9)"


def check_mmse_sinr_identity(trials: int = 1000) -> tuple[bool, str]:
    rng = np.random.default_rng(104)
    worst = 0.0
    for nt, nr in ((2, 1), (2, 2), (3, 4), (2, 4)):
        p = ChannelParams(nt, nr, 2.0, 0.7)
        st = _random_h(rng, trials, nr, nt)
        err = mmse_equalize(np.zeros((trials, nr, 1)), st, p).per_symbol_err_var
        gamma = sinr_mmse(st, p)
        worst = max(worst, float(np.max(np.abs(err - 1.0 / (1.0 + gamma)))))
    return worst <= 1e-9, f"max |err_var - 1/(1+gamma)| = {worst:.2e}"


def check_channel_moments(draws: int = 100_000) -> tuple[bool, str]:
    h = sample_channels(ChannelParams(2, 2, 1.0, 1.0), Seed(105), draws).h
    mean = float(np.max(np.abs(h.mean(axis=0))))
    power = float(np.max(np.abs((np.abs(h) ** 2).mean(axis=0) - 1.0)))
    fro = float(np.mean(frobenius_norm_sq(h)))
    ok = mean <= 0.02 and power <= 0.02 and abs(fro - 4.0) <= 0.08
    return ok, f"|mean| {mean:.4f}, |E|h|^2-1| {power:.4f}, E||H||_F^2 {fro:.4f}"


def check_distortion_oracle(frames: int = 4000) -> tuple[bool, str]:
    worst = 0.0
    for scheme, nt in (("alamouti", 2), ("mux", 2), ("ostbc3-r34", 3)):
        for snr in (0.0, 10.0):
            outs = [
                simulate_frames(FrameJob(scheme, nt, 2, snr, 1, ImageDims(1, 1, 48), 1.0, 1.0, "zero",
                                         block_seed(106, 2, b), 500))
                for b in range(frames // 500)
            ]
            mc = np.mean(np.concatenate([o["mse"] for o in outs]))
            an = np.mean(np.concatenate([o["mse_analytic"] for o in outs]))
            worst = max(worst, abs(mc - an) / an)
    return worst <= 0.02, f"max relative |MC - analytic| distortion {worst:.4f} (tol 0.02)"


def check_outage_chi2(trials: int = 100_000) -> tuple[bool, str]:
    sc = StmScheme.from_name("alamouti", 2)
    p = ChannelParams.from_snr_db(10.0, 2, 1)
    thr_db = 10.0 * np.log10(p.snr_linear * 1.5)  # median-ish gain of 1.5
    mc = outage_probability(sc, p, thr_db, trials, Seed(107))
    # ||H||_F^2 ~ Gamma(2, 1) = chi2(4) / 2
    oracle = float(special.gammainc(2.0, 10 ** (thr_db / 10) / p.snr_linear))
    rel = abs(mc - oracle) / oracle
    return rel <= 0.02, f"outage MC {mc:.5f} vs chi2(4) CDF {oracle:.5f} (rel {rel:.4f})"


def check_diversity_slope(trials: int = 1_000_000) -> tuple[bool, str]:
    sc = StmScheme.from_name("alamouti", 2)
    curve = outage_curve(sc, 1, [20.0, 30.0], 15.0, trials, Seed(108))
    d = diversity_order_estimate(curve, 0, 1)
    return 1.6 <= d <= 2.4, f"diversity order {d:.3f} from p={curve.prob.tolist()}"


def check_ergodic_capacity(trials: int = 100_000) -> tuple[bool, str]:
    rep = ergodic_capacity(ChannelParams.from_snr_db(0.0, 1, 1), trials, Seed(109))
    oracle, _ = integrate.quad(lambda x: np.log2(1.0 + x) * np.exp(-x), 0.0, np.inf)
    rel = abs(rep.ergodic_mean - oracle) / oracle
    return rel <= 0.02, f"ergodic mean {rep.ergodic_mean:.5f} vs quadrature {oracle:.5f} (rel {rel:.4f})"


FAST: tuple[tuple[str, Callable], ...] = (
    ("ostbc_orthogonality", check_orthogonality),
    ("alamouti_closed_form", check_alamouti_closed_form),
    ("ostbc_shrinkage", check_shrinkage),
    ("mmse_sinr_identity", check_mmse_sinr_identity),
    ("channel_moments", check_channel_moments),
    ("distortion_oracle", check_distortion_oracle),
)
FULL = FAST + (
    ("outage_chi2_cdf", check_outage_chi2),
    ("diversity_slope", check_diversity_slope),
    ("ergodic_capacity", check_ergodic_capacity),
)


def run_checks(level: str = "fast") -> list[CheckResult]:
    suite = FULL if level == "full" else FAST
    results = []
    for name, fn in suite:
        t0 = time.perf_counter()
        try:
            ok, detail = fn()
        except Exception as exc:  # a crash is a failed invariant
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        results.append(CheckResult(name, bool(ok), detail, time.perf_counter() - t0))
    return results


def validate(level: str = "fast", out=print) -> int:
    results = run_checks(level)
    for r in results:
        out(f"{'PASS' if r.passed else 'FAIL'}  {r.name:<22} {r.detail}  [{r.seconds:.1f}s]")
    failed = sum(not r.passed for r in results)
    out(f"{len(results) - failed}/{len(results)} invariants passed")
    return 1 if failed else 0
