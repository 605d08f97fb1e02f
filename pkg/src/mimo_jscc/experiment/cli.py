"""Command-line entry point: ``mimo-jscc <subcommand>``.

Exit codes: 0 success, 1 invariant failure, 2 configuration error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from ..baseline import mimo_capacity
from ..channel import ChannelParams, Seed
from ..errors import ConfigError, MimoJsccError, SchemeError
from ..metrics import (
    MIN_OUTAGE_TRIALS,
    diversity_order_estimate,
    outage_curve,
    sinr_diversity,
    sinr_mmse,
)
from ..metrics import _channel_blocks
from ..stm import StmScheme
from .config import SEPARATION, load_config
from .results import ResultIOError, Row, SweepResult, dump_csv, read_csv, write_csv
from .runner import Z95, run_sweep

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_IO = 0, 1, 2, 3
NO_RHO = Fraction(0)


def parse_grid(text: str) -> list:
    """``"0,5,10"`` or inclusive ``"start:stop:step"``."""
    text = text.strip()
    try:
        if ":" in text:
            start, stop, step = (float(t) for t in text.split(":"))
            if step <= 0:
                raise ValueError
            count = int(np.floor((stop - start) / step + 1e-9)) + 1
            return [round(start + i * step, 10) for i in range(count)]
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise ConfigError(f"cannot parse grid {text!r}; use 'a,b,c' or 'start:stop:step'") from None


def parse_ints(text: str) -> list:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise ConfigError(f"expected comma-separated integers, got {text!r}") from None


def _emit(result: SweepResult, out_csv) -> None:
    if out_csv:
        write_csv(result, out_csv)
    else:
        dump_csv(result, sys.stdout)


def _mean_ci(v):
    v = np.asarray(v, dtype=float)
    ci = Z95 * float(np.std(v, ddof=1)) / np.sqrt(v.size) if v.size > 1 else 0.0
    return float(np.mean(v)), ci


def _grid_check(grid):
    if not grid or any(b <= a for a, b in zip(grid, grid[1:])):
        raise ConfigError(f"snr grid must be nonempty and strictly increasing, got {grid}")


def cmd_sweep(args) -> int:
    cfg = load_config(args.config)
    cfg = cfg.with_overrides(
        master_seed=args.seed,
        out_csv=Path(args.out_csv) if args.out_csv else None,
        figures_dir=Path(args.figures) if args.figures else None,
    )
    result = run_sweep(cfg, workers=args.workers)
    if cfg.out_csv is None:
        dump_csv(result, sys.stdout)
        return EXIT_OK
    write_csv(result, cfg.out_csv)
    meta_path = cfg.out_csv.with_suffix(".meta.json")
    try:
        meta_path.write_text(json.dumps(result.meta, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    except OSError as exc:
        raise ResultIOError(f"cannot write {meta_path}: {exc}") from exc
    print(f"wrote {len(result.rows)} rows to {cfg.out_csv}", file=sys.stderr)
    if cfg.figures_dir is not None:
        from .figures import render_figures
        from .svg import plot_svg

        paths = render_figures(result, cfg.figures_dir)
        for m in result.metrics():
            plot_svg(result, m, cfg.figures_dir / f"{m}.svg")
        print(f"wrote {2 * len(paths)} figures to {cfg.figures_dir}", file=sys.stderr)
    return EXIT_OK


def cmd_plot(args) -> int:
    result = read_csv(args.csv)
    out = Path(args.out)
    if out.suffix.lower() == ".svg":
        from .svg import plot_svg

        plot_svg(result, args.metric, out)
    else:
        from .figures import render_metric

        render_metric(result, args.metric, out)
    return EXIT_OK


def _channel_trials(nt, nr, trials, seed):
    # SNR-independent draws so every grid point uses the same channels
    params = ChannelParams(nt, nr, 1.0, 1.0)
    states = list(_channel_blocks(params, Seed(seed, nr), trials))
    return states


def cmd_sinr(args) -> int:
    grid = parse_grid(args.snr_db)
    _grid_check(grid)
    rows = []
    for name in args.schemes.split(","):
        scheme = StmScheme.from_name(name.strip(), args.nt)
        for nr in parse_ints(args.nr):
            states = _channel_trials(args.nt, nr, args.trials, args.seed)
            for snr in grid:
                params = ChannelParams.from_snr_db(snr, args.nt, nr)
                if scheme.is_ostbc:
                    vals = np.concatenate([np.atleast_1d(sinr_diversity(s, params, scheme)) for s in states])
                else:
                    vals = np.concatenate([np.mean(sinr_mmse(s, params), axis=-1) for s in states])
                mean, ci = _mean_ci(vals)
                rows.append(Row(scheme.name, args.nt, nr, snr, NO_RHO, "sinr_db", 10 * np.log10(mean),
                                10 / np.log(10) * ci / mean, args.trials, args.seed))
    _emit(SweepResult(rows), args.out_csv)
    return EXIT_OK


def cmd_capacity(args) -> int:
    grid = parse_grid(args.snr_db)
    _grid_check(grid)
    rows = []
    for nr in parse_ints(args.nr):
        states = _channel_trials(args.nt, nr, args.trials, args.seed)
        for snr in grid:
            params = ChannelParams.from_snr_db(snr, args.nt, nr)
            caps = np.concatenate([np.atleast_1d(mimo_capacity(s, params)) for s in states])
            rows.append(Row(SEPARATION, args.nt, nr, snr, NO_RHO, "capacity_bpcu", *_mean_ci(caps),
                            args.trials, args.seed))
    _emit(SweepResult(rows), args.out_csv)
    return EXIT_OK


def cmd_outage(args) -> int:
    grid = parse_grid(args.snr_db)
    _grid_check(grid)
    if args.trials < MIN_OUTAGE_TRIALS:
        raise ConfigError(f"--trials: outage needs at least {MIN_OUTAGE_TRIALS}, got {args.trials}")
    rows = []
    for name in args.schemes.split(","):
        scheme = StmScheme.from_name(name.strip(), args.nt)
        for nr in parse_ints(args.nr):
            curve = outage_curve(scheme, nr, grid, args.threshold_db, args.trials, Seed(args.seed, nr))
            for snr, p in zip(curve.snr_grid_db, curve.prob):
                ci = Z95 * np.sqrt(p * (1 - p) / args.trials)
                rows.append(Row(scheme.name, args.nt, nr, snr, NO_RHO, "outage_prob", p, ci,
                                args.trials, args.seed))
            if len(grid) >= 2 and all(0 < curve.prob[i] < 1 for i in (0, -1)):
                d = diversity_order_estimate(curve, 0, len(grid) - 1)
                rows.append(Row(scheme.name, args.nt, nr, grid[-1], NO_RHO, "diversity_order", d, 0.0,
                                args.trials, args.seed))
    _emit(SweepResult(rows), args.out_csv)
    return EXIT_OK


def cmd_validate(args) -> int:
    from .validate import validate

    return validate("full" if args.full else "fast")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mimo-jscc", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sweep", help="run a configured Monte Carlo sweep")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int, help="override master_seed")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out-csv")
    p.add_argument("--figures", help="directory for PNG and SVG figures, one per metric")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("plot", help="plot one metric of a result CSV (.svg, or any matplotlib format)")
    p.add_argument("--csv", required=True)
    p.add_argument("--metric", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_plot)

    p = sub.add_parser("validate", help="run the invariant suite")
    p.add_argument("--full", action="store_true", help="add diversity-slope and capacity oracles")
    p.set_defaults(func=cmd_validate)

    for name, func, default_schemes in (
        ("sinr", cmd_sinr, "alamouti,mux"),
        ("capacity", cmd_capacity, None),
        ("outage", cmd_outage, "alamouti"),
    ):
        p = sub.add_parser(name)
        p.add_argument("--nt", type=int, default=2)
        p.add_argument("--nr", default="1", help="comma-separated receive antenna counts")
        p.add_argument("--snr-db", default="0:30:5", help="'a,b,c' or 'start:stop:step'")
        p.add_argument("--trials", type=int, default=10_000)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out-csv")
        if default_schemes:
            p.add_argument("--schemes", default=default_schemes)
        if name == "outage":
            p.add_argument("--threshold-db", type=float, default=0.0)
        p.set_defaults(func=func)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, SchemeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ResultIOError, OSError) as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except MimoJsccError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
