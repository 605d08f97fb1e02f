"""Tabular sweep results and their CSV serialization."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import NamedTuple

from ..errors import MimoJsccError

HEADER = ("scheme", "nt", "nr", "snr_db", "rho", "metric", "value", "ci95", "trials", "seed")
METRICS = ("sinr_db", "outage_prob", "diversity_order", "mse", "psnr_db", "capacity_bpcu")


class ResultIOError(MimoJsccError, OSError):
    """Reading or writing a result file failed."""


class Row(NamedTuple):
    scheme: str
    nt: int
    nr: int
    snr_db: float
    rho: Fraction
    metric: str
    value: float
    ci95: float
    trials: int
    seed: int


@dataclass
class SweepResult:
    rows: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def metrics(self) -> list:
        return sorted({r.metric for r in self.rows})

    def select(self, metric: str) -> list:
        return [r for r in self.rows if r.metric == metric]


def _num(x) -> str:
    return format(float(x), ".9g")


def format_row(row: Row) -> list:
    return [
        row.scheme,
        str(int(row.nt)),
        str(int(row.nr)),
        _num(row.snr_db),
        str(Fraction(row.rho)),
        row.metric,
        _num(row.value),
        _num(row.ci95),
        str(int(row.trials)),
        str(int(row.seed)),
    ]


def dump_csv(result: SweepResult, fh) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(HEADER)
    for row in result.rows:
        w.writerow(format_row(row))


def write_csv(result: SweepResult, path) -> None:
    """Write ``result`` with the fixed header; numbers carry 9 significant digits."""
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="") as fh:
            dump_csv(result, fh)
    except OSError as exc:
        raise ResultIOError(f"cannot write {path}: {exc}") from exc


def read_csv(path) -> SweepResult:
    path = Path(path)
    try:
        with open(path, encoding="utf-8", newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if tuple(header or ()) != HEADER:
                raise ResultIOError(f"{path}: unexpected header {header}")
            rows = [
                Row(
                    scheme=r[0],
                    nt=int(r[1]),
                    nr=int(r[2]),
                    snr_db=float(r[3]),
                    rho=Fraction(r[4]),
                    metric=r[5],
                    value=float(r[6]),
                    ci95=float(r[7]),
                    trials=int(r[8]),
                    seed=int(r[9]),
                )
                for r in reader
            ]
    except OSError as exc:
        raise ResultIOError(f"cannot read {path}: {exc}") from exc
    except (ValueError, IndexError) as exc:
        raise ResultIOError(f"{path}: malformed row: {exc}") from exc
    return SweepResult(rows=rows)
