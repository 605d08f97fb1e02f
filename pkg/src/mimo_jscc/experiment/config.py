"""Sweep configuration files.

Configs are TOML. Grammar::

    [sweep]
    schemes = ["mux", "alamouti", "separation-rd"]   # required
    nt = 2                                           # required
    nr = [1, 2, 4]                                   # int or list
    snr_db = [9, 11, 13, 15, 17]                     # strictly increasing
    rho = ["1/8"]                                    # string, number or list
    trials = 500
    master_seed = 2024
    power = 1.0                                      # per-antenna P
    max_val = 1.0                                    # PSNR peak value
    post_equalizer = "zero"                          # multiplexing hook
    outage_threshold_db = 0.0                        # optional; adds outage_prob rows

    [source]
    image_dims = [3, 32, 32]                         # or: n = 3072
    variance = 1.0

    [outputs]
    csv = "results/sweep.csv"
    figures = "results/figures"                      # optional

Relative output paths resolve against the config file's directory.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field, replace
from fractions import Fraction
from pathlib import Path
from typing import Optional

from ..errors import ConfigError, SchemeError
from ..receiver import get_post_equalizer
from ..stm import ImageDims, SchemeKind, StmScheme, channel_uses, latent_length, parse_rho

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

SEPARATION = "separation-rd"
SCHEME_NAMES = tuple(k.value for k in SchemeKind) + (SEPARATION,)


@dataclass(frozen=True)
class SweepConfig:
    schemes: tuple
    nt: int
    nr_list: tuple
    snr_db_grid: tuple
    rho_list: tuple = (Fraction(1, 8),)
    image_dims: Optional[ImageDims] = ImageDims(3, 32, 32)
    source_n: Optional[int] = None
    source_variance: float = 1.0
    trials: int = 100
    master_seed: int = 0
    power: float = 1.0
    max_val: float = 1.0
    post_equalizer: str = "zero"
    outage_threshold_db: Optional[float] = None
    out_csv: Optional[Path] = None
    figures_dir: Optional[Path] = None
    extra: dict = field(default_factory=dict, compare=False)

    @property
    def n(self) -> int:
        """Real source samples per frame."""
        return self.source_n if self.source_n is not None else self.image_dims.size

    @property
    def dims(self) -> ImageDims:
        return self.image_dims if self.source_n is None else ImageDims(1, 1, self.source_n)

    def channel_uses(self, rho) -> int:
        return channel_uses(rho, self.dims)

    def validate(self) -> "SweepConfig":
        """Check every constraint up front; raises ConfigError naming the field."""
        if not self.schemes:
            raise ConfigError("schemes: at least one scheme is required")
        for name in self.schemes:
            if name not in SCHEME_NAMES:
                raise ConfigError(f"schemes: unknown scheme {name!r}; expected one of {', '.join(SCHEME_NAMES)}")
        if int(self.nt) != self.nt or self.nt < 1:
            raise ConfigError(f"nt: must be a positive integer, got {self.nt}")
        for name in self.schemes:
            if name != SEPARATION:
                try:
                    StmScheme.from_name(name, self.nt)
                except SchemeError as exc:
                    raise ConfigError(f"schemes/nt: {exc}") from None
        if not self.nr_list or any(int(r) != r or r < 1 for r in self.nr_list):
            raise ConfigError(f"nr: need positive integers, got {list(self.nr_list)}")
        if len(set(self.nr_list)) != len(self.nr_list):
            raise ConfigError(f"nr: duplicate entries in {list(self.nr_list)}")
        grid = list(self.snr_db_grid)
        if not grid:
            raise ConfigError("snr_db: grid must be nonempty")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ConfigError(f"snr_db: grid must be strictly increasing, got {grid}")
        if self.trials < 1:
            raise ConfigError(f"trials: must be >= 1, got {self.trials}")
        if not 0 <= self.master_seed < 1 << 64:
            raise ConfigError(f"master_seed: must be an unsigned 64-bit integer, got {self.master_seed}")
        if not self.power > 0:
            raise ConfigError(f"power: must be positive, got {self.power}")
        if not self.max_val > 0:
            raise ConfigError(f"max_val: must be positive, got {self.max_val}")
        if not self.source_variance > 0:
            raise ConfigError(f"source.variance: must be positive, got {self.source_variance}")
        if self.source_n is not None and (self.source_n < 2 or self.source_n % 2):
            raise ConfigError(f"source.n: must be a positive even integer, got {self.source_n}")
        if self.source_n is None and self.image_dims is None:
            raise ConfigError("source: give image_dims or n")
        if self.source_n is None and any(d < 1 for d in self.image_dims):
            raise ConfigError(f"source.image_dims: dimensions must be positive, got {tuple(self.image_dims)}")
        if self.source_n is None and self.image_dims.size % 2:
            raise ConfigError(f"source.image_dims: C*H*W must be even, got {self.image_dims.size}")
        try:
            get_post_equalizer(self.post_equalizer)
        except KeyError as exc:
            raise ConfigError(f"post_equalizer: {exc.args[0]}") from None
        for rho in self.rho_list:
            k = self.channel_uses(rho)  # raises ConfigError on fractional k
            for name in self.schemes:
                if name != SEPARATION:
                    try:
                        latent_length(StmScheme.from_name(name, self.nt), k)
                    except ConfigError as exc:
                        raise ConfigError(f"rho: {rho} gives k={k}; {exc}") from None
        return self

    def with_overrides(self, **kw) -> "SweepConfig":
        kw = {k: v for k, v in kw.items() if v is not None}
        return replace(self, **kw).validate()


def _as_list(v):
    return list(v) if isinstance(v, (list, tuple)) else [v]


_SWEEP_KEYS = {
    "schemes", "nt", "nr", "snr_db", "rho", "trials", "master_seed", "power", "max_val",
    "post_equalizer", "outage_threshold_db",
}


def config_from_dict(data: dict, base_dir: Path | None = None) -> SweepConfig:
    sweep = dict(data.get("sweep", {}))
    source = dict(data.get("source", {}))
    outputs = dict(data.get("outputs", {}))
    unknown = set(sweep) - _SWEEP_KEYS
    if unknown:
        raise ConfigError(f"sweep: unknown keys {sorted(unknown)}")
    for key in ("schemes", "nt", "snr_db"):
        if key not in sweep:
            raise ConfigError(f"sweep.{key}: required")
    base_dir = base_dir or Path.cwd()

    def path(v):
        if v is None:
            return None
        p = Path(v)
        return p if p.is_absolute() else base_dir / p

    try:
        dims = source.get("image_dims")
        cfg = SweepConfig(
            schemes=tuple(str(s) for s in _as_list(sweep["schemes"])),
            nt=int(sweep["nt"]),
            nr_list=tuple(int(r) for r in _as_list(sweep.get("nr", 1))),
            snr_db_grid=tuple(float(s) for s in _as_list(sweep["snr_db"])),
            rho_list=tuple(parse_rho(r) for r in _as_list(sweep.get("rho", "1/8"))),
            image_dims=ImageDims(*(int(d) for d in dims)) if dims is not None else ImageDims(3, 32, 32),
            source_n=int(source["n"]) if "n" in source else None,
            source_variance=float(source.get("variance", 1.0)),
            trials=int(sweep.get("trials", 100)),
            master_seed=int(sweep.get("master_seed", 0)),
            power=float(sweep.get("power", 1.0)),
            max_val=float(sweep.get("max_val", 1.0)),
            post_equalizer=str(sweep.get("post_equalizer", "zero")),
            outage_threshold_db=(
                float(sweep["outage_threshold_db"]) if "outage_threshold_db" in sweep else None
            ),
            out_csv=path(outputs.get("csv")),
            figures_dir=path(outputs.get("figures")),
        )
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"malformed config value: {exc}") from None
    return cfg.validate()


def load_config(path) -> SweepConfig:
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return config_from_dict(data, base_dir=path.parent)
