"""Run configuration shared by every CLI subcommand.

A config file is a flat YAML mapping whose keys mirror the long CLI flags
(dashes or underscores both accepted). Flags given on the command line
override file values. Unknown keys are rejected.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, fields, replace
from typing import Optional

import yaml

TORUS_DT_RATIO = 0.1
POLAR_DT_RATIO = 0.02

FULL_H_LIST = [5, 10, 20, 30, 40, 50, 60, 70, 80, 90, 100, 200, 300, 400, 500, 600, 700]
FULL_ELL_LIST = [1, 2, 3, 4, 5, 10, 15, 30, 50]
FULL_DX_LIST = [5, 2, 1, 0.5, 0.2, 0.1]
FULL_DR_LIST = [5, 2, 1, 0.5, 0.1, 0.05, 0.01]


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    # physics
    potential: str = "log"
    h: float = 500.0
    ell: int = 4
    v: float = 0.5
    # profile flow
    rtilde: float = 60.0
    profile_dr: float = 0.1
    e_omega: float = 1e-11
    e_lambda: float = 1e-14
    max_steps: int = 5_000_000
    record_every: int = 1000
    profile: Optional[str] = None  # precomputed profile csv
    cache_dir: Optional[str] = None
    # sweep
    h_list: list = field(default_factory=lambda: [5, 30, 100, 300, 700])
    ell_list: list = field(default_factory=lambda: [1])
    # evolution
    dx: float = 1.0
    dr: float = 1.0
    L: Optional[float] = None  # torus side; None -> sized from the profile support
    dt_ratio: Optional[float] = None  # None -> 1/10 torus, 1/50 polar
    periods: float = 10.0
    monitor_every: int = 10
    rupture_threshold: float = 0.5
    stop_after: Optional[int] = None  # samples kept after rupture
    dx_list: list = field(default_factory=lambda: [5, 1, 0.5])
    dr_list: list = field(default_factory=lambda: [1, 0.5])
    # potential check
    smax: float = 10.0
    eps: float = 1.5
    # outputs
    out: Optional[str] = None
    trace: Optional[str] = None
    outdir: str = "."

    @classmethod
    def keys(cls) -> list[str]:
        return [f.name for f in fields(cls)]

    @classmethod
    def from_mapping(cls, data: dict) -> "RunConfig":
        return cls().updated(data)

    @classmethod
    def load(cls, path: str) -> "RunConfig":
        with open(path) as fh:
            data = yaml.safe_load(fh)
        if data is None:
            data = {}
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: expected a key-value mapping")
        return cls.from_mapping(data)

    def updated(self, data: dict) -> "RunConfig":
        """Copy with ``data`` applied; None values are ignored."""
        known = set(self.keys())
        clean = {}
        for k, val in data.items():
            key = str(k).replace("-", "_")
            if key not in known:
                raise ConfigError(f"unknown config key {k!r}")
            if val is not None:
                clean[key] = val
        cfg = replace(self, **clean)
        cfg.validate()
        return cfg

    def validate(self) -> None:
        positive = ["h", "rtilde", "profile_dr", "e_omega", "e_lambda", "dx", "dr", "periods", "smax", "eps"]
        for k in positive:
            val = getattr(self, k)
            if not (isinstance(val, (int, float)) and math.isfinite(val) and val > 0):
                raise ConfigError(f"{k} must be a positive number, got {val!r}")
        for k in ("max_steps", "record_every", "monitor_every"):
            if int(getattr(self, k)) < 1:
                raise ConfigError(f"{k} must be >= 1")
        if self.L is not None and self.L <= 0:
            raise ConfigError("L must be positive")
        if self.dt_ratio is not None and not 0 < self.dt_ratio <= 1:
            raise ConfigError("dt_ratio must lie in (0, 1]")
        if not abs(self.v) < 1:
            raise ConfigError("v must satisfy |v| < 1")
        if self.rupture_threshold <= 0:
            raise ConfigError("rupture_threshold must be positive")
        for k in ("h_list", "dx_list", "dr_list"):
            vals = getattr(self, k)
            if not isinstance(vals, list) or not vals or any(float(x) <= 0 for x in vals):
                raise ConfigError(f"{k} must be a non-empty list of positive numbers")
        if not isinstance(self.ell_list, list) or not self.ell_list:
            raise ConfigError("ell_list must be a non-empty list")

    def torus_dt_ratio(self) -> float:
        return self.dt_ratio if self.dt_ratio is not None else TORUS_DT_RATIO

    def polar_dt_ratio(self) -> float:
        return self.dt_ratio if self.dt_ratio is not None else POLAR_DT_RATIO

    def exact_paper(self) -> "RunConfig":
        """Full figure parameter lists and horizons."""
        return replace(
            self,
            h_list=list(FULL_H_LIST),
            ell_list=list(FULL_ELL_LIST),
            dx_list=list(FULL_DX_LIST),
            dr_list=list(FULL_DR_LIST),
            periods=max(self.periods, 150.0),
        )

    def as_dict(self) -> dict:
        return asdict(self)

    def header_lines(self) -> list[str]:
        """``# key: value`` lines recording every config value."""
        return [f"# {k}: {yaml.safe_dump(v, default_flow_style=True).strip().removesuffix('...').strip()}"
                for k, v in self.as_dict().items()]
