"""Run configuration: defaults, config files and command-line overrides.

Config files are YAML (JSON is accepted as a subset) holding a flat
mapping. Recognised keys:

    alphas          list of amplitudes                 [0.5, 1, 2]
    r_ratios        list of size ratios, each >= 1     [1, 2]
    pdark_min       smallest dark-count probability    1e-10
    pdark_max       largest dark-count probability     1
    pdark_points    log-spaced grid size               41
    rtol            quadrature relative tolerance      1e-10
    eta_max         rapidity cutoff of the overlap     40
    zeta_min        zeta search box, lower end         1e-3
    zeta_max        zeta search box, upper end         1e8
    zeta_points     zeta log-grid size                 360
    zeta_rtol       golden-section width in log zeta   1e-4
    out_dir         output directory                   out
    cache_dir       overlap-table cache directory      ~/.cache/clickbound
    svg             write SVG figures                  true
    workers         processes for table builds         1

Any other key is an error. Precedence, strongest first: command-line flags,
the ``CLICKBOUND_CACHE_DIR`` environment variable (cache only), the config
file, the defaults above.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import Optional

import numpy as np
import yaml

from .bound import ZetaSearchSpec
from .wightman import TableSettings

__all__ = ["ConfigError", "RunConfig", "CACHE_ENV", "load_config_file", "build_config"]

CACHE_ENV = "CLICKBOUND_CACHE_DIR"


class ConfigError(ValueError):
    """Invalid configuration file or option value."""


def _default_cache() -> str:
    return str(Path.home() / ".cache" / "clickbound")


@dataclass(frozen=True)
class RunConfig:
    alphas: tuple = (0.5, 1.0, 2.0)
    r_ratios: tuple = (1.0, 2.0)
    pdark_min: float = 1e-10
    pdark_max: float = 1.0
    pdark_points: int = 41
    rtol: float = 1e-10
    eta_max: float = 40.0
    zeta_min: float = 1e-3
    zeta_max: float = 1e8
    zeta_points: int = 360
    zeta_rtol: float = 1e-4
    out_dir: str = "out"
    cache_dir: Optional[str] = None
    svg: bool = True
    workers: int = 1

    def __post_init__(self):
        if not self.alphas or not self.r_ratios:
            raise ConfigError("alphas and r_ratios must be non-empty")
        if any(not math.isfinite(a) for a in self.alphas):
            raise ConfigError("alphas must be finite")
        if any(not (math.isfinite(r) and r >= 1.0) for r in self.r_ratios):
            raise ConfigError("every r_ratio must be >= 1")
        if not 0.0 < self.pdark_min <= self.pdark_max <= 1.0:
            raise ConfigError("need 0 < pdark_min <= pdark_max <= 1")
        if self.pdark_points < 1 or (self.pdark_points == 1 and self.pdark_min != self.pdark_max):
            raise ConfigError("pdark_points must be >= 1 (exactly 1 only when min == max)")
        if not 1e-14 <= self.rtol <= 1e-2:
            raise ConfigError("rtol must lie in [1e-14, 1e-2]")
        if not self.eta_max > 4.0:
            raise ConfigError("eta_max must exceed 4")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        try:
            self.zeta_search()
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def pdark_grid(self) -> np.ndarray:
        if self.pdark_points == 1:
            return np.array([self.pdark_min])
        grid = np.geomspace(self.pdark_min, self.pdark_max, self.pdark_points)
        # pin the ends so 1e-10 and 1 come out exact
        grid[0], grid[-1] = self.pdark_min, self.pdark_max
        return grid

    def table_settings(self) -> TableSettings:
        return TableSettings(eta_max=self.eta_max, rtol=self.rtol)

    def zeta_search(self) -> ZetaSearchSpec:
        return ZetaSearchSpec(self.zeta_min, self.zeta_max, self.zeta_points, self.zeta_rtol)

    def resolved_cache_dir(self) -> str:
        return self.cache_dir or _default_cache()

    def numerics(self) -> dict:
        """Settings that determine the numbers in a curve (not paths)."""
        return {
            "pdark": [self.pdark_min, self.pdark_max, self.pdark_points],
            "table": self.table_settings().as_dict(),
            "zeta": asdict(self.zeta_search()),
        }

    def settings_hash(self) -> str:
        blob = json.dumps(self.numerics(), sort_keys=True)
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


_FIELDS = {f.name: f for f in fields(RunConfig)}
_LISTS = {"alphas", "r_ratios"}
_INTS = {"pdark_points", "zeta_points", "workers"}
_STRS = {"out_dir", "cache_dir"}


def _coerce(key, value):
    try:
        if key in _LISTS:
            if isinstance(value, (int, float)) and not isinstance(value, bool):
                value = [value]
            if not isinstance(value, (list, tuple)):
                raise TypeError
            return tuple(float(v) for v in value)
        if key in _INTS:
            if isinstance(value, bool) or float(value) != int(value):
                raise TypeError
            return int(value)
        if key == "svg":
            if not isinstance(value, bool):
                raise TypeError
            return value
        if key in _STRS:
            if value is None and key == "cache_dir":
                return None
            if not isinstance(value, str):
                raise TypeError
            return value
        if isinstance(value, bool):
            raise TypeError
        return float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"bad value for {key!r}: {value!r}") from None


def load_config_file(path) -> dict:
    """Parse a flat YAML/JSON mapping; unknown keys raise ConfigError."""
    try:
        with open(path, encoding="utf-8") as fh:
            data = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse config {path}: {exc}") from None
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError("config file must hold a mapping of keys to values")
    unknown = sorted(set(map(str, data)) - set(_FIELDS))
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    return {k: _coerce(k, v) for k, v in data.items()}


def build_config(path=None, overrides: Optional[dict] = None,
                 defaults: Optional[dict] = None, environ=None) -> RunConfig:
    """Merge defaults, config file, environment and flag overrides."""
    environ = os.environ if environ is None else environ
    values = dict(defaults or {})
    if path is not None:
        values.update(load_config_file(path))
    if environ.get(CACHE_ENV):
        values["cache_dir"] = environ[CACHE_ENV]
    for k, v in (overrides or {}).items():
        if k not in _FIELDS:
            raise ConfigError(f"unknown option {k!r}")
        if v is not None:
            values[k] = _coerce(k, v)
    return replace(RunConfig(), **values) if values else RunConfig()
