"""Bound curves over a dark-count grid and their CSV/JSON output."""

from __future__ import annotations

import csv
import io
import json
import math
import os
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .bound import BoundResult, ZetaSearchSpec, bound_curve, p_ideal_from_w0
from .testfn import ModelParams, default_profile
from .wightman import OverlapTable, _q_cut

__all__ = ["CSV_HEADER", "SweepCurve", "compute_curve", "curve_stem", "format_float"]

CSV_HEADER = ("p_dark", "p_max", "raw_bound", "zeta_star", "e_zeta", "p_ideal", "ratio")


def format_float(x: float) -> str:
    # shortest repr that round-trips; stable across platforms
    return repr(float(x))


def curve_stem(params: ModelParams) -> str:
    return f"curve_alpha{params.alpha:g}_r{params.r_ratio:g}"


@dataclass
class SweepCurve:
    params: ModelParams
    rows: list
    p_ideal: float
    table: OverlapTable
    search: ZetaSearchSpec
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if any(a.p_dark > b.p_dark for a, b in zip(self.rows, self.rows[1:])):
            raise ValueError("rows must be sorted by p_dark")

    @property
    def p_dark(self) -> np.ndarray:
        return np.array([r.p_dark for r in self.rows])

    @property
    def p_max(self) -> np.ndarray:
        return np.array([r.p_max for r in self.rows])

    @property
    def ratio(self) -> Optional[np.ndarray]:
        if self.p_ideal <= 0:
            return None
        return self.p_max / self.p_ideal

    @property
    def ok(self) -> bool:
        return self.table.ok and all(r.converged for r in self.rows)

    def csv_text(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for r in self.rows:
            ratio = format_float(r.p_max / self.p_ideal) if self.p_ideal > 0 else ""
            w.writerow([format_float(r.p_dark), format_float(r.p_max), format_float(r.raw_bound),
                        format_float(r.zeta_star), format_float(r.e_zeta),
                        format_float(self.p_ideal), ratio])
        return buf.getvalue()

    def metadata(self) -> dict:
        t = self.table
        profile = default_profile()
        flagged = [{"p_dark": r.p_dark, "flags": r.flags} for r in self.rows if r.flags]
        return {
            "params": self.params.as_dict(),
            "p_ideal": self.p_ideal,
            "w0": t.w0,
            "table": {
                "converged": bool(t.converged),
                "tail_ok": bool(t.tail_ok),
                "interp_ok": bool(t.interp_ok),
                "loo_error": float(t.loo),
                "eta_max": t.eta_max,
                "abs_w_eta_max": float(abs(t.values[-1])),
                "nodes": int(t.eta.size),
                "settings": t.settings,
            },
            "truncation": {
                "u_max": profile.u_max,
                "k_max": profile.u_max / math.sqrt(2.0),
                "q_cut": _q_cut(profile),
            },
            "zeta_search": {
                "zeta_min": self.search.zeta_min, "zeta_max": self.search.zeta_max,
                "grid_points": self.search.grid_points, "rtol": self.search.rtol,
            },
            "flags": flagged,
            "converged": bool(self.ok),
            **self.meta,
        }

    def write(self, out_dir, stem: Optional[str] = None) -> tuple:
        """Write ``<stem>.csv`` and ``<stem>.json``; returns both paths."""
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        stem = stem or curve_stem(self.params)
        csv_path = out / f"{stem}.csv"
        meta_path = out / f"{stem}.json"
        meta = self.metadata()
        meta["created"] = datetime.now(timezone.utc).isoformat(timespec="seconds")
        meta["version"] = __version__
        _atomic_write(csv_path, self.csv_text())
        _atomic_write(meta_path, json.dumps(meta, indent=2, sort_keys=True) + "\n")
        return csv_path, meta_path


def _atomic_write(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + f".tmp{os.getpid()}")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)


def compute_curve(table: OverlapTable, p_darks: Sequence[float],
                  search: Optional[ZetaSearchSpec] = None, meta: Optional[dict] = None) -> SweepCurve:
    search = search or ZetaSearchSpec()
    rows: list[BoundResult] = bound_curve(sorted(float(p) for p in p_darks), table, search)
    return SweepCurve(table.params, rows, p_ideal_from_w0(table.w0), table, search, dict(meta or {}))
