"""Deterministic adaptive quadrature on Gauss-Legendre panels.

Each panel (or 2-D cell) is integrated twice: once with an n-point rule on
the whole panel and once with the same rule on its two halves (four
quarters in 2-D). The halved value is kept and the difference is the error
estimate. Panels whose error exceeds their share of the global target are
split; the share is proportional to the panel width (cell area), so the
accepted panels always sum to within the target.

All integrands are called with numpy arrays and must be vectorized.
Accumulation happens in a fixed panel order, which keeps results
bit-identical across runs.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Optional, Sequence

import numpy as np

from .special import InvalidParameterError

__all__ = [
    "QuadratureSpec",
    "QuadResult",
    "gauss_legendre",
    "fixed_panels",
    "integrate_1d",
    "integrate_2d",
    "wynn_epsilon",
]

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class QuadratureSpec:
    """Settings shared by the 1-D and 2-D integrators.

    ``cutoff`` truncates semi-infinite intervals at a fixed point; when it is
    None the upper limit is approached with growing chunks until their
    contribution falls below the tolerance (the tail-decay check). ``period``
    switches the semi-infinite path to chunks of that length followed by
    Wynn-epsilon extrapolation of the partial sums, for slowly decaying
    oscillatory integrands.
    """

    rtol: float = 1e-10
    max_subdivisions: int = 4000
    order: int = 10
    atol: float = 1e-15
    cutoff: Optional[float] = None
    period: Optional[float] = None
    max_chunks: int = 200

    def __post_init__(self):
        if not 1e-14 <= self.rtol <= 1e-2:
            raise InvalidParameterError(f"rtol must lie in [1e-14, 1e-2], got {self.rtol!r}")
        if self.order < 4:
            raise InvalidParameterError(f"panel order must be >= 4, got {self.order!r}")
        if self.max_subdivisions < 1:
            raise InvalidParameterError("max_subdivisions must be positive")
        if self.atol < 0:
            raise InvalidParameterError("atol must be nonnegative")
        if self.period is not None and not self.period > 0:
            raise InvalidParameterError("period must be positive")


@dataclass
class QuadResult:
    value: complex | float
    error: float
    evaluations: int
    converged: bool = True
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.error < 0 or math.isnan(self.error):
            raise ValueError("error estimate must be nonnegative")


@lru_cache(maxsize=None)
def gauss_legendre(n: int):
    """Nodes and weights of the n-point rule on [-1, 1] (read-only arrays)."""
    x, w = np.polynomial.legendre.leggauss(n)
    x.flags.writeable = False
    w.flags.writeable = False
    return x, w


def fixed_panels(a, b, n_panels, order):
    """Flattened nodes and weights of a composite rule with equal panels."""
    x, w = gauss_legendre(order)
    edges = np.linspace(a, b, n_panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    return (half[:, None] * x + mid[:, None]).ravel(), (half[:, None] * w).ravel()


def _rule(f, lo, hi, order):
    """Apply the n-point rule on each panel [lo_i, hi_i]; returns per-panel sums."""
    x, w = gauss_legendre(order)
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    nodes = mid[:, None] + half[:, None] * x[None, :]
    vals = np.asarray(f(nodes))
    if vals.shape != nodes.shape:
        vals = np.broadcast_to(vals, nodes.shape)
    return (vals * w[None, :]).sum(axis=1) * half


def _adaptive_finite(f, a, b, spec, points=None, atol=None):
    atol = spec.atol if atol is None else atol
    edges = [a] + sorted(p for p in (points or ()) if a < p < b) + [b]
    lo = np.array(edges[:-1], dtype=float)
    hi = np.array(edges[1:], dtype=float)
    order = spec.order
    coarse = _rule(f, lo, hi, order)
    nev = order * len(lo)
    total_len = b - a

    done_lo, done_val, done_err = [], [], []
    converged = True
    while True:
        mid = 0.5 * (lo + hi)
        left = _rule(f, lo, mid, order)
        right = _rule(f, mid, hi, order)
        nev += 2 * order * len(lo)
        fine = left + right
        err = np.abs(fine - coarse)

        all_val = np.concatenate([np.asarray(done_val, dtype=fine.dtype), fine]) if done_val else fine
        total = all_val.sum()
        target = max(spec.rtol * abs(total), atol)
        share = target * (hi - lo) / total_len
        bad = err > share
        n_panels = len(done_lo) + len(lo) + int(bad.sum())
        if not bad.any() or n_panels > spec.max_subdivisions:
            if bad.any():
                converged = False
            done_lo.extend(lo.tolist())
            done_val.extend(fine.tolist())
            done_err.extend(err.tolist())
            break
        keep = ~bad
        done_lo.extend(lo[keep].tolist())
        done_val.extend(fine[keep].tolist())
        done_err.extend(err[keep].tolist())
        # children of a bad panel inherit the half-panel sums as coarse values
        new_lo = np.concatenate([lo[bad], mid[bad]])
        new_hi = np.concatenate([mid[bad], hi[bad]])
        new_coarse = np.concatenate([left[bad], right[bad]])
        order_idx = np.argsort(new_lo, kind="stable")
        lo, hi, coarse = new_lo[order_idx], new_hi[order_idx], new_coarse[order_idx]

    order_idx = np.argsort(np.asarray(done_lo), kind="stable")
    vals = np.asarray(done_val)[order_idx]
    errs = np.asarray(done_err)[order_idx]
    value = vals.sum()
    error = float(errs.sum())
    if error > max(spec.rtol * abs(value), atol):
        converged = False
    return value, error, nev, converged, len(done_lo)


def wynn_epsilon(partial_sums: Sequence[complex]):
    """Wynn epsilon extrapolation of a sequence of partial sums.

    Returns (limit estimate, error estimate). The error is the distance
    between the last two even-column estimates.
    """
    s = [complex(v) for v in partial_sums]
    n = len(s)
    if n < 3:
        return s[-1], abs(s[-1] - s[-2]) if n > 1 else math.inf
    prev = [0j] * (n + 1)
    cur = list(s)
    estimates = []
    col = 0
    while len(cur) > 1:
        nxt = []
        for i in range(len(cur) - 1):
            d = cur[i + 1] - cur[i]
            if d == 0:
                nxt.append(complex(1e300))
            else:
                nxt.append(prev[i + 1] + 1.0 / d)
        prev, cur = cur, nxt
        col += 1
        if col % 2 == 0:
            estimates.append(cur[-1])
    if not estimates:
        return s[-1], abs(s[-1] - s[-2])
    best = estimates[-1]
    err = abs(estimates[-1] - estimates[-2]) if len(estimates) > 1 else abs(best - s[-1])
    return best, err


def _semi_infinite(run_finite, a, spec, scale):
    """Integrate over [a, inf) by chunks; run_finite(lo, hi, atol) -> tuple."""
    nev = 0
    converged = True
    if spec.cutoff is not None:
        if spec.cutoff <= a:
            raise InvalidParameterError("cutoff must exceed the lower limit")
        value, err, n, ok, _ = run_finite(a, spec.cutoff, None)
        return value, err, n, ok, {"cutoff": spec.cutoff}

    if spec.period is not None:
        sums, total, err_sum = [], 0.0, 0.0
        lo = a
        for _ in range(spec.max_chunks):
            hi = lo + spec.period
            v, e, n, ok, _ = run_finite(lo, hi, spec.atol)
            nev += n
            err_sum += e
            converged &= ok
            total = total + v
            sums.append(total)
            lo = hi
            if len(sums) >= 12 and len(sums) % 4 == 0:
                est, xerr = wynn_epsilon(sums[-40:])
                if xerr <= max(spec.rtol * abs(est), spec.atol):
                    value = est.real if np.isrealobj(v) else est
                    return value, xerr + err_sum, nev, converged, {"chunks": len(sums)}
        est, xerr = wynn_epsilon(sums[-40:])
        value = est.real if np.isrealobj(v) else est
        return value, xerr + err_sum, nev, False, {"chunks": len(sums)}

    # growing chunks; stop after two consecutive negligible contributions
    width = scale
    lo = a
    total, err_sum, quiet = 0.0, 0.0, 0
    for k in range(spec.max_chunks):
        hi = lo + width
        v, e, n, ok, _ = run_finite(lo, hi, spec.atol)
        nev += n
        err_sum += e
        converged &= ok
        total = total + v
        if abs(v) <= max(spec.rtol * abs(total), spec.atol):
            quiet += 1
            if quiet >= 2:
                return total, err_sum + abs(v), nev, converged, {"cutoff": hi}
        else:
            quiet = 0
        lo = hi
        width *= 2.0
    return total, err_sum, nev, False, {"cutoff": lo}


def integrate_1d(
    f: Callable,
    a: float,
    b: float,
    spec: Optional[QuadratureSpec] = None,
    points: Optional[Sequence[float]] = None,
    atol: Optional[float] = None,
) -> QuadResult:
    """Integrate a vectorized real or complex ``f`` over (a, b).

    ``b`` may be ``math.inf``; see :class:`QuadratureSpec` for how the tail
    is handled. ``points`` seeds the initial panel breakpoints. A result
    that did not reach the tolerance is returned with ``converged=False``
    and a warning is logged.
    """
    spec = spec or QuadratureSpec()
    if b < a:
        r = integrate_1d(f, b, a, spec, points, atol)
        r.value = -r.value
        return r
    if a == b:
        return QuadResult(0.0, 0.0, 0)
    if math.isinf(a):
        raise InvalidParameterError("lower limit must be finite")

    if math.isinf(b):
        def run(lo, hi, tol):
            return _adaptive_finite(f, lo, hi, spec, points, tol if tol is not None else atol)

        value, error, nev, ok, meta = _semi_infinite(run, a, spec, scale=max(1.0, abs(a)))
    else:
        value, error, nev, ok, npan = _adaptive_finite(f, a, b, spec, points, atol)
        meta = {"panels": npan}
    if not ok:
        log.warning("integrate_1d unconverged on (%g, %g): value=%r error=%g", a, b, value, error)
    value = value.item() if isinstance(value, np.generic) else value
    return QuadResult(value, float(error), int(nev), bool(ok), meta)


def _rule2(f, x0, x1, y0, y1, order):
    x, w = gauss_legendre(order)
    hx = 0.5 * (x1 - x0)
    hy = 0.5 * (y1 - y0)
    X = (0.5 * (x0 + x1))[:, None, None] + hx[:, None, None] * x[None, :, None]
    Y = (0.5 * (y0 + y1))[:, None, None] + hy[:, None, None] * x[None, None, :]
    X, Y = np.broadcast_arrays(X, Y)
    vals = np.asarray(f(X, Y))
    ww = w[:, None] * w[None, :]
    return (vals * ww[None]).sum(axis=(1, 2)) * hx * hy


def _adaptive_2d(f, xa, xb, ya, yb, spec, nx, ny, atol):
    ex = np.linspace(xa, xb, nx + 1)
    ey = np.linspace(ya, yb, ny + 1)
    X0, Y0 = np.meshgrid(ex[:-1], ey[:-1], indexing="ij")
    X1, Y1 = np.meshgrid(ex[1:], ey[1:], indexing="ij")
    x0, x1, y0, y1 = X0.ravel(), X1.ravel(), Y0.ravel(), Y1.ravel()
    order = spec.order
    coarse = _rule2(f, x0, x1, y0, y1, order)
    nev = order * order * len(x0)
    area = (xb - xa) * (yb - ya)

    done = []  # (x0, y0, value, err)
    converged = True
    while True:
        xm = 0.5 * (x0 + x1)
        ym = 0.5 * (y0 + y1)
        quads = [
            (x0, xm, y0, ym), (xm, x1, y0, ym),
            (x0, xm, ym, y1), (xm, x1, ym, y1),
        ]
        parts = [_rule2(f, *q, order) for q in quads]
        nev += 4 * order * order * len(x0)
        fine = parts[0] + parts[1] + parts[2] + parts[3]
        err = np.abs(fine - coarse)

        prev = np.array([d[2] for d in done], dtype=fine.dtype) if done else np.zeros(0, fine.dtype)
        total = prev.sum() + fine.sum()
        target = max(spec.rtol * abs(total), atol)
        share = target * (x1 - x0) * (y1 - y0) / area
        bad = err > share
        n_cells = len(done) + len(x0) + 3 * int(bad.sum())
        stop = not bad.any() or n_cells > spec.max_subdivisions
        keep = ~bad if not stop else np.ones_like(bad)
        if stop and bad.any():
            converged = False
        done.extend(zip(x0[keep].tolist(), y0[keep].tolist(), fine[keep].tolist(), err[keep].tolist()))
        if stop:
            break
        new = [np.concatenate([q[i][bad] for q in quads]) for i in range(4)]
        new_coarse = np.concatenate([p[bad] for p in parts])
        idx = np.lexsort((new[2], new[0]))
        x0, x1, y0, y1 = (arr[idx] for arr in new)
        coarse = new_coarse[idx]

    done.sort(key=lambda d: (d[0], d[1]))
    value = np.array([d[2] for d in done]).sum()
    error = float(sum(d[3] for d in done))
    if error > max(spec.rtol * abs(value), atol):
        converged = False
    return value, error, nev, converged, len(done)


def integrate_2d(
    f: Callable,
    x_interval: tuple,
    y_interval: tuple = (-1.0, 1.0),
    spec: Optional[QuadratureSpec] = None,
    x_panels: int = 1,
    y_panels: int = 1,
    atol: Optional[float] = None,
) -> QuadResult:
    """Adaptive tensor-product cubature of ``f(x, y)`` over a rectangle.

    The x upper limit may be infinite (same tail policy as
    :func:`integrate_1d`, without the periodic variant). ``x_panels`` and
    ``y_panels`` set the initial cell grid; oscillatory integrands should
    start with cells no wider than a few oscillation periods.
    """
    spec = spec or QuadratureSpec()
    xa, xb = map(float, x_interval)
    ya, yb = map(float, y_interval)
    if xb <= xa or yb <= ya:
        raise InvalidParameterError("intervals must be nonempty and increasing")
    atol = spec.atol if atol is None else atol

    if math.isinf(xb):
        def run(lo, hi, tol):
            return _adaptive_2d(f, lo, hi, ya, yb, spec, x_panels, y_panels,
                                atol if tol is None else tol)

        tail_spec = spec if spec.period is None else QuadratureSpec(
            rtol=spec.rtol, max_subdivisions=spec.max_subdivisions, order=spec.order,
            atol=spec.atol, cutoff=spec.cutoff)
        value, error, nev, ok, meta = _semi_infinite(run, xa, tail_spec, scale=max(1.0, abs(xa)))
    else:
        value, error, nev, ok, ncell = _adaptive_2d(f, xa, xb, ya, yb, spec, x_panels, y_panels, atol)
        meta = {"cells": ncell}
    if not ok:
        log.warning("integrate_2d unconverged: value=%r error=%g", value, error)
    value = value.item() if isinstance(value, np.generic) else value
    return QuadResult(value, float(error), int(nev), bool(ok), meta)
