"""Click-probability bound for a local detector given its dark-count rate.

For a coherent state |f> and a detector localized away from the region
where the approximating operators live, the click probability obeys

    P_click <= (E_zeta + ||A_zeta|| sqrt(P_dark))^2      for every zeta > 0,

with approximation error

    E_zeta^2 = 1 - int deta [2 G_zeta(eta) - G_2zeta(eta)] exp(W(eta) - W0)

and operator norm ||A_zeta|| <= exp(pi^2 / (2 zeta)). The tightest bound
is the minimum over zeta, searched on a log grid and refined by golden
section.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .quadrature import QuadratureSpec, integrate_1d
from .special import InvalidParameterError, gaussian
from .testfn import ModelParams
from .wightman import OverlapTable, w2_self

__all__ = [
    "BoundResult",
    "ZetaSearchSpec",
    "ZetaScan",
    "approx_error",
    "norm_factor",
    "generic_bound",
    "scan_zeta",
    "bound_min",
    "bound_curve",
    "p_ideal",
    "p_ideal_from_w0",
]

log = logging.getLogger(__name__)

# exp overflows double precision beyond this argument
_EXP_MAX = math.log(np.finfo(float).max)

# quadrature for the rapidity integral; the integrand is a spline times
# Gaussians, so panels at the table nodes converge quickly
_ETA_SPEC = QuadratureSpec(rtol=1e-11, order=8, max_subdivisions=20000)

# rapidity window in units of the wide kernel's standard deviation
_WINDOW_SIGMAS = 12.0


def norm_factor(zeta: float) -> float:
    """Upper bound exp(pi^2 / (2 zeta)) on the approximating operator's norm.

    Saturates to ``math.inf`` (with a debug log line) when the exponent
    exceeds the double-precision range.
    """
    if not zeta > 0:
        raise InvalidParameterError(f"zeta must be positive, got {zeta!r}")
    x = math.pi ** 2 / (2.0 * zeta)
    if x > _EXP_MAX:
        log.debug("norm factor overflow at zeta=%g", zeta)
        return math.inf
    return math.exp(x)


def generic_bound(e: float, norm: float, p_dark: float) -> float:
    """(E + N sqrt(P_dark))^2; the P_dark = 0 case ignores N (even infinite)."""
    if e < 0 or not norm >= 1 or not 0 <= p_dark <= 1:
        raise InvalidParameterError(f"invalid bound inputs E={e!r} N={norm!r} P_dark={p_dark!r}")
    if p_dark == 0:
        return e * e
    s = e + norm * math.sqrt(p_dark)
    return s * s  # inf rather than OverflowError for huge norms


def _weight(eta, zeta):
    return 2.0 * gaussian(eta, zeta) - gaussian(eta, 2.0 * zeta)


def approx_error(zeta: float, table: OverlapTable) -> float:
    """Approximation error E_zeta in [0, 1] from a tabulated overlap.

    The rapidity integral runs over |eta| <= min(eta_max, 12 sqrt(2 zeta));
    beyond eta_max the overlap is zero and the Gaussian tail mass is added
    in closed form. For narrow windows the quadratic term c*eta^2 of
    1 - Re exp(W - W0) is subtracted first: its weighted integral vanishes
    exactly because 2 G_zeta - G_2zeta has zero second moment, and dropping
    it removes the cancellation that would otherwise dominate at small zeta.
    """
    if not zeta > 0:
        raise InvalidParameterError(f"zeta must be positive, got {zeta!r}")
    window = _WINDOW_SIGMAS * math.sqrt(2.0 * zeta)
    cut = min(table.eta_max, window)
    nodes = table.eta[(table.eta > 0) & (table.eta < cut)]

    if cut < table.eta_max:
        e1 = table.eta[1]
        c = float(table.one_minus_re_exp(e1)) / (e1 * e1)

        def integrand(eta):
            return _weight(eta, zeta) * (table.one_minus_re_exp(eta) - c * eta * eta)

        tail = 0.0
    else:
        def integrand(eta):
            return _weight(eta, zeta) * table.one_minus_re_exp(eta)

        far = -math.expm1(-table.w0)
        tail = far * (math.erfc(cut / math.sqrt(2.0 * zeta))
                      - 0.5 * math.erfc(cut / (2.0 * math.sqrt(zeta))))

    res = integrate_1d(integrand, 0.0, cut, _ETA_SPEC, points=nodes.tolist(), atol=1e-17)
    e2 = 2.0 * (float(res.value) + tail)
    if e2 < 0.0:
        log.debug("clamped negative E^2 = %.3g at zeta=%g", e2, zeta)
        e2 = 0.0
    return min(1.0, math.sqrt(e2))


@dataclass(frozen=True)
class ZetaSearchSpec:
    """Log-grid plus golden-section search box for zeta.

    The upper end is far out because for dark counts above ~1e-2 the
    minimizer sits past 1e5: there E_zeta approaches sqrt(P_ideal) only like
    zeta^-1/2 while the norm factor approaches 1 like 1/zeta.
    """

    zeta_min: float = 1e-3
    zeta_max: float = 1e8
    grid_points: int = 360
    rtol: float = 1e-4

    def __post_init__(self):
        if not 0 < self.zeta_min < self.zeta_max:
            raise InvalidParameterError("need 0 < zeta_min < zeta_max")
        if self.grid_points < 16:
            raise InvalidParameterError("grid_points must be >= 16")
        if not self.rtol > 0:
            raise InvalidParameterError("rtol must be positive")

    def grid(self) -> np.ndarray:
        return np.geomspace(self.zeta_min, self.zeta_max, self.grid_points)


@dataclass
class ZetaScan:
    """E_zeta and norm factors on the search grid; shared by all P_dark."""

    table: OverlapTable
    search: ZetaSearchSpec
    zetas: np.ndarray
    errors: np.ndarray
    norms: np.ndarray
    _cache: dict = field(default_factory=dict, repr=False)

    def error_at(self, zeta: float) -> float:
        z = float(zeta)
        if z not in self._cache:
            self._cache[z] = approx_error(z, self.table)
        return self._cache[z]


def scan_zeta(table: OverlapTable, search: Optional[ZetaSearchSpec] = None) -> ZetaScan:
    search = search or ZetaSearchSpec()
    zetas = search.grid()
    errors = np.array([approx_error(z, table) for z in zetas])
    norms = np.array([norm_factor(z) for z in zetas])
    scan = ZetaScan(table, search, zetas, errors, norms)
    scan._cache.update(zip(zetas.tolist(), errors.tolist()))
    return scan


@dataclass(frozen=True)
class BoundResult:
    p_dark: float
    zeta_star: float
    e_zeta: float
    raw_bound: float
    p_max: float
    converged: bool = True
    boundary: bool = False
    limit_case: bool = False

    @property
    def flags(self) -> list:
        out = []
        if not self.converged:
            out.append("unconverged")
        if self.boundary:
            out.append("boundary minimum")
        if self.limit_case:
            out.append("limit case")
        return out


_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def _golden(fn, lo, hi, rtol, max_iter=200):
    """Golden-section minimum of fn on [lo, hi] (log-zeta coordinates)."""
    a, b = lo, hi
    x1 = b - _INV_PHI * (b - a)
    x2 = a + _INV_PHI * (b - a)
    f1, f2 = fn(x1), fn(x2)
    it = 0
    while (b - a) > rtol and it < max_iter:
        if f1 <= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - _INV_PHI * (b - a)
            f1 = fn(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + _INV_PHI * (b - a)
            f2 = fn(x2)
        it += 1
    return (x1, f1) if f1 <= f2 else (x2, f2), (b - a) <= rtol


def bound_min(p_dark: float, table: OverlapTable, search: Optional[ZetaSearchSpec] = None,
              scan: Optional[ZetaScan] = None) -> BoundResult:
    """Minimize (E_zeta + exp(pi^2/2zeta) sqrt(P_dark))^2 over zeta.

    Log-grid scan, then golden section on the bracket around the best grid
    point; the refined point replaces the grid point only if it is lower.
    P_dark = 0 is the zeta -> 0 limit, outside the search box: it returns
    E^2 at zeta_min flagged as a limit case.
    """
    if not 0.0 <= p_dark <= 1.0:
        raise InvalidParameterError(f"P_dark must lie in [0, 1], got {p_dark!r}")
    scan = scan or scan_zeta(table, search)
    search = scan.search
    ok = table.ok
    if p_dark == 0.0:
        e = float(scan.errors[0])
        raw = e * e
        return BoundResult(0.0, float(scan.zetas[0]), e, raw, min(1.0, raw), ok, True, True)

    sq = math.sqrt(p_dark)
    with np.errstate(over="ignore", invalid="ignore"):
        values = (scan.errors + scan.norms * sq) ** 2
    i = int(np.argmin(values))
    best_z, best_e = float(scan.zetas[i]), float(scan.errors[i])
    best_v = float(values[i])
    boundary = i == 0 or i == len(values) - 1
    if not boundary:
        def fn(logz):
            z = math.exp(logz)
            return generic_bound(scan.error_at(z), norm_factor(z), p_dark)

        lo, hi = math.log(scan.zetas[i - 1]), math.log(scan.zetas[i + 1])
        (lz, fv), gconv = _golden(fn, lo, hi, search.rtol)
        ok = ok and gconv
        if fv < best_v:
            best_z = math.exp(lz)
            best_e = scan.error_at(best_z)
            best_v = fv
    raw = generic_bound(best_e, norm_factor(best_z), p_dark)
    return BoundResult(float(p_dark), best_z, best_e, raw, min(1.0, raw), ok, boundary, False)


def bound_curve(p_darks: Sequence[float], table: OverlapTable,
                search: Optional[ZetaSearchSpec] = None) -> list:
    """bound_min over many dark-count values with one shared zeta scan."""
    scan = scan_zeta(table, search)
    return [bound_min(float(p), table, scan=scan) for p in p_darks]


def p_ideal_from_w0(w0: float) -> float:
    """1 - exp(-W0): click probability of the (nonlocal) vacuum-orthogonal projector."""
    return -math.expm1(-w0)


def p_ideal(params: ModelParams, spec: Optional[QuadratureSpec] = None) -> float:
    res = w2_self(params, spec)
    if not res.converged:
        log.warning("W0 quadrature unconverged; P_ideal may be inaccurate")
    return p_ideal_from_w0(float(res.value))
