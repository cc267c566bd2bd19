"""Smeared two-point functions of the massless field.

Conventions: W2(f1, f2) = int d^3k / ((2 pi)^3 2|k|) conj(f1~(k)) f2~(k) with
f~ the on-shell transform of :mod:`clickbound.testfn`. With q = sqrt(2)|k|
the self-overlap reduces to

    W0 = 2 pi^2 alpha^2 int_0^inf h(q)^2 / q dq.

For the boosted overlap W(eta) = W2[f, f o L(eta)] the boosted energy is
t*|k| with t = cosh(eta) + mu*sinh(eta). Trading mu for t and writing
q1 = sqrt(2)|k|, q2 = t*q1 = q1*exp(-d) turns the (k, mu) integral into a
band |log q1 - log q2| <= |eta| with a bounded phase:

    W(eta) = 2 pi^2 alpha^2 / sinh|eta|
             * int_0^|eta| dd int_0^inf dq  h(q)/q * h(q e^-d)
               * exp(i r tanh(eta/2) q (1 + e^-d)).

The integrand is smooth and no longer concentrates near mu = -1 at large
rapidity. :func:`boosted_overlap_kmu` keeps the original (k, mu) form as a
cross-check.
"""

from __future__ import annotations

import hashlib
import json
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

import numpy as np
from scipy.interpolate import CubicSpline

from .quadrature import QuadratureSpec, QuadResult, integrate_1d, integrate_2d
from .special import InvalidParameterError
from .testfn import ModelParams, OnShellProfile, default_profile, radial_ft

__all__ = [
    "W2_SELF_PREFACTOR",
    "OverlapTable",
    "TableSettings",
    "w2_self",
    "boosted_overlap",
    "boosted_overlap_kmu",
    "overlap_grid",
    "build_overlap_table",
    "load_or_build_table",
]

log = logging.getLogger(__name__)

W2_SELF_PREFACTOR = 2.0 * math.pi ** 2
KMU_PREFACTOR = 1.0 / (8.0 * math.pi ** 2)

DEFAULT_SPEC = QuadratureSpec(rtol=1e-10, order=10, max_subdivisions=20000)

# bump this when the numerics of the table change, so stale caches are ignored
TABLE_FORMAT = 1


def _q_cut(profile: OnShellProfile, rel: float = 1e-10) -> float:
    """Smallest u beyond which |h| stays below rel * max|h|."""
    h = np.abs(profile.grid * profile.values)
    big = np.nonzero(h >= rel * h.max())[0]
    return float(profile.grid[big[-1]]) + 1.0 if big.size else profile.u_max


def _radial_norm(spec: QuadratureSpec, profile: OnShellProfile) -> QuadResult:
    qc = _q_cut(profile, 1e-12)

    def integrand(u):
        p = profile.over_u(u)
        return u * p * p

    return integrate_1d(integrand, 0.0, qc, spec, points=np.arange(4.0, qc, 4.0).tolist(),
                        atol=1e-16)


def w2_self(params: ModelParams, spec: Optional[QuadratureSpec] = None,
            profile: Optional[OnShellProfile] = None) -> QuadResult:
    """Self-overlap W2(f, f) (real, nonnegative).

    Returns a :class:`QuadResult`; ``converged`` is False if the radial
    quadrature missed its tolerance.
    """
    spec = spec or DEFAULT_SPEC
    profile = profile or default_profile()
    r = _radial_norm(spec, profile)
    scale = W2_SELF_PREFACTOR * params.alpha ** 2
    return QuadResult(scale * float(r.value), scale * r.error, r.evaluations, r.converged)


def boosted_overlap(eta: float, params: ModelParams, spec: Optional[QuadratureSpec] = None,
                    profile: Optional[OnShellProfile] = None,
                    radial_norm: Optional[float] = None) -> QuadResult:
    """W(eta) = W2[f, f o L(eta)] via the band form (see module docstring).

    ``radial_norm`` is int h^2/q dq; it sets the absolute error floor
    (rtol * W0) and is computed when omitted.
    """
    spec = spec or DEFAULT_SPEC
    profile = profile or default_profile()
    eta = float(eta)
    if eta == 0.0:
        return w2_self(params, spec, profile)
    if radial_norm is None:
        radial_norm = float(_radial_norm(spec, profile).value)
    a = abs(eta)
    tau = math.tanh(0.5 * eta)
    r = params.r_ratio
    qc = _q_cut(profile)
    sh = math.sinh(a)

    def integrand(q, d):
        ed = np.exp(-d)
        return profile.over_u(q) * profile(q * ed) * np.exp(1j * r * tau * q * (1.0 + ed))

    # absolute target rtol * W0 on W, expressed for the band integral
    atol = spec.rtol * radial_norm * sh
    res = integrate_2d(integrand, (0.0, qc), (0.0, a), spec,
                       x_panels=int(math.ceil(qc / 8.0)), y_panels=max(1, int(math.ceil(a / 2.0))),
                       atol=atol)
    scale = W2_SELF_PREFACTOR * params.alpha ** 2 / sh
    return QuadResult(complex(res.value) * scale, res.error * abs(scale), res.evaluations,
                      res.converged, res.meta)


def boosted_overlap_kmu(eta: float, params: ModelParams, spec: Optional[QuadratureSpec] = None,
                        profile: Optional[OnShellProfile] = None) -> QuadResult:
    """Same overlap from the (k, mu) form

        (1/8 pi^2) int k dk int dmu exp{i sqrt2 r k [mu(cosh-1) + sinh]}
                   g^(sqrt2 k) g^(sqrt2 k (cosh + mu sinh)).

    Cell density follows the phase frequency bound
    sqrt2 r (1 + cosh + |sinh|); practical only for moderate rapidities.
    """
    spec = spec or DEFAULT_SPEC
    profile = profile or default_profile()
    ch, sh = math.cosh(eta), math.sinh(eta)
    r = params.r_ratio
    kc = _q_cut(profile) / math.sqrt(2.0)

    def integrand(k, mu):
        t = ch + mu * sh
        phase = np.exp(1j * math.sqrt(2.0) * r * k * (mu * (ch - 1.0) + sh))
        return (k * radial_ft(math.sqrt(2.0) * k, 1.0, profile)
                * radial_ft(math.sqrt(2.0) * k * t, 1.0, profile) * phase)

    freq = math.sqrt(2.0) * r * (1.0 + ch + abs(sh))
    mu_panels = max(2, int(math.ceil(freq * kc / 40.0)))
    res = integrate_2d(integrand, (0.0, kc), (-1.0, 1.0), spec,
                       x_panels=int(math.ceil(kc / 2.0)), y_panels=mu_panels,
                       atol=1e-14)
    scale = KMU_PREFACTOR * params.alpha ** 2
    return QuadResult(complex(res.value) * scale, res.error * abs(scale), res.evaluations,
                      res.converged, res.meta)


def overlap_grid(eta_max: float = 40.0, log_points: int = 140, step: float = 0.05,
                 far_start: float = 4.0, far_step: float = 0.25) -> np.ndarray:
    """Rapidity nodes: 0, log-spaced on [1e-3, 1), uniform with ``step`` on
    [1, far_start) and with ``far_step`` from there to eta_max.

    W is smooth and decays like exp(-eta) past a few units of rapidity, so
    the far region tolerates the wider spacing.
    """
    if not eta_max > far_start > 1.0:
        raise InvalidParameterError("need eta_max > far_start > 1")
    near = 1.0 + step * np.arange(int(round((far_start - 1.0) / step)))
    far = far_start + far_step * np.arange(int(round((eta_max - far_start) / far_step)) + 1)
    return np.concatenate([[0.0], np.geomspace(1e-3, 1.0, log_points, endpoint=False), near, far])


@dataclass(frozen=True)
class TableSettings:
    eta_max: float = 40.0
    log_points: int = 140
    step: float = 0.05
    far_start: float = 4.0
    far_step: float = 0.25
    rtol: float = 1e-10
    tail_threshold: float = 1e-6

    def as_dict(self) -> dict:
        return {
            "eta_max": self.eta_max, "log_points": self.log_points, "step": self.step,
            "far_start": self.far_start, "far_step": self.far_step,
            "rtol": self.rtol, "tail_threshold": self.tail_threshold, "format": TABLE_FORMAT,
        }

    def spec(self) -> QuadratureSpec:
        return replace(DEFAULT_SPEC, rtol=self.rtol)


def _mirror(eta, values):
    """Extend samples on [0, eta_max] to [-eta_max, eta_max] by conjugation."""
    x = np.concatenate([-eta[:0:-1], eta])
    y = np.concatenate([np.conj(values[:0:-1]), values])
    return x, y


@dataclass
class OverlapTable:
    """Sampled W(eta) on [0, eta_max] with a cubic-spline interpolant.

    Negative rapidities use W(-eta) = conj W(eta). Beyond ``eta_max`` the
    overlap is treated as zero (checked by ``tail_ok``).
    """

    params: ModelParams
    eta: np.ndarray
    values: np.ndarray
    w0: float
    errors: np.ndarray
    settings: dict = field(default_factory=dict)
    converged: bool = True
    tail_ok: bool = True
    loo: float = 0.0
    _spline: CubicSpline = field(init=False, repr=False)

    def __post_init__(self):
        self.eta = np.asarray(self.eta, dtype=float)
        self.values = np.asarray(self.values, dtype=complex)
        self.errors = np.asarray(self.errors, dtype=float)
        if self.eta[0] != 0.0 or np.any(np.diff(self.eta) <= 0):
            raise InvalidParameterError("eta grid must start at 0 and increase")
        self._spline = CubicSpline(*_mirror(self.eta, self.values))

    @property
    def eta_max(self) -> float:
        return float(self.eta[-1])

    @property
    def interp_ok(self) -> bool:
        """Leave-one-out interpolation error within 1e-4 * W0."""
        return bool(self.loo <= 1e-4 * self.w0)

    @property
    def ok(self) -> bool:
        return self.converged and self.tail_ok and self.interp_ok

    def __call__(self, eta):
        eta = np.asarray(eta, dtype=float)
        inside = np.abs(eta) <= self.eta_max
        out = np.where(inside, self._spline(np.clip(eta, -self.eta_max, self.eta_max)), 0.0)
        return complex(out) if out.ndim == 0 else out

    def one_minus_re_exp(self, eta):
        """1 - Re exp(W(eta) - W0), computed without cancellation for small W."""
        d = self(eta) - self.w0
        # 1 - e^x cos y = -(expm1(x) cos y) + (1 - cos y)
        return -np.expm1(d.real) * np.cos(d.imag) + 2.0 * np.sin(0.5 * d.imag) ** 2

    def loo_error(self) -> float:
        """Largest leave-one-out interpolation error over interior samples."""
        worst = 0.0
        n = len(self.eta)
        for i in range(1, n - 1):
            keep = np.ones(n, dtype=bool)
            keep[i] = False
            spl = CubicSpline(*_mirror(self.eta[keep], self.values[keep]))
            worst = max(worst, float(abs(spl(self.eta[i]) - self.values[i])))
        return worst

    def scaled(self, alpha: float) -> "OverlapTable":
        """Table for another amplitude (W is exactly quadratic in alpha)."""
        s = (alpha / self.params.alpha) ** 2
        return OverlapTable(ModelParams(alpha, self.params.r_ratio), self.eta, self.values * s,
                            self.w0 * s, self.errors * s, dict(self.settings), self.converged,
                            self.tail_ok, self.loo * s)

    # -- persistence ---------------------------------------------------------

    def save(self, path) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        tmp = path.with_name(path.name + f".tmp{os.getpid()}")
        with open(tmp, "wb") as fh:
            np.savez(fh, eta=self.eta, values=self.values, errors=self.errors,
                     w0=np.float64(self.w0),
                     meta=np.array(json.dumps({
                         "params": self.params.as_dict(), "settings": self.settings,
                         "converged": self.converged, "tail_ok": self.tail_ok,
                         "loo": self.loo,
                     }, sort_keys=True)))
        os.replace(tmp, path)

    @classmethod
    def load(cls, path) -> "OverlapTable":
        with np.load(path, allow_pickle=False) as z:
            meta = json.loads(str(z["meta"]))
            return cls(ModelParams(**meta["params"]), z["eta"], z["values"], float(z["w0"]),
                       z["errors"], meta["settings"], meta["converged"], meta["tail_ok"],
                       meta["loo"])


def _eval_chunk(args):
    etas, r_ratio, spec, radial_norm = args
    params = ModelParams(1.0, r_ratio)
    out = []
    for e in etas:
        res = boosted_overlap(e, params, spec, radial_norm=radial_norm)
        out.append((complex(res.value), res.error, res.converged))
    return out


def build_overlap_table(params: ModelParams, settings: Optional[TableSettings] = None,
                        workers: int = 1) -> OverlapTable:
    """Sample W(eta) on :func:`overlap_grid` and wrap it in an OverlapTable.

    Samples are computed for unit amplitude and scaled by alpha^2, so the
    table is exactly quadratic in alpha. ``workers > 1`` spreads samples
    over processes; the result does not depend on the worker count.
    """
    settings = settings or TableSettings()
    spec = settings.spec()
    eta = overlap_grid(settings.eta_max, settings.log_points, settings.step,
                       settings.far_start, settings.far_step)
    norm_res = _radial_norm(spec, default_profile())
    norm = float(norm_res.value)
    todo = eta[1:]
    if workers > 1:
        chunks = [todo[i::workers] for i in range(workers)]
        with ProcessPoolExecutor(workers) as ex:
            parts = list(ex.map(_eval_chunk, [(c, params.r_ratio, spec, norm) for c in chunks]))
        samples = [None] * len(todo)
        for i, part in enumerate(parts):
            for j, s in enumerate(part):
                samples[i + j * workers] = s
    else:
        samples = _eval_chunk((todo, params.r_ratio, spec, norm))

    w0_full = W2_SELF_PREFACTOR * norm
    values = np.array([w0_full] + [s[0] for s in samples], dtype=complex)
    errors = np.array([W2_SELF_PREFACTOR * norm_res.error] + [s[1] for s in samples])
    converged = bool(norm_res.converged and all(s[2] for s in samples))
    tail_ok = bool(abs(values[-1]) <= settings.tail_threshold * w0_full)
    if not converged:
        log.warning("overlap table for r_ratio=%g has unconverged samples", params.r_ratio)
    if not tail_ok:
        log.warning("|W(eta_max)| above tail threshold; increase eta_max")
    unit = OverlapTable(ModelParams(1.0, params.r_ratio), eta, values, w0_full, errors,
                        settings.as_dict(), converged, tail_ok)
    unit.loo = unit.loo_error()
    if not unit.interp_ok:
        log.warning("leave-one-out interpolation error %.3g exceeds 1e-4 W0", unit.loo)
    if params.alpha == 1.0:
        return unit
    if params.alpha == 0.0:
        return _zero_table(unit, params)
    return unit.scaled(params.alpha)


def _zero_table(unit: OverlapTable, params: ModelParams) -> OverlapTable:
    return OverlapTable(params, unit.eta, np.zeros_like(unit.values), 0.0,
                        np.zeros_like(unit.errors), dict(unit.settings), unit.converged, True, 0.0)


def table_key(r_ratio: float, settings: TableSettings) -> str:
    blob = json.dumps({"r_ratio": float(r_ratio), **settings.as_dict()}, sort_keys=True)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def load_or_build_table(params: ModelParams, settings: Optional[TableSettings] = None,
                        cache_dir=None, workers: int = 1) -> OverlapTable:
    """Unit-amplitude table from ``cache_dir`` if present, else built and stored.

    The cache holds alpha = 1 tables keyed by r_ratio and settings; other
    amplitudes are exact rescalings.
    """
    settings = settings or TableSettings()
    unit_params = ModelParams(1.0, params.r_ratio)
    unit = None
    path = None
    if cache_dir is not None:
        path = Path(cache_dir) / f"overlap_{table_key(params.r_ratio, settings)}.npz"
        if path.exists():
            try:
                unit = OverlapTable.load(path)
            except Exception as exc:  # corrupt cache file: rebuild
                log.warning("ignoring unreadable cache %s: %s", path, exc)
    if unit is None:
        unit = build_overlap_table(unit_params, settings, workers)
        if path is not None:
            unit.save(path)
    if params.alpha == 1.0:
        return unit
    if params.alpha == 0.0:
        return _zero_table(unit, params)
    return unit.scaled(params.alpha)
