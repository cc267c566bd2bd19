"""Brute-force validators for the reduced integrals of the main path.

Nothing here uses the radial Bessel reduction or the band coordinates of
:mod:`clickbound.wightman`. The on-shell transform is a direct quadrature
of the 4-D Fourier integral over the support ball, and the overlap is the
3-D momentum integral of two such transforms, with the boost applied to
the momentum 4-vector. All rules are fixed Gauss-Legendre grids, so the
results are deterministic; each value carries the difference from the same
computation at half the node budget as its error estimate.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, replace
from typing import Optional

import numpy as np

from .quadrature import QuadResult, fixed_panels
from .special import InvalidParameterError, bump_theta
from .testfn import ModelParams, onshell_ft
from .wightman import boosted_overlap, w2_self

__all__ = [
    "OracleBudget",
    "OracleReport",
    "ft_bruteforce",
    "ft_onshell_bruteforce",
    "w2_bruteforce",
    "verify_suite",
]

_CHUNK = 256


@dataclass(frozen=True)
class OracleBudget:
    """Node counts for the brute-force grids.

    The position-space rule has ``n_time`` x ``n_radial`` x ``n_angle``
    nodes (time, spatial radius, cosine to the momentum); the momentum rule
    has ``k_panels`` x ``mu_panels`` panels of ``order`` nodes on
    [0, k_max] x [-1, 1].
    """

    n_time: int = 48
    n_radial: int = 32
    n_angle: int = 48
    k_panels: int = 20
    mu_panels: int = 6
    order: int = 10
    k_max: float = 30.0

    def __post_init__(self):
        for name in ("n_time", "n_radial", "n_angle", "k_panels", "mu_panels", "order"):
            if getattr(self, name) < 4:
                raise InvalidParameterError(f"{name} must be >= 4")
        if not self.k_max > 0:
            raise InvalidParameterError("k_max must be positive")

    def halved(self) -> "OracleBudget":
        return self.scaled(0.5)

    def doubled(self) -> "OracleBudget":
        return self.scaled(2.0)

    def scaled(self, f: float) -> "OracleBudget":
        """All node and panel counts multiplied by ``f`` (at least 4 each)."""
        def s(n):
            return max(4, int(round(n * f)))
        return replace(self, n_time=s(self.n_time), n_radial=s(self.n_radial),
                       n_angle=s(self.n_angle), k_panels=s(self.k_panels),
                       mu_panels=s(self.mu_panels))

    def as_dict(self) -> dict:
        return asdict(self)


def _split(a, b, n):
    # four panels keep each Gauss rule short while using exactly n nodes
    return fixed_panels(a, b, 4, max(1, n // 4))


class _BallRule:
    """Position-space rule on the unit 4-ball centred at the origin."""

    def __init__(self, budget: OracleBudget):
        t, wt = _split(-1.0, 1.0, budget.n_time)
        rho, wr = _split(0.0, 1.0, budget.n_radial)
        c, wc = _split(-1.0, 1.0, budget.n_angle)
        radius = np.sqrt(t[:, None] ** 2 + rho[None, :] ** 2)
        # the bump vanishes smoothly at the ball's edge, so the rectangle
        # rule needs no special treatment of the corners outside it
        profile = np.where(radius < 1.0, bump_theta(1.0 - radius), 0.0)
        self.t = t
        self.rho = rho
        self.c = c
        self.wc = wc
        # 2 pi from the azimuth about the spatial momentum
        self.weights = 2.0 * math.pi * profile * wt[:, None] * (wr * rho * rho)[None, :]

    def __call__(self, k0, kabs):
        """int d^4u exp(i(k0 u0 - kvec.u)) theta(1 - |u|) for arrays k0, |kvec|."""
        time = np.exp(1j * np.outer(k0, self.t))
        inner = np.einsum("nt,tr->nr", time, self.weights)
        arg = kabs[:, None, None] * self.rho[None, :, None] * self.c[None, None, :]
        angle = np.exp(-1j * arg) @ self.wc
        return np.sum(inner * angle, axis=1)


def _ft_points(k0, kvec1, kabs, params, rule):
    """Transform of f at 4-momenta (k0, kvec) given x1-component and modulus."""
    out = np.empty(k0.shape, dtype=complex)
    # translation to the centre: k.C with the mostly-minus dot product
    cx1 = params.center[1]
    for i in range(0, k0.size, _CHUNK):
        sl = slice(i, i + _CHUNK)
        out[sl] = rule(k0[sl], kabs[sl]) * np.exp(-1j * kvec1[sl] * cx1)
    return params.alpha * out


def ft_bruteforce(k0, k1, kabs, params: ModelParams,
                  budget: Optional[OracleBudget] = None) -> np.ndarray:
    """Direct 4-D transform of the smearing function at 4-momenta.

    ``k1`` is the x1-component of the spatial momentum and ``kabs`` its
    modulus; the result does not assume the momentum is on the light cone.
    """
    budget = budget or OracleBudget()
    k0, k1, kabs = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (k0, k1, kabs)))
    if params.alpha == 0:
        return np.zeros(k0.shape, dtype=complex)
    rule = _BallRule(budget)
    flat = _ft_points(k0.ravel(), k1.ravel(), kabs.ravel(), params, rule)
    return flat.reshape(k0.shape)


def ft_onshell_bruteforce(k: float, mu: float, params: ModelParams,
                          budget: Optional[OracleBudget] = None) -> QuadResult:
    """On-shell transform at |k| = k, cosine ``mu`` to the x1 axis."""
    if not k > 0:
        raise InvalidParameterError("on-shell transform needs k > 0")
    if not -1.0 <= mu <= 1.0:
        raise InvalidParameterError("mu must lie in [-1, 1]")
    budget = budget or OracleBudget()

    def run(b):
        return complex(ft_bruteforce(k, k * mu, k, params, b))

    full = run(budget)
    half = run(budget.halved())
    evals = budget.n_time * budget.n_radial * budget.n_angle
    return QuadResult(full, abs(full - half), evals, meta={"budget": budget.as_dict()})


def _w2(eta, params, budget):
    k, wk = fixed_panels(0.0, budget.k_max, budget.k_panels, budget.order)
    mu, wm = fixed_panels(-1.0, 1.0, budget.mu_panels, budget.order)
    kk, mm = (a.ravel() for a in np.meshgrid(k, mu, indexing="ij"))
    w = np.outer(wk, wm).ravel()
    ch, sh = math.cosh(eta), math.sinh(eta)
    kx = kk * mm
    # boost along x1 applied to the null 4-vector (k, k mu, k_perp)
    b0 = ch * kk + sh * kx
    b1 = sh * kk + ch * kx
    perp2 = np.maximum(kk * kk - kx * kx, 0.0)
    babs = np.sqrt(b1 * b1 + perp2)
    rule = _BallRule(budget)
    f1 = _ft_points(kk, kx, kk, params, rule)
    f2 = _ft_points(b0, b1, babs, params, rule)
    # d^3k / ((2 pi)^3 2k) with the azimuth done: k dk dmu / (8 pi^2)
    total = np.sum(w * kk * np.conj(f1) * f2) / (8.0 * math.pi ** 2)
    return complex(total), kk.size


def w2_bruteforce(eta: float, params: ModelParams,
                  budget: Optional[OracleBudget] = None) -> QuadResult:
    """W2[f, f o L(eta)] from the 3-D momentum integral of direct transforms.

    Momenta beyond ``budget.k_max`` are dropped.
    """
    budget = budget or OracleBudget()
    eta = float(eta)
    if params.alpha == 0:
        return QuadResult(0j, 0.0, 0, meta={"budget": budget.as_dict()})
    full, n = _w2(eta, params, budget)
    half, _ = _w2(eta, params, budget.halved())
    return QuadResult(full, abs(full - half), n, meta={"budget": budget.as_dict()})


@dataclass(frozen=True)
class OracleReport:
    name: str
    main: complex
    oracle: complex
    deviation: float
    tolerance: float
    budget: int
    passed: bool

    def as_dict(self) -> dict:
        def c(z):
            return [float(np.real(z)), float(np.imag(z))]
        return {"name": self.name, "main": c(self.main), "oracle": c(self.oracle),
                "deviation": self.deviation, "tolerance": self.tolerance,
                "budget": self.budget, "passed": self.passed}


def _report(name, main, oracle, deviation, tol, budget):
    return OracleReport(name, complex(main), complex(oracle), float(deviation), tol, budget,
                        bool(deviation <= tol))


def _component_dev(main, oracle, scale):
    d = complex(main) - complex(oracle)
    return max(abs(d.real), abs(d.imag)) / scale


# (rapidity, tolerance on max(|dRe|, |dIm|) / W0)
OVERLAP_CHECKS = ((0.3, 0.02), (0.7, 0.02), (1.5, 0.05))


def verify_suite(params: Optional[ModelParams] = None,
                 budget: Optional[OracleBudget] = None) -> list:
    """Agreement checks between the main path and the brute-force oracles."""
    params = params or ModelParams(1.0, 2.0)
    budget = budget or OracleBudget()
    reports = []

    k, mu = 1.3, 0.4
    o = ft_onshell_bruteforce(k, mu, params, budget)
    m = onshell_ft(k, mu, params)
    dev = abs(m - o.value) / abs(o.value) if params.alpha else abs(m - o.value)
    reports.append(_report(f"onshell_ft(k={k}, mu={mu})", m, o.value, dev,
                           0.01 if params.alpha else 1e-12, o.evaluations))

    w0 = float(w2_self(params).value)
    o0 = w2_bruteforce(0.0, params, budget)
    if params.alpha:
        dev = abs(w0 - o0.value) / abs(o0.value)
        tol = 0.01
    else:
        dev, tol = max(abs(w0), abs(o0.value)), 1e-12
    reports.append(_report("w2_self", w0, o0.value, dev, tol, o0.evaluations))

    for eta, tol in OVERLAP_CHECKS:
        m = boosted_overlap(eta, params).value
        o = w2_bruteforce(eta, params, budget)
        if params.alpha:
            dev = _component_dev(m, o.value, abs(o0.value))
        else:
            dev, tol = max(abs(m), abs(o.value)), 1e-12
        reports.append(_report(f"boosted_overlap(eta={eta})", m, o.value, dev, tol,
                               o.evaluations))

    # the oracle's own hermiticity: W(-eta) = conj W(eta)
    eta = 0.7
    plus = w2_bruteforce(eta, params, budget).value
    minus = w2_bruteforce(-eta, params, budget).value
    if params.alpha:
        dev, tol = _component_dev(minus, np.conj(plus), abs(o0.value)), 0.02
    else:
        dev, tol = max(abs(plus), abs(minus)), 1e-12
    reports.append(_report(f"oracle hermiticity(eta=+-{eta})", minus, np.conj(plus), dev, tol,
                           2 * o0.evaluations))
    return reports
