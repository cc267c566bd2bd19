"""Elementary special functions: Bessel J1, Gaussian kernels and the smooth
bump partition used to build compactly supported test functions."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special as _sp

__all__ = [
    "InvalidParameterError",
    "GaussianKernel",
    "bessel_j1",
    "j1_over_x",
    "gaussian",
    "bump_phi",
    "bump_theta",
]


class InvalidParameterError(ValueError):
    """Raised when an argument lies outside the documented domain."""


def bessel_j1(x):
    """Bessel function of the first kind of order one.

    Relative error stays below 1e-13 up to x = 1e3, including next to the
    zeros. Accepts scalars or arrays; negative arguments use the odd
    extension.
    """
    out = _sp.jv(1, np.asarray(x, dtype=float))
    return float(out) if np.ndim(out) == 0 else out


def j1_over_x(x):
    """J1(x)/x, finite at the origin (limit 1/2).

    Below 1e-4 the two-term series is used; the truncation error there is
    below 1e-18 relative. Elsewhere this takes the faster Cephes J1, whose
    absolute error (about 1e-15) is what bulk quadrature needs; its relative
    error degrades next to the zeros, unlike :func:`bessel_j1`.
    """
    x = np.asarray(x, dtype=float)
    small = np.abs(x) < 1e-4
    safe = np.where(small, 1.0, x)
    x2 = x * x
    out = np.where(small, 0.5 - x2 / 16.0, _sp.j1(safe) / safe)
    return float(out) if out.ndim == 0 else out


def gaussian(eta, zeta):
    """Normalized Gaussian exp(-eta^2 / 2 zeta) / sqrt(2 pi zeta)."""
    if not zeta > 0:
        raise InvalidParameterError(f"variance must be positive, got {zeta!r}")
    eta = np.asarray(eta, dtype=float)
    out = np.exp(-eta * eta / (2.0 * zeta)) / math.sqrt(2.0 * math.pi * zeta)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class GaussianKernel:
    """Gaussian weight in the rapidity variable with variance ``zeta``."""

    zeta: float

    def __post_init__(self):
        if not self.zeta > 0:
            raise InvalidParameterError(f"variance must be positive, got {self.zeta!r}")

    def __call__(self, eta):
        return gaussian(eta, self.zeta)

    def tail_mass(self, cut):
        """Mass of the kernel on eta > cut (one side)."""
        return 0.5 * math.erfc(cut / math.sqrt(2.0 * self.zeta))


def bump_phi(s):
    """exp(-1/s) for s > 0 and 0 otherwise.

    The branch happens before exponentiating so that tiny positive ``s``
    underflows quietly to zero instead of overflowing 1/s.
    """
    s = np.asarray(s, dtype=float)
    pos = s > 0
    safe = np.where(pos, s, 1.0)
    with np.errstate(over="ignore", divide="ignore"):
        out = np.where(pos, np.exp(-1.0 / safe), 0.0)
    return float(out) if out.ndim == 0 else out


def bump_theta(s):
    """Smooth step: 0 for s <= 0, 1 for s >= 1, C-infinity in between.

    theta(s) = phi(s) / (phi(s) + phi(1 - s)). The denominator never
    vanishes because at least one of s, 1 - s is positive.
    """
    s = np.asarray(s, dtype=float)
    a = bump_phi(s)
    b = bump_phi(1.0 - s)
    out = np.where(s >= 1.0, 1.0, np.where(s <= 0.0, 0.0, a / (a + b)))
    return float(out) if out.ndim == 0 else out
