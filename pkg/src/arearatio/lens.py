"""The symmetric two-arc lens domain and the area-length ratio it induces.

A lens with vertices at 0 and 1 is bounded by two mirror-image circular arcs.
Each arc meets the real axis at angle theta, and tau = sin(theta). For
tau in [0, 1] the closed forms below give the arc length zeta0(tau), the area
zeta1(tau) between one arc and the segment [0, 1], and the ratio h(tau) of
(4 pi + lens area) to lens perimeter. The sharp constant h0 is max h.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .quadrature import ParamCurve
from .sphere import Rotation

SQRT2_PI = math.sqrt(2.0) * math.pi
GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0

# z -> 1/z, carrying the {0, 1} lens onto the {1, inf} lens.
SWAP_ZERO_INF = Rotation(np.diag([1.0, -1.0, -1.0]))


class DomainError(ValueError):
    """An argument lies outside the domain where a formula is valid."""


def _check_tau(tau, lo_open: bool = False) -> np.ndarray:
    t = np.asarray(tau, dtype=float)
    bad = (t <= 0.0) if lo_open else (t < 0.0)
    if np.any(bad | (t > 1.0)) or np.any(np.isnan(t)):
        raise DomainError(f"tau must lie in {'(0' if lo_open else '[0'}, 1]")
    return t


def _scalar_or_array(x: np.ndarray, like):
    return float(x) if np.ndim(like) == 0 else x


def _cot_ratio(tau: np.ndarray) -> np.ndarray:
    return np.sqrt(1.0 - tau * tau) / np.sqrt(1.0 + tau * tau)


def zeta0(tau):
    """Spherical length of one lens arc; increasing from pi/2 to pi/sqrt(2)."""
    t = _check_tau(tau)
    out = 2.0 / np.sqrt(1.0 + t * t) * (math.pi / 2 - np.arctan(_cot_ratio(t)))
    return _scalar_or_array(out, tau)


def zeta1(tau):
    """Spherical area between one lens arc and the segment [0, 1]."""
    t = _check_tau(tau)
    out = 2.0 * np.arcsin(t) - t * np.asarray(zeta0(t))
    return _scalar_or_array(out, tau)


def h(tau):
    """(4 pi + lens area) / lens perimeter, written in tau."""
    t = _check_tau(tau)
    # arccot(x) = arctan2(1, x) stays in (0, pi/2] for x >= 0
    out = np.sqrt(1.0 + t * t) * (math.pi + np.arcsin(t)) / np.arctan2(1.0, _cot_ratio(t)) - t
    return _scalar_or_array(out, tau)


def arc_length_theta(theta):
    """Length of the arc from 1 to 0 meeting the real axis at angle theta in [0, pi).

    Agrees with zeta0(sin theta) for theta <= pi/2 and continues past it.
    """
    th = np.asarray(theta, dtype=float)
    if np.any((th < 0.0) | (th >= math.pi)):
        raise DomainError("theta must lie in [0, pi)")
    s = np.sin(th)
    root = np.sqrt(1.0 + s * s)
    out = 2.0 / root * (math.pi / 2 - np.arctan(np.cos(th) / root))
    return _scalar_or_array(out, theta)


def arc_param(tau: float, t):
    """Point alpha(t) = sin(theta - t)/sin(theta) e^{it} on the arc from 1 to 0."""
    theta = float(np.arcsin(_check_tau(tau, lo_open=True)))
    return arc_param_theta(theta, t)


def arc_param_theta(theta: float, t):
    if not 0.0 < theta < math.pi:
        raise DomainError("theta must lie in (0, pi)")
    tt = np.asarray(t, dtype=float)
    if np.any((tt < -1e-15) | (tt > theta + 1e-15)):
        raise DomainError("t must lie in [0, theta]")
    out = np.sin(theta - tt) / math.sin(theta) * np.exp(1j * tt)
    return complex(out) if np.ndim(t) == 0 else out


def arc_param_derivative(theta: float, t):
    tt = np.asarray(t, dtype=float)
    return np.exp(1j * tt) * (-np.cos(theta - tt) + 1j * np.sin(theta - tt)) / math.sin(theta)


def arc_curve(theta: float) -> ParamCurve:
    """The arc from 1 to 0 as a curve on [0, 1]."""
    return ParamCurve.from_complex(
        lambda s: arc_param_theta(theta, theta * s),
        lambda s: theta * arc_param_derivative(theta, theta * s),
    )


def segment_area_integrand(theta: float):
    """Integrand in t whose integral over [0, theta] is the area under the arc.

    The region is star-shaped about 0 with polar angle t and radius |alpha(t)|,
    so its spherical area is the integral of 2 R^2 / (1 + R^2) dt.
    """

    def f(t):
        r = np.sin(theta - t) / math.sin(theta)
        r2 = r * r
        return 2.0 * r2 / (1.0 + r2)

    return f


def zeta0_inverse(value: float) -> float:
    """The tau in [0, 1] with zeta0(tau) = value."""
    lo, hi = math.pi / 2, math.pi / math.sqrt(2.0)
    slack = 1e-12
    if not lo - slack <= value <= hi + slack:
        raise DomainError(f"arc length must lie in [pi/2, pi/sqrt(2)], got {value!r}")
    if value <= lo:
        return 0.0
    if value >= hi:
        return 1.0
    return brentq(lambda t: zeta0(t) - value, 0.0, 1.0, xtol=1e-15, rtol=4 * np.finfo(float).eps)


@dataclass(frozen=True)
class H0Result:
    tau0: float
    h0: float
    iterations: int
    bracket_width: float

    @property
    def l0(self) -> float:
        return 2.0 * zeta0(self.tau0)

    @property
    def A0(self) -> float:
        return 2.0 * zeta1(self.tau0)


def find_h0(tol: float = 1e-10, scan_points: int = 10_000) -> H0Result:
    """Maximise h on [0, 1]: coarse grid scan to bracket, then golden section."""
    if not tol > 0:
        raise ValueError("tol must be positive")
    grid = np.linspace(0.0, 1.0, scan_points + 1)
    k = int(np.argmax(h(grid)))
    a, b = grid[max(k - 1, 0)], grid[min(k + 1, scan_points)]
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    hc, hd = h(c), h(d)
    iterations = 0
    while b - a > tol:
        iterations += 1
        if hc >= hd:
            b, d, hd = d, c, hc
            c = b - GOLDEN * (b - a)
            hc = h(c)
        else:
            a, c, hc = c, d, hd
            d = a + GOLDEN * (b - a)
            hd = h(d)
    tau0 = c if hc >= hd else d
    return H0Result(float(tau0), float(max(hc, hd)), iterations, float(b - a))


@dataclass(frozen=True)
class LensDomain:
    """The lens with vertices at an E-pair and perimeter 2 zeta0(tau)."""

    tau: float
    anchor: str = "{1,inf}"

    def __post_init__(self):
        _check_tau(self.tau)
        if self.anchor not in ("{0,1}", "{1,inf}"):
            raise DomainError("anchor must be '{0,1}' or '{1,inf}'")

    @property
    def theta(self) -> float:
        return math.asin(self.tau)

    @property
    def half_length(self) -> float:
        return zeta0(self.tau)

    @property
    def length(self) -> float:
        return 2.0 * self.half_length

    @property
    def area(self) -> float:
        return 2.0 * zeta1(self.tau)

    @property
    def ratio(self) -> float:
        """(4 pi + area) / length, equal to h(tau)."""
        return (4 * math.pi + self.area) / self.length

    def boundary_curve(self) -> ParamCurve:
        """Closed boundary: the upper arc 1 -> 0, then the mirrored arc 0 -> 1.

        For the {1, inf} anchor this is carried over by z -> 1/z.
        """
        if self.tau == 0.0:
            raise DomainError("degenerate lens has no interior")
        upper = arc_curve(self.theta)
        lower = upper.transformed(np.diag([1.0, -1.0, 1.0])).reversed()
        curve = ParamCurve.concat([upper, lower])
        if self.anchor == "{1,inf}":
            curve = curve.transformed(SWAP_ZERO_INF.matrix)
        return curve


def lens_from_length(l: float, anchor: str = "{1,inf}") -> LensDomain:
    """The lens of perimeter l, for l in [pi, sqrt(2) pi]."""
    if not math.pi - 1e-12 <= l <= SQRT2_PI + 1e-12:
        raise DomainError(f"lens perimeter must lie in [pi, sqrt(2) pi], got {l!r}")
    return LensDomain(zeta0_inverse(l / 2.0), anchor)
