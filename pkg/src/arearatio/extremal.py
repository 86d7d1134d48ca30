"""The covering family whose area-length ratio climbs to h0.

The m-th member covers the complement of the lens D_{l0} m times and the lens
itself 2m times, so its area is 4 m pi + m A0. Its boundary runs twice over
the segment [0, 1] and m times around the lens, giving length pi + m l0.
Here l0 and A0 are the perimeter and area of the lens at tau0, the maximiser
of h.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np

from .lens import H0Result, arc_curve, find_h0
from .quadrature import ParamCurve
from .sphere import ONE, ZERO, shortest_path

FOUR_PI = 4.0 * math.pi
H0_TOL = 1e-12

# z -> 1/z and z -> 1/conj(z) on the embedded sphere.
_INVERT = np.diag([1.0, -1.0, -1.0])
_REFLECT_UNIT_CIRCLE = np.diag([1.0, 1.0, -1.0])


@functools.lru_cache(maxsize=None)
def optimum() -> H0Result:
    return find_h0(H0_TOL)


def _constants() -> tuple[float, float]:
    r = optimum()
    return r.l0, r.A0


def limit() -> float:
    """(4 pi + A0) / l0, the value ratio(m) increases to."""
    l0, A0 = _constants()
    return (FOUR_PI + A0) / l0


def _check_m(m: int) -> int:
    if isinstance(m, bool) or int(m) != m or m < 1:
        raise ValueError(f"m must be a positive integer, got {m!r}")
    return int(m)


def area(m: int) -> float:
    _, A0 = _constants()
    return _check_m(m) * (FOUR_PI + A0)


def length(m: int) -> float:
    l0, _ = _constants()
    return math.pi + _check_m(m) * l0


def ratio(m: int) -> float:
    return area(m) / length(m)


def deficit(m: int) -> float:
    """limit() - ratio(m), in the cancellation-free form pi * h0 / (pi + m l0)."""
    return math.pi * limit() / length(m)


def first_m_above(level: float, m_max: int = 10**6) -> int:
    """Smallest m with ratio(m) > level, found by scanning."""
    ms = np.arange(1, m_max + 1, dtype=float)
    l0, A0 = _constants()
    hit = np.nonzero(ms * (FOUR_PI + A0) / (math.pi + ms * l0) > level)[0]
    if hit.size == 0:
        raise ValueError(f"ratio stays at or below {level} for m <= {m_max}")
    return int(hit[0]) + 1


def _lens_arcs() -> tuple[ParamCurve, ParamCurve]:
    """The two arcs from 1 to inf bounding D_{l0}: upper then lower half-plane."""
    base = arc_curve(math.asin(optimum().tau0))  # from 1 to 0, upper half-plane
    return base.transformed(_REFLECT_UNIT_CIRCLE), base.transformed(_INVERT)


@dataclass(frozen=True)
class ExtremalFamily:
    m: int
    tau0: float
    l0: float
    A0: float
    h0: float
    boundary: ParamCurve

    @property
    def area(self) -> float:
        return area(self.m)

    @property
    def length(self) -> float:
        return length(self.m)

    @property
    def ratio(self) -> float:
        return ratio(self.m)

    @property
    def deficit(self) -> float:
        return deficit(self.m)


def boundary_curve(m: int) -> ParamCurve:
    """Closed boundary starting at inf.

    inf -> 1 along the upper arc, 1 -> 0 -> 1 along the real axis, 1 -> inf
    along the lower arc, then m - 1 further laps inf -> 1 -> inf.
    """
    m = _check_m(m)
    upper, lower = _lens_arcs()
    down = upper.reversed()
    seg = ParamCurve.geodesic(shortest_path(ZERO, ONE))
    pieces = [down, seg.reversed(), seg, lower]
    for _ in range(m - 1):
        pieces += [down, lower]
    return ParamCurve.concat(pieces)


def build(m: int) -> ExtremalFamily:
    m = _check_m(m)
    r = optimum()
    return ExtremalFamily(m, r.tau0, r.l0, r.A0, r.h0, boundary_curve(m))
