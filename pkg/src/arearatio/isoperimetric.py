"""Isoperimetric bounds on the sphere and hemisphere containment of curves."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import brentq

from .lens import DomainError, SQRT2_PI, arc_length_theta, segment_area_integrand, zeta0_inverse, zeta1
from .quadrature import integrate
from .sphere import ExtPoint, as_point, cross

TWO_PI = 2.0 * math.pi
FOUR_PI = 4.0 * math.pi
EQUALITY_TOL = 1e-6


class DegenerateInput(ValueError):
    """Input carries no points to work with."""


# --- Bernstein and the cap bound ------------------------------------------


def bernstein_holds(A: float, L: float) -> tuple[bool, float]:
    """Check L^2 >= 4 pi A - A^2; returns (holds, slack)."""
    if not 0.0 <= A <= FOUR_PI:
        raise DomainError("area must lie in [0, 4 pi]")
    if L < 0.0:
        raise DomainError("length must be nonnegative")
    slack = L * L - (FOUR_PI * A - A * A)
    return slack >= 0.0, slack


@dataclass(frozen=True)
class CapBound:
    length: float

    @property
    def ratio(self) -> float:
        return self.length / TWO_PI

    @property
    def max_area(self) -> float:
        return cap_area_bound(self.length)


def cap_area_bound(L: float) -> float:
    """Largest area enclosed by a curve of length L <= 2 pi inside a hemisphere."""
    if L < 0.0 or L > TWO_PI:
        raise DomainError("cap bound needs 0 <= L <= 2 pi")
    R = L / TWO_PI
    # 1 - sqrt(1 - R^2) = R^2 / (1 + sqrt(1 - R^2)), stable for small R
    return TWO_PI * R * R / (1.0 + math.sqrt(max(0.0, 1.0 - R * R)))


def _cap_term(l: np.ndarray) -> np.ndarray:
    return l * l / (TWO_PI + np.sqrt(np.maximum(0.0, FOUR_PI * math.pi - l * l)))


def superadditivity_gap(lengths: Sequence[float]) -> float:
    """(2pi - sqrt(4pi^2 - l^2)) minus the same expression summed over the parts.

    Nonnegative, and zero exactly when one part carries all of l.
    """
    parts = np.asarray(lengths, dtype=float)
    if parts.size == 0 or np.any(parts < 0.0):
        raise DomainError("lengths must be a nonempty list of nonnegative reals")
    total = float(math.fsum(parts))
    if total >= TWO_PI:
        raise DomainError("total length must be below 2 pi")
    if np.count_nonzero(parts) <= 1:
        return 0.0
    return float(_cap_term(np.array(total)) - math.fsum(_cap_term(parts)))


# --- smallest enclosing cap -----------------------------------------------


@dataclass(frozen=True)
class EnclosingCap:
    center: ExtPoint
    radius: float

    @property
    def margin(self) -> float:
        """pi/2 - radius; positive iff the points lie in an open hemisphere."""
        return math.pi / 2 - self.radius


def _unit(v: np.ndarray) -> np.ndarray:
    return v / np.linalg.norm(v)


def _cap1(a):
    return a, 1.0


def _cap2(a, b):
    m = a + b
    n = np.linalg.norm(m)
    if n < 1e-15:
        # antipodal pair: any great circle through both is a boundary
        e = np.eye(3)[np.argmin(np.abs(a))]
        return _unit(cross(a, e)), 0.0
    c = m / n
    return c, float(np.dot(c, a))


def _cap3(a, b, c):
    n = cross(b - a, c - a)
    nn = np.linalg.norm(n)
    if nn < 1e-15:
        # two of the three coincide; the widest pair decides
        return min((_cap2(a, b), _cap2(a, c), _cap2(b, c)), key=lambda cc: cc[1])
    n = n / nn
    if np.dot(n, a) < 0.0:
        n = -n
    return n, float(np.dot(n, a))


def _as_array(points) -> np.ndarray:
    if isinstance(points, np.ndarray) and points.ndim == 2 and points.shape[1] == 3:
        arr = points.astype(float)
    else:
        arr = np.array([as_point(p).vec for p in points], dtype=float).reshape(-1, 3)
    return arr / np.linalg.norm(arr, axis=1, keepdims=True)


def smallest_enclosing_cap(points, seed: int = 0) -> EnclosingCap:
    """Minimal cap containing the points, by randomized incremental construction.

    Points are unit 3-vectors (an (n, 3) array) or anything ``as_point`` takes.
    The answer is minimal whenever the points fit in an open hemisphere. The
    returned radius is always the true maximum angle from the center to the
    points, so a nonpositive margin is a valid certificate of failure.
    """
    P = _as_array(points)
    n = len(P)
    if n == 0:
        raise DegenerateInput("no points")
    P = P[np.random.default_rng(seed).permutation(n)]
    eps = 1e-12

    def first_outside(stop, start, c, cosr):
        hit = np.nonzero(P[start:stop] @ c < cosr - eps)[0]
        return start + int(hit[0]) if hit.size else None

    c, cosr = _cap1(P[0])
    i = first_outside(n, 1, c, cosr)
    while i is not None:
        c, cosr = _cap1(P[i])
        j = first_outside(i, 0, c, cosr)
        while j is not None:
            c, cosr = _cap2(P[i], P[j])
            k = first_outside(j, 0, c, cosr)
            while k is not None:
                c, cosr = _cap3(P[i], P[j], P[k])
                k = first_outside(j, k + 1, c, cosr)
            j = first_outside(i, j + 1, c, cosr)
        i = first_outside(n, i + 1, c, cosr)
    sines = np.linalg.norm(np.cross(P, c), axis=1)
    radius = float(np.max(np.arctan2(sines, P @ c)))
    return EnclosingCap(ExtPoint.from_vector(c), radius)


# --- random closed polygons ------------------------------------------------


def _slerp_from(center: np.ndarray, pts: np.ndarray, s: float) -> np.ndarray:
    """Move each point along its geodesic from ``center`` to fraction s of the way."""
    dots = np.clip(pts @ center, -1.0, 1.0)
    ang = np.arccos(dots)
    perp = pts - dots[:, None] * center
    norms = np.linalg.norm(perp, axis=1, keepdims=True)
    perp = np.where(norms > 1e-15, perp / np.where(norms > 1e-15, norms, 1.0), 0.0)
    return np.cos(s * ang)[:, None] * center + np.sin(s * ang)[:, None] * perp


def closed_length(vertices: np.ndarray) -> float:
    nxt = np.roll(vertices, -1, axis=0)
    sines = np.linalg.norm(np.cross(vertices, nxt), axis=1)
    return float(np.sum(np.arctan2(sines, np.einsum("ij,ij->i", vertices, nxt))))


def random_short_polygon(rng: np.random.Generator, max_length: float = TWO_PI - 0.01) -> np.ndarray:
    """Vertices of a random closed geodesic polygon with length below max_length.

    Alternates between scattered vertices (often self-intersecting) and
    perturbed great circles, then shrinks toward a random center until the
    length lands just under a target drawn close to max_length.
    """
    n = int(rng.integers(3, 16))
    if rng.random() < 0.5:
        pts = rng.normal(size=(n, 3))
    else:
        frame = np.linalg.qr(rng.normal(size=(3, 3)))[0]
        phi = np.sort(rng.uniform(0, TWO_PI, n))
        ring = np.column_stack([np.cos(phi), np.sin(phi), rng.normal(scale=0.05, size=n)])
        pts = ring @ frame.T
    pts /= np.linalg.norm(pts, axis=1, keepdims=True)
    center = _unit(rng.normal(size=3))
    target = max_length - rng.exponential(0.05) if rng.random() < 0.7 else rng.uniform(0.1, max_length)
    target = min(target, max_length - 1e-6)
    lo, hi = 0.0, 1.0
    if closed_length(pts) <= target:
        return pts
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if closed_length(_slerp_from(center, pts, mid)) <= target:
            lo = mid
        else:
            hi = mid
    return _slerp_from(center, pts, lo)


def sample_closed_polygon(vertices: np.ndarray, step: float = 0.01) -> np.ndarray:
    """Points along every shortest-path edge, spaced at most ``step`` apart."""
    out = []
    nxt = np.roll(vertices, -1, axis=0)
    for a, b in zip(vertices, nxt):
        ang = math.atan2(float(np.linalg.norm(cross(a, b))), float(np.dot(a, b)))
        k = max(1, math.ceil(ang / step))
        t = np.arange(k) / k
        if ang < 1e-15:
            out.append(a[None, :])
            continue
        w = (b - math.cos(ang) * a) / math.sin(ang)
        out.append(np.cos(t * ang)[:, None] * a + np.sin(t * ang)[:, None] * w)
    return np.concatenate(out)


# --- two-arc domains through 0 and 1 ---------------------------------------


def _theta_for_arc_length(l: float) -> float:
    if not math.pi / 2 <= l < 1.5 * math.pi:
        raise DomainError("arc length must lie in [pi/2, 3pi/2)")
    if l == math.pi / 2:
        return 0.0
    return brentq(lambda th: arc_length_theta(th) - l, 0.0, math.pi - 1e-15, xtol=1e-15)


def _area_under_arc(theta: float, tol: float) -> float:
    if theta == 0.0:
        return 0.0
    return integrate(segment_area_integrand(theta), 0.0, theta, tol).value


def two_arc_area(l1: float, l2: float, tol: float = 1e-12) -> float:
    """Area of the domain bounded by two circular arcs from 0 to 1 of lengths l1 and l2,
    one in each half-plane."""
    return _area_under_arc(_theta_for_arc_length(l1), tol) + _area_under_arc(_theta_for_arc_length(l2), tol)


def lens_is_extremal_check(l: float, split: tuple[float, float]) -> bool:
    """Confirm the symmetric lens maximises area among two-arc domains of perimeter l.

    True when the split's area does not exceed the lens area, with equality
    (to EQUALITY_TOL) for the symmetric split and strict inequality otherwise.
    """
    l1, l2 = (float(x) for x in split)
    if not math.pi < l < SQRT2_PI:
        raise DomainError("perimeter must lie in (pi, sqrt(2) pi)")
    if abs(l1 + l2 - l) > 1e-12 * max(1.0, l):
        raise DomainError("split must sum to l")
    if min(l1, l2) < math.pi / 2:
        raise DomainError("each arc must have length at least pi/2")
    lens_area = 2.0 * zeta1(zeta0_inverse(l / 2.0))
    area = two_arc_area(l1, l2)
    if abs(l1 - l2) <= 1e-9 * l:
        return abs(area - lens_area) <= EQUALITY_TOL
    return area < lens_area
