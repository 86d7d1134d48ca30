"""Points, distances, geodesics, circles and rotations on the Riemann sphere.

The sphere is the unit sphere in R^3 identified with the extended plane by
stereographic projection from the north pole, so that 0 sits at the south
pole (0, 0, -1) and infinity at the north pole (0, 0, 1).

Every point carries both representations. The 3-vector is what distances and
rotations use; the complex value is what the quadrature charts use.
"""

from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np

ANTIPODAL_TOL = 1e-12


class Infinity(enum.Enum):
    """The point at infinity. Never represented as an IEEE infinity."""

    INF = "inf"

    def __repr__(self) -> str:
        return "INF"


INF = Infinity.INF

Extended = Union[complex, float, int, Infinity]


class AntipodalPair(ValueError):
    """Raised when a shortest path is requested between antipodal points."""

    def __init__(self, distance: float, tol: float = ANTIPODAL_TOL):
        super().__init__(
            f"points are antipodal (distance {distance!r} >= pi - {tol:g}); "
            "no unique shortest path"
        )
        self.distance = distance
        self.tol = tol


def stereo_project(z: Extended) -> np.ndarray:
    """Map an extended complex number to the unit sphere."""
    if z is INF:
        return np.array([0.0, 0.0, 1.0])
    z = complex(z)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise ValueError("use INF for the point at infinity")
    a = abs(z)
    if a <= 1.0:
        d = 1.0 + a * a
        return np.array([2 * z.real / d, 2 * z.imag / d, (a * a - 1.0) / d])
    # Reciprocal chart keeps precision for large |z|.
    w = 1.0 / z
    b = abs(w)
    d = 1.0 + b * b
    return np.array([2 * w.real / d, -2 * w.imag / d, (1.0 - b * b) / d])


def stereo_project_array(z: np.ndarray) -> np.ndarray:
    """Vectorised projection of finite complex values; returns shape (..., 3)."""
    z = np.asarray(z, dtype=complex)
    out = np.empty(z.shape + (3,))
    a2 = (z * np.conj(z)).real
    small = a2 <= 1.0
    with np.errstate(divide="ignore", invalid="ignore"):
        d = 1.0 + a2
        w = np.where(small, 0, 1.0 / np.where(small, 1, z))
        b2 = (w * np.conj(w)).real
        e = 1.0 + b2
        out[..., 0] = np.where(small, 2 * z.real / d, 2 * w.real / e)
        out[..., 1] = np.where(small, 2 * z.imag / d, -2 * w.imag / e)
        out[..., 2] = np.where(small, (a2 - 1.0) / d, (1.0 - b2) / e)
    return out


def stereo_invert(v) -> Extended:
    """Map a unit 3-vector back to the extended plane."""
    x1, x2, x3 = (float(c) for c in v)
    if x3 <= 0.0:
        return complex(x1, x2) / (1.0 - x3)
    if x1 == 0.0 and x2 == 0.0:
        return INF
    # z = (x1 + i x2)/(1 - x3) rewritten to avoid cancellation near the pole.
    return (1.0 + x3) / complex(x1, -x2)


def chordal_distance(z: Extended, w: Extended) -> float:
    return float(np.linalg.norm(stereo_project(z) - stereo_project(w)))


@dataclass(frozen=True)
class ExtPoint:
    """A point of the Riemann sphere, held as extended complex value and unit vector."""

    value: Extended
    vec: np.ndarray = field(repr=False, compare=False)

    @classmethod
    def from_complex(cls, z: Extended) -> "ExtPoint":
        if z is not INF:
            z = complex(z)
        return cls(z, _frozen(stereo_project(z)))

    @classmethod
    def from_vector(cls, v) -> "ExtPoint":
        v = np.asarray(v, dtype=float)
        n = np.linalg.norm(v)
        if n == 0.0:
            raise ValueError("zero vector is not a point of the sphere")
        v = v / n
        return cls(stereo_invert(v), _frozen(v))

    @property
    def is_infinity(self) -> bool:
        return self.value is INF

    def __eq__(self, other) -> bool:
        if not isinstance(other, ExtPoint):
            return NotImplemented
        return bool(np.array_equal(self.vec, other.vec))

    def __hash__(self) -> int:
        return hash(tuple(self.vec.tolist()))

    def __repr__(self) -> str:
        return f"ExtPoint({self.value!r})"


def _frozen(v: np.ndarray) -> np.ndarray:
    v = np.array(v, dtype=float)
    v.flags.writeable = False
    return v


def as_point(p) -> ExtPoint:
    """Coerce a complex number, INF, 3-vector or ExtPoint to an ExtPoint."""
    if isinstance(p, ExtPoint):
        return p
    if p is INF or isinstance(p, (complex, float, int, np.number)):
        return ExtPoint.from_complex(p)
    return ExtPoint.from_vector(p)


ZERO = ExtPoint.from_complex(0)
ONE = ExtPoint.from_complex(1)
INFINITY = ExtPoint.from_complex(INF)
E_POINTS = (ZERO, ONE, INFINITY)


def in_e(p, tol: float = 1e-12) -> bool:
    """True when p is within ``tol`` (radians) of one of 0, 1, infinity."""
    v = as_point(p).vec
    return any(_angle(v, e.vec) <= tol for e in E_POINTS)


def cross(a, b) -> np.ndarray:
    """Cross product of two 3-vectors; much cheaper than np.cross for single pairs."""
    return np.array([
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ])


def _angle(a: np.ndarray, b: np.ndarray) -> float:
    return math.atan2(float(np.linalg.norm(cross(a, b))), float(np.dot(a, b)))


def spherical_distance(p, q) -> float:
    """Great-circle distance in [0, pi]."""
    return _angle(as_point(p).vec, as_point(q).vec)


@dataclass(frozen=True)
class GeodesicArc:
    """An arc of a great circle from ``start`` to ``end``.

    ``normal`` is the unit normal of the great-circle plane oriented so that the
    arc runs counterclockwise about it. It disambiguates antipodal endpoints and
    lets the arc be the longer way round.
    """

    start: ExtPoint
    end: ExtPoint
    normal: np.ndarray = field(repr=False, compare=False)

    def __post_init__(self):
        n = np.asarray(self.normal, dtype=float)
        n = n / np.linalg.norm(n)
        if abs(np.dot(n, self.start.vec)) > 1e-9 or abs(np.dot(n, self.end.vec)) > 1e-9:
            raise ValueError("normal is not perpendicular to the arc endpoints")
        object.__setattr__(self, "normal", _frozen(n))

    @functools.cached_property
    def length(self) -> float:
        a, b, n = self.start.vec, self.end.vec, self.normal
        ang = math.atan2(float(np.dot(cross(a, b), n)), float(np.dot(a, b)))
        if ang <= 0.0:
            ang += 2 * math.pi
        return ang

    @functools.cached_property
    def tangent_start(self) -> np.ndarray:
        return cross(self.normal, self.start.vec)

    def position(self, phi) -> np.ndarray:
        """Points at arc-length ``phi`` from the start; shape (..., 3)."""
        phi = np.asarray(phi, dtype=float)[..., None]
        return np.cos(phi) * self.start.vec + np.sin(phi) * self.tangent_start

    def point_at(self, phi: float) -> ExtPoint:
        return ExtPoint.from_vector(self.position(phi))

    def reversed(self) -> "GeodesicArc":
        return GeodesicArc(self.end, self.start, -self.normal)


def shortest_path(p, q, tol: float = ANTIPODAL_TOL) -> GeodesicArc:
    """The unique minimising geodesic from p to q."""
    p, q = as_point(p), as_point(q)
    d = spherical_distance(p, q)
    if d >= math.pi - tol:
        raise AntipodalPair(d, tol)
    if d == 0.0:
        raise ValueError("endpoints coincide")
    return GeodesicArc(p, q, cross(p.vec, q.vec))


# The segment [0, +inf] through 1, split at 1 so both halves are shortest paths.
RAY_SEGMENTS = (shortest_path(ZERO, ONE), shortest_path(ONE, INFINITY))


@dataclass(frozen=True)
class SphericalCircle:
    """Circle of angular radius ``radius`` about ``center``."""

    center: ExtPoint
    radius: float

    def __post_init__(self):
        if not 0.0 < self.radius < math.pi:
            raise ValueError("spherical radius must lie in (0, pi)")

    @property
    def euclidean_radius(self) -> float:
        return math.sin(self.radius)

    @property
    def length(self) -> float:
        return 2 * math.pi * self.euclidean_radius

    @property
    def cap_area(self) -> float:
        # 2*pi*(1 - cos r) written to stay accurate for small r.
        return 4 * math.pi * math.sin(self.radius / 2) ** 2

    def contains(self, p, tol: float = 0.0) -> bool:
        return spherical_distance(self.center, p) <= self.radius + tol


@dataclass(frozen=True)
class Rotation:
    """A proper rotation of the sphere."""

    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        if m.shape != (3, 3):
            raise ValueError("rotation matrix must be 3x3")
        if not np.allclose(m @ m.T, np.eye(3), atol=1e-10) or np.linalg.det(m) < 0:
            raise ValueError("not a proper rotation")
        object.__setattr__(self, "matrix", _frozen(m))

    @classmethod
    def identity(cls) -> "Rotation":
        return cls(np.eye(3))

    @classmethod
    def about_axis(cls, axis, angle: float) -> "Rotation":
        k = np.asarray(axis, dtype=float)
        k = k / np.linalg.norm(k)
        kx = np.array([[0, -k[2], k[1]], [k[2], 0, -k[0]], [-k[1], k[0], 0]])
        return cls(np.eye(3) + math.sin(angle) * kx + (1 - math.cos(angle)) * kx @ kx)

    @classmethod
    def random(cls, rng: np.random.Generator) -> "Rotation":
        from scipy.spatial.transform import Rotation as _R

        return cls(_R.random(random_state=rng).as_matrix())

    def __call__(self, p) -> ExtPoint:
        return rotate(self, p)

    def compose(self, other: "Rotation") -> "Rotation":
        return Rotation(self.matrix @ other.matrix)

    def mobius(self) -> tuple[complex, complex, complex, complex]:
        """Coefficients (a, b, c, d) of the matching map w -> (a w + b)/(c w + d)."""
        w = math.sqrt(max(0.0, 1.0 + np.trace(self.matrix)))
        if w > 1e-6:
            # axis * sin(angle/2), recovered from the antisymmetric part
            m = self.matrix
            s = np.array([m[2, 1] - m[1, 2], m[0, 2] - m[2, 0], m[1, 0] - m[0, 1]]) / (2 * w)
            c = w / 2
        else:
            # rotation by pi: axis from the symmetric part
            vals, vecs = np.linalg.eigh((self.matrix + np.eye(3)) / 2)
            s = vecs[:, np.argmax(vals)]
            c = 0.0
        n1, n2, n3 = s
        # cos(a/2) I + i sin(a/2) (n1 s1 - n2 s2 + n3 s3) for this projection's orientation
        return (complex(c, n3), complex(-n2, n1), complex(n2, n1), complex(c, -n3))


def rotate(r: Rotation, p) -> ExtPoint:
    return ExtPoint.from_vector(r.matrix @ as_point(p).vec)
