"""Piecewise-geodesic curves on the sphere and their classification against E = {0, 1, inf}.

Orientation follows the complex chart: a counterclockwise loop around 0 in
the plane turns left at every vertex. On the embedded sphere that makes the
left side of an edge a -> b the half-space y . (a x b) < 0, and the signed
turn at v is positive when v . (t_in x t_out) < 0.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional

import numpy as np

from .quadrature import ParamCurve
from .sphere import (
    E_POINTS,
    INF,
    AntipodalPair,
    ExtPoint,
    GeodesicArc,
    as_point,
    cross,
    in_e,
)

LONG_EDGE_TOL = 1e-9
SNAP_TOL = 1e-12
STRAIGHT_TOL = 1e-10
RAY_TOL = 1e-12
TANGENCY_BAND = 1e-8
TWO_PI = 2.0 * math.pi


class DegenerateCurve(ValueError):
    """The vertex list does not describe a usable curve."""


class AntipodalNeighbors(ValueError):
    """An edge next to the vertex is at least a half great circle long."""


class NonTransversal(ValueError):
    """An edge grazes the segment [0, +inf] too closely to resolve."""


def _angle(a: np.ndarray, b: np.ndarray) -> float:
    return math.atan2(float(np.linalg.norm(cross(a, b))), float(np.dot(a, b)))


@dataclass(frozen=True)
class GeodesicPolygon:
    """A closed curve or open path made of great-circle arcs between listed vertices.

    Edge i runs from vertex i to vertex i+1 (cyclically when closed) along the
    shortest path, unless ``witnesses[i]`` supplies the normal of its great
    circle. A witness is required for edges whose endpoints are (nearly)
    antipodal and lets an edge be longer than pi.
    """

    vertices: tuple[ExtPoint, ...]
    closed: bool = True
    witnesses: Mapping[int, np.ndarray] = field(default_factory=dict, repr=False)
    edges: tuple[GeodesicArc, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        verts = tuple(as_point(v) for v in self.vertices)
        if not verts:
            raise DegenerateCurve("a polygon needs at least one vertex")
        object.__setattr__(self, "vertices", verts)
        n = len(verts)
        m = n if (self.closed and n > 1) else n - 1
        edges = []
        for i in range(m):
            a, b = verts[i], verts[(i + 1) % n]
            if i in self.witnesses:
                edges.append(GeodesicArc(a, b, np.asarray(self.witnesses[i], dtype=float)))
                continue
            d = _angle(a.vec, b.vec)
            if d == 0.0:
                raise DegenerateCurve(f"edge {i} has coincident endpoints")
            if d >= math.pi - LONG_EDGE_TOL:
                raise AntipodalPair(d, LONG_EDGE_TOL)
            edges.append(GeodesicArc(a, b, cross(a.vec, b.vec)))
        object.__setattr__(self, "edges", tuple(edges))

    @classmethod
    def from_normals(cls, vertices, closed: bool, normals) -> "GeodesicPolygon":
        return cls(tuple(vertices), closed, dict(enumerate(normals)))

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def edge_lengths(self) -> np.ndarray:
        return np.array([e.length for e in self.edges])

    @property
    def length(self) -> float:
        return float(math.fsum(self.edge_lengths))

    @property
    def normals(self) -> list[np.ndarray]:
        return [e.normal for e in self.edges]

    def incoming(self, i: int) -> Optional[int]:
        if i > 0:
            return i - 1
        return len(self.edges) - 1 if self.closed and self.edges else None

    def outgoing(self, i: int) -> Optional[int]:
        return i if i < len(self.edges) else None

    def turn(self, i: int) -> float:
        """Signed turning angle at vertex i in (-pi, pi]; positive turns left."""
        ein, eout = self.incoming(i), self.outgoing(i)
        if ein is None or eout is None:
            raise ValueError(f"vertex {i} is an endpoint of an open path")
        v = self.vertices[i].vec
        t_in = cross(self.edges[ein].normal, v)
        t_out = cross(self.edges[eout].normal, v)
        return math.atan2(-float(np.dot(v, cross(t_in, t_out))), float(np.dot(t_in, t_out)))

    def reversed(self) -> "GeodesicPolygon":
        n = self.n_vertices
        if self.closed:
            verts = [self.vertices[0]] + list(self.vertices[:0:-1])
            normals = [-self.edges[(n - 1 - k) % n].normal for k in range(len(self.edges))]
        else:
            verts = list(self.vertices[::-1])
            normals = [-e.normal for e in self.edges[::-1]]
        return GeodesicPolygon.from_normals(verts, self.closed, normals)

    def sample_points(self, step: float = 0.01) -> np.ndarray:
        """Points along the curve spaced at most ``step`` radians apart, as (n, 3)."""
        if not self.edges:
            return np.array([self.vertices[0].vec])
        chunks = []
        for e in self.edges:
            k = max(1, math.ceil(e.length / step))
            chunks.append(e.position(np.arange(k) * (e.length / k)))
        if not self.closed:
            chunks.append(self.vertices[-1].vec[None, :])
        return np.concatenate(chunks)


# --- normalization ---------------------------------------------------------


def _snap(p: ExtPoint) -> ExtPoint:
    for e in E_POINTS:
        if _angle(p.vec, e.vec) <= SNAP_TOL:
            return e
    return p


def _e_points_inside(edge: GeodesicArc) -> list[tuple[float, ExtPoint]]:
    a, n, L = edge.start.vec, edge.normal, edge.length
    u = cross(n, a)
    hits = []
    for e in E_POINTS:
        if abs(np.dot(n, e.vec)) > SNAP_TOL:
            continue
        phi = math.atan2(float(np.dot(e.vec, u)), float(np.dot(e.vec, a))) % TWO_PI
        if SNAP_TOL < phi < L - SNAP_TOL:
            hits.append((phi, e))
    return sorted(hits, key=lambda h: h[0])


def normalize(p: GeodesicPolygon) -> GeodesicPolygon:
    """Canonical form: E-points made explicit, zero-length and straight joints removed.

    Vertices within 1e-12 of an E-point are snapped onto it; E-points lying
    inside an edge become vertices; straight vertices off E are merged away as
    long as the merged edge stays shorter than 2 pi. Exact back-tracking at a
    vertex off E is rejected.
    """
    verts = [_snap(v) for v in p.vertices]
    n = len(verts)
    kept_v, kept_n = [verts[0]], []
    for i, e in enumerate(p.edges):
        nxt = verts[(i + 1) % n]
        if _angle(kept_v[-1].vec, nxt.vec) <= SNAP_TOL and e.length < math.pi:
            continue
        kept_n.append(e.normal)
        kept_v.append(nxt)
    if not kept_n:
        raise DegenerateCurve("all vertices coincide")
    if p.closed:
        kept_v.pop()  # either vertex 0 again or within SNAP_TOL of it
    cur = GeodesicPolygon.from_normals(kept_v, p.closed, kept_n)

    out_v, out_n = [], []
    for i, e in enumerate(cur.edges):
        out_v.append(cur.vertices[i])
        out_n.append(e.normal)
        for _, pt in _e_points_inside(e):
            out_v.append(pt)
            out_n.append(e.normal)
    if not p.closed:
        out_v.append(cur.vertices[-1])
    poly = GeodesicPolygon.from_normals(out_v, p.closed, out_n)

    while True:
        joints = range(poly.n_vertices) if poly.closed else range(1, poly.n_vertices - 1)
        merge_at = None
        for i in joints:
            if in_e(poly.vertices[i], SNAP_TOL):
                continue
            psi = poly.turn(i)
            if abs(psi) >= math.pi - STRAIGHT_TOL:
                raise DegenerateCurve(f"curve back-tracks at vertex {i} ({poly.vertices[i].value!r})")
            ein, eout = poly.incoming(i), poly.outgoing(i)
            if (
                abs(psi) <= STRAIGHT_TOL
                and ein != eout
                and poly.edges[ein].length + poly.edges[eout].length < TWO_PI - SNAP_TOL
            ):
                merge_at = i
                break
        if merge_at is None:
            return poly
        # the incoming edge absorbs the outgoing one; both lie on one great circle
        verts = list(poly.vertices)
        normals = poly.normals
        del verts[merge_at]
        del normals[poly.outgoing(merge_at)]
        poly = GeodesicPolygon.from_normals(verts, poly.closed, normals)


# --- natural partition -----------------------------------------------------


@dataclass(frozen=True)
class NaturalEdge:
    start: Optional[int]
    end: Optional[int]
    edge_indices: tuple[int, ...]
    length: float


@dataclass(frozen=True)
class NaturalPartition:
    natural: tuple[bool, ...]
    edges: tuple[NaturalEdge, ...]

    @property
    def natural_vertices(self) -> list[int]:
        return [i for i, f in enumerate(self.natural) if f]


def _is_natural(p: GeodesicPolygon, i: int) -> bool:
    v = p.vertices[i]
    if in_e(v, SNAP_TOL):
        return True
    if p.incoming(i) is None or p.outgoing(i) is None:
        return True
    return abs(p.turn(i)) > STRAIGHT_TOL


def natural_partition(p: GeodesicPolygon) -> NaturalPartition:
    """Flag natural vertices and group the edges between consecutive ones.

    A vertex is natural when it lies in E, is not straight, or ends an open
    path. A closed curve without natural vertices is a single natural edge
    with no endpoints.
    """
    n = p.n_vertices
    flags = tuple(_is_natural(p, i) for i in range(n))
    lengths = p.edge_lengths
    m = len(p.edges)
    nat = [i for i in range(n) if flags[i]]
    if m == 0:
        return NaturalPartition(flags, ())
    if not nat:
        return NaturalPartition(
            flags, (NaturalEdge(None, None, tuple(range(m)), float(math.fsum(lengths))),)
        )
    groups: list[NaturalEdge] = []
    origin = start = nat[0]
    idx: list[int] = []
    steps = m if p.closed else m - origin
    for k in range(steps):
        e = (origin + k) % m
        idx.append(e)
        end = (e + 1) % n
        if flags[end]:
            groups.append(NaturalEdge(start, end, tuple(idx), float(math.fsum(lengths[idx]))))
            start, idx = end, []
    return NaturalPartition(flags, tuple(groups))


# --- convexity -------------------------------------------------------------


def is_convex_at(p: GeodesicPolygon, i: int) -> str:
    """'strictly_convex' for a left turn, 'straight', or 'non_convex'."""
    ein, eout = p.incoming(i), p.outgoing(i)
    if ein is None or eout is None:
        raise ValueError(f"vertex {i} is an endpoint of an open path")
    for e in (ein, eout):
        if p.edges[e].length >= math.pi - LONG_EDGE_TOL:
            raise AntipodalNeighbors(f"edge {e} next to vertex {i} has length >= pi")
    psi = p.turn(i)
    if abs(psi) <= STRAIGHT_TOL:
        return "straight"
    if 0.0 < psi < math.pi - STRAIGHT_TOL:
        return "strictly_convex"
    return "non_convex"


def is_locally_convex_in(
    p: GeodesicPolygon, predicate: Callable[[ExtPoint], bool]
) -> tuple[bool, list[int]]:
    """Whether every vertex in the region turns left or goes straight; returns offenders."""
    offenders = []
    for i in range(p.n_vertices):
        if p.incoming(i) is None or p.outgoing(i) is None:
            continue
        if predicate(p.vertices[i]) and is_convex_at(p, i) == "non_convex":
            offenders.append(i)
    return not offenders, offenders


def off_e(pt: ExtPoint) -> bool:
    """Region predicate for the complement of E."""
    return not in_e(pt, SNAP_TOL)


def enclosed_area(p: GeodesicPolygon) -> float:
    """Area of the left-hand region of a simple closed polygon (Gauss-Bonnet)."""
    if not p.closed or not p.edges:
        raise ValueError("area needs a closed polygon with edges")
    return TWO_PI - math.fsum(p.turn(i) for i in range(p.n_vertices))


# --- cutting against [0, +inf] ----------------------------------------------


@dataclass(frozen=True)
class CutArc:
    on_ray: bool
    length: float
    start: Optional[ExtPoint]
    end: Optional[ExtPoint]


@dataclass(frozen=True)
class RayCut:
    arcs: tuple[CutArc, ...]
    contacts: tuple[ExtPoint, ...]

    @property
    def on_ray_length(self) -> float:
        return math.fsum(a.length for a in self.arcs if a.on_ray)

    @property
    def off_ray_length(self) -> float:
        return math.fsum(a.length for a in self.arcs if not a.on_ray)


def _on_ray(v: np.ndarray) -> bool:
    return abs(v[1]) <= RAY_TOL and v[0] >= -RAY_TOL


def _edge_ray_events(e: GeodesicArc) -> tuple[bool, list[float]]:
    """(edge lies in the real great circle, interior parameters where it meets the ray)."""
    a = e.start.vec
    u = cross(e.normal, a)
    amp = math.hypot(a[1], u[1])
    if amp < RAY_TOL:
        return True, []
    if amp < TANGENCY_BAND:
        raise NonTransversal(f"edge from {e.start.value!r} grazes the real axis")
    L = e.length
    phi0 = math.atan2(-a[1], u[1]) % math.pi
    hits = []
    for phi in (phi0, phi0 + math.pi, phi0 + TWO_PI):
        if RAY_TOL < phi < L - RAY_TOL:
            pt = math.cos(phi) * a + math.sin(phi) * u
            if pt[0] >= -RAY_TOL:
                hits.append(phi)
    return False, hits


def cut_against_ray(p: GeodesicPolygon) -> RayCut:
    """Split the curve into maximal arcs on [0, +inf] and arcs off it.

    Off-ray arcs are separated at every contact with the ray; consecutive
    on-ray pieces are merged. ``contacts`` lists the junction points in order.
    """
    if not p.edges:
        return RayCut((), ())
    pieces = []  # (on_ray, length, start_vec, end_vec, event_at_end)
    for i, e in enumerate(p.edges):
        in_plane, hits = _edge_ray_events(e)
        cuts = [0.0] + hits + [e.length]
        for k in range(len(cuts) - 1):
            lo, hi = cuts[k], cuts[k + 1]
            mid = e.position(0.5 * (lo + hi))
            on = in_plane and mid[0] >= 0.0
            last = k == len(cuts) - 2
            end_vec = e.position(hi)
            event = (not last) or _on_ray(p.vertices[(i + 1) % p.n_vertices].vec)
            pieces.append([on, hi - lo, e.position(lo), end_vec, event])

    def boundary(prev, cur) -> bool:
        return prev[4] and not (prev[0] and cur[0])

    groups = [[pieces[0]]]
    for prev, cur in zip(pieces, pieces[1:]):
        if boundary(prev, cur):
            groups.append([cur])
        else:
            groups[-1].append(cur)
    wrap_cut = p.closed and boundary(pieces[-1], pieces[0])
    if p.closed and not wrap_cut:
        if len(groups) == 1:
            length = math.fsum(q[1] for q in pieces)
            return RayCut((CutArc(pieces[0][0], length, None, None),), ())
        groups[0] = groups.pop() + groups[0]

    arcs = []
    for g in groups:
        arcs.append(
            CutArc(
                g[0][0],
                math.fsum(q[1] for q in g),
                ExtPoint.from_vector(g[0][2]),
                ExtPoint.from_vector(g[-1][3]),
            )
        )
    contacts = [a.start for a in arcs] if p.closed else [a.start for a in arcs[1:]]
    return RayCut(tuple(arcs), tuple(contacts))


# --- conversion and I/O ----------------------------------------------------


def curve_to_polygon(curve: ParamCurve, max_angle: float = 1e-3, closed: bool = True) -> GeodesicPolygon:
    """Inscribed geodesic polygon with consecutive vertices at most ``max_angle`` apart."""
    t = np.unique(np.concatenate([np.linspace(0.0, 1.0, 257), np.asarray(curve.breakpoints, dtype=float)]))
    pts = curve.position(t)
    for _ in range(60):
        gaps = np.arctan2(
            np.linalg.norm(np.cross(pts[:-1], pts[1:]), axis=1),
            np.einsum("ij,ij->i", pts[:-1], pts[1:]),
        )
        wide = gaps > max_angle
        if not wide.any():
            break
        mids = 0.5 * (t[:-1][wide] + t[1:][wide])
        t = np.sort(np.concatenate([t, mids]))
        pts = curve.position(t)
    else:
        raise DegenerateCurve("curve could not be resolved to the requested chord angle")
    if closed:
        pts = pts[:-1]
    keep = [0]
    for k in range(1, len(pts)):
        if _angle(pts[keep[-1]], pts[k]) > SNAP_TOL:
            keep.append(k)
    return GeodesicPolygon(tuple(ExtPoint.from_vector(v) for v in pts[keep]), closed)


def _vertex_to_json(p: ExtPoint):
    if p.is_infinity:
        return "inf"
    return {"re": p.value.real, "im": p.value.imag}


def _vertex_from_json(obj) -> ExtPoint:
    if obj == "inf":
        return ExtPoint.from_complex(INF)
    if isinstance(obj, Mapping) and set(obj) == {"re", "im"}:
        return ExtPoint.from_complex(complex(float(obj["re"]), float(obj["im"])))
    raise ValueError(f"bad vertex {obj!r}; expected {{'re': x, 'im': y}} or 'inf'")


def polygon_to_json(p: GeodesicPolygon) -> dict:
    out = {"vertices": [_vertex_to_json(v) for v in p.vertices], "closed": p.closed}
    long_edges = {
        str(i): [float(x) for x in e.normal]
        for i, e in enumerate(p.edges)
        if e.length >= math.pi - LONG_EDGE_TOL
    }
    if long_edges:
        out["witnesses"] = long_edges
    return out


def polygon_from_json(obj) -> GeodesicPolygon:
    if isinstance(obj, str):
        obj = json.loads(obj)
    if isinstance(obj, list):
        obj = {"vertices": obj}
    verts = []
    for v in map(_vertex_from_json, obj["vertices"]):
        if not verts or v != verts[-1]:
            verts.append(v)
    if len(verts) > 1 and obj.get("closed", True) and verts[0] == verts[-1]:
        verts.pop()
    witnesses = {int(k): np.asarray(v, dtype=float) for k, v in obj.get("witnesses", {}).items()}
    return GeodesicPolygon(tuple(verts), bool(obj.get("closed", True)), witnesses)
