import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from arearatio.polycurve import (
    AntipodalNeighbors,
    DegenerateCurve,
    GeodesicPolygon,
    NonTransversal,
    curve_to_polygon,
    cut_against_ray,
    enclosed_area,
    is_convex_at,
    is_locally_convex_in,
    natural_partition,
    normalize,
    off_e,
    polygon_from_json,
    polygon_to_json,
)
from arearatio.quadrature import ParamCurve
from arearatio.sphere import INF, AntipodalPair, ExtPoint, chordal_distance, spherical_distance


def values(p):
    return [v.value for v in p.vertices]


def same_points(got, expected):
    return len(got) == len(expected) and all(chordal_distance(a, b) < 1e-12 for a, b in zip(got, expected))


def lhuilier(a, b, c):
    """Spherical excess of the triangle with side lengths a, b, c."""
    s = (a + b + c) / 2
    t = math.tan(s / 2) * math.tan((s - a) / 2) * math.tan((s - b) / 2) * math.tan((s - c) / 2)
    return 4 * math.atan(math.sqrt(max(t, 0.0)))


def regular(n, r, phase=0.0):
    return [r * np.exp(1j * (phase + 2 * math.pi * k / n)) for k in range(n)]


# --- construction ----------------------------------------------------------


def test_constructor_errors():
    with pytest.raises(DegenerateCurve):
        GeodesicPolygon(())
    with pytest.raises(DegenerateCurve):
        GeodesicPolygon((0.5, 0.5, 2j))
    with pytest.raises(AntipodalPair):
        GeodesicPolygon((0, INF, 1))


def test_single_vertex_normalizes_to_error():
    with pytest.raises(DegenerateCurve):
        normalize(GeodesicPolygon((0.3,), closed=False))
    with pytest.raises(DegenerateCurve):
        normalize(GeodesicPolygon((0.3, 0.3 + 1e-14), closed=False))


# --- normalization ---------------------------------------------------------


def test_e_free_triangle_unchanged():
    tri = GeodesicPolygon((2 + 1j, -2 + 1j, 3j))
    assert same_points(values(normalize(tri)), values(tri))


def test_triangle_through_infinity_gets_vertex():
    # the shortest path from -2 to 2 runs through inf, so inf becomes a vertex
    p = normalize(GeodesicPolygon((2, 2j, -2)))
    assert same_points(values(p), [2, 2j, -2, INF])


def test_edge_through_zero_and_one():
    p = GeodesicPolygon((-1, 2), closed=False, witnesses={0: np.array([0.0, -1.0, 0.0])})
    q = normalize(p)
    assert same_points(values(q), [-1, 0, 1, 2])
    assert q.length == pytest.approx(p.length, abs=1e-12)
    assert p.length == pytest.approx(math.pi / 2 + 2 * math.atan(2), abs=1e-12)


def test_collinear_edges_merge():
    q = normalize(GeodesicPolygon((2, 3, 4), closed=False))
    assert same_points(values(q), [2, 4])


def test_collinear_through_e_point_kept():
    q = normalize(GeodesicPolygon((0.5, 1, 2), closed=False))
    assert same_points(values(q), [0.5, 1, 2])


def test_near_e_vertex_snaps():
    q = normalize(GeodesicPolygon((1 + 1e-14, 2j, -0.5 + 0.5j)))
    assert q.vertices[0].value == 1


def test_zero_length_edge_removed():
    q = normalize(GeodesicPolygon((0.5j, 0.5j + 1e-15, 2, -2 + 1j)))
    assert q.n_vertices == 3


def test_backtracking_rejected():
    with pytest.raises(DegenerateCurve):
        normalize(GeodesicPolygon((2, 3, 2.5), closed=False))


def test_normalize_idempotent():
    rng = np.random.default_rng(0)
    for _ in range(30):
        z = rng.normal(size=6) + 1j * rng.normal(size=6)
        p = normalize(GeodesicPolygon(tuple(z)))
        q = normalize(p)
        assert same_points(values(p), values(q))


# --- natural partition -------------------------------------------------------


def test_great_circle_through_zero_and_one():
    p = normalize(GeodesicPolygon((0, 1, INF, -1), witnesses={}))
    part = natural_partition(p)
    assert same_points([p.vertices[i].value for i in part.natural_vertices], [0, 1, INF])
    assert len(part.edges) == 3
    # the edge from inf continues through -1 and stops at 0
    last = part.edges[-1]
    assert p.vertices[last.start].is_infinity and p.vertices[last.end].value == 0
    assert last.length == pytest.approx(math.pi, abs=1e-12)


def test_great_circle_avoiding_e():
    # 2, i, -1/2, -i lie on the circle |z - 3/4| = 5/4, a great circle missing E
    p = normalize(GeodesicPolygon((2, 1j, -0.5, -1j)))
    part = natural_partition(p)
    assert part.natural_vertices == []
    assert len(part.edges) == 1
    assert part.edges[0].start is None and part.edges[0].end is None
    assert part.edges[0].length == pytest.approx(2 * math.pi, abs=1e-10)


def test_generic_triangle_natural_vertices():
    tri = normalize(GeodesicPolygon((2 + 1j, -2 + 1j, 3j)))
    part = natural_partition(tri)
    assert part.natural_vertices == [0, 1, 2]
    assert len(part.edges) == 3


def test_open_path_endpoints_are_natural():
    path = normalize(GeodesicPolygon((2j, 3j, 0.5 + 3j), closed=False))
    part = natural_partition(path)
    assert part.natural == (True, True, True)
    assert len(part.edges) == 2


def test_subdivided_edge_groups_into_one_natural_edge():
    p = GeodesicPolygon((2 + 1j, -2 + 1j, 3j))
    mid = p.edges[0].point_at(p.edges[0].length / 2)
    q = GeodesicPolygon((2 + 1j, mid, -2 + 1j, 3j))
    part = natural_partition(q)
    assert part.natural_vertices == [0, 2, 3]
    assert part.edges[0].edge_indices == (0, 1)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(st.floats(-3, 3), st.floats(-3, 3)), min_size=3, max_size=9), st.booleans())
def test_partition_invariants(coords, closed):
    z = [complex(x, y) for x, y in coords]
    try:
        p = normalize(GeodesicPolygon(tuple(z), closed=closed))
    except (DegenerateCurve, AntipodalPair):
        return
    a, b = natural_partition(p), natural_partition(p)
    assert a.natural == b.natural
    assert math.fsum(e.length for e in a.edges) == pytest.approx(p.length, abs=1e-10)
    for e in a.edges:
        inner = [(e.start + k) % p.n_vertices for k in range(1, len(e.edge_indices))] if e.start is not None else []
        assert not any(a.natural[i] for i in inner)


# --- convexity -------------------------------------------------------------


def test_equilateral_triangle_convexity():
    tri = GeodesicPolygon(tuple(regular(3, 0.5)))
    assert all(is_convex_at(tri, i) == "strictly_convex" for i in range(3))
    rev = tri.reversed()
    assert all(is_convex_at(rev, i) == "non_convex" for i in range(3))


def test_subdivided_vertex_is_straight():
    p = GeodesicPolygon(tuple(regular(3, 0.5)))
    mid = p.edges[1].point_at(0.3 * p.edges[1].length)
    q = GeodesicPolygon((p.vertices[0], p.vertices[1], mid, p.vertices[2]))
    assert is_convex_at(q, 2) == "straight"


def test_convexity_antisymmetry():
    rng = np.random.default_rng(3)
    flip = {"strictly_convex": "non_convex", "non_convex": "strictly_convex", "straight": "straight"}
    for _ in range(50):
        z = 0.3 * (rng.normal(size=5) + 1j * rng.normal(size=5))
        p = GeodesicPolygon(tuple(z))
        r = p.reversed()
        n = p.n_vertices
        for i in range(n):
            j = (n - i) % n  # vertex i of p is vertex j of the reversal
            assert is_convex_at(r, j) == flip[is_convex_at(p, i)]


def test_antipodal_neighbors():
    circle = normalize(GeodesicPolygon((0, 1, INF, -1)))
    with pytest.raises(AntipodalNeighbors):
        is_convex_at(circle, 0)


DENTED = (-0.5 - 0.5j, 0.5 - 0.5j, 0.5 + 0.5j, 0.1 + 0.0j, -0.5 + 0.5j)


def test_locally_convex_examples():
    square = GeodesicPolygon(tuple(regular(4, 0.7, 0.3)))
    assert is_locally_convex_in(square, lambda _: True) == (True, [])
    dented = GeodesicPolygon(DENTED)
    assert is_locally_convex_in(dented, off_e) == (False, [3])
    at_one = GeodesicPolygon(tuple(z + 0.9 for z in DENTED))
    assert at_one.vertices[3].value == pytest.approx(1.0)
    at_one = normalize(at_one)
    assert is_convex_at(at_one, 3) == "non_convex"
    assert is_locally_convex_in(at_one, off_e) == (True, [])


def test_convex_polygons_have_short_edges():
    rng = np.random.default_rng(6)
    checked = 0
    for _ in range(200):
        r = math.tan(rng.uniform(0.1, 1.55) / 2)
        phi = np.sort(rng.uniform(0, 2 * math.pi, int(rng.integers(3, 9))))
        try:
            p = GeodesicPolygon(tuple(r * np.exp(1j * phi)))
        except AntipodalPair:
            continue
        if max(p.edge_lengths) >= math.pi - 1e-9:
            continue
        if all(is_convex_at(p, i) == "strictly_convex" for i in range(p.n_vertices)):
            checked += 1
            assert max(p.edge_lengths) < math.pi
    assert checked > 50


# --- area ------------------------------------------------------------------


def test_triangle_area_against_lhuilier():
    rng = np.random.default_rng(1)
    for _ in range(100):
        z = rng.normal(size=3) + 1j * rng.normal(size=3)
        p = GeodesicPolygon(tuple(z))
        a, b, c = p.edge_lengths
        excess = lhuilier(a, b, c)
        area = enclosed_area(p)
        assert min(area, 4 * math.pi - area) == pytest.approx(excess, abs=1e-9)


def test_area_of_reversal_is_complement():
    p = GeodesicPolygon(tuple(regular(5, 0.8)))
    assert enclosed_area(p) + enclosed_area(p.reversed()) == pytest.approx(4 * math.pi, abs=1e-12)


def test_area_of_circle_polygon_converges():
    r = 0.5
    circle = ParamCurve.from_complex(lambda t: r * np.exp(2j * math.pi * t), lambda t: 2j * math.pi * r * np.exp(2j * math.pi * t))
    p = curve_to_polygon(circle, max_angle=1e-3)
    assert enclosed_area(p) == pytest.approx(4 * math.pi * r * r / (1 + r * r), abs=1e-6)
    assert p.length == pytest.approx(4 * math.pi * r / (1 + r * r), abs=1e-6)


# --- cutting against the ray ------------------------------------------------


def test_cut_upper_triangle():
    cut = cut_against_ray(GeodesicPolygon((2 + 1j, -2 + 1j, 1j)))
    assert len(cut.arcs) == 1 and not cut.arcs[0].on_ray
    assert cut.contacts == ()
    assert cut.off_ray_length == pytest.approx(GeodesicPolygon((2 + 1j, -2 + 1j, 1j)).length, abs=1e-12)


def test_cut_circle_around_one():
    circle = ParamCurve.from_complex(lambda t: 1 + 0.5 * np.exp(2j * math.pi * t), lambda t: 1j * math.pi * np.exp(2j * math.pi * t))
    p = curve_to_polygon(circle, max_angle=1e-2)
    cut = cut_against_ray(p)
    assert len(cut.arcs) == 2 and not any(a.on_ray for a in cut.arcs)
    assert same_points(sorted((c.value for c in cut.contacts), key=lambda w: w.real), [0.5, 1.5])
    assert math.fsum(a.length for a in cut.arcs) == pytest.approx(p.length, abs=1e-10)


def test_cut_circle_crossing_between_vertices():
    # vertices avoid the real axis, so contacts come from edge interiors
    p = GeodesicPolygon(tuple(1 + 0.5 * np.exp(1j * (0.1 + 2 * math.pi * np.arange(7) / 7))))
    cut = cut_against_ray(p)
    assert len(cut.arcs) == 2 and len(cut.contacts) == 2
    assert all(abs(c.value.imag) < 1e-12 and c.value.real > 0 for c in cut.contacts)
    assert cut.off_ray_length == pytest.approx(p.length, abs=1e-10)


def test_cut_with_on_ray_arc():
    # triangle 0 -> 2 -> 1+i: the edge 0 -> 2 lies on the ray
    p = GeodesicPolygon((0, 2, 1 + 1j))
    cut = cut_against_ray(normalize(p))
    on = [a for a in cut.arcs if a.on_ray]
    assert len(on) == 1
    assert on[0].length == pytest.approx(2 * math.atan(2), abs=1e-12)
    assert cut.on_ray_length + cut.off_ray_length == pytest.approx(p.length, abs=1e-10)


def test_cut_negative_axis_is_not_ray():
    p = GeodesicPolygon((-2, -0.5, -1 + 1j))
    cut = cut_against_ray(p)
    assert cut.on_ray_length == 0.0 and len(cut.arcs) == 1


def test_cut_tangency_rejected():
    with pytest.raises(NonTransversal):
        cut_against_ray(GeodesicPolygon((2 + 1e-10j, 3 + 1e-10j, 2.5 + 1j)))


# --- JSON ------------------------------------------------------------------


def test_json_round_trip():
    p = normalize(GeodesicPolygon((0, 1, INF, -1)))
    blob = json.dumps(polygon_to_json(p))
    q = polygon_from_json(blob)
    assert same_points(values(p), values(q))
    np.testing.assert_allclose(q.edge_lengths, p.edge_lengths, atol=1e-12)
    assert "inf" in json.loads(blob)["vertices"]


def test_json_plain_list_and_duplicates():
    q = polygon_from_json([{"re": 2, "im": 1}, {"re": 2, "im": 1}, {"re": -2, "im": 1}, {"re": 0, "im": 3}, {"re": 2, "im": 1}])
    assert q.n_vertices == 3 and q.closed


def test_json_bad_vertex():
    with pytest.raises(ValueError):
        polygon_from_json([{"x": 1}])


def test_sample_points_spacing():
    p = GeodesicPolygon((2 + 1j, -2 + 1j, 3j))
    S = p.sample_points(0.01)
    gaps = np.arccos(np.clip(np.einsum("ij,ij->i", S, np.roll(S, -1, axis=0)), -1, 1))
    assert gaps.max() <= 0.01 + 1e-12
    assert spherical_distance(ExtPoint.from_vector(S[0]), 2 + 1j) < 1e-12
