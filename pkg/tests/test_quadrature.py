import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from arearatio.isoperimetric import cap_area_bound
from arearatio.quadrature import (
    GAUSS_WEIGHTS,
    KRONROD_WEIGHTS,
    NODES,
    AnalyticMap,
    NonFiniteDerivative,
    ParamCurve,
    ToleranceNotMet,
    curve_length,
    integrate,
    integrate_2d,
    map_area,
    map_boundary_length,
    spherical_speed,
)
from arearatio.sphere import INF, ONE, ZERO, Rotation, shortest_path, spherical_distance

TOL = 1e-8


def scaled(r):
    return AnalyticMap(lambda z: r * z, lambda z: r + 0 * z, f"{r}z")


def cap_length(r):
    return 4 * math.pi * r / (1 + r * r)


def cap_area(r):
    return 4 * math.pi * r * r / (1 + r * r)


# --- the rule itself ------------------------------------------------------


def test_rule_exactness_degrees():
    # K15 integrates x^k exactly through degree 22, G7 through degree 13
    for k in range(23):
        exact = 0.0 if k % 2 else 2.0 / (k + 1)
        assert float(KRONROD_WEIGHTS @ NODES**k) == pytest.approx(exact, abs=1e-14)
        if k <= 13:
            assert float(GAUSS_WEIGHTS @ NODES**k) == pytest.approx(exact, abs=1e-14)
    assert np.count_nonzero(GAUSS_WEIGHTS) == 7


def test_integrate_against_closed_forms():
    assert integrate(np.sin, 0, math.pi).value == pytest.approx(2.0, abs=1e-12)
    assert integrate(lambda x: np.exp(-x * x), -5, 5).value == pytest.approx(math.sqrt(math.pi), abs=1e-10)
    r = integrate(lambda x: 1 / np.sqrt(x), 0, 1, 1e-8)
    assert abs(r.value - 2.0) < 1e-7


def test_integrate_respects_breakpoints():
    f = lambda x: np.abs(x - 0.3)
    r = integrate(f, 0, 1, 1e-12, breakpoints=[0.3])
    assert r.value == pytest.approx(0.5 * 0.3**2 + 0.5 * 0.7**2, abs=1e-14)
    assert r.evaluations == 30


def test_integrate_2d_polynomial_and_gaussian():
    r = integrate_2d(lambda x, y: x * x * y**3 + 1, (0, 2), (-1, 1))
    assert r.value == pytest.approx(4.0, abs=1e-12)
    g = integrate_2d(lambda x, y: np.exp(-x * x - 3 * y * y), (-6, 6), (-6, 6), 1e-10)
    assert g.value == pytest.approx(math.pi / math.sqrt(3), abs=1e-9)


def test_budget_exhaustion():
    with pytest.raises(ToleranceNotMet) as info:
        integrate(lambda x: np.sin(1 / x), 1e-6, 1, 1e-12, budget=2_000)
    assert info.value.evaluations >= 2_000


def test_nonfinite_integrand():
    bad = AnalyticMap(lambda z: z, lambda z: np.full(np.shape(z), np.nan + 0j), "nan")
    with pytest.raises(NonFiniteDerivative):
        map_boundary_length(bad)


def test_tolerance_validation():
    with pytest.raises(ValueError):
        integrate(np.sin, 0, 1, tol=0.0)


# --- curves ---------------------------------------------------------------


def test_curve_length_examples():
    circle = ParamCurve.from_complex(
        lambda t: np.exp(2j * math.pi * t), lambda t: 2j * math.pi * np.exp(2j * math.pi * t)
    )
    assert curve_length(circle, TOL).value == pytest.approx(2 * math.pi, abs=TOL)
    seg = ParamCurve.from_complex(lambda t: t + 0j, lambda t: 1 + 0j * t)
    assert curve_length(seg, TOL).value == pytest.approx(math.pi / 2, abs=TOL)
    half = ParamCurve.concat([ParamCurve.geodesic(shortest_path(ZERO, ONE)),
                              ParamCurve.geodesic(shortest_path(ONE, INF))])
    assert curve_length(half, TOL).value == pytest.approx(math.pi, abs=TOL)
    assert spherical_distance(half.point(1.0), INF) < 1e-12


def test_curve_through_infinity_in_chart():
    # the real line traced through inf: t -> tan(pi (t - 1/2)), reciprocal chart near the ends
    line = ParamCurve.from_complex(
        lambda t: np.tan(math.pi * (t - 0.5)) + 0j,
        lambda t: math.pi / np.cos(math.pi * (t - 0.5)) ** 2 + 0j,
    )
    assert curve_length(line, TOL).value == pytest.approx(2 * math.pi, abs=1e-7)


def test_curve_transforms_keep_length():
    arc = ParamCurve.from_complex(lambda t: 0.5 * np.exp(1j * t), lambda t: 0.5j * np.exp(1j * t))
    base = curve_length(arc).value
    flip = np.diag([1.0, -1.0, -1.0])
    assert curve_length(arc.transformed(flip)).value == pytest.approx(base, abs=1e-12)
    assert curve_length(arc.reversed()).value == pytest.approx(base, abs=1e-12)
    np.testing.assert_allclose(arc.reversed().position(np.array([0.0]))[0], arc.position(np.array([1.0]))[0])


# --- maps -----------------------------------------------------------------


def test_map_examples():
    ident = scaled(1.0)
    assert map_boundary_length(ident, TOL).value == pytest.approx(2 * math.pi, abs=TOL)
    assert map_area(ident, TOL).value == pytest.approx(2 * math.pi, abs=TOL)
    sq = AnalyticMap(lambda z: z * z, lambda z: 2 * z, "z^2")
    assert map_boundary_length(sq, TOL).value == pytest.approx(4 * math.pi, abs=TOL)
    assert map_area(sq, TOL).value == pytest.approx(4 * math.pi, abs=TOL)
    half = scaled(0.5)
    assert map_boundary_length(half, TOL).value == pytest.approx(8 * math.pi / 5, abs=TOL)
    assert map_area(half, TOL).value == pytest.approx(4 * math.pi / 5, abs=TOL)


@pytest.mark.parametrize("r", [0.1 * k for k in range(1, 10)])
def test_cap_ground_truth(r):
    f = scaled(r)
    L = map_boundary_length(f, TOL)
    A = map_area(f, TOL)
    assert abs(L.value - cap_length(r)) < TOL
    assert abs(A.value - cap_area(r)) < TOL
    assert L.error <= TOL and A.error <= TOL
    # equality case of the cap bound
    assert abs(A.value - cap_area_bound(L.value)) < 10 * TOL


def test_disk_off_center_ground_truth():
    # image of z -> c + r z is the cap over arctan(c+r) - arctan(c-r) of latitude
    for c, r in ((3.0, 1.0), (0.0, 2.0), (1.5, 0.25)):
        f = AnalyticMap(lambda z, c=c, r=r: c + r * z, lambda z, r=r: r + 0 * z)
        psi = math.atan(c + r) - math.atan(c - r)
        assert map_area(f).value == pytest.approx(2 * math.pi * (1 - math.cos(psi)), abs=TOL)
        assert map_boundary_length(f).value == pytest.approx(2 * math.pi * math.sin(psi), abs=TOL)


def test_chart_consistency_on_unit_circle():
    rng = np.random.default_rng(5)
    w = np.exp(1j * rng.uniform(0, 2 * math.pi, 200)) * (1 + rng.uniform(-1e-9, 1e-9, 200))
    dw = rng.normal(size=200) + 1j * rng.normal(size=200)
    near = 2 * np.abs(dw) / (1 + np.abs(w) ** 2)
    g, dg = 1 / w, -dw / w**2
    far = 2 * np.abs(dg) / (1 + np.abs(g) ** 2)
    np.testing.assert_allclose(near, far, rtol=1e-10)
    np.testing.assert_allclose(spherical_speed(w, dw), near, rtol=1e-10)


def test_reciprocal_chart_stable_for_large_values():
    big = AnalyticMap(lambda z: 1e8 * (z + 3), lambda z: 1e8 + 0 * z, "big")
    # image is a tiny cap around inf; compare with the same cap around 0 via 1/w
    small = AnalyticMap(lambda z: 1e-8 / (z + 3), lambda z: -1e-8 / (z + 3) ** 2, "small")
    assert map_area(big).value == pytest.approx(map_area(small).value, rel=1e-9)
    assert map_boundary_length(big).value == pytest.approx(map_boundary_length(small).value, rel=1e-9)


MAPS = [
    AnalyticMap(lambda z: z + 3, lambda z: 1 + 0 * z, "z+3"),
    AnalyticMap(lambda z: 0.5 * np.exp(z) + 2, lambda z: 0.5 * np.exp(z), "exp"),
    AnalyticMap(lambda z: (z + 3) ** 2, lambda z: 2 * (z + 3), "sq"),
    AnalyticMap(lambda z: z * z * z - 0.5 * z, lambda z: 3 * z * z - 0.5, "cubic"),
]


@pytest.mark.parametrize("f", MAPS, ids=lambda f: f.label)
def test_rotation_invariance(f):
    rng = np.random.default_rng(2)
    A, L = map_area(f, TOL).value, map_boundary_length(f, TOL).value
    for _ in range(3):
        g = f.rotated(Rotation.random(rng))
        assert abs(map_area(g, TOL).value - A) < 10 * TOL
        assert abs(map_boundary_length(g, TOL).value - L) < 10 * TOL


@pytest.mark.parametrize("f", MAPS, ids=lambda f: f.label)
def test_area_additivity(f):
    whole = map_area(f, TOL).value
    parts = map_area(f, TOL, (0.0, 0.5)).value + map_area(f, TOL, (0.5, 1.0)).value
    assert abs(whole - parts) < 10 * TOL


def test_finite_difference_derivative():
    exact = MAPS[1]
    approx = AnalyticMap(exact.value, label="exp-fd")
    assert not approx.exact_derivative
    z = np.exp(1j * np.linspace(0, 2 * math.pi, 50))
    np.testing.assert_allclose(approx.derivative(z), exact.derivative(z), rtol=1e-9)
    assert map_area(approx).value == pytest.approx(map_area(exact).value, rel=1e-8)


@settings(max_examples=25, deadline=None)
@given(st.floats(0.05, 0.95), st.floats(-3, 3), st.floats(-3, 3))
def test_isoperimetric_equality_on_caps(r, cx, cy):
    c = complex(cx, cy)
    f = AnalyticMap(lambda z: c + r * z, lambda z: r + 0 * z)
    A, L = map_area(f, TOL).value, map_boundary_length(f, TOL).value
    small = min(A, 4 * math.pi - A)
    assert abs(small - cap_area_bound(L)) < 10 * TOL
