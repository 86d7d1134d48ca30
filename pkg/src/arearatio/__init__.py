"""Spherical area and length of maps into the Riemann sphere, and the sharp ratio h0."""

from .lens import H0Result, LensDomain, find_h0, h, lens_from_length, zeta0, zeta1
from .quadrature import AnalyticMap, ParamCurve, QuadratureResult, curve_length, map_area, map_boundary_length
from .sphere import INF, ExtPoint, GeodesicArc, Rotation, SphericalCircle, shortest_path, spherical_distance

__all__ = [
    "INF",
    "AnalyticMap",
    "ExtPoint",
    "GeodesicArc",
    "H0Result",
    "LensDomain",
    "ParamCurve",
    "QuadratureResult",
    "Rotation",
    "SphericalCircle",
    "curve_length",
    "find_h0",
    "h",
    "lens_from_length",
    "map_area",
    "map_boundary_length",
    "shortest_path",
    "spherical_distance",
    "zeta0",
    "zeta1",
]
