"""Numerical checks of area-length inequalities on concrete maps and ledgers.

Each check measures A (spherical area of the image of the disk, with
multiplicity) and L (spherical length of the image of the circle) by
quadrature, compares them against a bound, and returns an InequalityReport.
Quadrature error is propagated: a check "holds" only when its slack clears
the combined error, is "violated" when the slack is below minus that error,
and is "inconclusive" in between.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from numpy.polynomial import Polynomial
from scipy.stats import qmc

from .extremal import optimum
from .isoperimetric import cap_area_bound
from .lens import SQRT2_PI, zeta0_inverse, zeta1
from .quadrature import DEFAULT_TOL, AnalyticMap, map_area, map_boundary_length

TWO_PI = 2.0 * math.pi
FOUR_PI = 4.0 * math.pi
OMIT_NEAR = 1e-9
OMIT_FAR = 1e9
SOBOL_LOG2 = 17
WINDING_SAMPLES = 1 << 14


class OmittedValueViolation(ValueError):
    """The map takes (or nearly takes) a value in {0, 1, inf} inside the disk."""


class PreconditionFail(ValueError):
    """A measured quantity falls outside the hypotheses of the check."""


@dataclass(frozen=True)
class InequalityReport:
    map_label: str
    A: float
    L: float
    bound_name: str
    bound_value: float
    slack: float
    holds: bool
    status: str
    tolerances: dict
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_dict(cls, d: dict) -> "InequalityReport":
        return cls(**d)


def classify(slack: float, err: float) -> tuple[bool, str]:
    """(holds, status) for a slack measured with absolute error ``err``."""
    if slack > err:
        status = "holds"
    elif slack >= -err:
        status = "inconclusive"
    else:
        status = "violated"
    return slack > -err, status


def h0_value() -> float:
    return optimum().h0


# --- omitted values ---------------------------------------------------------


def _interior_samples() -> np.ndarray:
    uv = qmc.Sobol(d=2, scramble=False).random_base2(SOBOL_LOG2)
    return np.sqrt(uv[:, 0]) * np.exp(2j * math.pi * uv[:, 1])


def _winding(w: np.ndarray) -> float:
    steps = np.angle(np.roll(w, -1) / w)
    return float(steps.sum() / TWO_PI)


def omitted_value_margin(f: AnalyticMap) -> dict:
    """Scan for values of f near 0, 1 or inf in the open disk.

    Samples 2^17 quasi-random interior points. For a = 0 and a = 1 the winding
    number of f(circle) - a is also computed when the boundary image keeps a
    clear distance from a; a nonzero count means f takes the value a inside.
    Raises OmittedValueViolation on a hit.
    """
    w = f(_interior_samples())
    if not np.all(np.isfinite(w)):
        raise OmittedValueViolation(f"{f.label} is not finite at an interior sample")
    aw = np.abs(w)
    margins = {
        "min_abs_f": float(aw.min()),
        "min_abs_f_minus_1": float(np.abs(w - 1.0).min()),
        "max_abs_f": float(aw.max()),
    }
    if margins["min_abs_f"] < OMIT_NEAR:
        raise OmittedValueViolation(f"{f.label} comes within {OMIT_NEAR:g} of 0 inside the disk")
    if margins["min_abs_f_minus_1"] < OMIT_NEAR:
        raise OmittedValueViolation(f"{f.label} comes within {OMIT_NEAR:g} of 1 inside the disk")
    if margins["max_abs_f"] > OMIT_FAR:
        raise OmittedValueViolation(f"{f.label} exceeds {OMIT_FAR:g} in modulus inside the disk")
    boundary = f(np.exp(2j * math.pi * np.arange(WINDING_SAMPLES) / WINDING_SAMPLES))
    for a, key in ((0.0, "winding_about_0"), (1.0, "winding_about_1")):
        shifted = boundary - a
        if float(np.abs(shifted).min()) < 1e-6:
            margins[key] = None
            continue
        if np.abs(np.angle(np.roll(shifted, -1) / shifted)).max() > 0.5:
            margins[key] = None
            continue
        count = round(_winding(shifted))
        margins[key] = count
        if count != 0:
            raise OmittedValueViolation(f"{f.label} takes the value {a:g} {count} time(s) inside the disk")
    return margins


def _measure(f: AnalyticMap, tol: float):
    A = map_area(f, tol)
    L = map_boundary_length(f, tol)
    return A, L


# --- checks ----------------------------------------------------------------


def check_main(f: AnalyticMap, tol: float = DEFAULT_TOL) -> InequalityReport:
    """A < h0 L for a map omitting 0, 1 and inf on the disk."""
    margins = omitted_value_margin(f)
    A, L = _measure(f, tol)
    h0 = h0_value()
    bound = h0 * L.value
    slack = bound - A.value
    err = A.error + h0 * L.error
    holds, status = classify(slack, err)
    return InequalityReport(
        f.label, A.value, L.value, "h0*L", bound, slack, holds, status,
        {"tol": tol, "error_A": A.error, "error_L": L.error, "combined": err},
        {"h0": h0, "omitted_value_margins": margins, "exact_derivative": f.exact_derivative},
    )


def check_good(f: AnalyticMap, tol: float = DEFAULT_TOL) -> InequalityReport:
    """For L < 2 pi: A <= cap bound of L, and 4 pi + A < 4 L once L >= sqrt(2) pi."""
    margins = omitted_value_margin(f)
    A, L = _measure(f, tol)
    if L.value >= TWO_PI:
        raise PreconditionFail(f"measured L = {L.value:.12g} is not below 2 pi")
    bound = cap_area_bound(L.value)
    slope = bound / L.value if L.value > 0 else 0.0
    slack = bound - A.value
    err = A.error + slope * L.error
    name = "cap_bound"
    details = {"omitted_value_margins": margins, "cap_bound_slack": slack}
    if L.value >= SQRT2_PI:
        slack4 = 4.0 * L.value - FOUR_PI - A.value
        err4 = A.error + 4.0 * L.error
        details["four_L_slack"] = slack4
        if slack4 - err4 < slack - err:
            slack, err, name, bound = slack4, err4, "4L-4pi", 4.0 * L.value - FOUR_PI
    holds, status = classify(slack, err)
    return InequalityReport(
        f.label, A.value, L.value, name, bound, slack, holds, status,
        {"tol": tol, "error_A": A.error, "error_L": L.error, "combined": err}, details,
    )


def lens_area_bound(L: float) -> float:
    """4 arcsin(tau) - 2 tau zeta0(tau) with zeta0(tau) = L/2: the lens area for perimeter L."""
    half = min(max(L / 2.0, math.pi / 2), math.pi / math.sqrt(2.0))
    return 2.0 * zeta1(zeta0_inverse(half))


def segment_check(f: AnalyticMap, segment_tol: float = 1e-9, n: int = 2001) -> dict:
    """Confirm f carries [-1, 1] increasingly onto [0, 1]."""
    w = f(np.linspace(-1.0, 1.0, n).astype(complex))
    info = {
        "f_minus_1": abs(complex(w[0])),
        "f_plus_1_minus_1": abs(complex(w[-1]) - 1.0),
        "max_imag": float(np.abs(w.imag).max()),
    }
    if info["f_minus_1"] > segment_tol or info["f_plus_1_minus_1"] > segment_tol:
        raise PreconditionFail(f"{f.label} does not send -1, 1 to 0, 1 (tol {segment_tol:g})")
    if info["max_imag"] > segment_tol or np.any(np.diff(w.real) <= 0.0):
        raise PreconditionFail(f"{f.label} is not real and increasing on [-1, 1]")
    return info


def check_good2(f: AnalyticMap, tol: float = DEFAULT_TOL, segment_tol: float = 1e-9) -> InequalityReport:
    """4 pi + A <= h0 L for maps sending [-1, 1] onto [0, 1] with L < sqrt(2) pi.

    The lens-area form A <= 4 arcsin(tau) - 2 tau zeta0(tau) is reported in
    ``details``; it is sharp on lens maps, so there it is expected to sit at
    equality within quadrature error.
    """
    seg = segment_check(f, segment_tol)
    margins = omitted_value_margin(f)
    A, L = _measure(f, tol)
    if L.value >= SQRT2_PI:
        raise PreconditionFail(f"measured L = {L.value:.12g} is not below sqrt(2) pi")
    h0 = h0_value()
    bound = h0 * L.value
    slack = bound - FOUR_PI - A.value
    err = A.error + h0 * L.error
    holds, status = classify(slack, err)
    lens_bound = lens_area_bound(L.value)
    lens_err = A.error + 2.0 * L.error
    lens_holds, lens_status = classify(lens_bound - A.value, lens_err)
    return InequalityReport(
        f.label, A.value, L.value, "h0*L-4pi", bound - FOUR_PI, slack, holds, status,
        {"tol": tol, "error_A": A.error, "error_L": L.error, "combined": err},
        {
            "segment": seg,
            "omitted_value_margins": margins,
            "lens_area_bound": lens_bound,
            "lens_area_slack": lens_bound - A.value,
            "lens_area_status": lens_status,
        },
    )


def check_good2_data(A: float, L: float, label: str = "data", err: float = 0.0) -> InequalityReport:
    """The lens-area bound A <= 4 arcsin(tau) - 2 tau zeta0(tau) on supplied (A, L)."""
    if not math.pi - 1e-12 <= L < SQRT2_PI + 1e-12:
        raise PreconditionFail("L must lie in [pi, sqrt(2) pi)")
    bound = lens_area_bound(L)
    slack = bound - A
    holds, status = classify(slack, err)
    h0 = h0_value()
    return InequalityReport(
        label, A, L, "lens_area", bound, slack, holds, status, {"combined": err},
        {"h0_slack": h0 * L - FOUR_PI - A},
    )


@dataclass(frozen=True)
class Component:
    """Ledger entry: area, boundary length on the circle, and length lying on [0, +inf]."""

    area: float
    boundary_length: float
    ray_length: float = 0.0


def check_nofat_ledger(
    components: Sequence, fat: bool = False, label: str = "ledger"
) -> InequalityReport:
    """Arithmetic checks on per-component ledgers.

    Every component needs boundary length above its length on the ray. The
    total must satisfy A < 2 L, or A <= h0 L - 4 pi when ``fat`` is set.
    """
    comps = [c if isinstance(c, Component) else Component(*c) for c in components]
    if not comps:
        raise ValueError("no components")
    offenders = [i for i, c in enumerate(comps) if not c.boundary_length > c.ray_length]
    A = math.fsum(c.area for c in comps)
    L = math.fsum(c.boundary_length for c in comps)
    if fat:
        name, bound = "h0*L-4pi", h0_value() * L - FOUR_PI
        slack = bound - A
        holds = slack >= 0.0
    else:
        name, bound = "2L", 2.0 * L
        slack = bound - A
        holds = slack > 0.0
    holds = holds and not offenders
    status = "holds" if holds else "violated"
    return InequalityReport(
        label, A, L, name, bound, slack, holds, status, {"combined": 0.0},
        {
            "ray_offenders": offenders,
            "ray_margins": [c.boundary_length - c.ray_length for c in comps],
            "relative_slack": slack / bound if bound else float("nan"),
        },
    )


# --- built-in maps ---------------------------------------------------------


def lens_map(k: float, label: Optional[str] = None) -> AnalyticMap:
    """(1+z)^k / ((1+z)^k + (1-z)^k) for 0 < k <= 1.

    Sends [-1, 1] onto [0, 1] and the disk onto the lens with vertices 0, 1
    whose arcs meet the real axis at angle k pi / 2.

    The boundary speed blows up like |theta - pi|^(k-1). Points closer than
    about 1e-16 to the corner cannot be resolved in double precision, which
    loses roughly (1e-16)^k / k of length; keep k >= 0.6 for 1e-8 work.
    """
    if not 0.0 < k <= 1.0:
        raise ValueError("k must lie in (0, 1]")

    def value(z):
        u, v = (1 + z) ** k, (1 - z) ** k
        return u / (u + v)

    def derivative(z):
        u, v = (1 + z) ** k, (1 - z) ** k
        return 2 * k * (1 + z) ** (k - 1) * (1 - z) ** (k - 1) / (u + v) ** 2

    return AnalyticMap(value, derivative, label or f"lens(k={k:g})", (0.0, math.pi))


def polynomial_map(coeffs: Sequence, label: Optional[str] = None) -> AnalyticMap:
    """c0 + c1 z + c2 z^2 + ... with complex coefficients."""
    c = [complex(x) if not isinstance(x, dict) else complex(x["re"], x["im"]) for x in coeffs]
    if not c:
        raise ValueError("empty coefficient list")
    p = Polynomial(c)
    dp = p.deriv()
    return AnalyticMap(lambda z: p(z), lambda z: dp(z) + 0 * z, label or f"poly{tuple(c)}")


def _affine(a: complex, b: complex, label: str) -> AnalyticMap:
    return AnalyticMap(lambda z: a * z + b, lambda z: a + 0 * z, label)


REGISTRY: dict[str, Callable[[], AnalyticMap]] = {
    "shift3": lambda: _affine(1, 3, "shift3"),
    "halfexp": lambda: AnalyticMap(lambda z: 0.5 * np.exp(z) + 2, lambda z: 0.5 * np.exp(z), "halfexp"),
    "negexp3": lambda: AnalyticMap(lambda z: -np.exp(3 * z), lambda z: -3 * np.exp(3 * z), "negexp3"),
    "disk2i": lambda: _affine(0.5, 2j, "disk2i"),
    "sqshift": lambda: AnalyticMap(lambda z: (z + 3) ** 2, lambda z: 2 * (z + 3), "sqshift"),
    "lens60": lambda: lens_map(0.6, "lens60"),
    "lens80": lambda: lens_map(0.8, "lens80"),
    "identity": lambda: _affine(1, 0, "identity"),
    "square": lambda: AnalyticMap(lambda z: z * z, lambda z: 2 * z, "square"),
    "halfdisk": lambda: _affine(0.5, 0.5, "halfdisk"),
}

# Maps that omit 0, 1 and inf on the open disk.
OMITTING = ("shift3", "halfexp", "negexp3", "disk2i", "sqshift", "lens60", "lens80")


def get_map(name: str) -> AnalyticMap:
    try:
        return REGISTRY[name]()
    except KeyError:
        raise KeyError(f"unknown map {name!r}; known: {', '.join(sorted(REGISTRY))}") from None


def map_from_spec(spec: dict) -> AnalyticMap:
    """Build a map from {"kind": "polynomial", "coeffs": [...]} or {"kind": "builtin", "name": ...}."""
    kind = spec.get("kind")
    if kind == "polynomial":
        return polynomial_map(spec["coeffs"], spec.get("label"))
    if kind == "builtin":
        return get_map(spec["name"])
    raise ValueError(f"unsupported map kind {kind!r}")


CHECKS = {"main": check_main, "good": check_good, "good2": check_good2}
