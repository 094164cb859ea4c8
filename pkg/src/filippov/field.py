"""Piecewise-smooth planar fields split by the line ``y = 0``.

A :class:`PiecewiseField` pairs two polynomial fields, one governing the
upper half-plane and one the lower.  This module classifies tangential
contact points between either field and the switching line, recognizes the
monodromic configuration around which a first-return map exists, and
computes the closed-form second coefficient ``V2`` of the displacement-map
expansion.

The classification is gated by three conditions on the origin:

* ``C1`` - both one-sided vertical components vanish to finite even order
  ``2k`` along the switching line while the horizontal components do not
  vanish;
* ``C2`` - both tangencies are invisible: each one-sided orbit through the
  origin leaves its own half-plane (sign of ``X * d^{2k-1}Y/dx^{2k-1}``
  negative for the upper field, positive for the lower one);
* ``C3`` - the horizontal components oppose each other across the line.

Visibility convention.  A bare sign test on ``d^{2k-1}Y/dx^{2k-1}`` alone
does not account for the direction of travel; we use the orbit-curvature
criterion (the sign of ``X * d^{2k-1}Y/dx^{2k-1}``) throughout, which is the
unique convention under which C1 + C2 imply the origin is invisible for both
fields.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import (
    DegenerateContact,
    DivisionResidual,
    InputError,
    NotMonodromic,
    SingularX,
)
from .poly import Poly1, Poly2

# A derivative (coefficient) counts as zero below this relative threshold;
# polynomial inputs make smaller values pure rounding artifacts.
DERIV_ZERO_TOL = 1e-11

# Gate on exact-division residuals in the f0/g00 extractions.
DIV_RESIDUAL_TOL = 1e-10

CROSSING = "crossing"
ATTRACTING = "attracting-sliding"
REPELLING = "repelling-sliding"


@dataclass(frozen=True)
class SmoothField:
    """One smooth planar field with polynomial components."""

    X: Poly2
    Y: Poly2

    def velocity(self, x, y):
        return self.X.eval(x, y), self.Y.eval(x, y)


@dataclass(frozen=True)
class PiecewiseField:
    """Upper/lower field pair; the switching line is fixed at ``y = 0``."""

    upper: SmoothField
    lower: SmoothField

    def side(self, name: str) -> SmoothField:
        if name == "upper":
            return self.upper
        if name == "lower":
            return self.lower
        raise InputError(f"unknown side {name!r}")


@dataclass(frozen=True)
class ContactInfo:
    """Classification of one tangential contact point."""

    x0: float
    side: str
    multiplicity: int
    visibility: str  # "visible" | "invisible" | "not-applicable"


@dataclass(frozen=True)
class MonodromyData:
    """Local data of a monodromic tangential singularity at the origin."""

    k_plus: int
    k_minus: int
    delta: int
    a_plus: float
    a_minus: float
    f0_plus: float
    f0_minus: float
    g00_plus: float
    g00_minus: float
    alpha2_plus: float
    alpha2_minus: float
    V2: float

    def to_json_dict(self) -> dict:
        return {
            "k_plus": self.k_plus,
            "k_minus": self.k_minus,
            "delta": self.delta,
            "a_plus": float(self.a_plus),
            "a_minus": float(self.a_minus),
            "f0_plus": float(self.f0_plus),
            "f0_minus": float(self.f0_minus),
            "g00_plus": float(self.g00_plus),
            "g00_minus": float(self.g00_minus),
            "alpha2_plus": float(self.alpha2_plus),
            "alpha2_minus": float(self.alpha2_minus),
            "V2": float(self.V2),
        }


@dataclass(frozen=True)
class SigmaSegment:
    """One piece of the switching line between consecutive contact points."""

    interval: tuple
    kind: str  # crossing | attracting-sliding | repelling-sliding
    endpoints: tuple  # delimiting contact abscissas (None at window edges)

    def to_json_dict(self) -> dict:
        return {
            "x_lo": float(self.interval[0]),
            "x_hi": float(self.interval[1]),
            "kind": self.kind,
            "endpoints": [None if e is None else float(e) for e in self.endpoints],
        }


def _coeff_tol(p: Poly1) -> float:
    return DERIV_ZERO_TOL * max(1.0, p.max_abs_coeff())


def contact_multiplicity(f: SmoothField, x0: float) -> int:
    """Tangency multiplicity of the field with ``y = 0`` at ``(x0, 0)``.

    Returns 1 at a regular (transversal) point; a multiplicity ``n >= 2``
    means ``x0`` is a root of order ``n - 1`` of ``x -> Y(x, 0)``.
    """
    px = f.X.restrict_sigma()
    if abs(float(px(x0))) <= _coeff_tol(px):
        raise SingularX(f"horizontal component vanishes at x0={x0}")
    py = f.Y.restrict_sigma().shift(x0)
    tol = _coeff_tol(py)
    for m in range(py.degree + 1):
        if abs(float(py.coeff(m))) > tol:
            return m + 1
    raise DegenerateContact(
        f"all derivatives of Y(x, 0) vanish at x0={x0}")


def visibility(f: SmoothField, x0: float, n: int, side: str) -> str:
    """Visibility of an even-multiplicity contact.

    The contact is invisible when the orbit through ``(x0, 0)`` locally
    leaves the field's own half-plane.  The local vertical excursion has the
    sign of ``X * d^{n-1}Y/dx^{n-1}`` at the contact, so for the upper field
    the contact is invisible iff that product is negative; for the lower
    field iff it is positive.
    """
    if side not in ("upper", "lower"):
        raise InputError(f"unknown side {side!r}")
    if n < 2 or n % 2:
        raise InputError(f"visibility requires an even multiplicity, got {n}")
    mult = contact_multiplicity(f, x0)
    if mult != n:
        raise InputError(
            f"contact at x0={x0} has multiplicity {mult}, expected {n}")
    py = f.Y.restrict_sigma().shift(x0)
    d = py.coeff(n - 1)  # d^{n-1}Y/dx^{n-1}(x0, 0) up to the factorial
    s = f.X.restrict_sigma()(x0) * d
    if side == "upper":
        return "invisible" if s < 0 else "visible"
    return "invisible" if s > 0 else "visible"


def contact_info(f: SmoothField, x0: float, side: str) -> ContactInfo:
    """Full record of one contact point.

    Visibility only applies to even multiplicities at least 2; regular
    points and odd-order tangencies get "not-applicable".
    """
    mult = contact_multiplicity(f, x0)
    if mult == 1 or mult % 2:
        vis = "not-applicable"
    else:
        vis = visibility(f, x0, mult, side)
    return ContactInfo(x0=x0, side=side, multiplicity=mult, visibility=vis)


def _side_multiplicity(f: SmoothField, side: str) -> int:
    px = f.X.restrict_sigma()
    if abs(float(px.coeff(0))) <= _coeff_tol(px):
        raise NotMonodromic("C1", f"X {side} vanishes at the origin")
    try:
        mult = contact_multiplicity(f, 0.0)
    except (SingularX, DegenerateContact) as exc:
        raise NotMonodromic("C1", str(exc)) from exc
    if mult == 1:
        raise NotMonodromic("C1", f"Y {side} does not vanish at the origin")
    if mult % 2:
        raise NotMonodromic(
            "C1", f"{side} tangency has odd multiplicity {mult}")
    return mult


def _f0(f: SmoothField, sign: int, delta: int, a, k: int):
    """Leading correction coefficient beyond the tangency order.

    Extracted as a Taylor coefficient: the numerator
    ``sign*delta*Y(x,0) - a*x^{2k-1}*X(x,0)`` is divisible by ``x^{2k}``
    exactly, which is asserted rather than assumed.
    """
    py = f.Y.restrict_sigma()
    px = f.X.restrict_sigma()
    num = (sign * delta) * py - a * px.times_x_power(2 * k - 1)
    q, residual = num.divide_x_power(2 * k)
    scale = max(1.0, num.max_abs_coeff())
    if residual > DIV_RESIDUAL_TOL * scale:
        raise DivisionResidual(
            f"numerator of f0 not divisible by x^{2 * k}: residual {residual:.3e}")
    return q.coeff(0) / px.coeff(0)


def _g00(f: SmoothField, sign: int, delta: int):
    """Vertical-coupling coefficient, extracted from the first y-order."""
    xs = f.X.restrict_sigma().to_poly2()
    ys = f.Y.restrict_sigma().to_poly2()
    num = sign * (xs * f.Y - f.X * ys)
    scale = max(1.0, num.max_abs_coeff())
    bad = max(
        (abs(float(c)) for (i, j), c in num.terms.items() if j == 0),
        default=0.0,
    )
    if bad > DIV_RESIDUAL_TOL * scale:
        raise DivisionResidual(
            f"numerator of g00 not divisible by y: residual {bad:.3e}")
    x00 = f.X.restrict_sigma().coeff(0)
    return num.taylor_coeff(0, 1) / (delta * x00 * x00)


def classify_mts(Z: PiecewiseField) -> MonodromyData:
    """Classify the origin as a monodromic tangential singularity.

    Checks C1, C2, C3 in order and raises :class:`NotMonodromic` naming the
    first violated condition.  On success returns the full local data record,
    including the second displacement coefficient ``V2``.
    """
    mult_up = _side_multiplicity(Z.upper, "upper")
    mult_lo = _side_multiplicity(Z.lower, "lower")
    k_p, k_m = mult_up // 2, mult_lo // 2

    pyu = Z.upper.Y.restrict_sigma()
    pyl = Z.lower.Y.restrict_sigma()
    xu0 = Z.upper.X.restrict_sigma().coeff(0)
    xl0 = Z.lower.X.restrict_sigma().coeff(0)
    # Leading restricted coefficients carry the sign of d^{2k-1}Y/dx^{2k-1}.
    cu = pyu.coeff(2 * k_p - 1)
    cl = pyl.coeff(2 * k_m - 1)

    if not xu0 * cu < 0:
        raise NotMonodromic("C2", "upper tangency is visible")
    if not xl0 * cl > 0:
        raise NotMonodromic("C2", "lower tangency is visible")
    if not xu0 * xl0 < 0:
        raise NotMonodromic("C3", "horizontal components do not oppose")

    delta = 1 if xu0 > 0 else -1
    a_p = cu / abs(xu0)
    a_m = cl / abs(xl0)
    f0_p = _f0(Z.upper, +1, delta, a_p, k_p)
    f0_m = _f0(Z.lower, -1, delta, a_m, k_m)
    g00_p = _g00(Z.upper, +1, delta)
    g00_m = _g00(Z.lower, -1, delta)
    alpha2_p = (-2 * f0_p + 2 * delta * a_p * g00_p) / (a_p * (2 * k_p + 1))
    alpha2_m = (-2 * f0_m - 2 * delta * a_m * g00_m) / (a_m * (2 * k_m + 1))
    return MonodromyData(
        k_plus=k_p,
        k_minus=k_m,
        delta=delta,
        a_plus=a_p,
        a_minus=a_m,
        f0_plus=f0_p,
        f0_minus=f0_m,
        g00_plus=g00_p,
        g00_minus=g00_m,
        alpha2_plus=alpha2_p,
        alpha2_minus=alpha2_m,
        V2=delta * (alpha2_p - alpha2_m),
    )


def lyapunov_V2(d: MonodromyData):
    """Second displacement coefficient ``delta * (alpha2_plus - alpha2_minus)``."""
    return d.delta * (d.alpha2_plus - d.alpha2_minus)


def translate(Z: PiecewiseField, h) -> PiecewiseField:
    """The field in coordinates centered at ``(h, 0)``: new(x, y) = old(x+h, y)."""
    return PiecewiseField(
        upper=SmoothField(Z.upper.X.shift_x(h), Z.upper.Y.shift_x(h)),
        lower=SmoothField(Z.lower.X.shift_x(h), Z.lower.Y.shift_x(h)),
    )


def local_V2(Z: PiecewiseField, x0: float):
    """``V2`` of the two-fold pair sitting at ``(x0, 0)``.

    Translates the point to the origin and classifies; the point must be a
    multiplicity-2 invisible tangency for both fields.
    """
    d = classify_mts(translate(Z, x0))
    if d.k_plus != 1 or d.k_minus != 1:
        raise NotMonodromic(
            "C1",
            f"point ({x0}, 0) carries multiplicities "
            f"({2 * d.k_plus}, {2 * d.k_minus}), expected (2, 2)")
    return d.V2


def sigma_regions(Z: PiecewiseField, interval) -> list:
    """Partition of an interval of the switching line by contact points.

    Each open piece between consecutive real roots of ``Y_upper(x, 0)`` and
    ``Y_lower(x, 0)`` is labeled crossing (both vertical components share a
    sign), attracting-sliding (upper points down, lower points up), or
    repelling-sliding (the reverse).
    """
    lo, hi = float(interval[0]), float(interval[1])
    if not hi > lo:
        raise InputError(f"empty interval ({lo}, {hi})")
    pu = Z.upper.Y.restrict_sigma()
    pl = Z.lower.Y.restrict_sigma()
    roots = sorted(pu.real_roots(lo, hi) + pl.real_roots(lo, hi))
    merged = []
    tol = 1e-12 * max(1.0, abs(lo), abs(hi))
    for r in roots:
        if merged and abs(r - merged[-1]) <= tol:
            continue
        if lo < r < hi:
            merged.append(r)
    cuts = [lo] + merged + [hi]
    segments = []
    for idx in range(len(cuts) - 1):
        u, v = cuts[idx], cuts[idx + 1]
        mid = 0.5 * (u + v)
        yu = float(pu(mid))
        yl = float(pl(mid))
        if yu < 0 < yl:
            kind = ATTRACTING
        elif yl < 0 < yu:
            kind = REPELLING
        else:
            kind = CROSSING
        segments.append(SigmaSegment(
            interval=(u, v),
            kind=kind,
            endpoints=(
                u if idx > 0 else None,
                v if idx < len(cuts) - 2 else None,
            ),
        ))
    return segments
