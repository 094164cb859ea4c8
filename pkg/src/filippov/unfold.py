"""Construction of the unfolding perturbation and its verifiers.

Given a field with a ``(2k, 2k)`` monodromic tangential singularity at the
origin and a parameter vector ``Lambda = (a_1, ..., a_{2k-2})`` of nonzero,
pairwise-distinct reals, there is a unique polynomial ``P`` of degree at
most ``2k - 2`` with ``P(0) = 0`` that turns every ``(eps * a_i, 0)`` into a
tangency of the perturbed vertical component

    Y_new(x, y) = Y(x, y) + X(x, y) * P(x).

The interpolation values are

    xi_i = -(sign) * delta * eps^{2k-1} * (a * a_i^{2k-1}
                                           + eps * a_i^{2k} * f(eps * a_i))

with the upper side taking ``sign = +1`` and the lower side ``-1``;
equivalently ``xi_i = -Y(eps*a_i, 0) / X(eps*a_i, 0)``.

The perturbation is built two ways and cross-checked: a direct linear solve
of the Vandermonde system in the original coordinates, and Newton divided
differences through the rescaled node set ``{0} u {a_i}`` (numerically well
conditioned; its result is the one returned).

Writing ``c_j(eps) = eps^{2k-1-j} * C_j(eps)`` for the coefficients of the
perturbation, the values ``C_j(0)`` and ``dC_j/deps(0)`` obey a family of
algebraic identities (factorizations of two companion polynomials, sum
rules at each node, and cross-side proportionalities) that
:func:`lemma1_check` evaluates and reports residuals for.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction

import numpy as np

from .errors import (
    DivisionResidual,
    IllConditioned,
    InputError,
    InvalidLambda,
    VerificationMismatch,
)
from .field import (
    MonodromyData,
    PiecewiseField,
    SmoothField,
    classify_mts,
    contact_multiplicity,
    local_V2,
    visibility,
)
from .poly import Poly1, Poly2

# Membership gates for the parameter domain: the domain is open, and nearly
# coincident nodes make double-precision interpolation meaningless.
MIN_NODE = 1e-6
MIN_GAP = 1e-6

# Disagreement gate between the two interpolation routes.
METHOD_AGREEMENT_TOL = 1e-7

LADDER_RESIDUAL_TOL = 1e-9


@dataclass(frozen=True)
class UnfoldingParams:
    """Unfolding parameters: order ``k``, node vector, scale, shift."""

    k: int
    lam: tuple
    epsilon: float
    b: float = 0.0
    shift_convention: str = "minus"  # upper field composed with x -> x -+ b

    def __post_init__(self):
        if self.shift_convention not in ("minus", "plus"):
            raise InputError(
                f"unknown shift convention {self.shift_convention!r}")

    def is_ordered(self) -> bool:
        """True when ``a_1 < 0 < a_2 < ... < a_{2k-2}``."""
        lam = self.lam
        if not lam:
            return True
        if not lam[0] < 0:
            return False
        rest = lam[1:]
        if any(a <= 0 for a in rest):
            return False
        return all(u < v for u, v in zip(rest, rest[1:]))


@dataclass(frozen=True)
class PerturbationPolys:
    """The two perturbation polynomials with their coefficient norms."""

    p_plus: Poly1
    p_minus: Poly1
    norm_plus: float
    norm_minus: float

    def to_json_dict(self) -> dict:
        return {
            "p_plus": self.p_plus.to_list(),
            "p_minus": self.p_minus.to_list(),
            "norm_plus": float(self.norm_plus),
            "norm_minus": float(self.norm_minus),
        }


@dataclass
class ContactRecord:
    index: int
    x0: float
    residual_plus: float
    residual_minus: float
    mult_plus: int | None
    mult_minus: int | None
    vis_plus: str
    vis_minus: str
    expected: str
    ok: bool

    def to_json_dict(self) -> dict:
        return {
            "index": self.index,
            "x0": float(self.x0),
            "residual_plus": float(self.residual_plus),
            "residual_minus": float(self.residual_minus),
            "mult_plus": self.mult_plus,
            "mult_minus": self.mult_minus,
            "vis_plus": self.vis_plus,
            "vis_minus": self.vis_minus,
            "expected": self.expected,
            "ok": self.ok,
        }


@dataclass
class LadderReport:
    contacts: list
    ok: bool

    def failures(self) -> list:
        return [r.x0 for r in self.contacts if not r.ok]

    def to_json_dict(self) -> dict:
        return {
            "ok": self.ok,
            "contacts": [r.to_json_dict() for r in self.contacts],
            "failing_abscissas": self.failures(),
        }


@dataclass
class Lemma1Entry:
    index: int
    a_i: float
    s1_plus: float
    s2_plus: float
    s3_plus: float
    s4_plus: float
    s1_minus: float
    s2_minus: float
    s3_minus: float
    s4_minus: float
    s2_residual_plus: float
    s2_residual_minus: float
    s4_residual_plus: float
    s4_residual_minus: float

    def to_json_dict(self) -> dict:
        return {
            "index": self.index,
            "a_i": float(self.a_i),
            "s1_plus": float(self.s1_plus),
            "s2_plus": float(self.s2_plus),
            "s3_plus": float(self.s3_plus),
            "s4_plus": float(self.s4_plus),
            "s1_minus": float(self.s1_minus),
            "s2_minus": float(self.s2_minus),
            "s3_minus": float(self.s3_minus),
            "s4_minus": float(self.s4_minus),
            "s2_residual_plus": float(self.s2_residual_plus),
            "s2_residual_minus": float(self.s2_residual_minus),
            "s4_residual_plus": float(self.s4_residual_plus),
            "s4_residual_minus": float(self.s4_residual_minus),
        }


@dataclass
class Lemma1Report:
    alpha: float
    c_plus: list
    c_minus: list
    dc_plus: list
    dc_minus: list
    entries: list
    factorization_residuals: dict
    cross_side_residuals: dict
    mode: str = "numeric"

    def max_residual(self) -> float:
        vals = []
        for e in self.entries:
            vals += [e.s2_residual_plus, e.s2_residual_minus,
                     e.s4_residual_plus, e.s4_residual_minus]
        vals += [v for v in self.factorization_residuals.values()]
        vals += [v for v in self.cross_side_residuals.values() if v is not None]
        return max(float(v) for v in vals) if vals else 0.0

    def to_json_dict(self) -> dict:
        return {
            "mode": self.mode,
            "alpha": float(self.alpha),
            "C_plus": [float(v) for v in self.c_plus],
            "C_minus": [float(v) for v in self.c_minus],
            "dC_plus": [float(v) for v in self.dc_plus],
            "dC_minus": [float(v) for v in self.dc_minus],
            "entries": [e.to_json_dict() for e in self.entries],
            "factorization_residuals": {
                k: float(v) for k, v in self.factorization_residuals.items()},
            "cross_side_residuals": {
                k: (None if v is None else float(v))
                for k, v in self.cross_side_residuals.items()},
            "max_residual": self.max_residual(),
        }


@dataclass
class V2LimitRow:
    index: int
    a_i: float
    abscissas: list
    values: list
    errors: list
    fitted_order: float
    ok: bool

    def to_json_dict(self) -> dict:
        return {
            "index": self.index,
            "a_i": float(self.a_i),
            "abscissas": [float(v) for v in self.abscissas],
            "values": [float(v) for v in self.values],
            "errors": [float(v) for v in self.errors],
            "fitted_order": float(self.fitted_order),
            "ok": self.ok,
        }


@dataclass
class V2LimitReport:
    limit: float
    V2: float
    eps_grid: list
    rows: list
    ok: bool

    def to_json_dict(self) -> dict:
        return {
            "limit": float(self.limit),
            "V2": float(self.V2),
            "eps_grid": [float(v) for v in self.eps_grid],
            "rows": [r.to_json_dict() for r in self.rows],
            "ok": self.ok,
        }


# --- interpolation machinery -------------------------------------------------


def validate_lambda(lam, k: int) -> None:
    """Domain membership: nonzero, pairwise-distinct nodes of length 2k-2."""
    lam = tuple(lam)
    if len(lam) != 2 * k - 2:
        raise InvalidLambda(
            f"expected {2 * k - 2} nodes for k={k}, got {len(lam)}")
    for a in lam:
        if abs(float(a)) < MIN_NODE:
            raise InvalidLambda(f"node {a} too close to zero")
    for i in range(len(lam)):
        for j in range(i + 1, len(lam)):
            if abs(float(lam[i]) - float(lam[j])) < MIN_GAP:
                raise InvalidLambda(
                    f"nodes {lam[i]} and {lam[j]} too close together")


def newton_through_origin(nodes, values):
    """Interpolating polynomial through ``(0, 0)`` and ``(nodes, values)``.

    Returns ascending monomial coefficients; works over floats or exact
    Fractions.  The constant coefficient is exactly zero by construction.
    """
    xs = [0 * (nodes[0] if nodes else 0)] + list(nodes)
    ys = [0 * (values[0] if values else 0)] + list(values)
    n = len(xs)
    table = list(ys)
    for j in range(1, n):
        for i in range(n - 1, j - 1, -1):
            table[i] = (table[i] - table[i - 1]) / (xs[i] - xs[i - j])
    # expand the Newton form to monomials
    coeffs = [0] * n
    basis = [1]
    for i, c in enumerate(table):
        for m, bcoef in enumerate(basis):
            coeffs[m] = coeffs[m] + c * bcoef
        if i + 1 < n:
            nxt = [0] * (len(basis) + 1)
            for m, bcoef in enumerate(basis):
                nxt[m + 1] += bcoef
                nxt[m] -= xs[i] * bcoef
            basis = nxt
    return coeffs


def _f_factory(f: SmoothField, sign: int, delta: int, a, k: int):
    """Exact evaluator of the correction function ``f`` of one side.

    The numerator ``sign*delta*Y(x,0) - a*x^{2k-1}*X(x,0)`` is divided by
    ``x^{2k}`` exactly (residual gated), then by the value of ``X(x, 0)`` at
    the evaluation point.
    """
    py = f.Y.restrict_sigma()
    px = f.X.restrict_sigma()
    num = (sign * delta) * py - a * px.times_x_power(2 * k - 1)
    q, residual = num.divide_x_power(2 * k)
    scale = max(1.0, num.max_abs_coeff())
    if residual > 1e-10 * scale:
        raise DivisionResidual(
            f"numerator not divisible by x^{2 * k}: residual {residual:.3e}")

    def f_at(x):
        return q(x) / px(x)

    return f_at


def xi_values(Z: PiecewiseField, data: MonodromyData, lam, epsilon):
    """Interpolation values at the nodes ``epsilon * a_i`` for both sides.

    Requires equal tangency orders on the two sides.  The values are
    evaluated through exact polynomial division, never by forming the raw
    quotient near the singularity.
    """
    if data.k_plus != data.k_minus:
        raise InputError("equal tangency orders on both sides are required")
    k = data.k_plus
    delta = data.delta
    f_up = _f_factory(Z.upper, +1, delta, data.a_plus, k)
    f_lo = _f_factory(Z.lower, -1, delta, data.a_minus, k)
    xi_p, xi_m = [], []
    for a_i in lam:
        x_i = epsilon * a_i
        common = epsilon ** (2 * k - 1)
        xi_p.append(-delta * common
                    * (data.a_plus * a_i ** (2 * k - 1)
                       + epsilon * a_i ** (2 * k) * f_up(x_i)))
        xi_m.append(+delta * common
                    * (data.a_minus * a_i ** (2 * k - 1)
                       + epsilon * a_i ** (2 * k) * f_lo(x_i)))
    return xi_p, xi_m


def build_perturbation(Z: PiecewiseField, params: UnfoldingParams,
                       data: MonodromyData | None = None) -> PerturbationPolys:
    """Construct the two perturbation polynomials for the given parameters.

    Solved twice (direct Vandermonde solve; rescaled Newton interpolation
    through the augmented node set) and cross-checked; the Newton result is
    returned.
    """
    if data is None:
        data = classify_mts(Z)
    if data.k_plus != data.k_minus:
        raise InputError("equal tangency orders on both sides are required")
    if params.k != data.k_plus:
        raise InputError(
            f"params.k={params.k} but the field has order k={data.k_plus}")
    if not params.epsilon > 0:
        raise InputError("epsilon must be positive")
    validate_lambda(params.lam, params.k)
    k = params.k
    if k == 1:
        return PerturbationPolys(Poly1(), Poly1(), 0.0, 0.0)

    eps = float(params.epsilon)
    lam = [float(a) for a in params.lam]
    xi_p, xi_m = xi_values(Z, data, lam, eps)

    n = 2 * k - 2
    nodes = np.array(lam) * eps
    powers = np.arange(1, n + 1)
    H = nodes[:, None] ** powers[None, :]

    sides = []
    for xi in (xi_p, xi_m):
        xv = np.array([float(v) for v in xi])
        direct = np.linalg.solve(H, xv)
        full = newton_through_origin(lam, [float(v) for v in xi])
        rescaled = np.array([full[j] / eps**j for j in range(1, n + 1)])
        gap = float(np.linalg.norm(direct - rescaled))
        if gap > METHOD_AGREEMENT_TOL:
            raise IllConditioned(
                f"interpolation routes disagree by {gap:.3e} in coefficient norm")
        sides.append(Poly1([0.0, *rescaled]))

    return PerturbationPolys(
        p_plus=sides[0], p_minus=sides[1],
        norm_plus=sides[0].norm(), norm_minus=sides[1].norm())


def build_unfolded(Z: PiecewiseField, polys: PerturbationPolys) -> PiecewiseField:
    """Add ``X * P(x)`` to each vertical component."""
    pp = polys.p_plus.to_poly2()
    pm = polys.p_minus.to_poly2()
    return PiecewiseField(
        upper=SmoothField(Z.upper.X, Z.upper.Y + Z.upper.X * pp),
        lower=SmoothField(Z.lower.X, Z.lower.Y + Z.lower.X * pm),
    )


def apply_shift(Z: PiecewiseField, b: float,
                convention: str = "minus") -> PiecewiseField:
    """Compose the upper field with ``x -> x - b`` (minus) or ``x + b`` (plus).

    The lower field is untouched.  Both sign conventions are supported;
    exactly one of them produces cycles for a given sign of ``b``, which
    downstream scans resolve empirically rather than assume.
    """
    if convention not in ("minus", "plus"):
        raise InputError(f"unknown shift convention {convention!r}")
    if b == 0:
        return Z
    h = -b if convention == "minus" else b
    return PiecewiseField(
        upper=SmoothField(Z.upper.X.shift_x(h), Z.upper.Y.shift_x(h)),
        lower=Z.lower,
    )


# --- verifiers ---------------------------------------------------------------


def expected_invisible_indices(k: int) -> set:
    """Contact indices that are invisible when the nodes are ordered.

    Index 0 is the original singularity; for ``k = 1`` it is the only
    contact and stays invisible.  For ``k >= 2`` the invisible ones are
    index 1 and the even indices.
    """
    if k == 1:
        return {0}
    return {1} | set(range(2, 2 * k - 1, 2))


def verify_contact_ladder(Z_unfolded: PiecewiseField,
                          params: UnfoldingParams) -> LadderReport:
    """Check the grid of contacts produced by the unfolding.

    At the origin and at every ``epsilon * a_i``: the vertical components
    must vanish (residual below ``1e-9`` relative to coefficient scale),
    the contact must have multiplicity 2 on both sides, and the
    visible/invisible pattern must alternate as predicted for ordered
    nodes.  Raises :class:`VerificationMismatch` listing failing abscissas.
    """
    k = params.k
    if k >= 2 and not params.is_ordered():
        raise InvalidLambda(
            "the visibility pattern is only predicted for a1 < 0 < a2 < ...")
    invisible = expected_invisible_indices(k)
    points = [(0, 0.0)] + [
        (i + 1, params.epsilon * float(a)) for i, a in enumerate(params.lam)]

    pu = Z_unfolded.upper.Y.restrict_sigma()
    pl = Z_unfolded.lower.Y.restrict_sigma()
    scale_u = max(1.0, pu.max_abs_coeff())
    scale_l = max(1.0, pl.max_abs_coeff())

    records = []
    for index, x0 in points:
        expected = "invisible" if index in invisible else "visible"
        res_u = abs(float(pu(x0)))
        res_l = abs(float(pl(x0)))
        mult_u = mult_l = None
        vis_u = vis_l = "error"
        ok = res_u < LADDER_RESIDUAL_TOL * scale_u and \
            res_l < LADDER_RESIDUAL_TOL * scale_l
        try:
            mult_u = contact_multiplicity(Z_unfolded.upper, x0)
            mult_l = contact_multiplicity(Z_unfolded.lower, x0)
            ok = ok and mult_u == 2 and mult_l == 2
            if mult_u == 2:
                vis_u = visibility(Z_unfolded.upper, x0, 2, "upper")
            if mult_l == 2:
                vis_l = visibility(Z_unfolded.lower, x0, 2, "lower")
            ok = ok and vis_u == expected and vis_l == expected
        except Exception as exc:  # classification failures are ladder failures
            vis_u = vis_l = f"error: {exc}"
            ok = False
        records.append(ContactRecord(
            index=index, x0=x0, residual_plus=res_u, residual_minus=res_l,
            mult_plus=mult_u, mult_minus=mult_l,
            vis_plus=vis_u, vis_minus=vis_l, expected=expected, ok=ok))

    report = LadderReport(contacts=records, ok=all(r.ok for r in records))
    if not report.ok:
        raise VerificationMismatch(
            f"contact ladder failed at abscissas {report.failures()}",
            report=report)
    return report


def _exactify_field(Z: PiecewiseField) -> PiecewiseField:
    def conv(p: Poly2) -> Poly2:
        return Poly2({key: Fraction(c) for key, c in p.terms.items()})

    return PiecewiseField(
        upper=SmoothField(conv(Z.upper.X), conv(Z.upper.Y)),
        lower=SmoothField(conv(Z.lower.X), conv(Z.lower.Y)),
    )


def _rescaled_coefficient_curves(Z, k, lam, h):
    """``C_j(eps)`` sampled on the grid ``{h, h/2, h/4}``, then the value and
    first derivative at zero from the quadratic through the samples."""
    data = classify_mts(Z)
    eps_grid = [h, h / 2, h / 4]
    n = 2 * k - 2
    samples = {"plus": [], "minus": []}
    for eps in eps_grid:
        params = UnfoldingParams(k=k, lam=tuple(lam), epsilon=eps)
        polys = build_perturbation(Z, params, data)
        for name, p in (("plus", polys.p_plus), ("minus", polys.p_minus)):
            samples[name].append(
                [float(p.coeff(j)) / eps ** (2 * k - 1 - j)
                 for j in range(1, n + 1)])
    V = np.vander(np.array(eps_grid), 3, increasing=True)  # [1, eps, eps^2]
    out = {}
    for name in ("plus", "minus"):
        mat = np.array(samples[name])  # shape (3, n)
        fit = np.linalg.solve(V, mat)  # rows: value, slope, curvature
        out[name] = (list(fit[0]), list(fit[1]))
    return data, out


def _exact_coefficient_curves(Z, k, lam):
    """Exact ``C_j(0)`` and ``dC_j/deps(0)`` from rational interpolation.

    At ``eps = 0`` the rescaled coefficients interpolate
    ``-(sign) * delta * a * a_i^{2k-1}``; their first eps-derivatives
    interpolate ``-(sign) * delta * f0 * a_i^{2k}``.  Both are plain
    interpolation problems through the origin over the rational node set,
    so residuals computed from them are exactly zero when they should be.
    """
    Zx = _exactify_field(Z)
    data = classify_mts(Zx)
    delta = data.delta
    lam_x = [Fraction(a) for a in lam]
    out = {}
    for name, sign, a, f0 in (
            ("plus", +1, data.a_plus, data.f0_plus),
            ("minus", -1, data.a_minus, data.f0_minus)):
        rhs0 = [-sign * delta * a * ai ** (2 * k - 1) for ai in lam_x]
        rhs1 = [-sign * delta * f0 * ai ** (2 * k) for ai in lam_x]
        c0 = newton_through_origin(lam_x, rhs0)[1:]
        c1 = newton_through_origin(lam_x, rhs1)[1:]
        out[name] = (c0, c1)
    return data, out


def _poly_from_roots(leading, roots):
    p = Poly1([leading])
    for r in roots:
        p = p * Poly1([-r, 1])
    return p


def lemma1_check(Z: PiecewiseField, k: int, lam,
                 mode: str = "numeric", h: float = 1e-2) -> Lemma1Report:
    """Evaluate the identity system satisfied by ``C_j(0)`` and ``dC_j(0)``.

    Checks, with residuals reported rather than gated:

    * the two sum-rule identities relating ``s2`` to ``s1`` and ``s4`` to
      ``s3``/``s1`` at every node index;
    * the factorizations ``T(x) = (sign)*delta*a*x*prod(x - a_j)`` and
      ``U(x) = (sign)*delta*f0*x*(x - alpha)*prod(x - a_j)`` with
      ``alpha = -sum(a_j)``;
    * the cross-side proportionalities ``s1_minus = -(a_m/a_p) s1_plus``
      etc. (the ``f0`` ratios are skipped when ``f0_plus`` vanishes).

    ``mode="numeric"`` extrapolates the coefficient curves from the grid
    ``{h, h/2, h/4}``; ``mode="exact"`` recomputes them in rational
    arithmetic so that residuals are exactly zero for rational inputs.
    """
    if k < 2:
        raise InputError("the identity system needs k >= 2")
    validate_lambda(lam, k)
    if mode == "exact":
        data, curves = _exact_coefficient_curves(Z, k, lam)
    elif mode == "numeric":
        data, curves = _rescaled_coefficient_curves(Z, k, lam, h)
    else:
        raise InputError(f"unknown mode {mode!r}")
    if data.k_plus != k or data.k_minus != k:
        raise InputError(
            f"field has orders ({data.k_plus}, {data.k_minus}), expected k={k}")

    delta = data.delta
    n = 2 * k - 2
    lam_v = list(lam)
    alpha = -sum(lam_v)
    c0p, dcp = curves["plus"]
    c0m, dcm = curves["minus"]

    def s_sums(c0, dc, ai):
        s1 = sum((j + 1) * ai**j * c0[j] for j in range(n))
        s2 = sum((j + 1) * ai**j * dc[j] for j in range(n))
        s3 = sum((j + 1) * j * ai ** (j - 1) * c0[j] for j in range(1, n))
        s4 = sum((j + 1) * j * ai ** (j - 1) * dc[j] for j in range(1, n))
        return s1, s2, s3, s4

    entries = []
    cross = {"s1": [], "s2": [], "s3": [], "s4": []}
    a_ratio = data.a_minus / data.a_plus
    f0p_nonzero = abs(float(data.f0_plus)) > 1e-13
    f_ratio = (data.f0_minus / data.f0_plus) if f0p_nonzero else None

    for idx, ai in enumerate(lam_v, start=1):
        s1p, s2p, s3p, s4p = s_sums(c0p, dcp, ai)
        s1m, s2m, s3m, s4m = s_sums(c0m, dcm, ai)
        rhs2p = (data.f0_plus / data.a_plus) * (
            (ai - alpha) * s1p
            - delta * data.a_plus * ai ** (2 * k - 1)
            - delta * (2 * k - 1) * data.a_plus * alpha * ai ** (2 * k - 2))
        rhs2m = (data.f0_minus / data.a_minus) * (
            (ai - alpha) * s1m
            + delta * data.a_minus * ai ** (2 * k - 1)
            + delta * (2 * k - 1) * data.a_minus * alpha * ai ** (2 * k - 2))
        rhs4p = (data.f0_plus / data.a_plus) * (
            (ai - alpha) * s3p + 2 * s1p
            - delta * (2 * k - 2) * (2 * k - 1)
            * data.a_plus * alpha * ai ** (2 * k - 3))
        rhs4m = (data.f0_minus / data.a_minus) * (
            (ai - alpha) * s3m + 2 * s1m
            + delta * (2 * k - 2) * (2 * k - 1)
            * data.a_minus * alpha * ai ** (2 * k - 3))
        entries.append(Lemma1Entry(
            index=idx, a_i=ai,
            s1_plus=s1p, s2_plus=s2p, s3_plus=s3p, s4_plus=s4p,
            s1_minus=s1m, s2_minus=s2m, s3_minus=s3m, s4_minus=s4m,
            s2_residual_plus=abs(s2p - rhs2p),
            s2_residual_minus=abs(s2m - rhs2m),
            s4_residual_plus=abs(s4p - rhs4p),
            s4_residual_minus=abs(s4m - rhs4m)))
        cross["s1"].append(abs(s1m + a_ratio * s1p))
        cross["s3"].append(abs(s3m + a_ratio * s3p))
        if f_ratio is not None:
            cross["s2"].append(abs(s2m + f_ratio * s2p))
            cross["s4"].append(abs(s4m + f_ratio * s4p))

    def poly_residual(built: Poly1, target: Poly1) -> float:
        diff = built - target
        return max((abs(float(c)) for c in diff.coeffs), default=0.0)

    t_plus = Poly1([0, *c0p, delta * data.a_plus])
    t_minus = Poly1([0, *c0m, -delta * data.a_minus])
    u_plus = Poly1([0, *dcp, 0, delta * data.f0_plus])
    u_minus = Poly1([0, *dcm, 0, -delta * data.f0_minus])
    fact = {
        "T_plus": poly_residual(
            t_plus, _poly_from_roots(delta * data.a_plus, [0] + lam_v)),
        "T_minus": poly_residual(
            t_minus, _poly_from_roots(-delta * data.a_minus, [0] + lam_v)),
        "U_plus": poly_residual(
            u_plus, _poly_from_roots(delta * data.f0_plus, [0, alpha] + lam_v)),
        "U_minus": poly_residual(
            u_minus, _poly_from_roots(-delta * data.f0_minus, [0, alpha] + lam_v)),
    }
    cross_max = {
        "s1": max(cross["s1"]),
        "s3": max(cross["s3"]),
        "s2": max(cross["s2"]) if cross["s2"] else None,
        "s4": max(cross["s4"]) if cross["s4"] else None,
    }
    return Lemma1Report(
        alpha=alpha, c_plus=c0p, c_minus=c0m, dc_plus=dcp, dc_minus=dcm,
        entries=entries, factorization_residuals=fact,
        cross_side_residuals=cross_max, mode=mode)


def local_V2_limit_check(Z: PiecewiseField, params: UnfoldingParams,
                         eps_factors=(1.0, 0.5, 0.25),
                         min_order: float = 0.9) -> V2LimitReport:
    """Convergence of the per-contact ``V2`` toward ``(2k+1)/3 * V2``.

    For every invisible contact index the unfolded field is rebuilt on a
    shrinking epsilon grid and the local coefficient is classified at the
    moving contact point; the error against the limit must decay with
    fitted order at least ``min_order``.
    """
    data = classify_mts(Z)
    k = params.k
    if data.k_plus != k or data.k_minus != k:
        raise InputError(
            f"field has orders ({data.k_plus}, {data.k_minus}), expected k={k}")
    if k < 2:
        raise InputError("the limit check needs an actual unfolding (k >= 2)")
    V2 = float(data.V2)
    if abs(V2) < 1e-12:
        raise InputError("the second displacement coefficient vanishes")
    if not params.is_ordered():
        raise InvalidLambda("ordered nodes a1 < 0 < a2 < ... are required")

    limit = (2 * k + 1) / 3.0 * V2
    eps_grid = [params.epsilon * f for f in eps_factors]
    rows = []
    for index in sorted(expected_invisible_indices(k)):
        a_i = float(params.lam[index - 1])
        abscissas, values, errors = [], [], []
        for eps in eps_grid:
            p_eps = replace(params, epsilon=eps)
            polys = build_perturbation(Z, p_eps, data)
            Zu = build_unfolded(Z, polys)
            v = float(local_V2(Zu, eps * a_i))
            abscissas.append(eps * a_i)
            values.append(v)
            errors.append(abs(v - limit))
        le = np.log(np.maximum(errors, 1e-14))
        lx = np.log(eps_grid)
        order = float(np.polyfit(lx, le, 1)[0])
        rows.append(V2LimitRow(
            index=index, a_i=a_i, abscissas=abscissas, values=values,
            errors=errors, fitted_order=order, ok=order >= min_order))

    report = V2LimitReport(limit=limit, V2=V2, eps_grid=eps_grid, rows=rows,
                           ok=all(r.ok for r in rows))
    if not report.ok:
        bad = [r.index for r in report.rows if not r.ok]
        raise VerificationMismatch(
            f"local V2 convergence failed at contact indices {bad}",
            report=report)
    return report
