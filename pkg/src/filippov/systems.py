"""Canonical polynomial field families with closed-form local data.

These families back most tests and example scenarios because every quantity
of interest has a hand-computable value.
"""

from __future__ import annotations

from fractions import Fraction

from .field import PiecewiseField, SmoothField
from .poly import Poly2


def monodromic_family(k: int, c, exact: bool = False) -> PiecewiseField:
    """Invisible tangency pair of multiplicity ``2k`` on both sides.

    Upper field ``(1, -x^{2k-1} + c x^{2k})``, lower field
    ``(-1, -x^{2k-1})``.  Classification data: ``delta = 1``,
    ``a± = -1``, ``f0_plus = c``, ``f0_minus = 0``, ``g00± = 0`` and
    ``V2 = 2c / (2k + 1)``; the case ``c = 0`` is a center by the symmetry
    ``(x, t) -> (-x, -t)``.
    """
    if k < 1:
        raise ValueError("k must be a positive integer")
    one = Fraction(1) if exact else 1.0
    cc = Fraction(c) if exact else float(c)
    upper = SmoothField(
        X=Poly2.constant(one),
        Y=Poly2({(2 * k - 1, 0): -one, (2 * k, 0): cc}),
    )
    lower = SmoothField(
        X=Poly2.constant(-one),
        Y=Poly2({(2 * k - 1, 0): -one}),
    )
    return PiecewiseField(upper=upper, lower=lower)


def cross_coupled_system(exact: bool = False) -> PiecewiseField:
    """Two-fold pair whose upper field couples to y: ``(1, -x + y)`` over
    ``(-1, -x)``.

    Exercises the ``g00`` extraction path: ``g00_plus = 1``, ``f0± = 0``,
    ``a± = -1`` and ``V2 = 2/3``.
    """
    one = Fraction(1) if exact else 1.0
    upper = SmoothField(
        X=Poly2.constant(one),
        Y=Poly2({(1, 0): -one, (0, 1): one}),
    )
    lower = SmoothField(
        X=Poly2.constant(-one),
        Y=Poly2({(1, 0): -one}),
    )
    return PiecewiseField(upper=upper, lower=lower)


def family_V2(k: int, c) -> float:
    """Closed-form second displacement coefficient of ``monodromic_family``."""
    return 2.0 * float(c) / (2 * k + 1)
