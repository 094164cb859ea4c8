"""Shared fixtures and independent oracles.

The level-set oracle computes half-return values without any time
integration: for a field with constant horizontal component and a vertical
component depending on x alone, orbits preserve the antiderivative
G(x) = int Y(s, 0) ds, so the return abscissa solves G(xr) = G(x0) on the
other side of the tangency.  Root-finding on G is the only numerics
involved, keeping the oracle independent of the Runge-Kutta path it checks.
"""

import numpy as np
import pytest
from scipy.optimize import brentq

from filippov import IntegratorConfig
from filippov.field import SmoothField


@pytest.fixture(scope="session")
def cfg():
    return IntegratorConfig()


def level_set_return(field: SmoothField, x0: float, lo: float, hi: float) -> float:
    """Half-return oracle; the root is searched inside (lo, hi)."""
    if not field.X.restrict_sigma().derivative().is_zero():
        raise ValueError("oracle requires a constant horizontal component")
    G = field.Y.restrict_sigma().antiderivative()
    target = G(x0)

    def g(x):
        return G(x) - target

    xs = np.linspace(lo, hi, 4001)
    vals = [g(float(x)) for x in xs]
    for i in range(len(xs) - 1):
        if vals[i] == 0.0:
            return float(xs[i])
        if vals[i] * vals[i + 1] < 0:
            return brentq(g, float(xs[i]), float(xs[i + 1]), xtol=1e-15)
    raise ValueError(f"oracle found no return in ({lo}, {hi})")
