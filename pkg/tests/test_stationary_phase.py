import math

import numpy as np
import pytest

from eventloc.errors import ValidationError
from eventloc.physconst import DEFAULT
from eventloc.stationary_phase import (NoStationaryPointError, A_coefficient, compare_with_direct,
                                       delta_t_chain, stationary_point)

ME = DEFAULT.mass("electron")


def alpha(E=1e21, v=1e9):
    return (2 * E / v**2, ME)


def chi(p1, q1, t, x1, xi1, t1, E, masses, E0=0.0):
    ma, me = masses
    E1 = p1 @ p1 / (2 * ma) + q1 @ q1 / (2 * me) + E0
    return p1 @ x1 + q1 @ xi1 - E1 * (t1 - t) - E * t


def test_invariants_random_draws(rng):
    for _ in range(1000):
        x1 = rng.normal(size=3) * 1e-6
        xi1 = rng.normal(size=3) * 1e-8
        E = 10 ** rng.uniform(19, 22)
        E0 = rng.uniform(0, 0.5) * E
        t1 = rng.uniform(1e-15, 1e-13)
        sp = stationary_point(x1, xi1, t1, E, alpha(E), E0=E0)
        assert sp.E1() == pytest.approx(E, rel=1e-12)
        # chi at the stationary point equals the closed form
        c = chi(sp.p1_bar, sp.q1_bar, sp.t_bar, x1, xi1, t1, E, alpha(E), E0)
        assert c == pytest.approx(sp.chi1, rel=1e-9, abs=1e-6)


def test_gradient_vanishes_at_stationary_point():
    x1, xi1, t1, E = np.array([1e-7, 0, 1e-6]), np.array([0, 2e-8, 0]), 1e-14, 1e21
    ma, me = alpha()
    sp = stationary_point(x1, xi1, t1, E, (ma, me))
    tau = t1 - sp.t_bar
    # d chi/dp1 = x1 - p1 tau/m, d chi/dq1 = xi1 - q1 tau/me, d chi/dt = E1 - E
    assert np.allclose(x1 - sp.p1_bar * tau / ma, 0, atol=1e-12 * np.abs(x1).max())
    assert np.allclose(xi1 - sp.q1_bar * tau / me, 0, atol=1e-12 * np.abs(xi1).max())
    assert abs(sp.E1() - E) < 1e-12 * E


def test_reference_widths():
    sp = stationary_point([0, 0, 1e-6], [0, 0, 0], 1e-13, 1e21, alpha())
    assert sp.widths["dt"] == pytest.approx(1e-18, rel=1e-12)
    assert sp.widths["dt"] == pytest.approx(delta_t_chain(1e-6, 1e21, 1e9), rel=1e-12)
    assert sp.widths["dt_hessian"] == pytest.approx(sp.widths["dt"] / math.sqrt(2), rel=1e-12)


@pytest.mark.parametrize("factor", [2.0, 10.0])
def test_delta_t_scaling(factor):
    base = stationary_point([0, 0, 1e-6], [0, 0, 0], 1e-13, 1e21, alpha()).widths["dt"]
    # A grows as (z - Z)^2, so dt ~ (z - Z)^(1/2)
    far = stationary_point([0, 0, factor * 1e-6], [0, 0, 0], 1e-13, 1e21, alpha()).widths["dt"]
    assert far / base == pytest.approx(factor**0.5, rel=1e-12)
    # at fixed A, dt ~ E^(-3/4)
    hot = stationary_point([0, 0, 1e-6], [0, 0, 0], 1e-13, factor * 1e21, alpha()).widths["dt"]
    assert hot / base == pytest.approx(factor**-0.75, rel=1e-12)


def test_transverse_electron_term_negligible():
    ma = alpha()[0]
    A0 = A_coefficient([0, 0, 1e-6], [0, 0, 0], ma, ME)
    A1 = A_coefficient([0, 0, 1e-6], [0, 0, 1e-8], ma, ME)
    assert (A1 - A0) / A0 < 1e-7


def test_forms_and_errors():
    ma = alpha()[0]
    assert A_coefficient([0, 0, 1.0], [0, 0, 0], ma, ME, "printed") == pytest.approx(ma**2)
    with pytest.raises(ValidationError):
        A_coefficient([0, 0, 1.0], [0, 0, 0], ma, ME, "cubed")
    with pytest.raises(NoStationaryPointError):
        stationary_point([0, 0, 1e-6], [0, 0, 0], 1e-13, 1.0, alpha(), E0=2.0)
    with pytest.raises(NoStationaryPointError):
        stationary_point([0, 0, 0], [0, 0, 0], 1e-13, 1e21, alpha())


def test_phase_approximation_improves_with_mass_ratio():
    sp = stationary_point([0, 0, 1e-6], [0, 0, 1e-9], 1e-13, 1e21, alpha())
    assert sp.chi1_error < 1e-6


def test_compare_with_direct(ref):
    rep = compare_with_direct(*ref)
    v = rep.verdict
    assert v["t_only_good"] and v["full_worse"]
    assert rep.t_error == pytest.approx(0.036, abs=0.01)
    rows = list(rep.rows())
    assert len(rows) == 7 and rows[3][5] == pytest.approx(1.0)
