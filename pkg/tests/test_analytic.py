import math

import numpy as np
import pytest

from maxdrag.analytic import (F_psi, F_psi_argmax, appendix2_integrals, jacobian_a3, mushroom_bound,
                              phi_from_arc, rectangle_F, triangle_F, xi_from_arc)
from maxdrag.errors import InvalidParameterError
from maxdrag.functional import QuadratureSpec, evaluate_F
from maxdrag.geometry import make_rectangle
from maxdrag.reproduce import jacobian_fd_error, triangle_integrals_numeric
from maxdrag.tracer import TraceLimits

SQRT2 = math.sqrt(2)


def test_triangle_terms():
    t = triangle_F()
    assert t.term_I == t.term_II == pytest.approx(0.396447, abs=1e-6)
    assert t.term_III == pytest.approx(0.621320, abs=1e-6)
    assert t.total == pytest.approx(SQRT2, abs=1e-15)


def test_triangle_terms_match_quadrature():
    numeric = triangle_integrals_numeric()
    for a, b in zip(triangle_F(), numeric):
        assert abs(a - b) < 1e-6


@pytest.mark.parametrize("psi,expected,tol", [
    (0.0, SQRT2, 0.0),
    (1e-6, SQRT2, 1e-5),
    (0.6835, 1.445209, 1e-6),
    (math.pi / 2, 1 + 1 / 6 + 2 - 0.5 - math.pi / 2, 1e-12),
])
def test_F_psi_values(psi, expected, tol):
    assert abs(F_psi(psi) - expected) <= tol


def test_F_psi_domain():
    for bad in (-0.1, 1.6):
        with pytest.raises(InvalidParameterError):
            F_psi(bad)


def test_argmax():
    psi, val = F_psi_argmax()
    assert psi == pytest.approx(0.6835, abs=5e-4)
    assert val == pytest.approx(1.445209, abs=1e-6)
    assert val > F_psi(psi - 0.01) and val > F_psi(psi + 0.01)


def test_four_term_decomposition():
    grid = np.linspace(1e-3, math.pi / 2, 1000)
    dev = 0.0
    for psi in grid:
        t = appendix2_integrals(psi)
        assert t.I == t.III
        dev = max(dev, abs(t.total - F_psi(psi)))
    assert dev < 1e-12
    assert appendix2_integrals(0.6835).total == pytest.approx(1.445209, abs=1e-6)
    assert appendix2_integrals(math.pi / 2).total == pytest.approx(1.095870, abs=1e-6)
    with pytest.raises(InvalidParameterError):
        appendix2_integrals(0.0)


def test_mushroom_bound_examples():
    assert mushroom_bound(0.01)[1] == pytest.approx(1.4701, abs=1e-4)
    assert mushroom_bound(0.1)[1] == pytest.approx(1.2119, abs=1e-4)
    stem, lower = mushroom_bound(1e-4)
    assert stem < 1e-3 and abs(lower - 1.5) < 1e-3
    for bad in (0.0, 1.0, -0.5):
        with pytest.raises(InvalidParameterError):
            mushroom_bound(bad)


def test_mushroom_bound_monotone_below_limit():
    vals = [mushroom_bound(e)[1] for e in np.linspace(1e-4, 0.5, 500)]
    assert max(vals) < 1.5
    assert all(a > b for a, b in zip(vals, vals[1:]))


def test_jacobian_examples():
    assert jacobian_a3(0.0, math.pi / 2, math.pi / 2) == pytest.approx(-0.25)
    rng = np.random.default_rng(2)
    for _ in range(20):
        psi = rng.uniform(0.1, 1.5)
        a, b = rng.uniform(-psi, psi), rng.uniform(psi, math.pi)
        assert jacobian_a3(a, b, psi) == pytest.approx(-jacobian_a3(b, a, psi))
    with pytest.raises(InvalidParameterError):
        jacobian_a3(0.5, -0.5, 0.7)


def test_jacobian_matches_finite_differences():
    assert jacobian_fd_error(psi=0.7, n=100, seed=0) < 1e-6
    assert jacobian_fd_error(psi=1.3, n=100, seed=4) < 1e-6


def test_chord_maps_land_in_entry_domain():
    psi = 0.6835
    rng = np.random.default_rng(9)
    for _ in range(200):
        a = rng.uniform(-psi, psi)
        b = rng.uniform(psi + 1e-3, math.pi) * rng.choice([-1, 1])
        phi = phi_from_arc(a, b)
        assert -math.pi / 2 <= phi <= math.pi / 2
        xi = xi_from_arc(a, b, psi)
        assert np.isfinite(xi)


@pytest.mark.parametrize("h", [0.05, 0.5, 2.0])
def test_rectangle_closed_form_matches_billiard(h):
    exact = rectangle_F(h)
    numeric = evaluate_F(make_rectangle(h), QuadratureSpec(600, 600), TraceLimits(100_000)).value
    assert numeric == pytest.approx(exact, abs=2e-3)
    with pytest.raises(InvalidParameterError):
        rectangle_F(0.0)
