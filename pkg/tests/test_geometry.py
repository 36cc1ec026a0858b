import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from maxdrag.errors import InvalidCavityError, InvalidParameterError
from maxdrag.geometry import (CHAIN_TOL, Cavity, EllipticArc, ParabolicArc, Segment, build_cavity,
                              canonical_family, family_arity, make_canonical_zigzag, make_mushroom,
                              make_piecewise_quadratic, make_rectangle, make_symmetric_polyline,
                              make_two_segment_line, make_two_segment_quadratic)


def _vertices(cav):
    return [cav.pieces[0].start] + [p.end for p in cav.pieces]


@pytest.mark.parametrize("alpha,beta,apex", [
    (1.0, 1.0, (0.5, 0.5)),
    (1.12, 1.12, (0.5, 0.56)),
    (2.0, 1.0, (1 / 3, 2 / 3)),
])
def test_two_segment_line_apex(alpha, beta, apex):
    cav = make_two_segment_line(alpha, beta)
    v = _vertices(cav)
    assert v[0] == (0.0, 0.0) and v[-1] == (1.0, 0.0)
    assert v[1].x1 == pytest.approx(apex[0], abs=1e-12)
    assert v[1].x2 == pytest.approx(apex[1], abs=1e-12)
    # the apex lies on both lines x2 = alpha x1 and x2 = beta (1 - x1)
    assert abs(v[1].x2 - alpha * v[1].x1) < 1e-12
    assert abs(v[1].x2 - beta * (1 - v[1].x1)) < 1e-12


@pytest.mark.parametrize("alpha,beta", [(0, 1), (-1, 1), (1, math.inf), (math.nan, 1)])
def test_two_segment_line_rejects(alpha, beta):
    with pytest.raises(InvalidParameterError):
        make_two_segment_line(alpha, beta)


def test_quadratic_degenerates_to_triangle():
    cav = make_two_segment_quadratic(0, 1, 0, 1, 0.5)
    assert cav.pieces[0].end == pytest.approx((0.5, 0.5))
    assert all(p.c2 == 0 for p in cav.pieces)


def test_quadratic_parabola_apex():
    cav = make_two_segment_quadratic(-1, 1, -1, 1, 0.5)
    left, right = cav.pieces
    for x in np.linspace(0, 0.5, 11):
        assert left.height(x) == pytest.approx(-x * x + x, abs=1e-15)
    for x in np.linspace(0.5, 1, 11):
        assert right.height(x) == pytest.approx(-x * x + x, abs=1e-15)
    assert left.end == pytest.approx((0.5, 0.25))


def test_quadratic_rejects_discontinuity_and_negativity():
    with pytest.raises(InvalidParameterError):
        make_two_segment_quadratic(0, 1, 0, 2, 0.5)
    # continuous at 1/2 but dips below the axis near x = 0
    with pytest.raises(InvalidParameterError):
        make_two_segment_quadratic(3, -1, 1, 0, 0.5)


def test_symmetric_polyline():
    flat = make_symmetric_polyline([], m=1)
    assert flat.is_flat
    tri = make_symmetric_polyline([0.5])
    assert _vertices(tri) == [(0, 0), (0.5, 0.5), (1, 0)]
    odd = make_symmetric_polyline([0.2, 0.3], m=5)
    ys = [p.x2 for p in _vertices(odd)]
    assert ys == [0, 0.2, 0.3, 0.3, 0.2, 0]
    with pytest.raises(InvalidParameterError):
        make_symmetric_polyline([-0.1])
    with pytest.raises(InvalidParameterError):
        make_symmetric_polyline([0.1], m=4)


@pytest.mark.parametrize("psi,m", [(0.6835, 10), (0.3, 2), (1.2, 8), (math.pi / 2, 2), (0.01, 50)])
def test_canonical_zigzag_right_angles(psi, m):
    v = np.array(_vertices(make_canonical_zigzag(psi, m)))
    assert len(v) == m + 1
    for i in range(1, m, 2):
        d1, d2 = v[i - 1] - v[i], v[i + 1] - v[i]
        assert abs(np.dot(d1, d2)) < 1e-10
        mid = 0.5 * (v[i - 1] + v[i + 1])
        assert abs(mid[0] - v[i][0]) < 1e-10


def test_canonical_zigzag_semicircle_and_small_psi():
    v = _vertices(make_canonical_zigzag(math.pi / 2, 2))
    assert v[1] == pytest.approx((0.5, 0.5), abs=1e-12)
    v = _vertices(make_canonical_zigzag(1e-6, 2))
    assert v[1] == pytest.approx((0.5, 0.5), abs=1e-6)


def test_canonical_zigzag_breakpoints_and_errors():
    cav = make_canonical_zigzag(0.6835, 4, [0.0, 0.3, 1.0])
    assert cav.pieces[1].end.x1 == pytest.approx(0.3)
    for bad in [(0.5, 3), (0.0, 2), (2.0, 2)]:
        with pytest.raises(InvalidParameterError):
            make_canonical_zigzag(*bad)
    with pytest.raises(InvalidParameterError):
        make_canonical_zigzag(0.5, 4, [0.0, 0.6, 0.4])


@pytest.mark.parametrize("eps", [0.5, 0.1, 0.01])
def test_mushroom_focal_property(eps):
    cav = make_mushroom(eps)
    arcs = [p for p in cav.pieces if isinstance(p, EllipticArc)]
    assert len(arcs) == 1 and len(cav.pieces) == 5
    e = arcs[0]
    assert e.rx == pytest.approx(1 / eps)
    assert e.ry == pytest.approx(math.sqrt(1 / eps**2 - 0.25))
    c = math.sqrt(e.rx**2 - e.ry**2)
    foci = [(e.center.x1 - c, e.center.x2), (e.center.x1 + c, e.center.x2)]
    assert foci[0] == pytest.approx((0.0, eps), abs=1e-12)
    assert foci[1] == pytest.approx((1.0, eps), abs=1e-12)
    pts = e.sample(200)
    sums = np.hypot(*(pts - foci[0]).T) + np.hypot(*(pts - foci[1]).T)
    assert np.max(np.abs(sums - 2 / eps)) < 1e-9


def test_mushroom_half_stem_example():
    e = [p for p in make_mushroom(0.5).pieces if isinstance(p, EllipticArc)][0]
    assert (e.rx, e.ry) == pytest.approx((2.0, math.sqrt(3.75)))


@pytest.mark.parametrize("eps", [0.0, 1.0, 1.5, -0.1])
def test_mushroom_rejects(eps):
    with pytest.raises(InvalidParameterError):
        make_mushroom(eps)


def test_rectangle():
    cav = make_rectangle(1.0)
    assert _vertices(cav) == [(0, 0), (0, 1), (1, 1), (1, 0)]
    with pytest.raises(InvalidParameterError):
        make_rectangle(0.0)


def test_chain_validation():
    with pytest.raises(InvalidCavityError):
        Cavity((Segment((0, 0), (0.5, 0.5)), Segment((0.5, 0.6), (1, 0))))
    with pytest.raises(InvalidCavityError):
        Cavity((Segment((0, 0), (0.5, -0.5)), Segment((0.5, -0.5), (1, 0))))
    # self-intersecting bow tie
    with pytest.raises(InvalidCavityError):
        Cavity((Segment((0, 0), (1, 1)), Segment((1, 1), (0, 1)), Segment((0, 1), (1, 0))))
    with pytest.raises(InvalidCavityError):
        Segment((0.2, 0.2), (0.2, 0.2))
    with pytest.raises(InvalidCavityError):
        ParabolicArc(0.5, 0.5, 0, 0, 0)
    with pytest.raises(InvalidCavityError):
        EllipticArc((0, 0), 1, 1, 1.0, 0.5)


def test_wall_lying_on_the_opening_is_rejected():
    with pytest.raises(InvalidCavityError):
        make_symmetric_polyline([0.0, 0.0, 1.0])
    # touching the opening at a single interior vertex splits it into two cavities
    assert not make_symmetric_polyline([0.5, 0.0, 0.5]).is_flat


def test_chain_tolerance_accepts_tiny_gaps():
    gap = 0.5 * CHAIN_TOL
    cav = Cavity((Segment((0, 0), (0.5, 0.5)), Segment((0.5 + gap, 0.5), (1, 0))))
    assert len(cav.junctions()) == 3


def test_mirror_is_involution():
    cav = make_two_segment_quadratic(-0.3, 1.2, 0.5, 0.8, 0.5)
    back = cav.mirrored().mirrored()
    for p, q in zip(cav.pieces, back.pieces):
        assert p.start == pytest.approx(q.start) and p.end == pytest.approx(q.end)


def test_piecewise_quadratic_reduces_to_two_segment():
    k, h1 = -0.486, 0.5 * (1.361 - 0.5 * 0.486)
    pq = make_piecewise_quadratic([k, h1], 2)
    tq = make_two_segment_quadratic(-0.486, 1.361, -0.486, 1.361)
    for x in np.linspace(0, 0.5, 7):
        assert pq.pieces[0].height(x) == pytest.approx(tq.pieces[0].height(x), abs=1e-12)


def test_family_dispatch():
    assert family_arity("TwoSegmentLine") == 2
    assert canonical_family("SymmetricPiecewiseQuadratic") == "piecewise-quadratic"
    assert family_arity("piecewise-quadratic", 5) == 5
    assert family_arity("symmetric-polyline", 10) == 5
    cav = build_cavity("symmetric-two-segment-line", [1.0])
    assert _vertices(cav)[1] == pytest.approx((0.5, 0.5))
    with pytest.raises(InvalidParameterError):
        build_cavity("nope", [1.0])
    with pytest.raises(InvalidParameterError):
        build_cavity("mushroom", [0.1, 0.2])
    with pytest.raises(InvalidParameterError):
        family_arity("symmetric-polyline")


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(1e-3, 2.0), min_size=0, max_size=6))
def test_polyline_invariants(heights):
    cav = make_symmetric_polyline(heights, m=2 * len(heights) or 1)
    pts = cav.polyline()
    assert tuple(pts[0]) == (0.0, 0.0) and tuple(pts[-1]) == (1.0, 0.0)
    assert pts[:, 1].min() >= 0.0
    assert np.allclose(pts[::-1, 1], pts[:, 1])


@settings(max_examples=60, deadline=None)
@given(st.floats(0.05, 10.0), st.floats(0.05, 10.0))
def test_two_segment_invariants(a, b):
    v = _vertices(make_two_segment_line(a, b))
    assert v[1].x1 == pytest.approx(b / (a + b))
    assert v[1].x2 > 0
