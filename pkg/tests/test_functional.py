import csv
import io
import json
import math

import pytest
from hypothesis import given, settings, strategies as st

from maxdrag.errors import ConvergenceError, InvalidParameterError
from maxdrag.functional import (CSV_HEADER, BodyDecomposition, QuadratureSpec, assemble_body_resistance,
                                evaluate_F, evaluate_F_adaptive, forward_backward_consistency,
                                write_estimates_csv)
from maxdrag.geometry import (make_canonical_zigzag, make_mushroom, make_rectangle, make_symmetric_polyline,
                              make_two_segment_line, make_two_segment_quadratic)
from maxdrag.reproduce import reference_shapes
from maxdrag.tracer import TraceLimits

SQRT2 = math.sqrt(2)


def test_triangle_value():
    est = evaluate_F(make_two_segment_line(1, 1), QuadratureSpec(1000, 1000))
    assert est.value == pytest.approx(SQRT2, abs=1e-3)
    assert est.discarded_fraction == 0 and est.samples == 10**6


def test_shallow_rectangle():
    assert evaluate_F(make_rectangle(1e-3), QuadratureSpec(1000, 1000)).value == pytest.approx(1, abs=2e-3)


def test_flat_cavity_is_one_up_to_midpoint_error():
    assert evaluate_F(make_symmetric_polyline([], m=1), QuadratureSpec(400, 400)).value == pytest.approx(1, abs=1e-9)


def test_optimal_two_segment_line():
    assert evaluate_F(make_two_segment_line(1.12, 1.12)).value == pytest.approx(1.42621, abs=1e-3)


def test_adaptive_examples():
    tri = evaluate_F_adaptive(make_two_segment_line(1, 1), 1e-4)
    assert tri.value == pytest.approx(SQRT2, abs=1e-3)
    assert tri.spec.n1 > 128
    flat = evaluate_F_adaptive(make_rectangle(1e-6), 1e-4)
    assert flat.value == pytest.approx(1, abs=1e-4)
    with pytest.raises(ConvergenceError) as info:
        evaluate_F_adaptive(make_two_segment_line(1.12, 1.12), 1e-9, cap=256)
    assert info.value.estimate.spec.n1 == 256
    with pytest.raises(InvalidParameterError):
        evaluate_F_adaptive(make_two_segment_line(1, 1), 0.0)


def test_adaptive_two_segment_line():
    est = evaluate_F_adaptive(make_two_segment_line(1.12, 1.12), 1e-4)
    assert est.value == pytest.approx(1.42621, abs=1e-3)


def test_discarded_orbits_use_mirror_fallback():
    deep = make_rectangle(50.0)
    capped = evaluate_F(deep, QuadratureSpec(100, 100), TraceLimits(max_reflections=5))
    assert capped.discarded_fraction > 0.5
    free = evaluate_F(deep, QuadratureSpec(100, 100), TraceLimits(max_reflections=10**6))
    assert free.discarded_fraction == 0
    assert capped.value != free.value


def test_mirror_symmetry():
    cav = make_two_segment_quadratic(-0.3, 1.2, 0.5, 0.8, 0.5)
    spec = QuadratureSpec(300, 300)
    assert evaluate_F(cav, spec).value == pytest.approx(evaluate_F(cav.mirrored(), spec).value, abs=1e-12)


def test_deterministic_repeat():
    cav = make_mushroom(0.1)
    spec = QuadratureSpec(300, 300)
    assert evaluate_F(cav, spec).value == evaluate_F(cav, spec).value


def test_forward_backward_examples():
    assert forward_backward_consistency(make_two_segment_line(1, 1), QuadratureSpec(2000, 2000)) < 5e-3
    assert forward_backward_consistency(make_mushroom(0.1), QuadratureSpec(2000, 2000)) < 1e-2
    assert forward_backward_consistency(make_rectangle(1e-3), QuadratureSpec(300, 300)) < 1e-6


def test_quadrature_spec_validation():
    with pytest.raises(InvalidParameterError):
        QuadratureSpec(0, 10)
    assert QuadratureSpec.square(7).samples == 49
    with pytest.raises(InvalidParameterError):
        evaluate_F("not a cavity", QuadratureSpec(2, 2))


def test_estimate_serialisation():
    est = evaluate_F(make_two_segment_line(1, 1), QuadratureSpec(50, 40))
    doc = json.loads(est.to_json())
    assert doc["spec"] == {"n1": 50, "n2": 40} and doc["value"] == est.value
    buf = io.StringIO()
    write_estimates_csv([est], buf)
    header, row = csv.reader(io.StringIO(buf.getvalue()))
    assert header == CSV_HEADER
    assert row[0] == est.label and row[1:3] == ["50", "40"]


def test_body_assembly_examples():
    assert assemble_body_resistance(BodyDecomposition(2 * math.pi, 1.0, ())) == pytest.approx(2 * math.pi)
    eps = math.pi / 180
    zig = assemble_body_resistance(BodyDecomposition(2 * math.pi * math.sin(eps) / eps, 0.0, ((1.0, SQRT2),)))
    assert zig / (2 * math.pi) == pytest.approx(SQRT2 * math.sin(eps) / eps, abs=1e-12)
    near = assemble_body_resistance(BodyDecomposition(3.0, 1e-9, ((1 - 1e-9, 1.5),)))
    assert near == pytest.approx(4.5, abs=1e-8)


def test_body_assembly_linear_and_validated():
    parts = ((0.25, 1.2), (0.25, 1.4))
    d = BodyDecomposition(2.0, 0.5, parts)
    assert assemble_body_resistance(d) == pytest.approx(2.0 * (0.5 + 0.3 + 0.35))
    assert assemble_body_resistance(BodyDecomposition(2.0, 0.5, ((0.25, 1.0), (0.25, 1.0)))) == 2.0
    for bad in [(2.0, 0.5, ((0.4, 1.2),)), (2.0, 0.5, ((0.5, 1.6),)), (0.0, 1.0, ()), (1.0, 1.2, ((-0.2, 1.0),))]:
        with pytest.raises(InvalidParameterError):
            BodyDecomposition(*bad)


@settings(max_examples=25, deadline=None)
@given(st.lists(st.floats(0.01, 3.0), min_size=1, max_size=5))
def test_bounds_on_random_polylines(heights):
    est = evaluate_F(make_symmetric_polyline(heights), QuadratureSpec(120, 120))
    assert 0.99 <= est.value <= 1.51


@pytest.mark.slow
@pytest.mark.parametrize("name", sorted(reference_shapes()))
def test_cauchy_refinement(name):
    cav = reference_shapes()[name]
    f1 = evaluate_F(cav, QuadratureSpec(2048, 2048)).value
    f2 = evaluate_F(cav, QuadratureSpec(4096, 4096)).value
    assert abs(f2 - f1) < 1e-3


def test_zigzag_small_psi_near_sqrt2():
    f = evaluate_F(make_canonical_zigzag(0.02, 6), QuadratureSpec(600, 600)).value
    assert f == pytest.approx(SQRT2, abs=2e-3)
