import json
import re
import xml.etree.ElementTree as ET

import pytest

from maxdrag.errors import InvalidCavityError
from maxdrag.geometry import (make_canonical_zigzag, make_mushroom, make_rectangle, make_two_segment_line,
                              make_two_segment_quadratic)
from maxdrag.io import (cavity_from_dict, cavity_from_json, cavity_to_json, cavity_to_svg, load_cavity,
                        piece_from_dict)

NS = "{http://www.w3.org/2000/svg}"
SHAPES = [
    make_two_segment_line(0.7, 2.3),
    make_two_segment_quadratic(-0.486, 1.361, -0.486, 1.361),
    make_mushroom(0.1),
    make_canonical_zigzag(0.6835, 10),
]


@pytest.mark.parametrize("cav", SHAPES, ids=lambda c: c.label)
def test_json_round_trip(cav):
    back = cavity_from_json(cavity_to_json(cav))
    assert back.label == cav.label
    assert [type(p) for p in back.pieces] == [type(p) for p in cav.pieces]
    for p, q in zip(cav.pieces, back.pieces):
        assert p.start == q.start and p.end == q.end


def test_load_cavity(tmp_path):
    f = tmp_path / "tri.json"
    f.write_text(cavity_to_json(make_two_segment_line(1, 1)))
    assert len(load_cavity(f).pieces) == 2
    with pytest.raises(InvalidCavityError):
        load_cavity(tmp_path / "missing.json")


@pytest.mark.parametrize("doc", [
    "not json",
    json.dumps([1, 2]),
    json.dumps({"pieces": [{"type": "spline"}]}),
    json.dumps({"pieces": [{"type": "segment", "p0": [0, 0]}]}),
    json.dumps({"pieces": [{"type": "segment", "p0": [0, 0], "p1": [0.5, 0.5]}]}),
])
def test_malformed_documents(doc):
    with pytest.raises(InvalidCavityError):
        cavity_from_json(doc)


def test_piece_from_dict_bad_numbers():
    with pytest.raises(InvalidCavityError):
        piece_from_dict({"type": "parabola", "a": 0, "b": "x", "c0": 0, "c1": 0, "c2": 0})
    with pytest.raises(InvalidCavityError):
        cavity_from_dict({"label": "no pieces"})


def _segments_in(root):
    n = 0
    for pl in root.iter(NS + "polyline"):
        n += len(pl.get("points").split()) - 1
    return n


def test_mushroom_svg_structure():
    root = ET.fromstring(cavity_to_svg(make_mushroom(0.1)))
    paths = list(root.iter(NS + "path"))
    assert [p.get("class") for p in paths] == ["ellipse"]
    assert " A " in paths[0].get("d")
    assert _segments_in(root) == 4
    (line,) = root.iter(NS + "line")
    assert line.get("class") == "opening" and line.get("stroke-dasharray")


def test_zigzag_svg_is_one_polyline():
    root = ET.fromstring(cavity_to_svg(make_canonical_zigzag(0.6835, 10)))
    (pl,) = root.iter(NS + "polyline")
    assert len(pl.get("points").split()) == 11
    assert not list(root.iter(NS + "path"))


def test_parabola_svg_uses_quadratic_bezier():
    root = ET.fromstring(cavity_to_svg(make_two_segment_quadratic(-1, 1, -1, 1)))
    paths = list(root.iter(NS + "path"))
    assert len(paths) == 2 and all(" Q " in p.get("d") for p in paths)


@pytest.mark.parametrize("cav", SHAPES, ids=lambda c: c.label)
def test_svg_is_deterministic_with_fixed_precision(cav):
    a, b = cavity_to_svg(cav), cavity_to_svg(cav)
    assert a == b
    nums = re.findall(r"-?\d+\.\d+", a.split("<title>")[1].split("</title>", 1)[1])
    assert nums and all(len(n.split(".")[1]) == 6 for n in nums)
    assert "-0.000000" not in a


def test_viewbox_has_margin():
    root = ET.fromstring(cavity_to_svg(make_rectangle(1.0)))
    x, y, w, h = map(float, root.get("viewBox").split())
    assert (x, y, w, h) == pytest.approx((-0.05, -1.05, 1.1, 1.1))
