"""Cavity serialisation (JSON) and SVG export."""
from __future__ import annotations

import json
import math
from pathlib import Path

from .errors import InvalidCavityError
from .geometry import Cavity, EllipticArc, ParabolicArc, Segment

SVG_DIGITS = 6
SVG_MARGIN = 0.05


def piece_to_dict(piece) -> dict:
    if isinstance(piece, Segment):
        return {"type": "segment", "p0": list(piece.p0), "p1": list(piece.p1)}
    if isinstance(piece, ParabolicArc):
        return {"type": "parabola", "a": piece.a, "b": piece.b,
                "c0": piece.c0, "c1": piece.c1, "c2": piece.c2}
    if isinstance(piece, EllipticArc):
        return {"type": "ellipse", "center": list(piece.center), "rx": piece.rx, "ry": piece.ry,
                "theta0": piece.theta0, "theta1": piece.theta1}
    raise TypeError(f"unsupported boundary piece {type(piece).__name__}")


def piece_from_dict(d: dict):
    try:
        kind = d["type"]
        if kind == "segment":
            return Segment(tuple(d["p0"]), tuple(d["p1"]))
        if kind == "parabola":
            return ParabolicArc(*(float(d[k]) for k in ("a", "b", "c0", "c1", "c2")))
        if kind == "ellipse":
            return EllipticArc(tuple(d["center"]), float(d["rx"]), float(d["ry"]),
                               float(d["theta0"]), float(d["theta1"]))
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        if isinstance(exc, InvalidCavityError):
            raise
        raise InvalidCavityError(f"malformed boundary piece {d!r}: {exc}") from None
    raise InvalidCavityError(f"unknown piece type {d.get('type')!r}")


def cavity_to_dict(cavity: Cavity) -> dict:
    return {"label": cavity.label, "pieces": [piece_to_dict(p) for p in cavity.pieces]}


def cavity_from_dict(d: dict) -> Cavity:
    if not isinstance(d, dict) or not isinstance(d.get("pieces"), list):
        raise InvalidCavityError("cavity document needs a 'pieces' list")
    return Cavity(tuple(piece_from_dict(p) for p in d["pieces"]), str(d.get("label", "")))


def cavity_to_json(cavity: Cavity) -> str:
    return json.dumps(cavity_to_dict(cavity), indent=2)


def cavity_from_json(text: str) -> Cavity:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidCavityError(f"invalid cavity JSON: {exc}") from None
    return cavity_from_dict(doc)


def load_cavity(path) -> Cavity:
    """Read a cavity JSON file; a missing or unreadable file is an invalid shape."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InvalidCavityError(f"cannot read shape file {path}: {exc}") from None
    return cavity_from_json(text)


# ---------------------------------------------------------------- SVG

def _f(v: float) -> str:
    s = f"{v:.{SVG_DIGITS}f}"
    return "0.000000" if s == "-0.000000" else s


def _pt(x: float, y: float) -> str:
    # SVG's y axis points down
    return f"{_f(x)},{_f(-y)}"


def _parabola_path(p: ParabolicArc) -> str:
    # a quadratic Bezier reproduces the parabola exactly
    xm = 0.5 * (p.a + p.b)
    ym = p.height(p.a) + (p.c1 + 2 * p.c2 * p.a) * (xm - p.a)
    return f"M {_pt(*p.start)} Q {_pt(xm, ym)} {_pt(*p.end)}"


def _ellipse_path(e: EllipticArc) -> str:
    span = e.theta1 - e.theta0
    # split so that no single arc command spans a full turn; the y flip makes
    # increasing theta a sweep-flag-0 arc
    k = max(1, math.ceil(span / math.pi - 1e-12))
    cmds = [f"M {_pt(*e.start)}"]
    for i in range(1, k + 1):
        t = e.theta0 + span * i / k
        x, y = e.at(t)
        large = 1 if span / k > math.pi else 0
        cmds.append(f"A {_f(e.rx)} {_f(e.ry)} 0 {large} 0 {_pt(float(x), float(y))}")
    return " ".join(cmds)


def cavity_to_svg(cavity: Cavity) -> str:
    """SVG drawing of the boundary chain with the opening as a dashed baseline.

    Runs of consecutive segments become one ``polyline``; parabolic and
    elliptic pieces become one ``path`` each.  Output is byte-deterministic.
    """
    x0, y0, x1, y1 = cavity.bounds()
    span = max(x1 - x0, y1 - y0)
    pad = SVG_MARGIN * span
    vb = (x0 - pad, -(y1 + pad), (x1 - x0) + 2 * pad, (y1 - y0) + 2 * pad)
    sw = _f(0.004 * span)
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="{" ".join(_f(v) for v in vb)}">',
        f"<title>{_escape(cavity.label)}</title>",
        f'<line class="opening" x1="{_f(0.0)}" y1="{_f(0.0)}" x2="{_f(1.0)}" y2="{_f(0.0)}" '
        f'stroke="gray" stroke-width="{sw}" stroke-dasharray="{_f(0.02 * span)} {_f(0.01 * span)}"/>',
    ]
    style = f'fill="none" stroke="black" stroke-width="{sw}" stroke-linejoin="round"'
    run: list = []

    def flush():
        if run:
            pts = [run[0].p0] + [s.p1 for s in run]
            out.append(f'<polyline class="segments" points="{" ".join(_pt(*p) for p in pts)}" {style}/>')
            run.clear()

    for piece in cavity.pieces:
        if isinstance(piece, Segment):
            if run and math.dist(run[-1].p1, piece.p0) > 1e-12:
                flush()
            run.append(piece)
            continue
        flush()
        if isinstance(piece, ParabolicArc):
            out.append(f'<path class="parabola" d="{_parabola_path(piece)}" {style}/>')
        else:
            out.append(f'<path class="ellipse" d="{_ellipse_path(piece)}" {style}/>')
    flush()
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _escape(s: str) -> str:
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
