"""Standard cavities: boundary pieces, shape-family constructors and validation.

A cavity is an ordered chain of boundary pieces running from (0, 0) to
(1, 0) above the opening I = [0, 1] x {0}.  Pieces are segments,
parabolic arcs (graphs x2 = c0 + c1*x1 + c2*x1**2 over [a, b]) and
axis-aligned elliptic arcs.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence, Union

import numpy as np

from .errors import InvalidCavityError, InvalidParameterError

# Chain closure tolerance, shared by every constructor.
CHAIN_TOL = 1e-12

_CURVE_SAMPLES = 64
_PROFILE_SAMPLES = 1000


class Point2(NamedTuple):
    x1: float
    x2: float


def _point(p) -> Point2:
    x1, x2 = float(p[0]), float(p[1])
    if not (math.isfinite(x1) and math.isfinite(x2)):
        raise InvalidCavityError(f"non-finite point {p!r}")
    return Point2(x1, x2)


@dataclass(frozen=True)
class Segment:
    p0: Point2
    p1: Point2

    def __post_init__(self):
        object.__setattr__(self, "p0", _point(self.p0))
        object.__setattr__(self, "p1", _point(self.p1))
        if math.dist(self.p0, self.p1) == 0.0:
            raise InvalidCavityError("segment endpoints coincide")

    @property
    def start(self) -> Point2:
        return self.p0

    @property
    def end(self) -> Point2:
        return self.p1

    def sample(self, n: int = 2) -> np.ndarray:
        s = np.linspace(0.0, 1.0, max(n, 2))[:, None]
        return (1 - s) * np.asarray(self.p0) + s * np.asarray(self.p1)

    def mirrored(self) -> "Segment":
        return Segment((1 - self.p1.x1, self.p1.x2), (1 - self.p0.x1, self.p0.x2))


@dataclass(frozen=True)
class ParabolicArc:
    """Graph of x2 = c0 + c1*x1 + c2*x1**2 over a <= x1 <= b."""

    a: float
    b: float
    c0: float
    c1: float
    c2: float

    def __post_init__(self):
        vals = [self.a, self.b, self.c0, self.c1, self.c2]
        if not all(math.isfinite(v) for v in vals):
            raise InvalidCavityError("non-finite parabola coefficient")
        if not self.a < self.b:
            raise InvalidCavityError(f"parabola interval [{self.a}, {self.b}] is empty")

    def height(self, x):
        return self.c0 + self.c1 * x + self.c2 * x * x

    @property
    def start(self) -> Point2:
        return Point2(float(self.a), float(self.height(self.a)))

    @property
    def end(self) -> Point2:
        return Point2(float(self.b), float(self.height(self.b)))

    def sample(self, n: int = _CURVE_SAMPLES) -> np.ndarray:
        x = np.linspace(self.a, self.b, n)
        return np.column_stack([x, self.height(x)])

    def mirrored(self) -> "ParabolicArc":
        # q(1 - x) expanded
        c0 = self.c0 + self.c1 + self.c2
        c1 = -self.c1 - 2 * self.c2
        return ParabolicArc(1 - self.b, 1 - self.a, c0, c1, self.c2)


@dataclass(frozen=True)
class EllipticArc:
    """Arc of (c1 + rx cos t, c2 + ry sin t) for theta0 <= t <= theta1."""

    center: Point2
    rx: float
    ry: float
    theta0: float
    theta1: float

    def __post_init__(self):
        object.__setattr__(self, "center", _point(self.center))
        if not (self.rx > 0 and self.ry > 0):
            raise InvalidCavityError("ellipse semi-axes must be positive")
        if not self.theta0 < self.theta1:
            raise InvalidCavityError("ellipse angular range is empty")

    def at(self, theta):
        return (self.center.x1 + self.rx * np.cos(theta), self.center.x2 + self.ry * np.sin(theta))

    @property
    def start(self) -> Point2:
        return Point2(*map(float, self.at(self.theta0)))

    @property
    def end(self) -> Point2:
        return Point2(*map(float, self.at(self.theta1)))

    def sample(self, n: int = _CURVE_SAMPLES) -> np.ndarray:
        t = np.linspace(self.theta0, self.theta1, n)
        return np.column_stack(self.at(t))

    def mirrored(self) -> "EllipticArc":
        return EllipticArc(
            (1 - self.center.x1, self.center.x2), self.rx, self.ry,
            math.pi - self.theta1, math.pi - self.theta0,
        )


BoundaryPiece = Union[Segment, ParabolicArc, EllipticArc]


@dataclass(frozen=True)
class Cavity:
    pieces: tuple
    label: str = ""
    _path: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "pieces", tuple(self.pieces))
        if not self.pieces:
            raise InvalidCavityError("cavity has no boundary pieces")
        object.__setattr__(self, "_path", _walk_chain(self.pieces, _CURVE_SAMPLES))
        _check_simple(self)

    @property
    def is_flat(self) -> bool:
        """True when the whole boundary lies on the opening (zero-area cavity)."""
        return bool(np.all(np.abs(self._path[:, 1]) <= CHAIN_TOL))

    def polyline(self, n: int = _CURVE_SAMPLES) -> np.ndarray:
        """Chain vertices, curved pieces sampled with ``n`` points, in chain order."""
        return _walk_chain(self.pieces, n)

    def junctions(self) -> list[Point2]:
        pts = [Point2(0.0, 0.0)]
        for piece in self.pieces:
            for p in (piece.start, piece.end):
                if math.dist(p, pts[-1]) > CHAIN_TOL:
                    pts.append(p)
        return pts

    def bounds(self) -> tuple[float, float, float, float]:
        pts = np.vstack([piece.sample(257) for piece in self.pieces] + [np.array([[0.0, 0.0], [1.0, 0.0]])])
        lo, hi = pts.min(axis=0), pts.max(axis=0)
        return float(lo[0]), float(lo[1]), float(hi[0]), float(hi[1])

    def mirrored(self) -> "Cavity":
        """Image under x1 -> 1 - x1."""
        return Cavity(tuple(p.mirrored() for p in reversed(self.pieces)), self.label + "-mirror")


def _walk_chain(pieces: Sequence, n: int = 2) -> np.ndarray:
    """Follow pieces from (0,0) to (1,0), accepting either piece orientation."""
    current = np.array([0.0, 0.0])
    out = [current]
    for k, piece in enumerate(pieces):
        pts = piece.sample(n if not isinstance(piece, Segment) else 2)
        if np.linalg.norm(pts[0] - current) <= CHAIN_TOL:
            pass
        elif np.linalg.norm(pts[-1] - current) <= CHAIN_TOL:
            pts = pts[::-1]
        else:
            raise InvalidCavityError(f"piece {k} does not connect to {tuple(current)}")
        out.extend(pts[1:])
        current = pts[-1]
    if np.linalg.norm(current - np.array([1.0, 0.0])) > CHAIN_TOL:
        raise InvalidCavityError(f"chain ends at {tuple(current)}, not (1, 0)")
    return np.array(out)


def _check_simple(cavity: Cavity) -> None:
    path = cavity._path
    if path[:, 1].min() < -CHAIN_TOL:
        raise InvalidCavityError("boundary dips below x2 = 0")
    if cavity.is_flat:
        return
    if _has_crossing(path):
        raise InvalidCavityError("boundary chain intersects itself or the opening")


def _cross(ax, ay, bx, by):
    return ax * by - ay * bx


def _has_crossing(ring: np.ndarray) -> bool:
    """Proper crossings or collinear overlaps between non-adjacent edges of the closed ring.

    The ring is the chain plus the closing edge (1,0)->(0,0).  Touching at a
    single point is tolerated (a profile may rest on the opening).
    """
    pts = np.vstack([ring, ring[:1]])
    a, b = pts[:-1], pts[1:]
    keep = np.linalg.norm(b - a, axis=1) > 0
    a, b = a[keep], b[keep]
    m = len(a)
    i, j = np.triu_indices(m, k=2)
    wrap = (i == 0) & (j == m - 1)
    i, j = i[~wrap], j[~wrap]
    p, r = a[i], b[i] - a[i]
    q, s = a[j], b[j] - a[j]
    scale = np.maximum(np.abs(r).max(axis=1), np.abs(s).max(axis=1))
    d1 = _cross(r[:, 0], r[:, 1], q[:, 0] - p[:, 0], q[:, 1] - p[:, 1])
    d2 = _cross(r[:, 0], r[:, 1], q[:, 0] + s[:, 0] - p[:, 0], q[:, 1] + s[:, 1] - p[:, 1])
    d3 = _cross(s[:, 0], s[:, 1], p[:, 0] - q[:, 0], p[:, 1] - q[:, 1])
    d4 = _cross(s[:, 0], s[:, 1], p[:, 0] + r[:, 0] - q[:, 0], p[:, 1] + r[:, 1] - q[:, 1])
    eps = 1e-14 * scale * scale
    proper = (d1 * d2 < -eps * eps) & (d3 * d4 < -eps * eps)
    proper &= (np.abs(d1) > eps) & (np.abs(d2) > eps) & (np.abs(d3) > eps) & (np.abs(d4) > eps)
    if proper.any():
        return True
    # collinear overlap of positive length
    col = (np.abs(d1) <= eps) & (np.abs(d2) <= eps)
    for k in np.flatnonzero(col):
        rr = r[k] / np.dot(r[k], r[k])
        t0 = np.dot(q[k] - p[k], rr)
        t1 = np.dot(q[k] + s[k] - p[k], rr)
        lo, hi = min(t0, t1), max(t0, t1)
        if min(hi, 1.0) - max(lo, 0.0) > 1e-12:
            return True
    return False


# --------------------------------------------------------------------------
# shape families

def _positive(name, value):
    value = float(value)
    if not (math.isfinite(value) and value > 0):
        raise InvalidParameterError(f"{name} must be positive and finite, got {value}")
    return value


def make_two_segment_line(alpha: float, beta: float) -> Cavity:
    """Broken line alpha*x on [0, xi0], beta*(1 - x) on [xi0, 1]."""
    alpha = _positive("alpha", alpha)
    beta = _positive("beta", beta)
    xi0 = beta / (alpha + beta)
    apex = (xi0, alpha * xi0)
    return Cavity(
        (Segment((0.0, 0.0), apex), Segment(apex, (1.0, 0.0))),
        label=f"two-segment-line(alpha={alpha:g},beta={beta:g})",
    )


def make_two_segment_quadratic(a1: float, b1: float, a2: float, b2: float, xi0: float = 0.5) -> Cavity:
    """Profile a1*x**2 + b1*x on [0, xi0] and a2*(1-x)**2 + b2*(1-x) on [xi0, 1]."""
    a1, b1, a2, b2, xi0 = map(float, (a1, b1, a2, b2, xi0))
    if not all(math.isfinite(v) for v in (a1, b1, a2, b2, xi0)):
        raise InvalidParameterError("non-finite coefficient")
    if not 0 < xi0 < 1:
        raise InvalidParameterError(f"xi0 must lie in (0, 1), got {xi0}")
    left = a1 * xi0**2 + b1 * xi0
    right = a2 * (1 - xi0) ** 2 + b2 * (1 - xi0)
    if abs(left - right) > 1e-9:
        raise InvalidParameterError(f"profile is discontinuous at xi0: {left} != {right}")
    pieces = (
        ParabolicArc(0.0, xi0, 0.0, b1, a1),
        ParabolicArc(xi0, 1.0, a2 + b2, -2 * a2 - b2, a2),
    )
    _check_profile_nonnegative(pieces)
    return Cavity(pieces, label=f"two-segment-quadratic({a1:g},{b1:g},{a2:g},{b2:g},{xi0:g})")


def _check_profile_nonnegative(pieces: Sequence[ParabolicArc]) -> None:
    for piece in pieces:
        x = np.linspace(piece.a, piece.b, _PROFILE_SAMPLES)
        lowest = piece.height(x).min()
        if piece.c2 != 0:
            xv = -piece.c1 / (2 * piece.c2)
            if piece.a <= xv <= piece.b:
                lowest = min(lowest, piece.height(xv))
        if lowest < -CHAIN_TOL:
            raise InvalidParameterError(f"profile is negative on [{piece.a}, {piece.b}] (min {lowest:.3g})")


def make_symmetric_polyline(heights: Sequence[float], m: int | None = None) -> Cavity:
    """Symmetric broken line over vertices x1 = i/m.

    ``heights`` are the interior vertex heights for i = 1..floor(m/2); they are
    mirrored about x1 = 1/2.  ``m`` defaults to ``2*len(heights)``.
    """
    h = np.asarray(heights, dtype=float).ravel()
    if m is None:
        m = max(1, 2 * len(h))
    m = int(m)
    if m < 1:
        raise InvalidParameterError("m must be at least 1")
    if len(h) != m // 2:
        raise InvalidParameterError(f"m={m} needs {m // 2} heights, got {len(h)}")
    if not np.all(np.isfinite(h)):
        raise InvalidParameterError("non-finite height")
    if np.any(h < 0):
        raise InvalidParameterError("heights must be nonnegative")
    y = np.zeros(m + 1)
    y[1 : m // 2 + 1] = h
    y[m - np.arange(1, m // 2 + 1)] = h
    x = np.arange(m + 1) / m
    pts = list(zip(x, y))
    pieces = tuple(Segment(pts[i], pts[i + 1]) for i in range(m))
    return Cavity(pieces, label=f"symmetric-polyline(m={m})")


def arc_point(alpha, psi):
    """Point at angular parameter alpha on the circular arc of half-angle psi over I.

    alpha = -psi gives (0, 0), alpha = psi gives (1, 0), alpha = 0 the top.
    """
    s = 2.0 * math.sin(psi)
    x1 = 2.0 * np.sin((psi + alpha) / 2) * np.cos((psi - alpha) / 2) / s
    x2 = 2.0 * np.sin((psi + alpha) / 2) * np.sin((psi - alpha) / 2) / s
    return x1, x2


def make_canonical_zigzag(psi: float, m: int, breakpoints: Sequence[float] | None = None) -> Cavity:
    """Legs of canonical right triangles erected over a partition of a circular arc.

    The arc has angular size 2*psi and chord I.  By default the m/2 sub-arcs
    are equal in angle; ``breakpoints`` instead gives the abscissas
    0 = x^0 < x^2 < ... < x^m = 1 of the partition points.
    """
    psi = float(psi)
    if not 0 < psi <= math.pi / 2:
        raise InvalidParameterError(f"psi must lie in (0, pi/2], got {psi}")
    if int(m) != m or m < 2 or m % 2:
        raise InvalidParameterError(f"m must be an even integer >= 2, got {m}")
    m = int(m)
    k = m // 2
    if breakpoints is None:
        alphas = np.linspace(-psi, psi, k + 1)
    else:
        xs = np.asarray(breakpoints, dtype=float)
        if len(xs) != k + 1 or xs[0] != 0.0 or xs[-1] != 1.0 or np.any(np.diff(xs) <= 0):
            raise InvalidParameterError("breakpoints must increase strictly from 0 to 1, m/2 + 1 values")
        alphas = np.arcsin(np.clip((2 * xs - 1) * math.sin(psi), -1, 1))
        alphas[0], alphas[-1] = -psi, psi
    px, py = arc_point(alphas, psi)
    px[0], py[0], px[-1], py[-1] = 0.0, 0.0, 1.0, 0.0
    verts = [(px[0], py[0])]
    for i in range(k):
        dx, dy = px[i + 1] - px[i], py[i + 1] - py[i]
        apex = ((px[i] + px[i + 1]) / 2, (py[i] + py[i + 1]) / 2 + 0.5 * math.hypot(dx, dy))
        verts += [apex, (px[i + 1], py[i + 1])]
    pieces = tuple(Segment(verts[i], verts[i + 1]) for i in range(m))
    return Cavity(pieces, label=f"canonical-zigzag(psi={psi:g},m={m})")


def make_mushroom(eps: float) -> Cavity:
    """Stem [0,1] x [0,eps] under a semi-elliptic cap with foci (0,eps), (1,eps)."""
    eps = float(eps)
    if not 0 < eps < 1:
        raise InvalidParameterError(f"eps must lie in (0, 1), got {eps}")
    rx = 1.0 / eps
    ry = math.sqrt(rx * rx - 0.25)
    left, right = 0.5 - rx, 0.5 + rx
    pieces = (
        Segment((0.0, 0.0), (0.0, eps)),
        Segment((0.0, eps), (left, eps)),
        EllipticArc((0.5, eps), rx, ry, 0.0, math.pi),
        Segment((right, eps), (1.0, eps)),
        Segment((1.0, eps), (1.0, 0.0)),
    )
    return Cavity(pieces, label=f"mushroom(eps={eps:g})")


def make_rectangle(height: float) -> Cavity:
    h = _positive("height", height)
    return Cavity(
        (Segment((0.0, 0.0), (0.0, h)), Segment((0.0, h), (1.0, h)), Segment((1.0, h), (1.0, 0.0))),
        label=f"rectangle(h={h:g})",
    )


def make_piecewise_quadratic(coeffs: Sequence[float], m: int) -> Cavity:
    """Symmetric continuous profile, quadratic on each [i/m, (i+1)/m].

    ``coeffs`` holds, for each of the ceil(m/2) left-half segments, a
    (curvature, end height) pair: on segment i the profile is the parabola
    through the previous vertex height and the given end height with the
    given second-order coefficient.  Vertex heights start at 0 at x1 = 0;
    for odd m the middle segment is the symmetric parabola through its two
    equal end heights, so only its curvature is used.  The right half mirrors
    the left.
    """
    m = int(m)
    if m < 1:
        raise InvalidParameterError("m must be at least 1")
    c = np.asarray(coeffs, dtype=float).ravel()
    nfree = piecewise_quadratic_arity(m)
    if len(c) != nfree:
        raise InvalidParameterError(f"m={m} needs {nfree} coefficients, got {len(c)}")
    if not np.all(np.isfinite(c)):
        raise InvalidParameterError("non-finite coefficient")
    x = np.arange(m + 1) / m
    heights = np.zeros(m + 1)
    curv = np.zeros(m)
    half = m // 2
    for i in range(half):
        curv[i] = c[2 * i]
        heights[i + 1] = c[2 * i + 1]
    if m % 2:
        curv[half] = c[-1]
    for i in range(1, half + 1):
        heights[m - i] = heights[i]
    for i in range(half):
        curv[m - 1 - i] = curv[i]
    if np.any(heights < 0):
        raise InvalidParameterError("vertex heights must be nonnegative")
    pieces = []
    for i in range(m):
        xa, xb, ya, yb, k = x[i], x[i + 1], heights[i], heights[i + 1], curv[i]
        # y = ya + s*(x - xa) + k*(x - xa)*(x - xb), s the chord slope
        s = (yb - ya) / (xb - xa)
        c2 = k
        c1 = s - k * (xa + xb)
        c0 = ya - s * xa + k * xa * xb
        pieces.append(ParabolicArc(xa, xb, c0, c1, c2))
    _check_profile_nonnegative(pieces)
    return Cavity(tuple(pieces), label=f"piecewise-quadratic(m={m})")


def piecewise_quadratic_arity(m: int) -> int:
    return 2 * (m // 2) + (m % 2)


# --------------------------------------------------------------------------
# parameter-vector dispatch used by the optimizer and the CLI

FAMILIES = {
    "two-segment-line": (2, lambda p: make_two_segment_line(p[0], p[1])),
    "symmetric-two-segment-line": (1, lambda p: make_two_segment_line(p[0], p[0])),
    "two-segment-quadratic": (5, lambda p: make_two_segment_quadratic(*p)),
    "symmetric-two-segment-quadratic": (2, lambda p: make_two_segment_quadratic(p[0], p[1], p[0], p[1], 0.5)),
    "canonical-zigzag": (2, lambda p: make_canonical_zigzag(p[0], int(round(p[1])))),
    "mushroom": (1, lambda p: make_mushroom(p[0])),
    "rectangle": (1, lambda p: make_rectangle(p[0])),
}


FAMILY_ALIASES = {
    "TwoSegmentLine": "two-segment-line",
    "TwoSegmentQuadratic": "two-segment-quadratic",
    "SymmetricPolyline": "symmetric-polyline",
    "SymmetricPiecewiseQuadratic": "piecewise-quadratic",
    "CanonicalZigzag": "canonical-zigzag",
    "Mushroom": "mushroom",
    "Rectangle": "rectangle",
}


def canonical_family(family: str) -> str:
    """Kebab-case family name; CamelCase tags are accepted as aliases."""
    return FAMILY_ALIASES.get(family, family)


def family_arity(family: str, m: int | None = None) -> int:
    family = canonical_family(family)
    if family in ("symmetric-polyline", "piecewise-quadratic") and m is None:
        raise InvalidParameterError(f"{family} needs the segment count m")
    if family == "symmetric-polyline":
        return int(m) // 2
    if family == "piecewise-quadratic":
        return piecewise_quadratic_arity(int(m))
    try:
        return FAMILIES[family][0]
    except KeyError:
        raise InvalidParameterError(f"unknown shape family {family!r}") from None


def build_cavity(family: str, params: Sequence[float], m: int | None = None) -> Cavity:
    """Construct a cavity of ``family`` from a flat parameter vector."""
    family = canonical_family(family)
    params = [float(v) for v in params]
    if len(params) != family_arity(family, m):
        raise InvalidParameterError(
            f"{family} expects {family_arity(family, m)} parameters, got {len(params)}"
        )
    if family == "symmetric-polyline":
        return make_symmetric_polyline(params, m=m)
    if family == "piecewise-quadratic":
        return make_piecewise_quadratic(params, m)
    return FAMILIES[family][1](params)
