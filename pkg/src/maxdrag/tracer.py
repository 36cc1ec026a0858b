"""Specular billiard inside a standard cavity.

A particle enters through the opening at (xi, 0) with velocity
(sin phi, cos phi), reflects off the boundary chain and leaves through the
opening at (xi_plus, 0) with velocity -(sin phi_plus, cos phi_plus).  The
map (phi, xi) -> (phi_plus, xi_plus) is defined off a measure-zero set;
orbits that hit a junction, graze the boundary or never return are
reported as discarded rather than perturbed.
"""
from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Optional

import numpy as np

from . import _kernels as K
from .errors import InvalidParameterError
from .geometry import Cavity, EllipticArc, ParabolicArc, Point2, Segment

DEFAULT_MAX_REFLECTIONS = 10_000
DEFAULT_CORNER_TOL = 1e-9


class Discard(str, enum.Enum):
    CORNER_HIT = "CornerHit"
    GRAZING_HIT = "GrazingHit"
    REFLECTION_CAP = "ReflectionCap"
    NUMERICAL_FAILURE = "NumericalFailure"


_STATUS = {
    K.CORNER: Discard.CORNER_HIT,
    K.GRAZING: Discard.GRAZING_HIT,
    K.CAP: Discard.REFLECTION_CAP,
    K.FAILURE: Discard.NUMERICAL_FAILURE,
}


@dataclass(frozen=True)
class TraceLimits:
    max_reflections: int = DEFAULT_MAX_REFLECTIONS
    corner_tol: float = DEFAULT_CORNER_TOL

    def __post_init__(self):
        if int(self.max_reflections) < 1 or not self.corner_tol > 0:
            raise InvalidParameterError("trace limits must be positive")


@dataclass(frozen=True)
class EntryState:
    phi: float
    xi: float

    def __post_init__(self):
        if not (-math.pi / 2 < self.phi < math.pi / 2):
            raise InvalidParameterError(f"entry angle {self.phi} outside (-pi/2, pi/2)")
        if not (0.0 <= self.xi <= 1.0):
            raise InvalidParameterError(f"entry point {self.xi} outside [0, 1]")


@dataclass(frozen=True)
class ExitState:
    phi_plus: float
    xi_plus: float

    def __post_init__(self):
        if not (-math.pi / 2 < self.phi_plus < math.pi / 2) or not (0.0 <= self.xi_plus <= 1.0):
            raise InvalidParameterError(f"exit state ({self.phi_plus}, {self.xi_plus}) out of range")

    @property
    def velocity(self) -> tuple[float, float]:
        return -math.sin(self.phi_plus), -math.cos(self.phi_plus)


@dataclass(frozen=True)
class TraceResult:
    exit: Optional[ExitState]
    reflections: int
    reason: Optional[Discard] = None
    path: Optional[np.ndarray] = None

    @property
    def ok(self) -> bool:
        return self.exit is not None

    @property
    def status(self) -> str:
        return "Ok" if self.ok else f"Discarded({self.reason.value})"


@dataclass(frozen=True)
class PackedCavity:
    kinds: np.ndarray
    prm: np.ndarray
    ends: np.ndarray
    flat: bool


def _pack_piece(piece):
    if isinstance(piece, Segment):
        return K.SEGMENT, [*piece.p0, *piece.p1, 0.0, 0.0]
    if isinstance(piece, ParabolicArc):
        return K.PARABOLA, [piece.a, piece.b, piece.c0, piece.c1, piece.c2, 0.0]
    if isinstance(piece, EllipticArc):
        return K.ELLIPSE, [*piece.center, piece.rx, piece.ry, piece.theta0, piece.theta1]
    raise TypeError(f"unsupported boundary piece {type(piece).__name__}")


@lru_cache(maxsize=64)
def pack(cavity: Cavity) -> PackedCavity:
    kinds, prm, ends = [], [], []
    for piece in cavity.pieces:
        k, p = _pack_piece(piece)
        kinds.append(k)
        prm.append(p)
        ends.append([*piece.start, *piece.end])
    return PackedCavity(
        np.array(kinds, dtype=np.int64),
        np.array(prm, dtype=np.float64),
        np.array(ends, dtype=np.float64),
        cavity.is_flat,
    )


def intersect_ray_piece(origin, direction, piece) -> Optional[tuple[float, Point2, tuple[float, float]]]:
    """Nearest forward hit of a unit-speed ray with one boundary piece.

    Returns ``(t, point, normal)`` with the normal facing the incoming ray,
    or None.
    """
    dx, dy = map(float, direction)
    if abs(math.hypot(dx, dy) - 1.0) > 1e-12:
        raise InvalidParameterError("ray direction must be a unit vector")
    kind, prm = _pack_piece(piece)
    ox, oy = map(float, origin)
    t, nx, ny = K.hit_piece(kind, np.array(prm), ox, oy, dx, dy, False)
    if not math.isfinite(t):
        return None
    return t, Point2(ox + t * dx, oy + t * dy), (nx, ny)


def trace(
    cavity: Cavity,
    entry: EntryState,
    limits: TraceLimits = TraceLimits(),
    record_path: bool = False,
) -> TraceResult:
    """Follow one particle from the opening back to the opening."""
    if cavity.is_flat:
        path = np.array([[entry.xi, 0.0], [entry.xi, 0.0]]) if record_path else None
        return TraceResult(ExitState(-entry.phi, entry.xi), 1, path=path)
    pc = pack(cavity)
    cap = int(limits.max_reflections)
    buf = np.empty((cap + 2 if record_path else 0, 2))
    status, php, xip, refl, npath = K.trace_one(
        pc.kinds, pc.prm, pc.ends, float(entry.phi), float(entry.xi), cap, float(limits.corner_tol), buf
    )
    path = buf[: min(npath, len(buf))].copy() if record_path else None
    if status != K.OK:
        return TraceResult(None, int(refl), _STATUS[int(status)], path)
    return TraceResult(ExitState(float(php), float(xip)), int(refl), path=path)


def trace_many(cavity: Cavity, phi, xi, limits: TraceLimits = TraceLimits()):
    """Vectorised trace.  Returns (status codes, phi_plus, xi_plus, reflections) arrays.

    Status 0 is Ok; other codes follow ``maxdrag._kernels``.
    """
    phi = np.ascontiguousarray(phi, dtype=np.float64).ravel()
    xi = np.ascontiguousarray(xi, dtype=np.float64).ravel()
    if phi.shape != xi.shape:
        raise InvalidParameterError("phi and xi must have the same length")
    if np.any(np.abs(phi) >= math.pi / 2) or np.any((xi < 0) | (xi > 1)):
        raise InvalidParameterError("entry states out of range")
    pc = pack(cavity)
    return K.trace_many(
        pc.kinds, pc.prm, pc.ends, phi, xi, int(limits.max_reflections), float(limits.corner_tol), pc.flat
    )


def reverse_check(cavity: Cavity, result: TraceResult, original: EntryState,
                  limits: TraceLimits = TraceLimits()) -> float:
    """Discrepancy between ``original`` and the re-trace of the time-reversed exit.

    The billiard map is an involution, so re-entering at (phi+, xi+) must
    leave at (phi, xi).  Discarded traces give +inf.
    """
    if not result.ok:
        return math.inf
    back = trace(cavity, EntryState(result.exit.phi_plus, result.exit.xi_plus), limits)
    if not back.ok:
        return math.inf
    return max(abs(back.exit.phi_plus - original.phi), abs(back.exit.xi_plus - original.xi))


def dump_trajectories(cavity: Cavity, entries: Iterable[EntryState], stream,
                      limits: TraceLimits = TraceLimits()) -> None:
    """Write ``trace_id,seg_index,x1,x2`` rows, one per orbit vertex."""
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(["trace_id", "seg_index", "x1", "x2"])
    for tid, entry in enumerate(entries):
        res = trace(cavity, entry, limits, record_path=True)
        for k, (x1, x2) in enumerate(res.path):
            writer.writerow([tid, k, f"{x1:.12g}", f"{x2:.12g}"])
