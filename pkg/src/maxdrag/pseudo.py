"""Pseudo-billiard on a circular arc: the fine-zigzag limit of canonical triangles.

A particle hitting the arc at parameter alpha with direction phi may split
into two splinters: a fraction |sin phi| / cos(phi - alpha) is reflected as
if by a single triangle leg, the rest is sent straight back.  Directions of
outgoing splinters follow the exit convention: direction d means velocity
-(sin d, cos d).

The arc of half-angle psi over I is parameterised by alpha in [-psi, psi];
points of its full circle are center + R (sin alpha, cos alpha) with
R = 1 / (2 sin psi).
"""
from __future__ import annotations

import enum
import math
import time
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np
from numba import njit, prange

from .errors import InvalidParameterError
from .functional import FunctionalEstimate, QuadratureSpec, evaluate_F
from .geometry import make_canonical_zigzag
from .tracer import TraceLimits

MASS_FLOOR = 1e-15

_jit = dict(cache=True, error_model="numpy")


class Splinter(NamedTuple):
    mass: float
    phi_out: float


@dataclass(frozen=True)
class ArcHit:
    alpha: float
    phi_in: float


class SecondReflection(enum.Enum):
    NO_SPLIT_SINGLE = "NoSplitSingle"
    SPLIT_FIRST_EXITS = "SplitFirstExits"
    SPLIT_FIRST_REFLECTS_AGAIN = "SplitFirstReflectsAgain"


@njit(**_jit)
def _reflect(alpha, phi):
    """(count, mass1, dir1, mass2, dir2); count 0 flags a degenerate hit."""
    c = math.cos(phi - alpha)
    if not c > 0.0:
        return 0, 0.0, 0.0, 0.0, 0.0
    s = math.sin(phi)
    turned = (math.pi / 2 if s > 0.0 else -math.pi / 2) + alpha - phi
    ratio = abs(s) / c
    if ratio >= 1.0:
        return 1, 1.0, turned, 0.0, 0.0
    if ratio < MASS_FLOOR:
        return 1, 1.0, phi, 0.0, 0.0
    if 1.0 - ratio < MASS_FLOOR:
        return 1, 1.0, turned, 0.0, 0.0
    return 2, ratio, turned, 1.0 - ratio, phi


def reflect_pseudo(hit: ArcHit) -> list[Splinter]:
    """Splinters leaving a pseudo-billiard reflection; zero-mass splinters are dropped."""
    n, m1, d1, m2, d2 = _reflect(float(hit.alpha), float(hit.phi_in))
    if n == 0:
        raise InvalidParameterError(
            f"degenerate hit: cos(phi - alpha) <= 0 at alpha={hit.alpha}, phi={hit.phi_in}"
        )
    out = [Splinter(m1, d1)]
    if n == 2:
        out.append(Splinter(m2, d2))
    return out


def second_reflection_condition(alpha_minus1: float, psi: float) -> SecondReflection:
    """Fate of the reflected splinter, from the circle point the particle came from."""
    a = abs(float(alpha_minus1))
    if not (psi <= a <= math.pi):
        raise InvalidParameterError(f"alpha_-1 = {alpha_minus1} lies on the arc or off the circle")
    if a <= math.pi / 2:
        return SecondReflection.NO_SPLIT_SINGLE
    if a >= math.pi - psi:
        return SecondReflection.SPLIT_FIRST_REFLECTS_AGAIN
    return SecondReflection.SPLIT_FIRST_EXITS


@njit(**_jit)
def _circle_hits(px, py, vx, vy, cx, cy, r2):
    """Roots of |p + t v - c|^2 = R^2 for unit v (t_low, t_high)."""
    wx, wy = px - cx, py - cy
    b = wx * vx + wy * vy
    c = wx * wx + wy * wy - r2
    disc = b * b - c
    if disc < 0.0:
        disc = 0.0
    sq = math.sqrt(disc)
    q = -b - sq if b >= 0.0 else -b + sq
    if q == 0.0:
        return 0.0, 0.0
    t1, t2 = q, c / q
    return (t1, t2) if t1 < t2 else (t2, t1)


@njit(**_jit)
def _wrap(a):
    return math.atan2(math.sin(a), math.cos(a))


@njit(**_jit)
def _orbit(phi, xi, psi, stats):
    """Mass-weighted impact factor sum_i m_i (1 + cos(phi - phi_i+)) for one particle.

    ``stats`` accumulates [total mass, max reflections in a lineage,
    second reflections that split, max alignment error, degenerate hits].
    """
    R = 1.0 / (2.0 * math.sin(psi))
    cx, cy = 0.5, -math.cos(psi) * R
    r2 = R * R
    vx, vy = math.sin(phi), math.cos(phi)
    tb, tf = _circle_hits(xi, 0.0, vx, vy, cx, cy, r2)
    bx, by = xi + tb * vx, tb * vy
    px, py = xi + tf * vx, tf * vy
    beta = math.atan2(bx - cx, by - cy)
    a0 = math.atan2(px - cx, py - cy)
    n, m1, d1, m2, d2 = _reflect(a0, phi)
    if n == 0:
        stats[4] += 1.0
        return np.nan
    total = 0.0
    mass = 0.0
    for k in range(n):
        m = m1 if k == 0 else m2
        d = d1 if k == 0 else d2
        refl = 1
        qx, qy = px, py
        while True:
            wx, wy = -math.sin(d), -math.cos(d)
            _, t = _circle_hits(qx, qy, wx, wy, cx, cy, r2)
            nx, ny = qx + t * wx, qy + t * wy
            a_next = math.atan2(nx - cx, ny - cy)
            if refl == 1 and abs(d - phi) > 1e-12:
                # reflected branch: the next circle point sits on the vertical through beta
                err = abs(_wrap(beta + a_next - math.pi)) / 2.0
                if err > stats[3]:
                    stats[3] = err
            if ny <= 0.0 or t <= 1e-14:
                break
            refl += 1
            nn, n1, e1, _, _ = _reflect(a_next, _wrap(d + math.pi))
            if nn == 0:
                stats[4] += 1.0
                return np.nan
            if nn == 2:
                stats[2] += 1.0
            d = e1
            qx, qy = nx, ny
            if refl > 3:
                break
        if refl > stats[1]:
            stats[1] = refl
        total += m * (1.0 + math.cos(phi - d))
        mass += m
    stats[0] = mass
    return total


@njit(parallel=True, **_jit)
def _pseudo_rows(psi, n1, n2):
    rows = np.zeros(n2)
    stats = np.zeros((n2, 5))
    for j in prange(n2):
        phi = math.pi * ((j + 1) - (n2 + 1) / 2.0) / n2
        cphi = math.cos(phi)
        s, c = 0.0, 0.0
        st = np.zeros(5)
        worst_mass = 0.0
        for i in range(n1):
            xi = (i + 0.5) / n1
            v = _orbit(phi, xi, psi, st)
            if v != v:
                v = 1.0 + math.cos(2.0 * phi)
            else:
                dm = abs(st[0] - 1.0)
                if dm > worst_mass:
                    worst_mass = dm
            v *= cphi
            t = s + v
            if abs(s) >= abs(v):
                c += (s - t) + v
            else:
                c += (v - t) + s
            s = t
        rows[j] = s + c
        stats[j, 0] = worst_mass
        stats[j, 1:] = st[1:]
    return rows, stats


@dataclass(frozen=True)
class PseudoDiagnostics:
    max_mass_error: float
    max_lineage_reflections: int
    split_second_reflections: int
    max_alignment_error: float
    degenerate_hits: int


def _check_psi(psi):
    psi = float(psi)
    if not 0 < psi <= math.pi / 2:
        raise InvalidParameterError(f"psi must lie in (0, pi/2], got {psi}")
    return psi


def evaluate_F_pseudo(psi: float, spec: QuadratureSpec = QuadratureSpec(),
                      diagnostics: bool = False):
    """Midpoint-grid estimate of F under pseudo-billiard dynamics on the arc.

    With ``diagnostics`` also returns a PseudoDiagnostics record of the
    invariants observed during propagation.
    """
    psi = _check_psi(psi)
    t0 = time.perf_counter()
    rows, st = _pseudo_rows(psi, int(spec.n1), int(spec.n2))
    value = 0.375 * math.pi / spec.samples * math.fsum(rows)
    est = FunctionalEstimate(
        value=value,
        discarded_fraction=float(st[:, 4].sum()) / spec.samples,
        samples=spec.samples,
        spec=spec,
        label=f"pseudo-billiard(psi={psi:g})",
        runtime_ms=1e3 * (time.perf_counter() - t0),
    )
    if not diagnostics:
        return est
    diag = PseudoDiagnostics(
        max_mass_error=float(st[:, 0].max()),
        max_lineage_reflections=int(st[:, 1].max()),
        split_second_reflections=int(st[:, 2].sum()),
        max_alignment_error=float(st[:, 3].max()),
        degenerate_hits=int(st[:, 4].sum()),
    )
    return est, diag


def pseudo_orbit(phi: float, xi: float, psi: float) -> tuple[float, PseudoDiagnostics]:
    """Impact factor sum over the splinters of one particle, with its diagnostics."""
    psi = _check_psi(psi)
    st = np.zeros(5)
    v = _orbit(float(phi), float(xi), psi, st)
    return float(v), PseudoDiagnostics(abs(st[0] - 1.0), int(st[1]), int(st[2]), float(st[3]), int(st[4]))


def zigzag_convergence(psi: float, m_list: Sequence[int], spec: QuadratureSpec = QuadratureSpec(),
                       limits: TraceLimits = TraceLimits(), uniform_x: bool = False) -> list[tuple[int, float]]:
    """True-billiard F on canonical zigzags with m segments, for each m.

    ``uniform_x`` places the arc points at abscissas 2i/m instead of equal
    arc angles.
    """
    psi = _check_psi(psi)
    out = []
    for m in m_list:
        bp = np.linspace(0.0, 1.0, m // 2 + 1) if uniform_x else None
        cav = make_canonical_zigzag(psi, m, bp)
        out.append((int(m), evaluate_F(cav, spec, limits).value))
    return out
