"""Closed-form resistance values used as oracles.

Formulas are transcribed term by term, without simplification, so that
the cross-checks between them catch transcription slips.
"""
from __future__ import annotations

import math
from typing import NamedTuple

from .errors import InvalidParameterError

SQRT2 = math.sqrt(2.0)
PSI_MAX = math.pi / 2


class TriangleDecomposition(NamedTuple):
    term_I: float
    term_II: float
    term_III: float

    @property
    def total(self) -> float:
        return self.term_I + self.term_II + self.term_III


def triangle_F() -> TriangleDecomposition:
    """Right isosceles triangle split into single-left, single-right and double reflections."""
    single = 3.0 / 4.0 - 1.0 / (2.0 * SQRT2)
    double = 1.5 * (SQRT2 - 1.0)
    return TriangleDecomposition(single, single, double)


def _check_psi(psi: float) -> float:
    psi = float(psi)
    if not (0.0 <= psi <= PSI_MAX):
        raise InvalidParameterError(f"psi must lie in [0, pi/2], got {psi}")
    return psi


def F_psi(psi: float) -> float:
    """Resistance of the zigzag over an arc of half-angle psi, in the fine-zigzag limit.

    psi = 0 returns the limit sqrt(2).
    """
    psi = _check_psi(psi)
    if psi == 0.0:
        return SQRT2
    s2 = math.sin(psi / 2)
    return 1.0 + math.sin(psi) ** 2 / 6.0 + (2.0 * SQRT2 * s2 - 2.0 * s2**4 - psi) / math.sin(psi)


def F_psi_argmax(tol: float = 1e-8) -> tuple[float, float]:
    """Golden-section search for the maximiser of F_psi on (0, pi/2]."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = 0.0, PSI_MAX
    c, d = b - invphi * (b - a), a + invphi * (b - a)
    fc, fd = F_psi(c), F_psi(d)
    while b - a > tol:
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = F_psi(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = F_psi(d)
    psi = (a + b) / 2
    return psi, F_psi(psi)


class ZigzagLimitTerms(NamedTuple):
    I: float
    II: float
    III: float
    IV: float

    @property
    def total(self) -> float:
        return self.I + self.II + self.III + self.IV


def appendix2_integrals(psi: float) -> ZigzagLimitTerms:
    """The four pieces of F_psi: no-split exits, stay-direction splinters,
    split-and-exit splinters and split-and-reflect-again splinters."""
    psi = _check_psi(psi)
    if psi == 0.0:
        raise InvalidParameterError("psi must be positive")
    pre = 3.0 / (16.0 * math.sin(psi))
    sp, sh = math.sin(psi), math.sin(psi / 2)
    one_three = pre * (4.0 * sp - 8.0 * SQRT2 / 3.0 * sh - 16.0 / 3.0 * sh**4)
    two = pre * (16.0 * SQRT2 * sh - 8.0 * psi)
    four = pre * (-8.0 / 3.0 * sp + 8.0 / 9.0 * sp**3 + 8.0 / 3.0 * psi)
    return ZigzagLimitTerms(one_three, two, one_three, four)


def mushroom_bound(eps: float) -> tuple[float, float]:
    """(measure of orbits first hitting the stem, lower bound on F of the mushroom)."""
    eps = float(eps)
    if not 0.0 < eps < 1.0:
        raise InvalidParameterError(f"eps must lie in (0, 1), got {eps}")
    stem = 2.0 * (1.0 + eps - math.sqrt(1.0 + eps * eps))
    lower = 0.375 * (2.0 - 4.0 * (1.0 + eps - math.sqrt(1.0 + eps * eps))) * (
        1.0 + math.cos(2.0 * math.atan(eps / 2.0))
    )
    return stem, lower


def xi_from_arc(alpha: float, beta: float, psi: float) -> float:
    """Crossing abscissa on I of the chord between arc parameters alpha and beta."""
    num = math.sin(psi + alpha) - math.sin(psi + beta) + math.sin(beta - alpha)
    return num / (2.0 * math.sin(psi) * (math.cos(alpha) - math.cos(beta)))


def phi_from_arc(alpha: float, beta: float) -> float:
    """Entry angle of the chord from beta (below I) to alpha (on the arc)."""
    return (alpha + beta - math.pi) / 2 if beta > 0 else (alpha + beta + math.pi) / 2


def jacobian_a3(alpha: float, beta: float, psi: float) -> float:
    """D(phi, xi)/D(alpha, beta) for the chord change of variables."""
    den = math.sin((alpha + beta) / 2)
    if abs(den) < 1e-300:
        raise InvalidParameterError("singular change of variables: sin((alpha+beta)/2) = 0")
    return (1.0 / (4.0 * math.sin(psi))) * math.sin((alpha - beta) / 2) / den


def rectangle_F(height: float) -> float:
    """Exact F for the rectangle [0,1] x [0,h], by unfolding the side-wall reflections.

    After one top reflection the orbit leaves with phi+ = -phi when it has
    crossed an even number of side walls and phi+ = phi otherwise, so
    F = 1 + 3/4 * int cos(phi) sin(phi)^2 P_odd(2 h tan|phi|) dphi over
    (-pi/2, pi/2), P_odd(D) being the fraction of xi with floor(xi + D) odd.
    """
    from scipy import integrate

    h = float(height)
    if not h > 0:
        raise InvalidParameterError("height must be positive")

    def p_odd(d):
        n, f = divmod(d, 1.0)
        return 1.0 - f if int(n) % 2 else f

    def integrand(phi):
        return math.cos(phi) * math.sin(phi) ** 2 * p_odd(2.0 * h * math.tan(phi))

    # split where 2 h tan(phi) crosses an integer; beyond the last split the
    # remaining mass is below quad's accuracy
    nmax = int(min(2.0 * h * 1e4, 200000))
    cuts = [0.0] + [math.atan(k / (2.0 * h)) for k in range(1, nmax + 1)] + [math.pi / 2]
    total = 0.0
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        if hi > lo:
            total += integrate.quad(integrand, lo, hi, limit=100)[0]
    return 1.0 + 0.75 * 2.0 * total
