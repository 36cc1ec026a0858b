"""Mean resistance of a cavity by midpoint quadrature over entry states.

    F(cavity) = 3/8 * integral over phi in (-pi/2, pi/2), xi in [0, 1] of
                (1 + cos(phi_plus - phi)) cos(phi) dxi dphi

F is 1 for the degenerate flat cavity and never exceeds 1.5.
"""
from __future__ import annotations

import csv
import json
import math
import time
from dataclasses import asdict, dataclass, field
from typing import Sequence

from . import _kernels as K
from .errors import ConvergenceError, InvalidParameterError
from .geometry import Cavity
from .tracer import TraceLimits, pack

DEFAULT_GRID = 2000
ADAPTIVE_START = 128
ADAPTIVE_CAP = 16384


@dataclass(frozen=True)
class QuadratureSpec:
    n1: int = DEFAULT_GRID
    n2: int = DEFAULT_GRID

    def __post_init__(self):
        if int(self.n1) < 1 or int(self.n2) < 1:
            raise InvalidParameterError(f"quadrature grid must be positive, got {self.n1}x{self.n2}")

    @classmethod
    def square(cls, n: int) -> "QuadratureSpec":
        return cls(n, n)

    @property
    def samples(self) -> int:
        return self.n1 * self.n2


@dataclass(frozen=True)
class FunctionalEstimate:
    value: float
    discarded_fraction: float
    samples: int
    spec: QuadratureSpec
    label: str = ""
    runtime_ms: float = 0.0

    def to_json(self) -> str:
        d = asdict(self)
        return json.dumps(d, indent=2, sort_keys=True)

    def csv_row(self) -> list:
        return [self.label, self.spec.n1, self.spec.n2, f"{self.value:.9f}",
                f"{self.discarded_fraction:.3e}", f"{self.runtime_ms:.1f}"]


CSV_HEADER = ["shape_label", "n1", "n2", "F", "discarded_fraction", "runtime_ms"]


def write_estimates_csv(estimates: Sequence[FunctionalEstimate], stream) -> None:
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for est in estimates:
        w.writerow(est.csv_row())


def _rows(cavity: Cavity, spec: QuadratureSpec, limits: TraceLimits, backward: bool):
    if not isinstance(cavity, Cavity):
        raise InvalidParameterError("evaluate_F needs a Cavity")
    pc = pack(cavity)
    return K.grid_rows(
        pc.kinds, pc.prm, pc.ends, int(spec.n1), int(spec.n2),
        int(limits.max_reflections), float(limits.corner_tol), pc.flat, backward,
    )


def _scale(spec: QuadratureSpec) -> float:
    return 0.375 * math.pi / (spec.n1 * spec.n2)


def evaluate_F(cavity: Cavity, spec: QuadratureSpec = QuadratureSpec(),
               limits: TraceLimits = TraceLimits()) -> FunctionalEstimate:
    """Midpoint-rule estimate of F on the N1 x N2 entry grid.

    xi_i = (i - 1/2)/N1 and phi_j = pi (j - (N2 + 1)/2)/N2.  Discarded orbits
    are scored as a single mirror reflection and counted in
    ``discarded_fraction``.
    """
    t0 = time.perf_counter()
    fwd, _, ndisc = _rows(cavity, spec, limits, False)
    value = _scale(spec) * math.fsum(fwd)
    return FunctionalEstimate(
        value=value,
        discarded_fraction=int(ndisc.sum()) / spec.samples,
        samples=spec.samples,
        spec=spec,
        label=cavity.label,
        runtime_ms=1e3 * (time.perf_counter() - t0),
    )


def evaluate_F_adaptive(cavity: Cavity, target_se: float, limits: TraceLimits = TraceLimits(),
                        start: int = ADAPTIVE_START, cap: int = ADAPTIVE_CAP) -> FunctionalEstimate:
    """Double the grid until two successive estimates differ by less than ``target_se``."""
    if not target_se > 0:
        raise InvalidParameterError("target_se must be positive")
    n = int(start)
    prev = evaluate_F(cavity, QuadratureSpec.square(n), limits)
    while True:
        n *= 2
        if n > cap:
            raise ConvergenceError(
                f"no convergence to {target_se:g} by grid {n // 2}; last change above target", prev
            )
        cur = evaluate_F(cavity, QuadratureSpec.square(n), limits)
        if abs(cur.value - prev.value) < target_se:
            return cur
        prev = cur


def forward_backward_consistency(cavity: Cavity, spec: QuadratureSpec = QuadratureSpec(),
                                 limits: TraceLimits = TraceLimits()) -> float:
    """|F_forward - F_backward| on one grid.

    The backward estimate is the integral rewritten through the change of
    variables (phi, xi) -> T(phi, xi): the summand at each grid node becomes
    1 + cos(phi+ - T(phi+, xi+)_angle), which relies on both the
    cos(phi) dphi dxi measure being preserved and T being an involution.
    """
    fwd, bwd, _ = _rows(cavity, spec, limits, True)
    s = _scale(spec)
    return abs(s * math.fsum(fwd) - s * math.fsum(bwd))


@dataclass(frozen=True)
class BodyDecomposition:
    """Boundary of conv(B): perimeter, convex-part weight and cavity weights with their F."""

    perimeter: float
    lambda0: float
    parts: tuple = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "parts", tuple((float(l), float(f)) for l, f in self.parts))
        if not self.perimeter > 0:
            raise InvalidParameterError("perimeter must be positive")
        weights = [self.lambda0] + [l for l, _ in self.parts]
        if any(w < 0 for w in weights):
            raise InvalidParameterError("weights must be nonnegative")
        if abs(math.fsum(weights) - 1.0) > 1e-12:
            raise InvalidParameterError(f"weights sum to {math.fsum(weights)!r}, not 1")
        if any(not (1.0 <= f <= 1.5) for _, f in self.parts):
            raise InvalidParameterError("cavity functional values must lie in [1, 1.5]")


def assemble_body_resistance(d: BodyDecomposition) -> float:
    """Magnitude of the mean resistance |conv B| * (lambda0 + sum lambda_i F_i).

    The force points along -e2; its other component vanishes.
    """
    return d.perimeter * math.fsum([d.lambda0] + [l * f for l, f in d.parts])
