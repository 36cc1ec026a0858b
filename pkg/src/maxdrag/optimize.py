"""Derivative-free maximisation of F over parameterised shape families."""
from __future__ import annotations

import csv
import enum
import json
import logging
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import minimize

from .analytic import F_psi_argmax
from .errors import InvalidParameterError
from .functional import QuadratureSpec, evaluate_F
from .geometry import (build_cavity, canonical_family, family_arity, make_canonical_zigzag,
                       make_two_segment_line)
from .tracer import TraceLimits

logger = logging.getLogger(__name__)

INFEASIBLE = 0.0


class Method(str, enum.Enum):
    NELDER_MEAD = "NelderMead"
    PATTERN_SEARCH = "PatternSearch"
    RANDOM_RESTART_NM = "RandomRestartNM"


@dataclass(frozen=True)
class OptimizationProblem:
    family: str
    lower: tuple
    upper: tuple
    quadrature: QuadratureSpec = QuadratureSpec(1000, 1000)
    budget: int = 200
    seed: int = 0
    method: Method = Method.RANDOM_RESTART_NM
    m: Optional[int] = None
    x0: Optional[tuple] = None
    restarts: int = 8
    limits: TraceLimits = TraceLimits()

    def __post_init__(self):
        object.__setattr__(self, "lower", tuple(float(v) for v in self.lower))
        object.__setattr__(self, "upper", tuple(float(v) for v in self.upper))
        object.__setattr__(self, "method", Method(self.method))
        if self.x0 is not None:
            object.__setattr__(self, "x0", tuple(float(v) for v in self.x0))
        n = family_arity(self.family, self.m)
        if len(self.lower) != n or len(self.upper) != n:
            raise InvalidParameterError(f"{self.family} needs {n} bounds per side")
        lo, hi = np.array(self.lower), np.array(self.upper)
        if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi)) and np.all(lo < hi)):
            raise InvalidParameterError("bounds must be finite with lower < upper")
        if int(self.budget) < 1:
            raise InvalidParameterError("budget must be at least 1")
        if self.x0 is not None and len(self.x0) != n:
            raise InvalidParameterError("x0 has the wrong length")

    @property
    def dim(self) -> int:
        return len(self.lower)


@dataclass
class OptimizationReport:
    best_params: list
    best_value: float
    evaluations: int
    history: list = field(default_factory=list)
    converged: bool = False
    final_value: Optional[float] = None
    family: str = ""
    m: Optional[int] = None

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2)

    def write_history_csv(self, stream) -> None:
        w = csv.writer(stream, lineterminator="\n")
        w.writerow(["eval"] + [f"p{i}" for i in range(len(self.best_params))] + ["F"])
        for k, (params, value) in enumerate(self.history):
            w.writerow([k] + [repr(float(p)) for p in params] + [repr(float(value))])

    def best_cavity(self):
        return build_cavity(self.family, self.best_params, self.m)


class _Budget(Exception):
    pass


class _Objective:
    """Cached, budgeted F evaluator; infeasible shapes score 0."""

    def __init__(self, problem: OptimizationProblem):
        self.p = problem
        self.lo = np.array(problem.lower)
        self.hi = np.array(problem.upper)
        self.cache: dict = {}
        self.history: list = []

    def value(self, x) -> float:
        x = np.clip(np.asarray(x, dtype=float), self.lo, self.hi)
        key = tuple(x.tolist())
        if key in self.cache:
            return self.cache[key]
        if len(self.history) >= self.p.budget:
            raise _Budget
        try:
            cav = build_cavity(self.p.family, key, self.p.m)
        except InvalidParameterError:
            f = INFEASIBLE
        else:
            f = evaluate_F(cav, self.p.quadrature, self.p.limits).value
        self.cache[key] = f
        self.history.append((list(key), f))
        return f

    def best(self):
        return max(self.history, key=lambda h: h[1])


def _nelder_mead(obj: _Objective, x0, scale) -> bool:
    n = len(x0)
    simplex = [x0]
    for i in range(n):
        v = x0.copy()
        v[i] += scale[i] if x0[i] + scale[i] <= obj.hi[i] else -scale[i]
        simplex.append(v)
    res = minimize(
        lambda x: -obj.value(x),
        x0,
        method="Nelder-Mead",
        bounds=list(zip(obj.lo, obj.hi)),
        options={"initial_simplex": np.array(simplex), "xatol": 1e-4, "fatol": 1e-8,
                 "maxfev": 10 ** 9, "adaptive": n > 3},
    )
    return bool(res.success)


def _pattern_search(obj: _Objective, x0, scale, min_step=1e-4) -> bool:
    """Compass search: poll +-step along each axis, halve the step on failure."""
    x = x0.copy()
    fx = obj.value(x)
    step = scale.copy()
    while np.max(step / (obj.hi - obj.lo)) > min_step:
        improved = False
        for i in range(len(x)):
            for sgn in (1.0, -1.0):
                y = x.copy()
                y[i] = np.clip(y[i] + sgn * step[i], obj.lo[i], obj.hi[i])
                fy = obj.value(y)
                if fy > fx:
                    x, fx, improved = y, fy, True
                    break
        if not improved:
            step = step / 2
    return True


def optimize(problem: OptimizationProblem) -> OptimizationReport:
    """Maximise F over ``problem.family`` within bounds, deterministically for a seed.

    The first start is ``x0`` (or the box centre); RandomRestartNM then
    restarts from uniform random points until ``restarts`` runs or the
    evaluation budget are used up.  The best point is re-evaluated on a grid
    of twice the resolution and reported as ``final_value``.
    """
    obj = _Objective(problem)
    rng = np.random.default_rng(problem.seed)
    lo, hi = obj.lo, obj.hi
    scale = 0.1 * (hi - lo)
    starts = [np.array(problem.x0) if problem.x0 is not None else (lo + hi) / 2]
    if problem.method is Method.RANDOM_RESTART_NM:
        starts += [lo + rng.random(problem.dim) * (hi - lo) for _ in range(problem.restarts - 1)]
    converged = False
    for k, x0 in enumerate(starts):
        try:
            if problem.method is Method.PATTERN_SEARCH:
                converged = _pattern_search(obj, x0, scale)
            else:
                converged = _nelder_mead(obj, x0, scale)
        except _Budget:
            converged = False
            break
        logger.info("start %d: best so far %.6f after %d evaluations", k, obj.best()[1], len(obj.history))
    # polish the incumbent with a smaller simplex if budget remains
    if problem.method is not Method.PATTERN_SEARCH and len(obj.history) < problem.budget:
        try:
            converged = _nelder_mead(obj, np.array(obj.best()[0]), 0.01 * (hi - lo)) or converged
        except _Budget:
            pass
    best_params, best_value = obj.best()
    final = None
    if best_value > INFEASIBLE:
        fine = QuadratureSpec(2 * problem.quadrature.n1, 2 * problem.quadrature.n2)
        final = evaluate_F(build_cavity(problem.family, best_params, problem.m), fine, problem.limits).value
    return OptimizationReport(
        best_params=list(best_params),
        best_value=best_value,
        evaluations=len(obj.history),
        history=obj.history,
        converged=converged,
        final_value=final,
        family=problem.family,
        m=problem.m,
    )


_DEFAULT_BOUNDS = {
    "two-segment-line": ([0.1, 0.1], [5.0, 5.0]),
    "symmetric-two-segment-line": ([0.1], [5.0]),
    "symmetric-two-segment-quadratic": ([-2.0, 0.2], [1.0, 3.0]),
    "mushroom": ([1e-3], [0.5]),
    "rectangle": ([1e-2], [10.0]),
}


def default_bounds(family: str, m: Optional[int] = None) -> tuple[list, list]:
    """Search box used when none is given; heights of polylines live in [0, 1]."""
    family = canonical_family(family)
    if family == "symmetric-polyline":
        k = family_arity(family, m)
        return [0.0] * k, [1.0] * k
    if family not in _DEFAULT_BOUNDS:
        raise InvalidParameterError(f"no default bounds for {family}; give --lower/--upper")
    lo, hi = _DEFAULT_BOUNDS[family]
    return list(lo), list(hi)


def sweep_F_alpha(alpha_grid: Sequence[float], spec: QuadratureSpec = QuadratureSpec(),
                  limits: TraceLimits = TraceLimits()) -> list[tuple[float, float]]:
    """F of the symmetric two-segment line (isosceles triangle of slope alpha) along a grid."""
    out = []
    for a in alpha_grid:
        if not a > 0:
            raise InvalidParameterError(f"alpha must be positive, got {a}")
        out.append((float(a), evaluate_F(make_two_segment_line(a, a), spec, limits).value))
    return out


def zigzag_heights(m: int, psi: Optional[float] = None) -> list[float]:
    """Left-half vertex heights of the canonical zigzag with vertices on x1 = i/m (m even)."""
    if psi is None:
        psi = F_psi_argmax()[0]
    cav = make_canonical_zigzag(psi, m, np.linspace(0.0, 1.0, m // 2 + 1))
    return [seg.p1.x2 for seg in cav.pieces[: m // 2]]


def _piecewise_quadratic_start(m: int) -> list[float]:
    if m % 2:
        h = zigzag_heights(m + 1)
        x0 = []
        for i in range(m // 2):
            x0 += [0.0, h[i]]
        return x0 + [0.0]
    x0 = []
    for hi in zigzag_heights(m):
        x0 += [0.0, hi]
    return x0


def optimize_piecewise_quadratic(m: int, problem: Optional[OptimizationProblem] = None,
                                 **overrides) -> OptimizationReport:
    """Maximise F over symmetric continuous piecewise-quadratic profiles on x1 = i/m.

    Parameters per left-half segment are (curvature, end height).  Without an
    explicit problem, curvatures are bounded by [-4, 4], heights by [0, 1],
    and the search starts from the canonical zigzag heights with straight
    segments.
    """
    m = int(m)
    if not 1 <= m <= 18:
        raise InvalidParameterError("m must lie in 1..18")
    if problem is None:
        n = family_arity("piecewise-quadratic", m)
        lower, upper = [], []
        for k in range(n):
            curv = (k % 2 == 0) or (m % 2 and k == n - 1)
            lower.append(-4.0 if curv else 0.0)
            upper.append(4.0 if curv else 1.0)
        kw = dict(family="piecewise-quadratic", lower=lower, upper=upper, m=m,
                  x0=_piecewise_quadratic_start(m))
        kw.update(overrides)
        problem = OptimizationProblem(**kw)
    elif problem.family != "piecewise-quadratic" or problem.m != m:
        raise InvalidParameterError("problem must be a piecewise-quadratic family with the same m")
    return optimize(problem)
