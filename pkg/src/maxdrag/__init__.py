"""Resistance of rough bodies in a rarefied medium: billiard cavities, the
mean-resistance functional F and its maximisation."""
import os as _os

import numba as _numba

# Prefer OpenMP: an old system TBB otherwise triggers a warning on every parallel launch.
if "NUMBA_THREADING_LAYER" not in _os.environ:
    _numba.config.THREADING_LAYER_PRIORITY = ["omp", "tbb", "workqueue"]

from .analytic import (F_psi, F_psi_argmax, appendix2_integrals, jacobian_a3, mushroom_bound,  # noqa: E402
                       rectangle_F, triangle_F)
from .errors import ConvergenceError, InvalidCavityError, InvalidParameterError, MaxdragError  # noqa: E402
from .functional import (BodyDecomposition, FunctionalEstimate, QuadratureSpec,  # noqa: E402
                         assemble_body_resistance, evaluate_F, evaluate_F_adaptive,
                         forward_backward_consistency)
from .geometry import (Cavity, EllipticArc, ParabolicArc, Point2, Segment, build_cavity,  # noqa: E402
                       make_canonical_zigzag, make_mushroom, make_piecewise_quadratic, make_rectangle,
                       make_symmetric_polyline, make_two_segment_line, make_two_segment_quadratic)
from .io import cavity_from_json, cavity_to_json, cavity_to_svg, load_cavity  # noqa: E402
from .optimize import (Method, OptimizationProblem, OptimizationReport, optimize,  # noqa: E402
                       optimize_piecewise_quadratic, sweep_F_alpha)
from .pseudo import evaluate_F_pseudo, reflect_pseudo, second_reflection_condition, zigzag_convergence  # noqa: E402
from .tracer import Discard, EntryState, ExitState, TraceLimits, reverse_check, trace, trace_many  # noqa: E402

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
