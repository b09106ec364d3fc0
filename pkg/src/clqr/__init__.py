"""Explicit piecewise-affine solutions of constrained LQR problems via
combinatorial active-set enumeration with dynamic-programming horizon
extension."""

__version__ = "0.1.0"

from .condense import CondensedQP, condense, stage_indices
from .enumeration import (
    ActiveSet,
    Counters,
    SolutionFamily,
    alg1_baseline,
    alg2_extend,
    alg3_init,
    alg4_dp,
    extend_candidates,
    final_filter,
    is_finitely_determined,
    shift,
)
from .model import LinearSystem, Ocp, Polytope, Weights, make_ocp, solve_dare, terminal_set
from .regions import PwaLaw, Region, build_pwa, evaluate, is_full_dimensional, region_from_active_set

__all__ = [
    "ActiveSet", "CondensedQP", "Counters", "LinearSystem", "Ocp", "Polytope",
    "PwaLaw", "Region", "SolutionFamily", "Weights",
    "alg1_baseline", "alg2_extend", "alg3_init", "alg4_dp", "build_pwa",
    "condense", "evaluate", "extend_candidates", "final_filter",
    "is_finitely_determined", "is_full_dimensional", "make_ocp",
    "region_from_active_set", "shift", "solve_dare", "stage_indices",
    "terminal_set",
]
