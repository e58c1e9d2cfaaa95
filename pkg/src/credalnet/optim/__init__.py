from .bilinear import (
    BilinearProblem,
    BoundSolution,
    PairResult,
    PairSolver,
    SolverConfig,
    alternating_lp,
    bound_objective,
    lower_combined,
    ratio_oracle,
    upper_combined,
    vertex_pair_oracle,
)
from .lp import LpProblem, LpSolution, box_simplex_argmin, interval_lp_problem, solve_lp

__all__ = [
    "BilinearProblem", "BoundSolution", "LpProblem", "LpSolution", "PairResult", "PairSolver",
    "SolverConfig", "alternating_lp", "bound_objective", "box_simplex_argmin",
    "interval_lp_problem", "lower_combined", "ratio_oracle", "solve_lp", "upper_combined",
    "vertex_pair_oracle",
]
