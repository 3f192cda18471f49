"""Greedy heuristics for the metric k-median problem, adversarial instance
generators, an exact small-instance oracle, and empirical bound checks."""

from .analysis import (BallInstrumentation, ball_instrumentation,
                       check_harmonic_ratio, check_min_removal_bound,
                       check_serving_set_bound, check_step_bounds,
                       check_supermodularity, harmonic_number)
from .errors import (BudgetExceededError, DomainError, InputError,
                     InstanceFormatError, KMedianError)
from .estimators import ExactKMedian, ForwardGreedyKMedian, ReverseGreedyKMedian
from .generators import (epsilon_perturb, gen_k_copies, gen_random, gen_star,
                         gen_tree_lb, tree_lb_edges)
from .io import load_instance, save_instance
from .report import BoundReport
from .solvers import (GreedyTrace, TiePolicy, TraceStep, exact_kmedian,
                      forward_greedy, removal_delta, reverse_greedy,
                      reverse_greedy_chain, reverse_greedy_reference,
                      truncate_chain)
from .space import WeightedMetricSpace, graph_to_metric, verify_metric

__version__ = "0.1.0"

__all__ = [
    "BallInstrumentation", "BoundReport", "BudgetExceededError", "DomainError",
    "ExactKMedian", "ForwardGreedyKMedian", "GreedyTrace", "InputError",
    "InstanceFormatError", "KMedianError", "ReverseGreedyKMedian", "TiePolicy",
    "TraceStep", "WeightedMetricSpace", "ball_instrumentation",
    "check_harmonic_ratio", "check_min_removal_bound", "check_serving_set_bound",
    "check_step_bounds", "check_supermodularity", "epsilon_perturb",
    "exact_kmedian", "forward_greedy", "gen_k_copies", "gen_random", "gen_star",
    "gen_tree_lb", "graph_to_metric", "harmonic_number", "load_instance",
    "removal_delta", "reverse_greedy", "reverse_greedy_chain",
    "reverse_greedy_reference", "save_instance", "tree_lb_edges",
    "truncate_chain", "verify_metric",
]
