"""Statistical estimators and exact cross-checks."""

from .cutpoint_chain import CutpointChain, cutpoint_chain
from .heat_kernel import HeatKernelReport, heat_kernel_exponent, is_bipartite
from .marginals import MarginalReport, MarginalRow, marginal_compare
from .rates import LocalTypes, RateReport, new_vertex_rates
from .returns import OracleCase, OracleReport, oracle_comparison, return_probabilities, sample_balls
from .scaling import ScalingReport, SmallJumpReport, Statistic, scaling_exponent, small_jump_mass, small_jump_trend
from .tails import TailEstimate, ZmaxReport, hill_sensitivity, hill_tail_index, zmax_tail_check

__all__ = [
    "CutpointChain",
    "HeatKernelReport",
    "LocalTypes",
    "MarginalReport",
    "MarginalRow",
    "OracleCase",
    "OracleReport",
    "RateReport",
    "ScalingReport",
    "SmallJumpReport",
    "Statistic",
    "TailEstimate",
    "ZmaxReport",
    "cutpoint_chain",
    "heat_kernel_exponent",
    "hill_sensitivity",
    "hill_tail_index",
    "is_bipartite",
    "marginal_compare",
    "new_vertex_rates",
    "oracle_comparison",
    "return_probabilities",
    "sample_balls",
    "scaling_exponent",
    "small_jump_mass",
    "small_jump_trend",
    "zmax_tail_check",
]
