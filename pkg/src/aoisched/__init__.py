"""Minimum-channel periodic scheduling under hard age-of-information deadlines."""

from .activation import ActivationResult, solve_activation
from .grouping import ClusterConfig, GroupingPlan, build_graph, cluster_sources
from .lowerbound import LowerBound, solve_lb
from .model import HomogeneousSchedule, Instance, RegionSpec, validate_instance
from .offsets import OffsetProblem, OffsetSolution, solve_offsets
from .pipeline import SolveConfig, SolveReport, solve_instance
from .simulate import AoITrace, required_channels, simulate

__all__ = [
    "ActivationResult", "AoITrace", "ClusterConfig", "GroupingPlan", "HomogeneousSchedule",
    "Instance", "LowerBound", "OffsetProblem", "OffsetSolution", "RegionSpec", "SolveConfig",
    "SolveReport", "build_graph", "cluster_sources", "required_channels", "simulate",
    "solve_activation", "solve_instance", "solve_lb", "solve_offsets", "validate_instance",
]
