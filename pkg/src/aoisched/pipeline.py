"""End-to-end solve: activation, clustering into divisible intervals, offsets, verification."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .activation import DEFAULT_NODE_BUDGET as ACT_BUDGET
from .activation import ActivationResult, solve_activation
from .grouping import ClusterConfig, GroupingPlan, cluster_sources
from .lowerbound import LowerBound, solve_lb
from .model import HomogeneousSchedule, Instance
from .offsets import DEFAULT_NODE_BUDGET as OFF_BUDGET
from .offsets import OffsetProblem, OffsetSolution, solve_offsets
from .simulate import AoITrace, default_horizon, required_channels, simulate


@dataclass(frozen=True)
class SolveConfig:
    cluster: ClusterConfig = field(default_factory=ClusterConfig)
    activation_budget: int = ACT_BUDGET
    offset_budget: int = OFF_BUDGET
    horizon: int | None = None  # None: 2 * hyperperiod + max deadline
    compute_lower_bound: bool = True

    @classmethod
    def preset(cls, name: str, **kw) -> SolveConfig:
        return cls(cluster=ClusterConfig.preset(name), **kw)


@dataclass
class SolveReport:
    activation: ActivationResult
    grouping: GroupingPlan
    offsets: OffsetSolution
    schedule: HomogeneousSchedule
    channels: int
    lower_bound: LowerBound | None
    trace: AoITrace

    @property
    def violations(self) -> int:
        return len(self.trace.violations)

    @property
    def feasible(self) -> bool:
        return self.violations == 0

    @property
    def certified(self) -> bool:
        return self.activation.certified and self.offsets.certified

    @property
    def lower_bound_channels(self) -> int | None:
        return self.lower_bound.channels if self.lower_bound else None

    def to_dict(self) -> dict:
        lb = self.lower_bound
        return {
            "activation": self.activation.to_dict(),
            "grouping": self.grouping.to_dict(),
            "offsets": {str(m): o for m, o in self.offsets.offsets.items()},
            "schedule": self.schedule.to_dict(),
            "channels_K": self.channels,
            "lower_bound": None if lb is None else {
                "channels": lb.channels,
                "rate_sum": str(lb.total),
                "rates": {str(m): str(v) for m, v in lb.rates.rates.items()},
            },
            "trace_summary": {
                "horizon": self.trace.horizon,
                "max_age": self.trace.max_age(),
                "violations": self.violations,
            },
            "feasible": self.feasible,
            "certified": self.certified,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def offset_problem(inst: Instance, act: ActivationResult, intervals: dict[int, int]) -> OffsetProblem:
    return OffsetProblem.build(
        intervals,
        ((r.id, members, r.tolerance) for r, members in zip(inst.regions, act.active_sets)),
    )


def solve_instance(inst: Instance, config: SolveConfig | None = None) -> SolveReport:
    config = config or SolveConfig()
    act = solve_activation(inst, node_budget=config.activation_budget)
    plan = cluster_sources(act, config=config.cluster)
    intervals = plan.intervals
    problem = offset_problem(inst, act, intervals)
    sol = solve_offsets(problem, node_budget=config.offset_budget)
    schedule = sol.schedule(intervals)
    channels = required_channels(schedule) if schedule.entries else 0
    assert channels == sol.channels
    horizon = config.horizon or default_horizon(inst, schedule)
    trace = simulate(inst, schedule, horizon)
    lb = solve_lb(inst) if config.compute_lower_bound else None
    return SolveReport(act, plan, sol, schedule, channels, lb, trace)
