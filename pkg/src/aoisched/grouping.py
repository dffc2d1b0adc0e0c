"""Collaboration graph, distance-based clustering, and divisibility-chain intervals.

Sources activated together for a region must end up with intervals that
divide one another, so whole connected components of the collaboration graph
are placed in a group and every group gets a consecutively divisible interval
vector built from a chosen base.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .activation import ActivationResult
from .model import gcd, lcm

INF = math.inf


@dataclass(frozen=True)
class CollaborationGraph:
    vertices: tuple[int, ...]
    edges: frozenset[tuple[int, int]]
    components: tuple[tuple[int, ...], ...]

    @property
    def num_components(self) -> int:
        return len(self.components)


def build_graph(act: ActivationResult) -> CollaborationGraph:
    vertices = act.active_sources
    adj: dict[int, set[int]] = {v: set() for v in vertices}
    edges = set()
    for members in act.active_sets:
        for a, b in itertools.combinations(sorted(members), 2):
            edges.add((a, b))
            adj[a].add(b)
            adj[b].add(a)
    seen: set[int] = set()
    components = []
    for v in vertices:
        if v in seen:
            continue
        stack, comp = [v], []
        seen.add(v)
        while stack:
            x = stack.pop()
            comp.append(x)
            for y in adj[x]:
                if y not in seen:
                    seen.add(y)
                    stack.append(y)
        components.append(tuple(sorted(comp)))
    components.sort()
    return CollaborationGraph(tuple(vertices), frozenset(edges), tuple(components))


def source_distance(base: int, u: int) -> Fraction | float:
    """Extra rate paid when a source with max interval ``u`` drops to a multiple of ``base``."""
    if u < base:
        return INF
    return Fraction(1, u // base * base) - Fraction(1, u)


def distance(base: int, component: Iterable[int], max_intervals: Mapping[int, int]) -> Fraction | float:
    if base < 1:
        raise ValueError("base must be positive")
    total = Fraction(0)
    for m in component:
        h = source_distance(base, max_intervals[m])
        if h == INF:
            return INF
        total += h
    return total


def derive_cd_intervals(max_intervals: Mapping[int, int], base: int) -> dict[int, int]:
    """Greedy divisibility chain rooted at ``base``.

    Members are visited in ascending max interval (ties by id); each takes the
    largest multiple of the current chain value not exceeding its max
    interval, and that value becomes the new chain value.
    """
    if not max_intervals:
        return {}
    if base > min(max_intervals.values()):
        raise ValueError(f"base {base} exceeds the smallest max interval")
    out = {}
    v = base
    for m in sorted(max_intervals, key=lambda m: (max_intervals[m], m)):
        c = max_intervals[m] // v * v
        out[m] = c
        v = c
    return dict(sorted(out.items()))


def is_cd(values: Sequence[int]) -> bool:
    xs = sorted(values)
    return all(x >= 1 for x in xs) and all(b % a == 0 for a, b in zip(xs, xs[1:]))


@dataclass(frozen=True)
class Group:
    members: tuple[int, ...]
    center: int  # candidate base the group was clustered around
    intervals: dict[int, int]

    @property
    def base(self) -> int:
        """Smallest interval actually used; the chain's base."""
        return min(self.intervals.values())

    @property
    def rate(self) -> Fraction:
        return sum((Fraction(1, c) for c in self.intervals.values()), Fraction(0))

    @property
    def channels(self) -> int:
        return math.ceil(self.rate)


@dataclass(frozen=True)
class GroupingPlan:
    groups: tuple[Group, ...]
    centers: tuple[int, ...] = ()
    tried: int = 0

    @property
    def objective(self) -> int:
        return sum(g.channels for g in self.groups)

    @property
    def intervals(self) -> dict[int, int]:
        out = {}
        for g in self.groups:
            out.update(g.intervals)
        return dict(sorted(out.items()))

    @property
    def bases(self) -> tuple[int, ...]:
        return tuple(g.base for g in self.groups)

    def to_dict(self) -> dict:
        return {
            "objective": self.objective,
            "centers": list(self.centers),
            "groups": [
                {"members": list(g.members), "center": g.center, "base": g.base,
                 "intervals": {str(m): c for m, c in g.intervals.items()}}
                for g in self.groups
            ],
        }


@dataclass(frozen=True)
class ClusterConfig:
    """Search limits for clustering.

    ``max_groups`` caps the group count (None: number of components, or
    distinct max intervals, whichever is smaller). ``base_sets`` maps a group
    count to the explicit base tuples to try; counts absent from the map use
    every subset of the distinct max intervals.
    """

    max_groups: int | None = None
    base_sets: Mapping[int, Sequence[tuple[int, ...]]] = field(default_factory=dict)

    @classmethod
    def preset(cls, name: str) -> ClusterConfig:
        if name in ("full", "default", "unrestricted"):
            return cls()
        if name == "two-group":
            return cls(max_groups=2, base_sets={2: [(2, 3)]})
        raise ValueError(f"unknown clustering preset {name!r}")


def assign_components(components, centers: Sequence[int], max_intervals) -> list[int] | None:
    """Index of the nearest center for each component; None if some source fits nowhere."""
    smallest = min(centers)
    if any(max_intervals[m] < smallest for comp in components for m in comp):
        return None
    out = []
    for comp in components:
        dists = [distance(e, comp, max_intervals) for e in centers]
        best = min(range(len(centers)), key=lambda i: (dists[i], centers[i]))
        if dists[best] == INF:
            return None
        out.append(best)
    return out


def plan_for_centers(graph: CollaborationGraph, max_intervals: Mapping[int, int],
                     centers: Sequence[int]) -> GroupingPlan | None:
    centers = tuple(sorted(centers))
    where = assign_components(graph.components, centers, max_intervals)
    if where is None:
        return None
    groups = []
    for i, e in enumerate(centers):
        members = sorted(m for comp, g in zip(graph.components, where) if g == i for m in comp)
        if not members:
            continue
        intervals = derive_cd_intervals({m: max_intervals[m] for m in members}, e)
        groups.append(Group(tuple(members), e, intervals))
    return GroupingPlan(tuple(groups), centers)


def cluster_sources(act: ActivationResult, graph: CollaborationGraph | None = None,
                    config: ClusterConfig | None = None) -> GroupingPlan:
    """Try every allowed (group count, base set) and keep the best plan.

    Plans are ranked by the summed per-group channel estimate, then by the
    number of non-empty groups, then by the base tuple.
    """
    if graph is None:
        graph = build_graph(act)
    config = config or ClusterConfig()
    u = act.max_intervals
    if not u:
        return GroupingPlan(())
    values = sorted(set(u.values()))
    limit = min(graph.num_components, len(values))
    if config.max_groups is not None:
        limit = min(limit, config.max_groups)
    best = None
    best_key = None
    tried = 0
    for i in range(1, max(limit, 1) + 1):
        candidates = config.base_sets.get(i)
        if candidates is None:
            candidates = itertools.combinations(values, i)
        for centers in candidates:
            plan = plan_for_centers(graph, u, centers)
            tried += 1
            if plan is None:
                continue
            key = (plan.objective, len(plan.groups), tuple(sorted(centers)))
            if best_key is None or key < best_key:
                best, best_key = plan, key
    # One group at the smallest max interval is always finite.
    assert best is not None
    return GroupingPlan(best.groups, best.centers, tried)


def min_alignment_tolerance(c_m: int, c_z: int) -> int:
    """Smallest tolerance for which offsets exist that keep m within range of every z update."""
    return c_m - gcd(c_m, c_z)


def alignment_feasible(c_members: int | Iterable[int], c_z: int, T: int) -> bool:
    if isinstance(c_members, int):
        c_members = [c_members]
    return all(T >= min_alignment_tolerance(c, c_z) for c in c_members)


def staleness_values(c_m: int, c_z: int, o_m: int, o_z: int) -> set[int]:
    """All gaps between a z update and m's latest update, over one full cycle."""
    g = gcd(c_m, c_z)
    return {(i * c_z + o_z - o_m) % c_m for i in range(c_m // g)}


def hyperperiod(intervals: Iterable[int]) -> int:
    out = 1
    for c in intervals:
        out = lcm(out, c)
    return out
