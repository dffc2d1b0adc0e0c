"""Offset selection: minimise the peak per-slot load subject to fusion alignment.

For each region served by several sources, the member with the largest
interval (``z``) must transmit last, and every other member's latest update
must be at most ``T`` slots older than each transmission of ``z``. With
divisible intervals that gap is the same for every transmission of ``z``.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .model import HomogeneousSchedule, lcm, lcm_all

log = logging.getLogger(__name__)

DEFAULT_NODE_BUDGET = 500_000


class UnsatisfiableOffsets(RuntimeError):
    """The alignment constraints admit no offsets (cannot happen with divisible intervals)."""


@dataclass(frozen=True)
class RegionConstraint:
    region: int
    members: tuple[int, ...]
    z: int
    tolerance: int


@dataclass(frozen=True)
class OffsetProblem:
    intervals: dict[int, int]
    constraints: tuple[RegionConstraint, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "intervals", dict(sorted(self.intervals.items())))
        for rc in self.constraints:
            cz = self.intervals[rc.z]
            for m in rc.members:
                if cz % self.intervals[m]:
                    raise ValueError(
                        f"region {rc.region}: interval of source {m} ({self.intervals[m]}) "
                        f"does not divide that of z={rc.z} ({cz})"
                    )

    @property
    def hyperperiod(self) -> int:
        return lcm_all(self.intervals.values())

    @classmethod
    def build(cls, intervals: Mapping[int, int],
              regions: Iterable[tuple[int, Sequence[int], int]]) -> OffsetProblem:
        """``regions`` yields (region id, active members, tolerance); singletons are dropped."""
        cons = []
        for n, members, T in regions:
            if len(members) < 2:
                continue
            z = designate_z(members, intervals)
            cons.append(RegionConstraint(n, tuple(sorted(members)), z, T))
        return cls(dict(intervals), tuple(cons))

    def pairs(self) -> dict[tuple[int, int], int]:
        """(member, z) -> tightest tolerance across regions."""
        out: dict[tuple[int, int], int] = {}
        for rc in self.constraints:
            for m in rc.members:
                if m != rc.z:
                    key = (m, rc.z)
                    out[key] = min(out.get(key, rc.tolerance), rc.tolerance)
        return out

    def to_dict(self) -> dict:
        return {
            "intervals": {str(m): c for m, c in self.intervals.items()},
            "regions": [
                {"id": rc.region, "members": list(rc.members), "T": rc.tolerance}
                for rc in self.constraints
            ],
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> OffsetProblem:
        from .model import parse_source

        intervals = {parse_source(m): int(c) for m, c in data["intervals"].items()}
        regions = [
            (int(r.get("id", i)), [parse_source(m) for m in r["members"]], int(r["T"]))
            for i, r in enumerate(data.get("regions", []), start=1)
        ]
        return cls.build(intervals, regions)


def designate_z(members: Sequence[int], intervals: Mapping[int, int]) -> int:
    """Member with the largest interval; ties go to the largest source id."""
    return max(members, key=lambda m: (intervals[m], m))


def staleness(o_m: int, c_m: int, o_z: int, c_z: int, i: int) -> int:
    """Age of m's latest update at the (i+1)-th transmission of z."""
    if i < 0:
        raise ValueError("i must be >= 0")
    return (i * c_z + o_z - o_m) % c_m


def constraints_satisfied(offsets: Mapping[int, int], problem: OffsetProblem) -> bool:
    for m, c in problem.intervals.items():
        if not 1 <= offsets[m] <= c:
            return False
    for (m, z), T in problem.pairs().items():
        if offsets[m] > offsets[z]:
            return False
        if (offsets[z] - offsets[m]) % problem.intervals[m] > T:
            return False
    return True


def peak_load(intervals: Mapping[int, int], offsets: Mapping[int, int]) -> int:
    C = lcm_all(intervals.values())
    load = [0] * C
    for m, c in intervals.items():
        for t in range(offsets[m] - 1, C, c):
            load[t] += 1
    return max(load, default=0)


def alignment_ok(offsets: Mapping[int, int], intervals: Mapping[int, int],
                 regions: Iterable[tuple[Sequence[int], int]]) -> bool:
    """Alignment check that does not assume divisible intervals.

    Every member must start no later than z, and at each transmission of z
    over a full cycle its latest update may be at most T slots old.
    """
    for members, T in regions:
        if len(members) < 2:
            continue
        z = designate_z(members, intervals)
        cz, oz = intervals[z], offsets[z]
        for m in members:
            if m == z:
                continue
            cm, om = intervals[m], offsets[m]
            if om > oz:
                return False
            if any(staleness(om, cm, oz, cz, i) > T for i in range(cm // math.gcd(cm, cz))):
                return False
    return True


def exhaustive_offsets(intervals: Mapping[int, int],
                       regions: Iterable[tuple[Sequence[int], int]] = ()) -> tuple[int, list[dict[int, int]]]:
    """Minimum peak over every offset tuple, with all tuples attaining it.

    Intended for small problems: the work is the product of the intervals
    times the hyperperiod. Returns (0, []) when no tuple meets the alignment
    rule.
    """
    regions = [(tuple(mem), T) for mem, T in regions]
    srcs = sorted(intervals)
    best = 0
    winners: list[dict[int, int]] = []
    for combo in itertools.product(*(range(1, intervals[m] + 1) for m in srcs)):
        offs = dict(zip(srcs, combo))
        if not alignment_ok(offs, intervals, regions):
            continue
        k = peak_load(intervals, offs)
        if not winners or k < best:
            best, winners = k, [offs]
        elif k == best:
            winners.append(offs)
    return best, winners


@dataclass
class OffsetSolution:
    offsets: dict[int, int]
    channels: int
    lower_bound: int
    certified: bool = True
    nodes: int = 0
    notes: list[str] = field(default_factory=list)

    def schedule(self, intervals: Mapping[int, int]) -> HomogeneousSchedule:
        return HomogeneousSchedule.from_maps(intervals, self.offsets)


def rate_bound(intervals: Iterable[int]) -> int:
    return max(1, math.ceil(sum((Fraction(1, c) for c in intervals), Fraction(0))))


def coprime_blocks(problem: OffsetProblem) -> list[list[int]]:
    """Split sources into blocks with no shared constraints and pairwise coprime periods.

    The load of a block is periodic in its own period, and when periods are
    pairwise coprime every combination of phases occurs in some slot. The
    overall peak is then the sum of the block peaks, so blocks can be solved
    independently without losing optimality.
    """
    parent = {m: m for m in problem.intervals}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(a, b):
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)

    for m, z in problem.pairs():
        union(m, z)
    while True:
        roots = sorted({find(m) for m in parent})
        period = {r: 1 for r in roots}
        for m, c in problem.intervals.items():
            r = find(m)
            period[r] = lcm(period[r], c)
        merged = False
        for a, b in itertools.combinations(roots, 2):
            if math.gcd(period[a], period[b]) > 1:
                union(a, b)
                merged = True
                break
        if not merged:
            break
    blocks: dict[int, list[int]] = {}
    for m in sorted(parent):
        blocks.setdefault(find(m), []).append(m)
    return sorted(blocks.values())


def residue_bound(problem: OffsetProblem) -> int:
    """Lower bound on the peak from splitting slots into residue classes mod q.

    For a divisor q of the hyperperiod, a source with interval c visits the
    slots t = r (mod q) once every c/gcd(c, q) of them. Sources are grouped
    into parts that share no constraint and whose within-class periods are
    pairwise coprime; inside one class every combination of part phases then
    occurs, so the class peak is the sum of the part peaks, each at least
    the ceiling of its density there. Letting sources with gcd(c, q) > 1 move
    freely between classes turns the remaining question into a transportation
    feasibility check per target peak.
    """
    intervals = problem.intervals
    if not intervals:
        return 0
    C = problem.hyperperiod
    best = rate_bound(intervals.values())
    pairs = list(problem.pairs())
    for q in divisors(C):
        if q > 1:
            best = max(best, _residue_bound_q(intervals, pairs, q))
    return best


def divisors(n: int) -> list[int]:
    small, large = [], []
    for d in range(1, math.isqrt(n) + 1):
        if n % d == 0:
            small.append(d)
            if d != n // d:
                large.append(n // d)
    return small + large[::-1]


def _residue_bound_q(intervals: Mapping[int, int], pairs, q: int) -> int:
    parent = {m: m for m in intervals}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for m, z in pairs:
        a, b = find(m), find(z)
        if a != b:
            parent[max(a, b)] = min(a, b)
    while True:
        period: dict[int, int] = {}
        for m, c in intervals.items():
            r = find(m)
            period[r] = lcm(period.get(r, 1), c // math.gcd(c, q))
        merged = False
        for a, b in itertools.combinations(sorted(period), 2):
            if math.gcd(period[a], period[b]) > 1:
                parent[max(a, b)] = min(a, b)
                merged = True
                break
        if not merged:
            break
    parts = sorted(period)
    if len(parts) < 2:
        return 0
    fixed = {p: Fraction(0) for p in parts}  # per-class density that cannot move
    total = {p: Fraction(0) for p in parts}  # density summed over all q classes
    for m, c in intervals.items():
        p = find(m)
        total[p] += Fraction(q, c)
        if math.gcd(c, q) == 1:
            fixed[p] += Fraction(1, c)
    floor_ = {p: math.ceil(fixed[p]) for p in parts}
    need = sum(max(0, math.ceil(total[p]) - q * floor_[p]) for p in parts)
    base = sum(floor_.values())
    # Smallest K with K >= base in every class and q * (K - base) >= need.
    return base + max(0, -(-need // q))


def solve_offsets(problem: OffsetProblem, node_budget: int = DEFAULT_NODE_BUDGET) -> OffsetSolution:
    """Minimum-peak offsets, solving each coprime block exactly and adding the peaks."""
    if not problem.intervals:
        return OffsetSolution({}, 0, 0)
    offsets: dict[int, int] = {}
    peak = 0
    certified = True
    nodes = 0
    lb = 0
    notes: list[str] = []
    for block in coprime_blocks(problem):
        members = set(block)
        sub = OffsetProblem(
            {m: problem.intervals[m] for m in block},
            tuple(rc for rc in problem.constraints if rc.z in members),
        )
        sol = _solve_block(sub, node_budget)
        offsets.update(sol.offsets)
        peak += sol.channels
        lb += sol.lower_bound
        certified &= sol.certified
        nodes += sol.nodes
        notes.extend(sol.notes)
    offsets = dict(sorted(offsets.items()))
    assert peak == peak_load(problem.intervals, offsets)
    assert constraints_satisfied(offsets, problem)
    return OffsetSolution(offsets, peak, lb, certified=certified or peak <= lb,
                          nodes=nodes, notes=notes)


def _solve_block(problem: OffsetProblem, node_budget: int) -> OffsetSolution:
    """Depth-first branch-and-bound over offsets.

    Sources are fixed in ascending interval order (ties by id): on a
    divisibility chain, putting each source on its least-loaded residue in
    this order keeps all slot loads within one of each other. Candidate
    offsets are filtered by the alignment constraints against already-fixed
    sources and tried in order of the peak they would create. A branch is cut
    when its peak reaches the incumbent, when the free capacity below the
    incumbent cannot absorb the remaining transmissions, or when some
    remaining source has no offset that stays below the incumbent.
    Unconstrained sources with equal intervals are interchangeable, so their
    offsets are forced to be non-decreasing.
    """
    intervals = problem.intervals
    if not intervals:
        return OffsetSolution({}, 0, 0)
    C = problem.hyperperiod
    order = sorted(intervals, key=lambda m: (intervals[m], m))
    pos_of = {m: i for i, m in enumerate(order)}
    lb = residue_bound(problem)

    pairs = problem.pairs()
    # Constraints are checked when the later of the two endpoints is placed.
    checks: dict[int, list[tuple[int, int, bool]]] = {m: [] for m in order}
    for (m, z), T in pairs.items():
        later, other = (m, z) if pos_of[m] > pos_of[z] else (z, m)
        checks[later].append((other, T, later == z))
    constrained = {m for pair in pairs for m in pair}
    prev_twin: dict[int, int | None] = {}
    last_free: dict[int, int] = {}
    for m in order:
        if m in constrained:
            prev_twin[m] = None
            continue
        prev_twin[m] = last_free.get(intervals[m])
        last_free[intervals[m]] = m

    hits = {m: [list(range(o - 1, C, intervals[m])) for o in range(1, intervals[m] + 1)]
            for m in order}
    demand_after = [0] * (len(order) + 1)
    for i in range(len(order) - 1, -1, -1):
        demand_after[i] = demand_after[i + 1] + C // intervals[order[i]]

    load = [0] * C
    assigned: dict[int, int] = {}
    best_k = len(order) + 1
    best: dict[int, int] | None = None
    nodes = 0
    exhausted = False

    def feasible_offsets(m: int) -> list[int]:
        c = intervals[m]
        out = []
        twin = prev_twin[m]
        floor_o = assigned[twin] if twin is not None else 1
        for o in range(floor_o, c + 1):
            ok = True
            for other, T, is_z in checks[m]:
                oo = assigned[other]
                if is_z:  # m is z, other is a member with interval c_other
                    if oo > o or (o - oo) % intervals[other] > T:
                        ok = False
                        break
                else:
                    if o > oo or (oo - o) % c > T:
                        ok = False
                        break
            if ok:
                out.append(o)
        return out

    def remaining_fits(pos: int, target: int) -> bool:
        free = sum(target - v for v in load if v < target)
        if free < demand_after[pos]:
            return False
        for m in order[pos:]:
            if not any(all(load[t] < target for t in h) for h in hits[m]):
                return False
        return True

    def dfs(pos: int, peak: int) -> bool:
        nonlocal best_k, best, nodes, exhausted
        nodes += 1
        if nodes > node_budget:
            exhausted = True
            return True
        if pos == len(order):
            if peak < best_k:
                best_k, best = peak, dict(assigned)
            return best_k <= lb
        if pos > 0 and not remaining_fits(pos, best_k - 1):
            return False
        m = order[pos]
        scored = []
        for o in feasible_offsets(m):
            h = hits[m][o - 1]
            local = max(load[t] for t in h) + 1
            if max(peak, local) >= best_k:
                continue
            scored.append((local, sum(load[t] for t in h), o))
        scored.sort()
        for local, _, o in scored:
            if max(peak, local) >= best_k:
                break
            h = hits[m][o - 1]
            for t in h:
                load[t] += 1
            assigned[m] = o
            stop = dfs(pos + 1, max(peak, local))
            del assigned[m]
            for t in h:
                load[t] -= 1
            if stop:
                return True
        return False

    dfs(0, 0)
    notes = []
    if best is None:
        if not exhausted:
            raise UnsatisfiableOffsets("alignment constraints unsatisfiable as written")
        best = {m: 1 for m in intervals}
        best_k = peak_load(intervals, best)
        notes.append("search budget exhausted before any leaf; using all-ones offsets")
    if exhausted:
        log.warning("offset search budget %d exhausted; peak %d not proven optimal", node_budget, best_k)
        notes.append(f"node budget {node_budget} exhausted")
    assert constraints_satisfied(best, problem)
    offsets = dict(sorted(best.items()))
    return OffsetSolution(offsets, best_k, lb, certified=not exhausted or best_k <= lb,
                          nodes=nodes, notes=notes)
