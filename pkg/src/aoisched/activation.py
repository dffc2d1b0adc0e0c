"""Choose which sources to activate: one direct source or one combination per region.

The objective is the total minimal updating rate, where an active source must
update at least as often as the tightest deadline among the regions it serves.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy.optimize import linprog
from scipy.sparse import coo_matrix

from .model import Instance, RegionSpec, lcm_all

log = logging.getLogger(__name__)

DEFAULT_NODE_BUDGET = 10**7


@dataclass(frozen=True)
class Option:
    index: int
    members: tuple[int, ...]
    kind: str  # "direct" or "combo"
    combo_index: int | None = None  # 1-based j of k_{n,j} for combos

    def describe(self) -> str:
        if self.kind == "direct":
            return f"direct {self.members[0]}"
        return f"combo {self.combo_index} {list(self.members)}"


def enumerate_options(r: RegionSpec) -> list[Option]:
    opts = [Option(i, (m,), "direct") for i, m in enumerate(r.direct)]
    base = len(opts)
    for j, combo in enumerate(r.combos):
        opts.append(Option(base + j, tuple(combo), "combo", j + 1))
    return opts


@dataclass(frozen=True)
class ActivationResult:
    num_sources: int
    deadlines: tuple[int, ...]
    chosen: tuple[Option, ...]  # per region, index n-1
    certified: bool = True
    nodes: int = 0

    @property
    def active_sets(self) -> tuple[tuple[int, ...], ...]:
        """M_n for each region."""
        return tuple(opt.members for opt in self.chosen)

    @property
    def region_sets(self) -> dict[int, tuple[int, ...]]:
        """N_m for each active source."""
        out: dict[int, list[int]] = {}
        for n, members in enumerate(self.active_sets, start=1):
            for m in members:
                out.setdefault(m, []).append(n)
        return {m: tuple(ns) for m, ns in sorted(out.items())}

    @property
    def active_sources(self) -> tuple[int, ...]:
        return tuple(self.region_sets)

    @property
    def Q(self) -> list[list[int]]:
        q = [[0] * len(self.deadlines) for _ in range(self.num_sources)]
        for n, members in enumerate(self.active_sets):
            for m in members:
                q[m - 1][n] = 1
        return q

    def max_interval(self, m: int) -> int:
        """floor(1/l'_m): the tightest deadline among the regions m serves."""
        return min(self.deadlines[n - 1] for n in self.region_sets[m])

    @property
    def max_intervals(self) -> dict[int, int]:
        return {m: self.max_interval(m) for m in self.region_sets}

    @property
    def rates(self) -> dict[int, Fraction]:
        active = self.region_sets
        return {
            m: (Fraction(1, self.max_interval(m)) if m in active else Fraction(0))
            for m in range(1, self.num_sources + 1)
        }

    @property
    def objective(self) -> Fraction:
        return sum(self.rates.values(), Fraction(0))

    def to_dict(self) -> dict:
        return {
            "chosen": [
                {"region": n, "option": opt.index, "kind": opt.kind,
                 "members": list(opt.members)}
                for n, opt in enumerate(self.chosen, start=1)
            ],
            "max_intervals": {str(m): u for m, u in self.max_intervals.items()},
            "objective": str(self.objective),
            "certified": self.certified,
        }


def option_cost(members: Sequence[int], weight: int, active: dict[int, int]) -> int:
    return sum(weight for m in members if m not in active)


def _greedy(order, options, weights) -> tuple[int, list[int]]:
    active: dict[int, int] = {}
    cost = 0
    picks = []
    for n in order:
        w = weights[n]
        best = min(options[n], key=lambda o: (option_cost(o.members, w, active), o.index))
        cost += option_cost(best.members, w, active)
        for m in best.members:
            active.setdefault(m, w)
        picks.append(best.index)
    return cost, picks


def region_components(inst: Instance) -> list[list[int]]:
    """Group region indices (0-based) that share a candidate source; costs add across groups."""
    parent = list(range(inst.N))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    owner: dict[int, int] = {}
    for n, r in enumerate(inst.regions):
        for m in r.sources:
            if m in owner:
                a, b = find(owner[m]), find(n)
                if a != b:
                    parent[max(a, b)] = min(a, b)
            else:
                owner[m] = n
    comps: dict[int, list[int]] = {}
    for n in range(inst.N):
        comps.setdefault(find(n), []).append(n)
    return sorted(comps.values())


def solve_activation(inst: Instance, node_budget: int = DEFAULT_NODE_BUDGET) -> ActivationResult:
    """Exact depth-first branch-and-bound over per-region options.

    Regions that share no candidate source are solved independently. Within
    a component, regions are processed in ascending deadline order (ties by
    id), so the first region that activates a source fixes its rate, and
    options are tried in index order; among optimal choices the first one in
    that order wins. Costs are integers scaled by the lcm of all deadlines.
    Two lower bounds are used and the larger one wins. The first charges each
    not-yet-active source 1/d_n split evenly over the remaining regions that
    could use it, which never exceeds its true cost. The second comes from a
    dual solution of the linear relaxation (see ``_dual_bound``).
    """
    N = inst.N
    if N == 0:
        return ActivationResult(inst.num_sources, (), ())
    L = lcm_all(r.deadline for r in inst.regions)
    weights = [L // r.deadline for r in inst.regions]
    options = [enumerate_options(r) for r in inst.regions]
    for n, opts in enumerate(options, start=1):
        if not opts:
            raise ValueError(f"region {n} has no direct source and no combination")
    chosen: list[Option | None] = [None] * N
    total = 0
    nodes = 0
    certified = True
    for comp in region_components(inst):
        order = sorted(comp, key=lambda n: (inst.regions[n].deadline, n))
        cost, picks, used, ok = _search(order, options, weights, node_budget - nodes)
        total += cost
        nodes += used
        certified &= ok
        for n, idx in zip(order, picks):
            chosen[n] = options[n][idx]
    if not certified:
        log.warning("activation node budget %d exhausted; returning best found", node_budget)
    result = ActivationResult(
        num_sources=inst.num_sources,
        deadlines=tuple(r.deadline for r in inst.regions),
        chosen=tuple(chosen),
        certified=certified,
        nodes=nodes,
    )
    assert result.objective == Fraction(total, L)
    return result


@dataclass
class _DualBound:
    """Reduced costs of a linear relaxation, giving a bound valid at every node.

    Variables: y[k][o] (region at position k picks option o) and g[m][k]
    (source m active by position k, non-decreasing in k). With weights
    non-increasing along the order, the cost of an integer solution is
    sum_m sum_k (w_k - w_{k+1}) g[m][k]. For any multipliers u_eq (free) on
    the pick-one rows and u_ub <= 0 on the linking and monotonicity rows,
    cost >= sum(u_eq) + r.x with r = c - A^T u, whatever the LP solver
    returned; a node bound follows by fixing the decided entries of x and
    taking min(r, 0) for the free ones.
    """

    base: float
    ry: list[list[float]]
    rg: dict[int, list[float]]
    neg_y: list[float]
    neg_g: list[float]
    suf_r: dict[int, list[float]]
    suf_neg: dict[int, list[float]]

    def root(self) -> float:
        return self.base + sum(self.neg_y) + sum(self.neg_g)

    def step(self, pos: int, option: int, added, active_after) -> float:
        """Change in the bound when position ``pos`` is decided."""
        d = self.ry[pos][option] - self.neg_y[pos]
        for m in added:
            d += self.suf_r[m][pos] - self.suf_neg[m][pos]
        d -= self.neg_g[pos]
        for m in active_after:
            r = self.rg.get(m)
            if r is not None and r[pos] < 0:
                d += r[pos]
        return d


def _dual_bound(order, options, weights) -> _DualBound | None:
    K = len(order)
    srcs = sorted({m for n in order for o in options[n] for m in o.members})
    yoff = []
    nv = 0
    for n in order:
        yoff.append(nv)
        nv += len(options[n])
    gcol = {}
    for m in srcs:
        gcol[m] = nv
        nv += K
    w = [weights[n] for n in order] + [0]
    c = np.zeros(nv)
    for m in srcs:
        for k in range(K):
            c[gcol[m] + k] = w[k] - w[k + 1]
    rows, cols, vals = [], [], []
    nub = 0
    for m in srcs:
        for k in range(K):
            if k > 0:  # g[m][k-1] <= g[m][k]
                rows += [nub, nub]
                cols += [gcol[m] + k - 1, gcol[m] + k]
                vals += [1.0, -1.0]
                nub += 1
            use = [yoff[k] + o.index for o in options[order[k]] if m in o.members]
            if use:  # sum of options using m <= g[m][k]
                rows += [nub] * (len(use) + 1)
                cols += use + [gcol[m] + k]
                vals += [1.0] * len(use) + [-1.0]
                nub += 1
    A_ub = coo_matrix((vals, (rows, cols)), shape=(nub, nv)).tocsr()
    er, ec = [], []
    for k, n in enumerate(order):
        for o in options[n]:
            er.append(k)
            ec.append(yoff[k] + o.index)
    A_eq = coo_matrix((np.ones(len(er)), (er, ec)), shape=(K, nv)).tocsr()
    try:
        res = linprog(c, A_ub=A_ub, b_ub=np.zeros(nub), A_eq=A_eq, b_eq=np.ones(K),
                      bounds=(0, 1), method="highs")
    except ValueError:
        return None
    if res.status != 0:
        return None
    u_eq = np.asarray(res.eqlin.marginals)
    u_ub = np.minimum(np.asarray(res.ineqlin.marginals), 0.0)
    r = c - A_eq.T @ u_eq - A_ub.T @ u_ub
    ry = [[float(r[yoff[k] + o.index]) for o in options[n]] for k, n in enumerate(order)]
    rg = {m: [float(v) for v in r[gcol[m]:gcol[m] + K]] for m in srcs}
    neg_y = [sum(min(v, 0.0) for v in row) for row in ry]
    neg_g = [sum(min(rg[m][k], 0.0) for m in srcs) for k in range(K)]
    suf_r, suf_neg = {}, {}
    for m in srcs:
        a, b = [0.0] * (K + 1), [0.0] * (K + 1)
        for k in range(K - 1, -1, -1):
            a[k] = a[k + 1] + rg[m][k]
            b[k] = b[k + 1] + min(rg[m][k], 0.0)
        suf_r[m], suf_neg[m] = a, b
    return _DualBound(float(u_eq.sum()), ry, rg, neg_y, neg_g, suf_r, suf_neg)


def _search(order: list[int], options: list[list[Option]], weights: list[int],
            node_budget: int) -> tuple[int, list[int], int, bool]:
    K = len(order)
    # shares[pos][p - pos][option] -> [(source, share)] for the regions still ahead of pos
    users: list[dict[int, int]] = [dict() for _ in range(K + 1)]
    for pos in range(K - 1, -1, -1):
        cur = dict(users[pos + 1])
        for o in options[order[pos]]:
            for m in o.members:
                cur[m] = cur.get(m, 0) + 1
        users[pos] = cur
    shares = []
    for pos in range(K):
        cnt = users[pos]
        rows = []
        for p in range(pos, K):
            n = order[p]
            w = weights[n]
            rows.append([[(m, w / cnt[m]) for m in o.members] for o in options[n]])
        shares.append(rows)

    inc_cost, inc_picks = _greedy(order, options, weights)
    dual = _dual_bound(order, options, weights) if K > 1 else None
    eps = 1e-6
    from_search = False
    nodes = 0
    exhausted = False
    active: set[int] = set()
    picks: list[int] = []

    def bound_exceeds(pos: int, budget: float) -> bool:
        """True when the remaining regions provably cost more than ``budget``."""
        total = 0.0
        for row in shares[pos]:
            best = None
            for opt in row:
                c = 0.0
                for m, sh in opt:
                    if m not in active:
                        c += sh
                if best is None or c < best:
                    best = c
                    if c == 0.0:
                        break
            total += best
            if total * (1 - 1e-12) > budget:
                return True
        return False

    def dual_cuts(lb: float) -> bool:
        # Costs are integers: once the incumbent comes from the search only
        # strictly cheaper completions matter.
        limit = inc_cost - 1 if from_search else inc_cost
        return lb > limit + eps

    def dfs(pos: int, cost: int, lb: float) -> None:
        nonlocal inc_cost, inc_picks, from_search, nodes, exhausted
        if exhausted:
            return
        nodes += 1
        if nodes > node_budget:
            exhausted = True
            return
        if pos == K:
            if cost < inc_cost or (cost == inc_cost and not from_search):
                inc_cost, inc_picks, from_search = cost, list(picks), True
            return
        # With an incumbent from the search itself, ties cannot win, so cut at equality.
        if dual is not None and dual_cuts(lb):
            return
        slack = inc_cost - cost
        if from_search:
            if slack <= 0 or bound_exceeds(pos, slack - 0.5):
                return
        elif bound_exceeds(pos, slack):
            return
        n = order[pos]
        w = weights[n]
        for o in options[n]:
            added = [m for m in o.members if m not in active]
            new_cost = cost + w * len(added)
            if new_cost > inc_cost or (from_search and new_cost >= inc_cost):
                continue
            active.update(added)
            child_lb = lb + dual.step(pos, o.index, added, active) if dual is not None else 0.0
            if dual is not None and dual_cuts(child_lb):
                active.difference_update(added)
                continue
            picks.append(o.index)
            dfs(pos + 1, new_cost, child_lb)
            picks.pop()
            active.difference_update(added)

    dfs(0, 0, dual.root() if dual is not None else 0.0)
    return inc_cost, inc_picks, nodes, not exhausted


def activation_from_sets(inst: Instance, active_sets: Sequence[Sequence[int]]) -> ActivationResult:
    """Build a result from explicitly chosen per-region sets (must match an option)."""
    chosen = []
    for r, members in zip(inst.regions, active_sets):
        want = tuple(sorted(members))
        match = [o for o in enumerate_options(r) if o.members == want]
        if not match:
            raise ValueError(f"region {r.id}: {list(want)} is not a direct source or combination")
        chosen.append(match[0])
    return ActivationResult(inst.num_sources, tuple(r.deadline for r in inst.regions), tuple(chosen))
