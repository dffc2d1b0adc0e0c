"""Channel lower bound from the fractional covering LP over per-source updating rates.

Each region n contributes one covering row

    sum_j sum_{m in combo j} l_m + sum_{m in F_n} l_m >= 1 / d_n

so a source's coefficient is 1 if it is a direct source plus the number of
combos it belongs to. The bound is ceil(min sum_m l_m).

The LP is solved exactly over the rationals. We run Bland's-rule simplex on
the dual (max b.y s.t. A^T y <= 1, y >= 0), whose all-slack basis is feasible
from the start, and read the primal rates off the final reduced costs of the
slack columns. Box constraints l_m <= 1 never bind at an optimum because every
coefficient is >= 1 and every right-hand side is <= 1, so they are dropped.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .model import Instance

CEIL_GUARD = Fraction(1, 10**9)


class LPError(RuntimeError):
    pass


@dataclass(frozen=True)
class ConstraintSystem:
    """Rows ``coeffs[n] . l >= rhs[n]`` over sources 1..M (column m-1 is source m)."""

    coeffs: tuple[tuple[int, ...], ...]
    rhs: tuple[Fraction, ...]

    @property
    def num_sources(self) -> int:
        return len(self.coeffs[0]) if self.coeffs else 0

    def row_activity(self, n: int, rates) -> Fraction:
        return sum((a * rates[m] for m, a in enumerate(self.coeffs[n]) if a), Fraction(0))


@dataclass(frozen=True)
class RateVector:
    rates: dict[int, Fraction]

    @property
    def total(self) -> Fraction:
        return sum(self.rates.values(), Fraction(0))

    def __getitem__(self, m: int) -> Fraction:
        return self.rates.get(m, Fraction(0))


@dataclass(frozen=True)
class LowerBound:
    rates: RateVector
    total: Fraction
    channels: int


def build_lb_constraints(inst: Instance) -> ConstraintSystem:
    M = inst.num_sources
    rows = []
    rhs = []
    for r in inst.regions:
        row = [0] * M
        for m in r.direct:
            row[m - 1] += 1
        for combo in r.combos:
            for m in combo:
                row[m - 1] += 1
        rows.append(tuple(row))
        rhs.append(Fraction(1, r.deadline))
    return ConstraintSystem(tuple(rows), tuple(rhs))


def solve_covering_lp(system: ConstraintSystem, max_pivots: int = 100_000) -> tuple[list[Fraction], Fraction]:
    """Minimise sum(l) subject to ``system`` and l >= 0; returns (l, optimum)."""
    N = len(system.coeffs)
    M = system.num_sources
    if N == 0:
        return [Fraction(0)] * M, Fraction(0)
    # Dual tableau: M rows (one per source), columns y_1..y_N then slacks s_1..s_M.
    width = N + M
    tab = []
    for m in range(M):
        row = [Fraction(system.coeffs[n][m]) for n in range(N)]
        row += [Fraction(int(i == m)) for i in range(M)]
        row.append(Fraction(1))
        tab.append(row)
    # Reduced-cost row for maximisation: entries are (c_B B^-1 A_j - c_j); optimal when all >= 0.
    obj = [-system.rhs[n] for n in range(N)] + [Fraction(0)] * M + [Fraction(0)]
    basis = [N + m for m in range(M)]

    for _ in range(max_pivots):
        entering = next((j for j in range(width) if obj[j] < 0), None)
        if entering is None:
            break
        leaving = None
        best_ratio = None
        for i in range(M):
            a = tab[i][entering]
            if a > 0:
                ratio = tab[i][-1] / a
                if (best_ratio is None or ratio < best_ratio
                        or (ratio == best_ratio and basis[i] < basis[leaving])):
                    best_ratio, leaving = ratio, i
        if leaving is None:
            raise LPError("covering LP is infeasible: some region has no contributing source")
        piv = tab[leaving][entering]
        prow = [v / piv for v in tab[leaving]]
        tab[leaving] = prow
        for i in range(M):
            if i != leaving:
                f = tab[i][entering]
                if f:
                    tab[i] = [v - f * p for v, p in zip(tab[i], prow)]
        f = obj[entering]
        obj = [v - f * p for v, p in zip(obj, prow)]
        basis[leaving] = entering
    else:
        raise LPError(f"simplex did not converge within {max_pivots} pivots")

    rates = [obj[N + m] for m in range(M)]
    optimum = obj[-1]
    # Strong duality and primal feasibility hold exactly in rational arithmetic.
    assert sum(rates, Fraction(0)) == optimum
    for n in range(N):
        assert system.row_activity(n, rates) >= system.rhs[n]
    assert all(0 <= v <= 1 for v in rates)
    return rates, optimum


def lb_channels(total: Fraction) -> int:
    return max(1, math.ceil(total - CEIL_GUARD))


def solve_lb(inst: Instance) -> LowerBound:
    system = build_lb_constraints(inst)
    rates, optimum = solve_covering_lp(system)
    vec = RateVector({m: rates[m - 1] for m in range(1, inst.num_sources + 1)})
    return LowerBound(rates=vec, total=optimum, channels=lb_channels(optimum))
