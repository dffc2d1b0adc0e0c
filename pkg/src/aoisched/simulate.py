"""Slot-by-slot AoI simulation and channel accounting for periodic schedules."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Sequence

from .model import (
    DecisionSource,
    HomogeneousSchedule,
    Instance,
    ScheduleWindow,
    source_label,
)


@dataclass
class AoITrace:
    """Ages ``ages[t-1][n-1] = A_n(t)`` for t = 1..horizon."""

    ages: list[list[int]]
    deadlines: list[int]
    violations: list[tuple[int, int]] = field(default_factory=list)

    @property
    def horizon(self) -> int:
        return len(self.ages)

    def age(self, n: int, t: int) -> int:
        return self.ages[t - 1][n - 1]

    def max_age(self) -> list[int]:
        if not self.ages:
            return [0] * len(self.deadlines)
        return [max(col) for col in zip(*self.ages)]

    def first_violation(self, n: int) -> int | None:
        for region, t in self.violations:
            if region == n:
                return t
        return None

    @property
    def feasible(self) -> bool:
        return not self.violations

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["t"] + [f"A_{n}" for n in range(1, len(self.deadlines) + 1)])
        for t, row in enumerate(self.ages, start=1):
            writer.writerow([t, *row])
        return buf.getvalue()


def latest_generation_time(s: DecisionSource, m: int, t: int) -> int | None:
    """Generation slot of the freshest update from ``m`` available at slot ``t``.

    An update sent in slot t' arrives at the end of t' and is usable by the
    fusion evaluated for that same slot.
    """
    return s.latest_generation_time(m, t)


def _region_refreshed(region, scheduled: set[int], latest: dict[int, int], t: int) -> bool:
    if any(m in scheduled for m in region.direct):
        return True
    for combo in region.combos:
        if not any(m in scheduled for m in combo):
            continue
        gens = [latest.get(m) for m in combo]
        if any(g is None for g in gens):
            continue
        if t - min(gens) <= region.tolerance:
            return True
    return False


def step_aoi(inst: Instance, s: DecisionSource, t: int, ages: Sequence[int],
             latest: dict[int, int] | None = None) -> list[int]:
    """Ages for slot t+1 given the ages at slot t.

    ``latest`` (source -> last generation slot up to t) may be supplied by a
    caller stepping forward incrementally; otherwise it is recomputed from ``s``.
    """
    if len(ages) != inst.N:
        raise ValueError(f"expected {inst.N} ages, got {len(ages)}")
    scheduled = {m for m in s.sources() if s.decision_at(m, t)}
    if latest is None:
        latest = {}
        for m in s.sources():
            g = s.latest_generation_time(m, t)
            if g is not None:
                latest[m] = g
    return [
        1 if _region_refreshed(r, scheduled, latest, t) else a + 1
        for r, a in zip(inst.regions, ages)
    ]


def simulate(inst: Instance, s: DecisionSource, horizon: int | None = None) -> AoITrace:
    """Run the AoI recursion from A_n(1) = 1 and record every deadline violation."""
    if horizon is None:
        if not isinstance(s, HomogeneousSchedule):
            raise ValueError("horizon is required for non-periodic schedules")
        horizon = default_horizon(inst, s)
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    deadlines = [r.deadline for r in inst.regions]
    sources = list(s.sources())
    ages = [1] * inst.N
    trace = AoITrace(ages=[list(ages)], deadlines=deadlines)
    latest: dict[int, int] = {}
    for t in range(1, horizon):
        for m in sources:
            if s.decision_at(m, t):
                latest[m] = t
        ages = step_aoi(inst, s, t, ages, latest)
        trace.ages.append(ages)
    for t, row in enumerate(trace.ages, start=1):
        for n, (a, d) in enumerate(zip(row, deadlines), start=1):
            if a > d:
                trace.violations.append((n, t))
    trace.violations.sort(key=lambda v: (v[1], v[0]))
    return trace


def default_horizon(inst: Instance, s: HomogeneousSchedule) -> int:
    """Two hyperperiods plus the largest deadline; enough to expose any steady-state miss."""
    max_d = max((r.deadline for r in inst.regions), default=1)
    if not s.entries:
        return max_d + 1
    return 2 * s.hyperperiod() + max_d


def slot_loads(s: HomogeneousSchedule) -> list[int]:
    """Number of sources transmitting in each slot of one hyperperiod."""
    if not s.entries:
        return []
    C = s.hyperperiod()
    load = [0] * C
    for c, o in s.entries.values():
        for t in range(o - 1, C, c):
            load[t] += 1
    return load


def required_channels(s: HomogeneousSchedule) -> int:
    if not s.entries:
        raise ValueError("schedule is empty")
    return max(slot_loads(s))


def assign_channels(s: HomogeneousSchedule, horizon: int | None = None) -> ScheduleWindow:
    """First-fit channel assignment: in each slot, scheduled sources in id order take channels 1..K."""
    if horizon is None:
        horizon = s.hyperperiod() if s.entries else 0
    sources = s.sources()
    K = required_channels(s) if s.entries else 0
    decisions = []
    channels = []
    for t in range(1, horizon + 1):
        row = [0] * max(sources, default=0)
        cells = [0] * K
        k = 0
        for m in sources:
            if s.decision_at(m, t):
                row[m - 1] = 1
                cells[k] = m
                k += 1
        decisions.append(row)
        channels.append(cells)
    return ScheduleWindow(horizon=horizon, decisions=decisions, channels=channels)


IDLE = "□"


def render_window(window: ScheduleWindow, label=source_label) -> str:
    """Fixed-width text table: one row per channel, one column per slot."""
    if not window.channels or not window.channels[0]:
        return ""
    K = len(window.channels[0])
    cells = [[label(m) if m else IDLE for m in slot] for slot in window.channels]
    width = max(len(str(window.horizon)), *(len(c) for slot in cells for c in slot))
    head_w = len(f"channel {K}")
    lines = ["time slot".ljust(head_w) + " " + " ".join(
        str(t).rjust(width) for t in range(1, window.horizon + 1))]
    for k in range(K):
        lines.append(f"channel {k + 1}".ljust(head_w) + " " + " ".join(
            slot[k].rjust(width) for slot in cells))
    return "\n".join(lines)
