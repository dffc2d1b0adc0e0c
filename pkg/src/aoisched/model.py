"""Domain types shared by every stage: instances, schedules, integer helpers.

Slots are 1-based. Source ids are positive integers; letters are used only
for display (1 -> A, 2 -> B, ..., 27 -> AA).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Protocol

# Hyperperiods must fit a signed 64-bit slot counter.
MAX_INT = 2**63 - 1


class HyperperiodOverflow(OverflowError):
    pass


def gcd(a: int, b: int) -> int:
    if a < 1 or b < 1:
        raise ValueError(f"gcd expects positive integers, got {a}, {b}")
    return math.gcd(a, b)


def lcm(a: int, b: int) -> int:
    if a < 1 or b < 1:
        raise ValueError(f"lcm expects positive integers, got {a}, {b}")
    value = a // math.gcd(a, b) * b
    if value > MAX_INT:
        raise HyperperiodOverflow(f"lcm({a}, {b}) = {value} exceeds 64-bit range")
    return value


def lcm_all(values: Iterable[int]) -> int:
    result = 1
    for v in values:
        result = lcm(result, v)
    return result


def pmod(a: int, b: int) -> int:
    """Nonnegative remainder of ``a`` modulo ``b``."""
    return a % b  # Python's % already takes the sign of the divisor


def source_label(m: int) -> str:
    """Spreadsheet-style letter label: 1 -> A, 26 -> Z, 27 -> AA."""
    if m < 1:
        raise ValueError(f"source ids start at 1, got {m}")
    out = []
    while m:
        m, rem = divmod(m - 1, 26)
        out.append(chr(ord("A") + rem))
    return "".join(reversed(out))


def parse_source(token: int | str) -> int:
    """Inverse of :func:`source_label`; integers and digit strings pass through."""
    if isinstance(token, int):
        return token
    token = token.strip()
    if token.isdigit():
        return int(token)
    value = 0
    for ch in token.upper():
        if not "A" <= ch <= "Z":
            raise ValueError(f"not a source label: {token!r}")
        value = value * 26 + (ord(ch) - ord("A") + 1)
    return value


@dataclass(frozen=True)
class RegionSpec:
    id: int
    deadline: int
    tolerance: int
    direct: tuple[int, ...]
    combos: tuple[tuple[int, ...], ...] = ()

    def __post_init__(self) -> None:
        # Canonical ordering keeps option enumeration and hashing deterministic.
        object.__setattr__(self, "direct", tuple(sorted(set(self.direct))))
        object.__setattr__(
            self, "combos", tuple(tuple(sorted(set(k))) for k in self.combos)
        )

    @property
    def sources(self) -> frozenset[int]:
        """Every source able to contribute to this region (direct or fused)."""
        out = set(self.direct)
        for k in self.combos:
            out.update(k)
        return frozenset(out)


@dataclass(frozen=True)
class Instance:
    regions: tuple[RegionSpec, ...]
    num_sources: int
    label: str = ""

    def __post_init__(self) -> None:
        object.__setattr__(self, "regions", tuple(self.regions))

    @property
    def N(self) -> int:
        return len(self.regions)

    def region(self, n: int) -> RegionSpec:
        return self.regions[n - 1]

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "num_sources": self.num_sources,
            "regions": [
                {
                    "id": r.id,
                    "d": r.deadline,
                    "T": r.tolerance,
                    "F": list(r.direct),
                    "combos": [list(k) for k in r.combos],
                }
                for r in self.regions
            ],
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> Instance:
        regions = tuple(
            RegionSpec(
                id=int(r["id"]),
                deadline=int(r["d"]),
                tolerance=int(r["T"]),
                direct=tuple(parse_source(m) for m in r.get("F", [])),
                combos=tuple(
                    tuple(parse_source(m) for m in k) for k in r.get("combos", [])
                ),
            )
            for r in data["regions"]
        )
        return cls(regions=regions, num_sources=int(data["num_sources"]),
                   label=str(data.get("label", "")))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> Instance:
        return cls.from_dict(json.loads(text))


def validate_instance(inst: Instance, *, require_direct: bool = True) -> list[str]:
    """Return the list of violated invariants; an empty list means the instance is valid.

    ``require_direct=False`` relaxes the non-empty direct-set rule, which is
    needed for fixtures specified at the activation layer.
    """
    problems: list[str] = []
    M = inst.num_sources
    if M < 1:
        problems.append("num_sources must be positive")
    for idx, r in enumerate(inst.regions, start=1):
        where = f"region {r.id}"
        if r.id != idx:
            problems.append(f"{where}: region ids must be 1..N without gaps (expected {idx})")
        if r.deadline < 2:
            problems.append(f"{where}: deadline must be >= 2")
        if r.tolerance < 1:
            problems.append(f"{where}: tolerance must be a positive integer")
        if r.tolerance >= r.deadline:
            problems.append(f"{where}: tolerance must be < deadline")
        if require_direct and not r.direct:
            problems.append(f"{where}: direct source set must be non-empty")
        if not r.direct and not r.combos:
            problems.append(f"{where}: no way to refresh the region")
        for m in r.sources:
            if not 1 <= m <= M:
                problems.append(f"{where}: source {m} outside [1, {M}]")
        for j, k in enumerate(r.combos, start=1):
            if len(k) < 2:
                problems.append(f"{where}: combo {j} size must be >= 2")
            overlap = set(k) & set(r.direct)
            if overlap:
                problems.append(
                    f"{where}: combo {j} shares sources {sorted(overlap)} with the direct set"
                )
            for i, other in enumerate(r.combos, start=1):
                if i != j and set(k) <= set(other):
                    if set(k) == set(other) and i > j:
                        continue  # report duplicates once
                    problems.append(f"{where}: combo {j} is a subset of combo {i}")
    return problems


class DecisionSource(Protocol):
    """Anything that answers "is source m scheduled in slot t"."""

    def sources(self) -> Iterable[int]: ...

    def decision_at(self, m: int, t: int) -> int: ...

    def latest_generation_time(self, m: int, t: int) -> int | None: ...


@dataclass(frozen=True)
class HomogeneousSchedule:
    """Each scheduled source transmits every ``c`` slots starting at slot ``o``."""

    entries: Mapping[int, tuple[int, int]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        clean = {}
        for m, (c, o) in sorted(self.entries.items()):
            c, o = int(c), int(o)
            if c < 1:
                raise ValueError(f"source {m}: interval must be positive, got {c}")
            if not 1 <= o <= c:
                raise ValueError(f"source {m}: offset must lie in [1, {c}], got {o}")
            clean[int(m)] = (c, o)
        object.__setattr__(self, "entries", clean)

    @classmethod
    def from_maps(cls, intervals: Mapping[int, int], offsets: Mapping[int, int]) -> HomogeneousSchedule:
        return cls({m: (intervals[m], offsets[m]) for m in intervals})

    def sources(self) -> list[int]:
        return sorted(self.entries)

    def interval(self, m: int) -> int:
        return self.entries[m][0]

    def offset(self, m: int) -> int:
        return self.entries[m][1]

    def hyperperiod(self) -> int:
        return lcm_all(c for c, _ in self.entries.values())

    def decision_at(self, m: int, t: int) -> int:
        if t < 1:
            raise ValueError(f"slots start at 1, got {t}")
        if m not in self.entries:
            return 0
        c, o = self.entries[m]
        return int(t >= o and (t - o) % c == 0)

    def latest_generation_time(self, m: int, t: int) -> int | None:
        if t < 1:
            raise ValueError(f"slots start at 1, got {t}")
        if m not in self.entries:
            return None
        c, o = self.entries[m]
        if t < o:
            return None
        return o + (t - o) // c * c

    def to_dict(self) -> dict:
        return {"entries": {str(m): {"c": c, "o": o} for m, (c, o) in self.entries.items()}}

    @classmethod
    def from_dict(cls, data: Mapping) -> HomogeneousSchedule:
        if "schedule" in data:
            data = data["schedule"]
        return cls({parse_source(m): (int(v["c"]), int(v["o"]))
                    for m, v in data["entries"].items()})


@dataclass(frozen=True)
class ExplicitSchedule:
    """Arbitrary (non-periodic) transmission slots per source, for hand-built traces."""

    slots: Mapping[int, tuple[int, ...]]

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "slots", {int(m): tuple(sorted(ts)) for m, ts in self.slots.items()}
        )

    def sources(self) -> list[int]:
        return sorted(self.slots)

    def decision_at(self, m: int, t: int) -> int:
        return int(t in self.slots.get(m, ()))

    def latest_generation_time(self, m: int, t: int) -> int | None:
        best = None
        for s in self.slots.get(m, ()):
            if s > t:
                break
            best = s
        return best


def decision_at(s: DecisionSource, m: int, t: int) -> int:
    return s.decision_at(m, t)


@dataclass
class ScheduleWindow:
    """Slot-by-source decision matrix over ``horizon`` slots, optionally with channel cells.

    ``decisions[t-1][m-1]`` is U_m(t); ``channels[t-1][k]`` is the source id on
    channel k+1 in slot t, or 0 when the channel is idle.
    """

    horizon: int
    decisions: list[list[int]]
    channels: list[list[int]] | None = None

    @property
    def num_channels(self) -> int:
        return max((sum(row) for row in self.decisions), default=0)
