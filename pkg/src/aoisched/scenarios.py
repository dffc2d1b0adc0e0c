"""Grid scenarios: one camera per region, pointing up/down/left/right, covering 1-3 regions.

Regions are numbered row-major from 1 at the top-left corner. Source m sits
in region m. A region's direct set is the source located in it; every pair of
other sources covering it forms a fusion combination.

Random draws use NumPy's Philox counter-based generator seeded through
``SeedSequence([seed, trial])``; orientations are drawn first (one per source,
uniform over up/down/left/right), then deadlines (one per region, uniform over
[d_lo, d_hi]). Golden instances are stored as JSON so tests do not depend on
the generator.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .model import Instance, RegionSpec

ORIENTATIONS = ("up", "down", "left", "right")
_STEP = {"up": (-1, 0), "down": (1, 0), "left": (0, -1), "right": (0, 1)}
# Clockwise neighbour direction, used by the "bent" footprint.
_CW = {"up": "right", "right": "down", "down": "left", "left": "up"}

SHAPES = ("straight", "bent")
CASES = (1, 2, 3)


@dataclass(frozen=True)
class GridScenario:
    width: int
    height: int
    coverage: int | Sequence[int] = 2
    case: int = 2
    d_lo: int = 2
    d_hi: int = 10
    seed: int = 0
    trial: int = 0
    orientations: Sequence[str] | None = None
    deadlines: Sequence[int] | None = None
    shape: str = "straight"
    label: str = ""

    @property
    def num_regions(self) -> int:
        return self.width * self.height


def footprint(region: int, orientation: str, coverage: int, width: int, height: int,
              shape: str = "straight") -> list[int]:
    """Regions seen by a source in ``region``, truncated at the grid border."""
    if coverage not in (1, 2, 3):
        raise ValueError(f"coverage must be 1, 2 or 3, got {coverage}")
    row, col = divmod(region - 1, width)
    dr, dc = _STEP[orientation]
    if shape == "straight":
        cells = [(row + k * dr, col + k * dc) for k in range(coverage)]
        out = []
        for r, c in cells:
            if not (0 <= r < height and 0 <= c < width):
                break
            out.append(r * width + c + 1)
        return out
    if shape == "bent":
        sr, sc = _STEP[_CW[orientation]]
        cells = [(row, col), (row + dr, col + dc), (row + dr + sr, col + dc + sc)][:coverage]
        return [r * width + c + 1 for r, c in cells if 0 <= r < height and 0 <= c < width]
    raise ValueError(f"unknown footprint shape {shape!r}")


def draw_topology(width: int, height: int, d_lo: int, d_hi: int, seed: int,
                  trial: int = 0) -> tuple[list[str], list[int]]:
    """Orientations per source and deadlines per region for one trial."""
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, trial])))
    n = width * height
    orient_idx = rng.integers(0, len(ORIENTATIONS), size=n)
    deadlines = rng.integers(d_lo, d_hi + 1, size=n)
    return [ORIENTATIONS[i] for i in orient_idx], [int(d) for d in deadlines]


def tolerance_for(case: int, deadline: int) -> int:
    if case == 1:
        return deadline - 1
    if case in (2, 3):
        return 1
    raise ValueError(f"case must be 1, 2 or 3, got {case}")


def build_grid_instance(width: int, height: int, orientations: Sequence[str],
                        coverage: int | Sequence[int], deadlines: Sequence[int], case: int,
                        shape: str = "straight", label: str = "") -> Instance:
    n = width * height
    if len(orientations) != n or len(deadlines) != n:
        raise ValueError("need one orientation per source and one deadline per region")
    covs = [coverage] * n if isinstance(coverage, int) else list(coverage)
    covered_by: dict[int, list[int]] = {r: [] for r in range(1, n + 1)}
    for m in range(1, n + 1):
        for r in footprint(m, orientations[m - 1], covs[m - 1], width, height, shape):
            covered_by[r].append(m)
    regions = []
    for r in range(1, n + 1):
        others = sorted(m for m in covered_by[r] if m != r)
        combos = [] if case == 3 else list(itertools.combinations(others, 2))
        d = int(deadlines[r - 1])
        regions.append(RegionSpec(r, d, tolerance_for(case, d), (r,), tuple(combos)))
    return Instance(tuple(regions), n, label)


def generate(scn: GridScenario) -> Instance:
    if scn.width < 1 or scn.height < 1:
        raise ValueError("grid dimensions must be positive")
    if scn.d_lo < 2 or scn.d_hi < scn.d_lo:
        raise ValueError("deadline range must satisfy 2 <= d_lo <= d_hi")
    orientations, deadlines = draw_topology(
        scn.width, scn.height, scn.d_lo, scn.d_hi, scn.seed, scn.trial)
    if scn.orientations is not None:
        orientations = list(scn.orientations)
    if scn.deadlines is not None:
        deadlines = list(scn.deadlines)
    label = scn.label or (
        f"grid {scn.width}x{scn.height} cov={scn.coverage} case={scn.case} "
        f"seed={scn.seed} trial={scn.trial}")
    return build_grid_instance(scn.width, scn.height, orientations, scn.coverage,
                               deadlines, scn.case, scn.shape, label)


NINE_REGION_ORIENTATIONS = ("right", "up", "up", "right", "up", "down", "right", "down", "left")
NINE_REGION_DEADLINES = (6, 5, 2, 2, 7, 4, 3, 8, 7)


def nine_region_fixture() -> Instance:
    """3x3 worked example: coverage 2, T = 1, sources A..I in regions 1..9."""
    return build_grid_instance(
        3, 3, NINE_REGION_ORIENTATIONS, 2, NINE_REGION_DEADLINES, case=2,
        label="3x3 worked example")


TWO_GROUP_DEADLINES = (4, 9, 9, 5, 6)
TWO_GROUP_TOLERANCES = (1, 1, 1, 2, 2)
TWO_GROUP_ACTIVE = ((1, 2), (3, 4), (5,), (6, 7, 8), (8, 9, 10))


def two_group_fixture() -> Instance:
    """Five regions with prescribed active sets and sources A..J.

    Multi-source regions carry their active set as the only combination and
    no direct source, so activation is forced; region 3 is served directly by E.
    """
    regions = []
    for n, (d, T, members) in enumerate(
            zip(TWO_GROUP_DEADLINES, TWO_GROUP_TOLERANCES, TWO_GROUP_ACTIVE), start=1):
        if len(members) == 1:
            regions.append(RegionSpec(n, d, T, members))
        else:
            regions.append(RegionSpec(n, d, T, (), (members,)))
    return Instance(tuple(regions), 10, "two-group example")
