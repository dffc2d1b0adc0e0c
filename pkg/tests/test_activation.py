import itertools
from fractions import Fraction

from hypothesis import given

from aoisched.activation import (
    activation_from_sets,
    enumerate_options,
    region_components,
    solve_activation,
)
from aoisched.lowerbound import solve_lb
from aoisched.model import Instance, RegionSpec
from aoisched.scenarios import nine_region_fixture
from oracles import activation_objective, brute_activation, region_options
from strategies import small_instances

A, B, C, D, E, F, G, H, I = range(1, 10)


def test_option_enumeration():
    assert len(enumerate_options(RegionSpec(2, 5, 1, (B,), ((A, E),)))) == 2
    assert len(enumerate_options(RegionSpec(1, 5, 1, (1, 2)))) == 2
    opts = enumerate_options(RegionSpec(1, 5, 1, (1,), ((2, 3), (2, 4))))
    assert [o.kind for o in opts] == ["direct", "combo", "combo"]
    assert [o.index for o in opts] == [0, 1, 2]


def test_worked_instance_activation():
    act = solve_activation(nine_region_fixture())
    assert act.active_sources == (A, C, D, E, F, G, I)
    assert act.max_intervals == {A: 5, C: 2, D: 2, E: 5, F: 4, G: 3, I: 7}
    assert act.active_sets[1] == (A, E)
    # G and I are already paid for at a faster rate, so H would only add cost
    assert act.active_sets[7] == (G, I)
    assert act.certified


def test_single_region():
    act = solve_activation(Instance((RegionSpec(1, 5, 1, (1,)),), 1))
    assert act.Q == [[1]]
    assert act.rates[1] == Fraction(1, 5)


def _check_result(inst, act):
    for r, opt, members in zip(inst.regions, act.chosen, act.active_sets):
        # exactly one option per region, and Q marks exactly its members
        assert opt in enumerate_options(r)
        col = [row[r.id - 1] for row in act.Q]
        assert {m for m, q in enumerate(col, start=1) if q} == set(members)
    assert act.objective == activation_objective(inst, act.active_sets)
    for m, u in act.max_intervals.items():
        assert act.rates[m] == Fraction(1, u)


@given(small_instances())
def test_matches_exhaustive_enumeration(inst):
    act = solve_activation(inst)
    _check_result(inst, act)
    assert act.objective == brute_activation(inst)
    assert act.objective >= solve_lb(inst).total


@given(small_instances(max_regions=5))
def test_ties_go_to_the_first_option_tuple_in_deadline_order(inst):
    order = sorted(range(inst.N), key=lambda n: (inst.regions[n].deadline, n))
    best, first = None, None
    for picks in itertools.product(*(region_options(inst.regions[n]) for n in order)):
        by_region = [None] * inst.N
        for n, p in zip(order, picks):
            by_region[n] = p
        val = activation_objective(inst, by_region)
        if best is None or val < best:
            best, first = val, tuple(by_region)
    assert solve_activation(inst).active_sets == first


def test_tie_prefers_lowest_option_index():
    inst = Instance((RegionSpec(1, 5, 1, (1, 2)),), 2)
    assert solve_activation(inst).active_sets == ((1,),)


def test_budget_exhaustion_is_flagged_but_still_valid():
    inst = nine_region_fixture()
    act = solve_activation(inst, node_budget=2)
    assert not act.certified
    _check_result(inst, act)
    assert act.objective >= solve_activation(inst).objective


def test_independent_regions_form_separate_components():
    inst = Instance((RegionSpec(1, 3, 1, (1,), ((2, 3),)), RegionSpec(2, 4, 1, (4,)),
                     RegionSpec(3, 5, 1, (3,))), 4)
    assert region_components(inst) == [[0, 2], [1]]


def test_activation_from_explicit_sets():
    inst = nine_region_fixture()
    act = solve_activation(inst)
    again = activation_from_sets(inst, act.active_sets)
    assert again.active_sets == act.active_sets
    assert again.objective == act.objective
