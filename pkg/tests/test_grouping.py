import math
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from aoisched.activation import solve_activation
from aoisched.grouping import (
    INF,
    ClusterConfig,
    alignment_feasible,
    build_graph,
    cluster_sources,
    derive_cd_intervals,
    distance,
    is_cd,
    min_alignment_tolerance,
    staleness_values,
)
from aoisched.model import Instance, RegionSpec
from aoisched.offsets import designate_z
from aoisched.scenarios import nine_region_fixture, two_group_fixture
from oracles import brute_alignment
from strategies import small_instances

A, B, C, D, E, F, G, H, I, J = range(1, 11)


def test_worked_instance_components():
    g = build_graph(solve_activation(nine_region_fixture()))
    assert g.components == ((A, E), (C,), (D,), (F,), (G, I))
    assert g.num_components == 5


def test_two_group_instance_components():
    g = build_graph(solve_activation(two_group_fixture()))
    assert g.components == ((A, B), (C, D), (E,), (F, G, H, I, J))


def test_no_fusion_gives_singletons():
    inst = Instance(tuple(RegionSpec(n, 4, 1, (n,)) for n in range(1, 5)), 4)
    g = build_graph(solve_activation(inst))
    assert g.components == ((1,), (2,), (3,), (4,))
    assert not g.edges


def test_distance_examples():
    assert distance(4, (C, D), {C: 9, D: 9}) == 2 * (Fraction(1, 8) - Fraction(1, 9))
    assert distance(5, (A, B), {A: 4, B: 4}) == INF
    assert distance(3, (A, B), {A: 6, B: 9}) == 0


def test_chain_examples():
    assert derive_cd_intervals({A: 4, B: 4, C: 9, D: 9, E: 9}, 4) == {A: 4, B: 4, C: 8, D: 8, E: 8}
    assert derive_cd_intervals({F: 5, G: 5, H: 5, I: 6, J: 6}, 5) == dict.fromkeys((F, G, H, I, J), 5)
    u = {A: 5, C: 2, D: 2, E: 5, F: 4, G: 3, I: 7}
    assert derive_cd_intervals(u, 2) == {A: 4, C: 2, D: 2, E: 4, F: 4, G: 2, I: 4}


@given(st.dictionaries(st.integers(1, 30), st.integers(1, 40), min_size=1, max_size=8), st.data())
def test_chain_is_divisible_and_below_limits(u, data):
    base = data.draw(st.integers(1, min(u.values())))
    c = derive_cd_intervals(u, base)
    assert is_cd(list(c.values()))
    assert all(base <= c[m] <= u[m] for m in u)
    assert all(c[m] % base == 0 for m in u)


def test_two_group_clustering():
    act = solve_activation(two_group_fixture())
    plan = cluster_sources(act)
    assert plan.centers == (4, 5)
    assert plan.objective == 2
    assert [g.members for g in plan.groups] == [(A, B, C, D, E), (F, G, H, I, J)]
    assert list(plan.intervals.values()) == [4, 4, 8, 8, 8, 5, 5, 5, 5, 5]
    forced = cluster_sources(act, config=ClusterConfig(max_groups=2, base_sets={2: [(4, 5)]}))
    assert forced.intervals == plan.intervals


def test_worked_instance_clusters_into_one_group():
    plan = cluster_sources(solve_activation(nine_region_fixture()))
    assert len(plan.groups) == 1
    assert plan.bases == (2,)
    assert plan.objective == 3


def test_identical_limits_make_one_group():
    inst = Instance(tuple(RegionSpec(n, 6, 1, (n,)) for n in range(1, 4)), 3)
    plan = cluster_sources(solve_activation(inst))
    assert plan.bases == (6,)
    assert set(plan.intervals.values()) == {6}


def test_two_group_preset():
    cfg = ClusterConfig.preset("two-group")
    assert cfg.max_groups == 2 and list(cfg.base_sets[2]) == [(2, 3)]
    with pytest.raises(ValueError):
        ClusterConfig.preset("nope")


@given(small_instances())
def test_clustering_invariants(inst):
    act = solve_activation(inst)
    graph = build_graph(act)
    for preset in ("full", "two-group"):
        plan = cluster_sources(act, graph, ClusterConfig.preset(preset))
        u = act.max_intervals
        assert set(plan.intervals) == set(u)
        for g in plan.groups:
            assert is_cd(list(g.intervals.values()))
            assert g.base == min(g.intervals.values())
            assert all(u[m] >= g.center for m in g.members)
        where = {m: j for j, g in enumerate(plan.groups) for m in g.members}
        for comp in graph.components:
            assert len({where[m] for m in comp}) == 1
        assert all(plan.intervals[m] <= u[m] for m in u)
        # every fused region's members divide z's interval, so zero tolerance suffices
        for members in act.active_sets:
            if len(members) > 1:
                z = designate_z(members, plan.intervals)
                for m in members:
                    assert min_alignment_tolerance(plan.intervals[m], plan.intervals[z]) == 0


def test_alignment_tolerance_examples():
    assert min_alignment_tolerance(3, 4) == 2
    assert not alignment_feasible(3, 4, 1)
    assert min_alignment_tolerance(2, 4) == 0
    assert alignment_feasible([2, 4], 4, 0)
    assert min_alignment_tolerance(4, 4) == 0


def test_alignment_formula_matches_brute_force():
    for cm in range(1, 13):
        for cz in range(1, 13):
            for T in range(13):
                assert alignment_feasible(cm, cz, T) == brute_alignment(cm, cz, T), (cm, cz, T)


def test_gap_values_form_a_residue_class():
    for cm in range(1, 11):
        for cz in range(1, 11):
            g = math.gcd(cm, cz)
            for om in range(1, cm + 1):
                for oz in range(1, cz + 1):
                    r = (oz - om) % g
                    assert staleness_values(cm, cz, om, oz) == set(range(r, cm, g))
