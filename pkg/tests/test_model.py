import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from aoisched.model import (
    HomogeneousSchedule,
    HyperperiodOverflow,
    Instance,
    RegionSpec,
    decision_at,
    gcd,
    lcm,
    lcm_all,
    parse_source,
    pmod,
    source_label,
    validate_instance,
)
from aoisched.scenarios import nine_region_fixture, two_group_fixture
from strategies import schedules


def test_gcd_lcm_examples():
    assert gcd(3, 4) == 1
    assert gcd(4, 8) == 4
    assert lcm(8, 5) == 40


@given(st.integers(1, 10**6), st.integers(1, 10**6))
def test_gcd_times_lcm_is_product(a, b):
    assert gcd(a, b) * lcm(a, b) == a * b
    assert gcd(a, b) == math.gcd(a, b)


@pytest.mark.parametrize("a,b", [(0, 3), (3, 0), (-2, 4)])
def test_gcd_lcm_reject_non_positive(a, b):
    with pytest.raises(ValueError):
        gcd(a, b)
    with pytest.raises(ValueError):
        lcm(a, b)


def test_lcm_overflow_is_an_error():
    with pytest.raises(HyperperiodOverflow):
        lcm_all([2**40 + 1, 2**40 - 1, 2**31 - 1])


def test_pmod_is_nonnegative():
    assert pmod(-1, 3) == 2
    assert pmod(7, 3) == 1


def test_source_labels_round_trip():
    assert [source_label(m) for m in (1, 9, 26, 27)] == ["A", "I", "Z", "AA"]
    for m in range(1, 800):
        assert parse_source(source_label(m)) == m
    assert parse_source("12") == 12


def test_decision_at_examples():
    s = HomogeneousSchedule({1: (3, 1), 2: (4, 2)})
    assert decision_at(s, 1, 7) == 1
    assert decision_at(s, 1, 2) == 0
    assert decision_at(s, 2, 10) == 1
    assert decision_at(s, 5, 10) == 0  # absent source is never scheduled


def test_offset_must_not_exceed_interval():
    with pytest.raises(ValueError):
        HomogeneousSchedule({1: (3, 4)})
    with pytest.raises(ValueError):
        HomogeneousSchedule({1: (3, 0)})


@given(schedules(), st.integers(1, 200))
def test_decision_is_periodic(s, t):
    for m in s.sources():
        c, o = s.entries[m]
        if t >= o:
            assert s.decision_at(m, t) == s.decision_at(m, t + c)


@given(schedules())
def test_window_tiles_over_hyperperiod(s):
    C = s.hyperperiod()
    # after every offset has fired, slot t and t + C carry the same decisions
    for t in range(max(o for _, o in s.entries.values()), C + 1):
        assert [s.decision_at(m, t) for m in s.sources()] == \
               [s.decision_at(m, t + C) for m in s.sources()]


def test_schedule_json_round_trip():
    s = HomogeneousSchedule({1: (4, 3), 3: (2, 2)})
    assert HomogeneousSchedule.from_dict(s.to_dict()) == s
    assert HomogeneousSchedule.from_dict({"schedule": s.to_dict()}) == s


def test_fixture_is_valid_and_round_trips():
    inst = nine_region_fixture()
    assert validate_instance(inst) == []
    assert Instance.from_json(inst.to_json()) == inst


def test_activation_layer_fixture_needs_relaxed_direct_rule():
    inst = two_group_fixture()
    assert validate_instance(inst, require_direct=False) == []
    assert any("direct source set must be non-empty" in p for p in validate_instance(inst))


def _one(region):
    return Instance((region,), 4)


def test_validation_reports_each_violation():
    assert any("tolerance must be < deadline" in p
               for p in validate_instance(_one(RegionSpec(1, 3, 3, (1,)))))
    assert any("combo 1 size must be >= 2" in p
               for p in validate_instance(_one(RegionSpec(1, 3, 1, (1,), ((2,),)))))
    assert any("subset" in p
               for p in validate_instance(_one(RegionSpec(1, 3, 1, (1,), ((2, 3), (2, 3, 4))))))
    assert any("shares sources" in p
               for p in validate_instance(_one(RegionSpec(1, 3, 1, (1,), ((1, 2),)))))
    assert any("outside" in p for p in validate_instance(_one(RegionSpec(1, 3, 1, (9,)))))
    bad_ids = Instance((RegionSpec(2, 3, 1, (1,)),), 2)
    assert any("region ids" in p for p in validate_instance(bad_ids))
    assert any("deadline must be >= 2" in p
               for p in validate_instance(_one(RegionSpec(1, 1, 0, (1,)))))
