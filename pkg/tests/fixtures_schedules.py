"""Hand-copied schedules for the two worked instances (sources A=1, B=2, ...)."""

from aoisched.model import HomogeneousSchedule

# nine-region instance: intervals [4,2,2,4,4,2,4], offsets [3,2,2,3,1,1,4] for A,C,D,E,F,G,I
NINE_ACTIVE = (1, 3, 4, 5, 6, 7, 9)
NINE_INTERVALS = (4, 2, 2, 4, 4, 2, 4)
NINE_OFFSETS = (3, 2, 2, 3, 1, 1, 4)
NINE_SCHEDULE = HomogeneousSchedule(
    {m: (c, o) for m, c, o in zip(NINE_ACTIVE, NINE_INTERVALS, NINE_OFFSETS)})
# per-slot source sets of the printed three-channel table, slots 1..4
NINE_SLOT_SETS = [{6, 7}, {3, 4}, {1, 5, 7}, {3, 4, 9}]

# two-group instance: the printed two-channel policy
TWO_GROUP_SCHEDULE = HomogeneousSchedule({
    1: (4, 1), 2: (4, 2), 3: (8, 3), 4: (8, 4), 5: (8, 7),
    6: (5, 1), 7: (5, 2), 8: (5, 3), 9: (5, 4), 10: (5, 5),
})
