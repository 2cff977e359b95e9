from fractions import Fraction

import numpy as np
import pytest

from sl4zeta.classify import class_table, random_gl
from sl4zeta.lattice import build_sl
from sl4zeta.transitions import (
    CODE_DIM,
    NonDivisible,
    RankCensus,
    centralizer_of,
    conjugate,
    direct_transition_census,
    f_set_enumerate,
    homogeneity_check,
    jump_check,
    n211_rank4_analysis,
    rank_census,
    representatives,
    transition_ratio,
)


def _rep(name, q):
    return next(x for (n, _), x in representatives(q).items() if n == name)


def test_frozen_rank_censuses():
    # brute-force values at q = 3
    assert rank_census(centralizer_of(_rep("Sub", 3), 3), 3).counts == {0: 9, 2: 234}
    assert rank_census(centralizer_of(_rep("N22", 3), 3), 3).counts == {0: 3, 2: 78, 4: 2106}


def test_transition_ratio_divisibility():
    S = centralizer_of(_rep("N22", 3), 3)
    assert transition_ratio(S, 4, 3) == 702
    bad = RankCensus(3, {0: 4, 2: 6})
    with pytest.raises(NonDivisible):
        transition_ratio(S, 2, 3, census=bad)


@pytest.mark.parametrize("q", [3, 5])
def test_jump_check(q):
    report = jump_check(q)
    assert {r["class"] for r in report} >= {"Sub", "N22", "N211", "D211", "S22Diag", "S22Non"}
    assert all(r["match"] for r in report), [r for r in report if not r["match"]]


def test_representatives_are_classified_correctly():
    from sl4zeta.classify import classify

    for q in (3, 5, 7):
        for (name, sub), x in representatives(q).items():
            assert classify(x, q).name == name
        for (name, sub), x in representatives(q, reduce=False).items():
            assert classify(np.asarray(x) % q, q).name == name


@pytest.mark.parametrize("name", ["N22", "Sub"])
def test_direct_census_matches_rank_census(name):
    q = 3
    x = _rep(name, q)
    direct = direct_transition_census(x, q)
    census = rank_census(centralizer_of(x, q), q)
    d0 = centralizer_of(x, q).dim
    assert direct == {d0 - r: n for r, n in census.counts.items()}


@pytest.mark.parametrize(
    "name, direct, ranks",
    [
        ("D211", {3: 18762, 5: 895, 7: 24, 9: 2}, {0: 3, 4: 1014, 6: 18666}),
        ("N211", {3: 18672, 5: 982, 7: 26, 9: 3}, {0: 3, 2: 78, 4: 918, 6: 18684}),
    ],
)
def test_direct_census_breaks_when_the_centralizer_meets_the_cartan(name, direct, ranks):
    # y -> y^T is not the trace dual on diagonal directions
    q = 3
    x = _rep(name, q)
    assert direct_transition_census(x, q) == direct
    assert rank_census(centralizer_of(x, q), q).counts == ranks


def test_direct_census_by_class():
    q = 3
    out = direct_transition_census(_rep("Sub", q), q, verbose=True)
    names = {lab.name for lab in out}
    assert names == {"Sub", "Reg"}
    assert sum(out.values()) == q**5


@pytest.mark.parametrize("name", ["N22", "S22Non", "D211"])
def test_homogeneity(name):
    assert len(homogeneity_check(name, 3, trials=6, seed=2)) == 1


def test_conjugate_preserves_census():
    q = 5
    rng = np.random.default_rng(0)
    x = _rep("S22Diag", q)
    y = conjugate(x, random_gl(q, rng=rng), q)
    assert rank_census(centralizer_of(x, q), q).counts == rank_census(centralizer_of(y, q), q).counts


def test_n211_rank4_q3():
    L4, census, report = n211_rank4_analysis(3)
    assert report["ideal_zero_set_equals_rank_le_4"]
    assert report["fiber_sum_equals_L4"]
    assert all(f is not None for t, f in census.fibers.items() if census.base_points[t])
    # the table's N211 -> rank 4 entry times |L_0|
    tab = class_table()
    expected = sum(
        v.evaluate(3) for (s, t), v in tab.jumps.items() if s == "N211" and tab.dims[t][0] == 5
    )
    assert Fraction(L4, int(report["rank_census"]["0"])) == expected
    assert census.fibers == {"central": 50, "nilpotent": 8, "splitSemisimple": 16, "nonSplit": 0}


def test_f_set_sl2():
    L = build_sl(2)
    # regular classes: (1, 0); zero: (3, 3)
    assert f_set_enumerate(L, [(3, 3)], 3) == 1
    assert f_set_enumerate(L, [(1, 0)], 3) == 26
    assert f_set_enumerate(L, [(3, 3), (1, 0)], 3) == 26


def test_code_dims():
    assert CODE_DIM[0] == 15 and sorted(set(CODE_DIM.tolist())) == [3, 5, 7, 9, 15]


@pytest.mark.parametrize("q", [3, 5])
def test_direct_and_rank_census_agree_only_for_nilpotent_representatives(q):
    agree = set()
    for (name, sub), x in representatives(q).items():
        S = centralizer_of(x, q)
        if q**S.dim > 2 * 10**6:
            continue
        census = rank_census(S, q)
        if direct_transition_census(x, q) == {S.dim - r: n for r, n in census.counts.items()}:
            agree.add(sub or name)
    assert agree == {"N31", "N22"}


@pytest.mark.parametrize("q", [3, 5])
def test_direct_census_reproduces_n211_fine_split(q):
    out = direct_transition_census(_rep("N211", q), q, verbose=True)
    by_name = {lab.name: n for lab, n in out.items() if lab.name in ("S22Diag", "S22Non", "N22")}
    assert by_name == {"S22Diag": q * (q**2 - 1) // 2, "S22Non": q * (q - 1) ** 2 // 2, "N22": q**2 - 1}
