from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from sl4zeta import kernels
from sl4zeta.lattice import build_sl
from sl4zeta.ratfunc import BivariateRational, LaurentPoly, parse_poly
from sl4zeta.transitions import all_points
from sl4zeta.zeta import (
    KernelClassData,
    MissingTransition,
    abscissa,
    assemble_poincare,
    bruteforce_counts,
    compositions,
    index_pattern,
    index_sets,
    largest_pole_of,
    lift_law,
    lift_law_sample,
    lift_law_scan,
    oracle_table,
    predicted_count,
    profile_counts,
    rank_preserving_lifts,
    sequences,
    series_is_nonnegative_integral,
    series_terms,
    sl2_data,
    sl4_data,
    sl4_zeta,
    theorem_b_checks,
    theorem_b_reference,
)


def test_empty_data_gives_one():
    P = assemble_poincare(KernelClassData(3, 1, {}))
    assert P == BivariateRational(1)
    assert sequences(KernelClassData(3, 1, {})) == [()]


def test_missing_transition_policy():
    data = KernelClassData(3, 1, {"a": (1, 0, LaurentPoly.const(1))}, default_zero=False)
    with pytest.raises(MissingTransition):
        data.tau("a", "b")
    assert KernelClassData(3, 1, {}).tau("a", "b").is_zero()


def test_sl2_closed_form():
    assert assemble_poincare(sl2_data()) == BivariateRational(parse_poly("1 - t"), parse_poly("1 - q^3*t"))
    assert [t.sequence for t in series_terms(sl2_data())] == [(), ("Reg",)]


def test_theorem_b():
    out = theorem_b_checks()
    assert out["theorem_b_match"]
    assert out["F1_eq_G1"] and out["zeta_at_minus2_zero"]
    assert out["reciprocity_F"] == [10, 18] and out["reciprocity_G"] == [25, 18]


@pytest.mark.parametrize("m", [1, 2, 3])
def test_zeta_normalisation(m):
    F, G = theorem_b_reference()
    assert sl4_zeta(m) == BivariateRational(F * LaurentPoly.monomial(15 * m, 0), G)
    with pytest.raises(ValueError):
        sl4_zeta(0)


def test_abscissae():
    assert abscissa(sl4_data(), "poincare") == (Fraction(5, 2), ["Reg"])
    assert abscissa(sl4_data(), "group") == (Fraction(1, 2), ["Reg"])
    assert largest_pole_of(theorem_b_reference()[1]) == Fraction(1, 2)
    with pytest.raises(ValueError):
        abscissa(sl4_data(), "other")


def test_series_positivity():
    ok, bad = series_is_nonnegative_integral(order=20)
    assert ok, bad


def test_index_patterns():
    assert index_pattern([0], [2], 1) == (0,)
    assert index_pattern([1], [2], 1) == (2,)
    assert index_pattern([1, 2], [1, 1], 3) == (0, 1, 2)
    assert index_pattern([0, 2], [2, 1], 3) == (0, 1, 1)
    assert index_pattern([], [], 3) == (0, 0, 0)
    with pytest.raises(ValueError):
        index_pattern([0, 1], [1], 2)
    assert len(index_sets(3)) == 8
    assert sorted(compositions(3, 2)) == [(1, 2), (2, 1)]


@given(st.integers(1, 5), st.integers(1, 3))
def test_compositions_count(N, k):
    from math import comb

    assert len(list(compositions(N, k))) == (comb(N - 1, k - 1) if N >= k else 0)


def test_frozen_sl2_counts():
    # brute force over (Z/3^N)^3
    L = build_sl(2)
    vals = [bruteforce_counts(L, 3, (0,), (N,), profile_counts(L, 3, N)) for N in (1, 2, 3)]
    assert vals == [26, 702, 18954]
    assert all(predicted_count(sl2_data(), (0,), (N,), 3) == v for N, v in zip((1, 2, 3), vals))


@pytest.mark.parametrize("p", [3, 5])
def test_sl2_oracle(p):
    rows = oracle_table(build_sl(2), p, 3 if p == 3 else 2)
    assert all(r["match"] for r in rows)


@pytest.mark.parametrize("p, r", [(3, 1), (3, 2), (5, 1)])
def test_sl2_lift_law_exhaustive(p, r):
    out = lift_law_scan(build_sl(2), p, r)
    assert out["no_lift"] == 0 and out["rank_mismatch"] == 0
    assert out["match"] == out["clamped"]


def test_sl3_lift_law_p5_r1_sample():
    out = lift_law_sample(build_sl(3), 5, 1, 20000, seed=1)
    assert out["match"] == out["clamped"] and out["no_lift"] == 0


def test_sl3_p3_no_lift_locus():
    # every clamped point without a rank-preserving lift lies in the
    # (ker 4, derived 2) class, which has no characteristic zero analogue
    from sl4zeta.transitions import KernelClassifier

    L = build_sl(3)
    pts = all_points(8, 3)
    res = kernels.rp_points(L.lam, L.lam, pts, 3, 1)
    stuck = pts[(res[:, 0] == 1) & (res[:, 2] == 0)]
    assert len(stuck) == 624
    assert set(KernelClassifier(L, 3).classes(stuck)) == {(4, 2)}


def test_sl3_p3_non_isolated_counterexample():
    L = build_sl(3)
    w = np.zeros(8, dtype=np.int64)
    w[L.labels.index("e12")] = 1
    law = lift_law(L, w, 3, 2)
    assert (law.rank_z, law.unit_rank) == (3, 1)
    assert not law.holds(L.d, 3)
    assert rank_preserving_lifts(L, w, 3, 2) == law.count == 3 ** (8 - law.unit_rank)


@pytest.mark.parametrize("n, p, r", [(2, 3, 1), (2, 3, 2), (3, 3, 1), (3, 5, 1)])
def test_literal_lifts_match_affine(n, p, r):
    L = build_sl(n)
    rng = np.random.default_rng(7)
    for x in rng.integers(0, p**r, size=(25 if n == 2 else 6, L.d)):
        assert rank_preserving_lifts(L, x, p, r) == lift_law(L, x, p, r).count


def test_sl4_lift_law_sample():
    out = lift_law_sample(build_sl(4), 3, 2, 3000, seed=3)
    assert out["clamped"] > 0
    assert out["match"] == out["clamped"]


def test_isolation_at_rank_exact_lifts():
    from sl4zeta.zeta import isolation_check

    out = isolation_check(3, per_class=40, seed=5)
    assert len(out) == 11
    for name, row in out.items():
        assert row["rank_exact_rep"] and row["not_rank_exact"] == 0, name
        assert row["isolated"] == row["points"] == 40, name
