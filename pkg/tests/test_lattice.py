import numpy as np
import pytest
from hypothesis import given, strategies as st

from sl4zeta import kernels
from sl4zeta.lattice import (
    InvalidLattice,
    LieLattice,
    NonZeroTrace,
    NotSubalgebra,
    build_sl,
    centralizer,
    commutator_matrix,
    coords,
    dump_constants,
    element,
    evaluate,
    exact_det,
    killing_matrix,
    load_constants,
    parse_matrix_expr,
    subalgebra_commutator_matrix,
    trace_dual,
)
from sl4zeta.linalg import Subspace, rank_and_kernel, subspace_equal
from sl4zeta.transitions import printed_form_matrix, subalgebra_basis


def test_basis_and_killing(sl4):
    assert sl4.labels[:3] == ("h12", "h23", "h34") and sl4.labels[-1] == "f41"
    K = killing_matrix(sl4)
    assert exact_det(K) == 8**15 * 4
    i = sl4.labels.index
    assert K[i("h12"), i("h12")] == 16 and K[i("e14"), i("f41")] == 8
    assert K[i("h12"), i("h23")] == -8


@pytest.mark.parametrize("n", [2, 3, 4])
def test_structure_constants_round_trip(n):
    L = build_sl(n)
    L2 = load_constants(dump_constants(L))
    assert np.array_equal(L2.lam, L.lam)


def test_invalid_lattice():
    lam = np.zeros((2, 2, 2), dtype=np.int64)
    lam[0, 1, 0] = 1
    with pytest.raises(InvalidLattice):
        LieLattice("bad", lam)


@given(st.lists(st.integers(-20, 20), min_size=15, max_size=15))
def test_coords_round_trip(v):
    L = build_sl(4)
    x = element(v, L)
    assert np.trace(x) == 0
    assert list(coords(x, L)) == v


def test_bracket_is_commutator(sl4):
    rng = np.random.default_rng(0)
    for _ in range(50):
        u, v = rng.integers(-5, 6, size=(2, 15))
        X, Y = element(u, sl4), element(v, sl4)
        assert np.array_equal(element(sl4.bracket(u, v), sl4), X @ Y - Y @ X)


def test_parse_and_trace():
    x = parse_matrix_expr("-3e11 + e22 + e33 + e44")
    assert np.array_equal(np.diag(x), [-3, 1, 1, 1])
    with pytest.raises(NonZeroTrace):
        coords(parse_matrix_expr("e11"))
    assert coords(parse_matrix_expr("e11"), modulus=1) is not None  # trace 1 is 0 mod 1


def test_centralizer_dims_exhaustive_sl4_f3_sample(sl4):
    rng = np.random.default_rng(1)
    dims = set()
    for _ in range(400):
        v = rng.integers(0, 3, size=15)
        v[rng.integers(0, 15, size=int(rng.integers(0, 14)))] = 0
        dims.add(centralizer(element(v, sl4, 3), sl4, 3).dim)
    assert dims <= {3, 5, 7, 9, 15}
    assert {3, 5, 7}.issubset(dims)


@pytest.mark.parametrize("p", [3, 5])
def test_trace_dual_bridge(sl4, p):
    rng = np.random.default_rng(p)
    R = commutator_matrix(sl4)
    for _ in range(150):
        x = element(rng.integers(0, p, size=15), sl4, p)
        K = rank_and_kernel(evaluate(R, trace_dual(x, sl4, p), p), p)[1]
        assert subspace_equal(K, centralizer(x, sl4, p))
    pts = rng.integers(0, p, size=(2000, 15))
    assert kernels.bridge_scan(pts, p, sl4.lam, sl4.basis, "trace").all()


def test_transpose_bridge_fails_off_the_nilpotent_cone(sl4):
    """coords(x^T) only matches the centralizer when the diagonal plays no role."""
    x = parse_matrix_expr("e11 - e22")
    p = 5
    R = commutator_matrix(sl4)
    K = rank_and_kernel(evaluate(R, coords(x.T, sl4, p), p), p)[1]
    assert not subspace_equal(K, centralizer(x % p, sl4, p))
    n = parse_matrix_expr("e12 + e34")
    K = rank_and_kernel(evaluate(R, coords(n.T, sl4, p), p), p)[1]
    assert subspace_equal(K, centralizer(n % p, sl4, p))


@pytest.mark.parametrize("name", ["N31", "N22", "N211"])
def test_printed_commutator_matrices(name, sl4):
    computed = subalgebra_commutator_matrix(subalgebra_basis(name), sl4)
    assert np.array_equal(np.asarray(computed.coef, dtype=np.int64), printed_form_matrix(name).coef)


def test_not_subalgebra(sl4):
    basis = np.zeros((2, 15), dtype=np.int64)
    basis[0, sl4.labels.index("e12")] = 1
    basis[1, sl4.labels.index("e23")] = 1
    with pytest.raises(NotSubalgebra):
        subalgebra_commutator_matrix(basis, sl4)


def test_subalgebra_rank_bound(sl4):
    from sl4zeta.lattice import derived_subspace

    rng = np.random.default_rng(3)
    p = 3
    for name in ("N31", "N22", "N211"):
        S = subalgebra_basis(name)
        coef = np.asarray(subalgebra_commutator_matrix(S, sl4).coef, dtype=np.int64) % p
        k = coef.shape[2]
        # centre of S over F_p: common kernel of all ad(s)
        stacked = np.concatenate([coef[:, :, h] for h in range(k)], axis=0) % p
        centre = k - rank_and_kernel(stacked.T, p)[0]
        for _ in range(100):
            w = rng.integers(0, p, size=k)
            assert rank_and_kernel(evaluate(subalgebra_commutator_matrix(S, sl4), w, p), p)[0] <= k - centre
