import numpy as np
import pytest
from hypothesis import given, strategies as st

from sl4zeta import kernels
from sl4zeta.arith import (
    BadLevel,
    FieldElem,
    RingElem,
    ZeroInverse,
    check_odd_prime,
    field_inverse,
    int_valuation,
    is_square,
    reduce_level,
    unit_inverse,
    valuation,
)
from sl4zeta.linalg import (
    NotAntisymmetric,
    Subspace,
    antisymmetric_snf,
    asnf_block_form,
    divisor_profile,
    invariant_exponents,
    is_isolated,
    module_kernel,
    module_rank,
    rank_and_kernel,
    rank_mod_p,
    rref,
    smith_normal_form,
    subspace_equal,
)

primes = st.sampled_from([3, 5, 7])


def antisym(draw, n, m):
    A = np.zeros((n, n), dtype=np.int64)
    for i in range(n):
        for j in range(i + 1, n):
            v = draw(st.integers(0, m - 1))
            A[i, j], A[j, i] = v, -v % m
    return A


@st.composite
def antisym_case(draw):
    p = draw(primes)
    r = draw(st.integers(1, 3))
    n = draw(st.integers(1, 7))
    A = antisym(draw, n, p**r)
    # push some entries to higher valuation so profiles are interesting
    k = draw(st.integers(0, r))
    return p, r, A * p**k % p**r


@st.composite
def unimodular(draw, n, p, r):
    m = p**r
    g = np.eye(n, dtype=np.int64)
    for _ in range(draw(st.integers(0, 6))):
        i, j = draw(st.integers(0, n - 1)), draw(st.integers(0, n - 1))
        if i != j:
            t = draw(st.integers(0, m - 1))
            g[:, i] = (g[:, i] + t * g[:, j]) % m
    u = draw(st.integers(1, m - 1).filter(lambda v: v % p))
    g[:, 0] = g[:, 0] * u % m
    return g


def test_odd_prime_checks():
    assert check_odd_prime(7) == 7
    for bad in (2, 9, 1, 0):
        with pytest.raises(ValueError):
            check_odd_prime(bad)


def test_field_and_ring_elements():
    a = FieldElem(3, 7)
    assert (a * field_inverse(a)).value == 1
    with pytest.raises(ZeroInverse):
        field_inverse(FieldElem(0, 7))
    assert is_square(FieldElem(2, 7)) and not is_square(FieldElem(3, 7))
    x = RingElem(18, 3, 3)
    assert valuation(x) == 2
    assert valuation(RingElem(0, 3, 3)) == 3
    assert reduce_level(x, 2).value == 0
    with pytest.raises(BadLevel):
        reduce_level(x, 4)
    assert int_valuation(0, 5, 4) == 4 and int_valuation(250, 5, 9) == 3
    assert unit_inverse(2, 27) * 2 % 27 == 1
    with pytest.raises(ZeroInverse):
        unit_inverse(3, 27)


@pytest.mark.parametrize("p", [3, 5, 7, 11])
def test_square_count_and_inverse(p):
    assert sum(is_square(FieldElem(a, p)) for a in range(1, p)) == (p - 1) // 2
    for a in range(1, p):
        x = FieldElem(a, p)
        assert field_inverse(field_inverse(x)) == x
    assert field_inverse(FieldElem(2, 5)).value == 3


def test_valuation_multiplicative():
    p = 3
    for r in range(1, 5):
        m = p**r
        for x in range(m):
            for y in range(m):
                v = valuation(RingElem(x * y % m, p, r))
                assert v == min(valuation(RingElem(x, p, r)) + valuation(RingElem(y, p, r)), r)


def test_reduce_level_is_homomorphism():
    p, r, t = 3, 3, 2
    for x in range(p**r):
        for y in range(p**r):
            a, b = RingElem(x, p, r), RingElem(y, p, r)
            assert reduce_level(a + b, t) == reduce_level(a, t) + reduce_level(b, t)
            assert reduce_level(a * b, t) == reduce_level(a, t) * reduce_level(b, t)


def test_rref_and_subspace():
    M = np.array([[1, 2, 0], [2, 4, 0], [0, 0, 1]])
    R, piv = rref(M, 5)
    assert piv == [0, 2]
    S = Subspace.span(M, 5)
    assert S.dim == 2 and [1, 0, 0] not in S and [3, 1, 0] in S and [2, 4, 3] in S
    assert S.contains_subspace(Subspace.span([[0, 0, 2]], 5))
    assert subspace_equal(S, Subspace.span([[1, 2, 1], [0, 0, 1]], 5))
    assert Subspace.full(4, 3).dim == 4


@given(primes, st.integers(1, 6), st.integers(1, 6), st.data())
def test_rank_and_kernel(p, rows, cols, data):
    M = np.array(data.draw(st.lists(st.lists(st.integers(0, p - 1), min_size=cols, max_size=cols),
                                     min_size=rows, max_size=rows)))
    rk, ker = rank_and_kernel(M, p)
    assert rk + ker.dim == cols
    assert rk == rank_mod_p(M, p) == kernels.rank_mod(M.copy(), p)
    if ker.dim:
        assert not (M @ ker.matrix.T % p).any()


@given(primes, st.integers(1, 3), st.data())
def test_smith_witnesses(p, r, data):
    m = p**r
    rows, cols = data.draw(st.integers(1, 6)), data.draw(st.integers(1, 6))
    M = np.array(data.draw(st.lists(st.lists(st.integers(0, m - 1), min_size=cols, max_size=cols),
                                     min_size=rows, max_size=rows)), dtype=np.int64)
    exps, U, V = smith_normal_form(M, p, r)
    D = U @ M @ V % m
    for k in range(min(rows, cols)):
        assert D[k, k] % m == p ** exps[k] % m
    off = D.copy()
    for k in range(min(rows, cols)):
        off[k, k] = 0
    assert not (off % m).any()
    assert list(exps) == sorted(exps)
    # compiled Smith form is an independent route
    assert list(kernels.snf_exponents(M.copy(), p, r)) == list(exps)
    ek, Uk, Vk = kernels.snf_full(M.copy(), p, r)
    assert list(ek) == list(exps)
    Dk = Uk @ M @ Vk % m
    assert all(Dk[i, j] % m == (p ** ek[i] % m if i == j else 0) for i in range(rows) for j in range(cols) if i < len(ek) or i != j)


@given(antisym_case())
def test_asnf_congruence_witness(case):
    p, r, A = case
    m = p**r
    prof, S = antisymmetric_snf(A, p, r)
    n = A.shape[0]
    B = asnf_block_form(prof, n, p, r)
    assert not ((S.T @ A @ S - B) % m).any()
    assert rank_mod_p(S, p) == n  # S is invertible
    assert list(prof.exponents) == sorted(prof.exponents)
    assert prof.odd_slot == (n % 2 == 1)


@given(antisym_case(), st.data())
def test_profile_invariant_under_congruence(case, data):
    p, r, A = case
    n = A.shape[0]
    g = data.draw(unimodular(n, p, r))
    B = g.T @ A @ g % p**r
    assert divisor_profile(A, p, r) == divisor_profile(B, p, r)


@given(antisym_case())
def test_profile_matches_smith(case):
    p, r, A = case
    prof = divisor_profile(A, p, r)
    exps = kernels.snf_exponents(A.copy(), p, r)
    assert list(prof.exponents) == [int(e) for e in exps[0 : 2 * len(prof.exponents) : 2]]


def test_not_antisymmetric():
    with pytest.raises(NotAntisymmetric):
        antisymmetric_snf(np.array([[0, 1], [1, 0]]), 3, 1)


@given(primes, st.integers(1, 3), st.data())
def test_module_kernel(p, r, data):
    m = p**r
    n = data.draw(st.integers(1, 5))
    M = np.array(data.draw(st.lists(st.lists(st.integers(0, m - 1), min_size=n, max_size=n),
                                     min_size=n, max_size=n)), dtype=np.int64)
    K = module_kernel(M, p, r)
    assert not (M @ K.T % m).any()
    # size of the kernel: product of p^e over the Smith exponents
    exps = smith_normal_form(M, p, r)[0]
    size = 1
    for e in exps:
        size *= p**e
    span = {tuple(np.zeros(n, dtype=np.int64))}
    for g in K:
        span = {tuple((np.array(v) + t * g) % m) for v in span for t in range(m)}
    assert len(span) == size


def test_isolation_and_rank():
    G = np.array([[1, 0, 0], [0, 3, 0]])
    assert invariant_exponents(G, 3, 3) == [0, 1]
    assert not is_isolated(G, 3, 3)
    assert module_rank(G, 3, 3) == 2
    assert is_isolated(np.array([[1, 2, 0], [0, 0, 1]]), 3, 3)


@pytest.mark.parametrize("p,r", [(3, 3), (5, 2)])
def test_asnf_random_corpus(p, r, long_mode):
    rng = np.random.default_rng(p * 100 + r)
    m = p**r
    trials = 10**4 if long_mode else 1500
    for i in range(trials):
        n = int(rng.integers(3, 16))
        U = np.triu(rng.integers(0, m, size=(n, n)), 1)
        scale = p ** rng.integers(0, r + 1, size=(n, n))
        A = (U * scale - (U * scale).T) % m
        prof, S = antisymmetric_snf(A, p, r)
        assert not ((S.T @ A @ S - asnf_block_form(prof, n, p, r)) % m).any()
        full = sorted(int(e) for e in kernels.snf_exponents(A.copy(), p, r))
        clamped = [min(e, r) for e in prof.exponents]
        expect = sorted([e for e in clamped for _ in (0, 1)] + ([r] if n % 2 else []))
        assert full == expect
        if i % 10 == 0:
            T = rng.integers(0, m, size=(n, n))
            while rank_mod_p(T, p) < n:
                T = rng.integers(0, m, size=(n, n))
            assert divisor_profile(T.T @ A @ T % m, p, r) == divisor_profile(A, p, r)


def _det_minor(M, p):
    M = [list(map(int, row)) for row in M]
    n = len(M)
    if n == 1:
        return M[0][0] % p
    return sum((-1) ** j * M[0][j] * _det_minor([row[:j] + row[j + 1:] for row in M[1:]], p) for j in range(n)) % p


def _rank_by_minors(M, p):
    from itertools import combinations

    n = M.shape[0]
    for k in range(n, 0, -1):
        for rows in combinations(range(n), k):
            for cols in combinations(range(n), k):
                if _det_minor(M[np.ix_(rows, cols)], p):
                    return k
    return 0


def test_rank_against_minors():
    rng = np.random.default_rng(7)
    for _ in range(300):
        M = rng.integers(0, 3, size=(4, 4))
        M[rng.integers(0, 4)] = 0 if rng.random() < 0.3 else M[rng.integers(0, 4)]
        assert rank_mod_p(M, 3) == _rank_by_minors(M, 3)


def test_module_kernel_regular_case():
    rng = np.random.default_rng(11)
    p, r = 3, 3
    for _ in range(200):
        n = int(rng.integers(2, 8))
        k = int(rng.integers(0, n))
        # generic rank-k matrix: only exponents 0 and r
        A = rng.integers(0, p**r, size=(n, k)) @ rng.integers(0, p**r, size=(k, n)) % p**r
        exps = smith_normal_form(A, p, r)[0]
        if any(0 < e < r for e in exps):
            continue
        K = module_kernel(A, p, r)
        _, ker = rank_and_kernel(A % p, p)
        assert subspace_equal(Subspace.span(K % p, p, n), ker)
