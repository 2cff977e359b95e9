"""Rank loci of centralizer subalgebras and the transition data between classes.

The transition counts used by the zeta assembly are the tabulated
polynomials (``classify.class_table``).  This module recomputes what can
be recomputed by brute force: rank censuses of centralizer commutator
matrices, their ratios, a direct census of ``a + y^T`` over the
centralizer, the rank-4 analysis of the nilpotent 9-dimensional
centralizer and a direct enumeration of chain sets.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from importlib import resources

import numpy as np

from . import kernels
from .arith import check_odd_prime
from .classify import (
    CODES,
    ClassLabel,
    TooLarge,
    class_table,
    cross_section,
    is_square_mod,
    mat_inverse_mod,
    random_gl,
)
from .lattice import (
    LinearFormMatrix,
    build_sl,
    centralizer,
    coords,
    derived_subspace,
    parse_matrix_expr,
    subalgebra_commutator_matrix,
    trace_gram,
)
from .linalg import Subspace, rank_and_kernel, rank_mod_p


class NonDivisible(ArithmeticError):
    pass


@dataclass(frozen=True)
class RankCensus:
    q: int
    counts: dict  # rank -> number of points

    @property
    def total(self):
        return sum(self.counts.values())

    def __getitem__(self, rank):
        return self.counts.get(rank, 0)


@dataclass(frozen=True)
class FiberCensus:
    fibers: dict  # type -> common fiber size (None if not constant)
    base_points: dict  # type -> number of base points
    sizes: dict  # type -> sorted set of observed fiber sizes

    def total(self):
        return sum((self.fibers[t] or 0) * self.base_points[t] for t in self.fibers)


# centralizer dimension of each class code
CODE_DIM = np.array([15, 3, 5, 5, 5, 5, 5, 7, 7, 7, 9, 9], dtype=np.int64)


# ------------------------------------------------------------ representatives


def _nonsquare(q):
    return next(a for a in range(1, q) if not is_square_mod(a, q))


def representatives(q, reduce=True):
    """Cross-section representative per class (and per Sub subtype).

    With ``reduce=False`` the integer matrices are returned unreduced.
    """
    q = check_odd_prime(q)
    ns = _nonsquare(q)
    a = 1
    # Diag31: beta = -gamma^2, gamma != 0, gamma^2 != 4 alpha^2; over F_3 this
    # forces alpha = 0, which still gives the right invariants
    da, g = next((al, g) for al in (1, 0) for g in range(1, q) if (g * g - 4 * al * al) % q)
    m = q if reduce else None
    reps = {
        ("Sub", "N31"): cross_section((3, 1), (0, 0), m),
        ("Sub", "T31TwoEV"): cross_section((3, 1), (a, 0), m),
        ("Sub", "T31ThreeEV"): cross_section((3, 1), (a, -4 * a * a), m),
        ("Sub", "Diag31"): cross_section((3, 1), (da, -g * g), m),
        ("Sub", "NonJor31"): cross_section((3, 1), (a, -ns), m),
        ("S22Diag", None): cross_section((2, 2), 1, m),
        ("S22Non", None): cross_section((2, 2), ns, m),
        ("N22", None): cross_section((2, 2), 0, m),
        ("D211", None): cross_section((2, 1, 1), 1, m),
        ("N211", None): cross_section((2, 1, 1), 0, m),
    }
    return reps


# ------------------------------------------------------------ rank censuses


def _lattice_for(S):
    return {3: build_sl(2), 8: build_sl(3), 15: build_sl(4)}[S.ambient]


def _coef_mod(S, p):
    if isinstance(S, LinearFormMatrix):
        return np.asarray(S.coef, dtype=np.int64) % p
    if isinstance(S, Subspace):
        return subalgebra_commutator_matrix(S, _lattice_for(S)).coef % p
    return subalgebra_commutator_matrix(np.asarray(S), build_sl(4)).coef.astype(np.int64) % p


def rank_census(S, q, workers=1, max_points=5 * 10**7):
    """Exhaustive rank census of the commutator matrix of S over F_q."""
    q = check_odd_prime(q)
    coef = _coef_mod(S, q)
    k = coef.shape[2]
    if q**k > max_points:
        raise TooLarge(f"{q}^{k} = {q**k:.2e} points exceeds the budget of {max_points:.0e}")
    hist = kernels.rank_histogram(coef, q, workers)
    return RankCensus(q, {r: int(n) for r, n in enumerate(hist) if n})


def transition_ratio(S, rank, q, census=None):
    census = census or rank_census(S, q)
    num, den = census[rank], census[0]
    if num % den:
        raise NonDivisible(f"|L_{rank}| = {num} is not divisible by |L_0| = {den}")
    return num // den


def centralizer_of(x, q):
    return centralizer(np.asarray(x) % q, build_sl(4), q, 1)


# which ranks of the centralizer commutator matrix land in which class
def expected_ratios(name, q):
    """Tabulated transitions of a class grouped by target dimension."""
    tab = class_table()
    d0 = tab.dims[name][0]
    out = {}
    for (src, tgt), poly in tab.jumps.items():
        if src != name:
            continue
        rank = d0 - tab.dims[tgt][0]
        out[rank] = out.get(rank, Fraction(0)) + poly.evaluate(q)
    return out


def jump_check(q, workers=1):
    """Ratios |L_2k|/|L_0| for every representative against the table."""
    q = check_odd_prime(q)
    report = []
    for (name, sub), x in representatives(q).items():
        S = centralizer_of(x, q)
        census = rank_census(S, q, workers)
        ratios = {r: Fraction(census[r], census[0]) for r in census.counts if r}
        expected = expected_ratios(name, q)
        match = all(ratios.get(r, 0) == v for r, v in expected.items()) and set(ratios) <= set(expected)
        report.append(
            {
                "class": name,
                "subtype": sub,
                "q": q,
                "dim": S.dim,
                "rank_census": {str(r): n for r, n in sorted(census.counts.items())},
                "ratios": {str(r): str(v) for r, v in sorted(ratios.items())},
                "expected_from_table": {str(r): str(v) for r, v in sorted(expected.items())},
                "match": bool(match),
            }
        )
    return report


def conjugate(x, g, q):
    return (g @ np.asarray(x) @ mat_inverse_mod(g, q)) % q


# ------------------------------------------------------------ direct census


def _swap_ef(v):
    """Coordinates of the transpose: swap the e and f blocks."""
    v = np.asarray(v)
    return np.concatenate([v[..., :3], v[..., 9:15], v[..., 3:9]], axis=-1)


def direct_transition_census(a, q, verbose=False, chunk=1 << 20, workers=1):
    """Tally a + y^T over all y in the centralizer of a.

    Returns {centralizer dimension: count}, or {ClassLabel: count} when
    ``verbose``.
    """
    q = check_odd_prime(q)
    S = centralizer_of(a, q)
    if q**S.dim > 5 * 10**7:
        raise TooLarge(f"{q}^{S.dim} points")
    base = coords(np.asarray(a) % q, build_sl(4), q)
    B = S.matrix
    table = kernels.charpoly_table(q)
    total = q**S.dim
    counts = np.zeros(len(CODES), dtype=np.int64)
    kernels.set_workers(workers)
    digits = q ** np.arange(S.dim, dtype=np.int64)
    for lo in range(0, total, chunk):
        idx = np.arange(lo, min(total, lo + chunk), dtype=np.int64)
        coeff = (idx[:, None] // digits[None, :]) % q
        ys = coeff @ B % q
        pts = (base[None, :] + _swap_ef(ys)) % q
        codes = kernels.classify_batch(pts, q, table)
        counts += np.bincount(codes, minlength=len(CODES))
    if verbose:
        return {ClassLabel.from_code(c): int(n) for c, n in enumerate(counts) if n}
    out = {}
    for c, n in enumerate(counts):
        if n:
            out[int(CODE_DIM[c])] = out.get(int(CODE_DIM[c]), 0) + int(n)
    return out


# ------------------------------------------------------------ N211 rank 4


@lru_cache(maxsize=None)
def subalgebra_data():
    return json.loads(resources.files("sl4zeta").joinpath("data", "subalgebras.json").read_text())


def subalgebra_basis(name):
    data = subalgebra_data()[name]
    L = build_sl(4)
    return np.array([coords(parse_matrix_expr(b), L) for b in data["basis"]], dtype=np.int64)


def printed_form_matrix(name):
    """The tabulated commutator matrix as a LinearFormMatrix."""
    import re

    rows = subalgebra_data()[name]["R"]
    k = len(rows)
    coef = np.zeros((k, k, k), dtype=np.int64)
    for i, row in enumerate(rows):
        for j, entry in enumerate(row):
            s = entry.replace(" ", "")
            if s == "0":
                continue
            for sign, c, h in re.findall(r"([+-]?)(\d*)\*?Y(\d+)", s):
                coef[i, j, int(h)] += (-1 if sign == "-" else 1) * (int(c) if c else 1)
    return LinearFormMatrix(coef)


def n211_form_matrix():
    return subalgebra_commutator_matrix(subalgebra_basis("N211"), build_sl(4))


def rank4_polys(y):
    """The seven tabulated generators evaluated at y (integer arrays ok)."""
    Y0, Y1, Y2, Y3, Y4, Y5, Y6, Y7 = (y[..., i] for i in range(8))
    return [
        Y0 * Y3 - Y4 * Y5,
        Y1 * Y2 - Y4 * Y6,
        Y0 * Y2 - Y1 * Y3 - Y4 * Y7,
        Y2**2 * Y5 - Y3**2 * Y6 - Y2 * Y3 * Y7,
        Y1**2 * Y5 - Y0**2 * Y6 + Y0 * Y1 * Y7,
        Y1 * Y3**2 - Y2 * Y4 * Y5 + Y3 * Y4 * Y7,
        Y1**2 * Y3 - Y0 * Y4 * Y6 + Y1 * Y4 * Y7,
    ]


def gl2_type(c5, c6, c7, q):
    if c5 % q == 0 and c6 % q == 0 and c7 % q == 0:
        return "central"
    # dual coordinates pair with (e34, e43, h) through the trace form, so the
    # trace-zero part is [[c7, 2 c5], [2 c6, -c7]]
    neg_disc = (c7 * c7 + 4 * c5 * c6) % q
    if neg_disc == 0:
        return "nilpotent"
    return "splitSemisimple" if is_square_mod(neg_disc, q) else "nonSplit"


def n211_rank4_analysis(q, workers=1):
    q = check_odd_prime(q)
    coef = np.ascontiguousarray(n211_form_matrix().coef % q)
    kernels.set_workers(workers)
    hist, fiber, ideal_bad = kernels.n211_scan(coef, q)
    L4 = int(hist[4])
    fibers, base, sizes = {}, {}, {}
    for t in ("central", "nilpotent", "splitSemisimple", "nonSplit"):
        fibers[t], base[t], sizes[t] = None, 0, set()
    for idx in range(q**4):
        c5, c6, c7, c8 = (idx // q**k % q for k in range(4))
        t = gl2_type(c5, c6, c7, q)
        base[t] += 1
        sizes[t].add(int(fiber[idx]))
    for t in sizes:
        if len(sizes[t]) == 1:
            fibers[t] = next(iter(sizes[t]))
    census = FiberCensus(fibers, base, {t: sorted(s) for t, s in sizes.items()})
    report = {
        "rank_census": {str(r): int(n) for r, n in enumerate(hist) if n},
        "ideal_zero_set_equals_rank_le_4": int(ideal_bad) == 0,
        "ideal_mismatches": int(ideal_bad),
        "fiber_sum_equals_L4": census.total() == L4,
    }
    return L4, census, report


# ------------------------------------------------------------ chain sets


class KernelClassifier:
    """Kernel class of a dual vector w: the class of the element whose
    trace form is w for sl_4, else (dim ker R(w), dim of its derived algebra).
    """

    def __init__(self, L, q):
        self.L, self.q = L, q
        if L.d == 15:
            self.ginv = mat_inverse_mod(trace_gram(L) % q, q)
            self.table = kernels.charpoly_table(q)

    def classes(self, ws):
        ws = np.atleast_2d(np.asarray(ws, dtype=np.int64)) % self.q
        if self.L.d == 15:
            xs = ws @ self.ginv.T % self.q
            codes = kernels.classify_batch(xs, self.q, self.table)
            return [_collapse(ClassLabel.from_code(int(c))) for c in codes]
        out = []
        for w in ws:
            rk, ker = rank_and_kernel(np.tensordot(self.L.lam, w, axes=([2], [0])) % self.q, self.q)
            out.append((ker.dim, derived_subspace(ker, self.L).dim))
        return out

    def kernel(self, w):
        M = np.tensordot(self.L.lam, np.asarray(w, dtype=np.int64), axes=([2], [0])) % self.q
        return rank_and_kernel(M, self.q)[1]


def _collapse(label):
    return "Sub" if label.name == "Sub" else label.name


def all_points(d, q):
    idx = np.arange(q**d, dtype=np.int64)
    return (idx[:, None] // (q ** np.arange(d, dtype=np.int64))[None, :]) % q


def f_set_enumerate(L, sequence, q, max_cost=10**8, points=None):
    """Number of chains z_1, z_2 = z_1 + u_1, ... with z_j in class c_j.

    Each step adds u in the derived algebra of the current kernel (as a
    coordinate vector).  ``sequence`` lists classes from the largest
    kernel to the smallest.  sl_4 classes are names ('Sub', 'N22', ...);
    other lattices use (dim ker, dim derived) pairs.
    """
    q = check_odd_prime(q)
    if not sequence:
        return 1
    kc = KernelClassifier(L, q)
    if points is None:
        if L.d == 15:
            raise TooLarge("pass the points of the first class for sl_4")
        pts = all_points(L.d, q)
        points = pts[[c == sequence[0] for c in kc.classes(pts)]]
    points = np.atleast_2d(points)
    est = len(points)
    for c in sequence[:-1]:
        dprime = class_table().dims[c][1] if L.d == 15 else c[1]
        est *= q**dprime
    if est > max_cost:
        raise TooLarge(f"estimated {est:.2e} classifications exceeds {max_cost:.0e}")

    def count_from(w, rest):
        if not rest:
            return 1
        D = derived_subspace(kc.kernel(w), L)
        if D.dim == 0:
            return 0
        us = all_points(D.dim, q) @ D.matrix % q
        cand = (w[None, :] + us) % q
        cls = kc.classes(cand)
        hits = [cand[i] for i, c in enumerate(cls) if c == rest[0]]
        return sum(count_from(h, rest[1:]) for h in hits)

    return sum(count_from(w, list(sequence[1:])) for w in points)


def class_points(name, q, workers=1):
    """Trace-dual vectors of all elements of an sl_4 class (q = 3 only)."""
    q = check_odd_prime(q)
    if q != 3:
        raise TooLarge("class point lists are enumerated only for q = 3")
    codes = [c for c, (n, _) in enumerate(CODES) if n == name]
    xs = kernels.collect_codes(q, np.array(codes, dtype=np.int64), kernels.charpoly_table(q), workers)
    G = trace_gram(build_sl(4)) % q
    return xs @ G.T % q


def homogeneity_check(name, q, trials=10, seed=0):
    """Ratios for random GL_4 conjugates of a class representative."""
    rng = np.random.default_rng(seed)
    reps = representatives(q)
    x = next(v for (n, _), v in reps.items() if n == name)
    seen = set()
    for _ in range(trials):
        y = conjugate(x, random_gl(q, rng=rng), q)
        census = rank_census(centralizer_of(y, q), q)
        seen.add(tuple(sorted(census.counts.items())))
    return seen
