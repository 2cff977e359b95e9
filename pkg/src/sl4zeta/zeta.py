"""Poincare series from kernel-class data and the sl_4 zeta function.

A class c contributes the variable X_c = q^(d - d'_c) t^((d - d_c)/2); a
chain S = (c_1, ..., c_l) of classes with strictly decreasing kernel
dimension contributes

    |C_S| q^-(d - d'_{c_l}) prod_c X_c / (1 - X_c),

with |C_S| = |c_1| prod tau(c_i -> c_{i+1}).  The empty chain gives 1.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from importlib import resources
from itertools import combinations, product

import numpy as np

from .arith import check_odd_prime
from .classify import TooLarge, class_table
from .lattice import LieLattice, build_sl, derived_subspace, subalgebra_commutator_matrix, trace_dual
from .linalg import rank_and_kernel
from .ratfunc import BivariateRational, LaurentPoly, parse_poly


class MissingTransition(KeyError):
    pass


@dataclass
class KernelClassData:
    d: int
    h: int
    classes: dict  # name -> (d_c, d'_c, cardinality LaurentPoly)
    jumps: dict = field(default_factory=dict)  # (src, tgt) -> LaurentPoly
    default_zero: bool = True

    def tau(self, src, tgt):
        if (src, tgt) in self.jumps:
            return self.jumps[(src, tgt)]
        if self.default_zero:
            return LaurentPoly()
        raise MissingTransition((src, tgt))

    def index(self, name):
        """Position i of a class: d_c = d - 2(h - i)."""
        d_c = self.classes[name][0]
        return (d_c - self.d + 2 * self.h) // 2


@dataclass
class SeriesTerm:
    sequence: tuple
    index_set: tuple
    size: LaurentPoly  # |C_S|
    term: BivariateRational


def sl4_data() -> KernelClassData:
    tab = class_table()
    classes = {n: (dc, dp, tab.cards[n]) for n, (dc, dp) in tab.dims.items()}
    return KernelClassData(15, 7, classes, dict(tab.jumps))


def sl2_data() -> KernelClassData:
    q = LaurentPoly.q()
    return KernelClassData(3, 1, {"Reg": (1, 0, q**3 - 1)})


def _x_var(data, name):
    d_c, dp, _ = data.classes[name]
    return LaurentPoly.monomial(data.d - dp, (data.d - d_c) // 2)


def sequences(data: KernelClassData):
    """All chains of classes with strictly decreasing kernel dimension."""
    names = sorted(data.classes, key=lambda n: -data.classes[n][0])
    dims = sorted({data.classes[n][0] for n in names}, reverse=True)
    by_dim = {dc: [n for n in names if data.classes[n][0] == dc] for dc in dims}
    out = [()]
    for k in range(1, len(dims) + 1):
        for ds in combinations(dims, k):
            for choice in product(*[by_dim[dc] for dc in ds]):
                out.append(choice)
    return out


def chain_size(data, seq) -> LaurentPoly:
    if not seq:
        return LaurentPoly.const(1)
    size = data.classes[seq[0]][2]
    for a, b in zip(seq, seq[1:]):
        size = size * data.tau(a, b)
    return size


def series_terms(data: KernelClassData):
    q = LaurentPoly.q()
    out = []
    for seq in sequences(data):
        size = chain_size(data, seq)
        if not seq:
            out.append(SeriesTerm((), (), size, BivariateRational(size)))
            continue
        if size.is_zero():
            continue
        last_dp = data.classes[seq[-1]][1]
        num = size * q ** (-(data.d - last_dp))
        den = LaurentPoly.const(1)
        for c in seq:
            X = _x_var(data, c)
            num = num * X
            den = den * (1 - X)
        idx = tuple(sorted(data.index(c) for c in seq))
        out.append(SeriesTerm(seq, idx, size, BivariateRational(num, den)))
    return out


def assemble_poincare(data: KernelClassData) -> BivariateRational:
    """Exact Poincare series in (q, t) over a common denominator."""
    terms = series_terms(data)
    factors = {}
    for tm in terms:
        for c in tm.sequence:
            X = _x_var(data, c)
            factors[tuple(sorted(X.terms))] = X
    common = LaurentPoly.const(1)
    for X in factors.values():
        common = common * (1 - X)
    num = LaurentPoly()
    for tm in terms:
        rest = LaurentPoly.const(1)
        used = {tuple(sorted(_x_var(data, c).terms)) for c in tm.sequence}
        for key, X in factors.items():
            if key not in used:
                rest = rest * (1 - X)
        num = num + tm.term.num * rest
    return BivariateRational(num, common)


# ------------------------------------------------------------ sl_4


@lru_cache(maxsize=None)
def theorem_b_reference():
    raw = json.loads(resources.files("sl4zeta").joinpath("data", "theorem_b.json").read_text())
    t = LaurentPoly.t()
    F = LaurentPoly()
    for k, expr in raw["F"].items():
        F = F + parse_poly(expr) * t ** int(k)
    G = parse_poly(raw["G"])
    return F, G


def shift(P: BivariateRational, k=2) -> BivariateRational:
    """t -> q^-k t, i.e. s -> s + k for t = q^-s."""
    return P.substitute(q_map=(1, 0, 1), t_map=(-k, 1, 1))


def sl4_zeta(m: int = 1) -> BivariateRational:
    if m < 1:
        raise ValueError("m must be positive")
    P = assemble_poincare(sl4_data())
    S = shift(P, 2)
    return BivariateRational(S.num * LaurentPoly.monomial(15 * m, 0), S.den)


def theorem_b_checks():
    F, G = theorem_b_reference()
    P = shift(assemble_poincare(sl4_data()), 2)
    matches = P.num * G == F * P.den
    F1 = F.substitute(q_map=(0, 0, 1))
    G1 = G.substitute(q_map=(0, 0, 1))
    Fq2 = F.substitute(t_map=(2, 0, 1))
    return {
        "theorem_b_match": bool(matches),
        "F1_eq_G1": F1 == G1,
        "zeta_at_minus2_zero": Fq2.is_zero(),
        "reciprocity_F": list(F.reciprocity_exponents()),
        "reciprocity_G": list(G.reciprocity_exponents()),
        "denominator_factors": _shifted_factors(),
    }


def _shifted_factors():
    data = sl4_data()
    out = []
    for name, (dc, dp, _) in sorted(data.classes.items(), key=lambda kv: kv[1][0]):
        eq, et = data.d - dp - 2 * ((data.d - dc) // 2), (data.d - dc) // 2
        s = f"1 - q^{eq}*t^{et}"
        if s not in out:
            out.append(s)
    return out


def series_coefficients(P: BivariateRational, order: int):
    return P.t_series(order)


def abscissa(data: KernelClassData, mode="poincare"):
    """Largest real pole; returns (value, attaining classes)."""
    vals = {}
    for name, (dc, dp, card) in data.classes.items():
        if dc == data.d:
            continue
        if mode == "poincare":
            vals[name] = Fraction(2 * (data.d - dp), data.d - dc)
        elif mode == "group":
            vals[name] = Fraction(2 * (dc - dp), data.d - dc)
        else:
            raise ValueError(mode)
    best = max(vals.values())
    return best, sorted(n for n, v in vals.items() if v == best)


def largest_pole_of(G: LaurentPoly):
    """Largest s with a factor 1 - q^a t^b of G vanishing at t = q^-s.

    G is given as a product in the reference data; the factors are read
    from the tabulated expression.
    """
    raw = json.loads(resources.files("sl4zeta").joinpath("data", "theorem_b.json").read_text())["G"]
    best = None
    for a, b in re.findall(r"\(1-q\^?(\d*)\*t\^(\d+)\)", raw.replace(" ", "")):
        a = int(a) if a else 1
        s = Fraction(a, int(b))
        best = s if best is None or s > best else best
    return best


# ------------------------------------------------------------ brute force


def index_pattern(I, r, h):
    """Target divisor profile for index set I and exponent vector r."""
    I = sorted(I)
    ell = len(I)
    if len(r) != ell:
        raise ValueError("r must have one entry per index")
    i = [0] + I + [h]
    mu = [i[j + 1] - i[j] for j in range(ell + 1)]
    prof = [0] * mu[ell]
    acc = 0
    for k in range(ell - 1, -1, -1):
        acc += r[k]
        prof += [acc] * mu[k]
    return tuple(prof)


def index_sets(h):
    out = []
    for k in range(h + 1):
        out.extend(combinations(range(h), k))
    return out


def compositions(N, parts):
    if parts == 0:
        if N == 0:
            yield ()
        return
    for first in range(1, N - parts + 2):
        for rest in compositions(N - first, parts - 1):
            yield (first,) + rest


def profile_counts(L: LieLattice, p, N, workers=1, max_points=6 * 10**7):
    from . import kernels

    p = check_odd_prime(p)
    cost = p ** (N * L.d)
    if cost > max_points:
        raise TooLarge(f"{p}^({N}*{L.d}) = {cost:.2e} points")
    return kernels.profile_histogram(L.lam, p, N, workers)


def bruteforce_counts(L: LieLattice, p, I, r, hist=None):
    """|N_{I,r}| by enumeration of primitive w modulo p^N."""
    if not I:
        return 1
    N = sum(r)
    hist = hist if hist is not None else profile_counts(L, p, N)
    return hist.get(index_pattern(I, r, L.h), 0)


def predicted_count(data: KernelClassData, I, r, q):
    """Coefficient predicted by the chain expansion, evaluated at q."""
    if not I:
        return Fraction(1)
    I = sorted(I)
    total = Fraction(0)
    for seq in sequences(data):
        if len(seq) != len(I):
            continue
        # c_j <-> i_{l+1-j}
        if [data.index(c) for c in reversed(seq)] != I:
            continue
        size = chain_size(data, seq).evaluate(q)
        if not size:
            continue
        cls = list(reversed(seq))  # cls[j] belongs to i_{j+1}
        e = -(data.d - data.classes[cls[0]][1])
        for c, rj in zip(cls, r):
            e += (data.d - data.classes[c][1]) * rj
        total += size * Fraction(q) ** e
    return total


def onthefly_data(L: LieLattice, q) -> KernelClassData:
    """Kernel classes (dim ker, dim derived) of L over F_q with numeric sizes.

    Transitions are per-point sums of rank-locus ratios in each kernel, so
    no homogeneity inside a class is assumed.  Sizes are constants (the
    values at this q), so use the result only with ``predicted_count`` at
    the same q.
    """
    from .transitions import all_points
    from . import kernels

    q = check_odd_prime(q)
    pts = all_points(L.d, q)
    kinfo = {}
    for w in pts[1:]:
        M = np.tensordot(L.lam, w, axes=([2], [0])) % q
        _, ker = rank_and_kernel(M, q)
        D = derived_subspace(ker, L)
        kinfo.setdefault((ker.dim, D.dim), []).append(ker)
    classes, jumps = {}, {}
    for key, kers in kinfo.items():
        classes[key] = (key[0], key[1], LaurentPoly.const(len(kers)))
    for src, kers in kinfo.items():
        sums = {}
        for ker in kers:
            coef = subalgebra_commutator_matrix(ker, L).coef % q
            hist = kernels.rank_histogram(coef, q)
            for rk, n in enumerate(hist):
                if rk and n:
                    tgt_dim = ker.dim - rk
                    sums[tgt_dim] = sums.get(tgt_dim, Fraction(0)) + Fraction(int(n), int(hist[0]))
        for tgt in classes:
            if tgt[0] in sums and tgt[0] < src[0]:
                same_dim = [c for c in classes if c[0] == tgt[0]]
                if len(same_dim) > 1:
                    raise NotImplementedError("several target classes share a kernel dimension")
                jumps[(src, tgt)] = LaurentPoly.const(sums[tgt[0]] / len(kers))
    return KernelClassData(L.d, L.h, classes, jumps)


def oracle_table(L: LieLattice, p, nmax, data=None, workers=1):
    """Rows (I, r, brute force, predicted, match) for all r with N <= nmax."""
    if data is None:
        data = sl2_data() if L.d == 3 else onthefly_data(L, p)
    rows = []
    for N in range(1, nmax + 1):
        hist = profile_counts(L, p, N, workers)
        covered = 0
        for I in index_sets(L.h):
            if not I:
                continue
            for r in compositions(N, len(I)):
                bf = bruteforce_counts(L, p, I, r, hist)
                covered += bf
                pred = predicted_count(data, I, r, p)
                rows.append({"I": list(I), "r": list(r), "bruteforce": bf, "predicted": str(pred), "match": pred == bf})
        primitive = p ** (N * L.d) - p ** ((N - 1) * L.d)
        rows.append({"N": N, "primitive_total": primitive, "covered": covered, "match": covered == primitive})
    return rows


def series_is_nonnegative_integral(order=30, qs=(3, 5, 7, 11)):
    """t-coefficients of the zeta function are integer polynomials in q whose
    values at the given q are nonnegative (they count characters)."""
    coeffs = sl4_zeta(1).t_series(order)
    bad = []
    for k, c in enumerate(coeffs):
        if not c.has_integer_coefficients() or any(eq < 0 for eq, _ in c.terms):
            bad.append(k)
        elif any(c.evaluate(q) < 0 for q in qs):
            bad.append(k)
    return not bad, bad


# ------------------------------------------------------------ lifts


def rank_preserving_lifts(L: LieLattice, x, p, r):
    """Rank-preserving lifts of x in (Z/p^r)^d, by enumeration of all p^d lifts."""
    from . import kernels

    x = np.asarray(x, dtype=np.int64) % p**r
    return int(kernels.literal_lift_count(L.lam.astype(np.int64), x, p, r))


@dataclass
class LiftLaw:
    clamped: bool
    count: int  # from the affine criterion
    rank_z: int  # rk Z read off at level r
    unit_rank: int  # dim of the reduction of [V, V]

    def holds(self, d, p):
        return self.count == p ** (d - self.rank_z)


def lift_law(L: LieLattice, x, p, r) -> LiftLaw:
    from . import kernels

    pts = np.asarray(x, dtype=np.int64).reshape(1, -1) % p**r
    cl, rk, ok, rz, ru = kernels.rp_points(L.lam, L.lam, pts, p, r)[0]
    return LiftLaw(bool(cl), p ** (L.d - int(rk)) if ok else 0, int(rz), int(ru))


def lift_law_scan(L: LieLattice, p, r, workers=1, start=0, stop=None):
    """Exhaustive check of the count p^(d - rk Z) over x in (Z/p^r)^d."""
    from . import kernels

    stop = p ** (r * L.d) if stop is None else stop
    return kernels.rp_range(L.lam, L.lam, p, r, start, stop, workers)


def lift_law_sample(L: LieLattice, p, r, n, seed=0):
    from . import kernels

    rng = np.random.default_rng(seed)
    pts = rng.integers(0, p**r, size=(n, L.d))
    res = kernels.rp_points(L.lam, L.lam, pts, p, r)
    clamped = res[:, 0] == 1
    ok = res[:, 2] == 1
    match = clamped & ok & (res[:, 1] == res[:, 3])
    return {
        "points": n,
        "clamped": int(clamped.sum()),
        "match": int(match.sum()),
        "no_lift": int((clamped & ~ok).sum()),
        "non_isolated": int((clamped & (res[:, 3] != res[:, 4])).sum()),
    }


# ------------------------------------------------------------ isolation


def _rank_q(M):
    A = [[Fraction(int(v)) for v in row] for row in np.asarray(M)]
    rows, cols = len(A), len(A[0]) if A else 0
    rk = 0
    for c in range(cols):
        piv = next((i for i in range(rk, rows) if A[i][c]), None)
        if piv is None:
            continue
        A[rk], A[piv] = A[piv], A[rk]
        for i in range(rk + 1, rows):
            f = A[i][c] / A[rk][c]
            if f:
                A[i] = [a - f * b for a, b in zip(A[i], A[rk])]
        rk += 1
    return rk


def _random_unimodular(rng, n=4, steps=10, bound=3):
    g = np.eye(n, dtype=object)
    gi = np.eye(n, dtype=object)
    for _ in range(steps):
        i, j = rng.choice(n, 2, replace=False)
        t = int(rng.integers(-bound, bound + 1))
        E = np.eye(n, dtype=object)
        E[i, j] = t
        Ei = np.eye(n, dtype=object)
        Ei[i, j] = -t
        g, gi = g.dot(E), Ei.dot(gi)
    return g, gi


def integer_class_reps(p):
    """Integer cross-section representatives, one per class and Sub subtype."""
    from .transitions import representatives

    reps = {("Reg", None): np.array([[0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1], [0, 0, 0, 0]], dtype=np.int64)}
    reps.update(representatives(p, reduce=False))
    return reps


def isolation_check(p, per_class=1000, K=4, seed=0):
    """Derived centralizer modules at rank-exact lifts are isolated.

    Each point is g x0 g^-1 for an integer cross-section representative x0
    with rank_Q ad(x0) = rank_Fp ad(x0) and a random unimodular g, so the
    point is a rank-exact lift of its reduction.
    """
    from . import kernels

    p = check_odd_prime(p)
    L = build_sl(4)
    lam = L.lam.astype(np.int64)
    rng = np.random.default_rng(seed)
    m = p**K
    out = {}
    for key, x0 in integer_class_reps(p).items():
        ad0 = np.einsum("i,ijh->hj", trace_free_coords(x0, L), lam)
        exact = _rank_q(ad0) == kernels.rank_mod(ad0 % p, p)
        iso = bad_dim = 0
        dims = set()
        for _ in range(per_class if exact else 0):
            g, gi = _random_unimodular(rng)
            x = (g.dot(x0.astype(object)).dot(gi)) % m
            w = np.asarray(trace_dual(x.astype(np.int64), L), dtype=np.int64) % m
            R = np.tensordot(lam, w, axes=([2], [0])) % m
            exps, U, V = kernels.snf_full(R.copy(), p, K)
            z0 = np.array([i for i, e in enumerate(exps) if e == K], dtype=np.int64)
            if any(0 < e < K for e in exps):
                bad_dim += 1
                continue
            dims.add(len(z0))
            rz, ru = kernels._bracket_rank(lam, V, z0, len(z0), p, K)
            iso += rz == ru
        name = key[0] if key[1] is None else f"{key[0]}/{key[1]}"
        out[name] = {"rank_exact_rep": exact, "points": per_class if exact else 0, "isolated": int(iso),
                     "not_rank_exact": bad_dim, "kernel_dims": sorted(dims)}
    return out


def trace_free_coords(x, L):
    from .lattice import coords

    return np.asarray(coords(np.asarray(x, dtype=np.int64), L), dtype=np.int64)
