"""Compiled batch routines (numba).

Each kernel here has a plain reference counterpart elsewhere in the
package and is tested against it.  All arithmetic is in int64 with
moduli small enough (p^r < 2^20) that products never overflow.
"""

from __future__ import annotations

from functools import lru_cache

import numba
import numpy as np
from numba import njit, prange

try:  # the bundled TBB is too old; prefer OpenMP when it is there
    from numba.np.ufunc import omppool  # noqa: F401

    numba.config.THREADING_LAYER = "omp"
except ImportError:
    pass

from .classify import factor_small

# characteristic-polynomial patterns
SQF, A4, A3B1, A2B2, A2B1C1, A2Q, Q2 = range(7)

# class codes (see classify.CODES)
C_ZERO, C_REG, C_N31, C_TWO, C_THREE, C_DIAG31, C_NONJOR, C_SD, C_SN, C_N22, C_D211, C_N211 = range(12)


def set_workers(n):
    if n and n > 0:
        numba.set_num_threads(min(int(n), numba.config.NUMBA_NUM_THREADS))


# ------------------------------------------------------------ lookup table


@lru_cache(maxsize=None)
def charpoly_table(p):
    """Pattern and roots for every X^4 + a2 X^2 + a3 X + a4 over F_p."""
    size = p**3
    pat = np.zeros(size, np.int64)
    ra = np.zeros(size, np.int64)
    rb = np.zeros(size, np.int64)
    g1 = np.zeros(size, np.int64)
    g0 = np.zeros(size, np.int64)
    for a2 in range(p):
        for a3 in range(p):
            for a4 in range(p):
                key = (a2 * p + a3) * p + a4
                fac = factor_small((a4, a3, a2, 0, 1), p)
                lin = sorted(((m, -g[0] % p) for g, m in fac if len(g) == 2), reverse=True)
                quad = [(g, m) for g, m in fac if len(g) == 3]
                mults = [m for m, _ in lin]
                if all(m == 1 for _, m in fac):
                    pat[key] = SQF
                elif mults == [4]:
                    pat[key], ra[key] = A4, lin[0][1]
                elif mults == [3, 1]:
                    pat[key], ra[key], rb[key] = A3B1, lin[0][1], lin[1][1]
                elif mults == [2, 2]:
                    pat[key], ra[key], rb[key] = A2B2, lin[0][1], lin[1][1]
                elif mults == [2, 1, 1]:
                    pat[key], ra[key] = A2B1C1, lin[0][1]
                elif mults == [2] and quad:
                    pat[key], ra[key] = A2Q, lin[0][1]
                elif not lin and quad and quad[0][1] == 2:
                    pat[key], g0[key], g1[key] = Q2, quad[0][0][0], quad[0][0][1]
                else:
                    raise AssertionError(f"unhandled factorization {fac}")
    return pat, ra, rb, g1, g0


# ------------------------------------------------------------ small helpers


@njit(cache=True)
def rank_mod(A, p):
    """Rank over F_p; A is overwritten."""
    rows, cols = A.shape
    r = 0
    for c in range(cols):
        if r == rows:
            break
        piv = -1
        for i in range(r, rows):
            if A[i, c] % p != 0:
                piv = i
                break
        if piv < 0:
            continue
        if piv != r:
            for j in range(cols):
                t = A[r, j]
                A[r, j] = A[piv, j]
                A[piv, j] = t
        inv = 1
        a = A[r, c] % p
        # Fermat inverse
        e = p - 2
        b = a
        while e:
            if e & 1:
                inv = inv * b % p
            b = b * b % p
            e >>= 1
        for j in range(cols):
            A[r, j] = A[r, j] * inv % p
        for i in range(r + 1, rows):
            f = A[i, c] % p
            if f:
                for j in range(cols):
                    A[i, j] = (A[i, j] - f * A[r, j]) % p
        r += 1
    return r


@njit(cache=True)
def _vp(a, p, cap):
    if a == 0:
        return cap
    v = 0
    while a % p == 0 and v < cap:
        a //= p
        v += 1
    return v


@njit(cache=True)
def _inv_mod(u, m):
    # extended Euclid
    a, b = u % m, m
    x0, x1 = 1, 0
    while b:
        q = a // b
        a, b = b, a - q * b
        x0, x1 = x1, x0 - q * x1
    return x0 % m


@njit(cache=True)
def snf_exponents(A, p, r):
    """Smith exponents over Z/p^r (sorted, clamped at r); A is overwritten."""
    m = 1
    for _ in range(r):
        m *= p
    rows, cols = A.shape
    n = min(rows, cols)
    out = np.full(n, r, np.int64)
    for k in range(n):
        best, bi, bj = r, -1, -1
        for i in range(k, rows):
            for j in range(k, cols):
                a = A[i, j] % m
                if a:
                    v = _vp(a, p, r)
                    if v < best:
                        best, bi, bj = v, i, j
                        if v == 0:
                            break
            if best == 0 and bi >= 0:
                break
        if bi < 0:
            break
        if bi != k:
            for j in range(cols):
                t = A[k, j]
                A[k, j] = A[bi, j]
                A[bi, j] = t
        if bj != k:
            for i in range(rows):
                t = A[i, k]
                A[i, k] = A[i, bj]
                A[i, bj] = t
        pe = 1
        for _ in range(best):
            pe *= p
        u = _inv_mod((A[k, k] % m) // pe, m)
        for j in range(k, cols):
            A[k, j] = A[k, j] * u % m
        for i in range(k + 1, rows):
            a = A[i, k] % m
            if a:
                c = a // pe
                for j in range(k, cols):
                    A[i, j] = (A[i, j] - c * A[k, j]) % m
        for j in range(k + 1, cols):
            a = A[k, j] % m
            if a:
                A[k, j] = 0
        out[k] = best
    return out


@njit(cache=True)
def snf_full(A, p, r):
    """Smith form over Z/p^r with transforms: U A V = diag(p^e)."""
    m = 1
    for _ in range(r):
        m *= p
    rows, cols = A.shape
    n = min(rows, cols)
    U = np.eye(rows, dtype=np.int64)
    V = np.eye(cols, dtype=np.int64)
    out = np.full(n, r, np.int64)
    for k in range(n):
        best, bi, bj = r, -1, -1
        for i in range(k, rows):
            for j in range(k, cols):
                a = A[i, j] % m
                if a:
                    v = _vp(a, p, r)
                    if v < best:
                        best, bi, bj = v, i, j
        if bi < 0:
            break
        if bi != k:
            for j in range(cols):
                t = A[k, j]
                A[k, j] = A[bi, j]
                A[bi, j] = t
            for j in range(rows):
                t = U[k, j]
                U[k, j] = U[bi, j]
                U[bi, j] = t
        if bj != k:
            for i in range(rows):
                t = A[i, k]
                A[i, k] = A[i, bj]
                A[i, bj] = t
            for i in range(cols):
                t = V[i, k]
                V[i, k] = V[i, bj]
                V[i, bj] = t
        pe = 1
        for _ in range(best):
            pe *= p
        u = _inv_mod((A[k, k] % m) // pe, m)
        for j in range(cols):
            A[k, j] = A[k, j] * u % m
        for j in range(rows):
            U[k, j] = U[k, j] * u % m
        for i in range(k + 1, rows):
            a = A[i, k] % m
            if a:
                c = a // pe
                for j in range(cols):
                    A[i, j] = (A[i, j] - c * A[k, j]) % m
                for j in range(rows):
                    U[i, j] = (U[i, j] - c * U[k, j]) % m
        for j in range(k + 1, cols):
            a = A[k, j] % m
            if a:
                c = a // pe
                for i in range(rows):
                    A[i, j] = (A[i, j] - c * A[i, k]) % m
                for i in range(cols):
                    V[i, j] = (V[i, j] - c * V[i, k]) % m
        out[k] = best
    return out, U, V


# ------------------------------------------------------------ census


@njit(cache=True)
def _decode_sl4(n, p, v):
    for k in range(15):
        v[k] = n % p
        n //= p


@njit(cache=True)
def _fill_matrix(v, p, x):
    x[0, 0] = v[0] % p
    x[1, 1] = (v[1] - v[0]) % p
    x[2, 2] = (v[2] - v[1]) % p
    x[3, 3] = (-v[2]) % p
    # e12 e23 e34 e13 e24 e14, then transposes
    x[0, 1] = v[3]
    x[1, 2] = v[4]
    x[2, 3] = v[5]
    x[0, 2] = v[6]
    x[1, 3] = v[7]
    x[0, 3] = v[8]
    x[1, 0] = v[9]
    x[2, 1] = v[10]
    x[3, 2] = v[11]
    x[2, 0] = v[12]
    x[3, 1] = v[13]
    x[3, 0] = v[14]


@njit(cache=True)
def _det3(x, a, b, c):
    return (
        x[a, a] * (x[b, b] * x[c, c] - x[b, c] * x[c, b])
        - x[a, b] * (x[b, a] * x[c, c] - x[b, c] * x[c, a])
        + x[a, c] * (x[b, a] * x[c, b] - x[b, b] * x[c, a])
    )


@njit(cache=True)
def _det4(x):
    s = 0
    for j in range(4):
        # cofactor expansion along row 0
        cols = np.empty(3, np.int64)
        t = 0
        for c in range(4):
            if c != j:
                cols[t] = c
                t += 1
        m = (
            x[1, cols[0]] * (x[2, cols[1]] * x[3, cols[2]] - x[2, cols[2]] * x[3, cols[1]])
            - x[1, cols[1]] * (x[2, cols[0]] * x[3, cols[2]] - x[2, cols[2]] * x[3, cols[0]])
            + x[1, cols[2]] * (x[2, cols[0]] * x[3, cols[1]] - x[2, cols[1]] * x[3, cols[0]])
        )
        if j % 2 == 0:
            s += x[0, j] * m
        else:
            s -= x[0, j] * m
    return s


@njit(cache=True)
def _rank_shift(x, a, p, work):
    for i in range(4):
        for j in range(4):
            work[i, j] = x[i, j]
        work[i, i] = (x[i, i] - a) % p
    return rank_mod(work, p)


@njit(cache=True)
def classify_matrix(x, p, pat, ra, rb, g1, g0, work):
    a2 = 0
    for i in range(4):
        for j in range(i + 1, 4):
            a2 += x[i, i] * x[j, j] - x[i, j] * x[j, i]
    a3 = -(_det3(x, 0, 1, 2) + _det3(x, 0, 1, 3) + _det3(x, 0, 2, 3) + _det3(x, 1, 2, 3))
    a4 = _det4(x)
    key = ((a2 % p) * p + a3 % p) * p + a4 % p
    t = pat[key]
    if t == SQF:
        return C_REG
    a = ra[key]
    if t == A4:
        rk = _rank_shift(x, a, p, work)
        if rk == 3:
            return C_REG
        if rk == 1:
            return C_N211
        if rk == 0:
            return C_ZERO
        for i in range(4):
            for j in range(4):
                s = 0
                for k in range(4):
                    s += x[i, k] * x[k, j]
                if s % p:
                    return C_N31
        return C_N22
    if t == A3B1:
        rk = _rank_shift(x, a, p, work)
        if rk == 3:
            return C_REG
        if rk == 2:
            return C_THREE
        return C_D211
    if t == A2B2:
        r1 = _rank_shift(x, a, p, work)
        r2 = _rank_shift(x, rb[key], p, work)
        if r1 == 3 and r2 == 3:
            return C_REG
        if r1 == 2 and r2 == 2:
            return C_SD
        return C_TWO
    if t == A2B1C1:
        return C_REG if _rank_shift(x, a, p, work) == 3 else C_DIAG31
    if t == A2Q:
        return C_REG if _rank_shift(x, a, p, work) == 3 else C_NONJOR
    # Q2: g(x) = x^2 + g1 x + g0
    c1, c0 = g1[key], g0[key]
    for i in range(4):
        for j in range(4):
            s = 0
            for k in range(4):
                s += x[i, k] * x[k, j]
            s += c1 * x[i, j]
            if i == j:
                s += c0
            if s % p:
                return C_REG
    return C_SN


@njit(cache=True, parallel=True)
def _census_range(p, start, stop, pat, ra, rb, g1, g0, nchunks):
    counts = np.zeros((nchunks, 12), np.int64)
    total = stop - start
    for c in prange(nchunks):
        lo = start + total * c // nchunks
        hi = start + total * (c + 1) // nchunks
        v = np.zeros(15, np.int64)
        x = np.zeros((4, 4), np.int64)
        work = np.zeros((4, 4), np.int64)
        for n in range(lo, hi):
            _decode_sl4(n, p, v)
            _fill_matrix(v, p, x)
            counts[c, classify_matrix(x, p, pat, ra, rb, g1, g0, work)] += 1
    return counts.sum(axis=0)


def census_range(p, start, stop, table, workers=1):
    set_workers(workers)
    return _census_range(p, start, stop, *table, max(64, 4 * int(workers or 1)))


@njit(cache=True, parallel=True)
def _classify_batch(pts, p, pat, ra, rb, g1, g0):
    n = pts.shape[0]
    out = np.zeros(n, np.int64)
    for i in prange(n):
        x = np.zeros((4, 4), np.int64)
        work = np.zeros((4, 4), np.int64)
        _fill_matrix(pts[i] % p, p, x)
        out[i] = classify_matrix(x, p, pat, ra, rb, g1, g0, work)
    return out


def classify_batch(pts, p, table):
    return _classify_batch(np.ascontiguousarray(pts, dtype=np.int64), p, *table)


# ------------------------------------------------------------ rank censuses


@njit(cache=True)
def _eval_form(coef, w, m, out):
    k = coef.shape[0]
    for i in range(k):
        for j in range(k):
            s = 0
            for h in range(coef.shape[2]):
                s += coef[i, j, h] * w[h]
            out[i, j] = s % m


@njit(cache=True, parallel=True)
def _projective_rank_census(coef, p):
    """Rank histogram over projective points (first nonzero coordinate 1)."""
    k = coef.shape[2]
    d = coef.shape[0]
    counts = np.zeros((k, d + 1), np.int64)
    for lead in prange(k):
        # points whose first nonzero coordinate is `lead`
        tail = k - lead - 1
        n = 1
        for _ in range(tail):
            n *= p
        w = np.zeros(k, np.int64)
        M = np.zeros((d, d), np.int64)
        for idx in range(n):
            w[:] = 0
            w[lead] = 1
            t = idx
            for h in range(lead + 1, k):
                w[h] = t % p
                t //= p
            _eval_form(coef, w, p, M)
            counts[lead, rank_mod(M, p)] += 1
    return counts.sum(axis=0)


def rank_histogram(coef, p, workers=1):
    """Number of w in F_p^k with each rank of R(w)."""
    set_workers(workers)
    coef = np.ascontiguousarray(np.asarray(coef, dtype=np.int64) % p)
    hist = _projective_rank_census(coef, p) * (p - 1)
    hist[0] += 1
    return hist


@njit(cache=True, parallel=True)
def _rank_histogram_full(coef, p):
    k = coef.shape[2]
    d = coef.shape[0]
    total = 1
    for _ in range(k):
        total *= p
    nch = 64
    counts = np.zeros((nch, d + 1), np.int64)
    for c in prange(nch):
        w = np.zeros(k, np.int64)
        M = np.zeros((d, d), np.int64)
        for idx in range(total * c // nch, total * (c + 1) // nch):
            t = idx
            for h in range(k):
                w[h] = t % p
                t //= p
            _eval_form(coef, w, p, M)
            counts[c, rank_mod(M, p)] += 1
    return counts.sum(axis=0)


def rank_histogram_full(coef, p, workers=1):
    """Same as rank_histogram but without the projective shortcut."""
    set_workers(workers)
    return _rank_histogram_full(np.ascontiguousarray(np.asarray(coef, dtype=np.int64) % p), p)


# ------------------------------------------------------------ divisor profiles


@njit(cache=True, parallel=True)
def _profile_histogram(coef, p, N):
    """Histogram of paired Smith exponents over primitive w mod p^N.

    The key of a profile (e_0, e_2, e_4, ...) is sum e_k (N+1)^k.
    """
    k = coef.shape[2]
    d = coef.shape[0]
    h = d // 2
    m = 1
    for _ in range(N):
        m *= p
    total = 1
    for _ in range(k):
        total *= m
    nkeys = 1
    for _ in range(h):
        nkeys *= N + 1
    nch = 64
    counts = np.zeros((nch, nkeys), np.int64)
    for c in prange(nch):
        w = np.zeros(k, np.int64)
        M = np.zeros((d, d), np.int64)
        for idx in range(total * c // nch, total * (c + 1) // nch):
            t = idx
            prim = False
            for s in range(k):
                w[s] = t % m
                t //= m
                if w[s] % p:
                    prim = True
            if not prim:
                continue
            _eval_form(coef, w, m, M)
            ex = snf_exponents(M, p, N)
            key = 0
            base = 1
            for b in range(h):
                key += ex[2 * b] * base
                base *= N + 1
            counts[c, key] += 1
    return counts.sum(axis=0)


def profile_histogram(coef, p, N, workers=1):
    """dict profile-tuple -> count over primitive w in (Z/p^N)^k."""
    set_workers(workers)
    coef = np.ascontiguousarray(np.asarray(coef, dtype=np.int64))
    d = coef.shape[0]
    h = d // 2
    hist = _profile_histogram(coef, p, N)
    out = {}
    for key in np.nonzero(hist)[0]:
        prof, t = [], int(key)
        for _ in range(h):
            prof.append(t % (N + 1))
            t //= N + 1
        out[tuple(prof)] = int(hist[key])
    return out


# ------------------------------------------------------------ bridge


@njit(cache=True)
def _row_space_equal(A, B, p, work):
    """Row spaces of A and B (same width) agree over F_p."""
    n, c = A.shape
    for i in range(n):
        for j in range(c):
            work[i, j] = A[i, j]
    ra = rank_mod(work[:n], p)
    for i in range(n):
        for j in range(c):
            work[i, j] = B[i, j]
    rb = rank_mod(work[:n], p)
    if ra != rb:
        return False
    for i in range(n):
        for j in range(c):
            work[i, j] = A[i, j]
            work[n + i, j] = B[i, j]
    return rank_mod(work, p) == ra


@njit(cache=True)
def _bridge_point(x, p, lam, twisted, basis, ad, R, work, w, mat):
    """Does ker R(w) equal ker ad(x) for the chosen dual vector w?

    w is coords(x^T) when ``twisted`` is 0 and the trace dual of x when 1.
    Kernel equality is tested as row-space equality.
    """
    d = lam.shape[0]
    for hh in range(d):
        for j in range(d):
            s = 0
            for a in range(d):
                s += x[a] * lam[a, j, hh]
            ad[hh, j] = s % p
    if twisted == 0:
        # transpose keeps the Cartan part and swaps e_ij with f_ji
        for a in range(3):
            w[a] = x[a]
        for a in range(6):
            w[3 + a] = x[9 + a]
            w[9 + a] = x[3 + a]
    else:
        mat[:, :] = 0
        for a in range(d):
            for r in range(4):
                for s2 in range(4):
                    mat[r, s2] += x[a] * basis[a, r, s2]
        for hh in range(d):
            s = 0
            for r in range(4):
                for s2 in range(4):
                    s += mat[r, s2] * basis[hh, s2, r]
            w[hh] = s % p
    for a in range(d):
        for j in range(d):
            s = 0
            for hh in range(d):
                s += lam[a, j, hh] * w[hh]
            R[a, j] = s % p
    return _row_space_equal(ad, R, p, work)


@njit(cache=True, parallel=True)
def _bridge_scan(pts, p, lam, twisted, basis):
    n = pts.shape[0]
    d = lam.shape[0]
    out = np.zeros(n, np.bool_)
    for i in prange(n):
        ad = np.zeros((d, d), np.int64)
        R = np.zeros((d, d), np.int64)
        work = np.zeros((2 * d, d), np.int64)
        w = np.zeros(d, np.int64)
        mat = np.zeros((4, 4), np.int64)
        out[i] = _bridge_point(pts[i], p, lam, twisted, basis, ad, R, work, w, mat)
    return out


def bridge_scan(pts, p, lam, basis, twisted):
    return _bridge_scan(
        np.ascontiguousarray(pts, dtype=np.int64),
        p,
        np.ascontiguousarray(lam, dtype=np.int64),
        1 if twisted == "trace" else 0,
        np.ascontiguousarray(basis, dtype=np.int64),
    )


@njit(cache=True, parallel=True)
def _bridge_range(p, start, stop, lam, twisted, basis, nch):
    bad = np.zeros(nch, np.int64)
    first = np.full(nch, -1, np.int64)
    total = stop - start
    for c in prange(nch):
        lo = start + total * c // nch
        hi = start + total * (c + 1) // nch
        v = np.zeros(15, np.int64)
        ad = np.zeros((15, 15), np.int64)
        R = np.zeros((15, 15), np.int64)
        work = np.zeros((30, 15), np.int64)
        w = np.zeros(15, np.int64)
        mat = np.zeros((4, 4), np.int64)
        for n in range(lo, hi):
            _decode_sl4(n, p, v)
            if not _bridge_point(v, p, lam, twisted, basis, ad, R, work, w, mat):
                bad[c] += 1
                if first[c] < 0:
                    first[c] = n
    return bad, first


def bridge_range(p, start, stop, lam, basis, twisted, workers=1):
    set_workers(workers)
    bad, first = _bridge_range(
        p, start, stop, np.ascontiguousarray(lam, dtype=np.int64), 1 if twisted == "trace" else 0,
        np.ascontiguousarray(basis, dtype=np.int64), 64,
    )
    firsts = [int(f) for f in first if f >= 0]
    return int(bad.sum()), (min(firsts) if firsts else None)


# ------------------------------------------------------------ N211 rank-4 scan


@njit(cache=True)
def _rank4_ideal_zero(y, p):
    Y0, Y1, Y2, Y3, Y4, Y5, Y6, Y7 = y[0], y[1], y[2], y[3], y[4], y[5], y[6], y[7]
    if (Y0 * Y3 - Y4 * Y5) % p:
        return False
    if (Y1 * Y2 - Y4 * Y6) % p:
        return False
    if (Y0 * Y2 - Y1 * Y3 - Y4 * Y7) % p:
        return False
    if (Y2 * Y2 * Y5 - Y3 * Y3 * Y6 - Y2 * Y3 * Y7) % p:
        return False
    if (Y1 * Y1 * Y5 - Y0 * Y0 * Y6 + Y0 * Y1 * Y7) % p:
        return False
    if (Y1 * Y3 * Y3 - Y2 * Y4 * Y5 + Y3 * Y4 * Y7) % p:
        return False
    if (Y1 * Y1 * Y3 - Y0 * Y4 * Y6 + Y1 * Y4 * Y7) % p:
        return False
    return True


@njit(cache=True, parallel=True)
def _n211_scan(coef, p, nch):
    k = coef.shape[2]
    total = 1
    for _ in range(k):
        total *= p
    nb = p * p * p * p
    hist = np.zeros((nch, k + 1), np.int64)
    fiber = np.zeros((nch, nb), np.int64)
    bad = np.zeros(nch, np.int64)
    for c in prange(nch):
        w = np.zeros(k, np.int64)
        M = np.zeros((k, k), np.int64)
        for idx in range(total * c // nch, total * (c + 1) // nch):
            t = idx
            for h in range(k):
                w[h] = t % p
                t //= p
            _eval_form(coef, w, p, M)
            rk = rank_mod(M, p)
            hist[c, rk] += 1
            if _rank4_ideal_zero(w, p) != (rk <= 4):
                bad[c] += 1
            if rk == 4:
                fiber[c, ((w[8] * p + w[7]) * p + w[6]) * p + w[5]] += 1
    return hist.sum(axis=0), fiber.sum(axis=0), bad.sum()


def n211_scan(coef, p):
    """Rank histogram, rank-4 fiber sizes over (c5..c8) and ideal mismatches."""
    return _n211_scan(np.ascontiguousarray(coef, dtype=np.int64), p, 64)


# ------------------------------------------------------------ class point lists


@njit(cache=True)
def _collect_codes(p, want, pat, ra, rb, g1, g0, out_count_only, out):
    total = 1
    for _ in range(15):
        total *= p
    v = np.zeros(15, np.int64)
    x = np.zeros((4, 4), np.int64)
    work = np.zeros((4, 4), np.int64)
    n_out = 0
    for n in range(total):
        _decode_sl4(n, p, v)
        _fill_matrix(v, p, x)
        c = classify_matrix(x, p, pat, ra, rb, g1, g0, work)
        for w in want:
            if c == w:
                if not out_count_only:
                    out[n_out, :] = v
                n_out += 1
                break
    return n_out


def collect_codes(p, want, table, workers=1):
    """Coordinate vectors of every element of sl_4(F_p) with a class code in ``want``."""
    n = _collect_codes(p, want, *table, True, np.zeros((1, 15), np.int64))
    out = np.zeros((n, 15), np.int64)
    _collect_codes(p, want, *table, False, out)
    return out


# ------------------------------------------------------------ lifts
#
# For x at level r write U M(x^) V = D mod p^(r+1) and let Z0 collect the
# positions with exponent >= r.  A lift x^ + p^r c has as many maximal
# divisors at level r+1 as x has at level r iff
#     sum_k c_k (U M_k V)[Z0, Z0] = -diag(delta)  mod p,
# delta_i = D_ii / p^r mod p.  Off-Z0 entries only perturb the block by
# multiples of p^(r+1).


@njit(cache=True)
def _lift_system(coef, x, p, r, A):
    k = coef.shape[2]
    n = coef.shape[0]
    m1 = 1
    for _ in range(r + 1):
        m1 *= p
    _eval_form(coef, x, m1, A)
    exps, U, V = snf_full(A, p, r + 1)
    z0 = np.zeros(n, np.int64)
    nz = 0
    for i in range(n):
        if exps[i] >= r:
            z0[nz] = i
            nz += 1
    S = np.zeros((nz * nz, k + 1), np.int64)
    T = np.zeros((nz, n), np.int64)
    for kk in range(k):
        for a in range(nz):
            ia = z0[a]
            for j in range(n):
                s = 0
                for i in range(n):
                    s += U[ia, i] * coef[i, j, kk]
                T[a, j] = s % p
        for a in range(nz):
            for b in range(nz):
                jb = z0[b]
                s = 0
                for j in range(n):
                    s += T[a, j] * V[j, jb]
                S[a * nz + b, kk] = s % p
    for a in range(nz):
        if exps[z0[a]] == r:
            S[a * nz + a, k] = p - 1  # -delta with D normalised to p^r
    return exps, V, z0, nz, S


@njit(cache=True)
def _lift_solution(S, k, p):
    """(rank of the coefficient part, consistent?)"""
    B = S.copy()
    rk = rank_mod(B[:, :k].copy(), p)
    rk_aug = rank_mod(B, p)
    return rk, rk_aug == rk


@njit(cache=True)
def _bracket_rank(brk, V, z0, nz, p, r):
    """(module rank at level r, unit invariant factors) of the brackets of V[:, z0]."""
    n = V.shape[0]
    d = brk.shape[2]
    m = 1
    for _ in range(r):
        m *= p
    npairs = nz * (nz - 1) // 2
    if npairs == 0:
        return 0, 0
    G = np.zeros((npairs, d), np.int64)
    row = 0
    for a in range(nz):
        for b in range(a + 1, nz):
            for h in range(d):
                s = 0
                for i in range(n):
                    va = V[i, z0[a]] % m
                    if va:
                        for j in range(n):
                            s += va * (V[j, z0[b]] % m) * brk[i, j, h]
                            s %= m
                G[row, h] = s
            row += 1
    ex = snf_exponents(G, p, r)
    c = 0
    u = 0
    for e in ex:
        if e < r:
            c += 1
        if e == 0:
            u += 1
    return c, u


@njit(cache=True)
def _clamped(coef, x, p, r, A):
    m = 1
    for _ in range(r):
        m *= p
    _eval_form(coef, x, m, A)
    ex = snf_exponents(A, p, r)
    for e in ex:
        if e != 0 and e != r:
            return False
    return True


@njit(cache=True)
def _rp_point(coef, brk, x, p, r, A):
    """(clamped, affine rank, consistent, rk Z, unit factors of [V,V])."""
    k = coef.shape[2]
    if not _clamped(coef, x, p, r, A):
        return False, 0, False, 0, 0
    exps, V, z0, nz, S = _lift_system(coef, x, p, r, A)
    rk, ok = _lift_solution(S, k, p)
    rz, ru = _bracket_rank(brk, V, z0, nz, p, r)
    return True, rk, ok, rz, ru


@njit(cache=True, parallel=True)
def _rp_range(coef, brk, p, r, start, stop, nch):
    k = coef.shape[2]
    n = coef.shape[0]
    m = 1
    for _ in range(r):
        m *= p
    # clamped, match, no lift, rank mismatch, first bad, non-isolated, unit-rank match
    out = np.zeros((nch, 7), np.int64)
    for c in prange(nch):
        out[c, 4] = -1
        A = np.zeros((n, n), np.int64)
        x = np.zeros(k, np.int64)
        for idx in range(start + (stop - start) * c // nch, start + (stop - start) * (c + 1) // nch):
            t = idx
            for s in range(k):
                x[s] = t % m
                t //= m
            cl, rk, ok, rz, ru = _rp_point(coef, brk, x, p, r, A)
            if not cl:
                continue
            out[c, 0] += 1
            if ru != rz:
                out[c, 5] += 1
            if ok and rk == ru:
                out[c, 6] += 1
            if ok and rk == rz:
                out[c, 1] += 1
            else:
                if not ok:
                    out[c, 2] += 1
                else:
                    out[c, 3] += 1
                if out[c, 4] < 0:
                    out[c, 4] = idx
    return out


def rp_range(coef, brk, p, r, start, stop, workers=1):
    """Scan x = start..stop-1 (base p^r digits); returns summary counts."""
    set_workers(workers)
    out = _rp_range(np.ascontiguousarray(coef, dtype=np.int64), np.ascontiguousarray(brk, dtype=np.int64),
                    p, r, start, stop, 64)
    bad = [int(b) for b in out[:, 4] if b >= 0]
    return {
        "clamped": int(out[:, 0].sum()),
        "match": int(out[:, 1].sum()),
        "no_lift": int(out[:, 2].sum()),
        "rank_mismatch": int(out[:, 3].sum()),
        "first_bad": min(bad) if bad else None,
        "non_isolated": int(out[:, 5].sum()),
        "unit_rank_match": int(out[:, 6].sum()),
    }


@njit(cache=True, parallel=True)
def _rp_points(coef, brk, pts, p, r):
    n = coef.shape[0]
    out = np.zeros((pts.shape[0], 5), np.int64)
    for i in prange(pts.shape[0]):
        A = np.zeros((n, n), np.int64)
        cl, rk, ok, rz, ru = _rp_point(coef, brk, pts[i].copy(), p, r, A)
        out[i, 0] = cl
        out[i, 1] = rk
        out[i, 2] = ok
        out[i, 3] = rz
        out[i, 4] = ru
    return out


def rp_points(coef, brk, pts, p, r):
    """Per point: (clamped, affine rank, consistent, rk Z, unit factors)."""
    return _rp_points(np.ascontiguousarray(coef, dtype=np.int64), np.ascontiguousarray(brk, dtype=np.int64),
                      np.ascontiguousarray(pts, dtype=np.int64), p, r)


@njit(cache=True)
def _max_count(M, p, r):
    ex = snf_exponents(M, p, r)
    c = 0
    for e in ex:
        if e == r:
            c += 1
    return c


@njit(cache=True)
def literal_lift_count(coef, x, p, r):
    """Lifts x + p^r c keeping the number of maximal divisors, by enumeration."""
    k = coef.shape[2]
    n = coef.shape[0]
    A = np.zeros((n, n), np.int64)
    m = 1
    for _ in range(r):
        m *= p
    m1 = m * p
    _eval_form(coef, x, m, A)
    want = _max_count(A, p, r)
    y = np.zeros(k, np.int64)
    total = 1
    for _ in range(k):
        total *= p
    count = 0
    for idx in range(total):
        t = idx
        for s in range(k):
            y[s] = (x[s] + m * (t % p)) % m1
            t //= p
        _eval_form(coef, y, m1, A)
        if _max_count(A, p, r + 1) == want:
            count += 1
    return count


# ------------------------------------------------------------ shadows


@njit(cache=True)
def _in_span(S, dim, v, p, work):
    """v in the row span of the reduced echelon rows S[:dim]?"""
    n = v.shape[0]
    for j in range(n):
        work[0, j] = v[j] % p
    for i in range(dim):
        for j in range(n):
            work[i + 1, j] = S[i, j]
    return rank_mod(work[: dim + 1].copy(), p) == dim


@njit(cache=True)
def _sp_test(adcoef, y, p, r1, S, dim, A, work):
    """Does ad(y) mod p^r1 have shadow equal to span S[:dim]?"""
    m1 = 1
    for _ in range(r1):
        m1 *= p
    _eval_form(adcoef, y, m1, A)
    ex = snf_exponents(A.copy(), p, r1)
    top = 0
    for e in ex:
        if e == r1:
            top += 1
    if top != dim:
        return False
    exps, U, V = snf_full(A, p, r1)
    n = V.shape[0]
    v = np.zeros(n, np.int64)
    for i in range(n):
        if exps[i] == r1:
            for j in range(n):
                v[j] = V[j, i]
            if not _in_span(S, dim, v, p, work):
                return False
    return True


@njit(cache=True, parallel=True)
def _sp_scan(adcoef, a, p, r, S, dim, nch, nwit):
    k = adcoef.shape[2]
    n = adcoef.shape[0]
    m = 1
    for _ in range(r):
        m *= p
    total = 1
    for _ in range(k):
        total *= p
    counts = np.zeros(nch, np.int64)
    wit = np.full((nch, nwit), -1, np.int64)
    for c in prange(nch):
        A = np.zeros((n, n), np.int64)
        work = np.zeros((dim + 1, n), np.int64)
        y = np.zeros(k, np.int64)
        nw = 0
        for idx in range(total * c // nch, total * (c + 1) // nch):
            t = idx
            for s in range(k):
                y[s] = a[s] + m * (t % p)
                t //= p
            if _sp_test(adcoef, y, p, r + 1, S, dim, A, work):
                counts[c] += 1
                if nw < nwit:
                    wit[c, nw] = idx
                    nw += 1
    return counts, wit


def sp_scan(adcoef, a, p, r, S, workers=1, nwit=4):
    """Literal count of c in F_p^k with Sh(a + p^r c) = span(S), S in echelon form."""
    set_workers(workers)
    S = np.ascontiguousarray(np.asarray(S, dtype=np.int64) % p)
    counts, wit = _sp_scan(np.ascontiguousarray(adcoef, dtype=np.int64), np.asarray(a, dtype=np.int64),
                           p, r, S, S.shape[0], 64, nwit)
    return int(counts.sum()), sorted(int(w) for w in wit.ravel() if w >= 0)


@njit(cache=True)
def lift_system(coef, x, p, r):
    """(rank, consistent, nullity system) of the affine lift criterion."""
    n = coef.shape[0]
    A = np.zeros((n, n), np.int64)
    exps, V, z0, nz, S = _lift_system(coef, x, p, r, A)
    rk, ok = _lift_solution(S, coef.shape[2], p)
    return rk, ok, S


@njit(cache=True, parallel=True)
def _admit_scan(adcoef, base, p, r, basis, nch):
    """For y = base + p^r * sum t_i basis_i (t in F_p^n), does y admit a lift?

    Returns per-chunk admitting counts and a flag array over t.
    """
    k = adcoef.shape[2]
    n = adcoef.shape[0]
    nb = basis.shape[0]
    m = 1
    for _ in range(r):
        m *= p
    m1 = m * p
    total = 1
    for _ in range(nb):
        total *= p
    flags = np.zeros(total, np.uint8)
    for c in prange(nch):
        A = np.zeros((n, n), np.int64)
        y = np.zeros(k, np.int64)
        for idx in range(total * c // nch, total * (c + 1) // nch):
            for s in range(k):
                y[s] = base[s]
            t = idx
            for i in range(nb):
                ti = t % p
                t //= p
                if ti:
                    for s in range(k):
                        y[s] += m * ti * basis[i, s]
            for s in range(k):
                y[s] %= m1
            exps, V, z0, nz, S = _lift_system(adcoef, y, p, r + 1, A)
            rk, ok = _lift_solution(S, k, p)
            if ok:
                flags[idx] = 1
    return flags


def admit_scan(adcoef, base, p, r, basis, workers=1):
    set_workers(workers)
    return _admit_scan(np.ascontiguousarray(adcoef, dtype=np.int64), np.asarray(base, dtype=np.int64), p, r,
                       np.ascontiguousarray(np.asarray(basis, dtype=np.int64) % p), 64)
