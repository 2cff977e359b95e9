"""Exact linear algebra over F_p and Z/p^r.

Matrices are plain numpy int64 arrays; the modulus travels alongside as
``p`` (fields) or ``(p, r)`` (residue rings).  Everything here is written
for clarity and is used as the reference route; the compiled batch kernels
in :mod:`sl4zeta.kernels` are checked against it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .arith import int_valuation


class NotAntisymmetric(ValueError):
    pass


class DimensionMismatch(ValueError):
    pass


def _as_mod(M, m):
    return np.asarray(M, dtype=np.int64) % m


# ---------------------------------------------------------------- fields


def rref(M, p):
    """Reduced row echelon form over F_p.

    Returns ``(R, pivots)`` where R has the nonzero rows first, each with
    leading coefficient 1.
    """
    R = _as_mod(M, p).copy()
    if R.ndim != 2:
        raise ValueError("expected a matrix")
    rows, cols = R.shape
    pivots = []
    row = 0
    for col in range(cols):
        if row == rows:
            break
        nz = np.nonzero(R[row:, col])[0]
        if nz.size == 0:
            continue
        piv = row + nz[0]
        if piv != row:
            R[[row, piv]] = R[[piv, row]]
        R[row] = R[row] * pow(int(R[row, col]), -1, p) % p
        for i in range(rows):
            if i != row and R[i, col]:
                R[i] = (R[i] - R[i, col] * R[row]) % p
        pivots.append(col)
        row += 1
    return R, pivots


@dataclass(frozen=True)
class Subspace:
    """A subspace of F_p^n held by its canonical RREF basis."""

    ambient: int
    p: int
    basis: tuple  # tuple of row tuples

    @classmethod
    def span(cls, vectors, p, ambient=None):
        V = np.asarray(vectors, dtype=np.int64)
        if ambient is None:
            ambient = V.shape[-1]
        if V.size == 0:
            return cls(ambient, p, ())
        V = V.reshape(-1, ambient)
        R, piv = rref(V, p)
        return cls(ambient, p, tuple(tuple(int(a) for a in R[i]) for i in range(len(piv))))

    @classmethod
    def full(cls, n, p):
        return cls.span(np.eye(n, dtype=np.int64), p)

    @property
    def dim(self) -> int:
        return len(self.basis)

    @property
    def matrix(self) -> np.ndarray:
        if not self.basis:
            return np.zeros((0, self.ambient), dtype=np.int64)
        return np.array(self.basis, dtype=np.int64)

    def __contains__(self, v) -> bool:
        v = np.asarray(v, dtype=np.int64) % self.p
        if not self.basis:
            return not v.any()
        return Subspace.span(np.vstack([self.matrix, v]), self.p, self.ambient).dim == self.dim

    def contains_subspace(self, other: "Subspace") -> bool:
        if other.dim == 0:
            return True
        both = Subspace.span(np.vstack([self.matrix, other.matrix]), self.p, self.ambient)
        return both.dim == self.dim


def subspace_equal(A: Subspace, B: Subspace) -> bool:
    if A.ambient != B.ambient:
        raise DimensionMismatch(f"ambient {A.ambient} vs {B.ambient}")
    return A.basis == B.basis


def rank_mod_p(M, p) -> int:
    return len(rref(M, p)[1])


def rank_and_kernel(M, p):
    """Rank over F_p and the right kernel {v : M v = 0} as a Subspace."""
    R, piv = rref(M, p)
    cols = R.shape[1]
    free = [c for c in range(cols) if c not in piv]
    kernel = []
    for f in free:
        v = np.zeros(cols, dtype=np.int64)
        v[f] = 1
        for i, c in enumerate(piv):
            v[c] = -R[i, f] % p
        kernel.append(v)
    return len(piv), Subspace.span(np.array(kernel).reshape(-1, cols), p, cols)


# ---------------------------------------------------------------- rings


def _min_valuation_entry(A, k0, p, r, rows, cols):
    best, where = r, None
    for i in range(k0, rows):
        for j in range(k0, cols):
            a = int(A[i, j])
            if a:
                v = int_valuation(a, p, r)
                if v < best:
                    best, where = v, (i, j)
                    if v == 0:
                        return best, where
    return best, where


def smith_normal_form(M, p, r):
    """Smith normal form over Z/p^r.

    Returns ``(exps, U, V)`` with ``U @ M @ V % p**r`` diagonal, the k-th
    diagonal entry equal to ``p**exps[k]`` (0 when exps[k] == r).  The
    exponents are non-decreasing and there are min(rows, cols) of them.
    """
    m = p**r
    A = _as_mod(M, m).copy()
    rows, cols = A.shape
    U = np.eye(rows, dtype=np.int64)
    V = np.eye(cols, dtype=np.int64)
    exps = []
    for k in range(min(rows, cols)):
        e, where = _min_valuation_entry(A, k, p, r, rows, cols)
        if where is None:
            exps.extend([r] * (min(rows, cols) - k))
            break
        i, j = where
        if i != k:
            A[[k, i]] = A[[i, k]]
            U[[k, i]] = U[[i, k]]
        if j != k:
            A[:, [k, j]] = A[:, [j, k]]
            V[:, [k, j]] = V[:, [j, k]]
        pe = p**e
        u_inv = pow(int(A[k, k]) // pe, -1, m)
        A[k] = A[k] * u_inv % m
        U[k] = U[k] * u_inv % m
        for i2 in range(k + 1, rows):
            if A[i2, k]:
                c = int(A[i2, k]) // pe
                A[i2] = (A[i2] - c * A[k]) % m
                U[i2] = (U[i2] - c * U[k]) % m
        for j2 in range(k + 1, cols):
            if A[k, j2]:
                c = int(A[k, j2]) // pe
                A[:, j2] = (A[:, j2] - c * A[:, k]) % m
                V[:, j2] = (V[:, j2] - c * V[:, k]) % m
        exps.append(e)
    return exps, U, V


@dataclass(frozen=True)
class DivisorProfile:
    """The h paired elementary-divisor exponents, clamped at the level."""

    exponents: tuple
    odd_slot: bool

    def __iter__(self):
        return iter(self.exponents)

    def __len__(self):
        return len(self.exponents)


def _check_antisymmetric(A, m):
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise NotAntisymmetric("matrix is not square")
    if ((A + A.T) % m).any() or (np.diagonal(A) % m).any():
        raise NotAntisymmetric("matrix is not antisymmetric")


def antisymmetric_snf(M, p, r):
    """Congruence normal form of an antisymmetric matrix over Z/p^r.

    Returns ``(profile, S)`` where ``S.T @ M @ S`` is block diagonal with
    blocks [[0, p^e], [-p^e, 0]] in non-decreasing e, and a trailing zero
    row and column when the size is odd.  Pivots are entries of minimal
    valuation, ties broken by the lowest row-major position.
    """
    m = p**r
    A = _as_mod(M, m).copy()
    _check_antisymmetric(A, m)
    n = A.shape[0]
    S = np.eye(n, dtype=np.int64)
    exps = []

    def swap(a, b):
        if a != b:
            A[[a, b]] = A[[b, a]]
            A[:, [a, b]] = A[:, [b, a]]
            S[:, [a, b]] = S[:, [b, a]]

    for blk in range(n // 2):
        k = 2 * blk
        e, where = _min_valuation_entry(A, k, p, r, n, n)
        if where is None:
            exps.extend([r] * (n // 2 - blk))
            break
        i, j = where
        swap(k, i)  # j > i >= k, so j is untouched by this swap
        swap(k + 1, j)
        pe = p**e
        u_inv = pow(int(A[k, k + 1]) // pe, -1, m)
        A[k + 1] = A[k + 1] * u_inv % m
        A[:, k + 1] = A[:, k + 1] * u_inv % m
        S[:, k + 1] = S[:, k + 1] * u_inv % m
        for l in range(k + 2, n):
            x, y = int(A[k, l]), int(A[k + 1, l])
            if not x and not y:
                continue
            cx, cy = x // pe, y // pe
            # column op col_l += cy*col_k - cx*col_{k+1}, then the same on rows
            A[:, l] = (A[:, l] + cy * A[:, k] - cx * A[:, k + 1]) % m
            A[l] = (A[l] + cy * A[k] - cx * A[k + 1]) % m
            S[:, l] = (S[:, l] + cy * S[:, k] - cx * S[:, k + 1]) % m
        exps.append(e)
    return DivisorProfile(tuple(exps), n % 2 == 1), S


def divisor_profile(M, p, r) -> DivisorProfile:
    prof, _ = antisymmetric_snf(M, p, r)
    return DivisorProfile(tuple(min(e, r) for e in prof.exponents), prof.odd_slot)


def asnf_block_form(profile: DivisorProfile, n, p, r):
    """The block-diagonal matrix that ``antisymmetric_snf`` asserts."""
    m = p**r
    B = np.zeros((n, n), dtype=np.int64)
    for blk, e in enumerate(profile.exponents):
        k = 2 * blk
        B[k, k + 1] = p**e % m
        B[k + 1, k] = -(p**e) % m
    return B


def module_kernel(M, p, r):
    """Generators (rows) of {v : M v = 0 over Z/p^r}."""
    m = p**r
    A = _as_mod(M, m)
    rows, cols = A.shape
    exps, _, V = smith_normal_form(A, p, r)
    exps = list(exps) + [r] * (cols - len(exps))
    gens = [V[:, i] * p ** (r - e) % m for i, e in enumerate(exps) if e > 0]
    if not gens:
        return np.zeros((0, cols), dtype=np.int64)
    return np.array(gens, dtype=np.int64)


def invariant_exponents(G, p, r):
    """Valuations of the invariant factors of a generator matrix (rows)."""
    G = np.asarray(G, dtype=np.int64).reshape(-1, np.shape(G)[-1])
    if G.shape[0] == 0:
        return []
    return smith_normal_form(G, p, r)[0]


def is_isolated(G, p, r) -> bool:
    """True iff the row span is a direct summand at precision p^r."""
    return all(e == 0 for e in invariant_exponents(G, p, r) if e < r)


def module_rank(G, p, r) -> int:
    """Number of invariant factors that are nonzero mod p^r."""
    return sum(1 for e in invariant_exponents(G, p, r) if e < r)


def reduce_span(G, p) -> Subspace:
    G = np.asarray(G, dtype=np.int64)
    return Subspace.span(G.reshape(-1, G.shape[-1]) % p, p, G.shape[-1])
