"""Lie lattices given by integer structure constants.

A lattice of rank d is stored as an integer tensor ``lam`` of shape
(d, d, d) with ``[b_i, b_j] = sum_h lam[i, j, h] b_h``.  The built-in
sl_n lattices also keep the matrices of their basis so elements can be
handled as n x n matrices.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import product

import numpy as np

from .linalg import Subspace, module_kernel, rank_and_kernel, rref


class NonZeroTrace(ValueError):
    pass


class NotSubalgebra(ValueError):
    pass


class InvalidLattice(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class LieLattice:
    name: str
    lam: np.ndarray
    basis: np.ndarray | None = None  # (d, n, n) matrices when known
    labels: tuple = field(default=())

    def __post_init__(self):
        lam = np.asarray(self.lam, dtype=np.int64)
        object.__setattr__(self, "lam", lam)
        d = lam.shape[0]
        if lam.shape != (d, d, d):
            raise InvalidLattice("structure constants must have shape (d, d, d)")
        if (lam + lam.transpose(1, 0, 2)).any():
            raise InvalidLattice("structure constants are not antisymmetric")
        # Jacobi: [[a,b],c] + [[b,c],a] + [[c,a],b] = 0 on basis triples
        ab = np.einsum("ijh,hkl->ijkl", lam, lam)
        jac = ab + ab.transpose(1, 2, 0, 3) + ab.transpose(2, 0, 1, 3)
        if jac.any():
            raise InvalidLattice("Jacobi identity fails")

    @property
    def d(self) -> int:
        return self.lam.shape[0]

    @property
    def h(self) -> int:
        return self.d // 2

    def bracket(self, u, v):
        """Bracket of coordinate vectors (integers; reduce afterwards)."""
        return np.einsum("i,j,ijh->h", np.asarray(u, np.int64), np.asarray(v, np.int64), self.lam)

    def ad(self, x):
        """Matrix of ad(x) on coordinates: column j holds [x, b_j]."""
        return np.einsum("i,ijh->hj", np.asarray(x, dtype=np.int64), self.lam)


@dataclass(frozen=True, eq=False)
class LinearFormMatrix:
    """Antisymmetric matrix of linear forms; entry (i, j) is coef[i, j, :]."""

    coef: np.ndarray

    @property
    def d(self) -> int:
        return self.coef.shape[0]

    @property
    def nvars(self) -> int:
        return self.coef.shape[2]


def commutator_matrix(L: LieLattice) -> LinearFormMatrix:
    return LinearFormMatrix(L.lam.copy())


def evaluate(R: LinearFormMatrix, w, modulus=None):
    M = np.tensordot(R.coef, np.asarray(w, dtype=np.int64), axes=([2], [0]))
    return M % modulus if modulus else M


def format_form_matrix(R: LinearFormMatrix, var="Y", offset=0):
    """Render entries as strings like '-2*Y1 + Y3'."""
    out = []
    for i in range(R.d):
        row = []
        for j in range(R.d):
            terms = []
            for h, c in enumerate(R.coef[i, j]):
                c = int(c)
                if c:
                    name = f"{var}{h + offset}"
                    terms.append(name if c == 1 else f"-{name}" if c == -1 else f"{c}*{name}")
            row.append(" + ".join(terms).replace("+ -", "- ") or "0")
        out.append(row)
    return out


# ------------------------------------------------------------ sl_n bases


def elem(n, i, j):
    """Elementary matrix e_ij with 1-based indices."""
    m = np.zeros((n, n), dtype=np.int64)
    m[i - 1, j - 1] = 1
    return m


def _sl_basis(n):
    mats, labels = [], []
    for i in range(1, n):
        mats.append(elem(n, i, i) - elem(n, i + 1, i + 1))
        labels.append(f"h{i}{i + 1}")
    ups = [(i, i + k) for k in range(1, n) for i in range(1, n - k + 1)]
    for i, j in ups:
        mats.append(elem(n, i, j))
        labels.append(f"e{i}{j}")
    for i, j in ups:
        mats.append(elem(n, j, i))
        labels.append(f"f{j}{i}")
    return np.array(mats), tuple(labels)


def matrix_coords(x, n):
    """Coordinates of a traceless n x n integer matrix in the sl_n basis.

    The Cartan coordinates are partial sums of the diagonal.  Trace is not
    checked here; see :func:`coords`.
    """
    x = np.asarray(x, dtype=np.int64)
    diag = np.cumsum(np.diagonal(x))[: n - 1]
    ups = [(i, i + k) for k in range(1, n) for i in range(n - k)]
    up = [x[i, j] for i, j in ups]
    down = [x[j, i] for i, j in ups]
    return np.concatenate([diag, up, down]).astype(np.int64)


@lru_cache(maxsize=None)
def build_sl(n: int) -> LieLattice:
    """sl_2 with basis (e, h, f); sl_3 and sl_4 with basis (h's, e's, f's)."""
    if n not in (2, 3, 4):
        raise ValueError("n must be 2, 3 or 4")
    mats, labels = _sl_basis(n)
    if n == 2:
        order = [1, 0, 2]  # (h, e, f) -> (e, h, f)
        mats, labels = mats[order], ("e", "h", "f")
    d = len(mats)
    lam = np.zeros((d, d, d), dtype=np.int64)
    for i, j in product(range(d), repeat=2):
        br = mats[i] @ mats[j] - mats[j] @ mats[i]
        lam[i, j] = _coords_in(br, mats, n)
    return LieLattice(f"sl{n}", lam, mats, labels)


def _coords_in(x, mats, n):
    c = matrix_coords(x, n)
    if n == 2:
        c = c[[1, 0, 2]]
    return c


def coords(x, L: LieLattice | None = None, modulus=None):
    """Coordinate vector of a traceless matrix in the basis of ``L``."""
    L = L or build_sl(4)
    x = np.asarray(x, dtype=np.int64)
    n = x.shape[0]
    tr = int(np.trace(x))
    if (tr % modulus if modulus else tr) != 0:
        raise NonZeroTrace(f"trace {tr} is not zero")
    c = _coords_in(x, L.basis, n)
    return c % modulus if modulus else c


def element(v, L: LieLattice | None = None, modulus=None):
    L = L or build_sl(4)
    x = np.tensordot(np.asarray(v, dtype=np.int64), L.basis, axes=1)
    return x % modulus if modulus else x


def parse_matrix_expr(text: str, n: int = 4) -> np.ndarray:
    """Parse integer combinations like '-3e11 + e22 + e33 + e44'."""
    import re

    x = np.zeros((n, n), dtype=np.int64)
    s = text.replace(" ", "")
    if not s:
        return x
    for sign, coef, i, j in re.findall(r"([+-]?)(\d*)\*?e(\d)(\d)", s):
        c = int(coef) if coef else 1
        x[int(i) - 1, int(j) - 1] += -c if sign == "-" else c
    rebuilt = re.sub(r"([+-]?)(\d*)\*?e(\d)(\d)", "", s)
    if rebuilt:
        raise ValueError(f"could not parse {text!r}")
    return x


# ------------------------------------------------------------ forms


def killing_matrix(L: LieLattice | None = None) -> np.ndarray:
    """Gram matrix of kappa(X, Y) = 2n tr(XY) in the basis of sl_n."""
    L = L or build_sl(4)
    n = L.basis.shape[1]
    B = L.basis
    return 2 * n * np.einsum("iab,jba->ij", B, B)


def exact_det(M) -> int:
    """Integer determinant by fraction-free elimination (Bareiss)."""
    A = [[int(a) for a in row] for row in np.asarray(M)]
    n = len(A)
    sign, prev = 1, 1
    for k in range(n - 1):
        if A[k][k] == 0:
            for i in range(k + 1, n):
                if A[i][k]:
                    A[k], A[i] = A[i], A[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                A[i][j] = (A[i][j] * A[k][k] - A[i][k] * A[k][j]) // prev
        prev = A[k][k]
    return sign * A[n - 1][n - 1]


def transpose_twist(x):
    return np.asarray(x).T.copy()


def trace_dual(x, L: LieLattice | None = None, modulus=None):
    """Coordinates of the linear form y -> tr(x y) in the dual basis.

    For elements with zero diagonal this coincides with ``coords(x.T)``;
    in general it differs on the Cartan coordinates.  Its commutator-matrix
    kernel is exactly the centralizer of x whenever the trace form is
    nondegenerate (p odd for sl_4).
    """
    L = L or build_sl(4)
    w = np.einsum("ab,hba->h", np.asarray(x, dtype=np.int64), L.basis)
    return w % modulus if modulus else w


def trace_gram(L: LieLattice | None = None) -> np.ndarray:
    L = L or build_sl(4)
    return np.einsum("iab,jba->ij", L.basis, L.basis)


# ------------------------------------------------------------ centralizers


def centralizer(x, L: LieLattice | None = None, p=3, r=1):
    """Centralizer of x given by coordinates (or an n x n matrix).

    Over F_p (r = 1) a Subspace; over Z/p^r the generator rows from the
    module kernel of ad(x).
    """
    L = L or build_sl(4)
    x = np.asarray(x, dtype=np.int64)
    if x.ndim == 2:
        x = coords(x, L, p**r)
    A = L.ad(x)
    if r == 1:
        return rank_and_kernel(A, p)[1]
    return module_kernel(A, p, r)


def _bracket_span(vectors, L, p):
    V = np.asarray(vectors, dtype=np.int64)
    brs = [L.bracket(V[a], V[b]) % p for a in range(len(V)) for b in range(a + 1, len(V))]
    return Subspace.span(np.array(brs).reshape(-1, L.d), p, L.d)


def derived_subspace(S: Subspace, L: LieLattice) -> Subspace:
    D = _bracket_span(S.matrix, L, S.p)
    if not S.contains_subspace(D):
        raise NotSubalgebra("subspace is not closed under the bracket")
    return D


def derived_dim(S: Subspace, L: LieLattice) -> int:
    return derived_subspace(S, L).dim


def subalgebra_commutator_matrix(S, L: LieLattice, p=None) -> LinearFormMatrix:
    """Commutator matrix of a subalgebra in its own basis.

    ``S`` is a Subspace (its canonical basis is used, arithmetic mod S.p) or
    an integer basis matrix (rows), in which case the structure constants
    are solved exactly over Q, or mod p when p is given.
    """
    if isinstance(S, Subspace):
        basis, p = S.matrix, S.p
    else:
        basis = np.asarray(S, dtype=np.int64)
    k = basis.shape[0]
    coef = np.zeros((k, k, k), dtype=object if p is None else np.int64)
    for i in range(k):
        for j in range(i + 1, k):
            br = L.bracket(basis[i], basis[j])
            sol = _solve_in_basis(basis, br, p)
            if sol is None:
                raise NotSubalgebra(f"bracket of basis vectors {i}, {j} leaves the span")
            coef[i, j] = sol
            coef[j, i] = [-a for a in sol] if p is None else [(-a) % p for a in sol]
    if p is None:
        if all(Fraction(a).denominator == 1 for a in coef.flat):
            coef = np.array([[[int(a) for a in row] for row in plane] for plane in coef], dtype=np.int64)
    return LinearFormMatrix(coef)


def _solve_in_basis(basis, target, p):
    """Coefficients c with c @ basis == target, or None."""
    k, d = basis.shape
    if p is not None:
        aug = np.vstack([basis, np.asarray(target) % p]).T % p  # d x (k+1)
        R, piv = rref(aug, p)
        if k in piv:
            return None
        sol = [0] * k
        for row, c in enumerate(piv):
            sol[c] = int(R[row, k])
        return sol
    rows = [[Fraction(int(basis[i, h])) for i in range(k)] + [Fraction(int(target[h]))] for h in range(d)]
    piv_cols, r = [], 0
    for c in range(k):
        pr = next((i for i in range(r, d) if rows[i][c] != 0), None)
        if pr is None:
            continue
        rows[r], rows[pr] = rows[pr], rows[r]
        inv = 1 / rows[r][c]
        rows[r] = [a * inv for a in rows[r]]
        for i in range(d):
            if i != r and rows[i][c] != 0:
                f = rows[i][c]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[r])]
        piv_cols.append(c)
        r += 1
    if any(rows[i][k] != 0 for i in range(r, d)):
        return None
    sol = [Fraction(0)] * k
    for i, c in enumerate(piv_cols):
        sol[c] = rows[i][k]
    return sol


# ------------------------------------------------------------ text format


def dump_constants(L: LieLattice) -> str:
    """Lines 'i j h lambda' with 1-based indices, nonzero entries only."""
    lines = [f"# {L.name} d={L.d}"]
    for i, j, h in zip(*np.nonzero(L.lam)):
        lines.append(f"{i + 1} {j + 1} {h + 1} {L.lam[i, j, h]}")
    return "\n".join(lines) + "\n"


def load_constants(text: str, d: int | None = None, name: str = "loaded") -> LieLattice:
    entries = []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            if line.startswith("#") and "d=" in line and d is None:
                d = int(line.split("d=")[1].split()[0])
            continue
        i, j, h, v = (int(t) for t in line.split())
        entries.append((i - 1, j - 1, h - 1, v))
    if d is None:
        d = 1 + max(max(e[:3]) for e in entries)
    lam = np.zeros((d, d, d), dtype=np.int64)
    for i, j, h, v in entries:
        lam[i, j, h] = v
    return LieLattice(name, lam)
