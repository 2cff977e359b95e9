"""Centralizer classes of sl_4 over F_p.

The reference classifier works from the centralizer dimension (rank of
ad x) together with the characteristic and minimal polynomials.  The
compiled census in :mod:`sl4zeta.kernels` uses a division-free variant
(characteristic polynomial lookup plus a few ranks) and is checked
against this module.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from importlib import resources
from itertools import permutations, product

import numpy as np

from .arith import check_odd_prime, is_square, FieldElem
from .lattice import build_sl, coords
from .linalg import rank_mod_p
from .ratfunc import LaurentPoly, parse_poly


class UnexpectedDimension(RuntimeError):
    pass


class TooLarge(RuntimeError):
    pass


LABELS = ("Zero", "Reg", "Sub", "S22Diag", "S22Non", "N22", "D211", "N211")
SUBTYPES = ("N31", "T31TwoEV", "T31ThreeEV", "Diag31", "NonJor31")

# integer codes used by the compiled census
CODES = (
    ("Zero", None),
    ("Reg", None),
    ("Sub", "N31"),
    ("Sub", "T31TwoEV"),
    ("Sub", "T31ThreeEV"),
    ("Sub", "Diag31"),
    ("Sub", "NonJor31"),
    ("S22Diag", None),
    ("S22Non", None),
    ("N22", None),
    ("D211", None),
    ("N211", None),
)


@dataclass(frozen=True)
class ClassLabel:
    name: str
    subtype: str | None = None

    def __post_init__(self):
        if self.name not in LABELS:
            raise ValueError(f"unknown class {self.name}")
        if (self.subtype is not None) != (self.name == "Sub"):
            raise ValueError("subtype is required for Sub and forbidden otherwise")
        if self.subtype is not None and self.subtype not in SUBTYPES:
            raise ValueError(f"unknown subtype {self.subtype}")

    @property
    def code(self) -> int:
        return CODES.index((self.name, self.subtype))

    @classmethod
    def from_code(cls, code: int) -> "ClassLabel":
        return cls(*CODES[code])

    def __str__(self):
        return self.name if self.subtype is None else f"{self.name}/{self.subtype}"


# ------------------------------------------------------------ cross-sections


def cross_section(partition, params, p=None):
    """Affine cross-section matrices for the partitions [3,1], [2,2], [2,1,1]."""
    part = tuple(partition)
    if part == (3, 1):
        a, b = params
        x = np.array([[a, 0, 0, 0], [0, a, 1, 0], [0, 0, -a, 1], [0, 0, b, -a]])
    elif part == (2, 2):
        (a,) = params if np.ndim(params) else (params,)
        x = np.array([[0, 1, 0, 0], [a, 0, 0, 0], [0, 0, 0, 1], [0, 0, a, 0]])
    elif part == (2, 1, 1):
        (a,) = params if np.ndim(params) else (params,)
        x = np.array([[3 * a, 1, 0, 0], [0, -a, 0, 0], [0, 0, -a, 0], [0, 0, 0, -a]])
    else:
        raise ValueError(f"no cross-section for partition {partition}")
    x = x.astype(np.int64)
    return x % p if p else x


# ------------------------------------------------------------ polynomials
# Polynomials over F_p are tuples of coefficients, lowest degree first.


def _trim(c):
    c = list(c)
    while len(c) > 1 and c[-1] == 0:
        c.pop()
    return tuple(c)


def poly_mul(a, b, p):
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] = (out[i + j] + x * y) % p
    return _trim(out)


def poly_divmod(a, b, p):
    a = list(a)
    inv = pow(b[-1], -1, p)
    q = [0] * max(1, len(a) - len(b) + 1)
    while len(a) >= len(b) and any(a):
        c = a[-1] * inv % p
        k = len(a) - len(b)
        q[k] = c
        for i, y in enumerate(b):
            a[k + i] = (a[k + i] - c * y) % p
        a.pop()
        a = list(_trim(a)) if a else [0]
        if len(a) < len(b):
            break
    return _trim(q), _trim(a)


def char_poly(x, p):
    """Characteristic polynomial det(X - x) by the Leibniz expansion."""
    x = np.asarray(x, dtype=np.int64) % p
    n = x.shape[0]
    total = [0] * (n + 1)
    for perm in permutations(range(n)):
        sign = 1
        for i in range(n):
            for j in range(i + 1, n):
                if perm[i] > perm[j]:
                    sign = -sign
        term = (sign,)
        for i in range(n):
            # entry of (X - x): X*delta - x
            entry = (-int(x[i, perm[i]]) % p, 1) if perm[i] == i else (-int(x[i, perm[i]]) % p,)
            term = poly_mul(term, entry, p)
        for k, c in enumerate(term):
            total[k] = (total[k] + c) % p
    return _trim(total)


def poly_at_matrix(f, x, p):
    x = np.asarray(x, dtype=np.int64) % p
    n = x.shape[0]
    acc = np.zeros((n, n), dtype=np.int64)
    for c in reversed(f):
        acc = (acc @ x + c * np.eye(n, dtype=np.int64)) % p
    return acc


def _monic(deg, p):
    for tail in product(range(p), repeat=deg):
        yield tuple(tail) + (1,)


def factor_small(f, p):
    """Irreducible factorization of a monic polynomial of degree <= 4.

    Returns a sorted list of (factor, multiplicity).
    """
    f = _trim(f)
    if f[-1] != 1:
        raise ValueError("polynomial must be monic")
    if len(f) - 1 > 4:
        raise ValueError("degree must be at most 4")
    factors = {}
    rest = f
    for deg in (1, 2):
        for g in _monic(deg, p):
            while len(rest) - 1 >= deg:
                qt, rem = poly_divmod(rest, g, p)
                if any(rem):
                    break
                factors[g] = factors.get(g, 0) + 1
                rest = qt
    if len(rest) > 1:
        # no factor of degree <= 2 left, so what remains is irreducible
        factors[rest] = factors.get(rest, 0) + 1
    return sorted(factors.items(), key=lambda kv: (len(kv[0]), kv[0]))


def _expand(factors, p):
    out = (1,)
    for g, m in factors:
        for _ in range(m):
            out = poly_mul(out, g, p)
    return out


def min_poly(x, p):
    """Least-degree monic annihilator among the divisors of char_poly."""
    fac = factor_small(char_poly(x, p), p)
    cands = []
    for mults in product(*[range(m + 1) for _, m in fac]):
        div = _expand([(g, k) for (g, _), k in zip(fac, mults)], p)
        cands.append(div)
    cands.sort(key=lambda c: (len(c), c))
    for c in cands:
        if not poly_at_matrix(c, x, p).any():
            return c
    raise AssertionError("characteristic polynomial does not annihilate")


def _root_pattern(fac):
    """Linear roots with multiplicity, and the non-linear factors."""
    lin = [((-g[0]), m) for g, m in fac if len(g) == 2]
    other = [(g, m) for g, m in fac if len(g) > 2]
    return lin, other


def _is_nilpotent(x, p):
    x2 = (x @ x) % p
    return not ((x2 @ x2) % p).any()


def centralizer_dim(x, p, L=None):
    L = L or build_sl(4)
    v = coords(np.asarray(x, dtype=np.int64) % p, L, p)
    return L.d - rank_mod_p(L.ad(v), p)


def classify(x, p) -> ClassLabel:
    p = check_odd_prime(p)
    x = np.asarray(x, dtype=np.int64) % p
    k = centralizer_dim(x, p)
    if k == 15:
        return ClassLabel("Zero")
    if k == 3:
        return ClassLabel("Reg")
    nil = _is_nilpotent(x, p)
    if k == 9:
        return ClassLabel("N211" if nil else "D211")
    chi = char_poly(x, p)
    fac = factor_small(chi, p)
    lin, other = _root_pattern(fac)
    if k == 7:
        mu = min_poly(x, p)
        if any(m > 1 for _, m in factor_small(mu, p)):
            return ClassLabel("N22")
        return ClassLabel("S22Non" if other else "S22Diag")
    if k == 5:
        if nil:
            return ClassLabel("Sub", "N31")
        mults = sorted(m for _, m in lin)
        if other:
            if mults == [2] and len(other) == 1 and len(other[0][0]) == 3:
                return ClassLabel("Sub", "NonJor31")
        elif mults == [2, 2]:
            return ClassLabel("Sub", "T31TwoEV")
        elif mults == [1, 3]:
            return ClassLabel("Sub", "T31ThreeEV")
        elif mults == [1, 1, 2]:
            return ClassLabel("Sub", "Diag31")
        raise UnexpectedDimension(f"5-dimensional centralizer with characteristic factors {fac}")
    raise UnexpectedDimension(f"centralizer dimension {k}")


# ------------------------------------------------------------ class table


@dataclass(frozen=True)
class ClassTable:
    dims: dict  # name -> (d_c, d'_c)
    cards: dict  # name -> LaurentPoly (Sub is the sum of its subtypes)
    sub_cards: dict  # subtype -> LaurentPoly
    jumps: dict  # (source, target) -> LaurentPoly

    def tau(self, source, target):
        return self.jumps.get((source, target), LaurentPoly())

    @property
    def names(self):
        return tuple(self.dims)


def _load_json(name):
    return json.loads(resources.files("sl4zeta").joinpath("data", name).read_text())


@lru_cache(maxsize=None)
def class_table() -> ClassTable:
    raw = _load_json("class_table.json")
    dims, cards, sub_cards, jumps = {}, {}, {}, {}
    for name, row in raw["classes"].items():
        dims[name] = (row["d"], row["dprime"])
        if row.get("subtypes"):
            for sub, expr in row["subtypes"].items():
                sub_cards[sub] = parse_poly(expr)
            cards[name] = sum(sub_cards.values(), LaurentPoly())
        else:
            cards[name] = parse_poly(row["card"])
    for src, row in raw["jumps"].items():
        for tgt, expr in row.items():
            jumps[(src, tgt)] = parse_poly(expr)
    return ClassTable(dims, cards, sub_cards, jumps)


def expected_count(label: ClassLabel, q) -> Fraction:
    tab = class_table()
    if label.name == "Zero":
        return Fraction(1)
    if label.subtype:
        return tab.sub_cards[label.subtype].evaluate(q)
    return tab.cards[label.name].evaluate(q)


# ------------------------------------------------------------ census


def census(q, mode="exhaustive", samples=10**6, seed=0, workers=1):
    """Class counts over sl_4(F_q).

    Exhaustive mode covers every element (only q = 3); sampled mode draws
    uniform coordinate vectors and returns raw counts over the sample.
    Returns a dict ClassLabel -> count.
    """
    from . import kernels

    q = check_odd_prime(q)
    table = kernels.charpoly_table(q)
    if mode == "exhaustive":
        if q != 3:
            raise TooLarge(f"exhaustive census needs {q}^15 = {q**15:.2e} classifications; only q = 3 is supported")
        counts = kernels.census_range(q, 0, q**15, table, workers)
    elif mode == "sampled":
        rng = np.random.default_rng(seed)
        pts = rng.integers(0, q, size=(samples, 15), dtype=np.int64)
        codes = kernels.classify_batch(pts, q, table)
        counts = np.bincount(codes, minlength=len(CODES))
    else:
        raise ValueError(f"unknown mode {mode}")
    return {ClassLabel.from_code(c): int(n) for c, n in enumerate(counts)}


def census_rows(counts, q):
    """Rows (class, subtype, count, polynomial, value_at_q, match)."""
    tab = class_table()
    raw = _load_json("class_table.json")["classes"]
    rows = []
    for lab, n in counts.items():
        if lab.name == "Zero":
            rows.append(("Zero", "", n, "1", 1, n == 1))
            continue
        expr = raw["Sub"]["subtypes"][lab.subtype] if lab.subtype else raw[lab.name]["card"]
        val = expected_count(lab, q)
        rows.append((lab.name, lab.subtype or "", n, expr, val, Fraction(n) == val))
    return rows


def census_csv(counts, q) -> str:
    buf = io.StringIO()
    w = csv.writer(buf)
    w.writerow(["class", "subtype", "count", "polynomial", "polynomial_at_q", "match"])
    for name, sub, n, expr, val, ok in census_rows(counts, q):
        w.writerow([name, sub, n, expr, val, str(ok).lower()])
    return buf.getvalue()


def random_gl(q, n=4, rng=None):
    rng = rng or np.random.default_rng()
    while True:
        g = rng.integers(0, q, size=(n, n), dtype=np.int64)
        if rank_mod_p(g, q) == n:
            return g


def mat_inverse_mod(g, p):
    n = g.shape[0]
    aug = np.hstack([np.asarray(g, dtype=np.int64) % p, np.eye(n, dtype=np.int64)])
    from .linalg import rref

    R, piv = rref(aug, p)
    if piv[:n] != list(range(n)):
        raise ZeroDivisionError("matrix is singular mod p")
    return R[:, n:]


def is_square_mod(a, p):
    return is_square(FieldElem(a % p, p))
