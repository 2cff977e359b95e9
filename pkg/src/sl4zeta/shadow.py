"""Lie shadows over Z/p^r and shadow-preserving lifts.

The shadow of a at level r is the mod-p reduction of its centralizer
module in sl(Z/p^r).  A lift b of a to level r+1 is shadow-preserving
when Sh(b) = Sh(a) as subspaces.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from importlib import resources

import numpy as np

from . import kernels
from .arith import check_odd_prime
from .classify import TooLarge
from .lattice import LieLattice, build_sl, coords, derived_subspace, element, parse_matrix_expr
from .linalg import Subspace, invariant_exponents, module_kernel, rank_and_kernel, rref


@dataclass
class ShadowRecord:
    element: np.ndarray  # coordinates at level r
    level: int
    p: int
    shadow: Subspace

    @property
    def dim(self):
        return self.shadow.dim


def ad_coef(L: LieLattice) -> np.ndarray:
    """coef[h, j, i] = lam[i, j, h], so that ad(x) = eval(coef, x)."""
    return np.ascontiguousarray(np.transpose(L.lam, (2, 1, 0)).astype(np.int64))


def as_coords(a, L: LieLattice, modulus=None):
    a = np.asarray(a, dtype=np.int64)
    if a.ndim == 2:
        return coords(a, L, modulus)
    return a % modulus if modulus else a


def ad_matrix(a, L: LieLattice, modulus):
    a = as_coords(a, L)
    return np.einsum("i,ijh->hj", a, L.lam.astype(np.int64)) % modulus


def lie_shadow(a, p, r, L: LieLattice | None = None) -> ShadowRecord:
    L = L or build_sl(4)
    p = check_odd_prime(p)
    if r < 1:
        raise ValueError("level must be at least 1")
    x = as_coords(a, L, p**r)
    gens = module_kernel(ad_matrix(x, L, p**r), p, r)
    S = Subspace.span(gens % p, p, L.d) if len(gens) else Subspace.span(np.zeros((0, L.d), np.int64), p, L.d)
    return ShadowRecord(x, r, p, S)


def fast_shadow(a, p, r, L: LieLattice | None = None) -> Subspace:
    """Same subspace as ``lie_shadow`` via the compiled Smith form."""
    L = L or build_sl(4)
    x = as_coords(a, L, p**r)
    A = ad_matrix(x, L, p**r).astype(np.int64)
    exps, _, V = kernels.snf_full(A, p, r)
    cols = [V[:, i] % p for i, e in enumerate(exps) if e == r]
    return Subspace.span(np.array(cols, dtype=np.int64).reshape(-1, L.d), p, L.d)


def derived_dim(S: Subspace, L: LieLattice) -> int:
    return derived_subspace(S, L).dim


def _echelon(S: Subspace, p):
    M = S.matrix
    R, piv = rref(np.asarray(M, dtype=np.int64) % p, p)
    return np.asarray(R, dtype=np.int64)[: len(piv)]


def shadow_preserving_lifts(a, p, r, L: LieLattice | None = None, mode="count", workers=1, max_lifts=3**15):
    """Lifts b = a + p^r c (c in F_p^d) with Sh(b) = Sh(a).

    Every lift is tested: first by the number of maximal divisors (cheap),
    then by span membership of each reduced kernel generator.  Returns the
    count, or the sorted list of c indices (base-p digits, coordinate 0
    first) in ``enumerate`` mode.
    """
    L = L or build_sl(4)
    p = check_odd_prime(p)
    if p**L.d > max_lifts:
        raise TooLarge(f"{p}^{L.d} = {p**L.d:.2e} lifts exceeds the exhaustive budget")
    rec = lie_shadow(a, p, r, L)
    S = _echelon(rec.shadow, p)
    nwit = p**L.d if mode == "enumerate" else 4
    count, wit = kernels.sp_scan(ad_coef(L), rec.element, p, r, S, workers, nwit=min(nwit, 4096))
    if mode == "enumerate":
        if count > 4096:
            raise TooLarge("too many lifts to list; use count mode")
        return wit
    return count


def affine_lift_count(a, p, r, L: LieLattice | None = None):
    """Shadow-preserving lift count from the linear criterion on Z0 x Z0."""
    L = L or build_sl(4)
    x = as_coords(a, L, p**r).astype(np.int64)
    rk, ok, _ = kernels.lift_system(ad_coef(L), x, p, r)
    return p ** (L.d - int(rk)) if ok else 0


def affine_solutions(a, p, r, L: LieLattice | None = None):
    """(particular c, basis of the solution directions) or None."""
    L = L or build_sl(4)
    x = as_coords(a, L, p**r).astype(np.int64)
    rk, ok, S = kernels.lift_system(ad_coef(L), x, p, r)
    if not ok:
        return None
    k = L.d
    A, t = S[:, :k] % p, S[:, k] % p
    R, piv = rref(np.concatenate([A, t[:, None]], axis=1), p)
    R = np.asarray(R, dtype=np.int64)
    part = np.zeros(k, np.int64)
    for row, c in enumerate(piv):
        part[c] = R[row, k]
    free = [c for c in range(k) if c not in piv]
    basis = []
    for f in free:
        v = np.zeros(k, np.int64)
        v[f] = 1
        for row, c in enumerate(piv):
            v[c] = -R[row, f] % p
        basis.append(v)
    return part, np.array(basis, dtype=np.int64).reshape(-1, k), list(piv)


def shadow_law_scan(L: LieLattice, p, r, workers=1, stop=None):
    """Count law p^(d - dim[s, s]) over all a in (Z/p^r)^d with clamped profile."""
    stop = p ** (r * L.d) if stop is None else stop
    return kernels.rp_range(ad_coef(L), L.lam, p, r, 0, stop, workers)


def shadow_law_sample(L: LieLattice, p, r, n, seed=0, points=None):
    rng = np.random.default_rng(seed)
    pts = points if points is not None else rng.integers(0, p**r, size=(n, L.d))
    res = kernels.rp_points(ad_coef(L), L.lam, pts, p, r)
    clamped = res[:, 0] == 1
    ok = res[:, 2] == 1
    return {
        "points": len(pts),
        "clamped": int(clamped.sum()),
        "with_lift": int((clamped & ok).sum()),
        "law_holds": int((clamped & ok & (res[:, 1] == res[:, 4])).sum()),
    }


def inclusion_check(p, n, rmax=3, seed=0, L: LieLattice | None = None):
    """Sh(b) is contained in Sh(a) for random a and random lifts b."""
    L = L or build_sl(4)
    rng = np.random.default_rng(seed)
    bad = 0
    for _ in range(n):
        r = int(rng.integers(1, rmax + 1))
        a = rng.integers(0, p**r, size=L.d)
        # bias half the points towards small shadows
        if rng.random() < 0.5:
            a = (a * p ** int(rng.integers(0, r))) % p**r
            a[: rng.integers(0, L.d)] = 0
        b = a + p**r * rng.integers(0, p, size=L.d)
        Sa = fast_shadow(a, p, r, L)
        Sb = fast_shadow(b, p, r + 1, L)
        if not Sa.contains_subspace(Sb):
            bad += 1
    return bad


# ------------------------------------------------------------ the b / z experiment


def _read_matrix(name):
    text = resources.files("sl4zeta").joinpath("data", name).read_text()
    return parse_element_text(text)


def parse_element_text(text):
    vals = [int(v) for line in text.splitlines() if not line.lstrip().startswith("#") for v in line.split()]
    if len(vals) != 16:
        raise ValueError(f"expected 16 integers, found {len(vals)}")
    return np.array(vals, dtype=np.int64).reshape(4, 4)


def builtin_element(name):
    if name == "b":
        return _read_matrix("element_b.txt")
    if name == "z":
        return _read_matrix("example_z.txt")
    raise KeyError(name)


def load_element(source):
    if source.startswith("builtin:"):
        return builtin_element(source.split(":", 1)[1])
    if "e" in source and not source.strip().replace(" ", "").lstrip("-").isdigit():
        try:
            return parse_matrix_expr(source)
        except ValueError:
            pass
    with open(source) as fh:
        return parse_element_text(fh.read())


def signature_of_b(p=3, K=6):
    """Centralizer of b at precision p^K and the divisors of its derived module.

    Generators are the Smith columns with exponent K (genuine kernel
    directions); columns with 0 < e < K only give p^(K-e)-multiples, which
    are truncation artefacts and are reported separately.
    """
    L = build_sl(4)
    x = coords(builtin_element("b"), L)
    A = ad_matrix(x, L, p**K).astype(np.int64)
    exps, _, V = kernels.snf_full(A, p, K)
    gens = np.array([V[:, i] for i, e in enumerate(exps) if e == K], dtype=np.int64)
    G = np.array([L.bracket(gens[i], gens[j]) for i in range(len(gens)) for j in range(i + 1, len(gens))]) % p**K
    derived = sorted(int(e) for e in invariant_exponents(G, p, K) if e < K)
    return {
        "adjoint_exponents": [int(e) for e in exps],
        "generators": len(gens),
        "generator_exponents": [int(e) for e in invariant_exponents(gens, p, K)],
        "derived_exponents": derived,
    }


def dead_end_census(p=3, workers=1, sample=None, seed=0):
    """Among sp lifts of red_3(b) at level 4, how many admit sp lifts to level 5.

    The sp lifts form an affine family base + 27 * span(basis) (the linear
    criterion); each member is tested by the same criterion one level up.
    ``sample`` restricts to a deterministic stratified subset, stratified
    by the first direction coordinate.
    """
    L = build_sl(4)
    b = coords(builtin_element("b"), L)
    a3 = b % p**3
    sol = affine_solutions(a3, p, 3, L)
    part, basis, piv = sol
    base = (a3 + p**3 * part) % p**4
    flags = kernels.admit_scan(ad_coef(L), base, p, 4, basis, workers)
    total = len(flags)
    admit = int(flags.sum())
    return {"sp_lifts": total, "admitting": admit, "dead_ends": total - admit, "flags": flags,
            "base": base, "basis": basis, "pivots": piv}


def constructed_lifts(census, p=3):
    """One admitting sp lift per value of the 12 free level-4 digits.

    The sp lifts are base + 27 c with c in an affine family of dimension
    13.  Twelve coordinates are taken as free (the family projects onto
    them), the other three are bound; for each free value the bound
    coordinates are solved from the linear sp condition (p solutions) and
    the one admitting a further sp lift is kept.  Candidates for the free
    set drop one pivot of the family; the first choice that yields a
    unique admitting solution for every free value is reported.
    """
    basis, flags = census["basis"], census["flags"]
    nb, k = basis.shape
    digits = (np.arange(len(flags), dtype=np.int64)[:, None] // p ** np.arange(nb, dtype=np.int64)) % p
    C = (digits @ basis) % p  # level-4 digit of every sp lift
    _, piv = rref(basis % p, p)
    out = None
    for drop in sorted(piv, reverse=True):
        free = [c for c in piv if c != drop]
        weights = p ** np.arange(len(free), dtype=np.int64)
        key = (C[:, free] * weights).sum(axis=1)
        per_key = np.bincount(key, weights=flags, minlength=p ** len(free)).astype(np.int64)
        fibre = np.bincount(key, minlength=p ** len(free))
        chosen = C[flags == 1]
        out = {
            "free_coordinates": [int(c) for c in free],
            "bound_coordinates": [c for c in range(k) if c not in free],
            "free_values": int(p ** len(free)),
            "fibre_sizes": sorted(set(int(f) for f in fibre)),
            "exactly_one": int((per_key == 1).sum()),
            "constructed": int(chosen.shape[0]),
            "distinct_mod_p4": len({row.tobytes() for row in chosen}),
        }
        if out["exactly_one"] == out["free_values"]:
            break
    return out


def sampled_dead_ends(p=3, n=10**4, seed=0):
    """Dead-end count on a deterministic sample stratified by one family digit."""
    L = build_sl(4)
    a3 = coords(builtin_element("b"), L) % p**3
    part, basis, _ = affine_solutions(a3, p, 3, L)
    base = (a3 + p**3 * part) % p**4
    rng = np.random.default_rng(seed)
    nb = basis.shape[0]
    strata = {}
    coef = ad_coef(L)
    for s in range(p):
        admit = 0
        m = n // p
        for _ in range(m):
            t = rng.integers(0, p, size=nb)
            t[0] = s
            y = (base + p**3 * (t @ basis)) % p**4
            rk, ok, _ = kernels.lift_system(coef, y.astype(np.int64), p, 4)
            admit += bool(ok)
        strata[s] = {"points": m, "admitting": admit}
    total = sum(v["points"] for v in strata.values())
    adm = sum(v["admitting"] for v in strata.values())
    return {"strata": strata, "points": total, "admitting": adm, "dead_end_fraction": (total - adm) / total}


def theorem_g_experiment(p=3, workers=1, literal=True):
    """Full report; ``literal`` adds the two 3^15-lift scans (several minutes)."""
    L = build_sl(4)
    t0 = time.time()
    report = {"signature": signature_of_b(p)}
    b = coords(builtin_element("b"), L)
    a3 = b % p**3
    report["sp_count_affine"] = affine_lift_count(a3, p, 3, L)
    census = dead_end_census(p, workers)
    report["sample"] = sampled_dead_ends(p, 3 * 10**3)
    report["dead_ends"] = census["dead_ends"]
    report["admitting"] = census["admitting"]
    report["sp_family_size"] = census["sp_lifts"]
    report["construction"] = constructed_lifts(census, p)
    z = coords(builtin_element("z"), L, p**3)
    report["z_reduces_to_b_mod_9"] = bool(np.array_equal(z % p**2, b % p**2))
    report["z_sp_count_affine"] = affine_lift_count(z, p, 3, L)
    if literal:
        report["sp_count_literal"] = shadow_preserving_lifts(a3, p, 3, L, workers=workers)
        report["z_sp_count_literal"] = shadow_preserving_lifts(z, p, 3, L, workers=workers)
    report["runtime_s"] = round(time.time() - t0, 1)
    return report
