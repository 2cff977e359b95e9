"""Arithmetic in prime fields F_p and residue rings Z/p^r (p odd)."""

from __future__ import annotations

from dataclasses import dataclass


class ZeroInverse(ZeroDivisionError):
    pass


class BadLevel(ValueError):
    pass


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    f = 2
    while f * f <= n:
        if n % f == 0:
            return False
        f += 1
    return True


def check_odd_prime(p: int) -> int:
    """Return p unchanged, or raise if it is not an odd prime."""
    if p == 2:
        raise ValueError("characteristic 2 is not supported")
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")
    return p


@dataclass(frozen=True)
class FieldElem:
    value: int
    p: int

    def __post_init__(self):
        check_odd_prime(self.p)
        object.__setattr__(self, "value", self.value % self.p)

    def __add__(self, other):
        return FieldElem(self.value + _val(other), self.p)

    def __sub__(self, other):
        return FieldElem(self.value - _val(other), self.p)

    def __mul__(self, other):
        return FieldElem(self.value * _val(other), self.p)

    def __neg__(self):
        return FieldElem(-self.value, self.p)

    def __bool__(self):
        return self.value != 0


@dataclass(frozen=True)
class RingElem:
    value: int
    p: int
    r: int

    def __post_init__(self):
        check_odd_prime(self.p)
        if self.r < 1:
            raise BadLevel(f"level must be >= 1, got {self.r}")
        object.__setattr__(self, "value", self.value % self.p**self.r)

    @property
    def modulus(self) -> int:
        return self.p**self.r

    def __add__(self, other):
        return RingElem(self.value + _val(other), self.p, self.r)

    def __sub__(self, other):
        return RingElem(self.value - _val(other), self.p, self.r)

    def __mul__(self, other):
        return RingElem(self.value * _val(other), self.p, self.r)

    def __neg__(self):
        return RingElem(-self.value, self.p, self.r)


def _val(x):
    return x.value if isinstance(x, (FieldElem, RingElem)) else int(x)


def field_inverse(a: FieldElem) -> FieldElem:
    if a.value == 0:
        raise ZeroInverse(f"0 has no inverse mod {a.p}")
    return FieldElem(pow(a.value, -1, a.p), a.p)


def is_square(a: FieldElem) -> bool:
    """Euler's criterion; 0 counts as a square."""
    if a.value == 0:
        return True
    return pow(a.value, (a.p - 1) // 2, a.p) == 1


def valuation(x: RingElem) -> int:
    """p-adic valuation truncated at the level, so v(0) = r."""
    return int_valuation(x.value, x.p, x.r)


def int_valuation(n: int, p: int, cap: int) -> int:
    n %= p**cap
    if n == 0:
        return cap
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def reduce_level(x: RingElem, t: int) -> RingElem:
    if t < 1 or t > x.r:
        raise BadLevel(f"cannot reduce level {x.r} element to level {t}")
    return RingElem(x.value, x.p, t)


def unit_inverse(u: int, modulus: int) -> int:
    try:
        return pow(u % modulus, -1, modulus)
    except ValueError:
        raise ZeroInverse(f"{u} is not a unit modulo {modulus}") from None
