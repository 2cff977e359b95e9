"""Laurent polynomials and rational functions in two variables q, t.

Coefficients are exact Fractions.  Rational functions are kept as an
unreduced numerator/denominator pair and compared by cross-multiplication,
so no multivariate gcd is ever needed.
"""

from __future__ import annotations

import ast
import json
from fractions import Fraction

EXPONENT_GUARD = 10_000


class ZeroDenominator(ZeroDivisionError):
    pass


class NotPalindromic(ValueError):
    pass


class LaurentPoly:
    __slots__ = ("terms",)

    def __init__(self, terms=None):
        clean = {}
        for (eq, et), c in (terms or {}).items():
            c = Fraction(c)
            if c:
                if abs(eq) > EXPONENT_GUARD or abs(et) > EXPONENT_GUARD:
                    raise OverflowError("exponent outside the supported range")
                clean[(int(eq), int(et))] = c
        self.terms = clean

    # constructors
    @classmethod
    def const(cls, c):
        return cls({(0, 0): c})

    @classmethod
    def monomial(cls, eq=0, et=0, c=1):
        return cls({(eq, et): c})

    @classmethod
    def q(cls):
        return cls.monomial(1, 0)

    @classmethod
    def t(cls):
        return cls.monomial(0, 1)

    @staticmethod
    def coerce(x):
        if isinstance(x, LaurentPoly):
            return x
        if isinstance(x, (int, Fraction)):
            return LaurentPoly.const(x)
        return NotImplemented

    # ring operations
    def __add__(self, other):
        other = LaurentPoly.coerce(other)
        if other is NotImplemented:
            return other
        out = dict(self.terms)
        for k, c in other.terms.items():
            out[k] = out.get(k, 0) + c
        return LaurentPoly(out)

    __radd__ = __add__

    def __neg__(self):
        return LaurentPoly({k: -c for k, c in self.terms.items()})

    def __sub__(self, other):
        other = LaurentPoly.coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return LaurentPoly.coerce(other) - self

    def __mul__(self, other):
        other = LaurentPoly.coerce(other)
        if other is NotImplemented:
            return other
        out = {}
        for (a, b), c in self.terms.items():
            for (a2, b2), c2 in other.terms.items():
                k = (a + a2, b + b2)
                out[k] = out.get(k, 0) + c * c2
        return LaurentPoly(out)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            if len(self.terms) != 1:
                raise ValueError("only monomials have Laurent inverses")
            (eq, et), c = next(iter(self.terms.items()))
            return LaurentPoly({(eq * n, et * n): c**n})
        out = LaurentPoly.const(1)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            if other == 0:
                raise ZeroDenominator("division by zero")
            return LaurentPoly({k: c / other for k, c in self.terms.items()})
        return BivariateRational(self, other)

    def __eq__(self, other):
        other = LaurentPoly.coerce(other)
        if other is NotImplemented:
            return False
        return self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __bool__(self):
        return bool(self.terms)

    # queries
    def is_zero(self):
        return not self.terms

    def evaluate(self, q, t=1):
        q, t = Fraction(q), Fraction(t)
        return sum((c * q**a * t**b for (a, b), c in self.terms.items()), Fraction(0))

    def substitute(self, q_map=(1, 0, 1), t_map=(0, 1, 1)):
        """Monomial substitution.

        ``q_map = (a, b, c)`` sends q to c * q^a t^b; likewise ``t_map``.
        """
        qm = LaurentPoly.monomial(q_map[0], q_map[1], q_map[2] if len(q_map) > 2 else 1)
        tm = LaurentPoly.monomial(t_map[0], t_map[1], t_map[2] if len(t_map) > 2 else 1)
        out = LaurentPoly()
        for (a, b), c in self.terms.items():
            out = out + c * (qm**a) * (tm**b)
        return out

    def t_coefficients(self):
        """Map t-exponent -> LaurentPoly in q."""
        out = {}
        for (a, b), c in self.terms.items():
            out.setdefault(b, {})[(a, 0)] = c
        return {b: LaurentPoly(v) for b, v in out.items()}

    def q_only(self):
        return all(b == 0 for _, b in self.terms)

    def has_integer_coefficients(self):
        return all(c.denominator == 1 for c in self.terms.values())

    def reciprocity_exponents(self):
        """(a, b) with q^a t^b P(1/q, 1/t) = P(q, t), if it exists."""
        if not self.terms:
            raise NotPalindromic("zero polynomial")
        k0 = min(self.terms)
        k1 = max(self.terms)
        a, b = k0[0] + k1[0], k0[1] + k1[1]
        flipped = {(a - eq, b - et): c for (eq, et), c in self.terms.items()}
        if flipped != self.terms:
            raise NotPalindromic("no exponent pair makes the polynomial self-reciprocal")
        return a, b

    # io
    def to_json(self):
        return [[a, b, c.numerator, c.denominator] for (a, b), c in sorted(self.terms.items())]

    @classmethod
    def from_json(cls, data):
        return cls({(a, b): Fraction(n, d) for a, b, n, d in data})

    def __repr__(self):
        return f"LaurentPoly({self.pretty()})"

    def pretty(self):
        """Descending t-degree, each t-coefficient as a polynomial in q."""
        if not self.terms:
            return "0"
        parts = []
        for b, qp in sorted(self.t_coefficients().items(), reverse=True):
            qs = _pretty_q(qp)
            tpart = "" if b == 0 else "t" if b == 1 else f"t^{b}"
            if not tpart:
                parts.append(qs)
            elif qs == "1":
                parts.append(tpart)
            elif qs == "-1":
                parts.append("-" + tpart)
            elif len(qp.terms) == 1:
                parts.append(f"{qs}*{tpart}")
            else:
                parts.append(f"({qs})*{tpart}")
        return " + ".join(parts).replace("+ -", "- ")


def _pretty_q(qp):
    parts = []
    for (a, _), c in sorted(qp.terms.items(), reverse=True):
        mono = "" if a == 0 else "q" if a == 1 else f"q^{a}"
        if not mono:
            parts.append(str(c))
        elif c == 1:
            parts.append(mono)
        elif c == -1:
            parts.append("-" + mono)
        else:
            parts.append(f"{c}*{mono}")
    return " + ".join(parts).replace("+ -", "- ")


class BivariateRational:
    __slots__ = ("num", "den")

    def __init__(self, num, den=1):
        num, den = LaurentPoly.coerce(num), LaurentPoly.coerce(den)
        if den.is_zero():
            raise ZeroDenominator("zero denominator")
        self.num, self.den = num, den

    @staticmethod
    def coerce(x):
        if isinstance(x, BivariateRational):
            return x
        x = LaurentPoly.coerce(x)
        return x if x is NotImplemented else BivariateRational(x)

    def __add__(self, other):
        o = BivariateRational.coerce(other)
        if o.den == self.den:
            return BivariateRational(self.num + o.num, self.den)
        return BivariateRational(self.num * o.den + o.num * self.den, self.den * o.den)

    __radd__ = __add__

    def __neg__(self):
        return BivariateRational(-self.num, self.den)

    def __sub__(self, other):
        return self + (-BivariateRational.coerce(other))

    def __rsub__(self, other):
        return BivariateRational.coerce(other) - self

    def __mul__(self, other):
        o = BivariateRational.coerce(other)
        return BivariateRational(self.num * o.num, self.den * o.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = BivariateRational.coerce(other)
        if o.num.is_zero():
            raise ZeroDenominator("division by zero")
        return BivariateRational(self.num * o.den, self.den * o.num)

    def __eq__(self, other):
        o = BivariateRational.coerce(other)
        if o is NotImplemented:
            return False
        return equals(self, o)

    __hash__ = None

    def substitute(self, q_map=(1, 0, 1), t_map=(0, 1, 1)):
        return BivariateRational(self.num.substitute(q_map, t_map), self.den.substitute(q_map, t_map))

    def evaluate(self, q, t=1):
        d = self.den.evaluate(q, t)
        if d == 0:
            raise ZeroDenominator(f"denominator vanishes at ({q}, {t})")
        return self.num.evaluate(q, t) / d

    def t_series(self, order: int):
        """Power series in t up to t^order, coefficients LaurentPoly in q.

        The denominator's t^0 part must be a single monomial in q.
        """
        num = self.num.t_coefficients()
        den = self.den.t_coefficients()
        if min(den) < 0 or min(num, default=0) < 0:
            raise ValueError("negative t powers are not supported")
        d0 = den.get(0)
        if d0 is None or len(d0.terms) != 1:
            raise ValueError("constant term of the denominator must be a q-monomial")
        d0_inv = d0 ** -1
        out = []
        for k in range(order + 1):
            acc = num.get(k, LaurentPoly())
            for j in range(1, k + 1):
                if j in den:
                    acc = acc - den[j] * out[k - j]
            out.append(acc * d0_inv)
        return out

    def to_json(self):
        return {"num": self.num.to_json(), "den": self.den.to_json()}

    def pretty(self):
        return f"({self.num.pretty()}) / ({self.den.pretty()})"

    def __repr__(self):
        return f"BivariateRational({self.pretty()})"


def equals(A, B) -> bool:
    A, B = BivariateRational.coerce(A), BivariateRational.coerce(B)
    return A.num * B.den == B.num * A.den


def reciprocity_exponents(P: LaurentPoly):
    return P.reciprocity_exponents()


# ------------------------------------------------------------ parsing

_BINOPS = {ast.Add: lambda a, b: a + b, ast.Sub: lambda a, b: a - b, ast.Mult: lambda a, b: a * b}


def parse_poly(text: str) -> LaurentPoly:
    """Evaluate an expression in q and t such as '1/2*q**4*(q-1)**3'."""
    tree = ast.parse(text.replace("^", "**"), mode="eval")
    names = {"q": LaurentPoly.q(), "t": LaurentPoly.t()}

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, int):
            return LaurentPoly.const(node.value)
        if isinstance(node, ast.Name) and node.id in names:
            return names[node.id]
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = ev(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.BinOp):
            if isinstance(node.op, ast.Pow):
                exp = node.right
                sign = 1
                if isinstance(exp, ast.UnaryOp) and isinstance(exp.op, ast.USub):
                    exp, sign = exp.operand, -1
                if not (isinstance(exp, ast.Constant) and isinstance(exp.value, int)):
                    raise ValueError("exponents must be integer literals")
                return ev(node.left) ** (sign * exp.value)
            if isinstance(node.op, ast.Div):
                den = ev(node.right)
                if not den.q_only() or len(den.terms) != 1 or (0, 0) not in den.terms:
                    raise ValueError("only division by integer constants is supported")
                return ev(node.left) / den.terms[(0, 0)]
            if type(node.op) in _BINOPS:
                return _BINOPS[type(node.op)](ev(node.left), ev(node.right))
        raise ValueError(f"unsupported syntax in {text!r}")

    return ev(tree)


def dumps(obj) -> str:
    return json.dumps(obj.to_json())
