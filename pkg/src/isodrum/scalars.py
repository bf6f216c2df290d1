"""Exact arithmetic in the quadratic field Q(sqrt(2)).

Reflections across lines through the origin at multiples of 45 degrees map
numbers of the form p + q*sqrt(2) (p, q rational) to numbers of the same
form, so every coordinate produced by the reflection constructions stays in
this field and geometric predicates (coincidence, orientation, collinearity)
can be decided exactly.  Arithmetic mixing a Q2 with a float demotes the
result to float, mirroring how fractions.Fraction behaves.
"""
from __future__ import annotations

import math
import re
from fractions import Fraction
from numbers import Rational


_RATIONAL = r"[+-]?\d+(?:/\d+)?"
# Accepted string forms: "3", "-1/2", "sqrt2", "-3*sqrt2", "1+sqrt2", "1/2-3/4*sqrt2".
_TERM_RE = re.compile(
    rf"^(?P<sign>[+-]?)(?:(?P<coef>\d+(?:/\d+)?)\*?)?(?P<root>sqrt2)?$"
)


class Q2:
    """A number p + q*sqrt(2) with exact rational p and q."""

    __slots__ = ("p", "q")

    def __init__(self, p: Rational | int | str = 0, q: Rational | int | str = 0):
        object.__setattr__(self, "p", Fraction(p))
        object.__setattr__(self, "q", Fraction(q))

    def __setattr__(self, name, value):
        raise AttributeError("Q2 is immutable")

    # -- conversions ---------------------------------------------------

    def __float__(self) -> float:
        return float(self.p) + float(self.q) * math.sqrt(2.0)

    def __bool__(self) -> bool:
        return bool(self.p) or bool(self.q)

    def __repr__(self) -> str:
        return f"Q2({self.p!r}, {self.q!r})"

    def __str__(self) -> str:
        return format_scalar(self)

    # -- exact predicates ----------------------------------------------

    def sign(self) -> int:
        """Exact sign of p + q*sqrt(2): -1, 0 or +1."""
        p, q = self.p, self.q
        if q == 0:
            return (p > 0) - (p < 0)
        if p == 0:
            return (q > 0) - (q < 0)
        if p > 0 and q > 0:
            return 1
        if p < 0 and q < 0:
            return -1
        # Opposite signs: compare p^2 with 2 q^2; sqrt2 is irrational so
        # equality cannot occur for nonzero p, q.
        if p > 0:  # q < 0
            return 1 if p * p > 2 * q * q else -1
        return 1 if 2 * q * q > p * p else -1

    def is_zero(self) -> bool:
        return not self

    # -- arithmetic ------------------------------------------------------

    @staticmethod
    def _coerce(x):
        if isinstance(x, Q2):
            return x
        if isinstance(x, Rational):
            return Q2(x)
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return float(self) + other if isinstance(other, float) else NotImplemented
        return Q2(self.p + o.p, self.q + o.q)

    __radd__ = __add__

    def __neg__(self):
        return Q2(-self.p, -self.q)

    def __pos__(self):
        return self

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return float(self) - other if isinstance(other, float) else NotImplemented
        return Q2(self.p - o.p, self.q - o.q)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return other - float(self) if isinstance(other, float) else NotImplemented
        return o - self

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return float(self) * other if isinstance(other, float) else NotImplemented
        return Q2(self.p * o.p + 2 * self.q * o.q, self.p * o.q + self.q * o.p)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return float(self) / other if isinstance(other, float) else NotImplemented
        den = o.p * o.p - 2 * o.q * o.q
        if den == 0:
            raise ZeroDivisionError("division by zero in Q(sqrt2)")
        return Q2(
            (self.p * o.p - 2 * self.q * o.q) / den,
            (self.q * o.p - self.p * o.q) / den,
        )

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return other / float(self) if isinstance(other, float) else NotImplemented
        return o / self

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            return NotImplemented
        out = Q2(1)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def __abs__(self):
        return -self if self.sign() < 0 else self

    # -- comparisons -----------------------------------------------------

    def _cmp(self, other) -> int | None:
        o = self._coerce(other)
        if o is None:
            if isinstance(other, float):
                f = float(self)
                return (f > other) - (f < other)
            return None
        return (self - o).sign()

    def __eq__(self, other):
        c = self._cmp(other)
        return NotImplemented if c is None else c == 0

    def __ne__(self, other):
        c = self._cmp(other)
        return NotImplemented if c is None else c != 0

    def __lt__(self, other):
        c = self._cmp(other)
        return NotImplemented if c is None else c < 0

    def __le__(self, other):
        c = self._cmp(other)
        return NotImplemented if c is None else c <= 0

    def __gt__(self, other):
        c = self._cmp(other)
        return NotImplemented if c is None else c > 0

    def __ge__(self, other):
        c = self._cmp(other)
        return NotImplemented if c is None else c >= 0

    def __hash__(self):
        if self.q == 0:
            return hash(self.p)  # agree with Fraction/int for rationals
        return hash((self.p, self.q))


SQRT2 = Q2(0, 1)
ZERO = Q2(0)
ONE = Q2(1)

Scalar = Q2 | float  # either exact or floating-point coordinate


def is_exact(x) -> bool:
    return isinstance(x, (Q2, Rational))


def as_scalar(x) -> Scalar:
    """Coerce ints/Fractions/strings to Q2; floats pass through unchanged."""
    if isinstance(x, Q2):
        return x
    if isinstance(x, Rational):
        return Q2(x)
    if isinstance(x, str):
        return parse_scalar(x)
    if isinstance(x, float):
        return x
    raise TypeError(f"cannot interpret {x!r} as a scalar")


def parse_scalar(text: str) -> Q2:
    """Parse 'p+q*sqrt2' (either part optional) into a Q2.

    Examples: '1', '-3/2', 'sqrt2', '2*sqrt2', '1/2-3/4*sqrt2'.
    """
    s = text.replace(" ", "")
    if not s:
        raise ValueError("empty scalar string")
    # Split into signed terms.
    terms = re.findall(r"[+-]?[^+-]+", s)
    if "".join(terms) != s:
        raise ValueError(f"cannot parse scalar {text!r}")
    p = Fraction(0)
    q = Fraction(0)
    seen_p = seen_q = False
    for term in terms:
        m = _TERM_RE.match(term)
        if not m or (m.group("coef") is None and m.group("root") is None):
            raise ValueError(f"cannot parse scalar {text!r}")
        sign = -1 if m.group("sign") == "-" else 1
        coef = Fraction(m.group("coef")) if m.group("coef") else Fraction(1)
        if m.group("root"):
            if seen_q:
                raise ValueError(f"repeated sqrt2 term in {text!r}")
            q += sign * coef
            seen_q = True
        else:
            if seen_p:
                raise ValueError(f"repeated rational term in {text!r}")
            p += sign * coef
            seen_p = True
    return Q2(p, q)


def _fmt_fraction(f: Fraction) -> str:
    return str(f)  # Fraction formats as 'a' or 'a/b'


def format_scalar(x: Scalar) -> str:
    """Inverse of parse_scalar for exact values; floats use repr."""
    if isinstance(x, float):
        return repr(x)
    x = as_scalar(x)
    if x.q == 0:
        return _fmt_fraction(x.p)
    if x.q == 1:
        root = "sqrt2"
    elif x.q == -1:
        root = "-sqrt2"
    else:
        root = f"{_fmt_fraction(x.q)}*sqrt2"
    if x.p == 0:
        return root
    joiner = "" if root.startswith("-") else "+"
    return f"{_fmt_fraction(x.p)}{joiner}{root}"


def scalar_from_json(value) -> Scalar:
    """Decode a JSON coordinate: a number or a 'p+q*sqrt2' string.

    Numbers are read as exact rationals of their decimal literal, so 0.5
    means exactly 1/2.
    """
    if isinstance(value, bool):
        raise TypeError("boolean is not a coordinate")
    if isinstance(value, int):
        return Q2(value)
    if isinstance(value, float):
        return Q2(Fraction(repr(value)))
    if isinstance(value, str):
        return parse_scalar(value)
    raise TypeError(f"cannot interpret {value!r} as a coordinate")


def scalar_to_json(x: Scalar):
    """Encode a scalar for JSON: int when integral, else exact string form."""
    if isinstance(x, float):
        return x
    x = as_scalar(x)
    if x.q == 0 and x.p.denominator == 1:
        return int(x.p)
    return format_scalar(x)
