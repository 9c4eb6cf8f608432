"""Exact ground fields: arbitrary-precision rationals and prime fields GF(p).

Scalars are plain values (`fractions.Fraction` over the rationals, `int`
residues in ``[0, p)`` over GF(p)); a field object supplies the arithmetic.
No floating point is used anywhere.
"""

from __future__ import annotations

import re
from fractions import Fraction

_RATIONAL_RE = re.compile(r"[+-]?\d+(/\d+)?\Z")


def _parse_rational_text(text: str) -> Fraction:
    """Exact ``p`` or ``p/q`` literal; anything else (decimals included) fails."""
    stripped = text.strip()
    if not _RATIONAL_RE.match(stripped):
        raise ValueError(f"not an exact rational literal: {text!r}")
    return Fraction(stripped)


class FieldMismatchError(ValueError):
    """Operands belong to different ground fields."""


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin primality test (exact for n < 3.3e24)."""
    if n < 2:
        return False
    for p in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


class Rationals:
    """The field of rationals; scalars are `Fraction` in lowest terms."""

    name = "Q"
    selector = "rationals"
    characteristic = 0

    zero = Fraction(0)
    one = Fraction(1)

    @staticmethod
    def add(a, b):
        return a + b

    @staticmethod
    def sub(a, b):
        return a - b

    @staticmethod
    def mul(a, b):
        return a * b

    @staticmethod
    def neg(a):
        return -a

    @staticmethod
    def invert(a):
        if a == 0:
            raise ZeroDivisionError("inverse of zero")
        return 1 / Fraction(a)

    def div(self, a, b):
        return self.mul(a, self.invert(b))

    @staticmethod
    def from_int(n: int) -> Fraction:
        return Fraction(n)

    @staticmethod
    def from_fraction(q: Fraction) -> Fraction:
        return q

    @staticmethod
    def parse(text: str) -> Fraction:
        return _parse_rational_text(text)

    @staticmethod
    def to_str(a) -> str:
        return str(a)

    def random(self, rng, span: int = 9):
        return Fraction(rng.randint(-span, span), rng.randint(1, span))

    def __eq__(self, other):
        return isinstance(other, Rationals)

    def __hash__(self):
        return hash(Rationals)

    def __repr__(self):
        return "Rationals()"


class PrimeField:
    """GF(p) for prime p; scalars are ints reduced to ``[0, p)``."""

    characteristic: int

    def __init__(self, p: int):
        if not is_prime(p):
            raise ValueError(f"modulus {p} is not prime")
        self.p = p
        self.characteristic = p
        self.name = f"GF({p})"
        self.selector = f"p:{p}"
        self.zero = 0
        self.one = 1 % p

    def add(self, a, b):
        return (a + b) % self.p

    def sub(self, a, b):
        return (a - b) % self.p

    def mul(self, a, b):
        return (a * b) % self.p

    def neg(self, a):
        return (-a) % self.p

    def invert(self, a):
        if a % self.p == 0:
            raise ZeroDivisionError("inverse of zero")
        return pow(a, self.p - 2, self.p)

    def div(self, a, b):
        return self.mul(a, self.invert(b))

    def from_int(self, n: int) -> int:
        return n % self.p

    def from_fraction(self, q: Fraction) -> int:
        if q.denominator % self.p == 0:
            raise ZeroDivisionError(
                f"denominator of {q} vanishes in GF({self.p})"
            )
        return q.numerator * self.invert(q.denominator % self.p) % self.p

    def parse(self, text: str) -> int:
        return self.from_fraction(_parse_rational_text(text))

    @staticmethod
    def to_str(a) -> str:
        return str(a)

    def random(self, rng, span: int = 0):
        return rng.randrange(self.p)

    def __eq__(self, other):
        return isinstance(other, PrimeField) and other.p == self.p

    def __hash__(self):
        return hash(("PrimeField", self.p))

    def __repr__(self):
        return f"PrimeField({self.p})"


QQ = Rationals()

_gf_cache: dict[int, PrimeField] = {}


def GF(p: int) -> PrimeField:
    field = _gf_cache.get(p)
    if field is None:
        field = _gf_cache[p] = PrimeField(p)
    return field


def field_from_spec(spec: str):
    """Resolve a field selector: ``rationals``/``q`` or ``p:PRIME``."""
    text = spec.strip().lower()
    if text in ("q", "qq", "rationals", "rational"):
        return QQ
    if text.startswith("p:"):
        try:
            p = int(text[2:])
        except ValueError:
            raise ValueError(f"bad field selector {spec!r}") from None
        return GF(p)
    raise ValueError(f"bad field selector {spec!r} (expected 'rationals' or 'p:PRIME')")


def require_same_field(a, b):
    if a != b:
        raise FieldMismatchError(f"field mismatch: {a!r} vs {b!r}")
