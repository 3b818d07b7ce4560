"""Coefficient rings: the integers, the rationals and Z/m."""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from math import gcd


@dataclass(frozen=True)
class Ring:
    """A coefficient ring.

    ``modulus`` is 0 for Z, ``None`` for Q and m >= 2 for Z/m.
    """

    modulus: int | None

    def __post_init__(self):
        m = self.modulus
        if m is not None and (m < 0 or m == 1):
            raise ValueError(f"invalid modulus {m}")

    @property
    def is_integers(self) -> bool:
        return self.modulus == 0

    @property
    def is_rationals(self) -> bool:
        return self.modulus is None

    @property
    def is_cyclic(self) -> bool:
        return self.modulus is not None and self.modulus >= 2

    @property
    def is_field(self) -> bool:
        return self.modulus is None or (self.modulus >= 2 and _is_prime(self.modulus))

    @property
    def name(self) -> str:
        if self.modulus is None:
            return "Q"
        if self.modulus == 0:
            return "Z"
        return f"Z/{self.modulus}"

    def __str__(self):
        return self.name

    def __repr__(self):
        return f"Ring({self.name})"

    def reduce(self, value):
        """Bring an integer or rational into canonical form for this ring."""
        if self.modulus is None:
            return Fraction(value)
        if isinstance(value, Fraction):
            if value.denominator != 1:
                if self.modulus == 0:
                    raise ValueError(f"{value} is not an integer")
                return (value.numerator * pow(value.denominator, -1, self.modulus)) % self.modulus
            value = value.numerator
        if self.modulus == 0:
            return int(value)
        return int(value) % self.modulus

    def is_zero(self, value) -> bool:
        return self.reduce(value) == 0

    def inverse(self, value):
        value = self.reduce(value)
        if value == 0:
            raise ZeroDivisionError(f"0 is not invertible in {self}")
        if self.modulus is None:
            return 1 / value
        if self.modulus == 0:
            if value in (1, -1):
                return value
            raise ZeroDivisionError(f"{value} is not a unit in Z")
        if gcd(value, self.modulus) != 1:
            raise ZeroDivisionError(f"{value} is not a unit in {self}")
        return pow(value, -1, self.modulus)


ZZ = Ring(0)
QQ = Ring(None)


def Zmod(m: int) -> Ring:
    if m < 2:
        raise ValueError(f"Z/m requires m >= 2, got {m}")
    return Ring(m)


_RING_RE = re.compile(r"^\s*Z\s*/\s*(\d+)\s*(Z)?\s*$")


def parse_ring(text: str) -> Ring:
    """Parse ``Z``, ``Q`` or ``Z/m``."""
    t = text.strip()
    if t in ("Z", "ZZ"):
        return ZZ
    if t in ("Q", "QQ"):
        return QQ
    match = _RING_RE.match(t)
    if match:
        return Zmod(int(match.group(1)))
    raise ValueError(f"unknown ring {text!r}; expected Z, Q or Z/m with m >= 2")


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    p = 2
    while p * p <= n:
        if n % p == 0:
            return False
        p += 1
    return True


def is_prime(n: int) -> bool:
    return _is_prime(n)


def prime_factors(n: int) -> list[int]:
    """Distinct prime factors of ``|n|`` in increasing order."""
    n = abs(n)
    out = []
    p = 2
    while p * p <= n:
        if n % p == 0:
            out.append(p)
            while n % p == 0:
                n //= p
        p += 1
    if n > 1:
        out.append(n)
    return out


def format_rational(value) -> str:
    """Render an exact value as ``p/q``; infinities as ``inf``/``-inf``."""
    if isinstance(value, float):
        if value == float("inf"):
            return "inf"
        if value == float("-inf"):
            return "-inf"
        raise TypeError("floats are not exact values")
    return str(Fraction(value))


def parse_rational(text) -> Fraction:
    if isinstance(text, bool):
        raise ValueError("booleans are not rationals")
    if isinstance(text, int):
        return Fraction(text)
    if not isinstance(text, str):
        raise ValueError(f"expected a rational string, got {text!r}")
    t = text.strip()
    if not re.fullmatch(r"[+-]?\d+(/\d+)?", t):
        raise ValueError(f"not an exact rational: {text!r}")
    value = Fraction(t)
    return value
