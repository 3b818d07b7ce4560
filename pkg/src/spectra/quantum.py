"""Quantum cohomology ring of CP^n: R[x, t, t^-1] / (x^(n+1) = t).

Elements are finitely supported. A monomial ``x^i t^j`` is stored with
``0 <= i <= n`` and has degree ``2i + 2(n+1)j``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction

from .linalg import Matrix, solve_linear
from .rings import QQ, Ring, format_rational, parse_rational


class QuantumError(ValueError):
    pass


class NotInvertible(QuantumError):
    pass


# the inverse search widens its window by one monomial on each side per
# attempt, at most this many times
INVERSE_WINDOW_LIMIT = 8


@dataclass(frozen=True)
class QuantumClass:
    n: int
    ring: Ring
    coeffs: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.n < 1:
            raise QuantumError("CP^n needs n >= 1")
        clean = {}
        for (i, j), v in self.coeffs.items():
            if i < 0:
                raise QuantumError("negative powers of x are not allowed")
            q, r = divmod(i, self.n + 1)
            key = (r, j + q)
            clean[key] = clean.get(key, 0) + v
        out = {}
        for key, v in clean.items():
            v = self.ring.reduce(v)
            if v != 0:
                out[key] = v
        object.__setattr__(self, "coeffs", dict(sorted(out.items(), key=lambda kv: (kv[0][1], kv[0][0]))))

    def __eq__(self, other):
        if not isinstance(other, QuantumClass):
            return NotImplemented
        return (self.n, self.ring, self.coeffs) == (other.n, other.ring, other.coeffs)

    def __hash__(self):
        return hash((self.n, self.ring, tuple(self.coeffs.items())))

    def is_zero(self) -> bool:
        return not self.coeffs

    def __add__(self, other):
        return qadd(self, other)

    def __mul__(self, other):
        return qmul(self, other)

    def __neg__(self):
        return QuantumClass(self.n, self.ring, {k: -v for k, v in self.coeffs.items()})

    def __sub__(self, other):
        return qadd(self, -other)

    def __str__(self):
        return format_quantum(self)


def monomial(n: int, ring: Ring, i: int = 0, j: int = 0, coeff=1) -> QuantumClass:
    return QuantumClass(n, ring, {(i, j): coeff})


def one(n: int, ring: Ring) -> QuantumClass:
    return monomial(n, ring)


def _same(a: QuantumClass, b: QuantumClass):
    if a.n != b.n or a.ring != b.ring:
        raise QuantumError(f"mismatched rings: CP^{a.n} over {a.ring} vs CP^{b.n} over {b.ring}")


def qadd(a: QuantumClass, b: QuantumClass) -> QuantumClass:
    _same(a, b)
    out = dict(a.coeffs)
    for k, v in b.coeffs.items():
        out[k] = out.get(k, 0) + v
    return QuantumClass(a.n, a.ring, out)


def qmul(a: QuantumClass, b: QuantumClass) -> QuantumClass:
    _same(a, b)
    out: dict = {}
    for (i1, j1), v1 in a.coeffs.items():
        for (i2, j2), v2 in b.coeffs.items():
            key = (i1 + i2, j1 + j2)
            out[key] = out.get(key, 0) + v1 * v2
    return QuantumClass(a.n, a.ring, out)


def qtau(a: QuantumClass):
    """Coefficient of the monomial ``x^0 t^0``."""
    return a.coeffs.get((0, 0), a.ring.reduce(0))


def qpairing(a: QuantumClass, b: QuantumClass):
    """Coefficient of ``x^n t^0`` in ``a * b``."""
    prod = qmul(a, b)
    return prod.coeffs.get((a.n, 0), a.ring.reduce(0))


def monomial_degree(n: int, i: int, j: int) -> int:
    return 2 * i + 2 * (n + 1) * j


def qdegree(a: QuantumClass):
    """Common degree of a homogeneous nonzero element, else ``None``."""
    degrees = {monomial_degree(a.n, i, j) for i, j in a.coeffs}
    return degrees.pop() if len(degrees) == 1 else None


def qvaluation(a: QuantumClass) -> int:
    """Largest power of ``t`` with a nonzero coefficient."""
    if a.is_zero():
        raise QuantumError("the zero class has no valuation")
    return max(j for _, j in a.coeffs)


def _exponent(n, i, j):
    # x^(n+1) = t, so x^i t^j is the Laurent monomial x^(i + (n+1) j)
    return i + (n + 1) * j


def qinverse(a: QuantumClass) -> QuantumClass:
    """Multiplicative inverse over a field, by solving ``a * b = 1`` on a
    window of monomials that is widened up to :data:`INVERSE_WINDOW_LIMIT`
    times before giving up."""
    if not a.ring.is_field:
        raise QuantumError(f"inverses need a field, not {a.ring}")
    if a.is_zero():
        raise NotInvertible("zero is not invertible")
    n = a.n
    exps = {_exponent(n, i, j): v for (i, j), v in a.coeffs.items()}
    lo_a, hi_a = min(exps), max(exps)
    for widen in range(INVERSE_WINDOW_LIMIT + 1):
        lo, hi = -hi_a - widen, -lo_a + widen
        unknowns = list(range(lo, hi + 1))
        targets = list(range(lo + lo_a, hi + hi_a + 1))
        rows = []
        for e in targets:
            rows.append([exps.get(e - u, 0) for u in unknowns])
        rhs = [1 if e == 0 else 0 for e in targets]
        if a.ring.is_rationals:
            sol = solve_linear(Matrix(rows, len(unknowns)), rhs, QQ)
        else:
            sol = solve_linear(Matrix(rows, len(unknowns)), rhs, a.ring)
        if sol is not None:
            coeffs = {}
            for u, v in zip(unknowns, sol):
                if v:
                    j, i = divmod(u, n + 1)
                    coeffs[(i, j)] = v
            b = QuantumClass(n, a.ring, coeffs)
            if qmul(a, b) != one(n, a.ring):
                raise AssertionError("inverse verification failed")
            return b
    raise NotInvertible(f"{format_quantum(a)} has no inverse (only monomials are units)")


def _format_coeff(v) -> str:
    return format_rational(v)


def format_quantum(a: QuantumClass) -> str:
    if a.is_zero():
        return "0"
    parts = []
    for (i, j), v in a.coeffs.items():
        factors = []
        if i == 1:
            factors.append("x")
        elif i > 1:
            factors.append(f"x^{i}")
        if j == 1:
            factors.append("t")
        elif j != 0:
            factors.append(f"t^{j}")
        if not factors:
            parts.append(_format_coeff(v))
        elif v == 1:
            parts.append("*".join(factors))
        elif v == -1 and a.ring.modulus in (0, None):
            parts.append("-" + "*".join(factors))
        else:
            parts.append(_format_coeff(v) + "*" + "*".join(factors))
    text = " + ".join(parts)
    return text.replace("+ -", "- ")


_FACTOR_RE = re.compile(r"^(x|t)(?:\^(-?\d+))?$")


def parse_quantum(text: str, n: int, ring: Ring) -> QuantumClass:
    """Parse sums of terms like ``3``, ``-x^2*t^-1`` or ``1/2*x``."""
    src = text.replace(" ", "")
    if not src:
        raise QuantumError("empty expression")
    terms = re.split(r"(?<=[^*^])(?=[+-])", src)
    coeffs: dict = {}
    for term in terms:
        sign = 1
        body = term
        if body[:1] in "+-":
            sign = -1 if body[0] == "-" else 1
            body = body[1:]
        if not body:
            raise QuantumError(f"dangling sign in {text!r}")
        coeff = Fraction(sign)
        i = j = 0
        for factor in body.split("*"):
            if not factor:
                raise QuantumError(f"empty factor in {text!r}")
            m = _FACTOR_RE.match(factor)
            if m:
                e = int(m.group(2)) if m.group(2) is not None else 1
                if m.group(1) == "x":
                    if e < 0:
                        raise QuantumError("negative powers of x are not allowed; use t^-1")
                    i += e
                else:
                    j += e
                continue
            try:
                coeff *= parse_rational(factor)
            except ValueError:
                raise QuantumError(f"cannot parse factor {factor!r}") from None
        if ring.is_integers and coeff.denominator != 1:
            raise QuantumError(f"coefficient {coeff} is not an integer")
        key = (i, j)
        coeffs[key] = coeffs.get(key, 0) + coeff
    try:
        return QuantumClass(n, ring, coeffs)
    except ValueError as exc:
        raise QuantumError(str(exc)) from None
