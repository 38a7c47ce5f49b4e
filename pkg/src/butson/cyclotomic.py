"""Exact arithmetic in the ring of cyclotomic integers Z[zeta_q].

Elements are stored as integer coordinates in the power basis
``1, zeta, ..., zeta^(phi(q)-1)`` after reduction modulo the q-th cyclotomic
polynomial.  The reduced form is faithful, so an element is zero exactly
when all of its coordinates are zero.  This is the decision procedure used
for every orthogonality test in the package.

For the search kernels there are batched numpy helpers that work on
*exponent count vectors*: a length-q integer vector ``m`` represents
``sum_t m[t] * zeta^t`` and reduces to coordinates via ``m @ R`` where ``R``
is the q x phi(q) matrix returned by :func:`reduction_matrix`.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import gcd
from numbers import Rational

import numpy as np

__all__ = [
    "CycloPolynomial",
    "CyclotomicElement",
    "cyclotomic_polynomial",
    "euler_phi",
    "reduction_table",
    "reduction_matrix",
    "root_power",
    "from_counts",
    "from_exponents",
    "add",
    "negate",
    "multiply",
    "conjugate",
    "is_zero",
    "abs_square_equals",
    "reduce_counts",
]


@dataclass(frozen=True)
class CycloPolynomial:
    """Phi_q with integer coefficients listed from the constant term up."""

    q: int
    coeffs: tuple[int, ...]

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __str__(self) -> str:
        terms = []
        for i in range(self.degree, -1, -1):
            c = self.coeffs[i]
            if c == 0:
                continue
            mono = "" if i == 0 else ("x" if i == 1 else f"x^{i}")
            if mono and abs(c) == 1:
                body = mono
            else:
                body = f"{abs(c)}{mono}"
            sign = "-" if c < 0 else "+"
            terms.append((sign, body))
        first_sign, first = terms[0]
        out = ("-" if first_sign == "-" else "") + first
        for sign, body in terms[1:]:
            out += f" {sign} {body}"
        return out


def _poly_divexact(num: list[int], den: list[int]) -> list[int]:
    # den is monic; coefficient lists are low-to-high
    num = list(num)
    dd = len(den) - 1
    out = [0] * (len(num) - dd)
    for i in range(len(out) - 1, -1, -1):
        c = num[i + dd]
        out[i] = c
        if c:
            for j, d in enumerate(den):
                num[i + j] -= c * d
    if any(num[:dd]):
        raise ArithmeticError("polynomial division is not exact")
    return out


def _poly_mul(a: list[int], b: list[int]) -> list[int]:
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return out


def _check_order(q: int) -> None:
    if not isinstance(q, int) or q < 1:
        raise ValueError(f"root order must be a positive integer, got {q!r}")


@lru_cache(maxsize=None)
def cyclotomic_polynomial(q: int) -> CycloPolynomial:
    """Phi_q, by exact division of x^q - 1 by Phi_d for the proper divisors d."""
    _check_order(q)
    num = [-1] + [0] * (q - 1) + [1]
    den = [1]
    for d in range(1, q):
        if q % d == 0:
            den = _poly_mul(den, list(cyclotomic_polynomial(d).coeffs))
    return CycloPolynomial(q, tuple(_poly_divexact(num, den)))


def euler_phi(q: int) -> int:
    return cyclotomic_polynomial(q).degree


@lru_cache(maxsize=None)
def reduction_table(q: int) -> tuple[tuple[int, ...], ...]:
    """Row e holds the reduced coordinates of zeta_q^e, for e in 0..q-1."""
    phi_poly = cyclotomic_polynomial(q).coeffs
    d = len(phi_poly) - 1
    rows = []
    cur = [0] * d
    cur[0] = 1
    for _ in range(q):
        rows.append(tuple(cur))
        # multiply by x and reduce: x^d = -(phi_0 + ... + phi_{d-1} x^{d-1})
        top = cur[-1]
        cur = [0] + cur[:-1]
        if top:
            cur = [c - top * p for c, p in zip(cur, phi_poly[:d])]
    return tuple(rows)


@lru_cache(maxsize=None)
def _reduction_matrix(q: int) -> np.ndarray:
    m = np.array(reduction_table(q), dtype=np.int64)
    m.setflags(write=False)
    return m


def reduction_matrix(q: int) -> np.ndarray:
    """Read-only int64 array of shape (q, phi(q)); see :func:`reduction_table`."""
    return _reduction_matrix(q)


def reduce_counts(counts: np.ndarray, q: int) -> np.ndarray:
    """Reduce exponent count vectors (last axis of length q) to coordinates."""
    return np.asarray(counts, dtype=np.int64) @ reduction_matrix(q)


def _counts_to_coeffs(q: int, counts) -> tuple[int, ...]:
    table = reduction_table(q)
    out = [0] * len(table[0])
    for e, c in enumerate(counts):
        if c:
            for j, r in enumerate(table[e]):
                if r:
                    out[j] += c * r
    return tuple(out)


@dataclass(frozen=True)
class CyclotomicElement:
    """An element of Z[zeta_q] in reduced power-basis coordinates."""

    q: int
    coeffs: tuple[int, ...]

    def __post_init__(self):
        if len(self.coeffs) != euler_phi(self.q):
            raise ValueError(
                f"expected {euler_phi(self.q)} coordinates for q={self.q}, "
                f"got {len(self.coeffs)}"
            )

    # constructors

    @classmethod
    def from_int(cls, q: int, value: int) -> CyclotomicElement:
        coeffs = [0] * euler_phi(q)
        coeffs[0] = value
        return cls(q, tuple(coeffs))

    @classmethod
    def zero(cls, q: int) -> CyclotomicElement:
        return cls.from_int(q, 0)

    @classmethod
    def one(cls, q: int) -> CyclotomicElement:
        return cls.from_int(q, 1)

    # ring structure

    def _check(self, other: CyclotomicElement) -> None:
        if not isinstance(other, CyclotomicElement):
            raise TypeError(f"expected CyclotomicElement, got {type(other).__name__}")
        if other.q != self.q:
            raise ValueError(f"mismatched root orders {self.q} and {other.q}")

    def _coerce(self, other) -> CyclotomicElement:
        if isinstance(other, int):
            return CyclotomicElement.from_int(self.q, other)
        self._check(other)
        return other

    def __add__(self, other) -> CyclotomicElement:
        other = self._coerce(other)
        return CyclotomicElement(self.q, tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    __radd__ = __add__

    def __neg__(self) -> CyclotomicElement:
        return CyclotomicElement(self.q, tuple(-a for a in self.coeffs))

    def __sub__(self, other) -> CyclotomicElement:
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> CyclotomicElement:
        return self._coerce(other) - self

    def __mul__(self, other) -> CyclotomicElement:
        if isinstance(other, int):
            return CyclotomicElement(self.q, tuple(other * a for a in self.coeffs))
        self._check(other)
        q = self.q
        counts = [0] * q
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(other.coeffs):
                    if b:
                        counts[(i + j) % q] += a * b
        return CyclotomicElement(q, _counts_to_coeffs(q, counts))

    __rmul__ = __mul__

    def galois(self, r: int) -> CyclotomicElement:
        """Apply the automorphism zeta -> zeta^r (r coprime to q)."""
        q = self.q
        if gcd(r, q) != 1:
            raise ValueError(f"{r} is not coprime to {q}")
        counts = [0] * q
        for i, a in enumerate(self.coeffs):
            counts[(i * r) % q] += a
        return CyclotomicElement(q, _counts_to_coeffs(q, counts))

    def conjugate(self) -> CyclotomicElement:
        return self.galois(-1)

    # predicates and views

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def __bool__(self) -> bool:
        return not self.is_zero()

    def is_rational(self) -> bool:
        return not any(self.coeffs[1:])

    def to_int(self) -> int:
        if not self.is_rational():
            raise ValueError(f"{self} is not a rational integer")
        return self.coeffs[0]

    def abs_square(self) -> CyclotomicElement:
        return self * self.conjugate()

    def abs_square_equals(self, r) -> bool:
        r = Fraction(r)
        if r < 0:
            raise ValueError("r must be nonnegative")
        return (self.abs_square() * r.denominator - r.numerator).is_zero()

    def key(self) -> tuple[int, ...]:
        return self.coeffs

    def __str__(self) -> str:
        parts = []
        for i, c in enumerate(self.coeffs):
            if c == 0:
                continue
            mono = "1" if i == 0 else ("z" if i == 1 else f"z^{i}")
            parts.append(f"{c}" if i == 0 else (f"{c}*{mono}" if c != 1 else mono))
        return " + ".join(parts) if parts else "0"


def root_power(q: int, e: int) -> CyclotomicElement:
    """zeta_q^e in reduced form."""
    _check_order(q)
    if not 0 <= e < q:
        raise ValueError(f"exponent {e} out of range for q={q}")
    return CyclotomicElement(q, reduction_table(q)[e])


def from_counts(q: int, counts) -> CyclotomicElement:
    """sum_t counts[t] * zeta_q^t."""
    if len(counts) != q:
        raise ValueError(f"need {q} counts, got {len(counts)}")
    return CyclotomicElement(q, _counts_to_coeffs(q, [int(c) for c in counts]))


def from_exponents(q: int, exps) -> CyclotomicElement:
    """sum_k zeta_q^(exps[k]); exponents are taken mod q."""
    counts = [0] * q
    for e in exps:
        counts[int(e) % q] += 1
    return CyclotomicElement(q, _counts_to_coeffs(q, counts))


def is_zero(a: CyclotomicElement) -> bool:
    return a.is_zero()


def abs_square_equals(a: CyclotomicElement, r: Rational | int) -> bool:
    return a.abs_square_equals(r)


def add(a: CyclotomicElement, b: CyclotomicElement) -> CyclotomicElement:
    a._check(b)
    return a + b


def negate(a: CyclotomicElement) -> CyclotomicElement:
    return -a


def multiply(a: CyclotomicElement, b: CyclotomicElement) -> CyclotomicElement:
    a._check(b)
    return a * b


def conjugate(a: CyclotomicElement) -> CyclotomicElement:
    return a.conjugate()
