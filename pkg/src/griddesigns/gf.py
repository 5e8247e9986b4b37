"""Arithmetic in small finite fields GF(p^k), p^k <= 64.

Elements are dense integer codes 0..p^k-1: the base-p digits of a code
are the coefficients of the residue polynomial, least significant digit
first (constant term).  The reducing modulus is fixed per (p, k): the
monic irreducible polynomial of degree k with the smallest code.  Fixing
the modulus makes every structure built on top of field arithmetic
reproducible bit for bit.
"""

from __future__ import annotations

import math
from functools import lru_cache

MAX_ORDER = 64
MAX_DEGREE = 4


def is_prime(p: int) -> bool:
    return p >= 2 and all(p % d for d in range(2, math.isqrt(p) + 1))


def _code_to_poly(code: int, p: int) -> list[int]:
    """Base-p digits of ``code``, constant term first."""
    digits = []
    while code:
        digits.append(code % p)
        code //= p
    return digits


def _poly_to_code(poly: list[int], p: int) -> int:
    code = 0
    for c in reversed(poly):
        code = code * p + c
    return code


def _poly_mul(a: list[int], b: list[int], p: int) -> list[int]:
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, ca in enumerate(a):
        if ca:
            for j, cb in enumerate(b):
                out[i + j] = (out[i + j] + ca * cb) % p
    return out


def _poly_mod(a: list[int], m: list[int], p: int) -> list[int]:
    """Remainder of ``a`` modulo the monic polynomial ``m`` over GF(p)."""
    a = list(a)
    deg_m = len(m) - 1
    while len(a) > deg_m:
        lead = a[-1]
        if lead:
            shift = len(a) - 1 - deg_m
            for i, c in enumerate(m):
                a[shift + i] = (a[shift + i] - lead * c) % p
        a.pop()
    while a and a[-1] == 0:
        a.pop()
    return a


def _is_irreducible(poly: list[int], p: int) -> bool:
    """Trial division by all monic polynomials of degree <= deg/2."""
    deg = len(poly) - 1
    for d in range(1, deg // 2 + 1):
        for code in range(p**d, 2 * p**d):
            div = _code_to_poly(code, p)
            if not _poly_mod(poly, div, p):
                return False
    return True


def _least_irreducible(p: int, k: int) -> list[int]:
    if k == 1:
        return [0, 1]
    for code in range(p**k, 2 * p**k):
        poly = _code_to_poly(code, p)
        poly += [0] * (k + 1 - len(poly))
        if _is_irreducible(poly, p):
            return poly
    raise AssertionError(f"no irreducible polynomial of degree {k} over GF({p})")


class Field:
    """GF(p^k) with table-driven arithmetic on dense integer codes."""

    __slots__ = ("p", "k", "q", "modulus", "_add", "_mul", "_neg", "_inv")

    def __init__(self, p: int, k: int):
        if not is_prime(p):
            raise ValueError(f"{p} is not prime")
        if not 1 <= k <= MAX_DEGREE:
            raise ValueError(f"extension degree {k} out of range 1..{MAX_DEGREE}")
        q = p**k
        if q > MAX_ORDER:
            raise ValueError(f"field order {q} exceeds {MAX_ORDER}")
        self.p = p
        self.k = k
        self.q = q
        self.modulus = tuple(_least_irreducible(p, k))

        mod = list(self.modulus)
        polys = [_code_to_poly(x, p) for x in range(q)]
        self._add = tuple(
            tuple(
                _poly_to_code(
                    [(xa + ya) % p for xa, ya in zip(px + [0] * k, py + [0] * k)], p
                )
                for py in polys
            )
            for px in polys
        )
        self._mul = tuple(
            tuple(_poly_to_code(_poly_mod(_poly_mul(px, py, p), mod, p), p) for py in polys)
            for px in polys
        )
        self._neg = tuple(_poly_to_code([(-c) % p for c in px], p) for px in polys)
        inv = [0] * q
        for x in range(1, q):
            for y in range(1, q):
                if self._mul[x][y] == 1:
                    inv[x] = y
                    break
        self._inv = tuple(inv)

    @property
    def elements(self) -> range:
        return range(self.q)

    def _check(self, *xs: int) -> None:
        for x in xs:
            if not 0 <= x < self.q:
                raise ValueError(f"{x} is not an element code of GF({self.q})")

    def add(self, x: int, y: int) -> int:
        self._check(x, y)
        return self._add[x][y]

    def sub(self, x: int, y: int) -> int:
        self._check(x, y)
        return self._add[x][self._neg[y]]

    def neg(self, x: int) -> int:
        self._check(x)
        return self._neg[x]

    def mul(self, x: int, y: int) -> int:
        self._check(x, y)
        return self._mul[x][y]

    def inv(self, x: int) -> int:
        self._check(x)
        if x == 0:
            raise ZeroDivisionError("inverse of zero")
        return self._inv[x]

    def pow(self, x: int, e: int) -> int:
        self._check(x)
        if e < 0:
            x, e = self.inv(x), -e
        out = 1
        while e:
            if e & 1:
                out = self._mul[out][x]
            x = self._mul[x][x]
            e >>= 1
        return out

    def frobenius(self, x: int) -> int:
        return self.pow(x, self.p)

    def dot(self, u, v) -> int:
        """Standard inner product of two coordinate tuples."""
        if len(u) != len(v):
            raise ValueError("length mismatch")
        acc = 0
        for a, b in zip(u, v):
            acc = self._add[acc][self._mul[a][b]]
        return acc

    def __repr__(self) -> str:
        return f"Field(p={self.p}, k={self.k})"

    def __eq__(self, other) -> bool:
        return isinstance(other, Field) and (self.p, self.k) == (other.p, other.k)

    def __hash__(self) -> int:
        return hash((Field, self.p, self.k))


@lru_cache(maxsize=None)
def field(p: int, k: int = 1) -> Field:
    """The field GF(p^k) with the fixed deterministic modulus."""
    return Field(p, k)


@lru_cache(maxsize=None)
def field_of_order(q: int) -> Field:
    """The field of order q, for q a prime power <= 64."""
    if q < 2:
        raise ValueError(f"{q} is not a prime power")
    for p in range(2, q + 1):
        if is_prime(p) and q % p == 0:
            k = 0
            n = q
            while n % p == 0:
                n //= p
                k += 1
            if n != 1:
                raise ValueError(f"{q} is not a prime power")
            return field(p, k)
    raise ValueError(f"{q} is not a prime power")
