"""Residue-field arithmetic, truncated power-series rings and truncated elements of k.

The local field is realized in equal characteristic: R/P^N = F_q[t]/(t^N) with the
uniformizer equal to t.  Two layers are provided:

* scalar objects (:class:`FqElem`, :class:`LocalElem`) with explicit precision
  bookkeeping, used for parameters such as X(u, v) or generic elements;
* :class:`TruncatedRing`, a table-driven encoding of R/P^N as integers
  ``sum_i c_i q**i`` used for vectorized group arithmetic.
"""

from __future__ import annotations

import cmath
import itertools
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

#: relative precision given to elements described as exact (constants such as eps)
EXACT_DIGITS = 48


class PrecisionError(ValueError):
    """Raised when an operation would read beyond a precision window."""


class NoSolutionError(ValueError):
    """Raised when an equation has no solution in the requested ring."""


def _factor_prime_power(q: int) -> tuple[int, int]:
    if q < 3 or q % 2 == 0:
        raise ValueError(f"q must be an odd prime power, got {q}")
    p = next(d for d in range(2, q + 1) if q % d == 0)
    f, m = 0, q
    while m % p == 0:
        m //= p
        f += 1
    if m != 1:
        raise ValueError(f"q must be an odd prime power, got {q}")
    return p, f


def _poly_is_irreducible(poly: tuple[int, ...], p: int) -> bool:
    # poly: monic, coefficients low->high; brute force over monic factors of degree <= deg/2
    deg = len(poly) - 1
    for k in range(1, deg // 2 + 1):
        for low in itertools.product(range(p), repeat=k):
            div = list(low) + [1]
            rem = list(poly)
            for shift in range(deg - k, -1, -1):
                c = rem[shift + k] % p
                if c:
                    for i, dc in enumerate(div):
                        rem[shift + i] = (rem[shift + i] - c * dc) % p
            if not any(r % p for r in rem[:k]):
                return False
    return True


class ResidueField:
    """Tables for F_q, q = p**f.  Elements are ints 0..q-1 (base-p digit vectors)."""

    def __init__(self, q: int):
        p, f = _factor_prime_power(q)
        self.p, self.f, self.q = p, f, q
        digits = np.array([[(x // p**i) % p for i in range(f)] for x in range(q)], dtype=np.int64)
        weights = p ** np.arange(f)
        self.add = ((digits[:, None, :] + digits[None, :, :]) % p) @ weights
        self.neg = ((-digits) % p) @ weights
        if f == 1:
            self.modulus_poly: tuple[int, ...] = (0, 1)
            xs = np.arange(q)
            self.mul = (xs[:, None] * xs[None, :]) % p
        else:
            self.modulus_poly = next(
                tuple(low) + (1,)
                for low in itertools.product(range(p), repeat=f)
                if low[0] != 0 and _poly_is_irreducible(tuple(low) + (1,), p)
            )
            self.mul = np.zeros((q, q), dtype=np.int64)
            for x in range(q):
                for y in range(q):
                    self.mul[x, y] = self._poly_mul(digits[x], digits[y]) @ weights
        self.sub = self.add[:, self.neg]
        self.inv = np.full(q, -1, dtype=np.int64)
        for x in range(1, q):
            self.inv[x] = int(np.nonzero(self.mul[x] == 1)[0][0])
        # trace to F_p: sum of Frobenius conjugates, read off as the constant digit
        frob = np.arange(q)
        acc = np.zeros(q, dtype=np.int64)
        for _ in range(f):
            acc = self.add[acc, frob]
            frob = self._power_table(frob, p)
        self.trace = acc % p
        sq = np.zeros(q, dtype=bool)
        self.sqrt = np.full(q, -1, dtype=np.int64)
        for x in range(q - 1, 0, -1):
            s = int(self.mul[x, x])
            sq[s] = True
            self.sqrt[s] = x
        self.sqrt[0] = 0
        self.is_square = sq
        self.minus_one = int(self.neg[1])
        self.squares = tuple(int(x) for x in range(1, q) if sq[x])
        nonsq = [x for x in range(1, q) if not sq[x]]
        self.eps = self.minus_one if not sq[self.minus_one] else nonsq[0]
        self.generator = next(g for g in range(1, q) if self._order(g) == q - 1)
        self.log = np.full(q, -1, dtype=np.int64)
        x = 1
        for k in range(q - 1):
            self.log[x] = k
            x = int(self.mul[x, self.generator])

    def _poly_mul(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        p, f = self.p, self.f
        prod = np.zeros(2 * f - 1, dtype=np.int64)
        for i in range(f):
            prod[i : i + f] += a[i] * b
        prod %= p
        mod = self.modulus_poly
        for k in range(2 * f - 2, f - 1, -1):
            c = prod[k]
            if c:
                for i in range(f + 1):
                    prod[k - f + i] = (prod[k - f + i] - c * mod[i]) % p
        return prod[:f]

    def _power_table(self, xs: np.ndarray, e: int) -> np.ndarray:
        out = np.ones_like(xs)
        for _ in range(e):
            out = self.mul[out, xs]
        return out

    def _order(self, g: int) -> int:
        x, k = g, 1
        while x != 1:
            x = int(self.mul[x, g])
            k += 1
        return k

    def power(self, x: int, e: int) -> int:
        if x == 0:
            return 0 if e > 0 else 1
        k = (int(self.log[x]) * e) % (self.q - 1)
        out = 1
        for _ in range(k):
            out = int(self.mul[out, self.generator])
        return out

    def psi0(self, x: int) -> complex:
        """The additive character psi_0(tr(x)) of F_q."""
        return cmath.exp(2j * math.pi * int(self.trace[x]) / self.p)


@lru_cache(maxsize=None)
def residue_field(q: int) -> ResidueField:
    return ResidueField(q)


@dataclass(frozen=True)
class FieldConfig:
    """Parameters of the local field: q = p**f and the fixed non-square eps."""

    p: int
    f: int
    q: int
    eps: int
    backend: str = "equal-characteristic"

    @staticmethod
    def for_q(q: int) -> "FieldConfig":
        fld = residue_field(q)
        return FieldConfig(p=fld.p, f=fld.f, q=q, eps=fld.eps)

    @property
    def field(self) -> ResidueField:
        return residue_field(self.q)

    @property
    def minus_one_is_square(self) -> bool:
        return bool(self.field.is_square[self.field.minus_one])


@dataclass(frozen=True)
class FqElem:
    q: int
    value: int

    @property
    def field(self) -> ResidueField:
        return residue_field(self.q)

    @property
    def coefficients(self) -> tuple[int, ...]:
        p = self.field.p
        return tuple((self.value // p**i) % p for i in range(self.field.f))

    def __add__(self, other: "FqElem") -> "FqElem":
        return FqElem(self.q, int(self.field.add[self.value, other.value]))

    def __sub__(self, other: "FqElem") -> "FqElem":
        return FqElem(self.q, int(self.field.sub[self.value, other.value]))

    def __mul__(self, other: "FqElem") -> "FqElem":
        return FqElem(self.q, int(self.field.mul[self.value, other.value]))

    def __neg__(self) -> "FqElem":
        return FqElem(self.q, int(self.field.neg[self.value]))

    def inverse(self) -> "FqElem":
        if self.value == 0:
            raise ZeroDivisionError("inverse of 0 in F_q")
        return FqElem(self.q, int(self.field.inv[self.value]))

    def is_square(self) -> bool:
        return bool(self.field.is_square[self.value])


def _fq_poly_mul(fld: ResidueField, a: tuple[int, ...], b: tuple[int, ...], length: int) -> list[int]:
    out = [0] * length
    for i, ai in enumerate(a):
        if ai == 0 or i >= length:
            continue
        for j, bj in enumerate(b[: length - i]):
            if bj:
                out[i + j] = int(fld.add[out[i + j], fld.mul[ai, bj]])
    return out


@dataclass(frozen=True)
class LocalElem:
    """sum_i coeffs[i] * pi**(val_offset + i), known modulo pi**(val_offset + len(coeffs)).

    Canonical form: ``coeffs[0] != 0``, or ``coeffs == ()`` for a zero known modulo
    ``pi**val_offset``.
    """

    q: int
    val_offset: int
    coeffs: tuple[int, ...]

    # ---- construction ---------------------------------------------------------
    @staticmethod
    def make(q: int, val_offset: int, coeffs) -> "LocalElem":
        coeffs = tuple(int(c) for c in coeffs)
        k = 0
        while k < len(coeffs) and coeffs[k] == 0:
            k += 1
        return LocalElem(q, val_offset + k, coeffs[k:])

    @staticmethod
    def monomial(q: int, c: int, k: int, rel_prec: int = EXACT_DIGITS) -> "LocalElem":
        """c * pi**k with c in F_q, carrying ``rel_prec`` digits of precision."""
        return LocalElem.make(q, k, (c,) + (0,) * (rel_prec - 1))

    @staticmethod
    def zero(q: int, precision: int) -> "LocalElem":
        return LocalElem(q, precision, ())

    @staticmethod
    def one(q: int, rel_prec: int = EXACT_DIGITS) -> "LocalElem":
        return LocalElem.monomial(q, 1, 0, rel_prec)

    @staticmethod
    def from_index(q: int, index: int, N: int, shift: int = 0) -> "LocalElem":
        """Element of R/P^N given by its ring index, times pi**shift."""
        digits = [(index // q**i) % q for i in range(N)]
        return LocalElem.make(q, shift, digits)

    # ---- basic properties -----------------------------------------------------
    @property
    def field(self) -> ResidueField:
        return residue_field(self.q)

    @property
    def precision(self) -> int:
        """Absolute precision: the element is known modulo pi**precision."""
        return self.val_offset + len(self.coeffs)

    def is_zero(self) -> bool:
        return not self.coeffs

    def val(self) -> float | int:
        return math.inf if self.is_zero() else self.val_offset

    def coefficient(self, k: int) -> int:
        """Coefficient of pi**k; raises if k lies beyond the window."""
        if k >= self.precision:
            raise PrecisionError(f"coefficient of pi^{k} unknown (precision {self.precision})")
        if k < self.val_offset:
            return 0
        return self.coeffs[k - self.val_offset]

    def truncate(self, precision: int) -> "LocalElem":
        if precision > self.precision:
            raise PrecisionError("cannot extend precision")
        if precision <= self.val_offset:
            return LocalElem.zero(self.q, precision)
        return LocalElem.make(self.q, self.val_offset, self.coeffs[: precision - self.val_offset])

    def shift(self, k: int) -> "LocalElem":
        """Multiplication by pi**k."""
        return LocalElem(self.q, self.val_offset + k, self.coeffs)

    def leading(self) -> int:
        if self.is_zero():
            raise PrecisionError("zero has no leading coefficient on its window")
        return self.coeffs[0]

    # ---- arithmetic -----------------------------------------------------------
    def __add__(self, other: "LocalElem") -> "LocalElem":
        prec = min(self.precision, other.precision)
        lo = min(self.val_offset, other.val_offset)
        fld = self.field
        out = []
        for k in range(lo, prec):
            a = self.coefficient(k) if k >= self.val_offset else 0
            b = other.coefficient(k) if k >= other.val_offset else 0
            out.append(int(fld.add[a, b]))
        if prec <= lo:
            return LocalElem.zero(self.q, prec)
        return LocalElem.make(self.q, lo, out)

    def __neg__(self) -> "LocalElem":
        fld = self.field
        return LocalElem(self.q, self.val_offset, tuple(int(fld.neg[c]) for c in self.coeffs))

    def __sub__(self, other: "LocalElem") -> "LocalElem":
        return self + (-other)

    def __mul__(self, other: "LocalElem") -> "LocalElem":
        v1 = self.val_offset
        v2 = other.val_offset
        prec = min(v1 + other.precision, v2 + self.precision)
        if self.is_zero() or other.is_zero():
            return LocalElem.zero(self.q, prec)
        length = prec - v1 - v2
        if length <= 0:
            return LocalElem.zero(self.q, prec)
        return LocalElem.make(self.q, v1 + v2, _fq_poly_mul(self.field, self.coeffs, other.coeffs, length))

    def scale(self, c: int) -> "LocalElem":
        """Multiplication by the constant c in F_q."""
        fld = self.field
        if c == 0:
            return LocalElem.zero(self.q, self.precision)
        return LocalElem(self.q, self.val_offset, tuple(int(fld.mul[c, a]) for a in self.coeffs))

    def inverse(self) -> "LocalElem":
        if self.is_zero():
            raise ZeroDivisionError("inverse of an element that is zero on its window")
        fld = self.field
        n = len(self.coeffs)
        a0inv = int(fld.inv[self.coeffs[0]])
        inv = [a0inv] + [0] * (n - 1)
        for k in range(1, n):
            s = 0
            for i in range(1, k + 1):
                s = int(fld.add[s, fld.mul[self.coeffs[i], inv[k - i]]])
            inv[k] = int(fld.mul[fld.neg[s], a0inv])
        return LocalElem(self.q, -self.val_offset, tuple(inv))

    def __truediv__(self, other: "LocalElem") -> "LocalElem":
        return self * other.inverse()

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, LocalElem):
            return NotImplemented
        return (self.q, self.val_offset, self.coeffs) == (other.q, other.val_offset, other.coeffs)

    def __hash__(self) -> int:
        return hash((self.q, self.val_offset, self.coeffs))

    def congruent(self, other: "LocalElem", k: int) -> bool:
        """x == y modulo pi**k."""
        diff = self - other
        if diff.precision < k:
            raise PrecisionError(f"cannot decide congruence mod pi^{k}")
        return diff.is_zero() or diff.val_offset >= k

    def to_index(self, N: int) -> int:
        """Ring index of the image in R/P^N (requires val >= 0 and precision >= N)."""
        if self.precision < N:
            raise PrecisionError(f"need precision {N}, have {self.precision}")
        if not self.is_zero() and self.val_offset < 0:
            raise ValueError("element is not integral")
        return sum(self.coefficient(k) * self.q**k for k in range(N) if k >= self.val_offset)

    def __repr__(self) -> str:
        if self.is_zero():
            return f"LocalElem(0 mod pi^{self.precision})"
        terms = [f"{c}*pi^{self.val_offset + i}" for i, c in enumerate(self.coeffs[:6]) if c]
        more = " + ..." if len(self.coeffs) > 6 else ""
        return f"LocalElem({' + '.join(terms)}{more} mod pi^{self.precision})"


# ---- operations ---------------------------------------------------------------

def val(x: LocalElem) -> float | int:
    return x.val()


SQUARE_CLASS_LABELS = ("1", "eps", "pi", "eps*pi")


def square_class(u: LocalElem) -> str:
    """Label in {1, eps, pi, eps*pi} of the class of u in k^x/(k^x)^2."""
    if u.is_zero():
        raise PrecisionError("square class of an element that is zero on its window")
    nonsq = not u.field.is_square[u.leading()]
    return SQUARE_CLASS_LABELS[2 * (u.val_offset % 2) + int(nonsq)]


def psi(x: LocalElem) -> complex:
    """The fixed additive character: psi_0 of the trace of the pi**0 coefficient."""
    if x.precision < 1:
        raise PrecisionError("window excludes the pi^0 coefficient")
    return x.field.psi0(x.coefficient(0))


def solve_unit_square(c: LocalElem, N: int) -> LocalElem:
    """The a = 1 mod P with a**2 = 1 + c mod P**N."""
    if c.is_zero() and c.precision >= N:
        return LocalElem.one(c.q, N)
    if c.val_offset < 1:
        if c.val_offset == 0 and not c.field.is_square[c.field.add[1, c.leading()]]:
            raise NoSolutionError("1 + c is not a square")
        raise NoSolutionError("need val(c) >= 1 for a solution congruent to 1")
    if c.precision < N:
        raise PrecisionError(f"c known only modulo pi^{c.precision}")
    one = LocalElem.one(c.q, N)
    target = (one + c).truncate(N)
    half = LocalElem.monomial(c.q, int(c.field.inv[c.field.add[1, 1]]), 0, N)
    a = one
    for _ in range(max(1, N.bit_length() + 1)):
        a = (half * (a + target / a)).truncate(N)
    if not (a * a).congruent(target, N):  # pragma: no cover - Newton converges quadratically
        raise NoSolutionError("Hensel iteration failed")
    return a


def xi(q: int, u: int) -> complex:
    """Gauss-type sum over the nonzero squares S of F_q: sum_{y in S} psi(u*y)."""
    if u % q == 0:
        raise ValueError("xi(u) needs u != 0")
    fld = residue_field(q)
    return sum(fld.psi0(int(fld.mul[u, y])) for y in fld.squares)


# ---- vectorized ring ------------------------------------------------------------

class TruncatedRing:
    """R/P^N = F_q[t]/(t^N) with elements encoded as ints sum_i c_i q**i.

    All operations are numpy table lookups so that they broadcast over arrays.
    """

    def __init__(self, q: int, N: int):
        if N < 1:
            raise ValueError("N must be >= 1")
        self.q, self.N = q, N
        self.size = M = q**N
        if M > 2500:
            raise MemoryError(f"ring tables for q^N = {M} exceed the configured limit")
        fld = residue_field(q)
        self.fld = fld
        dtype = np.int32
        idx = np.arange(M)
        self.digits = np.stack([(idx // q**i) % q for i in range(N)], axis=1)
        w = q ** np.arange(N)
        D = self.digits
        self.add = np.zeros((M, M), dtype=dtype)
        for i in range(N):
            self.add += (fld.add[D[:, None, i], D[None, :, i]] * w[i]).astype(dtype)
        self.neg = (fld.neg[D] @ w).astype(dtype)
        self.sub = self.add[:, self.neg]
        self.mul = np.zeros((M, M), dtype=dtype)
        for k in range(N):
            coef = np.zeros((M, M), dtype=np.int64)
            for i in range(k + 1):
                coef = fld.add[coef, fld.mul[D[:, None, i], D[None, :, k - i]]]
            self.mul += (coef * w[k]).astype(dtype)
        self.val = np.full(M, N, dtype=np.int64)
        for k in range(N - 1, -1, -1):
            self.val[D[:, k] != 0] = k
        self.inv = np.full(M, -1, dtype=dtype)
        units = np.nonzero(self.val == 0)[0]
        one_hits = np.nonzero(self.mul[np.ix_(units, units)] == 1)
        self.inv[units[one_hits[0]]] = units[one_hits[1]]
        self.is_square = np.zeros(M, dtype=bool)
        self.is_square[np.unique(self.mul[idx, idx])] = True
        tr = fld.trace[D]  # (M, N)
        self._psi_digit = np.exp(2j * np.pi * tr / fld.p)  # value Psi(pi^{-m} x) at column m

    # scalar helpers
    def elem(self, x: LocalElem) -> int:
        return x.to_index(self.N)

    def local(self, idx: int, shift: int = 0) -> LocalElem:
        return LocalElem.from_index(self.q, int(idx), self.N, shift)

    def const(self, c: int) -> int:
        """Index of the constant c in F_q."""
        return int(c)

    # vectorized helpers
    def psi_shift(self, x, m: int):
        """Psi(pi**(-m) * x) for x in R/P^N (needs m < N)."""
        if not 0 <= m < self.N:
            raise PrecisionError(f"Psi(pi^-{m} x) needs modulus > {m}, have {self.N}")
        return self._psi_digit[x, m]

    def in_ideal(self, x, k: int):
        """x in P^k."""
        if k <= 0:
            return np.ones(np.shape(x), dtype=bool)
        if k >= self.N:
            return np.asarray(x) == 0
        return np.asarray(x) % (self.q**k) == 0

    def in_units(self, x, m: int):
        """x in U_m (units for m = 0, else 1 + P^m)."""
        if m <= 0:
            return self.val[x] == 0
        return self.in_ideal(self.sub[x, 1], m)

    def times_pi(self, x, e: int):
        """x * pi**e, for e >= 0."""
        return (np.asarray(x) * self.q**e) % self.size

    def div_pi(self, x, e: int):
        """x / pi**e, known modulo P^(N-e); high digits are zero.  Requires val(x) >= e."""
        return np.asarray(x) // self.q**e

    def reduce(self, x, N2: int):
        return np.asarray(x) % (self.q**N2)

    def power(self, x: int, e: int) -> int:
        out = 1
        for _ in range(e):
            out = int(self.mul[out, x])
        return out


@lru_cache(maxsize=None)
def truncated_ring(q: int, N: int) -> TruncatedRing:
    return TruncatedRing(q, N)
