"""Class functions on finite quotients: induction, restriction, conjugation, inner products.

Sums over subgroups are reduced shard by shard with a fixed shard size; the partial
sums are combined with ``math.fsum`` so the result does not depend on the number of
worker threads.
"""

from __future__ import annotations

import math
import os
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np

from .sl2group import (
    Array,
    QuotientGroup,
    ShapeSubgroup,
    Subgroup,
    congruence_shape,
)

DEFAULT_TOL = 1e-6
SHARD = 1 << 15

_threads: int | None = None


def set_threads(n: int | None) -> None:
    """Worker count for sharded sums (None: use $SL2B_THREADS, default 1)."""
    global _threads
    _threads = n


def get_threads() -> int:
    if _threads is not None:
        return max(1, _threads)
    return max(1, int(os.environ.get("SL2B_THREADS", "1")))


def sharded_sum(fn: Callable[[Array], Array], elements: Array | Callable[[], object]) -> complex:
    """sum(fn(chunk)) over fixed-size shards of ``elements``, deterministic in thread count."""
    if callable(elements):
        shards = list(elements())
    else:
        shards = [elements[i : i + SHARD] for i in range(0, len(elements), SHARD)]
    if not shards:
        return 0j

    def part(chunk):
        v = np.asarray(fn(chunk))
        return complex(v.sum())

    n = get_threads()
    if n > 1 and len(shards) > 1:
        with ThreadPoolExecutor(max_workers=n) as pool:
            parts = list(pool.map(part, shards))
    else:
        parts = [part(s) for s in shards]
    return complex(math.fsum(p.real for p in parts), math.fsum(p.imag for p in parts))


def nearest_integer(z: complex, tol: float = DEFAULT_TOL) -> int:
    n = round(z.real)
    if abs(z - n) > tol:
        raise ValueError(f"value {z} is not within {tol} of an integer")
    return int(n)


def _stable_seed(key) -> int:
    return zlib.crc32(repr(key).encode())


# ---------------------------------------------------------------------------
# class functions
# ---------------------------------------------------------------------------

class ClassFunction:
    """A complex-valued function on a subgroup (``support``) of SL2(R/P^N)."""

    G: QuotientGroup
    support: Subgroup
    name: str = "f"

    @property
    def N(self) -> int:
        return self.G.N

    def _prepare(self, A: Array, N_in: int | None) -> Array:
        A = np.asarray(A, dtype=np.int64)
        if N_in is None or N_in == self.N:
            return A
        if N_in < self.N:
            raise ValueError(f"{self.name} needs modulus {self.N}, got elements mod P^{N_in}")
        return A % (self.G.q**self.N)

    def __call__(self, A: Array, N_in: int | None = None) -> Array:
        """Values at elements of the support (elements given mod P^N_in, default N)."""
        return self._values(self._prepare(A, N_in))

    def on_support(self, A: Array, N_in: int | None = None) -> tuple[Array, Array]:
        """(membership mask, values) for arbitrary elements; values are 0 off the support."""
        A = self._prepare(A, N_in)
        mask = self.support.contains(A)
        vals = np.zeros(len(A), dtype=complex)
        if mask.any():
            vals[mask] = self._values(A[mask])
        return mask, vals

    def _values(self, A: Array) -> Array:  # pragma: no cover - interface
        raise NotImplementedError

    @property
    def degree(self) -> float:
        return float(self(self.G.identity()[None, :])[0].real)

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.name}, N={self.N})"


class FunctionCF(ClassFunction):
    """Class function given by a vectorized rule (values on support elements only)."""

    def __init__(self, support: Subgroup, fn: Callable[[Array], Array], name: str = "f",
                 on_support: Callable[[Array], tuple[Array, Array]] | None = None):
        self.G = support.G
        self.support = support
        self.fn = fn
        self.name = name
        self._on_support = on_support

    def _values(self, A: Array) -> Array:
        return np.asarray(self.fn(A), dtype=complex)

    def on_support(self, A: Array, N_in: int | None = None) -> tuple[Array, Array]:
        if self._on_support is None:
            return super().on_support(A, N_in)
        return self._on_support(self._prepare(A, N_in))


class ScaledCF(ClassFunction):
    """Pointwise product of class functions on a common support (or a scalar multiple)."""

    def __init__(self, parts: list[ClassFunction], scalar: complex = 1.0, name: str = "prod"):
        self.parts = parts
        self.G = parts[0].G
        self.support = parts[0].support
        self.scalar = scalar
        self.name = name

    def _values(self, A: Array) -> Array:
        out = np.full(len(A), self.scalar, dtype=complex)
        for p in self.parts:
            out *= p(A)
        return out


def trivial_character(H: Subgroup) -> FunctionCF:
    return FunctionCF(H, lambda A: np.ones(len(A), dtype=complex), name="1")


_transversal_cache: dict = {}


def right_transversal(H: Subgroup, ambient: Subgroup, index: int | None = None) -> Array:
    """Elements x_i of ``ambient`` with ambient = disjoint union of H x_i (cached)."""
    key = (H.key, ambient.key)
    if key in _transversal_cache:
        return _transversal_cache[key]
    G = ambient.G
    if index is None:
        if ambient.order % H.order:
            raise ValueError(f"{H} is not a subgroup of {ambient} (order does not divide)")
        index = ambient.order // H.order
    rng = np.random.default_rng(_stable_seed(key))
    reps = [G.identity()]
    rep_invs = [G.identity()]
    batch = max(64, 4 * index)
    stalls = 0
    while len(reps) < index:
        C = ambient.random(rng, batch)
        covered = np.zeros(len(C), dtype=bool)
        for xi in rep_invs:
            covered |= H.contains(G.mul(C, xi))
        added = False
        while not covered.all() and len(reps) < index:
            j = int(np.argmin(covered))
            reps.append(C[j].copy())
            rep_invs.append(G.inv(C[j]))
            covered |= H.contains(G.mul(C, rep_invs[-1]))
            added = True
        stalls = 0 if added else stalls + 1
        if stalls > 200:
            raise RuntimeError(f"transversal search for {H} in {ambient} stalled at {len(reps)}/{index}")
    out = np.array(reps, dtype=np.int64)
    _transversal_cache[key] = out
    return out


class InducedCF(ClassFunction):
    """Ind_H^{ambient} chi evaluated through a fixed right transversal of H."""

    def __init__(self, chi: ClassFunction, H: Subgroup, ambient: Subgroup | None = None, name: str | None = None):
        self.chi = chi
        self.H = H
        self.G = H.G
        self.support = ambient if ambient is not None else ShapeSubgroup(self.G, congruence_shape(0))
        self.name = name or f"Ind({chi.name})"
        if chi.N > self.G.N:
            raise ValueError("inducing character has larger modulus than the inducing subgroup")

    @property
    def transversal(self) -> Array:
        return right_transversal(self.H, self.support)

    @property
    def index(self) -> int:
        return len(self.transversal)

    def _values(self, A: Array) -> Array:
        G = self.G
        X = self.transversal
        Xinv = G.inv(X)
        out = np.zeros(len(A), dtype=complex)
        for x, xinv in zip(X, Xinv):
            Y = G.mul(G.mul(x[None, :], A), xinv[None, :])
            mask, vals = self._chi_on_H(Y)
            out += vals
        return out

    def _chi_on_H(self, Y: Array) -> tuple[Array, Array]:
        mask = self.H.contains(Y)
        vals = np.zeros(len(Y), dtype=complex)
        if mask.any():
            vals[mask] = self.chi(Y[mask], self.G.N)
        return mask, vals

    @property
    def degree(self) -> float:
        return self.index * self.chi.degree


def induce(chi: ClassFunction, H: Subgroup, G: Subgroup | None = None) -> InducedCF:
    return InducedCF(chi, H, G)


def restrict(f: ClassFunction, H: Subgroup, check: bool = True) -> FunctionCF:
    if check:
        sample = H.random(np.random.default_rng(_stable_seed(H.key)), 64)
        if not f.support.contains(sample).all():
            raise ValueError(f"{H} is not contained in the support of {f.name}")
    return FunctionCF(H, lambda A: f(A), name=f"Res({f.name})")


class ConjugatedSubgroup(Subgroup):
    """g H g^{-1}."""

    def __init__(self, H: Subgroup, g: Array):
        self.G = H.G
        self.H = H
        self.g = np.asarray(g, dtype=np.int64)
        self.ginv = self.G.inv(self.g)
        self.name = f"{H.name}^g"

    @property
    def key(self) -> tuple:
        return ("conj", self.H.key, tuple(int(x) for x in self.g))

    def contains(self, A: Array) -> Array:
        return self.H.contains(self.G.mul(self.G.mul(self.ginv[None, :], A), self.g[None, :]))

    def elements(self) -> Array:
        return self.G.conj(self.g[None, :], self.H.elements())

    @property
    def order(self) -> int:
        return self.H.order


def conjugate_cf(f: ClassFunction, g: Array) -> FunctionCF:
    """f^g(h) = f(g^{-1} h g), supported on g H g^{-1}."""
    G = f.G
    g = np.asarray(g, dtype=np.int64)
    ginv = G.inv(g)
    support = ConjugatedSubgroup(f.support, g)
    return FunctionCF(support, lambda A: f(G.mul(G.mul(ginv[None, :], A), g[None, :])), name=f"{f.name}^g")


# ---------------------------------------------------------------------------
# inner products
# ---------------------------------------------------------------------------

def _frobenius_base(f: ClassFunction) -> tuple[ClassFunction, Subgroup]:
    """Peel induction layers: <Ind_H chi, F> = <chi, F|_H>."""
    while isinstance(f, InducedCF) and isinstance(f.chi, ClassFunction):
        inner = f.chi
        H = f.H
        if isinstance(inner, InducedCF) and inner.support.key == H.key:
            f = inner
            continue
        return inner, H
    return f, f.support


def inner_product(f1: ClassFunction, f2: ClassFunction, over: Subgroup | None = None) -> complex:
    """(1/|H|) sum_{h in H} f1(h) conj(f2(h)).

    Without ``over``, f1 and f2 are treated as class functions on a common group and the
    sum runs over the smallest inducing subgroup reachable by Frobenius reciprocity.
    """
    if over is not None:
        N = over.G.N

        def term(chunk):
            return f1(chunk, N) * np.conj(f2(chunk, N))

        return sharded_sum(term, over.elements()) / over.order
    b1, H1 = _frobenius_base(f1)
    b2, H2 = _frobenius_base(f2)
    if H2.order < H1.order:
        return inner_product(f2, f1).conjugate()
    N = H1.G.N
    if b1 is f1:
        return inner_product(f1, f2, over=f1.support)

    def term(chunk):
        return b1(chunk, N) * np.conj(f2(chunk, N))

    return sharded_sum(term, H1.elements()) / H1.order


def intertwining_number(f1: ClassFunction, f2: ClassFunction, tol: float = DEFAULT_TOL) -> int:
    return nearest_integer(inner_product(f1, f2), tol)


def is_irreducible(f: ClassFunction, tol: float = DEFAULT_TOL) -> bool:
    return intertwining_number(f, f, tol) == 1


def depth_of(f: ClassFunction, tol: float = DEFAULT_TOL) -> int:
    """Least n >= 0 with K_{n+1} in the kernel of f (f a character of K/K_N)."""
    G = f.G
    one = f.degree
    depth = G.N - 1
    for m in range(G.N - 1, 0, -1):
        K_m = ShapeSubgroup(G, congruence_shape(m))
        trivial = True
        for chunk in (K_m.elements()[i : i + SHARD] for i in range(0, K_m.order, SHARD)):
            if np.abs(f(chunk) - one).max() > tol:
                trivial = False
                break
        if not trivial:
            return depth
        depth = m - 1
    return depth


# ---------------------------------------------------------------------------
# characters of finite abelian groups
# ---------------------------------------------------------------------------

@dataclass
class AbelianCharacterGroup:
    """Polycyclic presentation of a finite abelian group and its character group.

    ``coords[i]`` are exponents of element i in the chosen generators, and each
    character is a vector of rationals x_j with chi(g_j) = exp(2 pi i x_j).
    """

    elements: Array
    keys: Array
    coords: Array
    generators: Array
    relations: list[tuple[int, tuple[int, ...]]]
    characters: list[tuple[Fraction, ...]]

    def index_of(self, keys: Array) -> Array:
        order = np.argsort(self.keys)
        pos = np.searchsorted(self.keys[order], keys)
        pos = np.minimum(pos, len(order) - 1)
        found = self.keys[order][pos] == keys
        if not np.all(found):
            raise KeyError("element not in the abelian group")
        return order[pos]

    def values(self, char: tuple[Fraction, ...], keys: Array) -> Array:
        idx = self.index_of(np.asarray(keys))
        x = np.array([float(v) for v in char])
        return np.exp(2j * np.pi * (self.coords[idx] @ x))

    def table(self, char: tuple[Fraction, ...]) -> Array:
        """Values on self.elements in order."""
        x = np.array([float(v) for v in char])
        return np.exp(2j * np.pi * (self.coords @ x))


def abelian_characters(elements: Array, key_fn: Callable[[Array], Array],
                       mul_fn: Callable[[Array, Array], Array], identity: Array) -> AbelianCharacterGroup:
    """All characters of the abelian group given by ``elements`` (generator/relation solve)."""
    elements = np.asarray(elements)
    keys = key_fn(elements)
    order_idx = np.argsort(keys)
    elements, keys = elements[order_idx], keys[order_idx]
    n = len(elements)
    id_key = key_fn(identity[None, ...])[0]

    # element orders
    orders = np.zeros(n, dtype=np.int64)
    pw = elements.copy()
    k = 1
    while (orders == 0).any():
        hit = (key_fn(pw) == id_key) & (orders == 0)
        orders[hit] = k
        pw = mul_fn(pw, elements)
        k += 1
        if k > n + 1:
            raise RuntimeError("orders not found; is the set a group?")

    span_keys = np.array([id_key])
    span_elems = identity[None, ...].copy()
    span_coords = np.zeros((1, 0), dtype=np.int64)
    gens: list[Array] = []
    relations: list[tuple[int, tuple[int, ...]]] = []
    while len(span_keys) < n:
        in_span = np.isin(keys, span_keys)
        cand = np.nonzero(~in_span)[0]
        j = cand[np.argmax(orders[cand])]
        g = elements[j]
        lookup = {int(kk): i for i, kk in enumerate(span_keys)}
        # smallest m with g^m in span
        m, gm = 1, g[None, ...].copy()
        while int(key_fn(gm)[0]) not in lookup:
            gm = mul_fn(gm, g[None, ...])
            m += 1
        rel = tuple(int(c) for c in span_coords[lookup[int(key_fn(gm)[0])]])
        relations.append((m, rel))
        gens.append(g)
        new_elems = [span_elems]
        new_coords = [np.concatenate([span_coords, np.zeros((len(span_keys), 1), dtype=np.int64)], axis=1)]
        cur = span_elems
        for e in range(1, m):
            cur = mul_fn(cur, np.broadcast_to(g, cur.shape))
            new_elems.append(cur)
            c = np.concatenate([span_coords, np.full((len(span_keys), 1), e, dtype=np.int64)], axis=1)
            new_coords.append(c)
        span_elems = np.concatenate(new_elems)
        span_coords = np.concatenate(new_coords)
        span_keys = key_fn(span_elems)
        if len(np.unique(span_keys)) != len(span_keys):
            raise RuntimeError("span has repeated elements; group law not abelian?")
    coords = span_coords[np.argsort(span_keys)]
    # characters: x_j = (sum_i e_i x_i + k) / m_j mod 1
    chars: list[tuple[Fraction, ...]] = [()]
    for m, rel in relations:
        nxt = []
        for x in chars:
            base = sum((Fraction(e) * xi for e, xi in zip(rel, x)), Fraction(0))
            for kk in range(m):
                nxt.append(x + (((base + kk) / m) % 1,))
        chars = nxt
    if len(chars) != n:
        raise RuntimeError("character count mismatch")
    return AbelianCharacterGroup(elements, keys, coords, np.array(gens), relations, chars)
