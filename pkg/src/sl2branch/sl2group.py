"""Finite quotients SL2(R/P^N), shape-described subgroups and conjugating elements.

Group elements are rows ``(a, b, c, d)`` of ring indices (see
:class:`~sl2branch.localfield.TruncatedRing`) standing for the matrix
[[a, b], [c, d]].  All group operations act on ``(n, 4)`` integer arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from fractions import Fraction
from functools import cached_property, lru_cache

import numpy as np

from .localfield import LocalElem, PrecisionError, TruncatedRing, residue_field, truncated_ring

Array = np.ndarray


# ---------------------------------------------------------------------------
# the quotient group
# ---------------------------------------------------------------------------

class QuotientGroup:
    """SL2(R/P^N) with vectorized arithmetic."""

    def __init__(self, q: int, N: int):
        self.q, self.N = q, N
        self.ring: TruncatedRing = truncated_ring(q, N)
        self.M = self.ring.size
        self.order = (q**3 - q) * q ** (3 * (N - 1))

    def __repr__(self) -> str:
        return f"SL2(R/P^{self.N}), q={self.q}"

    # -- arithmetic --
    def mul(self, A: Array, B: Array) -> Array:
        R = self.ring
        a, b, c, d = A[..., 0], A[..., 1], A[..., 2], A[..., 3]
        e, f, g, h = B[..., 0], B[..., 1], B[..., 2], B[..., 3]
        mul, add = R.mul, R.add
        return np.stack(
            [
                add[mul[a, e], mul[b, g]],
                add[mul[a, f], mul[b, h]],
                add[mul[c, e], mul[d, g]],
                add[mul[c, f], mul[d, h]],
            ],
            axis=-1,
        )

    def inv(self, A: Array) -> Array:
        neg = self.ring.neg
        return np.stack([A[..., 3], neg[A[..., 1]], neg[A[..., 2]], A[..., 0]], axis=-1)

    def conj(self, X: Array, A: Array) -> Array:
        """X A X^{-1} (broadcasting)."""
        return self.mul(self.mul(X, A), self.inv(X))

    def det(self, A: Array) -> Array:
        R = self.ring
        return R.sub[R.mul[A[..., 0], A[..., 3]], R.mul[A[..., 1], A[..., 2]]]

    def identity(self, n: int | None = None) -> Array:
        I = np.array([1, 0, 0, 1], dtype=np.int64)
        return I if n is None else np.tile(I, (n, 1))

    def minus_identity(self) -> Array:
        m1 = int(self.ring.neg[1])
        return np.array([m1, 0, 0, m1], dtype=np.int64)

    def keys(self, A: Array) -> Array:
        A = np.asarray(A, dtype=np.int64)
        M = self.M
        return ((A[..., 0] * M + A[..., 1]) * M + A[..., 2]) * M + A[..., 3]

    def from_keys(self, keys: Array) -> Array:
        M = self.M
        k = np.asarray(keys, dtype=np.int64)
        d = k % M
        k = k // M
        c = k % M
        k = k // M
        return np.stack([k // M, k % M, c, d], axis=-1)

    def reduce(self, A: Array, N2: int) -> Array:
        """Image of A in SL2(R/P^N2)."""
        if N2 > self.N:
            raise PrecisionError(f"cannot lift from modulus {self.N} to {N2}")
        return np.asarray(A) % (self.q**N2)

    def is_element(self, A: Array) -> Array:
        return self.det(A) == 1

    # -- enumeration --
    def elements(self) -> Array:
        if self.order > 2 * 10**7:
            raise MemoryError(f"refusing to materialize {self.order} elements")
        return np.concatenate(list(self.iter_chunks()))

    def iter_chunks(self):
        """Yield all elements in deterministic chunks (sharded by the (1,1) entry)."""
        R = self.ring
        M = self.M
        allx = np.arange(M, dtype=np.int64)
        units = np.nonzero(R.val == 0)[0]
        nonunits = np.nonzero(R.val > 0)[0]
        for a in units:
            b, c = np.meshgrid(allx, allx, indexing="ij")
            b, c = b.ravel(), c.ravel()
            d = R.mul[R.inv[a], R.add[1, R.mul[b, c]]]
            yield np.stack([np.full_like(b, a), b, c, d], axis=-1)
        for a in nonunits:
            b, d = np.meshgrid(units, allx, indexing="ij")
            b, d = b.ravel(), d.ravel()
            c = R.mul[R.inv[b], R.sub[R.mul[a, d], 1]]
            yield np.stack([np.full_like(b, a), b, c, d], axis=-1)

    @cached_property
    def residue_group(self) -> "QuotientGroup":
        return quotient_group(self.q, 1)

    def random(self, rng: np.random.Generator, n: int) -> Array:
        """n independent uniform elements."""
        G1 = self.residue_group
        top = G1.elements()[rng.integers(0, G1.order, size=n)]
        lift = self.lift_residue(top)
        if self.N == 1:
            return lift
        kern = self.random_congruence(rng, n, 1)
        return self.mul(lift, kern)

    def lift_residue(self, A1: Array) -> Array:
        """A fixed set-theoretic section SL2(F_q) -> SL2(R/P^N)."""
        R = self.ring
        a, b, c, d = (A1[..., i].astype(np.int64) for i in range(4))
        unit = R.val[a] == 0
        d_new = R.mul[R.inv[np.where(unit, a, 1)], R.add[1, R.mul[b, c]]]
        c_new = R.mul[R.inv[np.where(unit, 1, b)], R.sub[R.mul[a, d], 1]]
        return np.stack([a, b, np.where(unit, c, c_new), np.where(unit, d_new, d)], axis=-1)

    def random_congruence(self, rng: np.random.Generator, n: int, m: int) -> Array:
        """n uniform elements of K_m / K_N (m >= 1)."""
        R = self.ring
        step = self.q**m
        span = self.q ** (self.N - m)
        a = R.add[1, rng.integers(0, span, size=n) * step]
        b = rng.integers(0, span, size=n) * step
        c = rng.integers(0, span, size=n) * step
        d = R.mul[R.inv[a], R.add[1, R.mul[b, c]]]
        return np.stack([a, b, c, d], axis=-1)

    # -- scalar convenience --
    def element(self, entries) -> Array:
        """Build an element from four LocalElem / int entries (ints are ring indices)."""
        out = []
        for x in entries:
            out.append(x.to_index(self.N) if isinstance(x, LocalElem) else int(x))
        A = np.array(out, dtype=np.int64)
        if self.det(A) != 1:
            raise ValueError("determinant is not 1")
        return A


@lru_cache(maxsize=None)
def quotient_group(q: int, N: int) -> QuotientGroup:
    return QuotientGroup(q, N)


@dataclass(frozen=True)
class GroupElement:
    """A single hashable element of SL2(R/P^N)."""

    q: int
    N: int
    entries: tuple[int, int, int, int]

    @staticmethod
    def from_array(G: QuotientGroup, A: Array) -> "GroupElement":
        return GroupElement(G.q, G.N, tuple(int(x) for x in A))

    @property
    def group(self) -> QuotientGroup:
        return quotient_group(self.q, self.N)

    def array(self) -> Array:
        return np.array(self.entries, dtype=np.int64)

    def __mul__(self, other: "GroupElement") -> "GroupElement":
        return GroupElement.from_array(self.group, self.group.mul(self.array(), other.array()))

    def inverse(self) -> "GroupElement":
        return GroupElement.from_array(self.group, self.group.inv(self.array()))

    def local_entries(self) -> tuple[LocalElem, ...]:
        return tuple(LocalElem.from_index(self.q, x, self.N) for x in self.entries)


# ---------------------------------------------------------------------------
# depths and shapes
# ---------------------------------------------------------------------------

def ceil_level(x: Fraction | int, plus: bool = False) -> int:
    """ceil(x), or the least integer > x when ``plus`` (the level of x+)."""
    x = Fraction(x)
    return math.floor(x) + 1 if plus else math.ceil(x)


@dataclass(frozen=True)
class SubgroupDescriptor:
    """Matrices [[a, b], [c, d]] with a, d in U_diag, b in P^upper, c in P^lower.

    ``relation = (lam, level)`` additionally demands c - lam*b in P^level.
    Levels may be negative (Laurent shapes); :meth:`in_K` intersects with K.
    """

    diag: int
    upper: int
    lower: int
    relation: tuple[LocalElem, int] | None = None
    name: str = ""

    def in_K(self) -> "SubgroupDescriptor":
        return replace(self, diag=max(self.diag, 0), upper=max(self.upper, 0), lower=max(self.lower, 0))

    def intersect(self, other: "SubgroupDescriptor") -> "SubgroupDescriptor":
        if self.relation and other.relation:
            raise ValueError("cannot intersect two relation descriptors")
        return SubgroupDescriptor(
            max(self.diag, other.diag),
            max(self.upper, other.upper),
            max(self.lower, other.lower),
            self.relation or other.relation,
            name=f"{self.name}&{other.name}",
        )

    def shifted(self, e: int) -> "SubgroupDescriptor":
        """Shape of diag(1, pi^e)^{-1} S diag(1, pi^e): upper level + e, lower level - e."""
        if self.relation:
            raise ValueError("shift of relation descriptors unsupported")
        return replace(self, upper=self.upper + e, lower=self.lower - e)

    @property
    def is_full(self) -> bool:
        return self.diag <= 0 and self.upper <= 0 and self.lower <= 0 and self.relation is None

    def contains(self, G: QuotientGroup, A: Array) -> Array:
        R = G.ring
        ok = R.in_ideal(A[..., 1], self.upper) & R.in_ideal(A[..., 2], self.lower)
        if self.diag > 0:
            ok &= R.in_units(A[..., 0], self.diag) & R.in_units(A[..., 3], self.diag)
        if self.relation is not None:
            lam, level = self.relation
            li = lam.to_index(G.N)
            ok &= R.in_ideal(R.sub[A[..., 2], R.mul[li, A[..., 1]]], level)
        return ok

    def elements(self, G: QuotientGroup) -> Array:
        sub = self.in_K()
        if sub.is_full:
            return G.elements()
        R = G.ring
        N = G.N
        q = G.q
        if sub.diag > 0:
            m = min(sub.diag, N)
            a = R.add[1, np.arange(q ** (N - m), dtype=np.int64) * q**m]
        else:
            a = np.nonzero(R.val == 0)[0]
        ub, lc = min(sub.upper, N), min(sub.lower, N)
        b = np.arange(q ** (N - ub), dtype=np.int64) * q**ub
        c = np.arange(q ** (N - lc), dtype=np.int64) * q**lc
        aa, bb, cc = (x.ravel() for x in np.meshgrid(a, b, c, indexing="ij"))
        dd = R.mul[R.inv[aa], R.add[1, R.mul[bb, cc]]]
        A = np.stack([aa, bb, cc, dd], axis=-1)
        return A[sub.contains(G, A)]

    def order(self, G: QuotientGroup) -> int:
        return len(self.elements(G))


# a few common shapes
def full_shape() -> SubgroupDescriptor:
    return SubgroupDescriptor(0, 0, 0, name="K")


def congruence_shape(m: int) -> SubgroupDescriptor:
    return SubgroupDescriptor(m, m, m, name=f"K_{m}")


def iwahori_type_shape(d: int) -> SubgroupDescriptor:
    """B K_d: lower-left entry in P^d."""
    return SubgroupDescriptor(0, 0, d, name=f"BK_{d}")


def opposite_borel_shape(N: int) -> SubgroupDescriptor:
    """B^op mod P^N: upper-right entry zero."""
    return SubgroupDescriptor(0, N, 0, name="Bop")


def moy_prasad(y: Fraction | int, r: Fraction | int, plus: bool = False) -> SubgroupDescriptor:
    """Shape of G_{y,r} (or G_{y,r+}): diag in U_ceil(r), upper P^ceil(r-y), lower P^ceil(r+y)."""
    y, r = Fraction(y), Fraction(r)
    if r < 0:
        raise ValueError("r must be non-negative")
    if y not in (0, Fraction(1, 2), 1):
        raise ValueError("y must be 0, 1/2 or 1")
    tag = "+" if plus else ""
    return SubgroupDescriptor(
        ceil_level(r, plus), ceil_level(r - y, plus), ceil_level(r + y, plus), name=f"G_{{{y},{r}{tag}}}"
    )


def shalika_gamma_shape(d: int) -> SubgroupDescriptor:
    """The level-d group G_{0,d/2} & G_{1/2,d/2}."""
    half = Fraction(d, 2)
    return moy_prasad(0, half).intersect(moy_prasad(Fraction(1, 2), half))


# ---------------------------------------------------------------------------
# subgroups bound to a quotient
# ---------------------------------------------------------------------------

class Subgroup:
    """Interface: a subgroup of a quotient group with membership test and enumerator."""

    G: QuotientGroup
    name: str = ""

    def contains(self, A: Array) -> Array:  # pragma: no cover - interface
        raise NotImplementedError

    def elements(self) -> Array:  # pragma: no cover - interface
        raise NotImplementedError

    @cached_property
    def order(self) -> int:
        return len(self.elements())

    @property
    def key(self) -> tuple:
        return (type(self).__name__, self.name, self.G.q, self.G.N)

    def random(self, rng: np.random.Generator, n: int) -> Array:
        els = self.elements()
        return els[rng.integers(0, len(els), size=n)]

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.name}, N={self.G.N})"


class ShapeSubgroup(Subgroup):
    def __init__(self, G: QuotientGroup, shape: SubgroupDescriptor):
        self.G = G
        self.shape = shape.in_K()
        self.name = shape.name or repr(shape)

    @property
    def key(self) -> tuple:
        s = self.shape
        return ("shape", s.diag, s.upper, s.lower, s.relation, self.G.q, self.G.N)

    def contains(self, A: Array) -> Array:
        return self.shape.contains(self.G, A)

    def elements(self) -> Array:
        return self.shape.elements(self.G)

    @cached_property
    def order(self) -> int:
        if self.shape.is_full:
            return self.G.order
        return len(self.elements())

    def random(self, rng: np.random.Generator, n: int) -> Array:
        if self.shape.is_full:
            return self.G.random(rng, n)
        return super().random(rng, n)

    @cached_property
    def level(self) -> int:
        """Largest m with this subgroup inside K_m (0 if none)."""
        s = self.shape
        if s.relation is None:
            return max(0, min(s.diag, s.upper, s.lower))
        return max(0, min(s.diag, s.upper, s.lower))


def full_group(G: QuotientGroup) -> ShapeSubgroup:
    return ShapeSubgroup(G, full_shape())


class ExplicitSubgroup(Subgroup):
    """A subgroup given by its element list (sorted keys for membership)."""

    def __init__(self, G: QuotientGroup, elements: Array, name: str = "explicit"):
        self.G = G
        keys = np.unique(G.keys(elements))
        self._keys = keys
        self._elements = G.from_keys(keys)
        self.name = name

    @property
    def key(self) -> tuple:
        return ("explicit", self.name, self.G.q, self.G.N, len(self._keys), int(self._keys.sum() % (1 << 61)))

    def contains(self, A: Array) -> Array:
        k = self.G.keys(A)
        pos = np.searchsorted(self._keys, k)
        pos = np.minimum(pos, len(self._keys) - 1)
        return self._keys[pos] == k

    def elements(self) -> Array:
        return self._elements

    @cached_property
    def order(self) -> int:
        return len(self._keys)


class ProductSubgroup(Subgroup):
    """H = A * B with B a shape subgroup and ``reps`` a transversal of A / (A & B).

    A must normalize B.  Elements factor uniquely as rep_i * b.
    """

    def __init__(self, G: QuotientGroup, reps: Array, base: ShapeSubgroup, name: str = "product"):
        self.G = G
        self.reps = np.asarray(reps, dtype=np.int64).reshape(-1, 4)
        self.rep_invs = G.inv(self.reps)
        self.base = base
        self.name = name
        # signature lookup: if B lies in K_m, an element's first row mod P^m equals that of its rep
        m = min(base.level, G.N)
        self._sig_level = m
        if m >= 1:
            sig = self._signature(self.reps)
            order = np.argsort(sig, kind="stable")
            self._sig_sorted = sig[order]
            self._sig_order = order
            counts = np.unique(sig, return_counts=True)[1]
            self._sig_mult = int(counts.max())

    def _signature(self, A: Array) -> Array:
        mod = self.G.q**self._sig_level
        return (A[..., 0] % mod) * mod + (A[..., 1] % mod)

    @property
    def key(self) -> tuple:
        return ("product", self.name, self.base.key, self.G.q, self.G.N, len(self.reps),
                int(self.G.keys(self.reps).sum() % (1 << 61)))

    def factor(self, A: Array) -> tuple[Array, Array]:
        """Return (rep index or -1, rep^{-1} A) for each element."""
        A = np.asarray(A).reshape(-1, 4)
        n = len(A)
        idx = np.full(n, -1, dtype=np.int64)
        rest = np.zeros_like(A)
        if self._sig_level >= 1:
            sig = self._signature(A)
            start = np.searchsorted(self._sig_sorted, sig, side="left")
            for j in range(self._sig_mult):
                pos = start + j
                valid = pos < len(self._sig_sorted)
                pos = np.where(valid, pos, 0)
                valid &= self._sig_sorted[pos] == sig
                valid &= idx < 0
                if not valid.any():
                    continue
                cand = self._sig_order[pos[valid]]
                g = self.G.mul(self.rep_invs[cand], A[valid])
                ok = self.base.contains(g)
                sel = np.nonzero(valid)[0][ok]
                idx[sel] = cand[ok]
                rest[sel] = g[ok]
            return idx, rest
        for i in range(len(self.reps)):
            todo = idx < 0
            if not todo.any():
                break
            g = self.G.mul(self.rep_invs[i], A[todo])
            ok = self.base.contains(g)
            sel = np.nonzero(todo)[0][ok]
            idx[sel] = i
            rest[sel] = g[ok]
        return idx, rest

    def contains(self, A: Array) -> Array:
        return self.factor(A)[0] >= 0

    def elements(self) -> Array:
        B = self.base.elements()
        return np.concatenate([self.G.mul(r, B) for r in self.reps])

    @cached_property
    def order(self) -> int:
        return len(self.reps) * self.base.order


def coset_reps(G: QuotientGroup, A_elements: Array, base: ShapeSubgroup) -> Array:
    """Transversal of A / (A & B) for a list of elements A normalizing B."""
    reps: list[Array] = []
    covered = np.zeros(len(A_elements), dtype=bool)
    for i in range(len(A_elements)):
        if covered[i]:
            continue
        r = A_elements[i]
        reps.append(r)
        covered |= base.contains(G.mul(G.inv(r)[None, :], A_elements))
    return np.array(reps, dtype=np.int64).reshape(-1, 4)


# ---------------------------------------------------------------------------
# Laurent matrices (Lie algebra elements and conjugating elements)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LaurentMatrix:
    """A 2x2 matrix with LocalElem entries."""

    a: LocalElem
    b: LocalElem
    c: LocalElem
    d: LocalElem

    @staticmethod
    def from_ints(q: int, rows, shifts=((0, 0), (0, 0))) -> "LaurentMatrix":
        (a, b), (c, d) = rows
        (sa, sb), (sc, sd) = shifts
        m = LocalElem.monomial
        return LaurentMatrix(m(q, a, sa), m(q, b, sb), m(q, c, sc), m(q, d, sd))

    @property
    def q(self) -> int:
        return self.a.q

    def entries(self) -> tuple[LocalElem, LocalElem, LocalElem, LocalElem]:
        return (self.a, self.b, self.c, self.d)

    def __mul__(self, o: "LaurentMatrix") -> "LaurentMatrix":
        return LaurentMatrix(
            self.a * o.a + self.b * o.c,
            self.a * o.b + self.b * o.d,
            self.c * o.a + self.d * o.c,
            self.c * o.b + self.d * o.d,
        )

    def det(self) -> LocalElem:
        return self.a * self.d - self.b * self.c

    def inverse(self) -> "LaurentMatrix":
        dinv = self.det().inverse()
        return LaurentMatrix(self.d * dinv, -self.b * dinv, -self.c * dinv, self.a * dinv)

    def conjugate(self, g: "LaurentMatrix") -> "LaurentMatrix":
        """g * self * g^{-1}."""
        return g * self * g.inverse()

    def trace(self) -> LocalElem:
        return self.a + self.d

    def equals(self, o: "LaurentMatrix", precision: int) -> bool:
        return all(x.congruent(y, precision) for x, y in zip(self.entries(), o.entries()))

    def to_array(self, G: QuotientGroup) -> Array:
        return np.array([x.to_index(G.N) for x in self.entries()], dtype=np.int64)


def lie_X(u: LocalElem, v: LocalElem) -> LaurentMatrix:
    """X(u, v) = [[0, u], [v, 0]]."""
    z = LocalElem.zero(u.q, min(u.precision, v.precision) + 64)
    return LaurentMatrix(z, u, v, z)


def eta_matrix(q: int, power: int = 1) -> LaurentMatrix:
    """eta^power with eta = diag(1, pi)."""
    return LaurentMatrix.from_ints(q, ((1, 0), (0, 1)), ((0, 0), (0, power)))


def alpha_matrix(q: int, t: int) -> LaurentMatrix:
    """alpha^t with alpha = diag(pi^{-1}, pi)."""
    return LaurentMatrix.from_ints(q, ((1, 0), (0, 1)), ((-t, 0), (0, t)))


def w_matrix(q: int) -> LaurentMatrix:
    fld = residue_field(q)
    return LaurentMatrix.from_ints(q, ((0, 1), (int(fld.minus_one), 0)))


def e_solution(q: int) -> tuple[int, int]:
    """(x, y) in F_q^2 with x^2 - eps*y^2 = eps; (0, t) with t^2 = -1 when possible."""
    fld = residue_field(q)
    eps = fld.eps
    if fld.is_square[fld.minus_one]:
        return 0, int(fld.sqrt[fld.minus_one])
    for x in range(q):
        for y in range(q):
            lhs = fld.sub[fld.mul[x, x], fld.mul[eps, fld.mul[y, y]]]
            if lhs == eps:
                return x, y
    raise AssertionError("no solution")  # pragma: no cover


def e_matrix(q: int) -> LaurentMatrix:
    """e = [[x, y], [y, eps^{-1} x]]."""
    fld = residue_field(q)
    x, y = e_solution(q)
    return LaurentMatrix.from_ints(q, ((x, y), (y, int(fld.mul[fld.inv[fld.eps], x]))))


def e_eta_matrix(q: int) -> LaurentMatrix:
    """eta e eta^{-1} = [[x, y pi^{-1}], [y pi, eps^{-1} x]]."""
    eta = eta_matrix(q, 1)
    return eta * e_matrix(q) * eta.inverse()


# ---------------------------------------------------------------------------
# conjugation maps
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConjugationMap:
    """The pull-back g -> m^{-1} g m along m = diag(1, pi^shift) * k with k in K.

    ``shift`` rescales entries: (a, b pi^shift, c pi^-shift, d); ``k`` is an
    integral matrix of determinant 1 given by four F_q constants (or None).
    """

    shift: int = 0
    k: tuple[int, int, int, int] | None = None
    label: str = "1"

    def matrix(self, q: int) -> LaurentMatrix:
        m = eta_matrix(q, self.shift)
        if self.k is not None:
            a, b, c, d = self.k
            m = m * LaurentMatrix.from_ints(q, ((a, b), (c, d)))
        return m

    def domain(self) -> SubgroupDescriptor:
        """Elements of K whose image is integral."""
        return SubgroupDescriptor(0, max(0, -self.shift), max(0, self.shift), name=f"dom({self.label})")

    def out_modulus(self, N: int) -> int:
        return N - abs(self.shift)

    def apply(self, G: QuotientGroup, A: Array) -> tuple[QuotientGroup, Array]:
        """Apply to an array of elements of G in the domain; returns (G_out, images)."""
        A = np.asarray(A, dtype=np.int64)
        R = G.ring
        e = self.shift
        if not self.domain().contains(G, A).all():
            raise ValueError(f"element outside the domain of conjugation by {self.label}")
        N2 = self.out_modulus(G.N)
        if N2 < 1:
            raise PrecisionError("conjugation leaves no precision")
        if e >= 0:
            b = R.times_pi(A[..., 1], e)
            c = R.div_pi(A[..., 2], e)
        else:
            b = R.div_pi(A[..., 1], -e)
            c = R.times_pi(A[..., 2], -e)
        H = quotient_group(G.q, N2)
        out = np.stack([A[..., 0], b, c, A[..., 3]], axis=-1) % (G.q**N2)
        if self.k is not None:
            kk = np.array(self.k, dtype=np.int64)
            out = H.mul(H.mul(H.inv(kk), out), kk)
        return H, out

    def apply_element(self, g: GroupElement) -> GroupElement:
        H, out = self.apply(g.group, g.array())
        return GroupElement.from_array(H, out)


def eta_conjugation(d: int) -> ConjugationMap:
    """sigma^{eta^d}(g) = sigma(eta^{-d} g eta^d)."""
    return ConjugationMap(shift=d, label=f"eta^{d}")


def k_conjugation(q: int, which: str) -> ConjugationMap:
    """Pull-back along w or e (matrices in K with constant entries)."""
    if which == "w":
        mat = w_matrix(q)
    elif which == "e":
        mat = e_matrix(q)
    else:
        raise ValueError(which)
    return ConjugationMap(0, tuple(x.leading() if not x.is_zero() else 0 for x in mat.entries()), which)


def conjugate(g: GroupElement, cmap: ConjugationMap) -> GroupElement:
    return cmap.apply_element(g)


def lambda_set(torus_id: str, q: int) -> list[tuple[str, LaurentMatrix]]:
    """The set {I, lambda} of Weyl-type representatives attached to a torus class."""
    one = LaurentMatrix.from_ints(q, ((1, 0), (0, 1)))
    if torus_id == "u-eps":
        return [("1", one), ("e", e_matrix(q))]
    if torus_id == "u-eps-eta":
        return [("1", one), ("e-eta", e_eta_matrix(q))]
    if torus_id.startswith("r-"):
        return [("1", one), ("w", w_matrix(q))]
    raise ValueError(f"unknown torus id {torus_id}")
