"""Anisotropic tori T_{g1,g2} = {t(a,b) = [[a, b g1], [b g2, a]]}, filtrations, characters.

Torus elements are stored in (a, b) coordinates as ring indices of R/P^N, with group law
(a, b)(a', b') = (a a' + c b b', a b' + a' b), c = g1 g2.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache

import numpy as np

from .classfun import AbelianCharacterGroup, abelian_characters
from .localfield import LocalElem, PrecisionError, residue_field, truncated_ring
from .sl2group import Array, ceil_level

HALF = Fraction(1, 2)


@dataclass(frozen=True)
class TorusDescriptor:
    """A torus class: gamma_i = coef_i * pi**val_i (coef an F_q element)."""

    tid: str
    q: int
    gamma1: tuple[int, int]
    gamma2: tuple[int, int]
    y: Fraction
    ramified: bool

    @property
    def c(self) -> tuple[int, int]:
        """gamma1 * gamma2 as (coef, val)."""
        fld = residue_field(self.q)
        return int(fld.mul[self.gamma1[0], self.gamma2[0]]), self.gamma1[1] + self.gamma2[1]

    def gamma(self, i: int) -> LocalElem:
        coef, v = self.gamma1 if i == 1 else self.gamma2
        return LocalElem.monomial(self.q, coef, v)

    def c_index(self, N: int) -> int:
        coef, v = self.c
        return (coef * self.q**v) % (self.q**N)

    @property
    def base_tid(self) -> str:
        """The y=1 torus is the eta-conjugate of the unramified y=0 torus."""
        return "u-eps" if self.tid == "u-eps-eta" else self.tid

    def filtration_levels(self, r: Fraction, plus: bool = False) -> tuple[int, int] | None:
        """(diag unit level, valuation bound on b) for T_r, or None for T_0 = T."""
        r = Fraction(r)
        if r == 0 and not plus:
            return None
        a_level = ceil_level(r, plus)
        b_level = ceil_level(r - self.y, plus) - self.gamma1[1]
        return a_level, max(b_level, 0)

    def __str__(self) -> str:
        return self.tid


TORUS_IDS = ("u-eps", "u-eps-eta", "r-1-pi", "r-eps-invpi", "r-1-epspi", "r-eps-pi")


def torus_descriptor(tid: str, q: int) -> TorusDescriptor:
    fld = residue_field(q)
    eps = fld.eps
    eps_inv = int(fld.inv[eps])
    rows = {
        "u-eps": ((1, 0), (eps, 0), Fraction(0), False),
        "u-eps-eta": ((1, -1), (eps, 1), Fraction(1), False),
        "r-1-pi": ((1, 0), (1, 1), HALF, True),
        "r-eps-invpi": ((eps, 0), (eps_inv, 1), HALF, True),
        "r-1-epspi": ((1, 0), (eps, 1), HALF, True),
        "r-eps-pi": ((eps, 0), (1, 1), HALF, True),
    }
    if tid not in rows:
        raise ValueError(f"unknown torus id {tid!r}; expected one of {TORUS_IDS}")
    g1, g2, y, ram = rows[tid]
    return TorusDescriptor(tid, q, g1, g2, y, ram)


def torus_classes(q: int) -> list[TorusDescriptor]:
    """Representatives of the conjugacy classes (4 when -1 is a non-square, else 6)."""
    fld = residue_field(q)
    ids = list(TORUS_IDS)
    if not fld.is_square[fld.minus_one]:
        # T_{1,pi} ~ T_{eps,eps^-1 pi} and T_{1,eps pi} ~ T_{eps,pi}
        ids = [t for t in ids if t not in ("r-eps-invpi", "r-eps-pi")]
    return [torus_descriptor(t, q) for t in ids]


class NormOneGroup:
    """{(a, b) : a^2 - c b^2 = 1} in (R/P^N)^2 for a ring element c; matrices [[a, b], [c b, a]]."""

    def __init__(self, q: int, N: int, c: int):
        self.q, self.N = q, N
        self.ring = R = truncated_ring(q, N)
        self.c = int(c) % R.size
        M = R.size
        a, b = np.meshgrid(np.arange(M), np.arange(M), indexing="ij")
        a, b = a.ravel(), b.ravel()
        ok = R.sub[R.mul[a, a], R.mul[self.c, R.mul[b, b]]] == 1
        self.elements = np.stack([a[ok], b[ok]], axis=-1).astype(np.int64)

    @property
    def order(self) -> int:
        return len(self.elements)

    def keys(self, AB: Array) -> Array:
        AB = np.asarray(AB, dtype=np.int64)
        return AB[..., 0] * self.ring.size + AB[..., 1]

    def mul(self, X: Array, Y: Array) -> Array:
        R = self.ring
        a, b = X[..., 0], X[..., 1]
        a2, b2 = Y[..., 0], Y[..., 1]
        return np.stack(
            [R.add[R.mul[a, a2], R.mul[self.c, R.mul[b, b2]]], R.add[R.mul[a, b2], R.mul[a2, b]]], axis=-1
        ).astype(np.int64)

    def inv(self, X: Array) -> Array:
        return np.stack([X[..., 0], self.ring.neg[X[..., 1]]], axis=-1).astype(np.int64)

    def identity(self) -> Array:
        return np.array([1, 0], dtype=np.int64)

    def plain_matrices(self, AB: Array) -> Array:
        """[[a, b], [c b, a]]."""
        AB = np.asarray(AB, dtype=np.int64)
        R = self.ring
        return np.stack([AB[..., 0], AB[..., 1], R.mul[self.c, AB[..., 1]], AB[..., 0]], axis=-1).astype(np.int64)

    @cached_property
    def characters(self) -> AbelianCharacterGroup:
        return abelian_characters(self.elements, self.keys, self.mul, self.identity())


class TorusGroup(NormOneGroup):
    """T(R/P^N) in (a, b) coordinates."""

    def __init__(self, T: TorusDescriptor, N: int):
        super().__init__(T.q, N, T.c_index(N))
        self.T = T

    def in_filtration(self, AB: Array, r: Fraction, plus: bool = False) -> Array:
        levels = self.T.filtration_levels(r, plus)
        AB = np.asarray(AB)
        if levels is None:
            return np.ones(len(AB), dtype=bool)
        a_level, b_level = levels
        R = self.ring
        return R.in_units(AB[..., 0], a_level) & R.in_ideal(AB[..., 1], b_level)

    def filtration(self, r: Fraction, plus: bool = False) -> Array:
        return self.elements[self.in_filtration(self.elements, r, plus)]

    def matrices(self, AB: Array, gammas: tuple[tuple[int, int], tuple[int, int]] | None = None) -> Array:
        """[[a, b g1], [b g2, a]] as group elements mod P^N (requires integral entries)."""
        R = self.ring
        g1, g2 = gammas or (self.T.gamma1, self.T.gamma2)
        AB = np.asarray(AB, dtype=np.int64)
        ents = []
        for coef, v in (g1, g2):
            x = R.mul[coef, AB[..., 1]]
            if v >= 0:
                x = R.times_pi(x, v)
            else:
                if not R.in_ideal(AB[..., 1], -v).all():
                    raise ValueError("torus element not integral")
                x = R.div_pi(x, -v)
            ents.append(x)
        return np.stack([AB[..., 0], ents[0], ents[1], AB[..., 0]], axis=-1).astype(np.int64)

    def reduce(self, AB: Array, N2: int) -> Array:
        return np.asarray(AB) % (self.T.q**N2)


@lru_cache(maxsize=None)
def torus_group(tid: str, q: int, N: int) -> TorusGroup:
    return TorusGroup(torus_descriptor(tid, q), N)


def torus_subgroup(T: TorusDescriptor, N: int) -> TorusGroup:
    return torus_group(T.tid, T.q, N)


def torus_filtration(T: TorusDescriptor, r: Fraction, N: int, plus: bool = False) -> Array:
    if Fraction(r) < 0:
        raise ValueError("r must be >= 0")
    return torus_group(T.tid, T.q, N).filtration(Fraction(r), plus)


def character_modulus(T: TorusDescriptor, r: Fraction) -> int:
    """Least N at which T_{r+} contains the kernel of T(R) -> T(R/P^N)."""
    a_level, b_level = T.filtration_levels(Fraction(r), plus=True)
    return max(a_level, b_level, 1)


@dataclass(frozen=True)
class TorusCharacter:
    """A character of T(R/P^N): phi(g_j) = exp(2 pi i x_j) on the polycyclic generators."""

    tid: str
    q: int
    r: Fraction
    N: int
    x: tuple[Fraction, ...]

    @property
    def torus(self) -> TorusDescriptor:
        return torus_descriptor(self.tid, self.q)

    @property
    def group(self) -> TorusGroup:
        return torus_group(self.tid, self.q, self.N)

    @cached_property
    def _dense(self) -> Array:
        G = self.group
        table = np.zeros(G.ring.size**2, dtype=complex)
        table[G.characters.keys] = G.characters.table(self.x)
        return table

    def __call__(self, AB: Array, N_in: int | None = None) -> Array:
        AB = np.asarray(AB, dtype=np.int64)
        if N_in is not None and N_in != self.N:
            if N_in < self.N:
                raise PrecisionError("torus element known to too low precision")
            AB = AB % (self.q**self.N)
        return self._dense[self.group.keys(AB)]

    def inverse(self) -> "TorusCharacter":
        return TorusCharacter(self.tid, self.q, self.r, self.N, tuple((-v) % 1 for v in self.x))

    def times(self, other: "TorusCharacter") -> "TorusCharacter":
        if (other.tid, other.N) != (self.tid, self.N):
            raise ValueError("characters of different groups")
        return TorusCharacter(self.tid, self.q, max(self.r, other.r), self.N,
                              tuple((u + v) % 1 for u, v in zip(self.x, other.x)))

    def at_minus_one(self) -> int:
        m1 = int(residue_field(self.q).minus_one)
        return int(round(self(np.array([[m1, 0]]))[0].real))

    def depth(self) -> Fraction:
        """Least r' (in (1/2)Z) with phi trivial on T_{r'+}."""
        G = self.group
        vals = self(G.elements)
        cands = sorted({Fraction(k, 2) for k in range(0, 2 * self.N + 2)})
        for rr in cands:
            sub = G.in_filtration(G.elements, rr, plus=True)
            if np.allclose(vals[sub], 1, atol=1e-9):
                return rr
        raise PrecisionError("depth not visible at this modulus")

    def to_json(self) -> list[str]:
        return [str(v) for v in self.x]


def torus_characters_of_depth(T: TorusDescriptor, r: Fraction, N: int | None = None) -> list[TorusCharacter]:
    """Characters of T trivial on T_{r+} and nontrivial on T_r, listed canonically."""
    r = Fraction(r)
    if r <= 0:
        raise ValueError("r must be positive")
    if T.ramified and r.denominator != 2:
        return []
    if not T.ramified and r.denominator != 1:
        return []
    N0 = character_modulus(T, r)
    N = N or N0
    if N < N0:
        raise PrecisionError(f"modulus {N} cannot see T_{{{r}+}} (need {N0})")
    G = torus_group(T.tid, T.q, N)
    chars = G.characters
    plus = G.in_filtration(chars.elements, r, plus=True)
    at_r = G.in_filtration(chars.elements, r, plus=False)
    out = []
    for x in chars.characters:
        vals = chars.table(x)
        if np.allclose(vals[plus], 1, atol=1e-9) and not np.allclose(vals[at_r], 1, atol=1e-9):
            out.append(TorusCharacter(T.tid, T.q, r, N, x))
    return sorted(out, key=lambda c: c.x)


def depth_zero_characters_trivial_on_center(T: TorusDescriptor, N: int) -> list[TorusCharacter]:
    """Characters of T/T_{0+} that are trivial on Z = {+-1} (twists psi of depth 0)."""
    G = torus_group(T.tid, T.q, N)
    chars = G.characters
    m1 = int(residue_field(T.q).minus_one)
    z_idx = chars.index_of(G.keys(np.array([[m1, 0]])))
    plus = G.in_filtration(chars.elements, Fraction(0), plus=True)
    out = []
    for x in chars.characters:
        vals = chars.table(x)
        if np.allclose(vals[plus], 1, atol=1e-9) and abs(vals[z_idx][0] - 1) < 1e-9:
            out.append(TorusCharacter(T.tid, T.q, Fraction(0), N, x))
    return sorted(out, key=lambda c: c.x)


@dataclass(frozen=True)
class GenericElement:
    """Gamma = a X_T, recorded through a*gamma1 = pi**(-(r+y)) * (w_0 + w_1 pi + ...)."""

    tid: str
    q: int
    r: Fraction
    digits: tuple[int, ...]

    @property
    def torus(self) -> TorusDescriptor:
        return torus_descriptor(self.tid, self.q)

    @property
    def top(self) -> int:
        """-(r + y), the valuation of a*gamma1."""
        return -int(self.r + self.torus.y)

    def a_gamma1(self, rel_prec: int = 32) -> LocalElem:
        d = list(self.digits) + [0] * max(0, rel_prec - len(self.digits))
        return LocalElem.make(self.q, self.top, d)

    def scalar(self) -> LocalElem:
        """The scalar a itself."""
        return self.a_gamma1() / self.torus.gamma(1)

    def lie(self):
        """(u, v) with Gamma = X(u, v) = [[0, u], [v, 0]]."""
        a = self.scalar()
        return a * self.torus.gamma(1), a * self.torus.gamma(2)

    def pairing(self, B: Array, ring) -> Array:
        """Psi(Tr(Gamma (t(a,b) - I))) = Psi(2 a gamma1 gamma2 b) for b in R/P^N (vectorized)."""
        T = self.torus
        fld = residue_field(self.q)
        coef2, v2 = T.gamma2
        m = -(self.top + v2)  # Psi(pi^{-m} * (2 w coef2 b))
        w = sum(int(dg) * self.q**i for i, dg in enumerate(self.digits[: ring.N]))
        two_coef = int(fld.mul[fld.add[1, 1], coef2])
        x = ring.mul[ring.mul[two_coef, w % ring.size], np.asarray(B)]
        if m < 0:
            return np.ones(np.shape(B), dtype=complex)
        return ring.psi_shift(x, m)

    def to_json(self) -> list[int]:
        return list(self.digits)


def generic_element_for(phi: TorusCharacter, heisenberg: bool | None = None) -> list[GenericElement]:
    """All a*gamma1 (mod the relevant lattice) with phi(t) = Psi(Tr(Gamma(t - I))) on T_{s+}.

    Digits of a*gamma1 at valuations below ceil(-s-y) are pinned down by phi; in the
    Heisenberg case the digit at valuation -s is also enumerated (q free choices).
    """
    T = phi.torus
    r = phi.r
    if r <= 0:
        raise ValueError("phi must have positive depth")
    s = r / 2
    y = T.y
    L = int(r + y)
    if heisenberg is None:
        heisenberg = (not T.ramified) and r.denominator == 1 and r.numerator % 2 == 0
    free_to = ceil_level(-s - y) + (1 if heisenberg else 0)
    n_digits = free_to + L
    G = phi.group
    sub = G.filtration(s, plus=True)
    target = phi(sub)
    out = []
    for digs in itertools.product(range(phi.q), repeat=n_digits):
        if digs[0] == 0:
            continue
        gam = GenericElement(T.tid, T.q, r, tuple(digs))
        if np.allclose(gam.pairing(sub[:, 1], G.ring), target, atol=1e-9):
            out.append(gam)
    if not out:
        raise ValueError("no generic element matches phi; is phi of depth r?")
    return out
