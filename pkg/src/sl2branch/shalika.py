"""Ramified representations S_d(theta, X) of K = SL2(R) and their equivalences.

For X = X(u, v) with val(u) = -d < val(v), the character Psi_X(g) = Psi(u g21 + v g12)
of the level-d group Gamma_d (diag in U_{ceil(d/2)}, upper in P^{ceil(d/2)}, lower in
P^{ceil((d+1)/2)}) is extended to T(X) Gamma_d by a character theta of the centralizer
T(X) = {[[a, b], [c b, a]]}, c = u^{-1} v, and induced to K/K_{d+1}.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np

from .classfun import FunctionCF, InducedCF, inner_product, nearest_integer
from .localfield import LocalElem, NoSolutionError, PrecisionError, solve_unit_square, truncated_ring
from .sl2group import (
    Array,
    ProductSubgroup,
    ShapeSubgroup,
    full_group,
    quotient_group,
    shalika_gamma_shape,
)
from .tori import NormOneGroup

TOL = 1e-6


# ---------------------------------------------------------------------------
# X(u, v) and Psi_X
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LieDatum:
    """X(u, v) = [[0, u], [v, 0]] with val(u) = -d < val(v)."""

    q: int
    d: int
    u: LocalElem
    v: LocalElem

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("d must be >= 1")
        if self.u.is_zero() or self.u.val() != -self.d:
            raise ValueError(f"need val(u) = -{self.d}, got {self.u!r}")
        if not self.v.is_zero() and self.v.val() <= -self.d:
            raise ValueError("need val(v) > val(u)")

    @staticmethod
    def make(q: int, d: int, u_unit: int | LocalElem, v: LocalElem | None = None) -> "LieDatum":
        """X(u_unit * pi^-d, v); an int u_unit is an F_q constant."""
        if isinstance(u_unit, LocalElem):
            u = u_unit.shift(-d)
        else:
            u = LocalElem.monomial(q, u_unit, -d)
        if v is None:
            v = LocalElem.zero(q, 64)
        return LieDatum(q, d, u, v)

    def scaled(self, N: int) -> tuple[int, int]:
        """Ring indices of (pi^d u, pi^d v) in R/P^N."""
        return self.u.shift(self.d).to_index(N), self.v.shift(self.d).to_index(N)

    def c(self) -> LocalElem:
        """u^{-1} v."""
        if self.v.is_zero():
            return LocalElem.zero(self.q, self.v.precision + self.d)
        return self.v / self.u

    def c_index(self, N: int) -> int:
        c = self.c()
        if c.is_zero():
            return 0
        return c.to_index(N)


def gamma_group(q: int, d: int, N: int | None = None) -> ShapeSubgroup:
    return ShapeSubgroup(quotient_group(q, N or d + 1), shalika_gamma_shape(d))


def psi_X_values(X: LieDatum, A: Array, N: int) -> Array:
    """Psi(u g21 + v g12) for elements of Gamma_d given mod P^N (no membership check)."""
    return psi_trace_values(X.u, X.v, A, N)


def psi_trace_values(u: LocalElem, v: LocalElem, A: Array, N: int) -> Array:
    """Psi(Tr(X(u, v)(g - 1))) = Psi(u g21 + v g12) for any u, v (no membership check).

    Correct whenever u g21 + v g12 is determined modulo P by g mod P^N.
    """
    q = u.q
    vals = [x.val() for x in (u, v) if not x.is_zero()]
    m = max(0, -min(vals)) if vals else 0
    R = truncated_ring(q, N)
    A = np.asarray(A, dtype=np.int64)
    su = 0 if u.is_zero() else u.shift(m).to_index(N)
    sv = 0 if v.is_zero() else v.shift(m).to_index(N)
    arg = R.add[R.mul[su, A[..., 2]], R.mul[sv, A[..., 1]]]
    return R.psi_shift(arg, m)


def psi_X(X: LieDatum, g: Array, N: int | None = None) -> complex | Array:
    """Psi_X on the level-d group Gamma_d; raises for elements outside it."""
    N = N or X.d + 1
    if N < X.d + 1:
        raise PrecisionError("Psi_X needs elements modulo P^(d+1)")
    g = np.asarray(g, dtype=np.int64)
    single = g.ndim == 1
    A = g.reshape(-1, 4)
    G = quotient_group(X.q, N)
    if not shalika_gamma_shape(X.d).contains(G, A).all():
        raise ValueError("element outside the level-d group")
    vals = psi_X_values(X, A, N)
    return complex(vals[0]) if single else vals


# ---------------------------------------------------------------------------
# the centralizer T(X) and its characters
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def _centralizer(q: int, N: int, c: int) -> NormOneGroup:
    return NormOneGroup(q, N, c)


def centralizer(X: LieDatum, N: int | None = None) -> NormOneGroup:
    N = N or X.d + 1
    return _centralizer(X.q, N, X.c_index(N))


def _in_gamma_ab(T: NormOneGroup, d: int) -> Array:
    G = quotient_group(T.q, T.N)
    return shalika_gamma_shape(d).contains(G, T.plain_matrices(T.elements))


@dataclass
class ShalikaTheta:
    """A character of T(X) mod P^N stored as its values on ``group.elements``."""

    group: NormOneGroup
    table: Array
    label: str = "theta"

    def __call__(self, AB: Array) -> Array:
        AB = np.asarray(AB, dtype=np.int64).reshape(-1, 2)
        idx = self.group.characters.index_of(self.group.keys(AB))
        # characters.elements are sorted by key; so are group.elements
        return self.table[idx]

    def at(self, a: int, b: int) -> complex:
        return complex(self(np.array([[a, b]]))[0])

    def at_minus_one(self) -> int:
        return int(round(self.at(int(self.group.ring.neg[1]), 0).real))

    def generator_values(self) -> list[complex]:
        gens = self.group.characters.generators
        return [complex(v) for v in self(np.asarray(gens))]

    def equals(self, other: "ShalikaTheta", tol: float = TOL) -> bool:
        return self.group.order == other.group.order and bool(np.abs(self.table - other.table).max() < tol)


def extensions(X: LieDatum, N: int | None = None) -> list[ShalikaTheta]:
    """All characters of T(X) mod P^N agreeing with Psi_X on T(X) & Gamma_d."""
    N = N or X.d + 1
    T = centralizer(X, N)
    chars = T.characters
    assert np.array_equal(chars.elements, T.elements)
    inter = _in_gamma_ab(T, X.d)
    target = psi_X_values(X, T.plain_matrices(T.elements[inter]), N)
    out = []
    for i, x in enumerate(chars.characters):
        tab = chars.table(x)
        if np.abs(tab[inter] - target).max() < TOL:
            out.append(ShalikaTheta(T, tab, label=f"theta{len(out)}"))
    return out


def count_extensions(X: LieDatum, N: int | None = None) -> tuple[int, list[ShalikaTheta]]:
    thetas = extensions(X, N)
    return len(thetas), thetas


def centralizer_index(X: LieDatum, N: int | None = None) -> int:
    """[T(X) : T(X) & Gamma_d], by enumeration."""
    N = N or X.d + 1
    T = centralizer(X, N)
    return T.order // int(_in_gamma_ab(T, X.d).sum())


def central_theta(X: LieDatum, sign: int, N: int | None = None) -> ShalikaTheta:
    """For v = 0: the extension trivial on the unipotent part with theta(-I) = sign."""
    if not X.v.is_zero():
        raise ValueError("central_theta needs v = 0")
    for th in extensions(X, N):
        T = th.group
        unip = T.elements[:, 0] == 1
        if np.abs(th.table[unip] - 1).max() < TOL and th.at_minus_one() == sign:
            return th
    raise AssertionError("no extension with the requested sign")  # pragma: no cover


# ---------------------------------------------------------------------------
# S_d(theta, X)
# ---------------------------------------------------------------------------

@dataclass
class ShalikaDatum:
    """(d, X, theta) with theta an extension of Psi_X; the modulus is N = d + 1."""

    X: LieDatum
    theta: ShalikaTheta
    check: bool = True

    def __post_init__(self):
        if self.theta.group.N != self.N:
            raise ValueError(f"theta must be given modulo P^{self.N}")
        if self.theta.group.c != self.X.c_index(self.N):
            raise ValueError("theta is not a character of T(X)")
        if self.check:
            T = self.theta.group
            inter = _in_gamma_ab(T, self.d)
            target = psi_X_values(self.X, T.plain_matrices(T.elements[inter]), self.N)
            if np.abs(self.theta.table[inter] - target).max() > TOL:
                raise ValueError("theta does not agree with Psi_X on T(X) & Gamma_d")

    @property
    def q(self) -> int:
        return self.X.q

    @property
    def d(self) -> int:
        return self.X.d

    @property
    def N(self) -> int:
        return self.X.d + 1

    @cached_property
    def inducing_group(self) -> ProductSubgroup:
        """T(X) Gamma_d as reps of T(X)/(T(X) & Gamma_d) times Gamma_d."""
        T = self.theta.group
        G = quotient_group(self.q, self.N)
        inter = _in_gamma_ab(T, self.d)
        sub_keys = T.keys(T.elements[inter])
        reps: list[Array] = []
        covered = np.zeros(T.order, dtype=bool)
        for i in range(T.order):
            if covered[i]:
                continue
            r = T.elements[i]
            reps.append(r)
            cos = T.mul(np.broadcast_to(r, (len(sub_keys), 2)), T.elements[inter])
            covered[T.characters.index_of(T.keys(cos))] = True
        self.rep_ab = np.array(reps, dtype=np.int64)
        return ProductSubgroup(G, T.plain_matrices(self.rep_ab), gamma_group(self.q, self.d),
                               name=f"T(X)Gamma_{self.d}[{self.theta.label},{self.X.u!r},{self.X.v!r}]")

    def psi_theta_X(self) -> FunctionCF:
        """Psi_{theta,X}(t g) = theta(t) Psi_X(g) on T(X) Gamma_d."""
        H = self.inducing_group
        rep_theta = self.theta(self.rep_ab)

        def on_support(A):
            idx, rest = H.factor(A)
            mask = idx >= 0
            vals = np.zeros(len(A), dtype=complex)
            if mask.any():
                vals[mask] = rep_theta[idx[mask]] * psi_X_values(self.X, rest[mask], self.N)
            return mask, vals

        def fn(A):
            mask, vals = on_support(A)
            if not mask.all():
                raise ValueError("element outside T(X) Gamma_d")
            return vals

        return FunctionCF(H, fn, name="Psi_theta_X", on_support=on_support)


def shalika_character(datum: ShalikaDatum) -> InducedCF:
    """S_d(theta, X) = Ind_{T(X) Gamma_d}^K Psi_{theta,X} as a class function on K/K_{d+1}."""
    chi = datum.psi_theta_X()
    G = quotient_group(datum.q, datum.N)
    return InducedCF(chi, datum.inducing_group, full_group(G), name=f"S_{datum.d}({datum.theta.label})")


def expected_degree(q: int, d: int) -> int:
    return q ** (d - 1) * (q * q - 1) // 2


# ---------------------------------------------------------------------------
# transfer between centralizers
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TransferPair:
    """t' in T(X'), its transfer t in T(X), and the correction t^{-1} t' (all mod P^N)."""

    t_prime: tuple[int, int]
    t: tuple[int, int]
    correction: tuple[int, int, int, int]
    n: int


def transfer_level(X: LieDatum, Xp: LieDatum) -> int:
    """n = val(u^{-1} v - u'^{-1} v') (capped at the working precision)."""
    diff = X.c() - Xp.c()
    return int(min(diff.val(), diff.precision))


def transfer(t_prime: tuple[int, int], X: LieDatum, Xp: LieDatum, N: int | None = None) -> TransferPair:
    """Solve a^2 = 1 + b^2 c with a = a' mod P^n for t' = t(a', b) in T(X')."""
    N = N or X.d + 1
    q = X.q
    n = transfer_level(X, Xp)
    ap, b = (int(x) for x in t_prime)
    Tp = centralizer(Xp, N)
    R = Tp.ring
    if R.sub[R.mul[ap, ap], R.mul[Tp.c, R.mul[b, b]]] != 1:
        raise ValueError("t' is not in T(X')")
    if n >= N:
        a = ap
    else:
        if n < 1:
            raise NoSolutionError("transfer needs val(c - c') >= 1")
        a_l = LocalElem.from_index(q, ap, N)
        b_l = LocalElem.from_index(q, b, N)
        dc = (X.c() - Xp.c()).truncate(N)
        rhs = b_l * b_l * dc / (a_l * a_l)
        root = solve_unit_square(rhs.truncate(N) if rhs.precision >= N else rhs, N)
        a = (a_l * root).to_index(N)
    T = centralizer(X, N)
    G = quotient_group(q, N)
    t_mat = T.plain_matrices(np.array([a, b]))
    tp_mat = Tp.plain_matrices(np.array([ap, b]))
    corr = G.mul(G.inv(t_mat), tp_mat)
    return TransferPair((ap, b), (int(a), b), tuple(int(x) for x in corr), n)


def correction_formula(pair: TransferPair, X: LieDatum, Xp: LieDatum, N: int | None = None) -> complex:
    """Psi(a b u (c' - c)) Psi(2 b v (a - a'))."""
    N = N or X.d + 1
    R = truncated_ring(X.q, N)
    a, b = pair.t
    ap, _ = pair.t_prime
    su, sv = X.scaled(N)
    dc = (Xp.c() - X.c())
    dc_i = 0 if (dc.is_zero() or dc.val() >= N) else dc.to_index(N)
    x1 = R.mul[R.mul[a, b], R.mul[su, dc_i]]
    two = R.add[1, 1]
    x2 = R.mul[R.mul[two, b], R.mul[sv, R.sub[a, ap]]]
    return complex(R.psi_shift(x1, X.d) * R.psi_shift(x2, X.d))


def matched_theta(theta: ShalikaTheta, X: LieDatum, Xp: LieDatum) -> ShalikaTheta:
    """theta'(t') = theta(t) Psi_X(t^{-1} t') with t the transfer of t'."""
    N = theta.group.N
    gam = gamma_group(X.q, X.d, N)
    sample = gam.elements()
    if np.abs(psi_X_values(X, sample, N) - psi_X_values(Xp, sample, N)).max() > TOL:
        raise ValueError("Psi_X and Psi_X' differ on the level-d group")
    Tp = centralizer(Xp, N)
    vals = np.empty(Tp.order, dtype=complex)
    ts = np.empty((Tp.order, 2), dtype=np.int64)
    corrs = np.empty((Tp.order, 4), dtype=np.int64)
    for i, (ap, b) in enumerate(Tp.elements):
        pair = transfer((int(ap), int(b)), X, Xp, N)
        ts[i] = pair.t
        corrs[i] = pair.correction
    if not gam.contains(corrs).all():
        raise ValueError("transfer corrections leave the level-d group")
    vals = theta(ts) * psi_X_values(X, corrs, N)
    return ShalikaTheta(Tp, vals, label=f"{theta.label}'")


def matched_datum(datum: ShalikaDatum, Xp: LieDatum) -> ShalikaDatum:
    return ShalikaDatum(Xp, matched_theta(datum.theta, datum.X, Xp))


# ---------------------------------------------------------------------------
# the diagonal twist criterion (v = v' = 0)
# ---------------------------------------------------------------------------

@dataclass
class TwistReport:
    square_ratio: bool
    theta_compatible: bool
    inner_product: int

    @property
    def equivalent(self) -> bool:
        return self.square_ratio and self.theta_compatible

    @property
    def consistent(self) -> bool:
        return self.equivalent == (self.inner_product == 1)


def diagonal_twist_test(d1: ShalikaDatum, d2: ShalikaDatum) -> TwistReport:
    """Equivalent iff u' = c^2 u for a unit c and theta(t(z, c^-2 b)) = theta'(t(z, b))."""
    if not (d1.X.v.is_zero() and d2.X.v.is_zero()):
        raise ValueError("the twist criterion needs v = v' = 0")
    if d1.d != d2.d or d1.q != d2.q:
        raise ValueError("data of different level")
    q, N = d1.q, d1.N
    ratio = d2.X.u / d1.X.u  # unit
    fld = ratio.field
    square = bool(fld.is_square[ratio.leading()])
    compatible = False
    if square:
        # c^2 = ratio; only c^-2 = ratio^-1 enters
        R = truncated_ring(q, N)
        rinv = ratio.inverse().to_index(N)
        T2 = d2.theta.group
        src = T2.elements
        img = np.stack([src[:, 0], R.mul[rinv, src[:, 1]]], axis=-1)
        compatible = bool(np.abs(d1.theta(img) - d2.theta(src)).max() < TOL)
    ip = nearest_integer(inner_product(shalika_character(d1), shalika_character(d2)))
    return TwistReport(square, compatible, ip)
