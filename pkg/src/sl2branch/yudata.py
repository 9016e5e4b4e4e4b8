"""Positive-depth data (T, y, r, phi) and the representation rho of T G_{y,s}.

All computations with rho happen in a *base frame*: for the y=1 torus eta T0 eta^{-1}
we work with T0 itself (rho_actual(g) = rho_base(eta^{-1} g eta)), so rho is always a
class function on a subgroup of K/K_{N_rho} with N_rho = floor(r + y_base) + 1.

Conjugates rho^mu(h) = rho(mu^{-1} h mu) for mu = alpha^t lambda are evaluated by the
pull-back h -> lam0^{-1} S_e(h) lam0 with S_e(h) = (a, b pi^e, c pi^-e, d).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property

import numpy as np

from .classfun import (
    ClassFunction,
    FunctionCF,
    InducedCF,
    abelian_characters,
)
from .localfield import LocalElem, PrecisionError, residue_field, truncated_ring
from .shalika import LieDatum, ShalikaTheta, centralizer, psi_trace_values
from .sl2group import (
    Array,
    ProductSubgroup,
    ShapeSubgroup,
    SubgroupDescriptor,
    Subgroup,
    alpha_matrix,
    ceil_level,
    coset_reps,
    k_conjugation,
    lambda_set,
    lie_X,
    moy_prasad,
    quotient_group,
)
from .tori import (
    GenericElement,
    TorusCharacter,
    TorusDescriptor,
    generic_element_for,
    torus_characters_of_depth,
    torus_descriptor,
    torus_group,
)

TOL = 1e-6
HALF = Fraction(1, 2)


class IsotypyError(AssertionError):
    """A constructed rho violates one of its defining restriction properties."""


def parse_depth(text: str | int | Fraction) -> Fraction:
    """'1', '3/2' -> Fraction; only integers and half-integers are allowed."""
    r = Fraction(text)
    if (2 * r).denominator != 1:
        raise ValueError(f"depth {text!r} is not in (1/2)Z")
    return r


# ---------------------------------------------------------------------------
# the datum
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class YuDatum:
    """(T, y, r, phi) with phi a character of T of depth exactly r > 0."""

    phi: TorusCharacter
    gamma_choice: int = 0

    def __post_init__(self):
        r = Fraction(self.phi.r)
        if r <= 0:
            raise ValueError("positive-depth datum needs r > 0")
        if self.torus.ramified != (r.denominator == 2):
            raise ValueError("r must be half-integral exactly when T is ramified")
        if self.phi.depth() != r:
            raise ValueError(f"phi has depth {self.phi.depth()}, not {r}")

    # -- basic fields -------------------------------------------------------
    @property
    def q(self) -> int:
        return self.phi.q

    @property
    def torus(self) -> TorusDescriptor:
        return self.phi.torus

    @property
    def y(self) -> Fraction:
        return self.torus.y

    @property
    def r(self) -> Fraction:
        return Fraction(self.phi.r)

    @property
    def s(self) -> Fraction:
        return self.r / 2

    @property
    def heisenberg(self) -> bool:
        return (not self.torus.ramified) and self.r.numerator % 2 == 0

    @property
    def base_tid(self) -> str:
        return self.torus.base_tid

    @property
    def base_torus(self) -> TorusDescriptor:
        return torus_descriptor(self.base_tid, self.q)

    @property
    def base_y(self) -> Fraction:
        return self.base_torus.y

    @property
    def frame_shift(self) -> int:
        """e0 with rho_actual(g) = rho_base(eta^{-e0} g eta^{e0})."""
        return 1 if self.y == 1 else 0

    @property
    def n_rho(self) -> int:
        return math.floor(self.r + self.base_y) + 1

    @property
    def base_phi(self) -> TorusCharacter:
        # the eta-conjugation preserves (a, b) coordinates, so phi transfers verbatim
        return TorusCharacter(self.base_tid, self.q, self.r, self.phi.N, self.phi.x)

    @cached_property
    def gammas(self) -> list[GenericElement]:
        """Generic-element candidates for phi, as elements of the actual torus."""
        base = generic_element_for(self.base_phi, heisenberg=self.heisenberg)
        return [GenericElement(self.torus.tid, self.q, self.r, g.digits) for g in base]

    @property
    def gamma(self) -> GenericElement:
        return self.gammas[self.gamma_choice]

    @property
    def base_gamma(self) -> GenericElement:
        return GenericElement(self.base_tid, self.q, self.r, self.gamma.digits)

    def central_sign(self) -> int:
        return self.phi.at_minus_one()

    def with_gamma(self, choice: int) -> "YuDatum":
        return YuDatum(self.phi, choice)

    @property
    def label(self) -> str:
        x = ",".join(str(v) for v in self.phi.x)
        return f"{self.torus.tid}/r={self.r}/phi=({x})"

    # -- serialization -------------------------------------------------------
    def to_json(self) -> dict:
        return {
            "q": self.q,
            "torus": self.torus.tid,
            "y": str(self.y),
            "r": str(self.r),
            "phi": self.phi.to_json(),
            "gamma": self.gamma.to_json(),
        }

    @staticmethod
    def from_json(obj: dict, q: int | None = None) -> "YuDatum":
        q = int(obj.get("q", q))
        T = torus_descriptor(obj["torus"], q)
        r = parse_depth(obj["r"])
        if "y" in obj and Fraction(obj["y"]) != T.y:
            raise ValueError(f"torus {T.tid} sits at y={T.y}, not {obj['y']}")
        x = tuple(Fraction(v) for v in obj["phi"])
        cands = torus_characters_of_depth(T, r)
        N = cands[0].N if cands else None
        phi = TorusCharacter(T.tid, q, r, N, x)
        datum = YuDatum(phi)
        if "gamma" in obj:
            digits = tuple(int(v) for v in obj["gamma"])
            for i, g in enumerate(datum.gammas):
                if g.digits == digits:
                    return YuDatum(phi, i)
            raise ValueError("gamma is not a generic element for phi")
        return datum


def data_of_depth(tid: str, q: int, r: Fraction | str) -> list[YuDatum]:
    """Every datum (T, y, r, phi) for a given torus class and depth."""
    T = torus_descriptor(tid, q)
    return [YuDatum(phi) for phi in torus_characters_of_depth(T, parse_depth(r))]


# ---------------------------------------------------------------------------
# helpers in the base frame
# ---------------------------------------------------------------------------

def psi_gamma_values(datum: YuDatum, A: Array, N: int | None = None, gamma: GenericElement | None = None) -> Array:
    """Psi_Gamma(g) = Psi(Tr(Gamma(g - 1))) on base-frame elements mod P^N."""
    g = gamma or datum.base_gamma
    u, v = g.lie()
    return psi_trace_values(u, v, A, N or datum.n_rho)


def _torus_ab(datum: YuDatum, M: Array, N: int) -> Array:
    """(a, b) coordinates of base-torus matrices [[a, b g1], [b g2, a]] (g1 a unit)."""
    T = datum.base_torus
    coef, v = T.gamma1
    if v != 0:
        raise AssertionError("base tori have unit gamma1")
    R = truncated_ring(datum.q, N)
    fld = residue_field(datum.q)
    M = np.asarray(M, dtype=np.int64)
    return np.stack([M[..., 0], R.mul[int(fld.inv[coef]), M[..., 1]]], axis=-1)


def _phi_at(datum: YuDatum, AB: Array, N_in: int) -> Array:
    phi = datum.base_phi
    return phi(np.asarray(AB) % (datum.q**phi.N), phi.N)


def _product_with_torus(datum: YuDatum, AB: Array, base: ShapeSubgroup, name: str) -> tuple[ProductSubgroup, Array]:
    """(A B as a ProductSubgroup, (a,b) of its reps) for torus elements AB normalizing B."""
    G = base.G
    TG = torus_group(datum.base_tid, datum.q, G.N)
    reps = coset_reps(G, TG.matrices(AB), base)
    return ProductSubgroup(G, reps, base, name=name), _torus_ab(datum, reps, G.N)


# ---------------------------------------------------------------------------
# rho
# ---------------------------------------------------------------------------

@dataclass
class RhoCharacter:
    """The character of rho on its domain (base frame), with the data used to build it."""

    datum: YuDatum
    cf: ClassFunction
    degree: int
    polarization: str | None = None
    gamma: GenericElement | None = None   # generic element used for Psi_Gamma on G_{y,s+}

    @property
    def N(self) -> int:
        return self.cf.N

    @property
    def domain(self) -> Subgroup:
        return self.cf.support

    def kernel_shape(self) -> SubgroupDescriptor:
        return moy_prasad(self.datum.base_y, self.datum.r, plus=True)

    def __call__(self, A: Array, N_in: int | None = None) -> Array:
        return self.cf(A, N_in)

    # -- defining properties -------------------------------------------------
    def torus_isotypy_error(self) -> float:
        """max |chi(t) - deg phi(t)| over Z T_{0+} (all of T when deg = 1)."""
        datum = self.datum
        TG = torus_group(datum.base_tid, datum.q, self.N)
        AB = TG.elements
        if self.degree > 1:
            R = TG.ring
            a1 = AB[:, 0] % datum.q
            AB = AB[(a1 == 1) | (a1 == int(R.neg[1]) % datum.q)]
        vals = self.cf(TG.matrices(AB))
        return float(np.abs(vals - self.degree * _phi_at(datum, AB, self.N)).max())

    def gamma_isotypy_error(self) -> float:
        """max |chi(g) - deg Psi_Gamma(g)| over G_{y,s+}."""
        datum = self.datum
        G = quotient_group(datum.q, self.N)
        E = moy_prasad(datum.base_y, datum.s, plus=True).elements(G)
        vals = self.cf(E)
        return float(np.abs(vals - self.degree * psi_gamma_values(datum, E, self.N, self.gamma)).max())

    def check(self, tol: float = TOL) -> None:
        et, eg = self.torus_isotypy_error(), self.gamma_isotypy_error()
        if et > tol or eg > tol:
            raise IsotypyError(f"rho for {self.datum.label}: torus error {et:.2e}, Gamma error {eg:.2e}")


def agreement_error(datum: YuDatum, shape: SubgroupDescriptor, gamma: GenericElement | None = None) -> float:
    """max |phi(t) - Psi_Gamma(t)| over torus elements in the given shape (base frame)."""
    N = datum.n_rho
    G = quotient_group(datum.q, N)
    TG = torus_group(datum.base_tid, datum.q, N)
    mats = TG.matrices(TG.elements)
    inside = shape.contains(G, mats)
    AB = TG.elements[inside]
    diff = _phi_at(datum, AB, N) - psi_gamma_values(datum, mats[inside], N, gamma)
    return float(np.abs(diff).max()) if len(diff) else 0.0


def _character_on_product(datum: YuDatum, H: ProductSubgroup, rep_ab: Array, gamma: GenericElement,
                          name: str) -> FunctionCF:
    """t g -> phi(t) Psi_Gamma(g) on H = (torus reps) * base."""
    rep_phi = _phi_at(datum, rep_ab, H.G.N)
    N = H.G.N

    def on_support(A):
        idx, rest = H.factor(A)
        mask = idx >= 0
        vals = np.zeros(len(idx), dtype=complex)
        if mask.any():
            vals[mask] = rep_phi[idx[mask]] * psi_gamma_values(datum, rest[mask], N, gamma)
        return mask, vals

    def fn(A):
        mask, vals = on_support(A)
        if not mask.all():
            raise ValueError(f"element outside {H.name}")
        return vals

    return FunctionCF(H, fn, name=name, on_support=on_support)


def build_phi_hat(datum: YuDatum, check: bool = True) -> RhoCharacter:
    """phi_hat(t g) = phi(t) Psi_Gamma(g) on T G_{y,s} (non-Heisenberg data)."""
    if datum.heisenberg:
        raise ValueError("Heisenberg datum: use build_heisenberg_rho")
    N = datum.n_rho
    G = quotient_group(datum.q, N)
    shape = moy_prasad(datum.base_y, datum.s)
    err = agreement_error(datum, shape)
    if err > TOL:
        raise ValueError(f"phi and Psi_Gamma disagree on T & G_(y,s) (error {err:.2e}); bad Gamma?")
    base = ShapeSubgroup(G, shape)
    TG = torus_group(datum.base_tid, datum.q, N)
    H, rep_ab = _product_with_torus(datum, TG.elements, base, name=f"TG_{{y,{datum.s}}}")
    cf = _character_on_product(datum, H, rep_ab, datum.base_gamma, name="phi_hat")
    rho = RhoCharacter(datum, cf, 1, None, datum.base_gamma)
    if check:
        rho.check()
    return rho


# -- Heisenberg case ---------------------------------------------------------

POLARIZATIONS = ("root", "cartan")


def polarization_shape(datum: YuDatum, which: str) -> SubgroupDescriptor:
    """A subgroup G_{y,s+} < P < G_{y,s} on which Psi_Gamma is a character, of index q.

    "root": diagonal entries one level deeper.  "cartan": g21 = (g2/g1) g12 modulo one
    level deeper, i.e. the Lie algebra of the torus plus the off-diagonal Cartan line.
    """
    s = int(datum.s)
    if which == "root":
        return SubgroupDescriptor(s + 1, s, s, name="P_root")
    if which == "cartan":
        T = datum.base_torus
        fld = residue_field(datum.q)
        lam = LocalElem.monomial(datum.q, int(fld.mul[fld.inv[T.gamma1[0]], T.gamma2[0]]), 0)
        return SubgroupDescriptor(s, s, s, relation=(lam, s + 1), name="P_cartan")
    raise ValueError(f"polarization must be one of {POLARIZATIONS}")


def heisenberg_gamma(datum: YuDatum) -> GenericElement:
    """The generic-element candidate matching phi on all of T_s (base frame)."""
    phi = datum.base_phi
    TG = phi.group
    sub = TG.filtration(datum.s)
    target = phi(sub)
    hits = [GenericElement(datum.base_tid, datum.q, datum.r, g.digits) for g in datum.gammas]
    hits = [g for g in hits if np.allclose(g.pairing(sub[:, 1], TG.ring), target, atol=1e-9)]
    if len(hits) != 1:
        raise AssertionError(f"expected one candidate matching phi on T_s, found {len(hits)}")
    return hits[0]


def _z_t_zero_plus(datum: YuDatum, N: int) -> Array:
    TG = torus_group(datum.base_tid, datum.q, N)
    a1 = TG.elements[:, 0] % datum.q
    return TG.elements[(a1 == 1) | (a1 == datum.q - 1)]


def heisenberg_domain(datum: YuDatum) -> ProductSubgroup:
    """J0 = Z T_{0+} G_{y,s} (base frame, mod P^N_rho)."""
    G = quotient_group(datum.q, datum.n_rho)
    base = ShapeSubgroup(G, moy_prasad(datum.base_y, datum.s))
    return _product_with_torus(datum, _z_t_zero_plus(datum, G.N), base, name="ZT0+G_{y,s}")[0]


def build_heisenberg_rho(datum: YuDatum, polarization: str = "root", check: bool = True) -> RhoCharacter:
    """rho on Z T_{0+} G_{y,s}: induced from phi(t) Psi_Gamma'(g) on Z T_{0+} P (degree q)."""
    if not datum.heisenberg:
        raise ValueError("not a Heisenberg datum")
    N = datum.n_rho
    G = quotient_group(datum.q, N)
    gam = heisenberg_gamma(datum)
    pshape = polarization_shape(datum, polarization)
    err = agreement_error(datum, pshape, gam)
    if err > TOL:
        raise IsotypyError(f"phi and Psi_Gamma' disagree on T & P ({err:.2e})")
    AB = _z_t_zero_plus(datum, N)
    J_pol, rep_ab = _product_with_torus(datum, AB, ShapeSubgroup(G, pshape), name=f"ZT0+P_{polarization}")
    chi = _character_on_product(datum, J_pol, rep_ab, gam, name=f"chi_{polarization}")
    J0 = heisenberg_domain(datum)
    if J0.order != datum.q * J_pol.order:
        raise IsotypyError(f"polarization {polarization} has index {J0.order / J_pol.order}, expected q")
    cf = InducedCF(chi, J_pol, J0, name=f"rho_{polarization}")
    rho = RhoCharacter(datum, cf, datum.q, polarization, gam)
    if check:
        rho.check()
    return rho


def build_rho(datum: YuDatum, polarization: str = "root", check: bool = True) -> RhoCharacter:
    if datum.heisenberg:
        return build_heisenberg_rho(datum, polarization, check)
    return build_phi_hat(datum, check)


def polarization_difference(datum: YuDatum) -> float:
    """max |chi_root - chi_cartan| over the whole domain."""
    r1 = build_heisenberg_rho(datum, "root")
    r2 = build_heisenberg_rho(datum, "cartan")
    E = r1.domain.elements()
    return float(np.abs(r1(E) - r2(E)).max())


# ---------------------------------------------------------------------------
# conjugation by mu = alpha^t lambda
# ---------------------------------------------------------------------------

def delta(y: Fraction, t: int, lam: str) -> Fraction:
    y = Fraction(y)
    return 2 * t - y if (y == HALF and lam == "w") else 2 * t + y


def mackey_reps(datum: YuDatum, max_depth: int) -> list[tuple[int, str]]:
    """(t, lambda) for mu in M(T) = {I} u {alpha^t lambda : t > 0} with r + delta <= max_depth."""
    out = [(0, "1")] if datum.r <= max_depth else []
    t = 1
    while datum.r + 2 * t - HALF <= max_depth:
        for lam, _ in lambda_set(datum.torus.tid, datum.q):
            if datum.r + delta(datum.y, t, lam) <= max_depth:
                out.append((t, lam))
        t += 1
    return sorted(out, key=lambda m: (datum.r + delta(datum.y, *m), m[0], m[1]))


def _lam0(q: int, lam: str) -> tuple[int, int, int, int] | None:
    if lam == "1":
        return None
    return k_conjugation(q, "w" if lam == "w" else "e").k


def pull_back(q: int, A: Array, N_in: int, e: int, lam0: tuple[int, int, int, int] | None, N_out: int,
              kernel: SubgroupDescriptor) -> Array:
    """lam0^{-1} S_e(A) lam0 modulo P^N_out.

    The lower-left entry of S_e(A) is only known modulo P^(N_in - e); missing digits are
    filled with zeros, which is harmless when they fall inside ``kernel`` (checked).
    """
    if N_out > N_in:
        raise PrecisionError("cannot pull back to a finer modulus")
    R = truncated_ring(q, N_in)
    A = np.asarray(A, dtype=np.int64).reshape(-1, 4)
    if not R.in_ideal(A[:, 2], e).all():
        raise ValueError("element outside the domain of the pull-back")
    known = N_in - e
    if known < N_out:
        if lam0 is None:
            level = kernel.lower
        elif lam0[0] == 0 and lam0[3] == 0:  # w: lower-left moves to upper-right
            level = kernel.upper
        else:
            level = 0
            raise PrecisionError("pull-back through e needs full precision")
        if level > known:
            raise PrecisionError(f"pull-back loses digit {known} outside the kernel")
    b = R.times_pi(A[:, 1], e)
    c = R.div_pi(A[:, 2], e)
    out = np.stack([A[:, 0], b, c, A[:, 3]], axis=-1) % (q**N_out)
    H = quotient_group(q, N_out)
    if lam0 is not None:
        kk = np.array(lam0, dtype=np.int64)
        out = H.mul(H.mul(H.inv(kk), out), kk)
    if not (H.det(out) == 1).all():
        raise AssertionError("pull-back left SL2")
    return out


@dataclass
class ConjugatedRho:
    """rho^mu on K & (T G_{y,s})^mu, together with the Shalika data (Gamma^mu, phi^mu)."""

    rho: RhoCharacter
    t: int
    lam: str
    delta: Fraction
    d: int
    shape: SubgroupDescriptor
    X: LieDatum
    theta: ShalikaTheta
    H: ProductSubgroup
    cf: FunctionCF = field(repr=False)

    @property
    def N(self) -> int:
        return self.d + 1

    def pulled(self, A: Array) -> Array:
        datum = self.rho.datum
        e = 2 * self.t + datum.frame_shift
        return pull_back(datum.q, A, self.N, e, _lam0(datum.q, self.lam), self.rho.N, self.rho.kernel_shape())


def gamma_mu(datum: YuDatum, t: int, lam: str) -> tuple[LocalElem, LocalElem]:
    """(u, v) with mu Gamma mu^{-1} = X(u, v) (actual frame)."""
    q = datum.q
    mats = dict(lambda_set(datum.torus.tid, q))
    mu = alpha_matrix(q, t) * mats[lam]
    u, v = datum.gamma.lie()
    Y = lie_X(u, v).conjugate(mu)
    d = int(datum.r + delta(datum.y, t, lam))
    for x in (Y.a, Y.d):
        if not (x.is_zero() or x.val() >= d + 2):
            raise AssertionError("Gamma^mu is not antidiagonal")
    return Y.b, Y.c


def conjugated_shape(datum: YuDatum, t: int, lam: str) -> SubgroupDescriptor:
    """K & G_{y,s}^mu."""
    s, dl = datum.s, delta(datum.y, t, lam)
    return SubgroupDescriptor(ceil_level(s), max(0, ceil_level(s - dl)), ceil_level(s + dl),
                              name=f"K&G^mu(t={t},{lam})")


def conjugate_rho(rho: RhoCharacter, t: int, lam: str) -> ConjugatedRho:
    """rho^mu for mu = alpha^t lambda in M(T) (excluding the unramified-type mu = I, y = 0)."""
    datum = rho.datum
    q = datum.q
    dl = delta(datum.y, t, lam)
    if dl <= 0:
        raise ValueError("mu = I with y = 0 has no Shalika model")
    d = int(datum.r + dl)
    N = d + 1
    G = quotient_group(q, N)
    u, v = gamma_mu(datum, t, lam)
    X = LieDatum(q, d, u, v)
    T = centralizer(X, N)
    e = 2 * t + datum.frame_shift
    lam0 = _lam0(q, lam)
    kernel = rho.kernel_shape()

    def pull(A):
        return pull_back(q, A, N, e, lam0, rho.N, kernel)

    mats = T.plain_matrices(T.elements)
    base_mats = pull(mats)
    table = _phi_at(datum, _torus_ab(datum, base_mats, rho.N), rho.N)
    theta = ShalikaTheta(T, table, label=f"phi^mu(t={t},{lam})")
    shape = conjugated_shape(datum, t, lam)
    base = ShapeSubgroup(G, shape)
    reps = coset_reps(G, mats, base)
    H = ProductSubgroup(G, reps, base, name=f"K&(TG)^mu(t={t},{lam})")

    def fn(A):
        return rho.cf(pull(A))

    cf = FunctionCF(H, fn, name=f"rho^mu(t={t},{lam})")
    return ConjugatedRho(rho, t, lam, dl, d, shape, X, theta, H, cf)


# ---------------------------------------------------------------------------
# restriction spectrum
# ---------------------------------------------------------------------------

@dataclass
class SpectrumTerm:
    multiplicity: int
    character: tuple[Fraction, ...]
    keys: Array = field(repr=False)
    values: Array = field(repr=False)   # character values on the quotient representatives


@dataclass
class Spectrum:
    terms: list[SpectrumTerm]
    reps: Array = field(repr=False)     # representatives of H / kernel
    quotient_order: int = 0

    def evaluate(self, term: SpectrumTerm, A: Array, key_fn) -> Array:
        idx = np.searchsorted(term.keys, key_fn(A))
        return term.values[idx]


def kernel_key_fn(q: int, kernel: SubgroupDescriptor):
    """Key (a mod P^A, b mod P^B, c mod P^C) for cosets of a shape kernel."""
    A_, B_, C_ = kernel.diag, kernel.upper, kernel.lower
    mA, mB, mC = q**A_, q**B_, q**C_

    def key(M):
        M = np.asarray(M, dtype=np.int64)
        return ((M[..., 0] % mA) * mB + (M[..., 1] % mB)) * mC + (M[..., 2] % mC)

    return key


def restriction_spectrum(cf: ClassFunction, H: Subgroup, kernel: SubgroupDescriptor,
                         tol: float = TOL) -> Spectrum:
    """Decompose Res_H cf into characters of the abelian quotient H / kernel.

    ``kernel`` must be a normal subgroup of H contained in the kernel of cf with H/kernel
    abelian; this is verified (coset count, constancy of cf on cosets, commutativity).
    """
    G = H.G
    key = kernel_key_fn(G.q, kernel)
    E = H.elements()
    keys = key(E)
    uniq, first, inverse = np.unique(keys, return_index=True, return_inverse=True)
    ker_order = kernel.order(G)
    if len(uniq) * ker_order != H.order:
        raise ValueError("kernel shape does not tile H (not a normal subgroup of the right order?)")
    vals = cf(E)
    rep_vals = vals[first]
    if np.abs(vals - rep_vals[inverse]).max() > tol:
        raise ValueError("character is not constant on kernel cosets")
    reps = E[first]
    # commutativity on representatives
    rng = np.random.default_rng(0)
    i, j = rng.integers(0, len(reps), size=(2, min(4096, len(reps) ** 2)))
    if not np.array_equal(key(G.mul(reps[i], reps[j])), key(G.mul(reps[j], reps[i]))):
        raise ValueError("H / kernel is not abelian")
    chars = abelian_characters(reps, key, G.mul, G.identity())
    order_idx = chars.index_of(uniq)  # position of each uniq key in chars.elements
    terms = []
    for x in chars.characters:
        tab = chars.table(x)[order_idx]
        m = complex(np.sum(rep_vals * np.conj(tab)) / len(uniq))
        mi = int(round(m.real))
        if abs(m - mi) > tol:
            raise ValueError(f"non-integral multiplicity {m}")
        if mi:
            terms.append(SpectrumTerm(mi, x, uniq, tab))
    return Spectrum(terms, reps, len(uniq))


def spectrum_subgroup(conj: ConjugatedRho) -> tuple[ShapeSubgroup, SubgroupDescriptor]:
    """The abelian-modulo-kernel subgroup H and kernel used for Heisenberg components.

    H = (U_{ceil(d/2)}, P^{ceil(d/2)}; P^{s+delta}, U_{ceil(d/2)}) and the kernel is the
    intersection of H with K & G_{y,r+}^mu.
    """
    datum = conj.rho.datum
    d, dl = conj.d, conj.delta
    h = ceil_level(Fraction(d, 2))
    lower = ceil_level(datum.s + dl)
    G = quotient_group(datum.q, conj.N)
    Hs = SubgroupDescriptor(h, h, lower, name="H_spectrum")
    r1 = int(datum.r) + 1
    ker = SubgroupDescriptor(max(r1, h), max(r1 - int(dl), h), r1 + int(dl), name="ker_spectrum")
    return ShapeSubgroup(G, Hs), ker


def family_exponent(conj: ConjugatedRho) -> int:
    """k with the new spectrum characters Psi(x pi^-k g21): the top lower-left level s + delta.

    Characters of H agreeing with Psi_{Gamma^mu} on G_{y,s+}^mu can only differ from it on the
    lower-left entry modulo P^(s+delta+1); with Psi trivial on P this forces k = s + delta.
    """
    return int(conj.rho.datum.s + conj.delta)


def family_values(conj: ConjugatedRho, x: int, A: Array, exponent: int | None = None) -> Array:
    """Psi_{Y(x)}(g) = Psi_{Gamma^mu}(g) Psi(x pi^{-k} g21), k = family_exponent by default."""
    q = conj.rho.datum.q
    k = family_exponent(conj) if exponent is None else exponent
    base = psi_trace_values(conj.X.u, conj.X.v, A, conj.N)
    if x == 0:
        return base
    z = LocalElem.monomial(q, x, -k)
    return base * psi_trace_values(z, LocalElem.zero(q, 64), A, conj.N)


def match_family(conj: ConjugatedRho, spectrum: Spectrum, H: Subgroup, kernel: SubgroupDescriptor,
                 exponent: int | None = None, tol: float = TOL) -> list[list[int]]:
    """For each spectrum term, the residues x (as F_q indices) with Psi_{Y(x)} equal to it."""
    key = kernel_key_fn(H.G.q, kernel)
    E = H.elements()
    fam = [family_values(conj, x, E, exponent) for x in range(H.G.q)]
    out = []
    for term in spectrum.terms:
        tv = spectrum.evaluate(term, E, key)
        out.append([x for x, fv in enumerate(fam) if np.abs(fv - tv).max() < tol])
    return out


def heisenberg_spectrum(conj: ConjugatedRho) -> tuple[Spectrum, list[list[int]]]:
    """Res of rho^mu to H decomposed, with each term matched to the family Psi_{Y(x)}."""
    H, ker = spectrum_subgroup(conj)
    sp = restriction_spectrum(conj.cf, H, ker)
    return sp, match_family(conj, sp, H, ker)


def spectrum_agrees_on_plus(conj: ConjugatedRho, spectrum: Spectrum, tol: float = TOL) -> bool:
    """Every term equals Psi_{Gamma^mu} on H & G_{y,s+}^mu."""
    H, ker = spectrum_subgroup(conj)
    datum = conj.rho.datum
    dl = conj.delta
    plus = SubgroupDescriptor(ceil_level(datum.s, True), max(0, ceil_level(datum.s - dl, True)),
                              ceil_level(datum.s + dl, True))
    E = H.elements()
    E = E[plus.contains(H.G, E)]
    key = kernel_key_fn(H.G.q, ker)
    ref = family_values(conj, 0, E)
    return all(np.abs(spectrum.evaluate(t, E, key) - ref).max() < tol for t in spectrum.terms)
