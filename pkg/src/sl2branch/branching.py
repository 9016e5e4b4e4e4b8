"""Branching of supercuspidal representations of SL2(k) to K = SL2(R).

A restriction is represented by its K_{D+1}-fixed part: the list of Mackey components of
depth <= D, each identified with an explicit irreducible model by an inner product.
"""

from __future__ import annotations

import csv
import io
import itertools
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Union

import numpy as np

from .classfun import (
    ClassFunction,
    FunctionCF,
    InducedCF,
    depth_of,
    get_threads,
    inner_product,
    nearest_integer,
)
from .fqchars import CuspidalChar, NormKernelChar, cuspidal_by_label, inflate_to_K, lambda_char, sl2fq_cuspidal_table
from .localfield import residue_field
from .shalika import (
    LieDatum,
    ShalikaDatum,
    central_theta,
    expected_degree,
    psi_X_values,
    shalika_character,
)
from .sl2group import (
    ProductSubgroup,
    ShapeSubgroup,
    full_group,
    iwahori_type_shape,
    quotient_group,
    shalika_gamma_shape,
)
from .tori import depth_zero_characters_trivial_on_center
from .yudata import (
    YuDatum,
    build_rho,
    conjugate_rho,
    delta,
    mackey_reps,
)

TOL = 1e-6
DEFAULT_CAP = 2 * 10**7


class BudgetExceeded(RuntimeError):
    pass


class CertificationError(AssertionError):
    pass


def group_order(q: int, N: int) -> int:
    """|SL2(R/P^N)| = q^(3N-2) (q^2 - 1)."""
    return q ** (3 * N - 2) * (q * q - 1)


# ---------------------------------------------------------------------------
# descriptors
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DepthZeroDatum:
    """c-Ind of a cuspidal sigma of SL2(F_q) inflated to K (vertex 0) or to K^eta (vertex 1)."""

    q: int
    sigma: str          # DL index j as a string, or "plus" / "minus"
    vertex: int

    def __post_init__(self):
        if self.vertex not in (0, 1):
            raise ValueError("vertex must be 0 or 1")
        if self.sigma.isdigit():
            j = int(self.sigma)
            if not (1 <= j <= self.q and 2 * j != self.q + 1):
                raise ValueError(f"omega index must satisfy 1 <= j <= q with omega_j^2 != 1, got {j}")
            object.__setattr__(self, "sigma", str(min(j, self.q + 1 - j)))
        elif self.sigma not in ("plus", "minus"):
            raise ValueError(f"sigma must be a DL index or plus/minus, got {self.sigma!r}")
        self.cusp  # validate the label

    @property
    def cusp(self) -> CuspidalChar:
        return cuspidal_by_label(self.q, self.sigma)

    def central_sign(self) -> int:
        return self.cusp.theta_minus_one

    @property
    def label(self) -> str:
        return f"{self.cusp.name}@vertex{self.vertex}"

    def to_json(self) -> dict:
        return {"kind": "depth-zero", "q": self.q, "sigma": self.sigma, "vertex": self.vertex}


Descriptor = Union[DepthZeroDatum, YuDatum]


def descriptor_from_json(obj: dict, q: int | None = None) -> Descriptor:
    if obj.get("kind") == "depth-zero" or "sigma" in obj:
        return DepthZeroDatum(int(obj.get("q", q)), str(obj["sigma"]), int(obj["vertex"]))
    return YuDatum.from_json(obj, q)


def descriptor_json(desc: Descriptor) -> dict:
    out = desc.to_json()
    if isinstance(desc, YuDatum):
        out = {"kind": "positive", **out}
    return out


def depth_zero_data(q: int) -> list[DepthZeroDatum]:
    """One datum per cuspidal sigma (DL classes and sigma0^+-) and vertex."""
    out = []
    for c in sl2fq_cuspidal_table(q):
        lab = str(c.omega.j) if c.label == "DL" else c.label
        for v in (0, 1):
            out.append(DepthZeroDatum(q, lab, v))
    return out


# ---------------------------------------------------------------------------
# table rows
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MackeyComponentId:
    """mu = alpha^t lambda; for depth-zero data lambda is implicit ('1')."""

    t: int
    lam: str = "1"

    def delta(self, y: Fraction) -> Fraction:
        return delta(y, self.t, self.lam)

    def to_json(self) -> dict:
        return {"t": self.t, "lambda": self.lam}


@dataclass
class Component:
    d: int
    mu: MackeyComponentId
    label: str                  # sigma | pi+ | pi- | shalika | unramified-type
    degree: int
    certified: bool
    status: str = "certified"   # certified | failed | predicted, unverified
    checks: dict = field(default_factory=dict)
    character: ClassFunction | None = field(default=None, repr=False)
    sign: str | None = None     # square class of -u pi^d for Shalika rows ('+' or '-')

    def to_json(self) -> dict:
        return {"d": self.d, "mu": self.mu.to_json(), "label": self.label, "degree": self.degree,
                "certified": self.certified}


@dataclass
class BranchingTable:
    q: int
    datum: Descriptor
    cutoff: int
    components: list[Component]

    def to_json(self) -> dict:
        return {"q": self.q, "datum": descriptor_json(self.datum), "cutoff": self.cutoff,
                "components": [c.to_json() for c in self.components]}

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=False)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["d", "mu_t", "mu_lambda", "label", "degree", "certified"])
        for c in self.components:
            w.writerow([c.d, c.mu.t, c.mu.lam, c.label, c.degree, str(c.certified).lower()])
        return buf.getvalue()

    @property
    def all_certified(self) -> bool:
        return all(c.certified for c in self.components if c.status != "predicted, unverified")

    @property
    def unverified(self) -> list[Component]:
        return [c for c in self.components if c.status == "predicted, unverified"]

    def failures(self) -> list[str]:
        return [f"d={c.d} mu={c.mu.to_json()} {c.label}: {c.checks}" for c in self.components
                if c.status == "failed"]

    def assert_certified(self) -> None:
        bad = self.failures()
        if bad:
            raise CertificationError(f"{self.datum.label}: " + "; ".join(bad))


def _run_jobs(fn, jobs: list) -> list:
    n = get_threads()
    if n <= 1 or len(jobs) <= 1:
        return [fn(j) for j in jobs]
    with ThreadPoolExecutor(max_workers=n) as ex:
        return list(ex.map(fn, jobs))


def _is_int(z: complex, n: int, tol: float = TOL) -> bool:
    return abs(z - n) < tol


# ---------------------------------------------------------------------------
# depth zero
# ---------------------------------------------------------------------------

def sigma_eta(cusp: CuspidalChar, d: int, N: int | None = None, twist: bool = False) -> FunctionCF:
    """sigma^{eta^d}(h) = sigma(eta^{-d} h eta^d mod P) on BK_d mod P^N (times tau if ``twist``)."""
    q = cusp.q
    N = N or d + 1
    if N <= d:
        raise ValueError("need N > d to see the lower-left digit")
    G = quotient_group(q, N)
    H = ShapeSubgroup(G, iwahori_type_shape(d))

    def fn(A):
        A = np.asarray(A, dtype=np.int64)
        S = np.stack([A[:, 0] % q, np.zeros(len(A), dtype=np.int64), (A[:, 2] // q**d) % q, A[:, 3] % q], axis=-1)
        vals = cusp.evaluate(S)
        if twist:
            vals = vals * lambda_char(q, A[:, 0])
        return vals

    return FunctionCF(H, fn, name=f"{cusp.name}^eta^{d}" + ("*tau" if twist else ""))


def pi_x(q: int, sign: str) -> int:
    """x with pi_d^{sign} = S_d(theta, X(-x pi^-d, 0)): 1 for '+', eps for '-'."""
    fld = residue_field(q)
    return 1 if sign == "+" else int(fld.eps)


@lru_cache(maxsize=None)
def pi_model_datum(q: int, theta_sign: int, d: int, sign: str) -> ShalikaDatum:
    fld = residue_field(q)
    u = int(fld.neg[pi_x(q, sign)])
    X = LieDatum.make(q, d, u)
    return ShalikaDatum(X, central_theta(X, theta_sign))


@lru_cache(maxsize=None)
def pi_d_pm(q: int, theta_sign: int, d: int, sign: str) -> InducedCF:
    """pi_d^{sign}(theta) = S_d(theta~, X(-x pi^-d, 0)), theta~ trivial on U."""
    if d < 1:
        raise ValueError("d must be >= 1")
    if sign not in ("+", "-"):
        raise ValueError("sign must be '+' or '-'")
    return shalika_character(pi_model_datum(q, theta_sign, d, sign))


def depth_zero_components(datum: DepthZeroDatum, D: int, cap: int = DEFAULT_CAP) -> BranchingTable:
    """Components Ind_{BK_d}^K sigma^{eta^d}, d <= D of the vertex's parity, split into pi_d^+-."""
    if D < 0:
        raise ValueError("D must be >= 0")
    q = datum.q
    cusp = datum.cusp
    theta = cusp.theta_minus_one
    rows: list[Component] = []
    ds = [d for d in range(D + 1) if d % 2 == datum.vertex]

    def job(d: int) -> list[Component]:
        mu = MackeyComponentId((d + 1) // 2)
        if d == 0:
            chi = inflate_to_K(cusp, 1)
            norm = inner_product(chi, chi)
            ok = _is_int(norm, 1)
            return [Component(0, mu, "sigma", cusp.degree, ok, "certified" if ok else "failed",
                              {"norm": complex(norm)}, chi)]
        signs = ("+", "-") if cusp.label == "DL" else ("+" if cusp.label == "plus" else "-",)
        deg = expected_degree(q, d)
        if group_order(q, d + 1) > cap:
            return [Component(d, mu, f"pi{s}", deg, False, "predicted, unverified") for s in signs]
        G = quotient_group(q, d + 1)
        sig = sigma_eta(cusp, d)
        comp = InducedCF(sig, sig.support, full_group(G), name=f"Ind {sig.name}")
        norm = inner_product(comp, comp)
        total = (q + 1) * q ** (d - 1) * cusp.degree
        out = []
        for s in signs:
            model = pi_d_pm(q, theta, d, s)
            ip = inner_product(comp, model)
            checks = {
                "inner_product": complex(ip),
                "norm": complex(norm),
                "induced_degree": comp.degree,
            }
            ok = _is_int(ip, 1) and _is_int(norm, len(signs)) and abs(comp.degree - total) < TOL
            ok = ok and abs(model.degree - deg) < TOL
            out.append(Component(d, mu, f"pi{s}", deg, ok, "certified" if ok else "failed", checks, model, s))
        return out

    for part in _run_jobs(job, ds):
        rows.extend(part)
    return BranchingTable(q, datum, D, rows)


def bk_inner_product(q: int, d: int, sigma1: str, sigma2: str, twist: bool = False) -> complex:
    """<sigma1^{eta^d}, sigma2^{eta^d} (tau)> over BK_d / K_{d+1}."""
    c1, c2 = cuspidal_by_label(q, sigma1), cuspidal_by_label(q, sigma2)
    f1 = sigma_eta(c1, d)
    f2 = sigma_eta(c2, d, twist=twist)
    return inner_product(f1, f2, over=f1.support)


def omega_indices(q: int) -> list[int]:
    """j in 1..(q+1)/2 indexing the nontrivial characters omega_j of ker(N) up to inversion."""
    return list(range(1, (q + 1) // 2 + 1))


def sigma_omega_eta(q: int, j: int, d: int, twist: bool = False) -> FunctionCF:
    """sigma(omega_j)^{eta^d} on BK_d; for omega_0 = omega_{(q+1)/2}, sigma0^+ + sigma0^-."""
    if 2 * j != q + 1:
        return sigma_eta(cuspidal_by_label(q, j), d, twist=twist)
    parts = [sigma_eta(cuspidal_by_label(q, lab), d, twist=twist) for lab in ("plus", "minus")]
    return FunctionCF(parts[0].support, lambda A: parts[0](A) + parts[1](A), name=f"sigma0^eta^{d}")


def bk_pair_intertwining(q: int, d: int, j1: int, j2: int, twist: bool = False) -> complex:
    """I(Res sigma(omega_j1)^{eta^d}, (tau) Res sigma(omega_j2)^{eta^d}) over BK_d."""
    f1 = sigma_omega_eta(q, j1, d)
    f2 = sigma_omega_eta(q, j2, d, twist=twist)
    return inner_product(f1, f2, over=f1.support)


def omega_sign(q: int, j: int) -> int:
    return NormKernelChar(q, j).at_minus_one()


def bk_model(q: int, d: int, x_sign: str, theta_sign: int) -> InducedCF:
    """psi_d^x: Ind from BK_d & T(X) Gamma_d to BK_d of Psi_{theta,X}, X = X(-x pi^-d, 0)."""
    sd = pi_model_datum(q, theta_sign, d, x_sign)
    G = quotient_group(q, d + 1)
    full = sd.inducing_group  # also sets sd.rep_ab
    base = ShapeSubgroup(G, shalika_gamma_shape(d).intersect(iwahori_type_shape(d)))
    H = ProductSubgroup(G, full.reps, base, name=f"BK_{d}&T(X)Gamma_{d}[{x_sign},{theta_sign}]")
    rep_theta = sd.theta(sd.rep_ab)

    def on_support(A):
        idx, rest = H.factor(A)
        mask = idx >= 0
        vals = np.zeros(len(idx), dtype=complex)
        if mask.any():
            vals[mask] = rep_theta[idx[mask]] * psi_X_values(sd.X, rest[mask], G.N)
        return mask, vals

    def fn(A):
        mask, vals = on_support(A)
        if not mask.all():
            raise ValueError("element outside BK_d & T(X) Gamma_d")
        return vals

    chi = FunctionCF(H, fn, name="Psi_theta_X|BK", on_support=on_support)
    return InducedCF(chi, H, ShapeSubgroup(G, iwahori_type_shape(d)), name=f"psi_{d}^{x_sign}")


def chi_psi_intertwining(q: int, d: int, x_sign: str, theta_sign: int, twist: bool = False) -> complex:
    """I(chi_d^x, psi_d^x) with chi_d^x the character of (sigma0^{sgn x})^{eta^d} (times tau)."""
    cusp = cuspidal_by_label(q, "plus" if x_sign == "+" else "minus")
    chi = sigma_eta(cusp, d, twist=twist)
    return inner_product(chi, bk_model(q, d, x_sign, theta_sign))


# ---------------------------------------------------------------------------
# positive depth
# ---------------------------------------------------------------------------

def shalika_sign(X: LieDatum) -> str:
    """'+' when -u pi^d is a square unit, else '-'."""
    fld = residue_field(X.q)
    lead = X.u.shift(X.d).leading()
    return "+" if fld.is_square[fld.neg[lead]] else "-"


def positive_depth_components(datum: YuDatum, D: int, cap: int = DEFAULT_CAP,
                              raise_on_failure: bool = True, with_depth: bool = True) -> BranchingTable:
    """Mackey components Ind_{K & (T G_{y,s})^mu}^K rho^mu with d = r + delta(mu) <= D."""
    if D < datum.r:
        raise ValueError("D must be at least r")
    q = datum.q
    rho = build_rho(datum)
    theta = datum.central_sign()

    def job(m: tuple[int, str]) -> Component:
        t, lam = m
        mu = MackeyComponentId(t, lam)
        if t == 0 and datum.y == 0:
            return _unramified_type(datum, rho, mu, cap)
        dl = delta(datum.y, t, lam)
        d = int(datum.r + dl)
        deg = expected_degree(q, d)
        if group_order(q, d + 1) > cap:
            return Component(d, mu, "shalika", deg, False, "predicted, unverified")
        conj = conjugate_rho(rho, t, lam)
        G = quotient_group(q, d + 1)
        comp = InducedCF(conj.cf, conj.H, full_group(G), name=f"Ind rho^mu(t={t},{lam})")
        model = shalika_character(ShalikaDatum(conj.X, conj.theta))
        ip = inner_product(comp, model)
        minus = comp(G.minus_identity()[None, :])[0]
        checks = {
            "inner_product": complex(ip),
            "degree": comp.degree,
            "central": complex(minus),
        }
        ok = _is_int(ip, 1) and abs(comp.degree - deg) < TOL and abs(minus - deg * theta) < TOL
        if with_depth:
            dep = depth_of(comp)
            checks["depth"] = dep
            ok = ok and dep == d
        return Component(d, mu, "shalika", deg, ok, "certified" if ok else "failed", checks, comp,
                         shalika_sign(conj.X))

    rows = _run_jobs(job, mackey_reps(datum, D))
    table = BranchingTable(q, datum, D, rows)
    if raise_on_failure:
        table.assert_certified()
    return table


def _unramified_type(datum: YuDatum, rho, mu: MackeyComponentId, cap: int) -> Component:
    """The mu = I, y = 0 component: degree (q-1) q^r and irreducible.

    In the Heisenberg case rho is only available on Z T_{0+} G_{y,s}; its induction is the
    sum of the (q+1)/2 extensions to T G_{y,s}, certified by degree and norm (q+1)/2.
    """
    q, r = datum.q, int(datum.r)
    deg = (q - 1) * q**r
    N = rho.N
    if group_order(q, N) > cap:
        return Component(r, mu, "unramified-type", deg, False, "predicted, unverified")
    G = quotient_group(q, N)
    comp = InducedCF(rho.cf, rho.domain, full_group(G), name="Ind rho")
    norm = inner_product(comp, comp)
    copies = (q + 1) // 2 if datum.heisenberg else 1
    checks = {"norm": complex(norm), "degree": comp.degree, "extensions": copies}
    ok = _is_int(norm, copies) and abs(comp.degree - copies * deg) < TOL
    return Component(r, mu, "unramified-type", deg, ok, "certified" if ok else "failed", checks,
                     comp if copies == 1 else None)


_TABLES: dict = {}


def components(desc: Descriptor, D: int, cap: int = DEFAULT_CAP, raise_on_failure: bool = True) -> BranchingTable:
    """Branching table for either kind of datum (memoized per (datum, D, cap))."""
    key = (desc, D, cap)
    t = _TABLES.get(key)
    if t is None:
        if isinstance(desc, DepthZeroDatum):
            t = depth_zero_components(desc, D, cap)
        else:
            t = positive_depth_components(desc, D, cap, raise_on_failure=False)
        _TABLES[key] = t
    if raise_on_failure:
        t.assert_certified()
    return t


def clear_table_cache() -> None:
    _TABLES.clear()


# ---------------------------------------------------------------------------
# intertwining
# ---------------------------------------------------------------------------

def _depth_r(desc: Descriptor) -> Fraction:
    return Fraction(0) if isinstance(desc, DepthZeroDatum) else desc.r


def component_key(desc: Descriptor, c: Component):
    """Predicted isomorphism class of a component.

    Depth-zero rows and positive rows with d > 2r are pi_d^{+-}(theta); the d = 0 row is
    sigma itself.  Other rows get a key only comparable through :func:`band_related`.
    """
    if c.label == "sigma":
        return ("sigma", desc.cusp.name)
    if c.label in ("pi+", "pi-"):
        return ("pi", c.d, desc.central_sign(), c.label[-1])
    if c.label == "shalika" and c.d > 2 * _depth_r(desc):
        return ("pi", c.d, desc.central_sign(), c.sign)
    return None


def _twist_depth(psi) -> Fraction:
    """Depth of a torus character, -1 for the trivial character."""
    vals = psi(psi.group.elements)
    if np.allclose(vals, 1, atol=1e-9):
        return Fraction(-1)
    return Fraction(psi.depth())


def _lambda_of(tid: str) -> str:
    return {"u-eps": "e", "u-eps-eta": "e-eta"}.get(tid, "w")


def _swap(mu: MackeyComponentId, lam_other: str) -> MackeyComponentId:
    """(t, 1) <-> (t, lambda)."""
    return MackeyComponentId(mu.t, lam_other if mu.lam == "1" else "1")


def inverse_partner(datum: YuDatum, mu: MackeyComponentId) -> MackeyComponentId | None:
    """mu' with pi_mu(phi) ~ pi_mu'(phi^-1); None when no coincidence is predicted.

    If -1 is a square, mu' = mu.  Otherwise mu' != mu with delta(mu') = delta(mu), which
    exists only for unramified tori and t > 0: (t, 1) <-> (t, lambda).
    """
    fld = residue_field(datum.q)
    if fld.is_square[fld.minus_one]:
        return mu
    if datum.torus.ramified or mu.t == 0:
        return None
    return _swap(mu, _lambda_of(datum.torus.tid))


def band_related(a: YuDatum, ma: MackeyComponentId, b: YuDatum, mb: MackeyComponentId) -> bool:
    """Predicted coincidence of pi_mu(a) and pi_mu'(b) for components with d <= 2r.

    (i) phi_b = psi phi_a, psi trivial on Z of depth < delta(mu), and mu' = mu;
    (ii) phi_b = psi phi_a^-1 likewise, with mu' the inverse partner of mu.
    """
    if a.torus.tid != b.torus.tid or a.r != b.r or a.phi.N != b.phi.N:
        return False
    dl = ma.delta(a.y)
    if dl != mb.delta(b.y):
        return False
    for psi, inverse in ((b.phi.times(a.phi.inverse()), False), (b.phi.times(a.phi), True)):
        if psi.at_minus_one() != 1 or not _twist_depth(psi) < dl:
            continue
        if not inverse and ma == mb:
            return True
        if inverse and inverse_partner(a, ma) == mb:
            return True
    return False


def unramified_type_related(a: YuDatum, b: YuDatum) -> bool:
    """The mu = I, y = 0 components of phi and phi' agree exactly when phi' is phi or phi^-1."""
    if a.torus.tid != b.torus.tid or a.r != b.r or a.phi.N != b.phi.N:
        return False
    return b.phi.x in (a.phi.x, a.phi.inverse().x)


def predicted_coincidence(da: Descriptor, ca: Component, db: Descriptor, cb: Component) -> bool:
    if ca.d != cb.d:
        return False
    ka, kb = component_key(da, ca), component_key(db, cb)
    if ka is not None or kb is not None:
        return ka is not None and ka == kb
    if ca.label == "unramified-type" or cb.label == "unramified-type":
        return ca.label == cb.label and unramified_type_related(da, db)
    if isinstance(da, YuDatum) and isinstance(db, YuDatum):
        return band_related(da, ca.mu, db, cb.mu)
    return False


@dataclass
class IntertwiningReport:
    data: list[Descriptor]
    cutoff: int
    matrix: np.ndarray
    observed: set = field(default_factory=set)    # {(i, a, j, b)} with i < j, components coincide
    predicted: set = field(default_factory=set)
    tables: list[BranchingTable] = field(default_factory=list, repr=False)

    @property
    def exhaustive(self) -> bool:
        return self.observed == self.predicted

    def to_json(self) -> dict:
        fmt = lambda s: sorted([list(x) for x in s])
        return {
            "cutoff": self.cutoff,
            "data": [descriptor_json(d) for d in self.data],
            "matrix": self.matrix.tolist(),
            "observed": fmt(self.observed),
            "predicted": fmt(self.predicted),
            "observed_equals_predicted": self.exhaustive,
        }


def _comparable(ca: Component, cb: Component) -> bool:
    return (ca.character is not None and cb.character is not None and ca.d == cb.d
            and ca.degree == cb.degree and ca.character.N == cb.character.N)


def intertwining_matrix(data: list[Descriptor], D: int, cap: int = DEFAULT_CAP,
                        tables: list[BranchingTable] | None = None) -> IntertwiningReport:
    """Hom-dimensions between the K_{D+1}-fixed parts of the restrictions.

    Components of different depth or degree are non-isomorphic irreducibles and contribute 0;
    all other pairs are computed by inner products.
    """
    if tables is None:
        tables = [components(desc, D, cap) for desc in data]
    n = len(data)
    M = np.zeros((n, n), dtype=np.int64)
    observed, predicted = set(), set()
    pairs = []
    for i, j in itertools.combinations_with_replacement(range(n), 2):
        for a, ca in enumerate(tables[i].components):
            for b, cb in enumerate(tables[j].components):
                if i == j and b < a:
                    continue
                if i != j and predicted_coincidence(data[i], ca, data[j], cb):
                    predicted.add((i, a, j, b))
                if _comparable(ca, cb):
                    pairs.append((i, a, j, b))

    def job(p):
        i, a, j, b = p
        return nearest_integer(inner_product(tables[i].components[a].character, tables[j].components[b].character))

    vals = _run_jobs(job, pairs)
    for (i, a, j, b), v in zip(pairs, vals):
        M[i, j] += v if (i != j or a == b) else 2 * v
        if i != j:
            M[j, i] += v
            if v:
                observed.add((i, a, j, b))
    return IntertwiningReport(list(data), D, M, observed, predicted, tables)


# ---------------------------------------------------------------------------
# twist laws
# ---------------------------------------------------------------------------

def twist_partners(datum: YuDatum) -> list[tuple[str, YuDatum, int]]:
    """(kind, datum', depth(psi)) for phi' = psi phi ('twist', psi != 1) and phi' = psi phi^-1
    ('inverse'), psi ranging over depth-zero characters trivial on Z."""
    out = []
    for psi in depth_zero_characters_trivial_on_center(datum.torus, datum.phi.N):
        m = _twist_depth(psi)
        if m >= 0:
            out.append(("twist", YuDatum(psi.times(datum.phi)), m))
        out.append(("inverse", YuDatum(psi.times(datum.phi.inverse())), m))
    return out


def twist_law_expectation(kind: str, datum: YuDatum, ma: MackeyComponentId, mb: MackeyComponentId,
                          psi_depth: int) -> bool:
    """Whether the twist laws predict pi_ma(phi) ~ pi_mb(phi') for a partner from twist_partners."""
    dl = ma.delta(datum.y)
    if dl != mb.delta(datum.y) or dl <= psi_depth:
        return False
    if kind == "twist":
        return ma == mb
    return inverse_partner(datum, ma) == mb


def grid_data(q: int, max_r: Fraction | int = 1, depth_zero: bool = True) -> list[Descriptor]:
    """Every datum over the torus class representatives with 0 < r <= max_r (plus depth zero)."""
    from .tori import torus_characters_of_depth, torus_classes

    out: list[Descriptor] = list(depth_zero_data(q)) if depth_zero else []
    max_r = Fraction(max_r)
    for T in torus_classes(q):
        r = Fraction(1, 2) if T.ramified else Fraction(1)
        while r <= max_r:
            out.extend(YuDatum(phi) for phi in torus_characters_of_depth(T, r))
            r += 1
    return out
