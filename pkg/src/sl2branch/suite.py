"""Named verification checks, shared by ``sl2branch verify suite`` and the acceptance tests.

Each check returns a :class:`CheckResult`; checks never raise on a mathematical failure.
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import branching as br
from .classfun import (
    FunctionCF,
    InducedCF,
    depth_of,
    inner_product,
    nearest_integer,
    restrict,
)
from .fqchars import NormKernelChar, norm_kernel_generator, sl2fq_cuspidal_table, sl2fq_table
from .localfield import LocalElem, NoSolutionError, PrecisionError, residue_field, xi
from .shalika import (
    LieDatum,
    ShalikaDatum,
    expected_degree,
    extensions,
    gamma_group,
    matched_datum,
    psi_X_values,
    shalika_character,
)
from .sl2group import (
    ShapeSubgroup,
    congruence_shape,
    eta_conjugation,
    full_group,
    iwahori_type_shape,
    opposite_borel_shape,
    quotient_group,
    shalika_gamma_shape,
)
from .yudata import (
    YuDatum,
    build_heisenberg_rho,
    conjugate_rho,
    data_of_depth,
    heisenberg_spectrum,
    polarization_difference,
    spectrum_agrees_on_plus,
)

TOL = 1e-6


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: dict = field(default_factory=dict)
    seconds: float = 0.0

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'} {self.name} ({self.seconds:.1f}s)"


def _timed(name: str, fn: Callable[[], tuple[bool, dict]]) -> CheckResult:
    t0 = time.perf_counter()
    ok, detail = fn()
    return CheckResult(name, bool(ok), detail, time.perf_counter() - t0)


def _close(z: complex, n: float, tol: float = TOL) -> bool:
    return abs(z - n) < tol


# ---------------------------------------------------------------------------
# 1. cuspidal characters of SL2(F_q)
# ---------------------------------------------------------------------------

def dl_formula(q: int, j: int, A: np.ndarray) -> np.ndarray:
    """Closed-form value of sigma(omega_j) on elements of SL2(F_q)."""
    fld = residue_field(q)
    om = NormKernelChar(q, j)
    _, powers = norm_kernel_generator(q)
    tr_pow = {int(fld.add[p[0], p[3]]): k for k, p in enumerate(powers)}
    two = int(fld.add[1, 1])
    out = np.zeros(len(A), dtype=complex)
    for i, (a, b, c, d) in enumerate(np.asarray(A) % q):
        tr = int(fld.add[a, d])
        scalar = b == 0 and c == 0 and a == d
        if scalar:
            out[i] = (q - 1) * (1 if a == 1 else om.at_minus_one())
        elif tr in (two, int(fld.neg[two])):
            out[i] = -(1 if tr == two else om.at_minus_one())
        else:
            disc = int(fld.sub[fld.mul[tr, tr], fld.add[two, two]])
            if fld.is_square[disc]:
                out[i] = 0
            else:
                z = om.value_at_power(tr_pow[tr])
                out[i] = -(z + 1 / z)
    return out


def bop_formula(q: int, j: int, A: np.ndarray) -> np.ndarray:
    """(q-1) omega(a) at a = +-1, c = 0; -omega(a) at a = +-1, c != 0; 0 elsewhere."""
    om = NormKernelChar(q, j)
    m1 = int(residue_field(q).minus_one)
    out = np.zeros(len(A), dtype=complex)
    for i, (a, _, c, _) in enumerate(np.asarray(A) % q):
        if a in (1, m1):
            w = 1 if a == 1 else om.at_minus_one()
            out[i] = (q - 1) * w if c == 0 else -w
    return out


def check_cuspidal_table(q: int) -> CheckResult:
    def run():
        table = sl2fq_table(q)
        gram = np.array([[table.inner(a, b) for b in table.characters] for a in table.characters])
        orth = float(np.abs(gram - np.eye(len(gram))).max())
        sumsq = int(round(float(np.sum(table.degrees.real**2))))
        cusp = sl2fq_cuspidal_table(q)
        dl = [c for c in cusp if c.label == "DL"]
        half = [c for c in cusp if c.label != "DL"]
        E = table.elements
        j0 = (q + 1) // 2
        split_sum = half[0].evaluate(E) + half[1].evaluate(E)
        omega0 = float(np.abs(split_sum - dl_formula(q, j0, E)).max())
        dl_err = max(float(np.abs(c.evaluate(E) - dl_formula(q, c.omega.j, E)).max()) for c in dl)
        Bop = quotient_group(q, 1).elements()
        Bop = Bop[opposite_borel_shape(1).contains(quotient_group(q, 1), Bop)]
        bop_err = max(float(np.abs(c.evaluate(Bop) - bop_formula(q, c.omega.j, Bop)).max()) for c in dl)
        bop0 = float(np.abs(half[0].evaluate(Bop) + half[1].evaluate(Bop) - bop_formula(q, j0, Bop)).max())
        detail = {
            "orthogonality": orth, "sum_deg_sq": sumsq, "order": table.order,
            "dl_degrees": [c.degree for c in dl], "split_degrees": [c.degree for c in half],
            "sigma0_sum_error": omega0, "dl_formula_error": dl_err, "bop_error": max(bop_err, bop0),
        }
        ok = (orth < TOL and sumsq == table.order and all(c.degree == q - 1 for c in dl)
              and len(dl) == (q - 1) // 2 and all(2 * c.degree == q - 1 for c in half) and len(half) == 2
              and omega0 < TOL and dl_err < TOL and bop_err < TOL and bop0 < TOL)
        return ok, detail

    return _timed(f"cuspidal-table q={q}", run)


# ---------------------------------------------------------------------------
# 2. Shalika's representations
# ---------------------------------------------------------------------------

def sample_lie_data(q: int, d: int, n: int, seed: int = 0) -> list[LieDatum]:
    """X(u, v) with u a unit times pi^-d and v = 0 or a random element of valuation > -d."""
    rng = np.random.default_rng(seed)
    out = []
    units = list(range(1, q))
    while len(out) < n:
        u = LocalElem.make(q, -d, [int(rng.choice(units))] + [int(x) for x in rng.integers(0, q, d)])
        if rng.random() < 0.3:
            v = LocalElem.zero(q, 64)
        else:
            k = int(rng.integers(-d + 1, 2))
            v = LocalElem.make(q, k, [int(rng.integers(1, q))] + [int(x) for x in rng.integers(0, q, d + 1)])
        out.append(LieDatum(q, d, u, v))
    return out


def sample_shalika_data(q: int, d: int, n: int = 10, seed: int = 0) -> list[ShalikaDatum]:
    rng = np.random.default_rng(seed + 1)
    out = []
    for X in sample_lie_data(q, d, n, seed):
        th = extensions(X)
        out.append(ShalikaDatum(X, th[int(rng.integers(len(th)))]))
    return out


def check_shalika(q: int, d: int, n: int = 10, seed: int = 0) -> CheckResult:
    def run():
        bad = []
        for sd in sample_shalika_data(q, d, n, seed):
            S = shalika_character(sd)
            norm = inner_product(S, S)
            dep = depth_of(S)
            if not (_close(norm, 1) and abs(S.degree - expected_degree(q, d)) < TOL and dep == d):
                bad.append({"X": (repr(sd.X.u), repr(sd.X.v)), "norm": complex(norm), "degree": S.degree, "depth": dep})
        return not bad, {"samples": n, "failures": bad}

    return _timed(f"shalika q={q} d={d}", run)


# ---------------------------------------------------------------------------
# 3, 4. restriction to BK_d
# ---------------------------------------------------------------------------

def check_bk_pairs(q: int, d: int) -> CheckResult:
    def run():
        rows = []
        ok = True
        for j1, j2 in itertools.product(br.omega_indices(q), repeat=2):
            same = br.omega_sign(q, j1) == br.omega_sign(q, j2)
            plain = br.bk_pair_intertwining(q, d, j1, j2)
            twisted = br.bk_pair_intertwining(q, d, j1, j2, twist=True)
            good = _close(plain, 2 if same else 0) and _close(twisted, 0 if same else 2)
            ok &= good
            rows.append((j1, j2, round(plain.real, 9), round(twisted.real, 9)))
        return ok, {"pairs": rows}

    return _timed(f"bk-restriction q={q} d={d}", run)


def check_chi_psi(q: int, d: int) -> CheckResult:
    def run():
        theta0 = {s: br.cuspidal_by_label(q, "plus" if s == "+" else "minus").theta_minus_one for s in "+-"}
        rows = []
        ok = True
        for s in "+-":
            for th in (1, -1):
                v = br.chi_psi_intertwining(q, d, s, th)
                want = 1 if th == theta0[s] else 0
                ok &= _close(v, want)
                rows.append((s, th, round(v.real, 9)))
        return ok, {"values": rows}

    return _timed(f"chi-psi q={q} d={d}", run)


# ---------------------------------------------------------------------------
# 5. depth-zero tables
# ---------------------------------------------------------------------------

def check_depth_zero(q: int, D: int, cap: int = br.DEFAULT_CAP) -> CheckResult:
    def run():
        bad = []
        for dz in br.depth_zero_data(q):
            t = br.depth_zero_components(dz, D, cap)
            if not t.all_certified or t.unverified:
                bad.append(dz.label)
                continue
            deg = dz.cusp.degree
            for d in {c.d for c in t.components}:
                rows = [c for c in t.components if c.d == d]
                want = deg if d == 0 else (q + 1) * q ** (d - 1) * deg
                split = len(rows) == 1 or all(2 * c.degree == want for c in rows)
                if sum(c.degree for c in rows) != want or not split:
                    bad.append(f"{dz.label} d={d} degrees")
                for a, b in itertools.combinations(rows, 2):
                    if not _close(inner_product(a.character, b.character), 0):
                        bad.append(f"{dz.label} d={d} orthogonality")
            expected_total = deg * (1 if dz.vertex == 0 else 0) + sum(
                (q + 1) * q ** (d - 1) * deg for d in range(1, D + 1) if d % 2 == dz.vertex)
            if sum(c.degree for c in t.components) != expected_total:
                bad.append(f"{dz.label} total degree")
        return not bad, {"failures": bad}

    return _timed(f"depth-zero q={q} D={D}", run)


# ---------------------------------------------------------------------------
# 6, 7. positive depth
# ---------------------------------------------------------------------------

POSITIVE_GRID_Q3 = (("r-1-pi", "1/2", 3), ("r-1-epspi", "1/2", 3), ("u-eps", "1", 3), ("u-eps-eta", "1", 2))


def check_positive(q: int = 3, grid=POSITIVE_GRID_Q3, cap: int = br.DEFAULT_CAP) -> CheckResult:
    def run():
        bad, n = [], 0
        for tid, r, D in grid:
            for datum in data_of_depth(tid, q, r):
                t = br.positive_depth_components(datum, D, cap, raise_on_failure=False)
                n += len(t.components)
                if not t.all_certified:
                    bad.extend(t.failures())
                for c in t.components:
                    if c.status == "predicted, unverified":
                        bad.append(f"{datum.label} d={c.d} over budget")
                    if c.label == "unramified-type" and not (
                            c.degree == (q - 1) * q ** int(datum.r) and _close(c.checks["norm"], 1)):
                        bad.append(f"{datum.label} unramified-type")
        return not bad, {"components": n, "failures": bad}

    return _timed(f"positive-depth q={q}", run)


def heisenberg_rho_checks(q: int = 3, r: str = "2") -> tuple[bool, dict]:
    detail = {}
    ok = True
    for datum in data_of_depth("u-eps", q, r):
        diff = polarization_difference(datum)
        rho = build_heisenberg_rho(datum, "root", check=False)
        iso = (rho.torus_isotypy_error(), rho.gamma_isotypy_error())
        spectra = []
        for t, lam in ((1, "1"), (1, "e")):
            conj = conjugate_rho(rho, t, lam)
            sp, matches = heisenberg_spectrum(conj)
            distinct = len(sp.terms) == q and all(term.multiplicity == 1 for term in sp.terms)
            one_to_one = sorted(len(m) for m in matches) == [1] * q and len({m[0] for m in matches}) == q
            plus = spectrum_agrees_on_plus(conj, sp)
            spectra.append((t, lam, distinct, one_to_one, plus))
            ok &= distinct and one_to_one and plus
        ok &= diff < TOL and max(iso) < TOL
        detail[datum.label] = {"polarization_difference": diff, "isotypy": iso, "spectrum": spectra}
    return ok, detail


def check_heisenberg(q: int = 3, certify: bool = True, cap: int = br.DEFAULT_CAP) -> CheckResult:
    def run():
        ok, detail = heisenberg_rho_checks(q)
        if certify:
            datum = data_of_depth("u-eps", q, "2")[0]
            t = br.positive_depth_components(datum, 4, cap, raise_on_failure=False, with_depth=False)
            detail["d4"] = [(c.d, c.mu.to_json(), c.status) for c in t.components]
            ok &= t.all_certified
        return ok, detail

    return _timed(f"heisenberg q={q}", run)


# ---------------------------------------------------------------------------
# 8. intertwining
# ---------------------------------------------------------------------------

def lie_representatives(q: int, d: int) -> list[LieDatum]:
    """X(u, v): u in F_q^x pi^-d and v = v0 pi^k, one per (u, k, v0) with -d < k <= 0 (plus v = 0)."""
    out = []
    for u in range(1, q):
        out.append(LieDatum.make(q, d, u))
        for k in range(-d + 1, 1):
            for v0 in range(1, q):
                out.append(LieDatum.make(q, d, u, LocalElem.monomial(q, v0, k)))
    return out


def check_theta_injective(q: int, d: int) -> CheckResult:
    def run():
        bad, n = [], 0
        for X in lie_representatives(q, d):
            chars = [shalika_character(ShalikaDatum(X, th)) for th in extensions(X)]
            for (i, a), (j, b) in itertools.combinations_with_replacement(enumerate(chars), 2):
                n += 1
                if not _close(inner_product(a, b), 1 if i == j else 0):
                    bad.append((repr(X.u), repr(X.v), i, j))
        return not bad, {"pairs": n, "failures": bad}

    return _timed(f"theta-injective q={q} d={d}", run)


def check_matched_theta(q: int = 3, n: int = 10, seed: int = 0) -> CheckResult:
    def run():
        rng = np.random.default_rng(seed)
        done, bad, tries = 0, [], 0
        while done < n and tries < 50 * n:
            tries += 1
            d = int(rng.integers(2, 4))
            sd = sample_shalika_data(q, d, 1, int(rng.integers(1 << 30)))[0]
            k = int(rng.integers(1 - d // 2, 2))
            dv = LocalElem.monomial(q, int(rng.integers(1, q)), k)
            try:
                Xp = LieDatum(q, d, sd.X.u, sd.X.v + dv)
                sp = matched_datum(sd, Xp)
            except (ValueError, NoSolutionError, PrecisionError):
                continue
            done += 1
            ip = inner_product(shalika_character(sd), shalika_character(sp))
            if not _close(ip, 1):
                bad.append((d, repr(sd.X.v), repr(Xp.v), complex(ip)))
        return done >= n and not bad, {"instances": done, "failures": bad}

    return _timed(f"matched-theta q={q}", run)


def check_large_depth(q: int = 3, D: int = 3) -> CheckResult:
    def run():
        bad = []
        for tid in ("r-1-pi", "r-1-epspi"):
            for datum in data_of_depth(tid, q, "1/2"):
                t = br.components(datum, D)
                th = datum.central_sign()
                for c in t.components:
                    if c.d <= 2 * datum.r:
                        continue
                    ips = [inner_product(c.character, br.pi_d_pm(q, th, c.d, s)) for s in "+-"]
                    hits = [s for s, v in zip("+-", ips) if _close(v, 1)]
                    zeros = [s for s, v in zip("+-", ips) if _close(v, 0)]
                    if len(hits) != 1 or len(zeros) != 1 or hits[0] != c.sign:
                        bad.append((datum.label, c.d, [complex(v) for v in ips]))
        return not bad, {"failures": bad}

    return _timed(f"large-depth q={q}", run)


def twist_law_rows(datum: YuDatum, D: int) -> list[tuple]:
    """(kind, partner, mu, mu', expected, observed) over comparable component pairs."""
    base = br.components(datum, D)
    rows = []
    for kind, partner, m in br.twist_partners(datum):
        other = br.components(partner, D)
        for ca in base.components:
            for cb in other.components:
                if ca.character is None or cb.character is None or ca.d != cb.d or ca.degree != cb.degree:
                    continue
                obs = nearest_integer(inner_product(ca.character, cb.character)) == 1
                if ca.label == "unramified-type" or cb.label == "unramified-type":
                    exp = ca.label == cb.label and br.unramified_type_related(datum, partner)
                else:
                    exp = br.twist_law_expectation(kind, datum, ca.mu, cb.mu, m)
                rows.append((kind, partner.label, ca.mu.to_json(), cb.mu.to_json(), exp, obs))
    return rows


def check_twist_laws(q: int = 3, D: int = 3) -> CheckResult:
    def run():
        bad, n = [], 0
        from .tori import torus_classes

        for T in torus_classes(q):
            r = "1/2" if T.ramified else "1"
            DD = D if T.y != 1 else 2
            for datum in data_of_depth(T.tid, q, r):
                for row in twist_law_rows(datum, DD):
                    n += 1
                    if row[4] != row[5]:
                        bad.append((datum.label,) + row)
        return not bad, {"comparisons": n, "failures": bad}

    return _timed(f"twist-laws q={q}", run)


def check_exhaustive(q: int = 3, D: int = 3) -> CheckResult:
    def run():
        rep = br.intertwining_matrix(br.grid_data(q, 1), D)
        diag_ok = all(rep.matrix[i, i] == len(t.components) for i, t in enumerate(rep.tables))
        return rep.exhaustive and diag_ok, {
            "observed": len(rep.observed), "predicted": len(rep.predicted),
            "missing": sorted(rep.predicted - rep.observed), "unexplained": sorted(rep.observed - rep.predicted),
            "multiplicity_free": diag_ok,
        }

    return _timed(f"exhaustive q={q} D={D}", run)


# ---------------------------------------------------------------------------
# 9. infrastructure
# ---------------------------------------------------------------------------

def check_infrastructure(seed: int = 0) -> CheckResult:
    def run():
        rng = np.random.default_rng(seed)
        detail = {}
        ok = True
        # group orders
        counts = []
        for q, N in ((3, 1), (3, 2), (3, 3), (5, 1), (5, 2)):
            G = quotient_group(q, N)
            counts.append(len(G.elements()) == q ** (3 * N - 2) * (q * q - 1))
        detail["orders"] = counts
        ok &= all(counts)
        # Frobenius reciprocity on random triples (H, chi a character of H, f a class function on K)
        frob = []
        for _ in range(20):
            q = 3 if rng.random() < 0.7 else 5
            N = 2
            G = quotient_group(q, N)
            K = full_group(G)
            X = sample_lie_data(q, 1, 1, int(rng.integers(1 << 30)))[0]
            if rng.random() < 0.5:
                H = ShapeSubgroup(G, congruence_shape(1))
                al = rng.integers(0, q, 3)
                chi = FunctionCF(H, lambda A, al=al, q=q: np.exp(2j * np.pi * (
                    al[0] * (A[:, 0] // q) + al[1] * (A[:, 1] // q) + al[2] * (A[:, 2] // q)) / q), name="lin")
            else:
                H = gamma_group(q, 1)
                chi = FunctionCF(H, lambda A, X=X, N=N: psi_X_values(X, A, N), name="Psi_X")
            table = sl2fq_table(q)
            coeff = rng.normal(size=len(table.characters)) + 1j * rng.normal(size=len(table.characters))
            S = shalika_character(ShalikaDatum(X, extensions(X)[0]))
            c_s = complex(rng.normal(), rng.normal())
            f = FunctionCF(K, lambda A, t=table, c=coeff, S=S, c_s=c_s:
                           (c[:, None] * t.characters[:, t.classes_of(A)]).sum(axis=0) + c_s * S(A), name="f")
            lhs = inner_product(InducedCF(chi, H, K), f, over=K)
            rhs = inner_product(chi, restrict(f, H), over=H)
            frob.append(abs(lhs - rhs))
        detail["frobenius_max_error"] = max(frob)
        ok &= max(frob) < TOL
        # induction in stages
        G = quotient_group(3, 2)
        Hs = ShapeSubgroup(G, shalika_gamma_shape(1).intersect(iwahori_type_shape(1)))
        M = ShapeSubgroup(G, iwahori_type_shape(1))
        chi = FunctionCF(Hs, lambda A: np.exp(2j * np.pi * (A[:, 1] % 3) / 3), name="chi")
        one = InducedCF(chi, Hs, full_group(G))
        two = InducedCF(InducedCF(chi, Hs, M), M, full_group(G))
        sample = G.random(rng, 200)
        detail["stages_error"] = float(np.abs(one(sample) - two(sample)).max())
        ok &= detail["stages_error"] < TOL
        # subgroup closure
        closed = []
        for shape in (shalika_gamma_shape(2), iwahori_type_shape(2), congruence_shape(1)):
            G = quotient_group(3, 3)
            S = ShapeSubgroup(G, shape)
            A, B = S.random(rng, 500), S.random(rng, 500)
            closed.append(bool(S.contains(G.mul(A, B)).all() and S.contains(G.inv(A)).all()))
        detail["closure"] = closed
        ok &= all(closed)
        # xi identity
        xis = []
        for q in (3, 5, 7, 9):
            fld = residue_field(q)
            s = sum(xi(q, u) * xi(q, int(fld.neg[u])) for u in range(1, q))
            xis.append(abs(s - (q * q - 1) / 4))
        detail["xi_error"] = max(xis)
        ok &= max(xis) < TOL
        # K & K^{eta^t} = BK_t
        bk = []
        for q, t, N in ((3, 1, 2), (3, 2, 3), (5, 1, 2)):
            G = quotient_group(q, N)
            E = G.elements()
            integral = eta_conjugation(t).domain().contains(G, E)
            bk.append(bool(np.array_equal(integral, iwahori_type_shape(t).contains(G, E))))
        detail["bk_equal"] = bk
        ok &= all(bk)
        return ok, detail

    return _timed("infrastructure", run)


# ---------------------------------------------------------------------------
# the suite
# ---------------------------------------------------------------------------

def suite_checks(q: int = 3, D: int = 3, heisenberg_certify: bool = True,
                 cap: int = br.DEFAULT_CAP) -> list[tuple[str, Callable[[], CheckResult]]]:
    """(name, thunk) in acceptance order; ``q`` selects the main field for the q-specific checks."""
    qs = sorted({q, 5} if q == 3 else {q})
    checks = [("cuspidal-table", lambda: [check_cuspidal_table(qq) for qq in sorted({3, 5, 7} | {q})])]
    checks.append(("shalika", lambda: [check_shalika(qq, d) for qq in qs for d in ((1, 2, 3) if qq == 3 else (1, 2))]))
    checks.append(("bk-restriction", lambda: [check_bk_pairs(qq, d) for qq in qs for d in (1, 2)]))
    checks.append(("chi-psi", lambda: [check_chi_psi(q, d) for d in range(1, min(D, 3) + 1)]))
    checks.append(("depth-zero", lambda: [check_depth_zero(q, D, cap)]))
    if q == 3:
        checks.append(("positive-depth", lambda: [check_positive(q, cap=cap)]))
        checks.append(("heisenberg", lambda: [check_heisenberg(q, heisenberg_certify, cap)]))
        checks.append(("intertwining", lambda: [
            check_theta_injective(q, 1), check_theta_injective(q, 2), check_matched_theta(q),
            check_large_depth(q, D), check_twist_laws(q, D), check_exhaustive(q, D)]))
    checks.append(("infrastructure", lambda: [check_infrastructure()]))
    return checks


def run_suite(q: int = 3, D: int = 3, name_filter: str | None = None, emit: Callable[[str], None] = print,
              heisenberg_certify: bool = True, cap: int = br.DEFAULT_CAP) -> list[CheckResult]:
    out = []
    for name, thunk in suite_checks(q, D, heisenberg_certify, cap):
        if name_filter and name_filter not in name:
            continue
        for res in thunk():
            emit(res.line())
            out.append(res)
    return out
