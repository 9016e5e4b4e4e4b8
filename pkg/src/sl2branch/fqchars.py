"""Character table of SL2(F_q) by the class-algebra method, and its cuspidal characters.

The table is computed (not transcribed): conjugacy classes by brute force, class
multiplication coefficients by counting, and central characters as simultaneous
eigenvectors of a random combination of the class-multiplication matrices.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .classfun import FunctionCF
from .localfield import residue_field, xi
from .sl2group import (
    Array,
    QuotientGroup,
    ShapeSubgroup,
    full_shape,
    iwahori_type_shape,
    quotient_group,
)

MAX_Q = 11


@dataclass
class SL2FqTable:
    q: int
    elements: Array                # all elements of SL2(F_q)
    class_of_key: Array            # dense map key -> class index
    class_reps: Array
    class_sizes: Array
    characters: Array              # (n_chars, n_classes) complex values
    degrees: Array

    @property
    def group(self) -> QuotientGroup:
        return quotient_group(self.q, 1)

    @property
    def order(self) -> int:
        return len(self.elements)

    def classes_of(self, A: Array) -> Array:
        A1 = np.asarray(A) % self.q
        return self.class_of_key[self.group.keys(A1)]

    def class_label(self, i: int) -> str:
        a, b, c, d = (int(x) for x in self.class_reps[i])
        return f"[[{a},{b}],[{c},{d}]]"

    def inner(self, v1: Array, v2: Array) -> complex:
        return complex(np.sum(self.class_sizes * v1 * np.conj(v2)) / self.order)


def _conjugacy_classes(G: QuotientGroup) -> tuple[Array, Array, Array, Array]:
    E = G.elements()
    keys = G.keys(E)
    class_of_key = np.full(G.M**4, -1, dtype=np.int64)
    reps, sizes = [], []
    for i in range(len(E)):
        if class_of_key[keys[i]] >= 0:
            continue
        orbit = np.unique(G.keys(G.conj(E, E[i][None, :])))
        class_of_key[orbit] = len(reps)
        reps.append(E[i])
        sizes.append(len(orbit))
    return E, class_of_key, np.array(reps), np.array(sizes)


@lru_cache(maxsize=None)
def sl2fq_table(q: int, seed: int = 0) -> SL2FqTable:
    """The complete character table of SL2(F_q)."""
    if q > MAX_Q:
        raise ValueError(f"q={q} exceeds the configured bound {MAX_Q}")
    G = quotient_group(q, 1)
    E, class_of_key, reps, sizes = _conjugacy_classes(G)
    n = len(reps)
    keys = G.keys(E)
    cls = class_of_key[keys]
    members = [E[cls == i] for i in range(n)]
    # c[i, j, k] = #{x in C_i : x^{-1} g_k in C_j}
    c = np.zeros((n, n, n))
    for i in range(n):
        inv_i = G.inv(members[i])
        for k in range(n):
            y = G.mul(inv_i, reps[k][None, :])
            c[i, :, k] = np.bincount(class_of_key[G.keys(y)], minlength=n)
    id_class = int(class_of_key[G.keys(G.identity())])
    rng = np.random.default_rng(seed)
    for _ in range(20):
        coeffs = rng.normal(size=n)
        A = np.tensordot(coeffs, c, axes=1)
        evals, evecs = np.linalg.eig(A)
        gaps = np.abs(evals[:, None] - evals[None, :]) + np.eye(n)
        if gaps.min() > 1e-6:
            break
    else:  # pragma: no cover
        raise RuntimeError("eigenvalue degeneracy not resolved")
    omegas = evecs / evecs[id_class][None, :]
    chars = []
    degs = []
    order = len(E)
    for col in range(n):
        w = omegas[:, col]
        deg2 = order / np.sum(np.abs(w) ** 2 / sizes)
        deg = math.sqrt(deg2.real)
        chars.append(w * deg / sizes)
        degs.append(deg)
    chars = np.array(chars)
    degs = np.array(degs)
    order_idx = np.lexsort((np.round(chars[:, :].real.sum(axis=1), 6), np.round(degs, 6)))
    return SL2FqTable(q, E, class_of_key, reps, sizes, chars[order_idx], degs[order_idx])


# ---------------------------------------------------------------------------
# the norm-one torus and its characters
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class NormKernelChar:
    """omega_j on ker(N) ~ {[[a, b], [eps b, a]]}, omega_j(g0^k) = exp(2 pi i j k / (q+1))."""

    q: int
    j: int

    @property
    def order_two(self) -> bool:
        return (2 * self.j) % (self.q + 1) == 0 and self.j != 0

    def value_at_power(self, k: int) -> complex:
        return cmath.exp(2j * math.pi * self.j * k / (self.q + 1))

    def at_minus_one(self) -> int:
        return int(round(self.value_at_power((self.q + 1) // 2).real))


@lru_cache(maxsize=None)
def norm_kernel_generator(q: int) -> tuple[Array, Array]:
    """(g0, powers) with g0 of order q+1 in the elliptic torus of SL2(F_q); powers[k] = g0^k."""
    fld = residue_field(q)
    G = quotient_group(q, 1)
    eps = fld.eps
    cands = []
    for a in range(q):
        for b in range(q):
            if fld.sub[fld.mul[a, a], fld.mul[eps, fld.mul[b, b]]] == 1:
                cands.append([a, b, int(fld.mul[eps, b]), a])
    for g in cands:
        g = np.array(g, dtype=np.int64)
        powers = [G.identity()]
        cur = g.copy()
        while not np.array_equal(cur, G.identity()):
            powers.append(cur)
            cur = G.mul(cur, g)
        if len(powers) == q + 1:
            return g, np.array(powers)
    raise AssertionError("no generator of the norm-one torus")  # pragma: no cover


def omega_zero(q: int) -> NormKernelChar:
    return NormKernelChar(q, (q + 1) // 2)


@dataclass
class CuspidalChar:
    q: int
    label: str                  # "DL", "plus" or "minus"
    omega: NormKernelChar
    values: Array               # per class of SL2(F_q)
    table: SL2FqTable = field(repr=False)

    @property
    def degree(self) -> int:
        return int(round(self.values[self.table.classes_of(quotient_group(self.q, 1).identity()[None, :])[0]].real))

    @property
    def theta_minus_one(self) -> int:
        """Central character at -I."""
        G1 = quotient_group(self.q, 1)
        v = self.values[self.table.classes_of(G1.minus_identity()[None, :])[0]]
        return int(round((v / self.degree).real))

    @property
    def name(self) -> str:
        if self.label == "DL":
            return f"sigma(omega_{self.omega.j})"
        return f"sigma0^{'+' if self.label == 'plus' else '-'}"

    def evaluate(self, A: Array) -> Array:
        """Value at elements of SL2(R/P^N) through reduction mod P."""
        return self.values[self.table.classes_of(A)]


def _unipotent_sum(table: SL2FqTable, values: Array) -> complex:
    q = table.q
    U = np.array([[1, b, 0, 1] for b in range(q)])
    return complex(values[table.classes_of(U)].sum())


@lru_cache(maxsize=None)
def sl2fq_cuspidal_table(q: int) -> tuple[CuspidalChar, ...]:
    """Cuspidal characters: sigma(omega_j) for 0 < j < (q+1)/2 and the pair sigma0^+-."""
    table = sl2fq_table(q)
    fld = residue_field(q)
    g0, powers = norm_kernel_generator(q)
    pow_cls = table.classes_of(powers)
    cusp = [v for v in table.characters if abs(_unipotent_sum(table, v)) < 1e-6]
    out: list[CuspidalChar] = []
    half = []
    for v in cusp:
        deg = v[table.classes_of(np.array([[1, 0, 0, 1]]))[0]].real
        if abs(deg - (q - 1)) < 1e-6:
            match = None
            for j in range(1, (q + 1) // 2):
                w = NormKernelChar(q, j)
                ok = True
                for k, cl in enumerate(pow_cls):
                    z = w.value_at_power(k)
                    if k in (0, (q + 1) // 2):
                        expected = (q - 1) * z
                    else:
                        expected = -(z + 1 / z)
                    if abs(v[cl] - expected) > 1e-6:
                        ok = False
                        break
                if ok:
                    match = w
                    break
            if match is None:
                raise RuntimeError("DL cuspidal not matched to a norm-kernel character")
            out.append(CuspidalChar(q, "DL", match, v, table))
        elif abs(deg - (q - 1) / 2) < 1e-6:
            half.append(v)
    if len(half) != 2:
        raise RuntimeError(f"expected two half-degree cuspidals, found {len(half)}")
    w0 = omega_zero(q)
    theta0 = w0.at_minus_one()
    labeled = {}
    for sign, x in (("plus", 1), ("minus", fld.eps)):
        # sigma0^{sgn x} at [[z,0],[c,z]], c != 0: xi_{-z c x} theta0(z)
        pattern = []
        for z in (1, int(fld.minus_one)):
            for cc in range(1, q):
                g = np.array([[z, 0, cc, z]])
                u = int(fld.neg[fld.mul[z, fld.mul[cc, x]]])
                pattern.append((table.classes_of(g)[0], xi(q, u) * (theta0 if z != 1 else 1)))
        hits = [v for v in half if all(abs(v[cl] - val) < 1e-6 for cl, val in pattern)]
        if len(hits) != 1:
            raise RuntimeError("labeling mismatch for the half-degree cuspidals")
        labeled[sign] = hits[0]
    out.sort(key=lambda c: c.omega.j)
    out.append(CuspidalChar(q, "plus", w0, labeled["plus"], table))
    out.append(CuspidalChar(q, "minus", w0, labeled["minus"], table))
    return tuple(out)


def cuspidal_by_label(q: int, label: str | int) -> CuspidalChar:
    """Look up sigma(omega_j) by j (int) or sigma0^+- by 'plus'/'minus'."""
    for c in sl2fq_cuspidal_table(q):
        if isinstance(label, int) or str(label).isdigit():
            j = int(label)
            if c.label == "DL" and (c.omega.j == j or c.omega.j == (q + 1 - j) % (q + 1)):
                return c
        elif c.label == label:
            return c
    raise KeyError(f"no cuspidal with label {label!r} at q={q}")


def dl_character_from_formula(q: int, j: int) -> Array:
    """Full-table row of sigma(omega_j) for j with omega_j^2 != 1 (reference lookup)."""
    return cuspidal_by_label(q, j).values


def lambda_char(q: int, a: Array) -> Array:
    """lambda(a) = exp(2 pi i log_g(a) / (q-1)); lambda(-1) = -1."""
    fld = residue_field(q)
    return np.exp(2j * np.pi * fld.log[np.asarray(a) % q] / (q - 1))


def tau_char(q: int, d: int, N: int | None = None) -> FunctionCF:
    """tau on BK_d: lambda of the reduction of the (1,1) entry."""
    if d < 1:
        raise ValueError("d must be >= 1")
    N = N or d + 1
    G = quotient_group(q, N)
    H = ShapeSubgroup(G, iwahori_type_shape(d))
    return FunctionCF(H, lambda A: lambda_char(q, A[..., 0]), name=f"tau_{d}")


def inflate_to_K(chi: CuspidalChar, N: int) -> FunctionCF:
    G = quotient_group(chi.q, N)
    return FunctionCF(ShapeSubgroup(G, full_shape()), chi.evaluate, name=chi.name)


def cuspidal_csv(q: int) -> str:
    """Cuspidal characters as CSV rows (class label, class size, values) with an orthogonality footer."""
    table = sl2fq_table(q)
    cusp = sl2fq_cuspidal_table(q)
    header = ["class", "size"] + [c.name for c in cusp]
    lines = [",".join(header)]

    def fmt(z: complex) -> str:
        re, im = round(z.real, 6) + 0.0, round(z.imag, 6) + 0.0
        return f"{re:.6f}{'+' if im >= 0 else '-'}{abs(im):.6f}i"

    for i in range(len(table.class_reps)):
        row = [f"\"{table.class_label(i)}\"", str(int(table.class_sizes[i]))]
        row += [fmt(c.values[i]) for c in cusp]
        lines.append(",".join(row))
    gram = np.array([[table.inner(a.values, b.values) for b in cusp] for a in cusp])
    err = float(np.abs(gram - np.eye(len(cusp))).max())
    lines.append(f"# orthogonality: max |<chi_i,chi_j> - delta_ij| = {err:.3e}")
    lines.append(f"# sum of squared degrees over the full table = {int(round(np.sum(table.degrees**2)))} (|G| = {table.order})")
    return "\n".join(lines) + "\n"
