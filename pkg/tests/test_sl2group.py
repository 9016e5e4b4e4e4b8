from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from sl2branch.localfield import LocalElem, residue_field
from sl2branch.sl2group import (
    ExplicitSubgroup,
    GroupElement,
    ShapeSubgroup,
    SubgroupDescriptor,
    congruence_shape,
    conjugate,
    e_matrix,
    e_solution,
    eta_conjugation,
    full_shape,
    iwahori_type_shape,
    k_conjugation,
    lambda_set,
    moy_prasad,
    quotient_group,
    shalika_gamma_shape,
    w_matrix,
)


@pytest.mark.parametrize("q, N", [(3, 1), (3, 2), (3, 3), (5, 1), (5, 2)])
def test_group_order_by_enumeration(q, N):
    G = quotient_group(q, N)
    E = G.elements()
    assert len(E) == G.order == (q**3 - q) * q ** (3 * (N - 1))
    assert len(np.unique(G.keys(E))) == len(E)
    assert np.all(G.det(E) == 1)


def test_order_examples():
    assert len(quotient_group(3, 1).elements()) == 24
    assert len(quotient_group(3, 2).elements()) == 648
    assert iwahori_type_shape(1).order(quotient_group(3, 2)) == 162


@pytest.mark.parametrize("d", [1, 2])
def test_bk_index(d):
    q, N = 3, d + 1
    G = quotient_group(q, N)
    assert G.order // iwahori_type_shape(d).order(G) == (q + 1) * q ** (d - 1)


@given(st.integers(0, 2**31))
def test_group_laws(seed):
    G = quotient_group(5, 2)
    rng = np.random.default_rng(seed)
    A, B, C = (G.random(rng, 8) for _ in range(3))
    assert np.array_equal(G.mul(G.mul(A, B), C), G.mul(A, G.mul(B, C)))
    I = np.broadcast_to(G.identity(), A.shape)
    assert np.array_equal(G.mul(A, G.inv(A)), I)
    assert np.all(G.det(G.mul(A, B)) == 1)


@pytest.mark.parametrize("shape", [
    congruence_shape(1),
    iwahori_type_shape(2),
    moy_prasad(Fraction(1, 2), Fraction(1, 2)),
    moy_prasad(0, 1).intersect(moy_prasad(Fraction(1, 2), 1)),
    shalika_gamma_shape(2),
])
def test_shape_subgroups_closed(shape):
    G = quotient_group(3, 3)
    H = ShapeSubgroup(G, shape)
    E = H.elements()
    rng = np.random.default_rng(0)
    i, j = rng.integers(0, len(E), size=(2, 2000))
    assert H.contains(G.mul(E[i], E[j])).all()
    assert H.contains(G.inv(E)).all()
    assert H.contains(G.identity()[None, :]).all()


def test_moy_prasad_shapes():
    assert (lambda s: (s.diag, s.upper, s.lower))(moy_prasad(0, 1)) == (1, 1, 1)
    # y = 1/2 and y = 0 at level d/2: (U_ceil(d/2), P^ceil(d/2); P^ceil((d+1)/2), U_ceil(d/2))
    for d in range(1, 6):
        s = shalika_gamma_shape(d)
        h = -(-d // 2)
        assert (s.diag, s.upper, s.lower) == (h, h, -(-(d + 1) // 2))
    # y = 1, r = 0: eta-conjugate of K, i.e. upper P^-1, lower P^1
    s = moy_prasad(1, 0)
    assert (s.diag, s.upper, s.lower) == (0, -1, 1)
    with pytest.raises(ValueError):
        moy_prasad(Fraction(1, 3), 1)


def test_moy_prasad_plus():
    s = moy_prasad(Fraction(1, 2), Fraction(1, 2), plus=True)
    assert (s.diag, s.upper, s.lower) == (1, 1, 2)


# ---- conjugation ----------------------------------------------------------------

def test_conjugation_examples():
    G3 = quotient_group(3, 3)
    one = GroupElement.from_array(G3, G3.identity())
    for cmap in (eta_conjugation(1), eta_conjugation(2), k_conjugation(3, "w"), k_conjugation(3, "e")):
        img = conjugate(one, cmap)
        assert img.entries == (1, 0, 0, 1)
    # [[1,0],[c pi^2,1]] -> [[1,0],[c,1]] under eta^{-2}-conjugation
    g = GroupElement(3, 3, (1, 0, 2 * 9, 1))
    assert conjugate(g, eta_conjugation(2)) == GroupElement(3, 1, (1, 0, 2, 1))
    # [[1,b],[0,1]] under w -> [[1,0],[-b,1]]
    G = quotient_group(3, 2)
    R = G.ring
    for b in range(9):
        img = conjugate(GroupElement(3, 2, (1, b, 0, 1)), k_conjugation(3, "w"))
        assert img.entries == (1, 0, int(R.neg[b]), 1)


def test_conjugation_domain_enforced():
    with pytest.raises(ValueError):
        conjugate(GroupElement(3, 2, (1, 0, 1, 1)), eta_conjugation(1))


@pytest.mark.parametrize("t", [1, 2, 3])
def test_eta_domain_is_bk(t):
    G = quotient_group(3, t + 1)
    dom = ShapeSubgroup(G, eta_conjugation(t).domain())
    bk = ShapeSubgroup(G, iwahori_type_shape(t))
    assert np.array_equal(np.sort(G.keys(dom.elements())), np.sort(G.keys(bk.elements())))


@given(st.integers(0, 2**31))
def test_conjugation_is_homomorphism(seed):
    G = quotient_group(3, 3)
    rng = np.random.default_rng(seed)
    E = ShapeSubgroup(G, iwahori_type_shape(1)).random(rng, 20)
    F = ShapeSubgroup(G, iwahori_type_shape(1)).random(rng, 20)
    cmap = eta_conjugation(1)
    H, a = cmap.apply(G, E)
    _, b = cmap.apply(G, F)
    _, ab = cmap.apply(G, G.mul(E, F))
    assert np.array_equal(H.mul(a, b), ab)


# ---- Weyl-type representatives -------------------------------------------------

def test_lambda_set():
    assert [lab for lab, _ in lambda_set("r-1-pi", 3)] == ["1", "w"]
    assert [lab for lab, _ in lambda_set("u-eps", 3)] == ["1", "e"]
    assert [lab for lab, _ in lambda_set("u-eps-eta", 3)] == ["1", "e-eta"]
    w = w_matrix(3)
    assert (w.a.is_zero(), w.b.leading(), w.c.leading(), w.d.is_zero()) == (True, 1, 2, True)


def test_e_solution():
    # q = 3, eps = -1: x^2 + y^2 = -1 solved by (1, 1)
    assert e_solution(3) == (1, 1)
    # q = 5: -1 = 2^2, take (0, t) with t^2 = -1
    x, y = e_solution(5)
    F = residue_field(5)
    assert x == 0 and F.mul[y, y] == F.minus_one


@pytest.mark.parametrize("q", [3, 5, 7])
def test_e_matrix_determinant_one(q):
    assert e_matrix(q).det().congruent(LocalElem.one(q), 10)


def test_explicit_subgroup_membership():
    G = quotient_group(3, 2)
    H = ShapeSubgroup(G, congruence_shape(1))
    X = ExplicitSubgroup(G, H.elements())
    assert X.order == H.order == 27
    E = G.elements()
    assert np.array_equal(X.contains(E), H.contains(E))


def test_relation_descriptor():
    G = quotient_group(3, 2)
    s = SubgroupDescriptor(1, 1, 1, relation=(LocalElem.one(3), 2))
    E = s.elements(G)
    R = G.ring
    assert np.all(R.sub[E[:, 2], E[:, 1]] == 0)
    assert s.order(G) == 9
    assert full_shape().order(G) == G.order
