from fractions import Fraction

import numpy as np
import pytest

from sl2branch.localfield import residue_field
from sl2branch.tori import (
    TORUS_IDS,
    generic_element_for,
    torus_characters_of_depth,
    torus_classes,
    torus_descriptor,
    torus_filtration,
    torus_subgroup,
)

HALF = Fraction(1, 2)


def test_torus_orders_mod_p():
    q = 3
    assert torus_subgroup(torus_descriptor("u-eps", q), 1).order == q + 1
    assert torus_subgroup(torus_descriptor("r-1-pi", q), 1).order == 2 * q


@pytest.mark.parametrize("q", [3, 5])
@pytest.mark.parametrize("tid", TORUS_IDS)
def test_torus_is_abelian_and_in_sl2(q, tid):
    T = torus_subgroup(torus_descriptor(tid, q), 2)
    E = T.elements
    rng = np.random.default_rng(0)
    i, j = rng.integers(0, len(E), size=(2, 200))
    assert np.array_equal(T.keys(T.mul(E[i], E[j])), T.keys(T.mul(E[j], E[i])))
    R = T.ring
    if tid == "u-eps-eta":  # gamma1 = pi^-1: only b in P gives an integral matrix
        E = E[R.in_ideal(E[:, 1], 1)]
    M = T.matrices(E)
    det = R.sub[R.mul[M[:, 0], M[:, 3]], R.mul[M[:, 1], M[:, 2]]]
    assert np.all(det == 1)


def test_unramified_filtration_indices():
    T = torus_descriptor("u-eps", 3)
    sizes = [len(torus_filtration(T, Fraction(m), 3)) for m in range(4)]
    assert sizes == [36, 9, 3, 1]
    # [T_m : T_{m+1}] = q for m >= 1
    assert sizes[1] // sizes[2] == sizes[2] // sizes[3] == 3


def test_ramified_jumps_at_half_integers():
    T = torus_descriptor("r-1-pi", 3)
    N = 4
    for k in range(0, 6):
        r = Fraction(k, 2)
        at = len(torus_filtration(T, r, N))
        plus = len(torus_filtration(T, r, N, plus=True))
        if r == 0:
            assert at // plus == 2  # +-1
        elif r.denominator == 2:
            assert at // plus == 3
        else:
            assert at == plus


def test_character_counts():
    T = torus_descriptor("u-eps", 3)
    # |T/T_{1+}| - |T/T_1| = (q+1)q - (q+1)
    assert len(torus_characters_of_depth(T, Fraction(1))) == 8
    assert torus_characters_of_depth(T, HALF) == []
    R = torus_descriptor("r-1-pi", 3)
    assert len(torus_characters_of_depth(R, HALF)) == 4
    assert torus_characters_of_depth(R, Fraction(1)) == []


@pytest.mark.parametrize("tid, r", [("u-eps", Fraction(1)), ("u-eps", Fraction(2)), ("r-1-pi", HALF),
                                    ("r-1-epspi", Fraction(3, 2)), ("u-eps-eta", Fraction(1))])
def test_characters_have_exact_depth(tid, r):
    T = torus_descriptor(tid, 3)
    chars = torus_characters_of_depth(T, r)
    assert chars
    for phi in chars:
        assert phi.depth() == r
        G = phi.group
        plus = G.filtration(r, plus=True)
        assert np.allclose(phi(plus), 1)


def test_character_group_operations():
    T = torus_descriptor("u-eps", 3)
    phi = torus_characters_of_depth(T, Fraction(1))[0]
    E = phi.group.elements
    assert np.allclose(phi(E) * phi.inverse()(E), 1)
    assert np.allclose(phi.times(phi)(E), phi(E) ** 2)


@pytest.mark.parametrize("q, n", [(3, 4), (5, 6), (7, 4)])
def test_torus_class_count(q, n):
    assert len(torus_classes(q)) == n


def test_unknown_torus():
    with pytest.raises(ValueError):
        torus_descriptor("nope", 3)


# ---- generic elements -----------------------------------------------------------

def test_generic_element_valuation():
    for tid, r in (("u-eps", Fraction(1)), ("r-1-pi", HALF), ("u-eps-eta", Fraction(1))):
        T = torus_descriptor(tid, 3)
        for phi in torus_characters_of_depth(T, r):
            for gam in generic_element_for(phi):
                assert gam.a_gamma1().val() == -(r + T.y)


def test_heisenberg_choices():
    """Unramified torus with even r: q choices of the generic element."""
    T = torus_descriptor("u-eps", 3)
    for phi in torus_characters_of_depth(T, Fraction(2))[:4]:
        assert len(generic_element_for(phi)) == 3
    phi = torus_characters_of_depth(T, Fraction(1))[0]
    assert len(generic_element_for(phi)) == 1


def test_generic_element_reproduces_phi():
    """phi(t) = Psi(Tr(Gamma(t - 1))) on every t in T_{s+}, s = r/2."""
    T = torus_descriptor("u-eps", 3)
    r = Fraction(1)
    for phi in torus_characters_of_depth(T, r):
        gam = generic_element_for(phi)[0]
        G = phi.group
        sub = G.filtration(r / 2, plus=True)
        assert np.allclose(gam.pairing(sub[:, 1], G.ring), phi(sub))


def test_minus_one_value_is_sign():
    T = torus_descriptor("u-eps", 5)
    F = residue_field(5)
    for phi in torus_characters_of_depth(T, Fraction(1)):
        assert phi.at_minus_one() in (1, -1)
        assert phi.at_minus_one() == round(phi(np.array([[int(F.minus_one), 0]]))[0].real)
