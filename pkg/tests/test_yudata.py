from fractions import Fraction

import numpy as np
import pytest

from sl2branch.tori import TorusCharacter, torus_characters_of_depth, torus_descriptor, torus_group
from sl2branch.yudata import (
    YuDatum,
    build_heisenberg_rho,
    build_phi_hat,
    build_rho,
    conjugate_rho,
    data_of_depth,
    delta,
    heisenberg_spectrum,
    mackey_reps,
    parse_depth,
    polarization_difference,
    restriction_spectrum,
    spectrum_agrees_on_plus,
)
from sl2branch.sl2group import ShapeSubgroup, moy_prasad

TOL = 1e-6
HALF = Fraction(1, 2)


def test_parse_depth():
    assert parse_depth("3/2") == Fraction(3, 2)
    assert parse_depth(2) == 2
    with pytest.raises(ValueError):
        parse_depth("x")


def test_datum_validation():
    T = torus_descriptor("u-eps", 3)
    phi = torus_characters_of_depth(T, Fraction(1))[0]
    YuDatum(phi)
    assert data_of_depth("u-eps", 3, "1/2") == []
    assert len(data_of_depth("r-1-pi", 3, "1/2")) == 4
    with pytest.raises(ValueError):
        YuDatum(TorusCharacter("r-1-pi", 3, HALF, 2, (Fraction(0),)))  # trivial phi, depth 0


def test_json_roundtrip():
    for tid, r in (("r-1-pi", "1/2"), ("u-eps", "1"), ("u-eps-eta", "1")):
        d = data_of_depth(tid, 3, r)[0]
        back = YuDatum.from_json(d.to_json())
        assert back.label == d.label
        assert back.to_json() == d.to_json()


def test_delta():
    assert delta(HALF, 1, "w") == Fraction(3, 2)
    assert delta(HALF, 1, "1") == Fraction(5, 2)
    assert delta(Fraction(0), 1, "e") == 2
    assert delta(Fraction(1), 1, "1") == 3


def test_mackey_reps_examples():
    ram = data_of_depth("r-1-pi", 3, "1/2")[0]
    # depths r + delta: 1/2 (I), 2 (alpha w), 3 (alpha)
    assert mackey_reps(ram, 3) == [(0, "1"), (1, "w"), (1, "1")]
    unr = data_of_depth("u-eps", 3, "1")[0]
    assert mackey_reps(unr, 3) == [(0, "1"), (1, "1"), (1, "e")]
    assert mackey_reps(data_of_depth("u-eps-eta", 3, "1")[0], 2) == [(0, "1")]


# ---- rho -------------------------------------------------------------------------

@pytest.mark.parametrize("tid, r", [("r-1-pi", "1/2"), ("r-1-epspi", "1/2"), ("u-eps", "1"), ("u-eps-eta", "1")])
def test_phi_hat_isotypy(tid, r):
    for d in data_of_depth(tid, 3, r)[:3]:
        rho = build_phi_hat(d)
        assert rho.degree == 1
        assert rho.torus_isotypy_error() < TOL
        assert rho.gamma_isotypy_error() < TOL


def test_phi_hat_restricts_to_phi():
    d = data_of_depth("u-eps", 3, "1")[0]
    rho = build_phi_hat(d)
    TG = torus_group("u-eps", 3, rho.N)
    AB = TG.elements
    assert np.abs(rho(TG.matrices(AB)) - d.phi(AB, rho.N)).max() < TOL


def test_phi_hat_multiplicative():
    d = data_of_depth("r-1-pi", 3, "1/2")[1]
    rho = build_phi_hat(d)
    H = rho.domain
    G = H.G
    rng = np.random.default_rng(0)
    A, B = H.random(rng, 2000), H.random(rng, 2000)
    assert np.abs(rho(G.mul(A, B)) - rho(A) * rho(B)).max() < TOL


def test_phi_hat_trivial_on_depth_r_plus():
    d = data_of_depth("u-eps", 3, "1")[2]
    rho = build_phi_hat(d)
    G = rho.domain.G
    K = moy_prasad(d.base_y, d.r, plus=True).elements(G)
    assert np.abs(rho(K) - 1).max() < TOL


def test_heisenberg_rho():
    d = data_of_depth("u-eps", 3, "2")[0]
    assert d.heisenberg
    rho = build_heisenberg_rho(d, "root")
    assert rho.degree == 3
    assert rho.torus_isotypy_error() < TOL
    assert rho.gamma_isotypy_error() < TOL
    assert polarization_difference(d) < TOL
    assert build_rho(d).degree == 3


def test_heisenberg_spectrum():
    d = data_of_depth("u-eps", 3, "2")[5]
    rho = build_heisenberg_rho(d, "root", check=False)
    for t, lam in ((1, "1"), (1, "e")):
        conj = conjugate_rho(rho, t, lam)
        sp, matches = heisenberg_spectrum(conj)
        assert len(sp.terms) == 3 and all(term.multiplicity == 1 for term in sp.terms)
        assert sorted(m[0] for m in matches) == [0, 1, 2]
        assert spectrum_agrees_on_plus(conj, sp)


def test_degree_one_spectrum_single_term():
    d = data_of_depth("u-eps", 3, "1")[0]
    rho = build_phi_hat(d)
    H = ShapeSubgroup(rho.domain.G, moy_prasad(0, d.s, plus=True))  # K_1
    sp = restriction_spectrum(rho.cf, H, moy_prasad(0, d.r, plus=True))
    assert len(sp.terms) == 1 and sp.terms[0].multiplicity == 1
    with pytest.raises(ValueError):
        conjugate_rho(rho, 0, "1")  # mu = I at y = 0 is the unramified-type component


def test_conjugated_bookkeeping():
    d = data_of_depth("r-1-pi", 3, "1/2")[0]
    conj = conjugate_rho(build_phi_hat(d), 0, "1")
    assert (conj.d, conj.delta, conj.N) == (1, HALF, 2)
