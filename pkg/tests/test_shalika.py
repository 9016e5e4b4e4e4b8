import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from sl2branch.classfun import depth_of, inner_product, nearest_integer
from sl2branch.localfield import LocalElem
from sl2branch.shalika import (
    LieDatum,
    ShalikaDatum,
    central_theta,
    centralizer,
    centralizer_index,
    correction_formula,
    count_extensions,
    diagonal_twist_test,
    expected_degree,
    extensions,
    gamma_group,
    matched_datum,
    matched_theta,
    psi_X,
    psi_X_values,
    shalika_character,
    transfer,
    transfer_level,
)
from sl2branch.sl2group import quotient_group

TOL = 1e-6


def test_expected_degree():
    assert expected_degree(3, 1) == 4
    assert expected_degree(3, 2) == 12
    assert expected_degree(3, 3) == 36
    assert expected_degree(5, 2) == 60


def test_lie_datum_validation():
    with pytest.raises(ValueError):
        LieDatum.make(3, 0, 1)
    with pytest.raises(ValueError):
        LieDatum.make(3, 2, 1, LocalElem.monomial(3, 1, -2))


def test_psi_X_at_identity_and_lower_unipotent():
    q, d = 3, 2
    X = LieDatum.make(q, d, 2)  # X(-pi^-2, 0)
    N = d + 1
    assert psi_X(X, quotient_group(q, N).identity()) == pytest.approx(1)
    # g = [[1,0],[c pi^d,1]]: Psi(u g21) = Psi(-c)
    for c in range(q):
        g = np.array([1, 0, c * q**d, 1])
        assert abs(psi_X(X, g) - np.exp(-2j * np.pi * c / q)) < TOL


@given(st.integers(0, 2**31))
def test_psi_X_multiplicative_on_gamma_group(seed):
    q, d = 3, 3
    X = LieDatum.make(q, d, 1, LocalElem.monomial(q, 2, -1))
    H = gamma_group(q, d)
    rng = np.random.default_rng(seed)
    A, B = H.random(rng, 500), H.random(rng, 500)
    G = H.G
    lhs = psi_X_values(X, G.mul(A, B), d + 1)
    rhs = psi_X_values(X, A, d + 1) * psi_X_values(X, B, d + 1)
    assert np.abs(lhs - rhs).max() < 1e-12


def test_extension_count_q3_d1():
    X = LieDatum.make(3, 1, 2)
    n, thetas = count_extensions(X)
    # frozen by enumeration: [T(X) : T(X) & Gamma_1] = 6
    assert n == centralizer_index(X) == 6
    assert len({tuple(np.round(t.table, 8)) for t in thetas}) == n


@pytest.mark.parametrize("d", [1, 2, 3])
def test_at_least_two_extensions(d):
    for u in (1, 2):
        assert count_extensions(LieDatum.make(3, d, u))[0] >= 2


def test_central_theta_signs():
    X = LieDatum.make(3, 2, 1)
    assert central_theta(X, 1).at_minus_one() == 1
    assert central_theta(X, -1).at_minus_one() == -1


@pytest.mark.parametrize("d, deg", [(1, 4), (2, 12)])
def test_shalika_degree_norm_depth(d, deg):
    X = LieDatum.make(3, d, 1, LocalElem.monomial(3, 1, 1 - d) if d > 1 else None)
    for th in extensions(X)[:3]:
        S = shalika_character(ShalikaDatum(X, th))
        assert S.degree == pytest.approx(deg)
        assert abs(inner_product(S, S) - 1) < TOL
        assert depth_of(S) == d


def test_distinct_thetas_orthogonal():
    X = LieDatum.make(3, 1, 2)
    chars = [shalika_character(ShalikaDatum(X, t)) for t in extensions(X)]
    gram = np.array([[inner_product(a, b) for b in chars] for a in chars])
    assert np.abs(gram - np.eye(len(chars))).max() < TOL


def test_theta_must_extend_psi_X():
    X = LieDatum.make(3, 3, 1)
    Xv = LieDatum.make(3, 3, 1, LocalElem.monomial(3, 1, -1))  # different centralizer
    with pytest.raises(ValueError):
        ShalikaDatum(X, extensions(Xv)[0])


# ---- transfer ---------------------------------------------------------------------

def test_transfer_identity_when_equal():
    X = LieDatum.make(3, 2, 1)
    T = centralizer(X)
    for a, b in T.elements[:10]:
        pair = transfer((int(a), int(b)), X, X)
        assert pair.t == pair.t_prime
        assert pair.correction == (1, 0, 0, 1)


def test_transfer_trivial_when_c_agrees_to_full_precision():
    X = LieDatum.make(3, 2, 1)
    Xp = LieDatum.make(3, 2, 1, LocalElem.monomial(3, 1, 1))  # c' = pi^3
    assert transfer_level(X, Xp) == 3
    T = centralizer(Xp)
    pair = transfer(tuple(int(x) for x in T.elements[5]), X, Xp)
    assert pair.correction == (1, 0, 0, 1)


def test_transfer_correction_formula_d3():
    q, d = 3, 3
    X = LieDatum.make(q, d, 1)
    Xp = LieDatum.make(q, d, 1, LocalElem.monomial(q, 1, -1))
    assert transfer_level(X, Xp) == 2  # c' = pi^2 >= ceil((d+1)/2)
    gam = gamma_group(q, d)
    Tp = centralizer(Xp)
    moved = 0
    for a, b in Tp.elements:
        pair = transfer((int(a), int(b)), X, Xp)
        corr = np.array(pair.correction)
        assert gam.contains(corr[None, :])[0]
        assert abs(correction_formula(pair, X, Xp) - psi_X(X, corr)) < TOL
        moved += pair.t != pair.t_prime
    assert moved == 108  # frozen: transfers that change the a-coordinate


def test_matched_theta():
    q, d = 3, 3
    X = LieDatum.make(q, d, 1)
    Xp = LieDatum.make(q, d, 1, LocalElem.monomial(q, 1, -1))
    th = extensions(X)[0]
    assert matched_theta(th, X, X).equals(th)
    S = ShalikaDatum(X, th)
    Sp = matched_datum(S, Xp)
    assert nearest_integer(inner_product(shalika_character(S), shalika_character(Sp))) == 1


def test_matched_theta_requires_level_agreement():
    X = LieDatum.make(3, 2, 1)
    Xp = LieDatum.make(3, 2, 1, LocalElem.monomial(3, 1, -1))
    with pytest.raises(ValueError):
        matched_theta(extensions(X)[0], X, Xp)


# ---- diagonal twists --------------------------------------------------------------

def test_diagonal_twist_examples():
    q, d = 3, 2
    X = LieDatum.make(q, d, 1)
    S = ShalikaDatum(X, extensions(X)[0])
    same = diagonal_twist_test(S, S)
    assert same.equivalent and same.inner_product == 1
    # non-square ratio
    Xe = LieDatum.make(q, d, 2)
    for th in extensions(Xe):
        rep = diagonal_twist_test(S, ShalikaDatum(Xe, th))
        assert not rep.square_ratio and rep.inner_product == 0
    # square ratio 1 + pi: exactly one matching theta
    Xs = LieDatum.make(q, d, LocalElem.make(q, 0, [1, 1] + [0] * 10))
    reps = [diagonal_twist_test(S, ShalikaDatum(Xs, th)) for th in extensions(Xs)]
    assert all(r.square_ratio and r.consistent for r in reps)
    assert sorted(r.inner_product for r in reps) == [0] * (len(reps) - 1) + [1]
