import numpy as np
import pytest

from sl2branch.fqchars import (
    cuspidal_by_label,
    cuspidal_csv,
    inflate_to_K,
    lambda_char,
    norm_kernel_generator,
    omega_zero,
    sl2fq_cuspidal_table,
    sl2fq_table,
    tau_char,
)
from sl2branch.classfun import depth_of
from sl2branch.localfield import residue_field
from sl2branch.sl2group import quotient_group

TOL = 1e-6


@pytest.mark.parametrize("q", [3, 5, 7, 9])
def test_full_table_orthogonal(q):
    t = sl2fq_table(q)
    n = len(t.characters)
    gram = np.array([[t.inner(t.characters[i], t.characters[j]) for j in range(n)] for i in range(n)])
    assert np.abs(gram - np.eye(n)).max() < TOL
    degrees = t.characters[:, t.classes_of(quotient_group(q, 1).identity()[None, :])[0]].real
    assert np.allclose(degrees, t.degrees)
    assert abs((degrees**2).sum() - t.order) < TOL
    assert n == q + 4  # SL2(F_q), q odd


def test_cuspidal_table_q3():
    tab = sl2fq_cuspidal_table(3)
    assert [(c.label, c.degree) for c in tab] == [("DL", 2), ("plus", 1), ("minus", 1)]


@pytest.mark.parametrize("q", [3, 5, 7])
def test_cuspidal_degrees(q):
    tab = sl2fq_cuspidal_table(q)
    dl = [c for c in tab if c.label == "DL"]
    split = [c for c in tab if c.label != "DL"]
    assert len(dl) == (q - 1) // 2 and all(c.degree == q - 1 for c in dl)
    assert len(split) == 2 and all(c.degree == (q - 1) // 2 for c in split)


@pytest.mark.parametrize("q", [3, 5, 7])
def test_split_pair_sums_to_omega_zero(q):
    tab = sl2fq_cuspidal_table(q)
    plus, minus = (c for c in tab if c.label != "DL")
    assert plus.omega == minus.omega == omega_zero(q)
    # sigma(omega_0) from the elliptic torus: on g0^k (k not 0, (q+1)/2) value -(w^k + w^-k)
    t = plus.table
    g0, powers = norm_kernel_generator(q)
    w = omega_zero(q)
    for k in range(1, q + 1):
        if 2 * k == q + 1:
            continue
        cls = t.classes_of(powers[k][None, :])[0]
        expected = -(w.value_at_power(k) + w.value_at_power(-k))
        assert abs(plus.values[cls] + minus.values[cls] - expected) < TOL


@pytest.mark.parametrize("q", [3, 5])
def test_cuspidal_on_opposite_borel(q):
    """(q-1) w(a) on +-I, and -w(a) on +-(nontrivial lower unipotent)."""
    F = residue_field(q)
    for c in sl2fq_cuspidal_table(q):
        if c.label != "DL":
            continue
        for a, sign in ((1, 1), (int(F.minus_one), c.omega.at_minus_one())):
            for x in range(q):
                v = c.evaluate(np.array([[a, 0, x, a]]))[0]
                expected = (q - 1) * sign if x == 0 else -sign
                assert abs(v - expected) < TOL


def test_cuspidal_by_label_normalizes():
    assert cuspidal_by_label(5, 4).name == cuspidal_by_label(5, 2).name == "sigma(omega_2)"
    with pytest.raises(KeyError):
        cuspidal_by_label(5, 3)  # omega_3 has order two: not a DL cuspidal
    assert cuspidal_by_label(3, "plus").name == "sigma0^+"


def test_central_signs_q3():
    # sigma(omega_1) at q=3: omega_1(-1) = -1; the split pair has trivial central character
    assert [c.theta_minus_one for c in sl2fq_cuspidal_table(3)] == [-1, 1, 1]


def test_tau_char():
    q, d = 3, 1
    tau = tau_char(q, d)
    G = tau.G
    assert tau(G.minus_identity()[None, :])[0] == pytest.approx(-1)
    assert tau(np.array([[1, 5, 0, 1]]))[0] == pytest.approx(1)
    # tau^2 on diag(a, a^-1) is lambda^2(a)
    F = residue_field(q)
    for a in range(1, q):
        g = np.array([[a, 0, 0, int(F.inv[a])]])
        assert tau(g)[0] ** 2 == pytest.approx(lambda_char(q, np.array([a]))[0] ** 2)
    with pytest.raises(ValueError):
        tau_char(q, 0)


def test_inflation():
    for c in sl2fq_cuspidal_table(3):
        inf = inflate_to_K(c, 2)
        assert inf.degree == pytest.approx(c.degree)
        assert depth_of(inf) == 0


def test_cuspidal_csv_shape():
    text = cuspidal_csv(3)
    lines = text.strip().splitlines()
    assert lines[0] == "class,size,sigma(omega_1),sigma0^+,sigma0^-"
    assert len(lines) == 1 + 7 + 2  # header, 7 classes of SL2(F_3), footer
    assert lines[-1].endswith("= 24 (|G| = 24)")
