import cmath
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from sl2branch.localfield import (
    LocalElem,
    NoSolutionError,
    PrecisionError,
    TruncatedRing,
    psi,
    residue_field,
    solve_unit_square,
    square_class,
    truncated_ring,
    val,
    xi,
)

QS = (3, 5, 7, 9)


def elems(q: int, N: int = 4, min_val: int = -2, max_val: int = 2):
    return st.builds(
        lambda v, cs: LocalElem.make(q, v, cs),
        st.integers(min_val, max_val),
        st.lists(st.integers(0, q - 1), min_size=N, max_size=N),
    )


def units(q: int, N: int = 4):
    return st.builds(
        lambda c0, cs: LocalElem.make(q, 0, [c0] + cs),
        st.integers(1, q - 1),
        st.lists(st.integers(0, q - 1), min_size=N - 1, max_size=N - 1),
    )


# ---- residue field ---------------------------------------------------------

@pytest.mark.parametrize("q", QS)
def test_residue_field_axioms(q):
    F = residue_field(q)
    xs = np.arange(q)
    assert np.array_equal(F.add[xs, 0], xs)
    assert np.array_equal(F.mul[xs, 1], xs)
    assert np.array_equal(F.add[xs, F.neg[xs]], np.zeros(q, dtype=int))
    nz = xs[1:]
    assert np.array_equal(F.mul[nz, F.inv[nz]], np.ones(q - 1, dtype=int))
    # distributivity on all triples
    a, b, c = np.meshgrid(xs, xs, xs, indexing="ij")
    assert np.array_equal(F.mul[a, F.add[b, c]], F.add[F.mul[a, b], F.mul[a, c]])
    assert len(F.squares) == (q - 1) // 2
    assert not F.is_square[F.eps]


@pytest.mark.parametrize("q, minus_one_square", [(3, False), (5, True), (7, False), (9, True)])
def test_minus_one_square_class(q, minus_one_square):
    assert bool(residue_field(q).is_square[residue_field(q).minus_one]) == minus_one_square


def test_even_or_composite_q_rejected():
    for bad in (4, 6, 2):
        with pytest.raises(ValueError):
            residue_field(bad)


# ---- valuation and arithmetic ---------------------------------------------------

def test_val_examples():
    assert val(LocalElem.monomial(3, 1, 1)) == 1
    assert val(LocalElem.zero(3, 5)) == math.inf
    assert val(LocalElem.monomial(3, 2, -2)) == -2
    assert val(LocalElem.make(5, -2, [3, 1, 4])) == -2


@given(elems(5), elems(5))
def test_val_multiplicative(x, y):
    if x.is_zero() or y.is_zero():
        return
    assert val(x * y) == val(x) + val(y)


@given(elems(3), elems(3), elems(3))
def test_ring_laws(x, y, z):
    prec = min(x.precision, y.precision, z.precision) - 4
    assert ((x + y) + z).congruent(x + (y + z), prec)
    assert (x * (y + z)).congruent(x * y + x * z, prec)
    assert (x - x).is_zero() or val(x - x) >= (x - x).precision


@given(units(7))
def test_inverse(u):
    assert (u * u.inverse()).congruent(LocalElem.one(7), u.precision)


def test_index_roundtrip():
    for idx in range(27):
        assert LocalElem.from_index(3, idx, 3).to_index(3) == idx


def test_to_index_needs_precision():
    with pytest.raises(PrecisionError):
        LocalElem.make(3, 0, [1, 1]).to_index(3)


# ---- square classes --------------------------------------------------------------

def test_square_class_examples():
    assert square_class(LocalElem.monomial(3, 2, 0)) == "eps"
    assert square_class(LocalElem.one(3)) == "1"
    assert square_class(LocalElem.monomial(5, 4, 1)) == "pi"
    assert square_class(LocalElem.monomial(5, 2, 0)) == "eps"
    assert square_class(LocalElem.monomial(5, 2, 1)) == "eps*pi"


@given(units(5, 3), units(5, 3))
def test_square_class_of_square_times_unit(u, w):
    assert square_class(u * u * w) == square_class(w)


# ---- additive character -----------------------------------------------------------

def test_psi_examples():
    assert psi(LocalElem.monomial(3, 1, 1)) == pytest.approx(1)
    assert psi(LocalElem.zero(3, 4)) == pytest.approx(1)
    assert psi(LocalElem.one(3)) == pytest.approx(cmath.exp(2j * math.pi / 3))


def test_psi_needs_constant_term():
    with pytest.raises(PrecisionError):
        psi(LocalElem.make(3, -3, [1, 2]))


@given(elems(9, 4, -1, 1), elems(9, 4, -1, 1))
def test_psi_additive(x, y):
    if (x + y).precision < 1 or x.precision < 1 or y.precision < 1:
        return
    assert abs(psi(x + y) - psi(x) * psi(y)) < 1e-12
    assert abs(abs(psi(x)) - 1) < 1e-12


# ---- Hensel --------------------------------------------------------------------

def test_solve_unit_square_examples():
    assert solve_unit_square(LocalElem.zero(3, 4), 4).congruent(LocalElem.one(3), 4)
    a = solve_unit_square(LocalElem.monomial(3, 1, 1, 4), 4)
    # digits frozen from squaring check: (1 + 2t + t^2 + t^3)^2 = 1 + t mod t^4
    assert a.coeffs == (1, 2, 1, 1) and a.val_offset == 0
    with pytest.raises(NoSolutionError):
        solve_unit_square(LocalElem.monomial(3, 1, 0, 4), 4)  # 1 + c = eps


@given(st.sampled_from((3, 5, 7)), st.data())
def test_solve_unit_square_squares_back(q, data):
    c = data.draw(elems(q, 6, 1, 2))
    a = solve_unit_square(c, 6)
    assert (a * a).congruent(LocalElem.one(q, 6) + c, 6)
    assert a.leading() == 1 and a.val_offset == 0


# ---- xi ---------------------------------------------------------------------------

@pytest.mark.parametrize("q", QS)
def test_xi_sum_identity(q):
    F = residue_field(q)
    total = sum(xi(q, u) * xi(q, int(F.neg[u])) for u in range(1, q))
    assert abs(total - (q * q - 1) / 4) < 1e-9


@pytest.mark.parametrize("q", QS)
def test_xi_conjugation(q):
    F = residue_field(q)
    for u in range(1, q):
        assert abs(np.conj(xi(q, u)) - xi(q, int(F.neg[u]))) < 1e-12


def test_xi_q3():
    assert xi(3, 1) == pytest.approx(cmath.exp(2j * math.pi / 3))


# ---- vectorized ring ------------------------------------------------------------

@pytest.mark.parametrize("q, N", [(3, 3), (5, 2), (9, 2)])
def test_truncated_ring_matches_scalar(q, N):
    R = truncated_ring(q, N)
    rng = np.random.default_rng(1)
    for x, y in rng.integers(0, R.size, size=(50, 2)):
        X, Y = R.local(x), R.local(y)
        assert R.add[x, y] == (X + Y).to_index(N)
        assert R.mul[x, y] == (X * Y).to_index(N)
    units_ = np.nonzero(R.val == 0)[0]
    assert np.all(R.mul[units_, R.inv[units_]] == 1)
    # unit squares are exactly half the units
    assert R.is_square[units_].sum() == len(units_) // 2


def test_truncated_ring_size_limit():
    with pytest.raises(MemoryError):
        TruncatedRing(3, 8)
