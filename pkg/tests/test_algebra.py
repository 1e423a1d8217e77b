import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from isingcause.algebra import (
    ONE,
    AlgebraElement,
    U,
    adjoint,
    commutator,
    doubled,
    from_matrix,
    is_projection,
    is_selfadjoint,
    mul,
    rep,
    site_value,
    trace,
    trace_product,
    window_monomials,
)
from isingcause.errors import InvalidSite, SiteOutOfWindow
from oracle import Dense

WINDOW = (-1, 1.5)  # six sites
SITES = [-1, -0.5, 0, 0.5, 1, 1.5]

coeffs = st.complex_numbers(min_magnitude=0, max_magnitude=3, allow_nan=False, allow_infinity=False)
monomials = st.lists(st.sampled_from(SITES), max_size=5)


@st.composite
def elements(draw, max_terms=4):
    out = AlgebraElement()
    for _ in range(draw(st.integers(1, max_terms))):
        out = out + AlgebraElement.monomial(draw(monomials), draw(coeffs))
    return out


# -- sites -----------------------------------------------------------------


def test_doubled_roundtrip():
    for i in (-3, -2.5, 0, 0.5, 7):
        assert site_value(doubled(i)) == i
    assert doubled("1/2") == 1


@pytest.mark.parametrize("bad", [0.25, 1 / 3, "x", None])
def test_invalid_site(bad):
    with pytest.raises(InvalidSite):
        U(bad)


# -- multiplication --------------------------------------------------------


def test_neighbours_anticommute():
    assert mul(U(-0.5), U(-1)) == -(AlgebraElement.monomial([-1, -0.5]))


def test_generator_squares_to_one():
    assert mul(U(0), U(0)) == ONE


def test_distant_product_cancels_shared_site():
    x = mul(U(-1) * U(0), U(0) * U(1))
    assert x.terms == {(-2, 2): 1 + 0j}


def test_product_against_oracle():
    G = Dense(-1, 1)
    x = mul(U(-1) * U(0), U(0) * U(1))
    np.testing.assert_allclose(G.of(x), G[-1] @ G[0] @ G[0] @ G[1], atol=1e-14)


def test_commutation_relations_all_pairs():
    for i, j in itertools.combinations(SITES, 2):
        sign = -1 if abs(i - j) == 0.5 else 1
        assert mul(U(i), U(j)) == sign * mul(U(j), U(i))


def test_scalar_arithmetic():
    x = 2 * U(0) + 1
    assert (x - 1) / 2 == U(0)
    assert (x ** 2) == 5 * ONE + 4 * U(0)
    assert (x ** 0) == ONE


def test_pruning_removes_dust():
    x = U(0) + 1e-15 * U(1)
    assert x.terms == {(0,): 1 + 0j}


# -- adjoint ----------------------------------------------------------------


def test_adjoint_examples():
    x = 1j * U(-0.5) * U(0)
    assert adjoint(x) == x
    assert is_selfadjoint(x)
    assert adjoint(ONE) == ONE
    assert adjoint((2 - 3j) * U(-1)) == (2 + 3j) * U(-1)


def test_adjoint_matches_oracle():
    G = Dense(-1, 1)
    x = (1 + 2j) * U(-1) * U(-0.5) * U(0) + 0.5j * U(0.5) * U(1)
    np.testing.assert_allclose(G.of(adjoint(x)), G.of(x).conj().T, atol=1e-14)


# -- trace ------------------------------------------------------------------


def test_trace_examples():
    assert trace(ONE) == 1
    assert trace(U(-1) * U(1)) == 0


def test_trace_product_matches_product():
    x = 0.3 * U(0) + 2j * U(0) * U(0.5) + 1
    y = U(0.5) * U(0) - U(0)
    assert trace_product(x, y) == pytest.approx(trace(mul(x, y)))


# -- predicates --------------------------------------------------------------


def test_commutator_examples():
    assert commutator(U(-1), U(1)).is_zero()
    assert commutator(U(0), U(0.5)) == 2 * U(0) * U(0.5)
    assert is_projection(0.5 * (ONE + U(0)))
    assert not is_projection(U(0))


# -- representation -----------------------------------------------------------


def test_rep_identity_and_anticommutation():
    np.testing.assert_array_equal(rep(ONE, WINDOW), np.eye(2 ** 7))
    a, b = rep(U(-1), WINDOW), rep(U(-0.5), WINDOW)
    np.testing.assert_array_equal(a @ b + b @ a, np.zeros_like(a))


def test_rep_trace_of_nontrivial_word():
    m = rep(U(-1) * U(0), WINDOW)
    assert np.trace(m) / m.shape[0] == 0


def test_rep_out_of_window():
    with pytest.raises(SiteOutOfWindow):
        rep(U(2), WINDOW)


def test_rep_injective_on_monomials():
    """Distinct monomials map to distinct, nonzero, Hilbert-Schmidt orthonormal strings."""
    monos = window_monomials(WINDOW)
    assert len(monos) == 64
    mats = np.array([rep(AlgebraElement({m: 1}), WINDOW).ravel() for m in monos])
    gram = mats.conj() @ mats.T / 2 ** 7
    np.testing.assert_allclose(gram, np.eye(64), atol=1e-12)


def test_from_matrix_inverts_rep():
    x = 0.5 * U(-1) + (1 - 2j) * U(0) * U(0.5) * U(1.5) + 3
    assert from_matrix(rep(x, WINDOW), WINDOW) == x


# -- invariants ----------------------------------------------------------------


@settings(max_examples=200, deadline=None)
@given(elements(), elements(), elements())
def test_associativity(x, y, z):
    assert (mul(mul(x, y), z) - mul(x, mul(y, z))).norm1() <= 1e-12


@settings(max_examples=100, deadline=None)
@given(elements(), elements())
def test_involution(x, y):
    assert adjoint(adjoint(x)) == x
    assert (adjoint(mul(x, y)) - mul(adjoint(y), adjoint(x))).norm1() <= 1e-12


@settings(max_examples=100, deadline=None)
@given(elements(), elements())
def test_trace_is_tracial_and_positive(x, y):
    assert abs(trace(mul(x, y)) - trace(mul(y, x))) <= 1e-12
    t = trace(mul(adjoint(x), x))
    assert abs(t.imag) <= 1e-12 and t.real >= -1e-12


@settings(max_examples=50, deadline=None)
@given(elements(), elements())
def test_rep_is_homomorphism(x, y):
    assert np.linalg.norm(rep(mul(x, y), WINDOW) - rep(x, WINDOW) @ rep(y, WINDOW)) <= 1e-10
    np.testing.assert_allclose(rep(adjoint(x), WINDOW), rep(x, WINDOW).conj().T, atol=1e-12)
    m = rep(x, WINDOW)
    assert abs(np.trace(m) / m.shape[0] - trace(x)) <= 1e-12


@settings(max_examples=50, deadline=None)
@given(elements(), elements())
def test_trace_agrees_with_independent_oracle(x, y):
    G = Dense(-1, 1.5)
    assert abs(G.tr(G.of(x) @ G.of(y)) - trace(mul(x, y))) <= 1e-10
