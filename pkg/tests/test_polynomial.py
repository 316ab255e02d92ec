import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from gibtools.polyclass import IntMatrix, IntPolynomial, char_poly, companion_matrix, square_free_decomposition
from gibtools.polyclass.polynomial import bareiss_det, exact_rank, poly_of_matrix

X = sympy.Symbol("X")


def sympy_charpoly(rows):
    cp = sympy.Matrix(rows).charpoly(X).all_coeffs()      # leading first
    return tuple(int(c) for c in reversed(cp))


monic = st.integers(1, 12).flatmap(
    lambda d: st.lists(st.integers(-20, 20), min_size=d, max_size=d).map(lambda c: IntPolynomial(tuple(c) + (1,))))
int_matrix = st.integers(1, 5).flatmap(
    lambda n: st.lists(st.lists(st.integers(-6, 6), min_size=n, max_size=n), min_size=n, max_size=n))


def test_companion_s0_last_column(s0_poly):
    m = companion_matrix(s0_poly)
    assert [row[-1] for row in m.tolist()] == [1, -3, 1]
    assert m.tolist() == [[0, 0, 1], [1, 0, -3], [0, 1, 1]]


def test_companion_degree_one():
    assert companion_matrix(IntPolynomial((-1, 1))).tolist() == [[1]]


def test_companion_quadratic_convention():
    assert companion_matrix(IntPolynomial((1, -3, 1))).tolist() == [[0, -1], [1, 3]]


def test_char_poly_examples(ablock):
    assert char_poly(IntMatrix.from_rows([[1, 0], [0, 1]])).coeffs == (1, -2, 1)
    assert char_poly(IntMatrix.from_rows([[2, 1], [1, 1]])).coeffs == (1, -3, 1)
    q = IntPolynomial((1, -3, 1))
    assert char_poly(ablock) == q * q


def test_str_display(s0_poly):
    assert str(s0_poly) == "X^3 - X^2 + 3X - 1"


def test_not_monic_rejected():
    import pytest
    with pytest.raises(ValueError):
        IntPolynomial((1, 2))
    with pytest.raises(ValueError):
        IntPolynomial((1,))


@settings(max_examples=60, deadline=None)
@given(monic)
def test_companion_round_trip(p):
    m = companion_matrix(p)
    assert char_poly(m) == p
    assert abs(m.det()) == abs(p.constant)


@settings(max_examples=60, deadline=None)
@given(int_matrix)
def test_char_poly_matches_sympy(rows):
    assert char_poly(IntMatrix.from_rows(rows)).coeffs == sympy_charpoly(rows)


@settings(max_examples=60, deadline=None)
@given(int_matrix)
def test_det_and_rank_match_sympy(rows):
    m = sympy.Matrix(rows)
    assert bareiss_det([list(r) for r in rows]) == int(m.det())
    assert exact_rank([list(r) for r in rows]) == m.rank()


@settings(max_examples=40, deadline=None)
@given(int_matrix)
def test_cayley_hamilton(rows):
    m = IntMatrix.from_rows(rows)
    p = char_poly(m)
    assert all(x == 0 for r in poly_of_matrix(p.coeffs, m).tolist() for x in r)


@settings(max_examples=60, deadline=None)
@given(monic, st.integers(1, 3), monic)
def test_square_free_decomposition(p, k, r):
    prod = p ** k * r
    parts = square_free_decomposition(prod)
    rebuilt = None
    for s, e in parts:
        rebuilt = s ** e if rebuilt is None else rebuilt * s ** e
    assert rebuilt == prod
    # parts are square-free by the sympy oracle
    for s, _ in parts:
        sp = sympy.Poly(list(s.leading_first()), X)
        assert sympy.degree(sympy.gcd(sp, sp.diff(X)), X) == 0
