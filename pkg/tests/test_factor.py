import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from gibtools.polyclass import (
    DegreeTooLarge,
    IntPolynomial,
    char_poly,
    expand_factors,
    factor_over_integers,
    leaf_closure_dims,
    semisimple_matrix,
)

X = sympy.Symbol("X")


def sympy_factors(p):
    _, fl = sympy.factor_list(sympy.Poly(list(p.leading_first()), X))
    out = []
    for f, e in fl:
        c = [int(x) for x in reversed(f.all_coeffs())]
        if c[-1] < 0:
            c = [-x for x in c]
        out.append((tuple(c), e))
    return sorted(out, key=lambda fe: (len(fe[0]), fe[0][::-1]))


def as_tuples(factors):
    return sorted(((f.coeffs, e) for f, e in factors), key=lambda fe: (len(fe[0]), fe[0][::-1]))


def test_examples(s0_poly):
    q = IntPolynomial((1, -3, 1))
    assert factor_over_integers(q * q) == [(q, 2)]
    assert factor_over_integers(s0_poly) == [(s0_poly, 1)]
    assert factor_over_integers(IntPolynomial((1, -2, 1))) == [(IntPolynomial((-1, 1)), 2)]


def test_degree_bound():
    with pytest.raises(DegreeTooLarge):
        factor_over_integers(IntPolynomial((1,) + (0,) * 16 + (1,)))


def test_cyclotomic_split():
    p = IntPolynomial((-1,) + (0,) * 11 + (1,))
    assert as_tuples(factor_over_integers(p)) == sympy_factors(p)


small_monic = st.integers(1, 4).flatmap(
    lambda d: st.lists(st.integers(-4, 4), min_size=d, max_size=d).map(lambda c: IntPolynomial(tuple(c) + (1,))))


@settings(max_examples=80, deadline=None)
@given(st.lists(st.tuples(small_monic, st.integers(1, 2)), min_size=1, max_size=3))
def test_matches_sympy(parts):
    p = expand_factors(parts)
    if p.degree > 16:
        return
    got = factor_over_integers(p)
    assert expand_factors(got) == p
    assert as_tuples(got) == sympy_factors(p)


def test_leaf_closures(s0_cert, ablock_cert):
    assert leaf_closure_dims(s0_cert, "expanding") == 3
    assert leaf_closure_dims(s0_cert, "contracting") == 3
    assert leaf_closure_dims(ablock_cert, "expanding") == 4
    assert leaf_closure_dims(ablock_cert, "A") == 4
    from gibtools.polyclass import classify_two_class
    gold = classify_two_class(IntPolynomial((1, -3, 1)))
    assert leaf_closure_dims(gold, "A") == leaf_closure_dims(gold, "B") == 2


def test_leaf_closure_of_reducible_split():
    # (X^2 - 3X + 1)(X^2 + 3X + 1): two classes, and each factor has a root in both
    from gibtools.polyclass import classify_two_class
    p = IntPolynomial((1, -3, 1)) * IntPolynomial((1, 3, 1))
    cert = classify_two_class(p)
    assert cert.multiplicities == (2, 2)
    assert leaf_closure_dims(cert, "A") == 4


def test_semisimple_matrix(ablock_cert, s0_poly):
    m = semisimple_matrix(ablock_cert.poly)
    assert char_poly(m) == ablock_cert.poly
    assert m.tolist() == [[0, -1, 0, 0], [1, 3, 0, 0], [0, 0, 0, -1], [0, 0, 1, 3]]
    assert char_poly(semisimple_matrix(s0_poly)) == s0_poly
