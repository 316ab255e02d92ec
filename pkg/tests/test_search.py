import json

import mpmath
import pytest

from gibtools.polyclass import IntPolynomial, TwoClassCertificate
from gibtools.search import (
    ResultStore,
    SearchSpec,
    SpecError,
    block_products,
    classify_all,
    enumerate_candidates,
    parse_spec_text,
    search_certificates,
    single_exponent_scan,
)

S0 = IntPolynomial((-1, 3, -1, 1))
GOLD = IntPolynomial((1, -3, 1))


def quadratic_oracle(b, c):
    """Classify X^2 + bX + c (c = +-1) by the quadratic formula at 50 digits."""
    mpmath.mp.dps = 50
    disc = mpmath.mpf(b * b - 4 * c)
    r = [(-b + mpmath.sqrt(disc)) / 2, (-b - mpmath.sqrt(disc)) / 2] if disc >= 0 else \
        [(-b + mpmath.sqrt(disc + 0j)) / 2] * 2
    m = sorted(abs(x) for x in r)
    if any(abs(x - 1) < mpmath.mpf(10) ** -40 for x in m):
        return "UnitModulusRoot"
    if abs(m[0] - m[1]) < mpmath.mpf(10) ** -40:
        return "OneClass"
    return (1, 1)


def test_degree_two_bound_one_count():
    polys = list(enumerate_candidates(SearchSpec((2, 2), 1)))
    assert len(polys) == 6 and len(set(polys)) == 6
    assert {p.coeffs for p in polys} == {(a0, a1, 1) for a0 in (-1, 1) for a1 in (-1, 0, 1)}


def test_enumeration_order_and_s0():
    polys = list(enumerate_candidates(SearchSpec((2, 3), 3)))
    assert S0 in polys
    keys = [(p.degree, p.leading_first()) for p in polys]
    assert keys == sorted(keys)
    assert len(polys) == 2 * 7 + 2 * 49


def test_block_products_contain_ablock():
    spec = SearchSpec((4, 4), 1, include_block_products=True)
    polys = list(enumerate_candidates(spec, pool=[GOLD]))
    assert GOLD * GOLD in polys
    assert len(polys) == len(set(polys))
    assert block_products(4, [GOLD, IntPolynomial((-1, -1, 1))]) == sorted(
        {GOLD * GOLD, GOLD * IntPolynomial((-1, -1, 1)), IntPolynomial((-1, -1, 1)) ** 2},
        key=lambda p: (p.degree, p.leading_first()))


def test_block_products_pool_from_box():
    spec = SearchSpec((4, 4), 3, include_block_products=True)
    polys = list(enumerate_candidates(spec))
    assert GOLD * GOLD in polys          # coefficient 11 is outside the box; it enters as a block product
    assert len(polys) == len(set(polys))


@pytest.mark.parametrize("bound", [1, 2, 3])
def test_degree_two_complete(bound):
    recs = classify_all(SearchSpec((2, 2), bound))
    assert len(recs) == 2 * (2 * bound + 1)
    for r in recs:
        c, b, _ = r.poly.coeffs
        expect = quadratic_oracle(b, c)
        if isinstance(r.outcome, TwoClassCertificate):
            assert expect == r.outcome.multiplicities
        else:
            assert expect == r.outcome.reason.value


def test_golden_quadratics_in_bound_one():
    # X^2 + X - 1 and X^2 - X - 1 have moduli (sqrt5 -+ 1)/2, so they certify
    res = search_certificates(SearchSpec((2, 2), 1))
    certs = sorted(str(r.poly) for r in res.records if r.is_certificate)
    assert certs == ["X^2 + X - 1", "X^2 - X - 1"]


def test_degree_two_pattern_finds_gold():
    res = search_certificates(SearchSpec((2, 2), 3, (1, 1)))
    assert GOLD in [r.poly for r in res.matches]


def test_degree_three_pattern_finds_s0():
    res = search_certificates(SearchSpec((3, 3), 3, (1, 2)))
    assert S0 in [r.poly for r in res.matches]
    # frozen from the independent mpmath oracle in tests/oracles/box_oracle.py
    assert res.summary["outcomes"] == {"MoreThanTwoClasses": 16, "UnitModulusRoot": 22, "certificate": 60}


def test_degree_four_bound_two_matches_oracle():
    res = search_certificates(SearchSpec((4, 4), 2))
    assert res.summary["outcomes"] == {"MoreThanTwoClasses": 108, "UnitModulusRoot": 86, "certificate": 56}


def _store_bytes(tmp_path, name, workers):
    st = ResultStore(tmp_path / name)
    search_certificates(SearchSpec((3, 3), 3, (1, 2)), st, workers)
    search_certificates(SearchSpec((2, 2), 2), st, workers)
    return st.path.read_bytes(), st.index_path.read_bytes()


def test_store_identical_across_workers(tmp_path):
    one = _store_bytes(tmp_path, "w1", 1)
    assert one == _store_bytes(tmp_path, "w2", 2)
    assert one == _store_bytes(tmp_path, "w8", 8)


def test_store_idempotent(tmp_path):
    st = ResultStore(tmp_path)
    spec = SearchSpec((2, 2), 3, (1, 1))
    first = search_certificates(spec, st)
    size = st.path.stat().st_size
    again = search_certificates(spec, st)
    assert again.cached and not first.cached
    assert st.path.stat().st_size == size
    assert again.summary == first.summary
    assert [r.canonical_json() for r in again.records] == [r.canonical_json() for r in first.records]


def test_store_header_and_sidecars(tmp_path):
    st = ResultStore(tmp_path)
    spec = SearchSpec((2, 2), 1)
    search_certificates(spec, st)
    lines = st.path.read_text().splitlines()
    assert json.loads(lines[0])["tool"] == "gibtools"
    assert len(lines) == 1 + 6
    index = json.loads(st.index_path.read_text())
    assert index[spec.spec_hash()]["start"] == 1 and index[spec.spec_hash()]["end"] == 7
    assert len(st.meta_path.read_text().splitlines()) == 6
    assert "wall_time" not in lines[1]


def test_store_recovers_interrupted_append(tmp_path):
    st = ResultStore(tmp_path)
    search_certificates(SearchSpec((2, 2), 1), st)
    good = st.path.read_bytes()
    with st.path.open("a") as fh:
        fh.write('{"partial": true}\n')
    ResultStore(tmp_path)
    assert st.path.read_bytes() == good


def test_env_store_dir(tmp_path, monkeypatch):
    monkeypatch.setenv("GIB_STORE_DIR", str(tmp_path / "envstore"))
    st = ResultStore()
    assert st.dir == tmp_path / "envstore"


def test_single_exponent_scan_small():
    scan = single_exponent_scan([2, 3], 3)
    assert scan["counts"][2] >= 1 and "X^2 - 3X + 1" in scan["polynomials"][2]
    assert scan["counts"][3] >= 1 and str(S0) in scan["polynomials"][3]


def test_spec_validation():
    with pytest.raises(SpecError):
        SearchSpec((1, 3), 2)
    with pytest.raises(SpecError):
        SearchSpec((2, 17), 2)
    with pytest.raises(SpecError):
        SearchSpec((2, 3), 0)


def test_parse_spec_text():
    spec, opts = parse_spec_text('degrees = [4, 5]\nbound = 5\npattern = "1,m"\nworkers = 2\n')
    assert spec.degrees == (4, 5) and spec.coeff_bound == 5 and opts == {"workers": 2, "single": True}
    spec, _ = parse_spec_text("degrees = 3\nbound = 3\npattern = [1, 2]\nprecision = 256\nblocks = true\n")
    assert spec.class_pattern == (1, 2) and spec.max_precision_bits == 256 and spec.include_block_products
    with pytest.raises(SpecError):
        parse_spec_text("degrees = 3\n")
    with pytest.raises(SpecError):
        parse_spec_text("degrees = 3\nbound = 2\ncolour = 1\n")
    with pytest.raises(SpecError):
        parse_spec_text("degrees = [3\n")


def test_spec_hash_stable():
    a = SearchSpec((3, 3), 3, (1, 2))
    assert a.spec_hash() == SearchSpec((3, 3), 3, (1, 2)).spec_hash()
    assert a.spec_hash() != SearchSpec((3, 3), 3, (2, 1)).spec_hash()
