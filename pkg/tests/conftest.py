import pytest

from gibtools.polyclass import IntMatrix, IntPolynomial, classify_matrix, classify_two_class, companion_matrix

# X^3 - X^2 + 3X - 1, constant term first
S0_COEFFS = (-1, 3, -1, 1)
ABLOCK_ROWS = ((2, 1, 0, 0), (1, 1, 0, 0), (0, 0, 2, 1), (0, 0, 1, 1))
CAT_ROWS = ((2, 1), (1, 1))


@pytest.fixture(scope="session")
def s0_poly():
    return IntPolynomial(S0_COEFFS)


@pytest.fixture(scope="session")
def s0_matrix(s0_poly):
    return companion_matrix(s0_poly)


@pytest.fixture(scope="session")
def s0_cert(s0_poly):
    return classify_two_class(s0_poly)


@pytest.fixture(scope="session")
def ablock():
    return IntMatrix.from_rows(ABLOCK_ROWS)


@pytest.fixture(scope="session")
def ablock_cert(ablock):
    return classify_matrix(ablock)


@pytest.fixture(scope="session")
def cat_matrix():
    return IntMatrix.from_rows(CAT_ROWS)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(RESULTS):
        terminalreporter.write_line(RESULTS[n])
