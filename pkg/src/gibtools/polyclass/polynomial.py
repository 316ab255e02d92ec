"""Exact integer polynomials and integer matrices.

Coefficient lists are stored constant-first: ``coeffs[i]`` multiplies ``X**i``.
Everything here is exact (Python ints and :class:`fractions.Fraction`).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np


# ---------------------------------------------------------------------------
# dense polynomial arithmetic over Q, constant-first lists
# ---------------------------------------------------------------------------

def _trim(a):
    a = list(a)
    while len(a) > 1 and a[-1] == 0:
        a.pop()
    return a


def poly_mul(a, b):
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x == 0:
            continue
        for j, y in enumerate(b):
            out[i + j] += x * y
    return _trim(out)


def poly_sub(a, b):
    n = max(len(a), len(b))
    out = [(a[i] if i < len(a) else 0) - (b[i] if i < len(b) else 0) for i in range(n)]
    return _trim(out)


def poly_divmod(a, b):
    """Quotient and remainder over Q (``b`` nonzero)."""
    a = [Fraction(x) for x in _trim(a)]
    b = _trim(b)
    if len(b) == 1 and b[0] == 0:
        raise ZeroDivisionError("polynomial division by zero")
    db = len(b) - 1
    lead = Fraction(b[-1])
    if len(a) - 1 < db:
        return [Fraction(0)], a
    q = [Fraction(0)] * (len(a) - db)
    for k in range(len(a) - 1 - db, -1, -1):
        c = a[k + db] / lead
        q[k] = c
        if c:
            for j in range(db + 1):
                a[k + j] -= c * b[j]
    r = _trim(a[:db] if db > 0 else [Fraction(0)])
    return _trim(q), r


def poly_monic(a):
    a = _trim(a)
    lead = Fraction(a[-1])
    return [Fraction(x) / lead for x in a]


def poly_gcd(a, b):
    """Monic gcd over Q."""
    a, b = _trim(a), _trim(b)
    while not (len(b) == 1 and b[0] == 0):
        _, r = poly_divmod(a, b)
        a, b = b, r
    if len(a) == 1 and a[0] == 0:
        return [Fraction(0)]
    return poly_monic(a)


_PRIME = 2_147_483_647


def coprime_mod_prime(a, b, prime: int = _PRIME) -> bool:
    """Sufficient test for ``gcd(a, b) = 1`` over Q.

    Valid when ``prime`` divides neither leading coefficient: reduction can
    only raise the degree of the gcd, so a constant gcd mod ``prime`` proves
    coprimality. A ``False`` answer is inconclusive.
    """
    a = [x % prime for x in _trim(a)]
    b = [x % prime for x in _trim(b)]
    if a[-1] == 0 or b[-1] == 0:
        return False
    while True:
        while len(b) > 1 and b[-1] == 0:
            b.pop()
        if len(b) == 1:
            return b[0] != 0 or len(a) == 1
        # a <- a mod b
        inv = pow(b[-1], prime - 2, prime)
        db = len(b) - 1
        a = list(a)
        for k in range(len(a) - 1 - db, -1, -1):
            c = a[k + db] * inv % prime
            if c:
                for j in range(db + 1):
                    a[k + j] = (a[k + j] - c * b[j]) % prime
        a = a[:db] if db else [0]
        while len(a) > 1 and a[-1] == 0:
            a.pop()
        a, b = b, a


def poly_deriv(a):
    return _trim([i * a[i] for i in range(1, len(a))] or [0])


def _as_int_coeffs(a) -> tuple[int, ...]:
    out = []
    for x in a:
        x = Fraction(x)
        if x.denominator != 1:
            raise ValueError(f"non-integral coefficient {x}")
        out.append(int(x))
    return tuple(out)


# ---------------------------------------------------------------------------
# IntPolynomial
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class IntPolynomial:
    """Monic polynomial with integer coefficients, constant term first."""

    coeffs: tuple[int, ...]

    def __post_init__(self):
        coeffs = tuple(int(c) for c in self.coeffs)
        object.__setattr__(self, "coeffs", coeffs)
        if len(coeffs) < 2:
            raise ValueError("degree must be at least 1")
        if coeffs[-1] != 1:
            raise ValueError(f"polynomial is not monic (leading coefficient {coeffs[-1]})")

    @classmethod
    def from_leading_first(cls, coeffs: Sequence[int]) -> "IntPolynomial":
        return cls(tuple(reversed(list(coeffs))))

    @classmethod
    def from_fractions(cls, coeffs) -> "IntPolynomial":
        return cls(_as_int_coeffs(_trim(coeffs)))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def constant(self) -> int:
        return self.coeffs[0]

    def leading_first(self) -> tuple[int, ...]:
        return tuple(reversed(self.coeffs))

    def __call__(self, x):
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def __mul__(self, other: "IntPolynomial") -> "IntPolynomial":
        return IntPolynomial(tuple(poly_mul(self.coeffs, other.coeffs)))

    def __pow__(self, k: int) -> "IntPolynomial":
        if k < 1:
            raise ValueError("exponent must be positive")
        out = self
        for _ in range(k - 1):
            out = out * self
        return out

    def divides(self, other: "IntPolynomial") -> bool:
        _, r = poly_divmod(other.coeffs, self.coeffs)
        return all(x == 0 for x in r)

    def exact_quotient(self, divisor: "IntPolynomial") -> "IntPolynomial":
        q, r = poly_divmod(self.coeffs, divisor.coeffs)
        if any(x != 0 for x in r):
            raise ValueError(f"{divisor} does not divide {self}")
        return IntPolynomial.from_fractions(q)

    def reciprocal(self) -> "IntPolynomial":
        """Monic normalisation of ``X**deg * p(1/X)``; requires ``|a0| = 1``."""
        a0 = self.coeffs[0]
        if abs(a0) != 1:
            raise ValueError("reciprocal polynomial is only monic over Z when |a0| = 1")
        return IntPolynomial(tuple(c * a0 for c in reversed(self.coeffs)))

    def negate_variable(self) -> "IntPolynomial":
        """Monic normalisation of ``p(-X)``."""
        n = self.degree
        return IntPolynomial(tuple(c * (-1) ** (i + n) for i, c in enumerate(self.coeffs)))

    def derivative_coeffs(self) -> list[int]:
        return poly_deriv(list(self.coeffs))

    def __str__(self) -> str:
        terms = []
        n = self.degree
        for i in range(n, -1, -1):
            c = self.coeffs[i]
            if c == 0:
                continue
            sign = "-" if c < 0 else "+"
            mag = abs(c)
            if i == 0:
                body = str(mag)
            else:
                var = "X" if i == 1 else f"X^{i}"
                body = var if mag == 1 else f"{mag}{var}"
            terms.append((sign, body))
        first_sign, first = terms[0]
        out = ("-" if first_sign == "-" else "") + first
        for sign, body in terms[1:]:
            out += f" {sign} {body}"
        return out

    def __repr__(self) -> str:
        return f"IntPolynomial({list(self.coeffs)})"


def square_free_decomposition(p: IntPolynomial) -> list[tuple[IntPolynomial, int]]:
    """Yun's algorithm: ``p = prod s_i ** i`` with square-free, pairwise coprime ``s_i``.

    Only nontrivial parts are returned, ordered by multiplicity.
    """
    a = list(p.coeffs)
    da = poly_deriv(a)
    if p.degree < _PRIME and coprime_mod_prime(a, da):
        return [(p, 1)]
    b = poly_gcd(a, da)
    c, _ = poly_divmod(a, b)
    d = poly_sub(poly_divmod(da, b)[0], poly_deriv(c))
    out = []
    i = 1
    while len(_trim(c)) > 1:
        s = poly_gcd(c, d)
        if len(s) > 1:
            out.append((IntPolynomial.from_fractions(s), i))
        c = poly_divmod(c, s)[0]
        d = poly_sub(poly_divmod(d, s)[0], poly_deriv(c))
        i += 1
    return out


def square_free_part(p: IntPolynomial) -> IntPolynomial:
    parts = square_free_decomposition(p)
    out = parts[0][0]
    for s, _ in parts[1:]:
        out = out * s
    return out


# ---------------------------------------------------------------------------
# IntMatrix
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class IntMatrix:
    """Dense square integer matrix."""

    rows: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        rows = tuple(tuple(int(x) for x in r) for r in self.rows)
        object.__setattr__(self, "rows", rows)
        n = len(rows)
        if n == 0 or any(len(r) != n for r in rows):
            raise ValueError("matrix must be square and non-empty")

    @classmethod
    def from_rows(cls, rows: Iterable[Iterable[int]]) -> "IntMatrix":
        return cls(tuple(tuple(r) for r in rows))

    @property
    def dim(self) -> int:
        return len(self.rows)

    def to_numpy(self) -> np.ndarray:
        return np.array(self.rows, dtype=float)

    def tolist(self) -> list[list[int]]:
        return [list(r) for r in self.rows]

    def __matmul__(self, other: "IntMatrix") -> "IntMatrix":
        n = self.dim
        cols = list(zip(*other.rows))
        return IntMatrix(tuple(tuple(sum(a * b for a, b in zip(r, c)) for c in cols) for r in self.rows))

    def det(self) -> int:
        return bareiss_det(self.tolist())

    def rank(self) -> int:
        return exact_rank(self.tolist())


def identity(n: int) -> IntMatrix:
    return IntMatrix(tuple(tuple(int(i == j) for j in range(n)) for i in range(n)))


def block_diag(*blocks: IntMatrix) -> IntMatrix:
    n = sum(b.dim for b in blocks)
    rows = [[0] * n for _ in range(n)]
    off = 0
    for b in blocks:
        for i, r in enumerate(b.rows):
            rows[off + i][off:off + b.dim] = r
        off += b.dim
    return IntMatrix.from_rows(rows)


def bareiss_det(m: list[list[int]]) -> int:
    """Fraction-free determinant."""
    a = [list(r) for r in m]
    n = len(a)
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for i in range(k + 1, n):
                if a[i][k] != 0:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def exact_rank(m: list[list[int]]) -> int:
    a = [[Fraction(x) for x in r] for r in m]
    rows, cols = len(a), len(a[0]) if a else 0
    rank = 0
    for c in range(cols):
        piv = next((i for i in range(rank, rows) if a[i][c] != 0), None)
        if piv is None:
            continue
        a[rank], a[piv] = a[piv], a[rank]
        for i in range(rows):
            if i != rank and a[i][c] != 0:
                f = a[i][c] / a[rank][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[rank])]
        rank += 1
    return rank


def companion_matrix(p: IntPolynomial) -> IntMatrix:
    """Companion matrix with ones on the subdiagonal and ``-a_0 .. -a_{n-1}`` in the last column."""
    n = p.degree
    rows = [[0] * n for _ in range(n)]
    for i in range(1, n):
        rows[i][i - 1] = 1
    for i in range(n):
        rows[i][n - 1] = -p.coeffs[i]
    return IntMatrix.from_rows(rows)


def char_poly(m: IntMatrix) -> IntPolynomial:
    """Characteristic polynomial ``det(X I - M)`` by Berkowitz's division-free algorithm."""
    a = m.tolist()
    n = len(a)
    # leading-first coefficient vector of det(X I - A_k) for the leading k x k block
    vect = [1, -a[0][0]]
    for k in range(1, n):
        r = a[k][:k]  # row k, columns < k
        s = [a[i][k] for i in range(k)]  # column k, rows < k
        akk = a[k][k]
        sub = [row[:k] for row in a[:k]]
        # Toeplitz column: 1, -akk, -r s, -r A s, -r A^2 s, ...
        col = [1, -akk]
        v = s
        for _ in range(k):
            col.append(-sum(x * y for x, y in zip(r, v)))
            v = [sum(sub[i][j] * v[j] for j in range(k)) for i in range(k)]
        new = []
        for i in range(k + 2):
            new.append(sum(col[i - j] * vect[j] for j in range(min(i, k) + 1) if i - j < len(col)))
        vect = new
    return IntPolynomial(tuple(reversed(vect)))


def poly_of_matrix(p_coeffs: Sequence[int], m: IntMatrix) -> IntMatrix:
    """Evaluate a polynomial (constant-first) at an integer matrix by Horner's rule."""
    n = m.dim
    acc = IntMatrix(tuple(tuple(0 for _ in range(n)) for _ in range(n)))
    for c in reversed(list(p_coeffs)):
        acc = acc @ m
        acc = IntMatrix(tuple(tuple(x + (c if i == j else 0) for j, x in enumerate(r)) for i, r in enumerate(acc.rows)))
    return acc
