"""Factorisation over Z for small degree, and what it feeds: leaf closures and block matrices."""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations
from typing import Optional

import numpy as np
from mpmath import MPContext

from .classify import TwoClassCertificate, resolve_class
from .isolate import BASE_BITS, _component_bundles, unit_root_count
from .polynomial import (
    IntMatrix,
    IntPolynomial,
    block_diag,
    companion_matrix,
    square_free_decomposition,
)

DEFAULT_MAX_DEGREE = 16


class DegreeTooLarge(ValueError):
    pass


def _divisors(n: int) -> list[int]:
    n = abs(n)
    small = [d for d in range(1, int(n ** 0.5) + 1) if n % d == 0]
    return sorted(set(small + [n // d for d in small]))


def _strip_integer_roots(s: IntPolynomial) -> tuple[list[IntPolynomial], Optional[IntPolynomial]]:
    linear = []
    rest: Optional[IntPolynomial] = s
    if s.constant == 0:
        # square-free, so X divides at most once
        linear.append(IntPolynomial((0, 1)))
        rest = s.exact_quotient(IntPolynomial((0, 1))) if s.degree > 1 else None
        if rest is None:
            return linear, None
    for d in _divisors(rest.constant):
        for r in (d, -d):
            if rest is not None and rest(r) == 0:
                lin = IntPolynomial((-r, 1))
                linear.append(lin)
                rest = rest.exact_quotient(lin) if rest.degree > 1 else None
    return linear, rest


def _root_units(s: IntPolynomial) -> list[list[complex]]:
    """Roots grouped into real singletons and conjugate pairs."""
    ctx = MPContext()
    ctx.dps = 40
    roots = ctx.polyroots(list(s.leading_first()), maxsteps=400, extraprec=200)
    roots = [complex(z) for z in roots]
    real = [z.real for z in roots if abs(z.imag) <= 1e-20 * max(1.0, abs(z))]
    upper = [z for z in roots if z.imag > 1e-20 * max(1.0, abs(z))]
    units = [[complex(r)] for r in sorted(real)]
    units += [[z, z.conjugate()] for z in sorted(upper, key=lambda z: (z.real, z.imag))]
    return units


def _split_square_free(s: IntPolynomial) -> list[IntPolynomial]:
    """Irreducible factors of a square-free monic polynomial without integer roots.

    Candidate factors are products over conjugation-closed subsets of the
    numerical roots, tried by increasing degree; a candidate counts only if its
    rounded coefficients divide ``s`` exactly, so every reported factor is exact.
    """
    if s.degree <= 1:
        return [s]
    units = _root_units(s)
    n = s.degree
    by_degree: dict[int, list[tuple[int, ...]]] = {}
    for k in range(1, len(units) + 1):
        for subset in combinations(range(len(units)), k):
            deg = sum(len(units[i]) for i in subset)
            if 2 <= deg <= n // 2:
                by_degree.setdefault(deg, []).append(subset)
    for deg in sorted(by_degree):
        for subset in by_degree[deg]:
            roots = [z for i in subset for z in units[i]]
            approx = np.poly(roots).real[::-1]
            cand = np.rint(approx)
            if np.max(np.abs(approx - cand)) > 0.25:
                continue
            f = IntPolynomial(tuple(int(c) for c in cand))
            if f.divides(s):
                return [f] + _split_square_free(s.exact_quotient(f))
    return [s]


def factor_over_integers(p: IntPolynomial, max_degree: int = DEFAULT_MAX_DEGREE) -> list[tuple[IntPolynomial, int]]:
    """Monic irreducible factors of ``p`` with multiplicities, sorted by (degree, coefficients)."""
    if p.degree > max_degree:
        raise DegreeTooLarge(f"degree {p.degree} exceeds the factorisation bound {max_degree}")
    out: dict[IntPolynomial, int] = {}
    for s, e in square_free_decomposition(p):
        linear, rest = _strip_integer_roots(s)
        factors = list(linear)
        if rest is not None:
            factors += _split_square_free(rest)
        for f in factors:
            out[f] = out.get(f, 0) + e
    return sorted(out.items(), key=lambda fe: (fe[0].degree, fe[0].coeffs))


def expand_factors(factors: list[tuple[IntPolynomial, int]]) -> IntPolynomial:
    out = None
    for f, e in factors:
        g = f ** e
        out = g if out is None else out * g
    return out


def semisimple_matrix(p: IntPolynomial) -> IntMatrix:
    """An integer matrix with characteristic polynomial ``p`` that is diagonalisable over C.

    The companion matrix of ``p`` when ``p`` is square-free, otherwise the block
    sum of companions of its irreducible factors, each repeated by multiplicity.
    """
    factors = factor_over_integers(p)
    if all(e == 1 for _, e in factors):
        return companion_matrix(p)
    blocks = [companion_matrix(f) for f, e in factors for _ in range(e)]
    return block_diag(*blocks)


def factor_classes(f: IntPolynomial, cert: TwoClassCertificate, max_bits: int = 1024) -> set[str]:
    """Which certificate classes (``"A"``/``"B"``) contain a root of the factor ``f``.

    Each root disc of ``f`` is refined until its modulus interval meets exactly
    one class interval; the classes are disjoint and cover every root modulus.
    """
    found: set[str] = set()
    bits = BASE_BITS
    while bits <= max_bits:
        bundles, _ = _component_bundles(f, 1, unit_root_count(f), bits, 0)
        if bundles is not None:
            scale = 1 << bits
            ok = True
            found = set()
            for bd in bundles:
                lo, hi = Fraction(bd.lo, scale), Fraction(bd.hi, scale)
                hits = [name for name, c in (("A", cert.class_a), ("B", cert.class_b))
                        if lo <= c.hi and c.lo <= hi]
                if len(hits) != 1:
                    ok = False
                    break
                found.add(hits[0])
            if ok:
                return found
        bits *= 2
    raise ArithmeticError(f"could not place the roots of {f} in the certificate classes")


def leaf_closure_dims(cert: TwoClassCertificate, e_class: str) -> int:
    """Dimension of the smallest rational invariant subspace containing the selected class.

    Sum of ``degree * multiplicity`` over the irreducible factors with at least
    one root in the class.
    """
    which = resolve_class(cert, e_class)
    total = 0
    for f, e in factor_over_integers(cert.poly):
        if which in factor_classes(f, cert):
            total += f.degree * e
    return total
