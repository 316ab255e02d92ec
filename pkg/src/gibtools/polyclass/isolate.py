"""Rigorous isolation of the root moduli of an integer polynomial.

Root approximations are only used as centres. Each centre is snapped to the
dyadic grid ``2**-bits`` and an inclusion radius is computed in exact integer
arithmetic from the Weierstrass correction ``W_i = p(z_i) / prod_{j != i}(z_i - z_j)``:
the union of the discs ``|z - z_i| <= n |W_i|`` contains every root, and a
connected union of ``m`` discs contains exactly ``m`` roots. Floating point is
never trusted for the final intervals.

Roots of modulus exactly one are counted exactly (gcd with the reversed
polynomial, then a Sturm count on the trace polynomial), which lets the engine
pin them to ``[1, 1]`` instead of leaving intervals that straddle one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from typing import Optional

import numpy as np
from mpmath import MPContext

from .polynomial import (
    IntPolynomial,
    _trim,
    coprime_mod_prime,
    poly_deriv,
    poly_divmod,
    poly_gcd,
    square_free_decomposition,
)

BASE_BITS = 64


class PrecisionExhausted(ArithmeticError):
    """Root moduli could not be separated at the requested precision."""


@dataclass(frozen=True)
class ModulusCluster:
    """Rational interval ``[lo, hi]`` holding one common root modulus."""

    lo: Fraction
    hi: Fraction
    multiplicity: int
    semisimple: bool

    def __post_init__(self):
        if not (0 < self.lo <= self.hi):
            raise ValueError(f"invalid modulus interval [{self.lo}, {self.hi}]")
        if self.multiplicity < 1:
            raise ValueError("multiplicity must be positive")

    @property
    def mid(self) -> float:
        return float((self.lo + self.hi) / 2)

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    def contains(self, x) -> bool:
        return self.lo <= x <= self.hi

    def overlaps(self, other: "ModulusCluster") -> bool:
        return self.lo <= other.hi and other.lo <= self.hi


# ---------------------------------------------------------------------------
# exact integer helpers
# ---------------------------------------------------------------------------

def _ceil_sqrt(n: int) -> int:
    r = math.isqrt(n)
    return r if r * r == n else r + 1


def _iroot_floor(n: int, k: int) -> int:
    if n < 2:
        return n
    x = 1 << ((n.bit_length() + k - 1) // k)
    while True:
        y = ((k - 1) * x + n // x ** (k - 1)) // k
        if y >= x:
            break
        x = y
    while x ** k > n:
        x -= 1
    while (x + 1) ** k <= n:
        x += 1
    return x


def _iroot_ceil(n: int, k: int) -> int:
    r = _iroot_floor(n, k)
    return r if r ** k == n else r + 1


def kth_root_interval(lo: Fraction, hi: Fraction, k: int, bits: int) -> tuple[Fraction, Fraction]:
    """Outward-rounded enclosure of ``[lo**(1/k), hi**(1/k)]`` on the grid ``2**-bits``."""
    scale = 1 << (bits * k)
    lo_n = _iroot_floor((lo.numerator * scale) // lo.denominator, k)
    hi_n = _iroot_ceil(-((-hi.numerator * scale) // hi.denominator), k)
    return Fraction(lo_n, 1 << bits), Fraction(hi_n, 1 << bits)


# ---------------------------------------------------------------------------
# unit-circle roots, counted exactly
# ---------------------------------------------------------------------------

def _sign_changes(seq, x) -> int:
    vals = []
    for s in seq:
        v = 0
        for c in reversed(s):
            v = v * x + c
        if v != 0:
            vals.append(v > 0)
    return sum(1 for a, b in zip(vals, vals[1:]) if a != b)


def _sturm_count_open(g: list, a, b) -> int:
    """Number of distinct real roots of ``g`` in ``(a, b]``."""
    seq = [_trim(g), poly_deriv(_trim(g))]
    while len(seq[-1]) > 1 or seq[-1][0] != 0:
        _, r = poly_divmod(seq[-2], seq[-1])
        if len(r) == 1 and r[0] == 0:
            break
        seq.append([-x for x in r])
    return _sign_changes(seq, Fraction(a)) - _sign_changes(seq, Fraction(b))


def unit_root_count(s: IntPolynomial) -> int:
    """Number of distinct roots of modulus exactly 1 of a square-free ``s``.

    Any root ``b`` with ``|b| = 1`` satisfies ``1/b = conj(b)``, so it is also a
    root of the reversed polynomial; the gcd collects all of them. After removing
    ``X - 1`` and ``X + 1`` the gcd is palindromic of even degree ``2k`` and equals
    ``X**k g(X + 1/X)``; unit roots off the real axis correspond two-to-one to the
    real roots of ``g`` inside ``(-2, 2)``.
    """
    a = list(s.coeffs)
    if coprime_mod_prime(a, list(reversed(a))):
        return 0
    h = poly_gcd(a, list(reversed(a)))
    if len(h) <= 1:
        return 0
    count = 0
    for r in (1, -1):
        q, rem = poly_divmod(h, [-r, 1])
        if all(x == 0 for x in rem):
            h = q
            count += 1
    if len(h) <= 1:
        return count
    deg = len(h) - 1
    if deg % 2:
        raise AssertionError("unit-root gcd has odd degree after removing +-1")
    k = deg // 2
    if any(h[i] != h[deg - i] for i in range(deg + 1)):
        raise AssertionError("unit-root gcd is not palindromic")
    # Dickson recursion: X^j + X^-j = D_j(X + 1/X)
    dickson = [[2], [0, 1]]
    for _ in range(2, k + 1):
        prev, cur = dickson[-2], dickson[-1]
        nxt = [0] + cur
        nxt = [x - (prev[i] if i < len(prev) else 0) for i, x in enumerate(nxt)]
        dickson.append(nxt)
    g = [Fraction(0)] * (k + 1)
    g[0] += h[k]
    for j in range(1, k + 1):
        for i, c in enumerate(dickson[j]):
            g[i] += h[k + j] * c
    return count + 2 * _sturm_count_open(g, -2, 2)


# ---------------------------------------------------------------------------
# approximations and inclusion discs
# ---------------------------------------------------------------------------

def _approx_roots(s: IntPolynomial, bits: int) -> Optional[list[complex]]:
    """Approximate roots; numpy for the base level, mpmath beyond it."""
    lf = list(s.leading_first())
    if s.degree == 1:
        return [complex(-s.coeffs[0])]
    if bits <= BASE_BITS:
        return [complex(z) for z in np.roots(np.array(lf, dtype=float))]
    ctx = MPContext()
    ctx.prec = bits + 32
    try:
        roots = ctx.polyroots(lf, maxsteps=200, extraprec=2 * bits)
    except ctx.NoConvergence:
        return None
    return [ctx.mpc(z) for z in roots]


def _snap(roots, bits: int, mp: bool) -> Optional[list[tuple[int, int]]]:
    """Snap approximations to the dyadic grid, forcing exact conjugate symmetry."""
    scale = 1 << bits
    if mp:
        ctx = MPContext()
        ctx.prec = bits + 32

        def to_grid(x):
            return int(ctx.nint(ctx.ldexp(ctx.mpf(x), bits)))

        parts = [(z.real, z.imag) for z in roots]
        mags = [max(1.0, float(abs(z))) for z in roots]
        cut = 2.0 ** (-bits / 2)
    else:
        def to_grid(x):
            return int(round(float(x) * scale))

        parts = [(z.real, z.imag) for z in roots]
        mags = [max(1.0, abs(z)) for z in roots]
        cut = 1e-7
    upper, real = [], []
    n_lower = 0
    for (re, im), mag in zip(parts, mags):
        if float(im) > cut * mag:
            upper.append((re, im))
        elif float(im) < -cut * mag:
            n_lower += 1
        else:
            real.append(re)
    if n_lower != len(upper):
        return None
    out = [(to_grid(re), 0) for re in real]
    for re, im in upper:
        a, b = to_grid(re), to_grid(im)
        out.append((a, b))
        out.append((a, -b))
    return out


def _horner_gauss(coeffs, a: int, b: int, scale: int) -> tuple[int, int]:
    """``scale**n * p((a + ib) / scale)`` for monic ``p`` as a Gaussian integer."""
    n = len(coeffs) - 1
    xr, xi = 1, 0
    spow = 1
    for j in range(n - 1, -1, -1):
        spow *= scale
        xr, xi = xr * a - xi * b + coeffs[j] * spow, xr * b + xi * a
    return xr, xi


def _inclusion_radii(coeffs, centres, bits: int) -> list[Optional[int]]:
    """Upper bounds on ``2**bits * n * |W_i|``; ``None`` when two centres coincide."""
    n = len(centres)
    scale = 1 << bits
    radii: list[Optional[int]] = []
    for i, (a, b) in enumerate(centres):
        pr, pi = _horner_gauss(coeffs, a, b, scale)
        num = n * n * (pr * pr + pi * pi)
        den = 1
        for j, (c, d) in enumerate(centres):
            if j != i:
                den *= (a - c) ** 2 + (b - d) ** 2
        if den == 0:
            radii.append(None)
            continue
        radii.append(_ceil_sqrt(-(-num // den)))
    return radii


@dataclass
class _Bundle:
    """A connected union of inclusion discs from one square-free component."""

    lo: int
    hi: int
    count: int
    exponent: int
    degenerate: bool
    comp: int
    centre: Optional[tuple[int, int]]


@dataclass
class _Cluster:
    lo: Fraction
    hi: Fraction
    multiplicity: int
    semisimple: bool
    resolved: bool


def _component_bundles(s: IntPolynomial, exponent: int, units: int, bits: int, comp: int):
    """Disc bundles for one component, or ``None`` when discs cannot be formed."""
    mp = bits > BASE_BITS
    approx = _approx_roots(s, bits)
    if approx is None:
        return None, False
    centres = _snap(approx, bits, mp)
    if centres is None or len(centres) != s.degree:
        return None, False
    radii = _inclusion_radii(list(s.coeffs), centres, bits)
    if any(r is None for r in radii):
        return None, False
    n = len(centres)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        a, b = centres[i]
        for j in range(i + 1, n):
            c, d = centres[j]
            if (a - c) ** 2 + (b - d) ** 2 <= (radii[i] + radii[j]) ** 2:
                parent[find(i)] = find(j)
    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    one = 1 << bits
    bundles = []
    for members in groups.values():
        lo, hi = None, None
        for i in members:
            a, b = centres[i]
            m2 = a * a + b * b
            l_i = math.isqrt(m2) - radii[i]
            h_i = _ceil_sqrt(m2) + radii[i]
            lo = l_i if lo is None else min(lo, l_i)
            hi = h_i if hi is None else max(hi, h_i)
        centre = centres[members[0]] if len(members) == 1 else None
        bundles.append(_Bundle(lo, hi, len(members), exponent, lo == hi, comp, centre))
    if any(bd.lo <= 0 for bd in bundles):
        return None, False
    # pin unit-modulus roots when the exact count matches the candidates
    unit_ok = True
    if units:
        touching = [bd for bd in bundles if bd.lo <= one <= bd.hi]
        if sum(bd.count for bd in touching) == units and all(bd.count == 1 for bd in touching):
            for bd in touching:
                bd.lo = bd.hi = one
                bd.degenerate = True
        else:
            unit_ok = False
    return bundles, unit_ok


def _conjugate_singletons(g: list[_Bundle]) -> bool:
    # two separate discs with exactly conjugate non-real centres hold a conjugate pair
    if len(g) != 2 or g[0].count != 1 or g[1].count != 1 or g[0].comp != g[1].comp:
        return False
    (a, b), (c, d) = g[0].centre, g[1].centre
    return a == c and b == -d != 0


def _level_clusters(components, bits: int):
    """Clusters at one precision level and whether they are all resolved."""
    scale = 1 << bits
    entries = []
    all_ok = True
    for comp, (s, e, units) in enumerate(components):
        bundles, ok = _component_bundles(s, e, units, bits, comp)
        if bundles is None:
            return None, False
        all_ok = all_ok and ok
        for bd in bundles:
            entries.append(bd)
    entries.sort(key=lambda bd: (bd.lo, bd.hi))
    groups: list[list[_Bundle]] = []
    hi = None
    for bd in entries:
        if groups and bd.lo <= hi:
            groups[-1].append(bd)
            hi = max(hi, bd.hi)
        else:
            groups.append([bd])
            hi = bd.hi
    clusters = []
    for g in groups:
        lo = min(bd.lo for bd in g)
        hi_ = max(bd.hi for bd in g)
        mult = sum(bd.count * bd.exponent for bd in g)
        semisimple = all(bd.exponent == 1 for bd in g)
        single = len(g) == 1 and g[0].count == 1
        same_point = all(bd.degenerate and bd.count == 1 and bd.lo == g[0].lo for bd in g)
        resolved = single or same_point or _conjugate_singletons(g)
        clusters.append(_Cluster(Fraction(lo, scale), Fraction(hi_, scale), mult, semisimple, resolved))
    return clusters, all_ok and all(c.resolved for c in clusters)


def _exponent_gcd(p: IntPolynomial) -> int:
    idx = [i for i, c in enumerate(p.coeffs) if c != 0]
    return reduce(math.gcd, idx)


def _deflate(p: IntPolynomial, k: int) -> IntPolynomial:
    return IntPolynomial(tuple(p.coeffs[::k]))


@dataclass
class _Prepared:
    base: IntPolynomial
    k: int
    components: list
    unit_roots: int


def prepare(p: IntPolynomial) -> _Prepared:
    """Exact preprocessing shared by isolation and classification."""
    if p.constant == 0:
        raise ValueError("polynomial has a zero root")
    k = _exponent_gcd(p)
    base = _deflate(p, k) if k > 1 else p
    comps = []
    units = 0
    for s, e in square_free_decomposition(base):
        u = unit_root_count(s)
        units += u * e
        comps.append((s, e, u))
    return _Prepared(base, k, comps, units * k)


def level_clusters(prep: _Prepared, bits: int):
    """Clusters of ``p`` at one precision level (after undoing the ``X**k`` deflation)."""
    clusters, ok = _level_clusters(prep.components, bits)
    if clusters is None or prep.k == 1:
        return clusters, ok
    out = []
    for c in clusters:
        lo, hi = kth_root_interval(c.lo, c.hi, prep.k, bits + 8)
        out.append(_Cluster(lo, hi, c.multiplicity * prep.k, c.semisimple, c.resolved))
    # outward rounding can make neighbouring images touch
    for a, b in zip(out, out[1:]):
        if a.hi >= b.lo:
            return out, False
    return out, ok


def precision_ladder(bits: int) -> list[int]:
    """``bits, bits/2, bits/4, ...`` down to the base level, in increasing order."""
    levels = [bits]
    while levels[-1] // 2 >= BASE_BITS:
        levels.append(levels[-1] // 2)
    return sorted(set(levels))


def isolate_root_moduli(p: IntPolynomial, precision_bits: int = BASE_BITS) -> list[ModulusCluster]:
    """Disjoint rational intervals covering all root moduli, with multiplicities.

    Intervals from every level of :func:`precision_ladder` that resolves are
    intersected, so doubling the precision only ever shrinks them.
    Raises :class:`PrecisionExhausted` when no level separates the moduli.
    """
    prep = prepare(p)
    best = None
    for bits in precision_ladder(precision_bits):
        clusters, ok = level_clusters(prep, bits)
        if not ok:
            continue
        if best is None:
            best = clusters
        elif [c.multiplicity for c in best] == [c.multiplicity for c in clusters]:
            best = [
                _Cluster(max(a.lo, b.lo), min(a.hi, b.hi), a.multiplicity, a.semisimple, True)
                for a, b in zip(best, clusters)
            ]
    if best is None:
        raise PrecisionExhausted(f"root moduli of {p} not separated at {precision_bits} bits")
    return [ModulusCluster(c.lo, c.hi, c.multiplicity, c.semisimple) for c in best]
