"""Two-modulus-class certification of integer polynomials and matrices."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

from mpmath.ctx_iv import MPIntervalContext

from .isolate import (
    BASE_BITS,
    ModulusCluster,
    level_clusters,
    prepare,
)
from .polynomial import IntMatrix, IntPolynomial, char_poly

DEFAULT_MAX_BITS = 512


def iv_context() -> MPIntervalContext:
    # private context so the global mpmath precision is never touched
    ctx = MPIntervalContext()
    ctx.prec = 256
    return ctx


class RejectionReason(str, enum.Enum):
    NOT_UNIMODULAR = "NotUnimodular"
    ONE_CLASS = "OneClass"
    MORE_THAN_TWO_CLASSES = "MoreThanTwoClasses"
    UNIT_MODULUS_ROOT = "UnitModulusRoot"


@dataclass(frozen=True)
class TwoClassCertificate:
    """Proof that ``poly`` has exactly two root moduli, neither equal to one.

    ``class_a`` holds the smaller modulus.
    """

    poly: IntPolynomial
    class_a: ModulusCluster
    class_b: ModulusCluster
    precision_bits: int

    def __post_init__(self):
        a, b = self.class_a, self.class_b
        if a.multiplicity + b.multiplicity != self.poly.degree:
            raise ValueError("class multiplicities do not sum to the degree")
        if not a.hi < b.lo:
            raise ValueError("class intervals are not disjoint and ordered")
        if a.contains(1) or b.contains(1):
            raise ValueError("a class interval contains 1")

    @property
    def multiplicities(self) -> tuple[int, int]:
        return self.class_a.multiplicity, self.class_b.multiplicity

    def cluster(self, which: str) -> ModulusCluster:
        return {"A": self.class_a, "B": self.class_b}[resolve_class(self, which)]

    def log_product_interval(self) -> tuple[float, float]:
        """Rigorous enclosure of ``a log(lambda) + b log(mu)``; always contains 0."""
        ctx = iv_context()
        total = ctx.mpf(0)
        for c in (self.class_a, self.class_b):
            lo = ctx.mpf(c.lo.numerator) / c.lo.denominator
            hi = ctx.mpf(c.hi.numerator) / c.hi.denominator
            total += c.multiplicity * ctx.log(ctx.mpf([lo.a, hi.b]))
        lo, hi = float(total.a), float(total.b)
        return math.nextafter(lo, -math.inf), math.nextafter(hi, math.inf)

    def log_product_mid(self) -> float:
        a, b = self.multiplicities
        return a * math.log(self.class_a.mid) + b * math.log(self.class_b.mid)

    def to_json(self) -> dict:
        return {
            "poly": [str(c) for c in self.poly.coeffs],
            "classes": [_cluster_json(self.class_a), _cluster_json(self.class_b)],
            "precision_bits": self.precision_bits,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "TwoClassCertificate":
        poly = IntPolynomial(tuple(int(c) for c in obj["poly"]))
        a, b = (_cluster_from_json(c) for c in obj["classes"])
        return cls(poly, a, b, int(obj["precision_bits"]))


def resolve_class(cert: TwoClassCertificate, which: str) -> str:
    """Map ``A``/``B``/``expanding``/``contracting`` to ``A`` or ``B``."""
    w = which.strip().lower()
    if w in ("a", "b"):
        return w.upper()
    if w in ("expanding", "contracting"):
        a_expands = cert.class_a.lo > 1
        return "A" if (w == "expanding") == a_expands else "B"
    raise ValueError(f"unknown class selector {which!r}")


def _cluster_json(c: ModulusCluster) -> dict:
    return {
        "lo_num": str(c.lo.numerator),
        "lo_den": str(c.lo.denominator),
        "hi_num": str(c.hi.numerator),
        "hi_den": str(c.hi.denominator),
        "mult": c.multiplicity,
        "semisimple": c.semisimple,
    }


def _cluster_from_json(obj: dict) -> ModulusCluster:
    return ModulusCluster(
        Fraction(int(obj["lo_num"]), int(obj["lo_den"])),
        Fraction(int(obj["hi_num"]), int(obj["hi_den"])),
        int(obj["mult"]),
        bool(obj["semisimple"]),
    )


@dataclass(frozen=True)
class Rejection:
    reason: RejectionReason
    detail: str = ""

    def to_json(self) -> dict:
        return {"reason": self.reason.value, "detail": self.detail}


@dataclass(frozen=True)
class Undecided:
    precision_bits: int
    detail: str = ""

    def to_json(self) -> dict:
        return {"precision_bits": self.precision_bits, "detail": self.detail}


Outcome = Union[TwoClassCertificate, Rejection, Undecided]


def outcome_json(outcome: Outcome) -> dict:
    if isinstance(outcome, TwoClassCertificate):
        return {"kind": "certificate", "certificate": outcome.to_json()}
    if isinstance(outcome, Rejection):
        return {"kind": "rejection", **outcome.to_json()}
    return {"kind": "undecided", **outcome.to_json()}


def outcome_from_json(obj: dict) -> Outcome:
    kind = obj["kind"]
    if kind == "certificate":
        return TwoClassCertificate.from_json(obj["certificate"])
    if kind == "rejection":
        return Rejection(RejectionReason(obj["reason"]), obj.get("detail", ""))
    if kind == "undecided":
        return Undecided(int(obj["precision_bits"]), obj.get("detail", ""))
    raise ValueError(f"unknown outcome kind {kind!r}")


def classify_two_class(p: IntPolynomial, max_precision_bits: int = DEFAULT_MAX_BITS) -> Outcome:
    """Certify, reject or leave undecided the two-class property of ``p``.

    Exact tests run first (unimodularity, unit-circle roots). Numeric levels
    then double from 64 bits; the first level whose clusters are all resolved
    decides. Three or more disjoint clusters reject early even when some of
    them are unresolved, since disjoint clusters carry distinct moduli.
    """
    if abs(p.constant) != 1:
        return Rejection(RejectionReason.NOT_UNIMODULAR, f"|a0| = {abs(p.constant)}")
    prep = prepare(p)
    if prep.unit_roots:
        return Rejection(RejectionReason.UNIT_MODULUS_ROOT, f"{prep.unit_roots} roots of modulus 1")
    bits = BASE_BITS
    last = 0
    while bits <= max(max_precision_bits, BASE_BITS):
        last = bits
        clusters, ok = level_clusters(prep, bits)
        if clusters is not None:
            if len(clusters) >= 3:
                return Rejection(RejectionReason.MORE_THAN_TWO_CLASSES,
                                 f"{len(clusters)} disjoint modulus clusters at {bits} bits")
            if ok and not any(c.lo <= 1 <= c.hi for c in clusters):
                if len(clusters) == 1:
                    return Rejection(RejectionReason.ONE_CLASS, f"single modulus cluster at {bits} bits")
                a, b = (ModulusCluster(c.lo, c.hi, c.multiplicity, c.semisimple) for c in clusters)
                return TwoClassCertificate(p, a, b, bits)
        if bits >= max_precision_bits:
            break
        bits = min(bits * 2, max_precision_bits)
    return Undecided(last, f"moduli not separated up to {last} bits")


def classify_matrix(m: IntMatrix, max_precision_bits: int = DEFAULT_MAX_BITS) -> Outcome:
    return classify_two_class(char_poly(m), max_precision_bits)


__all__ = [
    "DEFAULT_MAX_BITS",
    "Outcome",
    "Rejection",
    "RejectionReason",
    "TwoClassCertificate",
    "Undecided",
    "classify_matrix",
    "classify_two_class",
    "outcome_from_json",
    "outcome_json",
    "resolve_class",
]
