"""Box enumeration of unimodular monic polynomials and a deterministic result store.

Candidates are classified with :func:`classify_two_class`; the work is split
statically by (degree, next-to-leading coefficient) so the merged output never
depends on the number of worker processes.
"""

from __future__ import annotations

import hashlib
import itertools
import json
import os
import time
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Optional, Sequence

from . import __version__
from .polyclass import (
    DEFAULT_MAX_BITS,
    IntPolynomial,
    Outcome,
    TwoClassCertificate,
    classify_two_class,
    outcome_from_json,
    outcome_json,
)

STORE_FORMAT = 1
STORE_ENV = "GIB_STORE_DIR"
MIN_DEGREE, MAX_DEGREE = 2, 16


class StoreUnavailable(OSError):
    pass


class SpecError(ValueError):
    pass


@dataclass(frozen=True)
class SearchSpec:
    degrees: tuple[int, int]
    coeff_bound: int
    class_pattern: Optional[tuple[int, int]] = None
    max_precision_bits: int = DEFAULT_MAX_BITS
    include_block_products: bool = False

    def __post_init__(self):
        lo, hi = self.degrees
        if not (MIN_DEGREE <= lo <= hi <= MAX_DEGREE):
            raise SpecError(f"degrees {self.degrees} not inside [{MIN_DEGREE}, {MAX_DEGREE}]")
        if self.coeff_bound < 1:
            raise SpecError("coeff_bound must be at least 1")
        if self.class_pattern is not None:
            a, b = self.class_pattern
            if a < 1 or b < 1:
                raise SpecError("class pattern entries must be positive")
        if self.max_precision_bits < 64:
            raise SpecError("max_precision_bits must be at least 64")

    @property
    def degree_range(self) -> range:
        return range(self.degrees[0], self.degrees[1] + 1)

    def to_json(self) -> dict:
        return {
            "degrees": list(self.degrees),
            "coeff_bound": self.coeff_bound,
            "class_pattern": list(self.class_pattern) if self.class_pattern else None,
            "max_precision_bits": self.max_precision_bits,
            "include_block_products": self.include_block_products,
        }

    def canonical(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, separators=(",", ":"))

    def spec_hash(self) -> str:
        return hashlib.sha256(self.canonical().encode()).hexdigest()

    def matches(self, outcome: Outcome) -> bool:
        """Pattern filter; the pattern is unordered since class A is just the smaller modulus."""
        if not isinstance(outcome, TwoClassCertificate):
            return False
        if self.class_pattern is None:
            return True
        return sorted(outcome.multiplicities) == sorted(self.class_pattern)


@dataclass(frozen=True)
class SearchRecord:
    spec_hash: str
    poly: IntPolynomial
    outcome: Outcome
    wall_time: float = field(default=0.0, compare=False)
    worker: int = field(default=0, compare=False)

    @property
    def is_certificate(self) -> bool:
        return isinstance(self.outcome, TwoClassCertificate)

    def canonical_json(self) -> dict:
        # wall time and worker id are kept out so the store is reproducible
        return {
            "spec_hash": self.spec_hash,
            "poly": [str(c) for c in self.poly.coeffs],
            "outcome": outcome_json(self.outcome),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "SearchRecord":
        poly = IntPolynomial(tuple(int(c) for c in obj["poly"]))
        return cls(obj["spec_hash"], poly, outcome_from_json(obj["outcome"]))


def sort_key(p: IntPolynomial) -> tuple:
    return (p.degree, p.leading_first())


# enumeration ---------------------------------------------------------------

def _box(degree: int, bound: int, second: Optional[int] = None) -> Iterator[IntPolynomial]:
    """Monic polynomials of the degree with |a0| = 1, leading-first lexicographic order."""
    rng = range(-bound, bound + 1)
    seconds = [second] if second is not None else list(rng)
    middle = degree - 2
    for a_top in seconds:
        for mid in itertools.product(rng, repeat=middle):
            for a0 in (-1, 1):
                lead_first = (1, a_top) + mid + (a0,) if degree >= 2 else (1, a0)
                yield IntPolynomial.from_leading_first(lead_first)


def _in_box(p: IntPolynomial, bound: int) -> bool:
    return abs(p.constant) == 1 and all(abs(c) <= bound for c in p.coeffs[:-1])


def block_products(degree: int, pool: Sequence[IntPolynomial]) -> list[IntPolynomial]:
    """Products of two or more pool members (with repetition) whose degrees sum to ``degree``."""
    pool = sorted(set(q for q in pool if q.degree < degree), key=sort_key)
    out: set[IntPolynomial] = set()

    def grow(start: int, remaining: int, acc: Optional[IntPolynomial], count: int):
        if remaining == 0:
            if count >= 2:
                out.add(acc)
            return
        for i in range(start, len(pool)):
            q = pool[i]
            if q.degree <= remaining:
                grow(i, remaining - q.degree, q if acc is None else acc * q, count + 1)

    grow(0, degree, None, 0)
    return sorted(out, key=sort_key)


def _certified_pool(spec: SearchSpec, upto: int) -> list[IntPolynomial]:
    """Two-class polynomials of degree 2..upto in the box, used as block factors."""
    found = []
    for d in range(MIN_DEGREE, upto + 1):
        for p in _box(d, spec.coeff_bound):
            if isinstance(classify_two_class(p, spec.max_precision_bits), TwoClassCertificate):
                found.append(p)
    return found


def enumerate_candidates(spec: SearchSpec, pool: Optional[Iterable[IntPolynomial]] = None) -> Iterator[IntPolynomial]:
    """Every box polynomial in canonical order, then the extra block products per degree.

    ``pool`` supplies the certified lower-degree factors for block products; when
    omitted it is computed from the box itself.
    """
    blocks: dict[int, list[IntPolynomial]] = {}
    if spec.include_block_products:
        pool = list(pool) if pool is not None else _certified_pool(spec, spec.degrees[1] - MIN_DEGREE)
        for d in spec.degree_range:
            blocks[d] = [q for q in block_products(d, pool) if not _in_box(q, spec.coeff_bound)]
    for d in spec.degree_range:
        yield from _box(d, spec.coeff_bound)
        yield from blocks.get(d, [])


# classification ------------------------------------------------------------

def _classify_chunk(args) -> list[tuple[list[int], dict, float]]:
    polys, bits = args
    out = []
    for coeffs in polys:
        p = IntPolynomial(tuple(coeffs))
        t0 = time.perf_counter()
        outcome = classify_two_class(p, bits)
        out.append((coeffs, outcome_json(outcome), time.perf_counter() - t0))
    return out


def _chunks(spec: SearchSpec, pool) -> list[list[list[int]]]:
    """Static partition: one chunk per (degree, next-to-leading coefficient), blocks last."""
    chunks = []
    for d in spec.degree_range:
        for second in range(-spec.coeff_bound, spec.coeff_bound + 1):
            chunks.append([list(p.coeffs) for p in _box(d, spec.coeff_bound, second)])
    if spec.include_block_products:
        extra = [p for p in enumerate_candidates(spec, pool) if not _in_box(p, spec.coeff_bound)]
        if extra:
            chunks.append([list(p.coeffs) for p in extra])
    return chunks


def classify_all(spec: SearchSpec, workers: int = 1, pool=None) -> list[SearchRecord]:
    """Classify every candidate; records come back sorted by (degree, coefficients)."""
    h = spec.spec_hash()
    jobs = [(c, spec.max_precision_bits) for c in _chunks(spec, pool)]
    if workers <= 1:
        results = [(0, _classify_chunk(j)) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            results = [(i % workers, r) for i, r in enumerate(ex.map(_classify_chunk, jobs))]
    records = []
    for worker, chunk in results:
        for coeffs, out, dt in chunk:
            p = IntPolynomial(tuple(coeffs))
            records.append(SearchRecord(h, p, outcome_from_json(out), dt, worker))
    records.sort(key=lambda r: sort_key(r.poly))
    return records


# store ---------------------------------------------------------------------

def default_store_dir() -> Path:
    return Path(os.environ.get(STORE_ENV, "gib_store"))


class ResultStore:
    """Append-only JSON-lines file with a sidecar index keyed by spec hash.

    Line 0 is a header. Timing and worker metadata go to ``<name>.meta.jsonl``
    so the main file depends only on the specs that were run.
    """

    def __init__(self, directory=None, name: str = "results"):
        self.dir = Path(directory) if directory is not None else default_store_dir()
        self.path = self.dir / f"{name}.jsonl"
        self.index_path = self.dir / f"{name}.index.json"
        self.meta_path = self.dir / f"{name}.meta.jsonl"
        try:
            self.dir.mkdir(parents=True, exist_ok=True)
            if not self.path.exists():
                header = {"tool": "gibtools", "version": __version__, "format": STORE_FORMAT}
                self.path.write_text(json.dumps(header, sort_keys=True) + "\n")
            self._recover()
        except OSError as exc:
            raise StoreUnavailable(str(exc)) from exc

    def _read_index(self) -> dict:
        if self.index_path.exists():
            return json.loads(self.index_path.read_text())
        return {}

    def _recover(self):
        # drop lines written after the last indexed spec (an interrupted run)
        index = self._read_index()
        end = max([v["end"] for v in index.values()], default=1)
        with self.path.open() as fh:
            lines = fh.readlines()
        if len(lines) > end:
            with self.path.open("w") as fh:
                fh.writelines(lines[:end])

    def lookup(self, spec: SearchSpec) -> Optional[dict]:
        return self._read_index().get(spec.spec_hash())

    def records(self, spec: SearchSpec) -> list[SearchRecord]:
        entry = self.lookup(spec)
        if entry is None:
            return []
        with self.path.open() as fh:
            lines = fh.readlines()[entry["start"]:entry["end"]]
        return [SearchRecord.from_json(json.loads(line)) for line in lines]

    def append(self, spec: SearchSpec, records: Sequence[SearchRecord], summary: dict) -> dict:
        try:
            with self.path.open() as fh:
                start = sum(1 for _ in fh)
            with self.path.open("a") as fh:
                for r in records:
                    fh.write(json.dumps(r.canonical_json(), sort_keys=True, separators=(",", ":")) + "\n")
            with self.meta_path.open("a") as fh:
                for r in records:
                    fh.write(json.dumps({"spec_hash": r.spec_hash, "poly": [str(c) for c in r.poly.coeffs],
                                         "wall_time": r.wall_time, "worker": r.worker}) + "\n")
            index = self._read_index()
            entry = {"start": start, "end": start + len(records), "spec": spec.to_json(), "summary": summary}
            index[spec.spec_hash()] = entry
            tmp = self.index_path.with_suffix(".tmp")
            tmp.write_text(json.dumps(index, sort_keys=True, indent=1))
            tmp.replace(self.index_path)
        except OSError as exc:
            raise StoreUnavailable(str(exc)) from exc
        return entry


def summarize(spec: SearchSpec, records: Sequence[SearchRecord]) -> dict:
    per_degree = {str(d): 0 for d in spec.degree_range}
    kinds: Counter = Counter()
    for r in records:
        if spec.matches(r.outcome):
            per_degree[str(r.poly.degree)] += 1
        if isinstance(r.outcome, TwoClassCertificate):
            kinds["certificate"] += 1
        elif hasattr(r.outcome, "reason"):
            kinds[r.outcome.reason.value] += 1
        else:
            kinds["undecided"] += 1
    return {"candidates": len(records), "matches_per_degree": per_degree,
            "matches": sum(per_degree.values()), "outcomes": dict(sorted(kinds.items()))}


@dataclass
class SearchResult:
    spec: SearchSpec
    records: list
    summary: dict
    cached: bool = False

    @property
    def matches(self) -> list[SearchRecord]:
        return [r for r in self.records if self.spec.matches(r.outcome)]


def search_certificates(spec: SearchSpec, store: Optional[ResultStore] = None, workers: int = 1,
                        pool=None) -> SearchResult:
    """Classify the whole box; a spec already in the store is served from it without appending."""
    if store is not None and store.lookup(spec) is not None:
        entry = store.lookup(spec)
        return SearchResult(spec, store.records(spec), entry["summary"], cached=True)
    records = classify_all(spec, workers, pool)
    summary = summarize(spec, records)
    if store is not None:
        store.append(spec, records, summary)
    return SearchResult(spec, records, summary)


def single_exponent_scan(degrees: Iterable[int], coeff_bound: int, store: Optional[ResultStore] = None,
                         workers: int = 1, max_precision_bits: int = DEFAULT_MAX_BITS) -> dict:
    """Count certificates with one class of multiplicity 1 per degree (pattern (1, d-1))."""
    counts = {}
    found = {}
    for d in sorted(set(degrees)):
        spec = SearchSpec((d, d), coeff_bound, (1, d - 1), max_precision_bits)
        res = search_certificates(spec, store, workers)
        counts[d] = len(res.matches)
        found[d] = [str(r.poly) for r in res.matches]
    return {"coeff_bound": coeff_bound, "counts": counts, "polynomials": found}


# spec files ----------------------------------------------------------------

def _parse_pattern(value, degrees) -> Optional[tuple[int, int]]:
    if value is None or value == "":
        return None
    if isinstance(value, str):
        v = value.strip().lower()
        if v in ("single", "1,m"):
            return None if degrees[0] != degrees[1] else (1, degrees[0] - 1)
        parts = [int(x) for x in v.replace("(", "").replace(")", "").split(",")]
        value = parts
    if len(value) != 2:
        raise SpecError(f"pattern needs two entries, got {value!r}")
    return int(value[0]), int(value[1])


def parse_spec_text(text: str) -> tuple[SearchSpec, dict]:
    """Parse a TOML spec; returns the spec plus run options (``workers``, ``single``).

    Keys: ``degrees`` (int or [lo, hi]), ``bound``, ``pattern`` ([a, b], "a,b"
    or "1,m"), ``precision``, ``blocks``, ``workers``.
    """
    import tomli

    try:
        raw = tomli.loads(text)
    except tomli.TOMLDecodeError as exc:
        raise SpecError(str(exc)) from exc
    known = {"degrees", "bound", "pattern", "precision", "blocks", "workers"}
    unknown = set(raw) - known
    if unknown:
        raise SpecError(f"unknown keys: {sorted(unknown)}")
    if "degrees" not in raw or "bound" not in raw:
        raise SpecError("spec needs 'degrees' and 'bound'")
    deg = raw["degrees"]
    degrees = (int(deg), int(deg)) if isinstance(deg, int) else (int(deg[0]), int(deg[-1]))
    pat = raw.get("pattern")
    single = isinstance(pat, str) and pat.strip().lower() in ("single", "1,m")
    spec = SearchSpec(
        degrees=degrees,
        coeff_bound=int(raw["bound"]),
        class_pattern=_parse_pattern(pat, degrees),
        max_precision_bits=int(raw.get("precision", DEFAULT_MAX_BITS)),
        include_block_products=bool(raw.get("blocks", False)),
    )
    return spec, {"workers": int(raw.get("workers", 1)), "single": single}
