"""Named pass/fail checks with numeric residuals."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional

PASS, FAIL = "PASS", "FAIL"


@dataclass(frozen=True)
class ReportEntry:
    check: str
    status: str
    residual: Optional[float]
    detail: str = ""

    def __post_init__(self):
        if self.status not in (PASS, FAIL):
            raise ValueError(f"bad status {self.status!r}")
        if self.residual is not None and not math.isfinite(self.residual):
            raise ValueError(f"residual for {self.check} is not finite")

    @property
    def passed(self) -> bool:
        return self.status == PASS

    def to_json(self) -> dict:
        return {"check": self.check, "status": self.status,
                "residual": "NA" if self.residual is None else self.residual,
                "detail": self.detail}


@dataclass
class VerificationReport:
    entries: list = field(default_factory=list)
    values: dict = field(default_factory=dict)

    def add(self, check: str, ok: bool, residual=None, detail: str = "") -> ReportEntry:
        res = None if residual is None else float(residual)
        if res is not None and not math.isfinite(res):
            ok, detail, res = False, (detail + " (non-finite residual)").strip(), None
        e = ReportEntry(check, PASS if ok else FAIL, res, detail)
        self.entries.append(e)
        return e

    def extend(self, other: "VerificationReport") -> "VerificationReport":
        self.entries.extend(other.entries)
        self.values.update(other.values)
        return self

    @property
    def passed(self) -> bool:
        return all(e.passed for e in self.entries)

    def __getitem__(self, check: str) -> ReportEntry:
        for e in self.entries:
            if e.check == check:
                return e
        raise KeyError(check)

    def to_json(self) -> list:
        return [e.to_json() for e in self.entries]

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=1)

    def lines(self) -> list[str]:
        out = []
        for e in self.entries:
            r = "NA" if e.residual is None else f"{e.residual:.3e}"
            out.append(f"{e.status}  {e.check}  residual={r}  {e.detail}".rstrip())
        return out
