"""Structured audit outcomes and weak-equivalence verdicts."""
from __future__ import annotations

import json
import time
from contextlib import contextmanager
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Iterator

PASS = "PASS"
FAIL = "FAIL"
INCONCLUSIVE = "INCONCLUSIVE"
SKIPPED = "SKIPPED-UNIMPLEMENTABLE"
STATUSES = (PASS, FAIL, INCONCLUSIVE, SKIPPED)
FORMAT_REPORT = "kanaudit.report/1"


class Verdict(str, Enum):
    WEQ = "WEQ"
    NOT_WEQ = "NOT_WEQ"
    UNKNOWN = "UNKNOWN"


@dataclass
class AuditReport:
    check: str
    status: str = PASS
    witness: Any = None
    params: dict = field(default_factory=dict)
    seed: int | None = None
    timing: float = 0.0
    details: list[str] = field(default_factory=list)
    verdicts: list[str] = field(default_factory=list)
    children: list["AuditReport"] = field(default_factory=list)

    def __post_init__(self) -> None:
        if self.status not in STATUSES:
            raise ValueError(f"unknown status {self.status!r}")

    @property
    def passed(self) -> bool:
        return self.status == PASS

    def fail(self, message: str, witness: Any = None) -> None:
        self.status = FAIL
        self.details.append(message)
        if self.witness is None and witness is not None:
            self.witness = witness

    def add(self, child: "AuditReport") -> "AuditReport":
        self.children.append(child)
        return child

    def settle(self) -> "AuditReport":
        """Fold children into this report's status; own FAIL wins."""
        self.status = combine([self.status] + [c.status for c in self.children])
        return self

    def walk(self) -> Iterator["AuditReport"]:
        yield self
        for c in self.children:
            yield from c.walk()

    def exit_code(self) -> int:
        statuses = [r.status for r in self.walk()]
        if FAIL in statuses:
            return 1
        if INCONCLUSIVE in statuses:
            return 2
        return 0

    def to_dict(self) -> dict:
        return {
            "check": self.check,
            "status": self.status,
            "witness": self.witness,
            "params": self.params,
            "seed": self.seed,
            "timing": self.timing,
            "details": list(self.details),
            "verdicts": list(self.verdicts),
            "children": [c.to_dict() for c in self.children],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "AuditReport":
        return cls(
            check=d["check"], status=d["status"], witness=d.get("witness"), params=d.get("params", {}),
            seed=d.get("seed"), timing=d.get("timing", 0.0), details=list(d.get("details", [])),
            verdicts=list(d.get("verdicts", [])), children=[cls.from_dict(c) for c in d.get("children", [])],
        )

    def to_json(self, **kw) -> str:
        return json.dumps({"format": FORMAT_REPORT, "report": self.to_dict()}, **kw)

    @classmethod
    def from_json(cls, text: str) -> "AuditReport":
        obj = json.loads(text)
        if obj.get("format") != FORMAT_REPORT:
            raise ValueError(f"unsupported format {obj.get('format')!r}")
        return cls.from_dict(obj["report"])

    def to_text(self, indent: int = 0) -> str:
        pad = "  " * indent
        line = f"{pad}[{self.status}] {self.check}"
        if self.params:
            line += " " + " ".join(f"{k}={v}" for k, v in sorted(self.params.items()))
        if self.timing:
            line += f" ({self.timing:.2f}s)"
        out = [line]
        for d in self.details[:8]:
            out.append(f"{pad}    - {d}")
        if len(self.details) > 8:
            out.append(f"{pad}    - ... {len(self.details) - 8} more")
        for c in self.children:
            out.append(c.to_text(indent + 1))
        return "\n".join(out)


def combine(statuses: list[str]) -> str:
    if FAIL in statuses:
        return FAIL
    if INCONCLUSIVE in statuses:
        return INCONCLUSIVE
    if statuses and all(s == SKIPPED for s in statuses):
        return SKIPPED
    return PASS


def aggregate(check: str, children: list[AuditReport], **params) -> AuditReport:
    r = AuditReport(check, params=params, children=sorted(children, key=lambda c: c.check))
    r.timing = sum(c.timing for c in children)
    if children:
        r.status = combine([c.status for c in children])
    return r


def skipped(check: str, reason: str, **params) -> AuditReport:
    return AuditReport(check, SKIPPED, params=params, details=[reason])


def verdict_status(verdicts: list[Verdict]) -> str:
    if any(v == Verdict.NOT_WEQ for v in verdicts):
        return FAIL
    if any(v == Verdict.UNKNOWN for v in verdicts):
        return INCONCLUSIVE
    return PASS


@contextmanager
def timed(report: AuditReport) -> Iterator[AuditReport]:
    t0 = time.perf_counter()
    try:
        yield report
    finally:
        report.timing = time.perf_counter() - t0
