"""Verification reports: ordered named checks with residuals and tolerances."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Iterable

import numpy as np

from .backend import format_scalar


@dataclass(frozen=True)
class Check:
    """One verified statement.  ``passed`` is derived, never set by hand."""

    name: str
    anchor: str
    residual: Any
    tolerance: Any
    detail: str = ""

    @property
    def passed(self) -> bool:
        return self.residual <= self.tolerance

    @classmethod
    def boolean(cls, name: str, anchor: str, ok: bool, detail: str = "") -> "Check":
        return cls(name, anchor, Fraction(0) if ok else Fraction(1), Fraction(0), detail)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "anchor": self.anchor,
            "residual": format_scalar(self.residual),
            "tolerance": format_scalar(self.tolerance),
            "status": "pass" if self.passed else "fail",
            "detail": self.detail,
        }


@dataclass
class VerificationReport:
    """Checks in declaration order plus provenance and engine configuration."""

    title: str
    provenance: dict = field(default_factory=dict)
    config: dict = field(default_factory=dict)
    checks: list[Check] = field(default_factory=list)
    data: dict = field(default_factory=dict)

    def add(self, check: Check) -> Check:
        self.checks.append(check)
        return check

    def check(self, name: str, anchor: str, residual, tolerance, detail: str = "") -> Check:
        return self.add(Check(name, anchor, residual, tolerance, detail))

    def boolean(self, name: str, anchor: str, ok: bool, detail: str = "") -> Check:
        return self.add(Check.boolean(name, anchor, ok, detail))

    def extend(self, other: "VerificationReport | Iterable[Check]", prefix: str = "") -> None:
        checks = other.checks if isinstance(other, VerificationReport) else other
        for c in checks:
            name = f"{prefix}{c.name}" if prefix else c.name
            self.checks.append(Check(name, c.anchor, c.residual, c.tolerance, c.detail))

    def __getitem__(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def __contains__(self, name: str) -> bool:
        return any(c.name == name for c in self.checks)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def failures(self) -> list[Check]:
        return [c for c in self.checks if not c.passed]

    @property
    def summary(self) -> dict:
        n_pass = sum(1 for c in self.checks if c.passed)
        return {"total": len(self.checks), "passed": n_pass, "failed": len(self.checks) - n_pass}

    def to_dict(self) -> dict:
        return {
            "title": self.title,
            "provenance": _jsonable(self.provenance),
            "config": _jsonable(self.config),
            "checks": [c.to_dict() for c in self.checks],
            "summary": self.summary,
            "status": "pass" if self.passed else "fail",
            "data": _jsonable(self.data),
        }

    def to_json(self) -> str:
        return canonical_json(self.to_dict())

    def to_markdown(self) -> str:
        return markdown_from_dict(self.to_dict())


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (str, bool)) or obj is None:
        return obj
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if hasattr(obj, "tolist"):
        return _jsonable(obj.tolist())
    return format_scalar(obj)


def canonical_json(obj) -> str:
    return json.dumps(_jsonable(obj), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def _point_count(p: dict) -> str:
    if "summary" in p:
        return f"{p['summary'].get('passed')}/{p['summary'].get('total')}"
    checks = p.get("checks")
    if isinstance(checks, dict):
        return f"{sum(bool(v) for v in checks.values())}/{len(checks)}"
    return "-"


def markdown_from_dict(doc: dict) -> str:
    """Render a report dict (or a sweep aggregate) as markdown."""
    lines = [f"# {doc.get('title', 'report')}", ""]
    if doc.get("provenance"):
        lines.append("## Model")
        for k, v in sorted(doc["provenance"].items()):
            lines.append(f"- **{k}**: {v}")
        lines.append("")
    if doc.get("config"):
        lines.append("## Engine")
        for k, v in sorted(doc["config"].items()):
            lines.append(f"- **{k}**: {v}")
        lines.append("")
    if doc.get("checks"):
        lines += ["## Checks", "", "| status | check | residual | tolerance | anchor |", "|---|---|---|---|---|"]
        for c in doc["checks"]:
            lines.append(
                f"| {c['status']} | {c['name']} | {c['residual']} | {c['tolerance']} | {c['anchor']} |"
            )
        lines.append("")
    if doc.get("points"):
        lines += ["## Points", "", "| index | parameters | status | checks passed |", "|---|---|---|---|"]
        for p in doc["points"]:
            params = ", ".join(f"{k}={v}" for k, v in p.get("parameters", {}).items())
            lines.append(f"| {p['index']} | {params} | {p['status']} | {_point_count(p)} |")
        lines.append("")
    if doc.get("aggregates"):
        lines.append("## Aggregates")
        for k, v in sorted(doc["aggregates"].items()):
            lines.append(f"- **{k}**: {v}")
        lines.append("")
    if "summary" in doc:
        s = doc["summary"]
        lines.append(f"**{doc.get('status', '')}**: {s.get('passed')}/{s.get('total')} checks passed")
    return "\n".join(lines) + "\n"
