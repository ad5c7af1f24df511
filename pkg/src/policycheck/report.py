"""Completeness-analysis report: preamble, summary, per-criterion detail.

Rendered both as stable human-readable text (frozen by a golden file in the
test suite) and as a JSON document that round-trips through ``parse_structured``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .criteria import Finding, Status

NOT_FOUND = "NOT FOUND"
NOT_REQUIRED = "NOT REQUIRED"
NOT_APPLICABLE = "NOT APPLICABLE"

_STATUS_TEXT = {
    Status.SATISFIED: "SATISFIED",
    Status.VIOLATION: "VIOLATION",
    Status.WARNING: "WARNING",
    Status.NOT_REQUIRED: NOT_REQUIRED,
    Status.NOT_APPLICABLE: NOT_APPLICABLE,
}


class ReportError(ValueError):
    """Raised when report inputs are inconsistent (e.g. bad evidence index)."""


@dataclass(frozen=True)
class ReportItem:
    """One required metadata type under a criterion: either the supporting
    sentences or a NOT FOUND marker."""

    type_path: str
    found: bool
    sentences: tuple[tuple[int, str], ...] = ()


@dataclass(frozen=True)
class ReportEntry:
    criterion_id: str
    severity: str
    status: str
    items: tuple[ReportItem, ...] = ()


@dataclass(frozen=True)
class CompletenessReport:
    policy_id: str
    complete: bool
    violations: int
    warnings: int
    entries: tuple[ReportEntry, ...]


def build_report(
    policy_id: str,
    sentence_texts: list[str],
    findings: list[Finding],
) -> CompletenessReport:
    """Resolve finding evidence into sentence texts and aggregate counts."""
    entries = []
    violations = sum(1 for f in findings if f.status is Status.VIOLATION)
    warnings = sum(1 for f in findings if f.status is Status.WARNING)

    for finding in findings:
        items: list[ReportItem] = []
        if finding.status not in (Status.NOT_APPLICABLE, Status.NOT_REQUIRED):
            for t, indices in finding.evidence:
                sentences = []
                for idx in indices:
                    if not 0 <= idx < len(sentence_texts):
                        raise ReportError(
                            f"{finding.criterion_id}: evidence index {idx} out of range"
                        )
                    sentences.append((idx, sentence_texts[idx]))
                items.append(ReportItem(str(t), True, tuple(sentences)))
            for group in finding.missing_groups:
                for t in group:
                    items.append(ReportItem(str(t), False))
        entries.append(
            ReportEntry(
                criterion_id=finding.criterion_id,
                severity=finding.severity.value,
                status=finding.status.value,
                items=tuple(items),
            )
        )
    return CompletenessReport(
        policy_id=policy_id,
        complete=violations == 0,
        violations=violations,
        warnings=warnings,
        entries=tuple(entries),
    )


def render_text(report: CompletenessReport) -> str:
    lines = [
        "=== Completeness Analysis Report ===",
        f"Policy: {report.policy_id}",
        "",
        "--- Summary ---",
        f"Decision: {'COMPLETE' if report.complete else 'INCOMPLETE'}, "
        f"{report.violations} violations, {report.warnings} warnings",
        "",
        "--- Criteria ---",
    ]
    for entry in report.entries:
        status = Status(entry.status)
        lines.append(f"{entry.criterion_id} ({entry.severity}): {_STATUS_TEXT[status]}")
        for item in entry.items:
            if item.found:
                lines.append(f"  {item.type_path}:")
                for idx, text in item.sentences:
                    lines.append(f"    [{idx}] {text}")
            else:
                # missing items exist only on violation/warning findings
                lines.append(f"  {item.type_path}: {NOT_FOUND} [{_STATUS_TEXT[status]}]")
    return "\n".join(lines) + "\n"


def render_structured(report: CompletenessReport) -> str:
    payload = {
        "policy_id": report.policy_id,
        "complete": report.complete,
        "violations": report.violations,
        "warnings": report.warnings,
        "entries": [
            {
                "criterion_id": e.criterion_id,
                "severity": e.severity,
                "status": e.status,
                "items": [
                    {
                        "type": i.type_path,
                        "found": i.found,
                        "sentences": [
                            {"index": idx, "text": text} for idx, text in i.sentences
                        ],
                    }
                    for i in e.items
                ],
            }
            for e in report.entries
        ],
    }
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def parse_structured(text: str) -> CompletenessReport:
    payload = json.loads(text)
    entries = tuple(
        ReportEntry(
            criterion_id=e["criterion_id"],
            severity=e["severity"],
            status=e["status"],
            items=tuple(
                ReportItem(
                    type_path=i["type"],
                    found=i["found"],
                    sentences=tuple(
                        (s["index"], s["text"]) for s in i["sentences"]
                    ),
                )
                for i in e["items"]
            ),
        )
        for e in payload["entries"]
    )
    return CompletenessReport(
        policy_id=payload["policy_id"],
        complete=payload["complete"],
        violations=payload["violations"],
        warnings=payload["warnings"],
        entries=entries,
    )
