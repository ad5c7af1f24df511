"""Evaluation machinery: manifestation-level and criterion-level confusion
counting, accuracy/precision/recall/F-beta, and the keyword-only baseline.

A manifestation of a type is the per-policy fact that it appears in at
least one sentence. A predicted manifestation whose sentences are disjoint
from the gold ones counts as both a false positive and a false negative
(the double-penalty rule). Criterion-level counting uses one unit per
required conjunct for conjunctive postconditions and one per criterion
otherwise. Undefined ratios are reported as n/a, never as zero.
"""

from __future__ import annotations

from dataclasses import dataclass

from .classifiers import KeywordIndex, predict_keywords
from .criteria import Criterion, Finding, Status
from .nlp import PipelineConfig, RawDocument, preprocess
from .prediction import PolicyMetadataPresence, SentencePrediction
from .taxonomy import MetadataType, TaxonomyRegistry


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int = 0
    fp: int = 0
    fn: int = 0
    tn: int = 0

    def __add__(self, other: "ConfusionCounts") -> "ConfusionCounts":
        return ConfusionCounts(
            self.tp + other.tp,
            self.fp + other.fp,
            self.fn + other.fn,
            self.tn + other.tn,
        )

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn


@dataclass(frozen=True)
class MetricSet:
    """Metrics in [0, 1]; None marks an undefined (zero-denominator) ratio."""

    accuracy: float | None
    precision: float | None
    recall: float | None
    f_beta: float | None
    beta: float = 2.0


def metrics(counts: ConfusionCounts, beta: float = 2.0) -> MetricSet:
    if beta <= 0:
        raise ValueError(f"beta must be positive: {beta}")
    total = counts.total
    accuracy = (counts.tp + counts.tn) / total if total else None
    p_den = counts.tp + counts.fp
    r_den = counts.tp + counts.fn
    precision = counts.tp / p_den if p_den else None
    recall = counts.tp / r_den if r_den else None
    f_beta = None
    if precision is not None and recall is not None:
        f_den = beta * beta * precision + recall
        if f_den:
            f_beta = (1 + beta * beta) * precision * recall / f_den
    return MetricSet(accuracy, precision, recall, f_beta, beta)


# ---------------------------------------------------------------------------
# Manifestation-level counting (per metadata type, per policy)
# ---------------------------------------------------------------------------


def count_manifestations(
    predicted_indices: tuple[int, ...],
    gold_indices: tuple[int, ...],
) -> ConfusionCounts:
    """Confusion contribution of one (policy, type) pair given the predicted
    and gold supporting sentence index sets."""
    predicted = set(predicted_indices)
    gold = set(gold_indices)
    if predicted and gold and predicted & gold:
        return ConfusionCounts(tp=1)
    if predicted:
        # Wrong sentences: false positive, plus a miss if a real
        # manifestation exists elsewhere.
        return ConfusionCounts(fp=1, fn=1 if gold else 0)
    if gold:
        return ConfusionCounts(fn=1)
    return ConfusionCounts(tn=1)


def gold_indices_for(records, t: MetadataType) -> tuple[int, ...]:
    """Sentences of one policy annotated with t or a descendant."""
    return tuple(sorted(r.index for r in records if r.has_label(t)))


def manifestation_counts(
    predicted: PolicyMetadataPresence,
    gold_records,
    types,
) -> dict[MetadataType, ConfusionCounts]:
    return {
        t: count_manifestations(predicted.supporting(t), gold_indices_for(gold_records, t))
        for t in types
    }


# ---------------------------------------------------------------------------
# Criterion-level (incompleteness issue) counting
# ---------------------------------------------------------------------------


def _unmet_groups(finding: Finding) -> set[tuple[str, ...]]:
    if finding.status not in (Status.VIOLATION, Status.WARNING):
        return set()
    return {tuple(str(t) for t in group) for group in finding.missing_groups}


def count_issues(
    predicted: Finding, gold: Finding, criterion: Criterion
) -> ConfusionCounts:
    """Per-policy confusion for one criterion. Conjunctive postconditions
    contribute one unit per required group; others one unit per criterion."""
    if len(criterion.postcondition) > 1:
        counts = ConfusionCounts()
        predicted_unmet = _unmet_groups(predicted)
        gold_unmet = _unmet_groups(gold)
        for group in criterion.postcondition:
            key = tuple(str(t) for t in group)
            flagged = key in predicted_unmet
            genuine = key in gold_unmet
            counts = counts + ConfusionCounts(
                tp=int(flagged and genuine),
                fp=int(flagged and not genuine),
                fn=int(genuine and not flagged),
                tn=int(not flagged and not genuine),
            )
        return counts
    flagged = predicted.is_issue
    genuine = gold.is_issue
    return ConfusionCounts(
        tp=int(flagged and genuine),
        fp=int(flagged and not genuine),
        fn=int(genuine and not flagged),
        tn=int(not flagged and not genuine),
    )


# ---------------------------------------------------------------------------
# Keyword-only baseline
# ---------------------------------------------------------------------------


def baseline_identify(
    doc: RawDocument,
    index: KeywordIndex,
    pipeline_config: PipelineConfig,
    registry: TaxonomyRegistry,
) -> PolicyMetadataPresence:
    """Presence by keyword search alone: a type manifests if any sentence
    matches one of its phrases. No trained models, no fusion, no window."""
    predictions = [
        SentencePrediction(
            index=ps.sentence.index,
            labels=frozenset(predict_keywords(index, ps)),
        )
        for ps in preprocess(doc, pipeline_config)
    ]
    return PolicyMetadataPresence.from_predictions(predictions, registry)


def baseline_identify_records(
    records,
    index: KeywordIndex,
    registry: TaxonomyRegistry,
) -> PolicyMetadataPresence:
    """Baseline over already-normalized corpus records."""

    @dataclass(frozen=True)
    class _TokensOnly:
        tokens: tuple[str, ...]

    predictions = [
        SentencePrediction(
            index=r.index,
            labels=frozenset(predict_keywords(index, _TokensOnly(tuple(r.tokens)))),
        )
        for r in records
    ]
    return PolicyMetadataPresence.from_predictions(predictions, registry)


# ---------------------------------------------------------------------------
# Result tables
# ---------------------------------------------------------------------------


def _pct(value: float | None) -> str:
    return "n/a" if value is None else f"{100.0 * value:.1f}"


@dataclass(frozen=True)
class TableRow:
    name: str
    counts: ConfusionCounts
    metric_set: MetricSet


def build_rows(
    named_counts: list[tuple[str, ConfusionCounts]], beta: float = 2.0
) -> list[TableRow]:
    rows = [TableRow(name, c, metrics(c, beta)) for name, c in named_counts]
    summary = ConfusionCounts()
    for _, c in named_counts:
        summary = summary + c
    rows.append(TableRow("Summary", summary, metrics(summary, beta)))
    return rows


def render_table(rows: list[TableRow], title: str) -> str:
    header = f"{'':<55}{'TP':>6}{'FP':>6}{'FN':>6}{'TN':>6}{'A%':>8}{'P%':>8}{'R%':>8}{'F2%':>8}"
    lines = [title, header, "-" * len(header)]
    for row in rows:
        m = row.metric_set
        lines.append(
            f"{row.name:<55}{row.counts.tp:>6}{row.counts.fp:>6}"
            f"{row.counts.fn:>6}{row.counts.tn:>6}"
            f"{_pct(m.accuracy):>8}{_pct(m.precision):>8}"
            f"{_pct(m.recall):>8}{_pct(m.f_beta):>8}"
        )
    return "\n".join(lines) + "\n"


def render_table_delimited(rows: list[TableRow], delimiter: str = "\t") -> str:
    lines = [delimiter.join(["name", "tp", "fp", "fn", "tn", "a", "p", "r", "f2"])]
    for row in rows:
        m = row.metric_set
        lines.append(
            delimiter.join(
                [
                    row.name,
                    str(row.counts.tp),
                    str(row.counts.fp),
                    str(row.counts.fn),
                    str(row.counts.tn),
                    _pct(m.accuracy),
                    _pct(m.precision),
                    _pct(m.recall),
                    _pct(m.f_beta),
                ]
            )
        )
    return "\n".join(lines) + "\n"
