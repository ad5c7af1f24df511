"""Questionnaire model and the completeness-criteria engine.

Each criterion pairs a precondition (questionnaire answers and/or metadata
presence) with a postcondition: a conjunction of disjunction-groups of
metadata types. A failed questionnaire gate yields NOT_APPLICABLE, a failed
presence gate NOT_REQUIRED; an unmet postcondition yields a violation or a
warning depending on the criterion's severity. A required type is satisfied
by the presence of the type itself or any of its descendants.

The default criteria set is configuration (``data/criteria.txt``) using the
same grammar accepted for override files, so the engine itself stays
regulation-agnostic.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass

from .prediction import PolicyMetadataPresence
from .taxonomy import MetadataType, TaxonomyRegistry

INSIDE_EUROPE = "inside_europe"
OUTSIDE_EUROPE = "outside_europe"
COLLECTION_MODES = ("Direct", "Indirect", "Both")
CORE_ACTIVITIES = ("public_authority", "large_scale_monitoring", "special_categories")


class CriteriaError(ValueError):
    """Raised for invalid answers or malformed criteria config."""


@dataclass(frozen=True)
class QuestionnaireAnswers:
    q1_controller_identity: str
    q2_transfer_outside: bool
    q3_other_recipients: bool
    q4_core_activities: frozenset[str]
    q5_location: str
    q6_collection: str
    q5_representative_identity: str = ""

    def __post_init__(self) -> None:
        if not self.q1_controller_identity.strip():
            raise CriteriaError("Q1 controller identity must not be empty")
        if self.q5_location not in (INSIDE_EUROPE, OUTSIDE_EUROPE):
            raise CriteriaError(f"Q5 location invalid: {self.q5_location!r}")
        if self.q6_collection not in COLLECTION_MODES:
            raise CriteriaError(f"Q6 collection invalid: {self.q6_collection!r}")
        unknown = self.q4_core_activities - set(CORE_ACTIVITIES)
        if unknown:
            raise CriteriaError(f"Q4 activities unknown: {sorted(unknown)}")
        has_rep = bool(self.q5_representative_identity.strip())
        if (self.q5_location == OUTSIDE_EUROPE) != has_rep:
            raise CriteriaError(
                "Q5 representative identity is required exactly when the "
                "controller is outside Europe"
            )


class Severity(enum.Enum):
    VIOLATION = "violation"
    WARNING = "warning"


class Status(enum.Enum):
    SATISFIED = "SATISFIED"
    VIOLATION = "VIOLATION"
    WARNING = "WARNING"
    NOT_APPLICABLE = "NOT_APPLICABLE"
    NOT_REQUIRED = "NOT_REQUIRED"


@dataclass(frozen=True)
class AnswerAtom:
    """One questionnaire condition: kind in {A2, A3, A5_OUTSIDE, A6_IN,
    Q4_ANY}; ``values`` holds the accepted collection modes for A6_IN."""

    kind: str
    values: tuple[str, ...] = ()

    def holds(self, answers: QuestionnaireAnswers) -> bool:
        if self.kind == "A2":
            return answers.q2_transfer_outside
        if self.kind == "A3":
            return answers.q3_other_recipients
        if self.kind == "A5_OUTSIDE":
            return answers.q5_location == OUTSIDE_EUROPE
        if self.kind == "A6_IN":
            return answers.q6_collection in self.values
        if self.kind == "Q4_ANY":
            return bool(answers.q4_core_activities)
        raise CriteriaError(f"unknown answer atom: {self.kind}")


TypeGroup = tuple[MetadataType, ...]


@dataclass(frozen=True)
class Criterion:
    id: str
    severity: Severity
    answer_atoms: tuple[AnswerAtom, ...]
    presence_groups: tuple[TypeGroup, ...]
    postcondition: tuple[TypeGroup, ...]

    @property
    def number(self) -> int:
        return int(self.id.lstrip("Cc"))

    def referenced_types(self) -> list[MetadataType]:
        seen: dict[MetadataType, None] = {}
        for group in self.presence_groups + self.postcondition:
            for t in group:
                seen.setdefault(t, None)
        return list(seen)


@dataclass(frozen=True)
class Finding:
    criterion_id: str
    severity: Severity
    status: Status
    missing_groups: tuple[TypeGroup, ...] = ()
    evidence: tuple[tuple[MetadataType, tuple[int, ...]], ...] = ()

    @property
    def is_issue(self) -> bool:
        return self.status in (Status.VIOLATION, Status.WARNING)


def _present(
    presence: PolicyMetadataPresence, registry: TaxonomyRegistry, t: MetadataType
) -> bool:
    if presence.is_present(t):
        return True
    return any(presence.is_present(d) for d in registry.descendants(t))


def _supporting(
    presence: PolicyMetadataPresence, registry: TaxonomyRegistry, t: MetadataType
) -> tuple[int, ...]:
    indices: set[int] = set(presence.supporting(t))
    for d in registry.descendants(t):
        indices.update(presence.supporting(d))
    return tuple(sorted(indices))


def evaluate(
    criterion: Criterion,
    answers: QuestionnaireAnswers,
    presence: PolicyMetadataPresence,
    registry: TaxonomyRegistry,
) -> Finding:
    if not all(atom.holds(answers) for atom in criterion.answer_atoms):
        return Finding(criterion.id, criterion.severity, Status.NOT_APPLICABLE)
    for group in criterion.presence_groups:
        if not any(_present(presence, registry, t) for t in group):
            return Finding(criterion.id, criterion.severity, Status.NOT_REQUIRED)

    missing = tuple(
        group
        for group in criterion.postcondition
        if not any(_present(presence, registry, t) for t in group)
    )
    evidence = tuple(
        (t, _supporting(presence, registry, t))
        for group in criterion.postcondition
        for t in group
        if _present(presence, registry, t)
    )
    if missing:
        status = (
            Status.VIOLATION
            if criterion.severity is Severity.VIOLATION
            else Status.WARNING
        )
        return Finding(criterion.id, criterion.severity, status, missing, evidence)
    return Finding(criterion.id, criterion.severity, Status.SATISFIED, (), evidence)


def check_all(
    presence: PolicyMetadataPresence,
    answers: QuestionnaireAnswers,
    criteria: list[Criterion],
    registry: TaxonomyRegistry,
) -> list[Finding]:
    """One finding per criterion in id order. A policy is complete iff no
    finding is a VIOLATION; warnings are flagged separately."""
    ordered = sorted(criteria, key=lambda c: c.number)
    return [evaluate(c, answers, presence, registry) for c in ordered]


def is_complete(findings: list[Finding]) -> bool:
    return not any(f.status is Status.VIOLATION for f in findings)


# ---------------------------------------------------------------------------
# Criteria config grammar
# ---------------------------------------------------------------------------

_A6_ATOM_RE = re.compile(r"^A6\s+in\s+\{([^}]*)\}$")
_PRESENT_ATOM_RE = re.compile(r"^present\(([^)]*)\)$")


def _split_fields(line: str) -> list[str]:
    """Split on '|' at nesting depth 0 ('|' inside {...} or (...) separates
    types within a group)."""
    fields, depth, current = [], 0, []
    for ch in line:
        if ch in "{(":
            depth += 1
        elif ch in "})":
            depth -= 1
        if ch == "|" and depth == 0:
            fields.append("".join(current).strip())
            current = []
        else:
            current.append(ch)
    fields.append("".join(current).strip())
    return fields


def _parse_group(text: str, registry: TaxonomyRegistry) -> TypeGroup:
    body = text.strip()
    if body.startswith("{") and body.endswith("}"):
        body = body[1:-1]
    types = tuple(registry.get(part.strip()) for part in body.split("|") if part.strip())
    if not types:
        raise CriteriaError(f"empty type group: {text!r}")
    return types


def _parse_precondition(
    text: str, registry: TaxonomyRegistry
) -> tuple[tuple[AnswerAtom, ...], tuple[TypeGroup, ...]]:
    text = text.strip()
    if text.lower() == "none":
        return (), ()
    atoms: list[AnswerAtom] = []
    groups: list[TypeGroup] = []
    for part in re.split(r"\s+AND\s+", text):
        part = part.strip()
        if part == "A2=yes":
            atoms.append(AnswerAtom("A2"))
        elif part == "A3=yes":
            atoms.append(AnswerAtom("A3"))
        elif part == "A5=outside":
            atoms.append(AnswerAtom("A5_OUTSIDE"))
        elif part == "Q4.any":
            atoms.append(AnswerAtom("Q4_ANY"))
        elif m := _A6_ATOM_RE.match(part):
            values = tuple(v.strip() for v in m.group(1).split(",") if v.strip())
            bad = set(values) - set(COLLECTION_MODES)
            if bad:
                raise CriteriaError(f"invalid A6 modes: {sorted(bad)}")
            atoms.append(AnswerAtom("A6_IN", values))
        elif m := _PRESENT_ATOM_RE.match(part):
            groups.append(_parse_group(m.group(1), registry))
        else:
            raise CriteriaError(f"unknown precondition atom: {part!r}")
    return tuple(atoms), tuple(groups)


def parse_criteria(config_text: str, registry: TaxonomyRegistry) -> list[Criterion]:
    criteria: list[Criterion] = []
    seen_ids: set[str] = set()
    for lineno, raw in enumerate(config_text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        try:
            fields = _split_fields(line)
            if len(fields) != 4:
                raise CriteriaError(f"expected 4 '|' fields, got {len(fields)}")
            cid = fields[0].strip()
            if not re.fullmatch(r"C\d+", cid):
                raise CriteriaError(f"bad criterion id: {cid!r}")
            if cid in seen_ids:
                raise CriteriaError(f"duplicate criterion id: {cid}")
            seen_ids.add(cid)
            severity = Severity(fields[1].strip().lower())
            pre_text = fields[2].strip()
            if not pre_text.upper().startswith("PRE:"):
                raise CriteriaError("third field must start with 'PRE:'")
            post_text = fields[3].strip()
            if not post_text.upper().startswith("POST:"):
                raise CriteriaError("fourth field must start with 'POST:'")
            atoms, groups = _parse_precondition(pre_text[4:], registry)
            post = tuple(
                _parse_group(g, registry)
                for g in re.split(r"\s+&\s+", post_text[5:].strip())
            )
            criteria.append(Criterion(cid, severity, atoms, groups, post))
        except (CriteriaError, ValueError) as exc:
            raise CriteriaError(f"line {lineno}: {exc}") from exc
    return criteria


def default_criteria(registry: TaxonomyRegistry) -> list[Criterion]:
    """The shipped 23-criteria set, resolved against the given registry."""
    from .resources import default_text

    criteria = parse_criteria(default_text("criteria.txt"), registry)
    if len(criteria) != 23:
        raise CriteriaError(f"default criteria set has {len(criteria)} entries")
    return criteria
