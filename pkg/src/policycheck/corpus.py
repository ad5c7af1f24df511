"""File formats: annotated corpus (TSV), questionnaire answers (sectioned
key=value), and trained-model persistence. Every parse error names the
offending line or key; every format round-trips exactly.
"""

from __future__ import annotations

import numpy as np

from .classifiers import AnnotatedCorpus, CorpusRecord, LinearModel, SimilarityModel
from .criteria import CriteriaError, QuestionnaireAnswers
from .nlp import PipelineConfig, RawDocument, preprocess
from .taxonomy import MetadataType, TaxonomyRegistry


class CorpusError(ValueError):
    """Raised for malformed corpus, answers, or model files."""


# ---------------------------------------------------------------------------
# Annotated corpus: <policy>\t<index>\t<raw text>\t<label;label;...>
# ---------------------------------------------------------------------------


def parse_corpus(
    text: str,
    registry: TaxonomyRegistry,
    pipeline_config: PipelineConfig | None = None,
) -> AnnotatedCorpus:
    records: list[CorpusRecord] = []
    seen: set[tuple[str, int]] = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        if not raw.strip() or raw.startswith("#"):
            continue
        parts = raw.split("\t")
        if len(parts) != 4:
            raise CorpusError(f"line {lineno}: expected 4 tab-separated fields")
        policy_id, index_text, raw_text, label_text = parts
        try:
            index = int(index_text)
        except ValueError:
            raise CorpusError(f"line {lineno}: bad sentence index {index_text!r}")
        key = (policy_id, index)
        if key in seen:
            raise CorpusError(f"line {lineno}: duplicate sentence {key}")
        seen.add(key)
        labels = []
        for item in label_text.split(";"):
            item = item.strip()
            if not item:
                continue
            try:
                labels.append(registry.get(item))
            except Exception as exc:
                raise CorpusError(f"line {lineno}: {exc}") from exc
        tokens: tuple[str, ...] = ()
        if pipeline_config is not None:
            doc = RawDocument(id=policy_id, text=raw_text)
            processed = preprocess(doc, pipeline_config)
            tokens = tuple(t for ps in processed for t in ps.tokens)
        records.append(
            CorpusRecord(
                policy_id=policy_id,
                index=index,
                raw_text=raw_text,
                tokens=tokens,
                labels=frozenset(labels),
            )
        )

    by_policy: dict[str, list[int]] = {}
    for record in records:
        by_policy.setdefault(record.policy_id, []).append(record.index)
    for policy_id, indices in by_policy.items():
        ordered = sorted(indices)
        if ordered != list(range(ordered[0], ordered[0] + len(ordered))):
            raise CorpusError(f"policy {policy_id!r}: gap in sentence indices")
    return AnnotatedCorpus(records=records)


def load_corpus(
    path,
    registry: TaxonomyRegistry,
    pipeline_config: PipelineConfig | None = None,
) -> AnnotatedCorpus:
    with open(path, encoding="utf-8") as handle:
        return parse_corpus(handle.read(), registry, pipeline_config)


def dump_corpus(corpus: AnnotatedCorpus) -> str:
    lines = []
    for r in corpus.records:
        labels = ";".join(sorted(str(label) for label in r.labels))
        lines.append(f"{r.policy_id}\t{r.index}\t{r.raw_text}\t{labels}")
    return "\n".join(lines) + "\n"


def save_corpus(path, corpus: AnnotatedCorpus) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(dump_corpus(corpus))


# ---------------------------------------------------------------------------
# Questionnaire answers: [policy-id] sections of key=value lines
# ---------------------------------------------------------------------------

_ANSWER_KEYS = {
    "q1_controller_identity",
    "q2_transfer_outside",
    "q3_other_recipients",
    "q4_core_activities",
    "q5_location",
    "q5_representative_identity",
    "q6_collection",
}


def _parse_bool(value: str, key: str) -> bool:
    normalized = value.strip().lower()
    if normalized in ("yes", "true", "1"):
        return True
    if normalized in ("no", "false", "0"):
        return False
    raise CorpusError(f"{key}: expected yes/no, got {value!r}")


def _answers_from_fields(policy_id: str, fields: dict[str, str]) -> QuestionnaireAnswers:
    if "q1_controller_identity" not in fields:
        raise CorpusError(f"policy {policy_id!r}: missing q1_controller_identity")
    required = {"q2_transfer_outside", "q3_other_recipients", "q5_location", "q6_collection"}
    missing = required - set(fields)
    if missing:
        raise CorpusError(f"policy {policy_id!r}: missing {sorted(missing)}")
    activities = frozenset(
        part.strip()
        for part in fields.get("q4_core_activities", "").split(",")
        if part.strip()
    )
    try:
        return QuestionnaireAnswers(
            q1_controller_identity=fields["q1_controller_identity"],
            q2_transfer_outside=_parse_bool(fields["q2_transfer_outside"], "q2"),
            q3_other_recipients=_parse_bool(fields["q3_other_recipients"], "q3"),
            q4_core_activities=activities,
            q5_location=fields["q5_location"].strip(),
            q6_collection=fields["q6_collection"].strip(),
            q5_representative_identity=fields.get("q5_representative_identity", ""),
        )
    except CriteriaError as exc:
        raise CorpusError(f"policy {policy_id!r}: {exc}") from exc


def parse_answers(text: str) -> dict[str, QuestionnaireAnswers]:
    answers: dict[str, QuestionnaireAnswers] = {}
    current_id: str | None = None
    fields: dict[str, str] = {}

    def flush() -> None:
        if current_id is not None:
            answers[current_id] = _answers_from_fields(current_id, fields)

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("[") and line.endswith("]"):
            flush()
            current_id = line[1:-1].strip()
            fields = {}
            continue
        if current_id is None:
            raise CorpusError(f"line {lineno}: answers before any [policy] section")
        key, sep, value = line.partition("=")
        key = key.strip()
        if not sep:
            raise CorpusError(f"line {lineno}: expected key=value")
        if key not in _ANSWER_KEYS:
            raise CorpusError(f"line {lineno}: unknown key {key!r}")
        fields[key] = value.strip()
    flush()
    return answers


def load_answers(path) -> dict[str, QuestionnaireAnswers]:
    with open(path, encoding="utf-8") as handle:
        return parse_answers(handle.read())


def dump_answers(answers: dict[str, QuestionnaireAnswers]) -> str:
    lines = []
    for policy_id, a in answers.items():
        lines.append(f"[{policy_id}]")
        lines.append(f"q1_controller_identity={a.q1_controller_identity}")
        lines.append(f"q2_transfer_outside={'yes' if a.q2_transfer_outside else 'no'}")
        lines.append(f"q3_other_recipients={'yes' if a.q3_other_recipients else 'no'}")
        lines.append(f"q4_core_activities={','.join(sorted(a.q4_core_activities))}")
        lines.append(f"q5_location={a.q5_location}")
        lines.append(f"q5_representative_identity={a.q5_representative_identity}")
        lines.append(f"q6_collection={a.q6_collection}")
        lines.append("")
    return "\n".join(lines)


def save_answers(path, answers: dict[str, QuestionnaireAnswers]) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(dump_answers(answers))


# ---------------------------------------------------------------------------
# Model persistence
# ---------------------------------------------------------------------------


def dump_models(
    linear: dict[MetadataType, LinearModel],
    similarity: SimilarityModel,
    seed: int,
    dimension: int,
) -> str:
    lines = [
        f"dimension\t{dimension}",
        f"theta\t{similarity.theta!r}",
        f"seed\t{seed}",
        "[linear]",
    ]
    for t in sorted(linear, key=str):
        model = linear[t]
        weights = " ".join(repr(float(w)) for w in model.weights)
        lines.append(f"{t}\t{model.bias!r}\t{weights}")
    lines.append("[centroids]")
    for t in sorted(similarity.centroids, key=str):
        comps = " ".join(repr(float(c)) for c in similarity.centroids[t])
        lines.append(f"{t}\t{comps}")
    return "\n".join(lines) + "\n"


def save_models(
    path,
    linear: dict[MetadataType, LinearModel],
    similarity: SimilarityModel,
    seed: int,
    dimension: int,
) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(dump_models(linear, similarity, seed, dimension))


def parse_models(
    text: str, registry: TaxonomyRegistry
) -> tuple[dict[MetadataType, LinearModel], SimilarityModel, int, int]:
    lines = text.splitlines()
    header: dict[str, str] = {}
    section = ""
    linear: dict[MetadataType, LinearModel] = {}
    centroids: dict[MetadataType, np.ndarray] = {}

    def parse_floats(chunk: str, lineno: int, dimension: int) -> np.ndarray:
        parts = chunk.split()
        if len(parts) != dimension:
            raise CorpusError(
                f"line {lineno}: expected {dimension} components, got {len(parts)}"
            )
        try:
            return np.array([float(p) for p in parts], dtype=np.float64)
        except ValueError as exc:
            raise CorpusError(f"line {lineno}: non-numeric component") from exc

    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line in ("[linear]", "[centroids]"):
            section = line
            continue
        if not section:
            key, _, value = line.partition("\t")
            header[key.strip()] = value.strip()
            continue
        try:
            dimension = int(header["dimension"])
            seed = int(header["seed"])
        except (KeyError, ValueError) as exc:
            raise CorpusError(f"bad model file header: {exc}") from exc
        if section == "[linear]":
            parts = line.split("\t")
            if len(parts) != 3:
                raise CorpusError(f"line {lineno}: expected type<TAB>bias<TAB>weights")
            try:
                t = registry.get(parts[0])
            except Exception as exc:
                raise CorpusError(f"line {lineno}: {exc}") from exc
            weights = parse_floats(parts[2], lineno, dimension)
            linear[t] = LinearModel(
                target=t, weights=weights, bias=float(parts[1]), seed=seed
            )
        else:
            parts = line.split("\t")
            if len(parts) != 2:
                raise CorpusError(f"line {lineno}: expected type<TAB>components")
            try:
                t = registry.get(parts[0])
            except Exception as exc:
                raise CorpusError(f"line {lineno}: {exc}") from exc
            centroids[t] = parse_floats(parts[1], lineno, dimension)

    try:
        dimension = int(header["dimension"])
        theta = float(header["theta"])
        seed = int(header["seed"])
    except (KeyError, ValueError) as exc:
        raise CorpusError(f"bad model file header: {exc}") from exc
    return linear, SimilarityModel(centroids=centroids, theta=theta), seed, dimension


def load_models(
    path, registry: TaxonomyRegistry
) -> tuple[dict[MetadataType, LinearModel], SimilarityModel, int, int]:
    with open(path, encoding="utf-8") as handle:
        return parse_models(handle.read(), registry)
