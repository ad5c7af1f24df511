"""Per-sentence label fusion and document-level metadata presence.

The three classifier verdicts are combined per sentence in two regimes:
when a level-1 type is predicted directly (ML or similarity), one classifier
suffices for each of its level-2 children; otherwise a level-2 child needs
agreement of two of {ML, similarity, keyword}. Level-3 types ride on an
already-predicted level-2 parent and come from keyword search only.
A context-window pass then drops level-2+ labels that have no same-family
neighbor nearby.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .classifiers import (
    KeywordIndex,
    LinearModel,
    SimilarityModel,
    predict_keywords,
    predict_ml,
    predict_similarity,
)
from .embeddings import WordVectorStore, embed_sentence
from .nlp import PipelineConfig, ProcessedSentence, RawDocument, preprocess
from .taxonomy import MetadataType, TaxonomyRegistry

CONTROLLER_IDENTITY = MetadataType(("Controller", "Identity"))
REPRESENTATIVE_IDENTITY = MetadataType(("Controller Representative", "Identity"))

# Families whose level-2+ labels are subject to context-window filtering.
DEFAULT_CONTEXT_FAMILIES = frozenset(
    {"Data Subject Right", "Transfer Outside Europe", "Legal Basis"}
)


@dataclass
class PredictionContext:
    """Classifier verdicts per sentence plus the questionnaire identities.

    ``ml``/``sim`` hold level-1/2 types, ``kw`` holds types of any level.
    ``c_id`` is required; ``cr_id`` may be empty (controller inside Europe).
    """

    registry: TaxonomyRegistry
    raw_texts: dict[int, str]
    ml: dict[int, frozenset[MetadataType]] = field(default_factory=dict)
    sim: dict[int, frozenset[MetadataType]] = field(default_factory=dict)
    kw: dict[int, frozenset[MetadataType]] = field(default_factory=dict)
    c_id: str = ""
    cr_id: str = ""


@dataclass(frozen=True)
class SentencePrediction:
    index: int
    labels: frozenset[MetadataType]


@dataclass
class PolicyMetadataPresence:
    """Binary presence per registry type, with supporting sentence indices."""

    present: dict[MetadataType, bool]
    indices: dict[MetadataType, tuple[int, ...]]

    def is_present(self, t: MetadataType) -> bool:
        return self.present.get(t, False)

    def supporting(self, t: MetadataType) -> tuple[int, ...]:
        return self.indices.get(t, ())

    @staticmethod
    def from_predictions(
        predictions: list[SentencePrediction], registry: TaxonomyRegistry
    ) -> "PolicyMetadataPresence":
        present: dict[MetadataType, bool] = {}
        indices: dict[MetadataType, tuple[int, ...]] = {}
        for t in registry:
            hits = sorted(
                p.index
                for p in predictions
                if any(label.is_descendant_of(t) for label in p.labels)
            )
            present[t] = bool(hits)
            indices[t] = tuple(hits)
        return PolicyMetadataPresence(present=present, indices=indices)

    @staticmethod
    def from_present_set(
        types, registry: TaxonomyRegistry
    ) -> "PolicyMetadataPresence":
        """Presence map from a plain set of present paths (no sentence
        evidence); mainly for tests and replayed decisions."""
        marked = {registry.resolve(t) for t in types}
        present = {
            t: any(m.is_descendant_of(t) for m in marked) for t in registry
        }
        return PolicyMetadataPresence(present=present, indices={})


def predict_sentence(ctx: PredictionContext, s_index: int) -> SentencePrediction:
    """Fuse the verdicts for one sentence into a hierarchically closed label
    set (see module docstring for the two fusion regimes)."""
    if s_index not in ctx.raw_texts:
        raise KeyError(f"unknown sentence index: {s_index}")
    ml = ctx.ml.get(s_index, frozenset())
    sim = ctx.sim.get(s_index, frozenset())
    kw = ctx.kw.get(s_index, frozenset())

    labels: set[MetadataType] = set()
    for l1 in ctx.registry.level1():
        children = ctx.registry.children(l1)
        if l1 in ml or l1 in sim:
            labels.add(l1)
            for l2 in children:
                if l2 in ml or l2 in sim:
                    labels.add(l2)
        else:
            for l2 in children:
                votes = (l2 in ml) + (l2 in sim) + (l2 in kw)
                if votes >= 2:
                    labels.add(l2)
                    labels.add(l1)

    raw = ctx.raw_texts[s_index].lower()
    if ctx.c_id and ctx.c_id.lower() in raw and CONTROLLER_IDENTITY in ctx.registry:
        labels.add(CONTROLLER_IDENTITY)
    elif ctx.cr_id and ctx.cr_id.lower() in raw and REPRESENTATIVE_IDENTITY in ctx.registry:
        labels.add(REPRESENTATIVE_IDENTITY)

    for l2 in [label for label in labels if label.level == 2]:
        for l3 in ctx.registry.children(l2):
            if l3 in kw:
                labels.add(l3)

    for label in list(labels):
        labels.update(label.ancestors())
    return SentencePrediction(index=s_index, labels=frozenset(labels))


def post_process(
    predictions: list[SentencePrediction],
    registry: TaxonomyRegistry,
    families: frozenset[str] = DEFAULT_CONTEXT_FAMILIES,
) -> list[SentencePrediction]:
    """Drop level-2+ labels (in the configured families) with no same-family
    prediction within n sentences either side, n being the number of level-2
    children of the family root. Decisions are taken against the pre-filter
    state in a single pass, so the filter never cascades and is idempotent.
    """
    family_at: dict[int, set[str]] = {
        p.index: {label.family for label in p.labels} for p in predictions
    }
    window: dict[str, int] = {}
    for fam in families:
        root = MetadataType((fam,))
        if root in registry:
            window[fam] = len(registry.children(root))

    out = []
    for p in predictions:
        keep = set(p.labels)
        for label in p.labels:
            if label.level < 2 or label.family not in window:
                continue
            n = window[label.family]
            supported = any(
                label.family in family_at.get(j, ())
                for j in range(p.index - n, p.index + n + 1)
                if j != p.index
            )
            if not supported:
                keep.discard(label)
        out.append(SentencePrediction(index=p.index, labels=frozenset(keep)))
    return out


@dataclass
class ModelBundle:
    """Everything needed to classify sentences: trained linear models,
    similarity centroids and the keyword index."""

    linear: dict[MetadataType, LinearModel]
    similarity: SimilarityModel
    keywords: KeywordIndex


def build_context(
    processed: list[ProcessedSentence],
    bundle: ModelBundle,
    store: WordVectorStore,
    registry: TaxonomyRegistry,
    c_id: str,
    cr_id: str = "",
) -> PredictionContext:
    """Run the three classifiers over preprocessed sentences."""
    ctx = PredictionContext(
        registry=registry,
        raw_texts={ps.sentence.index: ps.sentence.raw_text for ps in processed},
        c_id=c_id,
        cr_id=cr_id,
    )
    for ps in processed:
        idx = ps.sentence.index
        v = embed_sentence(ps, store)
        ctx.ml[idx] = frozenset(
            t for t, model in bundle.linear.items() if predict_ml(model, v)
        )
        ctx.sim[idx] = frozenset(
            t
            for t in bundle.similarity.centroids
            if predict_similarity(bundle.similarity, v, t)
        )
        ctx.kw[idx] = frozenset(predict_keywords(bundle.keywords, ps))
    return ctx


def build_oracle_context(
    records,
    registry: TaxonomyRegistry,
    c_id: str,
    cr_id: str = "",
) -> PredictionContext:
    """Verdicts injected from gold labels: ML and similarity see the level-1/2
    prefixes, keyword search sees every gold path. Exercises the fusion and
    post-processing logic independently of trained-model quality."""
    ctx = PredictionContext(
        registry=registry,
        raw_texts={r.index: r.raw_text for r in records},
        c_id=c_id,
        cr_id=cr_id,
    )
    for record in records:
        levels12 = record.labels_at_level(1) | record.labels_at_level(2)
        ctx.ml[record.index] = frozenset(levels12)
        ctx.sim[record.index] = frozenset(levels12)
        ctx.kw[record.index] = frozenset(record.labels) | frozenset(levels12)
    return ctx


def predict_document(
    ctx: PredictionContext,
    registry: TaxonomyRegistry,
    families: frozenset[str] = DEFAULT_CONTEXT_FAMILIES,
) -> list[SentencePrediction]:
    predictions = [predict_sentence(ctx, idx) for idx in sorted(ctx.raw_texts)]
    return post_process(predictions, registry, families)


def dump_predictions(policy_id: str, predictions: list[SentencePrediction]) -> str:
    """Debug/evaluation dump: one "(doc id, sentence index, label path)" line
    per predicted label, in sentence order."""
    lines = []
    for p in sorted(predictions, key=lambda x: x.index):
        for label in sorted(p.labels, key=str):
            lines.append(f"{policy_id}\t{p.index}\t{label}")
    return "\n".join(lines) + ("\n" if lines else "")


def identify_metadata(
    doc: RawDocument,
    bundle: ModelBundle,
    store: WordVectorStore,
    pipeline_config: PipelineConfig,
    registry: TaxonomyRegistry,
    c_id: str,
    cr_id: str = "",
) -> PolicyMetadataPresence:
    """Steps 1-7 end to end: preprocess, classify, fuse, window-filter, and
    collapse to per-policy presence with supporting sentence indices."""
    processed = preprocess(doc, pipeline_config)
    ctx = build_context(processed, bundle, store, registry, c_id, cr_id)
    predictions = predict_document(ctx, registry)
    return PolicyMetadataPresence.from_predictions(predictions, registry)
