"""The three per-type sentence classifiers: a trained linear max-margin
model, centroid cosine-similarity matching, and keyword-phrase lookup.

The linear model is fitted from scratch with deterministic full-batch
hinge-loss subgradient descent (fixed epochs, L2 regularization equivalent
to C=1), after seeded undersampling of negatives down to the positive count.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

import numpy as np

from .embeddings import Vector, WordVectorStore, cosine_similarity, embed_tokens
from .taxonomy import MetadataType, TaxonomyRegistry

DEFAULT_THETA = 0.9
TRAIN_EPOCHS = 300
TRAIN_LEARNING_RATE = 0.1
TRAIN_REGULARIZATION = 1.0


class TrainingError(ValueError):
    """Raised when a classifier cannot be trained as requested."""


# ---------------------------------------------------------------------------
# Annotated corpus
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CorpusRecord:
    policy_id: str
    index: int
    raw_text: str
    tokens: tuple[str, ...]
    labels: frozenset[MetadataType]

    def labels_at_level(self, level: int) -> set[MetadataType]:
        """Labels truncated to the given level (a level-3 annotation also
        counts as its level-1 and level-2 prefixes)."""
        return {
            MetadataType(label.path[:level])
            for label in self.labels
            if label.level >= level
        }

    def has_label(self, t: MetadataType) -> bool:
        """True if annotated with t or any descendant of t."""
        return any(label.is_descendant_of(t) for label in self.labels)


@dataclass
class AnnotatedCorpus:
    records: list[CorpusRecord] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def policies(self) -> list[str]:
        seen: dict[str, None] = {}
        for record in self.records:
            seen.setdefault(record.policy_id, None)
        return list(seen)

    def by_policy(self) -> dict[str, list[CorpusRecord]]:
        grouped: dict[str, list[CorpusRecord]] = {}
        for record in self.records:
            grouped.setdefault(record.policy_id, []).append(record)
        for records in grouped.values():
            records.sort(key=lambda r: r.index)
        return grouped

    def positives(self, t: MetadataType) -> list[CorpusRecord]:
        return [r for r in self.records if r.has_label(t)]

    def negatives(self, t: MetadataType) -> list[CorpusRecord]:
        """Records annotated with some other type at t's level. Records with
        no labels at that level (incl. zero-label records) are excluded."""
        out = []
        for record in self.records:
            if record.has_label(t):
                continue
            if record.labels_at_level(t.level) - {t}:
                out.append(record)
        return out


# ---------------------------------------------------------------------------
# Linear (ML-based) classifier
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LinearModel:
    target: MetadataType
    weights: Vector
    bias: float
    seed: int

    @property
    def dimension(self) -> int:
        return int(self.weights.shape[0])

    def predict(self, v: Vector) -> bool:
        if v.shape != self.weights.shape:
            raise ValueError(f"dimension mismatch: {v.shape} vs {self.weights.shape}")
        return float(self.weights @ v) + self.bias > 0.0


def predict_ml(model: LinearModel, v: Vector) -> bool:
    return model.predict(v)


def undersample_negatives(
    positives: list, negatives: list, seed: int
) -> list:
    """Seeded random undersampling of negatives down to the positive count."""
    if len(negatives) <= len(positives):
        return list(negatives)
    rng = random.Random(seed)
    picked = sorted(rng.sample(range(len(negatives)), len(positives)))
    return [negatives[i] for i in picked]


def _fit_hinge(x: np.ndarray, y: np.ndarray, reg: float) -> tuple[Vector, float]:
    n, dim = x.shape
    lam = 1.0 / (reg * n)
    w = np.zeros(dim, dtype=np.float64)
    b = 0.0
    for _ in range(TRAIN_EPOCHS):
        margins = y * (x @ w + b)
        violating = margins < 1.0
        grad_w = lam * w
        grad_b = 0.0
        if violating.any():
            grad_w = grad_w - (y[violating, None] * x[violating]).mean(axis=0)
            grad_b = -float(y[violating].mean())
        w = w - TRAIN_LEARNING_RATE * grad_w
        b = b - TRAIN_LEARNING_RATE * grad_b
    return w, b


def train_binary(
    corpus: AnnotatedCorpus,
    t: MetadataType,
    store: WordVectorStore,
    seed: int,
    reg: float = TRAIN_REGULARIZATION,
) -> LinearModel:
    """Fit the binary max-margin classifier for one level-1/2 type.

    Positives: records labeled t or a descendant. Negatives: records labeled
    with any other type at the same level, undersampled to balance.
    Deterministic given (corpus, t, seed).
    """
    if t.level > 2:
        raise TrainingError(f"{t}: only level-1/2 types have trained classifiers")
    positives = corpus.positives(t)
    negatives = corpus.negatives(t)
    if not positives:
        raise TrainingError(f"{t}: no positive training sentences")
    if not negatives:
        raise TrainingError(f"{t}: no negative training sentences")
    negatives = undersample_negatives(positives, negatives, seed)

    x = np.stack(
        [embed_tokens(r.tokens, store) for r in positives]
        + [embed_tokens(r.tokens, store) for r in negatives]
    )
    y = np.concatenate(
        [np.ones(len(positives)), -np.ones(len(negatives))]
    )
    weights, bias = _fit_hinge(x, y, reg)
    return LinearModel(target=t, weights=weights, bias=bias, seed=seed)


# ---------------------------------------------------------------------------
# Similarity-based classifier
# ---------------------------------------------------------------------------


@dataclass
class SimilarityModel:
    centroids: dict[MetadataType, Vector]
    theta: float = DEFAULT_THETA

    def __contains__(self, t: MetadataType) -> bool:
        return t in self.centroids


def build_similarity_model(
    corpus: AnnotatedCorpus,
    types,
    store: WordVectorStore,
    theta: float = DEFAULT_THETA,
) -> SimilarityModel:
    """One centroid per level-1/2 type over its positive sentence embeddings.
    Types without positives are omitted (and thus never predicted)."""
    centroids: dict[MetadataType, Vector] = {}
    for t in types:
        if t.level > 2:
            raise TrainingError(f"{t}: similarity groups exist for levels 1-2 only")
        positives = corpus.positives(t)
        if not positives:
            continue
        centroids[t] = np.mean(
            [embed_tokens(r.tokens, store) for r in positives], axis=0
        )
    return SimilarityModel(centroids=centroids, theta=theta)


def predict_similarity(model: SimilarityModel, v: Vector, t: MetadataType) -> bool:
    center = model.centroids.get(t)
    if center is None:
        return False
    return cosine_similarity(v, center) >= model.theta


def tune_threshold(
    model: SimilarityModel,
    corpus_dev: AnnotatedCorpus,
    store: WordVectorStore,
    low: float = 0.5,
    high: float = 0.9,
    step: float = 0.01,
) -> float:
    """Sweep candidate thresholds and return the one maximizing F2 of
    similarity-only prediction on the dev corpus; ties go to the larger
    threshold."""
    if not corpus_dev.records:
        raise TrainingError("empty dev corpus")
    if not 0.5 <= low <= high <= 0.9:
        raise TrainingError(f"candidate range [{low}, {high}] outside [0.5, 0.9]")
    count = int(round((high - low) / step)) + 1
    candidates = [round(low + i * step, 10) for i in range(count)]

    similarities: list[tuple[float, bool]] = []
    for record in corpus_dev.records:
        v = embed_tokens(record.tokens, store)
        for t, center in model.centroids.items():
            similarities.append((cosine_similarity(v, center), record.has_label(t)))

    best_theta, best_f2 = candidates[-1], -1.0
    for theta in candidates:
        tp = sum(1 for sim, gold in similarities if sim >= theta and gold)
        fp = sum(1 for sim, gold in similarities if sim >= theta and not gold)
        fn = sum(1 for sim, gold in similarities if sim < theta and gold)
        denom = 5 * tp + 4 * fn + fp
        f2 = (5 * tp / denom) if denom else -1.0
        if f2 >= best_f2:
            best_f2, best_theta = f2, theta
    return best_theta


# ---------------------------------------------------------------------------
# Keyword-based classifier
# ---------------------------------------------------------------------------


@dataclass
class KeywordIndex:
    """Metadata type -> normalized keyword phrases (token tuples)."""

    phrases: dict[MetadataType, list[tuple[str, ...]]] = field(default_factory=dict)

    def types(self) -> list[MetadataType]:
        return list(self.phrases)


def load_keyword_index(
    config_text: str, registry: TaxonomyRegistry, pipeline_config
) -> KeywordIndex:
    """Parse "Type.Path TAB phrase" lines; phrases are normalized with the
    same lemmatizer/stopword config used on sentences."""
    from .nlp import normalize_phrase

    index = KeywordIndex()
    for lineno, raw in enumerate(config_text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise ValueError(f"line {lineno}: expected 'Type.Path<TAB>phrase'")
        t = registry.get(parts[0].strip())
        phrase = normalize_phrase(parts[1], pipeline_config)
        if not phrase:
            raise ValueError(f"line {lineno}: phrase normalizes to nothing")
        index.phrases.setdefault(t, []).append(phrase)
    return index


def _contains_subsequence(tokens: tuple[str, ...], phrase: tuple[str, ...]) -> bool:
    k = len(phrase)
    if k == 0 or k > len(tokens):
        return False
    return any(tokens[i : i + k] == phrase for i in range(len(tokens) - k + 1))


def predict_keywords(index: KeywordIndex, processed) -> set[MetadataType]:
    """Types whose phrases occur as contiguous subsequences of the normalized
    sentence tokens. A sentence may match any number of types."""
    tokens = tuple(processed.tokens)
    return {
        t
        for t, phrases in index.phrases.items()
        if any(_contains_subsequence(tokens, p) for p in phrases)
    }
