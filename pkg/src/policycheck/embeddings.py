"""Word-vector store and sentence-embedding math.

Vectors come from a plain-text file ("token v1 ... vd" per line, the common
pre-trained format). Sentence embeddings are the arithmetic mean of the
in-vocabulary token vectors; similarity is cosine.
"""

from __future__ import annotations

import numpy as np

Vector = np.ndarray


class EmbeddingError(ValueError):
    """Raised for malformed vector files or dimension mismatches."""


class WordVectorStore:
    """Case-insensitive token -> fixed-dimension vector map."""

    def __init__(self, vectors: dict[str, Vector], dimension: int):
        self.dimension = dimension
        self._vectors = vectors

    def __len__(self) -> int:
        return len(self._vectors)

    def __contains__(self, token: str) -> bool:
        return token.lower() in self._vectors

    def get(self, token: str) -> Vector | None:
        return self._vectors.get(token.lower())

    @staticmethod
    def from_items(items: dict[str, list[float]]) -> "WordVectorStore":
        if not items:
            raise EmbeddingError("empty vector set")
        vectors = {k.lower(): np.asarray(v, dtype=np.float64) for k, v in items.items()}
        dims = {v.shape for v in vectors.values()}
        if len(dims) != 1 or len(next(iter(dims))) != 1:
            raise EmbeddingError(f"inconsistent vector dimensions: {sorted(dims)}")
        return WordVectorStore(vectors, next(iter(dims))[0])


def parse_vectors(text: str) -> WordVectorStore:
    vectors: dict[str, Vector] = {}
    dimension: int | None = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.rstrip()
        if not line:
            continue
        parts = line.split()
        token, comps = parts[0], parts[1:]
        if dimension is None:
            dimension = len(comps)
            if dimension == 0:
                raise EmbeddingError(f"line {lineno}: no vector components")
        elif len(comps) != dimension:
            raise EmbeddingError(
                f"line {lineno}: expected {dimension} components, got {len(comps)}"
            )
        try:
            vectors[token.lower()] = np.array([float(c) for c in comps], dtype=np.float64)
        except ValueError as exc:
            raise EmbeddingError(f"line {lineno}: non-numeric component") from exc
    if not vectors or dimension is None:
        raise EmbeddingError("empty vector file")
    return WordVectorStore(vectors, dimension)


def load_vectors(path) -> WordVectorStore:
    with open(path, encoding="utf-8") as handle:
        return parse_vectors(handle.read())


def embed_tokens(tokens, store: WordVectorStore) -> Vector:
    """Mean of the in-vocabulary token vectors; out-of-vocabulary tokens are
    skipped; all-OOV input yields the zero vector."""
    found = [store.get(t) for t in tokens]
    found = [v for v in found if v is not None]
    if not found:
        return np.zeros(store.dimension, dtype=np.float64)
    return np.mean(found, axis=0)


def embed_sentence(processed, store: WordVectorStore) -> Vector:
    return embed_tokens(processed.tokens, store)


def cosine_similarity(a: Vector, b: Vector) -> float:
    """Cosine in [-1, 1]; zero-norm inputs yield 0 so empty sentences never
    clear a positive similarity threshold."""
    if a.shape != b.shape:
        raise EmbeddingError(f"dimension mismatch: {a.shape} vs {b.shape}")
    norm = float(np.linalg.norm(a)) * float(np.linalg.norm(b))
    if norm == 0.0:
        return 0.0
    return float(np.dot(a, b) / norm)


def centroid(vectors) -> Vector:
    vectors = list(vectors)
    if not vectors:
        raise EmbeddingError("centroid of empty vector list")
    dims = {v.shape for v in vectors}
    if len(dims) != 1:
        raise EmbeddingError(f"dimension mismatch: {sorted(dims)}")
    return np.mean(vectors, axis=0)
