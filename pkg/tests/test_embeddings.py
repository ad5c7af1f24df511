import numpy as np
import pytest
from hypothesis import given, strategies as st

from policycheck.embeddings import (
    EmbeddingError,
    WordVectorStore,
    centroid,
    cosine_similarity,
    embed_tokens,
    parse_vectors,
)

finite_floats = st.floats(min_value=-10, max_value=10, allow_nan=False)
vectors_5d = st.lists(finite_floats, min_size=5, max_size=5).map(
    lambda xs: np.array(xs, dtype=np.float64)
)


def test_parse_vectors_basic():
    store = parse_vectors("hikari 0.42192 0.41032 0.23888\nbank 0.1 0.2 0.3\n")
    assert store.dimension == 3
    assert np.allclose(store.get("hikari"), [0.42192, 0.41032, 0.23888])
    assert np.allclose(store.get("HIKARI"), [0.42192, 0.41032, 0.23888])


def test_parse_vectors_dimension_mismatch():
    with pytest.raises(EmbeddingError, match="expected 3"):
        parse_vectors("a 1 2 3\nb 1 2\n")


def test_parse_vectors_non_numeric():
    with pytest.raises(EmbeddingError, match="non-numeric"):
        parse_vectors("a 1 x 3\n")


def test_parse_vectors_empty_file():
    with pytest.raises(EmbeddingError, match="empty"):
        parse_vectors("")


def test_embed_mean_matches_quoted_components():
    store = WordVectorStore.from_items(
        {
            "data": [-0.47099, 0.1],
            "privacy": [0.099115, 0.2],
            "policy": [-0.060532, 0.3],
        }
    )
    v = embed_tokens(["data", "privacy", "policy"], store)
    assert abs(v[0] - (-0.14414)) < 1e-5


def test_embed_single_token_is_its_vector():
    store = WordVectorStore.from_items({"data": [1.0, 2.0, 3.0]})
    assert np.array_equal(embed_tokens(["data"], store), [1.0, 2.0, 3.0])


def test_embed_all_oov_is_zero():
    store = WordVectorStore.from_items({"data": [1.0, 2.0]})
    assert np.array_equal(embed_tokens(["nope", "nada"], store), [0.0, 0.0])


def test_embed_skips_oov():
    store = WordVectorStore.from_items({"a": [2.0], "b": [4.0]})
    assert embed_tokens(["a", "oov", "b"], store)[0] == 3.0


def test_cosine_basics():
    a = np.array([1.0, 0.0])
    b = np.array([0.0, 1.0])
    assert cosine_similarity(a, a) == pytest.approx(1.0)
    assert cosine_similarity(a, b) == pytest.approx(0.0)
    assert cosine_similarity(a, -a) == pytest.approx(-1.0)


def test_cosine_zero_norm_is_zero():
    z = np.zeros(3)
    assert cosine_similarity(z, np.array([1.0, 2.0, 3.0])) == 0.0


def test_cosine_dimension_mismatch():
    with pytest.raises(EmbeddingError, match="mismatch"):
        cosine_similarity(np.zeros(2), np.zeros(3))


@given(vectors_5d, vectors_5d, st.floats(min_value=0.01, max_value=100))
def test_cosine_symmetric_and_scale_invariant(a, b, alpha):
    assert cosine_similarity(a, b) == pytest.approx(cosine_similarity(b, a), abs=1e-9)
    assert cosine_similarity(alpha * a, b) == pytest.approx(
        cosine_similarity(a, b), abs=1e-9
    )


@given(st.permutations(["data", "privacy", "policy", "bank"]))
def test_embedding_is_order_independent(tokens):
    store = WordVectorStore.from_items(
        {
            "data": [1.0, 0.0],
            "privacy": [0.0, 1.0],
            "policy": [2.0, 2.0],
            "bank": [-1.0, 3.0],
        }
    )
    baseline = embed_tokens(["data", "privacy", "policy", "bank"], store)
    assert np.allclose(embed_tokens(list(tokens), store), baseline)


def test_centroid_singleton():
    v = np.array([1.0, 2.0])
    assert np.array_equal(centroid([v]), v)


def test_centroid_of_opposites_is_zero():
    v = np.array([1.0, -2.0])
    assert np.array_equal(centroid([v, -v]), [0.0, 0.0])


def test_centroid_matches_brute_force_mean():
    rng = np.random.default_rng(3)
    vs = [rng.normal(size=4) for _ in range(3)]
    expected = (vs[0] + vs[1] + vs[2]) / 3.0
    assert np.allclose(centroid(vs), expected)


def test_centroid_empty_errors():
    with pytest.raises(EmbeddingError, match="empty"):
        centroid([])


@given(st.lists(vectors_5d, min_size=1, max_size=6))
def test_centroid_norm_convexity(vs):
    c = centroid(vs)
    assert np.linalg.norm(c) <= max(np.linalg.norm(v) for v in vs) + 1e-9
