from __future__ import annotations

from pathlib import Path

import pytest

from policycheck.classifiers import load_keyword_index
from policycheck.corpus import load_answers, load_corpus
from policycheck.criteria import default_criteria
from policycheck.embeddings import load_vectors
from policycheck.nlp import (
    PipelineConfig,
    load_gazetteers,
    load_lemma_exceptions,
    load_stopwords,
)
from policycheck.resources import default_text
from policycheck.taxonomy import load_taxonomy

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


@pytest.fixture(scope="session")
def registry():
    return load_taxonomy(default_text("taxonomy.txt"))


@pytest.fixture(scope="session")
def pipeline_config():
    return PipelineConfig(
        stopwords=load_stopwords(default_text("stopwords.txt")),
        gazetteers=load_gazetteers(default_text("gazetteers.txt")),
        lemma_exceptions=load_lemma_exceptions(default_text("lemma_exceptions.tsv")),
    )


@pytest.fixture(scope="session")
def criteria(registry):
    return default_criteria(registry)


@pytest.fixture(scope="session")
def keyword_index(registry, pipeline_config):
    return load_keyword_index(default_text("keywords.tsv"), registry, pipeline_config)


@pytest.fixture(scope="session")
def fixture_corpus(registry, pipeline_config):
    return load_corpus(FIXTURES / "hikari_corpus.tsv", registry, pipeline_config)


@pytest.fixture(scope="session")
def fixture_answers():
    return load_answers(FIXTURES / "hikari_answers.txt")["hikari"]


@pytest.fixture(scope="session")
def mini_store():
    return load_vectors(FIXTURES / "mini_vectors.txt")
