"""Text pipeline: sentence splitting, tokenization, entity/contact
recognition, generalization, lemmatization and stopword removal.

Everything here is deterministic and dictionary-free: entity recognition is
gazetteer + suffix heuristics, the lemmatizer is an exception lexicon plus
suffix-stripping rules. Both are loaded from config files so the pipeline
carries no hard-coded language resources.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

# Kind tokens substituted for recognized spans during generalization.
LOCATION = "location"
ORGANIZATION = "organization"
EMAIL = "email"
PHONE = "phone"
POSTAL_ADDRESS = "postal_address"
WEBSITE = "website"
GENERALIZED_KINDS = frozenset(
    {LOCATION, ORGANIZATION, EMAIL, PHONE, POSTAL_ADDRESS, WEBSITE}
)


@dataclass(frozen=True)
class RawDocument:
    id: str
    text: str
    source: str = ""


@dataclass(frozen=True)
class Sentence:
    """A split unit: raw span [start, end) into the owning document."""

    index: int
    raw_text: str
    start: int
    end: int


@dataclass(frozen=True)
class Annotation:
    """Token-range annotation [start, end) with one of the six kinds."""

    start: int
    end: int
    kind: str


@dataclass(frozen=True)
class ProcessedSentence:
    sentence: Sentence
    tokens: tuple[str, ...]
    entity_annotations: tuple[Annotation, ...] = ()


# ---------------------------------------------------------------------------
# Sentence splitting
# ---------------------------------------------------------------------------

# Period-terminated words that do not end a sentence. Dots inside the
# abbreviation (e.g. "e.g") are never boundary candidates because they are
# not followed by whitespace.
ABBREVIATIONS = frozenset(
    {
        "art", "arts", "fig", "figs", "sec", "no", "nos", "p", "pp",
        "e.g", "i.e", "etc", "cf", "vs", "ca", "approx",
        "mr", "mrs", "ms", "dr", "prof", "jr", "sr", "st",
        "inc", "ltd", "co", "corp", "s.a", "p.o",
    }
)

_ABBREV_WORD_RE = re.compile(r"[A-Za-z.]+$")


def _is_abbreviation(text: str, dot_index: int) -> bool:
    # Bounded lookback: abbreviations are short, and scanning the whole
    # prefix per candidate dot would be quadratic on long documents.
    window_start = max(0, dot_index - 16)
    match = _ABBREV_WORD_RE.search(text, window_start, dot_index)
    if not match:
        return False
    word = match.group().lower().rstrip(".")
    if not word:
        return False
    # Single initials ("J. Smith") never close a sentence.
    return word in ABBREVIATIONS or (len(word) == 1 and word.isalpha())


def split_sentences(doc: RawDocument) -> list[Sentence]:
    """Split into sentences at '.', '?', '!' and line breaks.

    Line breaks are hard boundaries (list-style policies put one item per
    line); '.' defers to the abbreviation list and must be followed by
    whitespace or end of text. Spans never overlap and cover every
    non-whitespace character, so joining raw texts with the inter-sentence
    gaps reconstructs the document exactly.
    """
    text = doc.text
    spans: list[tuple[int, int]] = []
    start: int | None = None

    def close(end: int) -> None:
        nonlocal start
        if start is None:
            return
        trimmed = start + len(text[start:end].rstrip())
        if trimmed > start:
            spans.append((start, trimmed))
        start = None

    n = len(text)
    for i, ch in enumerate(text):
        if start is None:
            if not ch.isspace():
                start = i
            continue
        if ch == "\n":
            close(i)
        elif ch in ".?!":
            at_end = i + 1 == n
            if at_end or text[i + 1].isspace():
                if ch == "." and _is_abbreviation(text, i):
                    continue
                close(i + 1)
    close(n)
    return [
        Sentence(index=k, raw_text=text[a:b], start=a, end=b)
        for k, (a, b) in enumerate(spans)
    ]


# ---------------------------------------------------------------------------
# Tokenization
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Token:
    text: str
    start: int
    end: int


_WORD_RE = re.compile(r"[A-Za-z0-9_]+(?:[-'][A-Za-z0-9_]+)*")
_DOTTED_ABBREV_RE = re.compile(r"(?:[A-Za-z]\.)+[A-Za-z]?\.?")
_CONTACT_CHUNK_RE = re.compile(r"\S*@\S*|https?://\S+|www\.\S+")
_EDGE_PUNCT = "\"'()[]{}<>,.;:!?*•“”‘’"


def tokenize(text: str) -> list[Token]:
    """Whitespace/punctuation tokenizer keeping internal hyphens and
    apostrophes; emails/URLs stay whole; dotted abbreviations lose their dots
    ("S.A." becomes "SA"). Case is preserved for the entity recognizer."""
    tokens: list[Token] = []
    for m in re.finditer(r"\S+", text):
        chunk, cstart = m.group(), m.start()
        core = chunk.strip(_EDGE_PUNCT)
        if not core:
            continue
        offset = cstart + chunk.index(core)
        if _CONTACT_CHUNK_RE.fullmatch(core):
            tokens.append(Token(core, offset, offset + len(core)))
        elif _DOTTED_ABBREV_RE.fullmatch(core):
            tokens.append(Token(core.replace(".", ""), offset, offset + len(core)))
        else:
            for w in _WORD_RE.finditer(core):
                tokens.append(
                    Token(w.group(), offset + w.start(), offset + w.end())
                )
    return tokens


# ---------------------------------------------------------------------------
# Contact-detail recognition (regex + heuristics over raw text)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CharSpan:
    start: int
    end: int
    kind: str


_EMAIL_RE = re.compile(r"[A-Za-z0-9._%+-]+@[A-Za-z0-9.-]+\.[A-Za-z]{2,}")
_WEBSITE_RE = re.compile(
    r"https?://[^\s)\]>,;]+|www\.[A-Za-z0-9.-]+\.[A-Za-z]{2,}[^\s)\]>,;]*"
)
_PHONE_RE = re.compile(r"(?<![\w.])\+?\d[\d ()./-]{5,}\d(?![\w])")

_STREET_WORDS = (
    "street|avenue|road|boulevard|lane|drive|square|place|rue|strasse|allee"
)
_ADDRESS_RE = re.compile(
    rf"\b\d+[A-Za-z]?,?\s+(?:[A-Z][\w'.-]*\s+){{0,4}}(?:{_STREET_WORDS})\b"
    rf"|\b(?:{_STREET_WORDS})\s+(?:[A-Za-z'.-]+\s+){{0,4}}\d+\b",
    re.IGNORECASE,
)


def _digits(text: str) -> int:
    return sum(ch.isdigit() for ch in text)


def recognize_contacts(text: str) -> list[CharSpan]:
    """Find emails, websites, phone numbers and postal addresses as character
    spans. Matching order doubles as priority; spans never overlap."""
    spans: list[CharSpan] = []

    def free(a: int, b: int) -> bool:
        return all(s.end <= a or b <= s.start for s in spans)

    for m in _EMAIL_RE.finditer(text):
        spans.append(CharSpan(m.start(), m.end(), EMAIL))
    for m in _WEBSITE_RE.finditer(text):
        if free(m.start(), m.end()):
            spans.append(CharSpan(m.start(), m.end(), WEBSITE))
    for m in _PHONE_RE.finditer(text):
        # Phones need enough digits to rule out dates and plain numbers.
        if _digits(m.group()) >= 9 or (m.group().startswith("+") and _digits(m.group()) >= 7):
            if free(m.start(), m.end()):
                spans.append(CharSpan(m.start(), m.end(), PHONE))
    for m in _ADDRESS_RE.finditer(text):
        if free(m.start(), m.end()):
            spans.append(CharSpan(m.start(), m.end(), POSTAL_ADDRESS))
    return sorted(spans, key=lambda s: s.start)


# ---------------------------------------------------------------------------
# Entity recognition (gazetteer + legal-suffix heuristic over tokens)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Gazetteers:
    locations: frozenset[str]
    organizations: frozenset[str]
    org_suffixes: frozenset[str]


def load_gazetteers(config_text: str) -> Gazetteers:
    """Parse a section-tagged gazetteer file ([locations], [organizations],
    [org_suffixes]; one entry per line, '#' comments)."""
    sections: dict[str, set[str]] = {
        "locations": set(),
        "organizations": set(),
        "org_suffixes": set(),
    }
    current: set[str] | None = None
    for lineno, raw in enumerate(config_text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("[") and line.endswith("]"):
            name = line[1:-1].strip().lower()
            if name not in sections:
                raise ValueError(f"line {lineno}: unknown gazetteer section {name!r}")
            current = sections[name]
            continue
        if current is None:
            raise ValueError(f"line {lineno}: entry before any section header")
        current.add(line.lower().replace(".", ""))
    return Gazetteers(
        locations=frozenset(sections["locations"]),
        organizations=frozenset(sections["organizations"]),
        org_suffixes=frozenset(sections["org_suffixes"]),
    )


def _norm(token_text: str) -> str:
    return token_text.lower().replace(".", "")


def _is_capitalized(token_text: str) -> bool:
    return token_text[:1].isupper()


def recognize_entities(tokens: list[Token], gazetteers: Gazetteers) -> list[Annotation]:
    """Tag locations (gazetteer hits) and organizations (gazetteer hits or
    capitalized runs ending in a legal suffix). Returns token-range
    annotations; earlier matches win on overlap."""
    n = len(tokens)
    covered = [False] * n
    annotations: list[Annotation] = []

    def claim(a: int, b: int, kind: str) -> None:
        annotations.append(Annotation(a, b, kind))
        for i in range(a, b):
            covered[i] = True

    # Organizations from capitalized runs: "Hikari Bank Ltd" -> one span.
    i = 0
    while i < n:
        if _is_capitalized(tokens[i].text) and not covered[i]:
            j = i
            while j < n and _is_capitalized(tokens[j].text) and not covered[j]:
                j += 1
            if j - i >= 2 and _norm(tokens[j - 1].text) in gazetteers.org_suffixes:
                claim(i, j, ORGANIZATION)
            i = j
        else:
            i += 1

    # Gazetteer hits, longest phrase first (entries may be multi-word).
    def scan(entries: frozenset[str], kind: str, max_len: int) -> None:
        for length in range(max_len, 0, -1):
            for a in range(0, n - length + 1):
                if any(covered[a:a + length]):
                    continue
                phrase = " ".join(_norm(t.text) for t in tokens[a:a + length])
                if phrase in entries:
                    claim(a, a + length, kind)

    max_org = max((e.count(" ") + 1 for e in gazetteers.organizations), default=1)
    max_loc = max((e.count(" ") + 1 for e in gazetteers.locations), default=1)
    scan(gazetteers.organizations, ORGANIZATION, max_org)
    scan(gazetteers.locations, LOCATION, max_loc)
    return sorted(annotations, key=lambda a: a.start)


# ---------------------------------------------------------------------------
# Generalization
# ---------------------------------------------------------------------------


def generalize(tokens: list[str], annotations: list[Annotation]) -> list[str]:
    """Replace each annotated token range by its single kind token."""
    return [text for text, _ in _generalize_tagged(tokens, annotations)]


def _generalize_tagged(
    tokens: list[str], annotations: list[Annotation]
) -> list[tuple[str, bool]]:
    by_start = {a.start: a for a in annotations}
    out: list[tuple[str, bool]] = []
    i = 0
    while i < len(tokens):
        ann = by_start.get(i)
        if ann is not None:
            out.append((ann.kind, True))
            i = ann.end
        else:
            out.append((tokens[i], False))
            i += 1
    return out


# ---------------------------------------------------------------------------
# Lemmatization (exception lexicon + suffix rules)
# ---------------------------------------------------------------------------

_VOWELS = "aeiou"


def _cvc_e(base: str) -> str:
    """Restore a dropped final 'e' on short consonant-vowel-consonant stems
    ("stor" -> "store", "delet" -> "delete")."""
    if (
        3 <= len(base) <= 5
        and base[-1] not in _VOWELS + "wxy"
        and base[-2] in _VOWELS
        and base[-3] not in _VOWELS
    ):
        return base + "e"
    return base


def _undouble(base: str) -> str:
    if len(base) >= 4 and base[-1] == base[-2] and base[-1] not in _VOWELS + "lsz":
        return base[:-1]
    return base


def _strip_plural(w: str) -> str:
    if w.endswith("'s"):
        return w[:-2]
    if len(w) < 4 or not w.endswith("s"):
        return w
    if w.endswith("sses"):
        return w[:-2]
    if w.endswith("ies") and len(w) >= 5:
        return w[:-3] + "y"
    if w.endswith(("ss", "us", "is")):
        return w
    return w[:-1]


def _strip_participle(w: str) -> str:
    if w.endswith("ying") and len(w) >= 6:
        return w[:-4] + "y"
    if w.endswith("ing") and len(w) >= 6:
        return _cvc_e(_undouble(w[:-3]))
    if w.endswith("ied") and len(w) >= 5:
        return w[:-3] + "y"
    if w.endswith("eed"):
        return w[:-1]
    if w.endswith("ed") and len(w) >= 5:
        return _cvc_e(_undouble(w[:-2]))
    return w


def _strip_ion(w: str) -> str:
    if w.endswith("ion") and len(w) >= 6:
        return _cvc_e(w[:-3])
    return w


def lemmatize(word: str, exceptions: dict[str, str] | None = None) -> str:
    """Deterministic, idempotent surface-to-lemma mapping: exception lexicon
    first, then plural / participle / -ion suffix stripping applied until a
    fixed point (idempotence by construction)."""
    w = word.lower()
    for _ in range(10):
        if exceptions and w in exceptions:
            return exceptions[w]
        stripped = _strip_ion(_strip_participle(_strip_plural(w)))
        if stripped == w:
            return w
        w = stripped
    return w


def load_lemma_exceptions(config_text: str) -> dict[str, str]:
    """Parse the exception lexicon: one "surface TAB lemma" pair per line."""
    lexicon: dict[str, str] = {}
    for lineno, raw in enumerate(config_text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 2 or not parts[0].strip() or not parts[1].strip():
            raise ValueError(f"line {lineno}: expected 'surface<TAB>lemma'")
        lexicon[parts[0].strip().lower()] = parts[1].strip().lower()
    return lexicon


def load_stopwords(config_text: str) -> frozenset[str]:
    return frozenset(
        line.strip().lower()
        for line in config_text.splitlines()
        if line.strip() and not line.startswith("#")
    )


# ---------------------------------------------------------------------------
# Pipeline composition
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PipelineConfig:
    stopwords: frozenset[str]
    gazetteers: Gazetteers
    lemma_exceptions: dict[str, str] = field(default_factory=dict)


def _char_spans_to_annotations(tokens: list[Token], spans: list[CharSpan]) -> list[Annotation]:
    annotations = []
    for span in spans:
        hit = [i for i, t in enumerate(tokens) if t.start < span.end and span.start < t.end]
        if hit:
            annotations.append(Annotation(hit[0], hit[-1] + 1, span.kind))
    return annotations


def _merge_annotations(*groups: list[Annotation]) -> list[Annotation]:
    merged: list[Annotation] = []
    for ann in sorted((a for g in groups for a in g), key=lambda a: (a.start, -a.end)):
        if all(a.end <= ann.start or ann.end <= a.start for a in merged):
            merged.append(ann)
    return sorted(merged, key=lambda a: a.start)


def process_sentence(sentence: Sentence, config: PipelineConfig) -> ProcessedSentence:
    tokens = tokenize(sentence.raw_text)
    contact_anns = _char_spans_to_annotations(
        tokens, recognize_contacts(sentence.raw_text)
    )
    entity_anns = recognize_entities(tokens, config.gazetteers)
    annotations = _merge_annotations(contact_anns, entity_anns)

    out: list[str] = []
    for text, is_kind in _generalize_tagged([t.text for t in tokens], annotations):
        if is_kind:
            out.append(text)
            continue
        surface = text.lower()
        if surface in config.stopwords:
            continue
        lemma = lemmatize(surface, config.lemma_exceptions)
        if lemma in config.stopwords:
            continue
        out.append(lemma)
    return ProcessedSentence(
        sentence=sentence,
        tokens=tuple(out),
        entity_annotations=tuple(annotations),
    )


def preprocess(doc: RawDocument, config: PipelineConfig) -> list[ProcessedSentence]:
    """Full step-1 pipeline. Sentences that normalize to zero tokens are kept
    (downstream windowing is index-based) but can never match anything."""
    return [process_sentence(s, config) for s in split_sentences(doc)]


def normalize_phrase(text: str, config: PipelineConfig) -> tuple[str, ...]:
    """Normalize a keyword phrase the same way sentence tokens are normalized
    (no entity generalization: phrases are written in generalized form)."""
    out = []
    for token in tokenize(text):
        surface = token.text.lower()
        if surface in config.stopwords:
            continue
        lemma = lemmatize(surface, config.lemma_exceptions)
        if lemma in config.stopwords:
            continue
        out.append(lemma)
    return tuple(out)
