"""Review corpora: ingestion, aspect-unit enumeration, tokenization, embeddings."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

ATSA = "atsa"
ACSA = "acsa"
POSITIVE = "positive"
NEGATIVE = "negative"
POLARITIES = (POSITIVE, NEGATIVE)


class CorpusError(ValueError):
    """A corpus or embedding file violates the expected format."""


# Word characters with internal apostrophes stay one token ("don't");
# every other non-whitespace character is a token by itself.
_TOKEN_RE = re.compile(r"\w+(?:'\w+)*|\S")


def tokenize(text: str) -> List[Tuple[str, int, int]]:
    """Split text into lowercased tokens with [start, end) character offsets."""
    return [(m.group().lower(), m.start(), m.end()) for m in _TOKEN_RE.finditer(text)]


@dataclass
class AspectRef:
    id: str
    term: Optional[str] = None
    category: Optional[str] = None
    term_span: Optional[Tuple[int, int]] = None
    gold: Optional[str] = None

    @property
    def mode(self) -> str:
        return ATSA if self.term is not None else ACSA


@dataclass
class Sentence:
    id: str
    text: str
    tokens: List[str]
    aspects: List[AspectRef]
    # offsets is None for pre-tokenized input, where no character map exists
    offsets: Optional[List[Tuple[int, int]]] = None


@dataclass
class Review:
    id: str
    sentences: List[Sentence]


class Corpus:
    """Container for reviews, immutable after load, with id-based lookups."""

    def __init__(self, reviews: Sequence[Review]):
        self.reviews = list(reviews)
        self._review_by_id: Dict[str, Review] = {}
        self._sentence_by_key: Dict[Tuple[str, str], Sentence] = {}
        self._position: Dict[Tuple[str, str], int] = {}
        for review in self.reviews:
            if review.id in self._review_by_id:
                raise CorpusError(f"duplicate review id {review.id!r}")
            self._review_by_id[review.id] = review
            for pos, sentence in enumerate(review.sentences):
                key = (review.id, sentence.id)
                if key in self._sentence_by_key:
                    raise CorpusError(
                        f"duplicate sentence id {sentence.id!r} in review {review.id!r}"
                    )
                self._sentence_by_key[key] = sentence
                self._position[key] = pos

    def review(self, review_id: str) -> Review:
        return self._review_by_id[review_id]

    def sentence(self, review_id: str, sentence_id: str) -> Sentence:
        return self._sentence_by_key[(review_id, sentence_id)]

    def sentence_position(self, review_id: str, sentence_id: str) -> int:
        """Zero-based position of the sentence within its review."""
        return self._position[(review_id, sentence_id)]

    def __eq__(self, other) -> bool:
        return isinstance(other, Corpus) and self.reviews == other.reviews


@dataclass(frozen=True)
class AspectUnit:
    unit_id: int
    review_id: str
    sentence_id: str
    aspect_id: str
    mode: str


def enumerate_aspect_units(corpus: Corpus) -> List[AspectUnit]:
    """One unit per (review, sentence, aspect) triple, ids dense from 0 in corpus order."""
    units = []
    for review in corpus.reviews:
        for sentence in review.sentences:
            for aspect in sentence.aspects:
                units.append(
                    AspectUnit(len(units), review.id, sentence.id, aspect.id, aspect.mode)
                )
    return units


def _locate_term(tokens: List[str], term: str) -> Optional[Tuple[int, int]]:
    want = [t for t, _, _ in tokenize(term)]
    if not want:
        return None
    for i in range(len(tokens) - len(want) + 1):
        if tokens[i : i + len(want)] == want:
            return (i, i + len(want))
    return None


def _parse_aspect(raw: dict, where: str, n_tokens: int, tokens: List[str]) -> AspectRef:
    if not isinstance(raw, dict) or not isinstance(raw.get("id"), str):
        raise CorpusError(f"{where}: aspect entry needs a string 'id'")
    aid = raw["id"]
    term = raw.get("term")
    category = raw.get("category")
    if term is None and category is None:
        raise CorpusError(f"{where}: aspect {aid!r} has neither term nor category")
    span = raw.get("term_span")
    if span is not None:
        ok = (
            isinstance(span, (list, tuple))
            and len(span) == 2
            and all(isinstance(x, int) for x in span)
            and 0 <= span[0] < span[1] <= n_tokens
        )
        if not ok:
            raise CorpusError(f"{where}: aspect {aid!r} has invalid term_span {span!r}")
        span = (span[0], span[1])
    elif term is not None:
        span = _locate_term(tokens, term)
    gold = raw.get("gold")
    if gold is not None and gold not in POLARITIES:
        raise CorpusError(f"{where}: aspect {aid!r} has invalid gold label {gold!r}")
    return AspectRef(aid, term, category, span, gold)


def corpus_from_dict(data: dict, source: str = "<dict>") -> Corpus:
    if not isinstance(data, dict) or not isinstance(data.get("reviews"), list):
        raise CorpusError(f"{source}: top level must be an object with a 'reviews' list")
    reviews = []
    for r in data["reviews"]:
        if not isinstance(r, dict) or not isinstance(r.get("id"), str):
            raise CorpusError(f"{source}: review entry needs a string 'id'")
        rid = r["id"]
        sentences = []
        for s in r.get("sentences", []):
            if not isinstance(s, dict) or not isinstance(s.get("id"), str):
                raise CorpusError(f"{source}: review {rid!r}: sentence needs a string 'id'")
            where = f"{source}: review {rid!r}, sentence {s['id']!r}"
            text = s.get("text", "")
            if not isinstance(text, str):
                raise CorpusError(f"{where}: 'text' must be a string")
            if "tokens" in s:
                raw_tokens = s["tokens"]
                if not isinstance(raw_tokens, list) or not all(
                    isinstance(t, str) for t in raw_tokens
                ):
                    raise CorpusError(f"{where}: 'tokens' must be a list of strings")
                tokens = [t.lower() for t in raw_tokens]
                offsets = None
            else:
                triples = tokenize(text)
                tokens = [t for t, _, _ in triples]
                offsets = [(a, b) for _, a, b in triples]
            aspects = []
            seen = set()
            for raw_aspect in s.get("aspects", []):
                aspect = _parse_aspect(raw_aspect, where, len(tokens), tokens)
                if aspect.id in seen:
                    raise CorpusError(f"{where}: duplicate aspect id {aspect.id!r}")
                seen.add(aspect.id)
                aspects.append(aspect)
            sentences.append(Sentence(s["id"], text, tokens, aspects, offsets))
        reviews.append(Review(rid, sentences))
    return Corpus(reviews)


def load_corpus(path) -> Corpus:
    with open(path, encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise CorpusError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from exc
    return corpus_from_dict(data, source=str(path))


def corpus_to_dict(corpus: Corpus) -> dict:
    reviews = []
    for review in corpus.reviews:
        sentences = []
        for s in review.sentences:
            entry: dict = {"id": s.id, "text": s.text}
            if s.offsets is None:
                entry["tokens"] = list(s.tokens)
            aspects = []
            for a in s.aspects:
                raw: dict = {"id": a.id}
                if a.term is not None:
                    raw["term"] = a.term
                if a.category is not None:
                    raw["category"] = a.category
                if a.term_span is not None:
                    raw["term_span"] = list(a.term_span)
                if a.gold is not None:
                    raw["gold"] = a.gold
                aspects.append(raw)
            entry["aspects"] = aspects
            sentences.append(entry)
        reviews.append({"id": review.id, "sentences": sentences})
    return {"reviews": reviews}


def save_corpus(corpus: Corpus, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(corpus_to_dict(corpus), fh, indent=2, sort_keys=True)
        fh.write("\n")


@dataclass
class EmbeddingTable:
    dimension: int
    vectors: Dict[str, np.ndarray]

    def __contains__(self, token: str) -> bool:
        return token in self.vectors

    def get(self, token: str) -> Optional[np.ndarray]:
        return self.vectors.get(token)

    def similarity(self, a: str, b: str) -> float:
        """Cosine similarity; 0.0 whenever either token is unknown or zero-length."""
        va, vb = self.vectors.get(a), self.vectors.get(b)
        if va is None or vb is None:
            return 0.0
        na, nb = np.linalg.norm(va), np.linalg.norm(vb)
        if na == 0.0 or nb == 0.0:
            return 0.0
        return float(np.dot(va, vb) / (na * nb))


def load_embeddings(path) -> EmbeddingTable:
    """Load space-separated text vectors; an optional "<count> <dim>" header is skipped."""
    vectors: Dict[str, np.ndarray] = {}
    dimension = None
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            parts = line.split()
            if not parts:
                continue
            if lineno == 1 and len(parts) == 2:
                try:
                    int(parts[0]), int(parts[1])
                    continue
                except ValueError:
                    pass
            token, raw_values = parts[0], parts[1:]
            if not raw_values:
                raise CorpusError(f"{path}:{lineno}: no vector components")
            try:
                vec = np.array([float(x) for x in raw_values], dtype=np.float64)
            except ValueError as exc:
                raise CorpusError(f"{path}:{lineno}: non-numeric component") from exc
            if dimension is None:
                dimension = len(vec)
            elif len(vec) != dimension:
                raise CorpusError(
                    f"{path}:{lineno}: expected {dimension} components, got {len(vec)}"
                )
            vectors[token] = vec
    if not vectors:
        raise CorpusError(f"{path}: no embedding vectors found")
    return EmbeddingTable(dimension, vectors)
