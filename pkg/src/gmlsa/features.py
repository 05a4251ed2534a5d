"""Word and relational feature extraction, clause segmentation, opinion spans."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Set, Tuple

from .corpus import ACSA, ATSA, AspectRef, AspectUnit, Corpus, EmbeddingTable
from .lexicon import ConnectiveLists, Lexicon, SentimentHit

SIMILAR = "similar"
OPPOSITE = "opposite"

EXPLICIT_TERM = "explicit_term"
EMBEDDING_SIMILARITY = "embedding_similarity"
WHOLE_SENTENCE = "whole_sentence"

CLAUSE_PUNCT = {",", ";"}

# Function words excluded from ACSA opinion-target candidacy. Deliberately
# small: over-filtering loses candidates, under-filtering only adds noise
# that the similarity threshold screens out.
STOPWORDS = frozenset(
    """a an the and or of to in on at by for with as from this that these those
    it its they them their there here is are was were be been being am do does
    did have has had i you he she we me him her us my your his our who what
    which when where how why would could should can will shall may might must
    also very so such just about over under again then than too own same
    """.split()
)


class FeatureError(ValueError):
    """Internal consistency failure during feature extraction or indexing."""


@dataclass(frozen=True)
class ClauseSegmentation:
    """Clause ranges plus separator bookkeeping for one sentence.

    boundaries holds every separator as (start, end, is_shift); inner_shifts
    keeps the shift separators that fall strictly between two retained
    clauses, which is what the opposite-relation rules care about.
    """

    clauses: Tuple[Tuple[int, int], ...]
    boundaries: Tuple[Tuple[int, int, bool], ...]
    inner_shifts: Tuple[Tuple[int, int], ...]
    leading_shift: bool

    @property
    def has_shift(self) -> bool:
        return any(is_shift for _, _, is_shift in self.boundaries)

    @property
    def inner_shift(self) -> bool:
        return bool(self.inner_shifts)


def segment_clauses(tokens: List[str], connectives: ConnectiveLists) -> ClauseSegmentation:
    """Split at commas, semicolons and shift phrases; record which boundaries shift."""
    clauses = []
    boundaries = []
    clause_start = 0
    i = 0
    while i < len(tokens):
        n = connectives.shift.match_at(tokens, i)
        if n:
            if i > clause_start:
                clauses.append((clause_start, i))
            boundaries.append((i, i + n, True))
            i += n
            clause_start = i
            continue
        if tokens[i] in CLAUSE_PUNCT:
            if i > clause_start:
                clauses.append((clause_start, i))
            boundaries.append((i, i + 1, False))
            i += 1
            clause_start = i
            continue
        i += 1
    if i > clause_start:
        clauses.append((clause_start, i))
    inner = tuple(
        (bs, be)
        for bs, be, is_shift in boundaries
        if is_shift
        and any(ce <= bs for _, ce in clauses)
        and any(cs >= be for cs, _ in clauses)
    )
    leading = bool(tokens) and connectives.shift.match_at(tokens, 0) > 0
    return ClauseSegmentation(tuple(clauses), tuple(boundaries), inner, leading)


@dataclass(frozen=True)
class OpinionSpan:
    unit_id: int
    start: int
    end: int
    association: str

    @property
    def range(self) -> Tuple[int, int]:
        return (self.start, self.end)


def _category_tokens(category: str) -> List[str]:
    return [t for t in re.split(r"[^\w]+", category.lower()) if t]


def resolve_opinion_span(
    unit: AspectUnit,
    aspect: AspectRef,
    tokens: List[str],
    seg: ClauseSegmentation,
    lexicon: Optional[Lexicon] = None,
    embeddings: Optional[EmbeddingTable] = None,
    sim_threshold: float = 0.5,
) -> OpinionSpan:
    """Clause association: explicit term position for ATSA, embedding similarity
    for ACSA, whole sentence when neither resolves."""
    whole = OpinionSpan(unit.unit_id, 0, len(tokens), WHOLE_SENTENCE)
    clauses = seg.clauses if seg.clauses else ((0, len(tokens)),) if tokens else ()
    if unit.mode == ATSA and aspect.term_span is not None:
        pos = aspect.term_span[0]
        for start, end in clauses:
            if start <= pos < end:
                return OpinionSpan(unit.unit_id, start, end, EXPLICIT_TERM)
        return whole
    if unit.mode == ACSA and embeddings is not None and aspect.category:
        cat = [t for t in _category_tokens(aspect.category) if t in embeddings]
        if not cat:
            return whole
        best = None
        best_score = 0.0
        for start, end in clauses:
            candidates = [
                t
                for t in tokens[start:end]
                if (t.isalpha() and t not in STOPWORDS)
                or (lexicon is not None and lexicon.is_active(t))
            ]
            score = 0.0
            for t in candidates:
                for c in cat:
                    score = max(score, embeddings.similarity(t, c))
            if score >= sim_threshold and score > best_score:
                best, best_score = (start, end), score
        if best is not None:
            return OpinionSpan(unit.unit_id, best[0], best[1], EMBEDDING_SIMILARITY)
    return whole


def spans_split_by_shift(
    seg: ClauseSegmentation, a: Tuple[int, int], b: Tuple[int, int]
) -> bool:
    """True iff an inner shift separator lies strictly between the two ranges."""
    lo, hi = (a, b) if a[0] <= b[0] else (b, a)
    return any(lo[1] <= bs and be <= hi[0] for bs, be in seg.inner_shifts)


FeatureKey = Tuple[Tuple[str, ...], bool]


def extract_word_features(
    tokens: List[str],
    span: Tuple[int, int],
    hits: Sequence[SentimentHit],
    kgram_max: int = 3,
) -> List[FeatureKey]:
    """Unigram key per in-span hit; k-gram key per in-span window containing a hit.

    The negation flag of a k-gram is the OR of its contained hits' flags.
    Order of first occurrence is preserved; duplicates collapse.
    """
    start, end = span
    span_hits = [h for h in hits if start <= h.token_index < end]
    keys: List[FeatureKey] = []
    seen: Set[FeatureKey] = set()
    for h in span_hits:
        key = ((h.word,), h.negated)
        if key not in seen:
            seen.add(key)
            keys.append(key)
    for k in range(2, kgram_max + 1):
        for i in range(start, end - k + 1):
            contained = [h for h in span_hits if i <= h.token_index < i + k]
            if not contained:
                continue
            key = (tuple(tokens[i : i + k]), any(h.negated for h in contained))
            if key not in seen:
                seen.add(key)
                keys.append(key)
    return keys


@dataclass
class WordFeature:
    feature_id: int
    surface: Tuple[str, ...]
    negated: bool
    weight: float
    bearers: Set[int] = field(default_factory=set)


@dataclass
class RelationalFeature:
    feature_id: int
    kind: str
    rule: int
    units: Tuple[int, int]  # ordered (low, high)
    index: "FeatureIndex"

    @property
    def weight(self) -> float:
        return self.index.relation_weight(self.kind)

    def other(self, unit_id: int) -> int:
        return self.units[1] if self.units[0] == unit_id else self.units[0]


class FeatureIndex:
    """Global interner for word and relational features.

    Word features carry individual weights; relational weights are tied per
    kind and live here, so every factor of a kind moves together.
    """

    def __init__(
        self,
        word_init: float = 0.0,
        similar_init: float = 2.0,
        opposite_init: float = -2.0,
    ):
        self.word_features: List[WordFeature] = []
        self.relations: List[RelationalFeature] = []
        self._word_by_key: Dict[FeatureKey, WordFeature] = {}
        self._relation_by_pair: Dict[Tuple[int, int], RelationalFeature] = {}
        self.unit_word: Dict[int, List[WordFeature]] = {}
        self.unit_relations: Dict[int, List[RelationalFeature]] = {}
        self.word_init = word_init
        self.kind_weights: Dict[str, float] = {SIMILAR: similar_init, OPPOSITE: opposite_init}

    def relation_weight(self, kind: str) -> float:
        return self.kind_weights[kind]

    def set_relation_weight(self, kind: str, weight: float) -> None:
        self.kind_weights[kind] = weight

    def add_word(self, unit_id: int, key: FeatureKey) -> WordFeature:
        feat = self._word_by_key.get(key)
        if feat is None:
            feat = WordFeature(len(self.word_features), key[0], key[1], self.word_init)
            self.word_features.append(feat)
            self._word_by_key[key] = feat
        if unit_id not in feat.bearers:
            feat.bearers.add(unit_id)
            self.unit_word.setdefault(unit_id, []).append(feat)
        return feat

    def add_relation(self, u1: int, u2: int, kind: str, rule: int) -> Optional[RelationalFeature]:
        if u1 == u2:
            raise FeatureError(f"relation endpoints must differ, got unit {u1}")
        pair = (u1, u2) if u1 < u2 else (u2, u1)
        if pair in self._relation_by_pair:
            return None
        feat = RelationalFeature(len(self.relations), kind, rule, pair, self)
        self.relations.append(feat)
        self._relation_by_pair[pair] = feat
        self.unit_relations.setdefault(pair[0], []).append(feat)
        self.unit_relations.setdefault(pair[1], []).append(feat)
        return feat

    def word_features_of(self, unit_id: int) -> List[WordFeature]:
        return self.unit_word.get(unit_id, [])

    def relations_of(self, unit_id: int) -> List[RelationalFeature]:
        return self.unit_relations.get(unit_id, [])


def extract_relational_features(
    corpus: Corpus,
    units: Sequence[AspectUnit],
    segs: Dict[int, ClauseSegmentation],
    spans: Dict[int, OpinionSpan],
    index: FeatureIndex,
) -> List[RelationalFeature]:
    """Apply the three discourse rules over unit pairs of each review.

    Same sentence: an inner shift between the opinion spans makes the pair
    opposite (rule 3); a shift-free sentence makes it similar (rule 1).
    Adjacent sentences: a leading shift on the second with no inner shifts
    makes it opposite (rule 2); no shift anywhere makes it similar (rule 1).
    Precedence 3 > 2 > 1; at most one relation per pair.
    """
    by_review: Dict[str, List[AspectUnit]] = {}
    for unit in units:
        by_review.setdefault(unit.review_id, []).append(unit)
    created = []
    for review_units in by_review.values():
        for i, u1 in enumerate(review_units):
            pos1 = corpus.sentence_position(u1.review_id, u1.sentence_id)
            for u2 in review_units[i + 1 :]:
                pos2 = corpus.sentence_position(u2.review_id, u2.sentence_id)
                if abs(pos1 - pos2) > 1:
                    continue
                seg1, seg2 = segs[u1.unit_id], segs[u2.unit_id]
                span1, span2 = spans[u1.unit_id], spans[u2.unit_id]
                verdict = None
                if pos1 == pos2:
                    if spans_split_by_shift(seg1, span1.range, span2.range):
                        verdict = (OPPOSITE, 3)
                    elif not seg1.has_shift:
                        verdict = (SIMILAR, 1)
                else:
                    first, second = (seg1, seg2) if pos1 < pos2 else (seg2, seg1)
                    if second.leading_shift and not first.inner_shift and not second.inner_shift:
                        verdict = (OPPOSITE, 2)
                    elif not seg1.has_shift and not seg2.has_shift:
                        verdict = (SIMILAR, 1)
                if verdict is None:
                    continue
                feat = index.add_relation(u1.unit_id, u2.unit_id, verdict[0], verdict[1])
                if feat is not None:
                    created.append(feat)
    return created


class FeatureStats:
    """Label-dependent statistics: per-feature positive proportions and
    per-kind relation accuracies, both Laplace-smoothed, updated per label."""

    def __init__(self, index: FeatureIndex):
        self.index = index
        self.pos: Dict[int, int] = {}
        self.n: Dict[int, int] = {}
        self.kind_correct: Dict[str, int] = {SIMILAR: 0, OPPOSITE: 0}
        self.kind_total: Dict[str, int] = {SIMILAR: 0, OPPOSITE: 0}

    def rebuild(self, labels: Dict[int, int]) -> None:
        self.pos = {f.feature_id: 0 for f in self.index.word_features}
        self.n = {f.feature_id: 0 for f in self.index.word_features}
        self.kind_correct = {SIMILAR: 0, OPPOSITE: 0}
        self.kind_total = {SIMILAR: 0, OPPOSITE: 0}
        for feat in self.index.word_features:
            for unit_id in feat.bearers:
                value = labels.get(unit_id)
                if value is None:
                    continue
                self.n[feat.feature_id] += 1
                self.pos[feat.feature_id] += value
        for rel in self.index.relations:
            a, b = rel.units
            va, vb = labels.get(a), labels.get(b)
            if va is None or vb is None:
                continue
            self.kind_total[rel.kind] += 1
            agree = va == vb
            if (rel.kind == SIMILAR) == agree:
                self.kind_correct[rel.kind] += 1

    def update(self, unit_id: int, value: int, labels: Dict[int, int]) -> None:
        """Fold one new label in; labels must already contain it."""
        for feat in self.index.word_features_of(unit_id):
            self.n[feat.feature_id] = self.n.get(feat.feature_id, 0) + 1
            self.pos[feat.feature_id] = self.pos.get(feat.feature_id, 0) + value
        for rel in self.index.relations_of(unit_id):
            other = labels.get(rel.other(unit_id))
            if other is None:
                continue
            self.kind_total[rel.kind] += 1
            agree = value == other
            if (rel.kind == SIMILAR) == agree:
                self.kind_correct[rel.kind] += 1

    def labeled_bearers(self, feature: WordFeature) -> int:
        return self.n.get(feature.feature_id, 0)

    def observed(self, feature: WordFeature) -> bool:
        return self.labeled_bearers(feature) > 0

    def positive_fraction(self, feature: WordFeature) -> float:
        """Smoothed P: (positives + 1) / (bearers + 2); 0.5 when unobserved."""
        n = self.n.get(feature.feature_id, 0)
        return (self.pos.get(feature.feature_id, 0) + 1) / (n + 2)

    def relation_accuracy(self, kind: str) -> float:
        return (self.kind_correct[kind] + 1) / (self.kind_total[kind] + 2)
