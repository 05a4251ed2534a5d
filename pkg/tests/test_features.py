"""Clause segmentation, opinion spans, word features, relation rules, statistics."""

import pytest

from gmlsa.corpus import corpus_from_dict, enumerate_aspect_units, load_embeddings, tokenize
from gmlsa.features import (
    EMBEDDING_SIMILARITY,
    EXPLICIT_TERM,
    FeatureError,
    FeatureIndex,
    FeatureStats,
    OPPOSITE,
    SIMILAR,
    WHOLE_SENTENCE,
    extract_relational_features,
    extract_word_features,
    resolve_opinion_span,
    segment_clauses,
    spans_split_by_shift,
)
from gmlsa.lexicon import find_sentiment_hits


def toks(text):
    return [t for t, _, _ in tokenize(text)]


class TestSegmentation:
    def test_plain_sentence_is_one_clause(self, connectives):
        seg = segment_clauses(toks("the screen is good"), connectives)
        assert seg.clauses == ((0, 4),)
        assert not seg.has_shift and not seg.inner_shift and not seg.leading_shift

    def test_comma_splits(self, connectives):
        seg = segment_clauses(toks("i like it , it works"), connectives)
        assert seg.clauses == ((0, 3), (4, 6))
        assert not seg.has_shift

    def test_inner_shift(self, connectives):
        seg = segment_clauses(toks("nice screen but terrible keyboard"), connectives)
        assert seg.clauses == ((0, 2), (3, 5))
        assert seg.has_shift and seg.inner_shift and not seg.leading_shift
        assert seg.inner_shifts == ((2, 3),)

    def test_leading_shift_is_not_inner(self, connectives):
        seg = segment_clauses(toks("however , the keyboard is bad"), connectives)
        assert seg.leading_shift and seg.has_shift
        assert not seg.inner_shift

    def test_empty(self, connectives):
        seg = segment_clauses([], connectives)
        assert seg.clauses == ()
        assert not seg.leading_shift


class TestOpinionSpan:
    def _unit_and_aspect(self, corpus, review_id, sentence_id, aspect_index=0):
        units = enumerate_aspect_units(corpus)
        sentence = corpus.sentence(review_id, sentence_id)
        aspect = sentence.aspects[aspect_index]
        unit = next(
            u
            for u in units
            if u.review_id == review_id
            and u.sentence_id == sentence_id
            and u.aspect_id == aspect.id
        )
        return unit, aspect, sentence.tokens

    def test_explicit_term_picks_its_clause(self, connectives):
        corpus = corpus_from_dict(
            {
                "reviews": [
                    {
                        "id": "r",
                        "sentences": [
                            {
                                "id": "s",
                                "text": "nice screen but terrible keyboard",
                                "aspects": [
                                    {"id": "a1", "term": "screen"},
                                    {"id": "a2", "term": "keyboard"},
                                ],
                            }
                        ],
                    }
                ]
            }
        )
        u1, a1, tokens = self._unit_and_aspect(corpus, "r", "s", 0)
        u2, a2, _ = self._unit_and_aspect(corpus, "r", "s", 1)
        seg = segment_clauses(tokens, connectives)
        span1 = resolve_opinion_span(u1, a1, tokens, seg)
        span2 = resolve_opinion_span(u2, a2, tokens, seg)
        assert span1.range == (0, 2) and span1.association == EXPLICIT_TERM
        assert span2.range == (3, 5) and span2.association == EXPLICIT_TERM
        assert spans_split_by_shift(seg, span1.range, span2.range)

    def test_acsa_embedding_similarity(self, connectives, embeddings_path):
        table = load_embeddings(embeddings_path)
        corpus = corpus_from_dict(
            {
                "reviews": [
                    {
                        "id": "r",
                        "sentences": [
                            {
                                "id": "s",
                                "text": "the battery is good , it runs my games smoothly",
                                "aspects": [{"id": "a1", "category": "performance"}],
                            }
                        ],
                    }
                ]
            }
        )
        unit, aspect, tokens = self._unit_and_aspect(corpus, "r", "s")
        seg = segment_clauses(tokens, connectives)
        span = resolve_opinion_span(unit, aspect, tokens, seg, embeddings=table)
        # "games" in the second clause is the best match for "performance"
        assert span.association == EMBEDDING_SIMILARITY
        assert span.range == (5, 10)

    def test_acsa_without_embeddings_is_whole_sentence(self, connectives):
        corpus = corpus_from_dict(
            {
                "reviews": [
                    {
                        "id": "r",
                        "sentences": [
                            {
                                "id": "s",
                                "text": "it runs my games smoothly",
                                "aspects": [{"id": "a1", "category": "performance"}],
                            }
                        ],
                    }
                ]
            }
        )
        unit, aspect, tokens = self._unit_and_aspect(corpus, "r", "s")
        seg = segment_clauses(tokens, connectives)
        span = resolve_opinion_span(unit, aspect, tokens, seg)
        assert span.association == WHOLE_SENTENCE
        assert span.range == (0, len(tokens))

    def test_acsa_below_threshold_is_whole_sentence(self, connectives, embeddings_path):
        table = load_embeddings(embeddings_path)
        corpus = corpus_from_dict(
            {
                "reviews": [
                    {
                        "id": "r",
                        "sentences": [
                            {
                                "id": "s",
                                "text": "the battery lasts , the keyboard clicks",
                                "aspects": [{"id": "a1", "category": "performance"}],
                            }
                        ],
                    }
                ]
            }
        )
        unit, aspect, tokens = self._unit_and_aspect(corpus, "r", "s")
        seg = segment_clauses(tokens, connectives)
        span = resolve_opinion_span(
            unit, aspect, tokens, seg, embeddings=table, sim_threshold=0.9
        )
        assert span.association == WHOLE_SENTENCE


class TestWordFeatures:
    def test_unigram_and_kgram_enumeration(self, lexicon, connectives):
        tokens = toks("the screen is good")
        hits = find_sentiment_hits(tokens, lexicon, connectives)
        keys = extract_word_features(tokens, (0, len(tokens)), hits, kgram_max=3)
        # one unigram for the hit, then every 2- and 3-gram containing it
        assert (("good",), False) in keys
        assert (("is", "good"), False) in keys
        assert (("screen", "is", "good"), False) in keys
        assert (("the", "screen", "is"), False) not in keys
        assert len(keys) == 1 + 1 + 1

    def test_negation_flag_propagates_to_kgrams(self, lexicon, connectives):
        tokens = toks("the screen is not good")
        hits = find_sentiment_hits(tokens, lexicon, connectives)
        keys = extract_word_features(tokens, (0, len(tokens)), hits, kgram_max=2)
        assert (("good",), True) in keys
        assert (("not", "good"), True) in keys

    def test_span_restricts_features(self, lexicon, connectives):
        tokens = toks("nice screen but terrible keyboard")
        hits = find_sentiment_hits(tokens, lexicon, connectives)
        keys = extract_word_features(tokens, (0, 2), hits, kgram_max=2)
        surfaces = {k[0] for k in keys}
        assert (("nice",)) in surfaces
        assert all("terrible" not in s for s in surfaces)

    def test_no_hits_no_features(self, lexicon, connectives):
        tokens = toks("the keyboard clicks")
        keys = extract_word_features(tokens, (0, 3), [], kgram_max=3)
        assert keys == []


class TestFeatureIndex:
    def test_word_interning_shares_weights(self):
        index = FeatureIndex()
        f1 = index.add_word(0, (("good",), False))
        f2 = index.add_word(5, (("good",), False))
        assert f1 is f2
        assert f1.bearers == {0, 5}
        assert len(index.word_features) == 1

    def test_negated_variant_is_distinct(self):
        index = FeatureIndex()
        f1 = index.add_word(0, (("good",), False))
        f2 = index.add_word(0, (("good",), True))
        assert f1 is not f2

    def test_relation_weights_are_tied(self):
        index = FeatureIndex(similar_init=2.0, opposite_init=-2.0)
        r1 = index.add_relation(0, 1, SIMILAR, rule=1)
        r2 = index.add_relation(1, 2, SIMILAR, rule=1)
        assert r1.weight == r2.weight == 2.0
        index.set_relation_weight(SIMILAR, 1.5)
        assert r1.weight == r2.weight == 1.5

    def test_duplicate_pair_collapses(self):
        index = FeatureIndex()
        assert index.add_relation(0, 1, SIMILAR, rule=1) is not None
        assert index.add_relation(1, 0, OPPOSITE, rule=2) is None
        assert len(index.relations) == 1

    def test_self_relation_rejected(self):
        index = FeatureIndex()
        with pytest.raises(FeatureError):
            index.add_relation(3, 3, SIMILAR, rule=1)


def _prepare_relations(corpus_dict, connectives, lexicon):
    corpus = corpus_from_dict(corpus_dict)
    units = enumerate_aspect_units(corpus)
    segs, spans = {}, {}
    for unit in units:
        sentence = corpus.sentence(unit.review_id, unit.sentence_id)
        aspect = next(a for a in sentence.aspects if a.id == unit.aspect_id)
        seg = segment_clauses(sentence.tokens, connectives)
        segs[unit.unit_id] = seg
        spans[unit.unit_id] = resolve_opinion_span(
            unit, aspect, sentence.tokens, seg, lexicon
        )
    index = FeatureIndex()
    created = extract_relational_features(corpus, units, segs, spans, index)
    return index, created


class TestRelationRules:
    def test_running_corpus_relations(self, connectives, lexicon):
        from tests.conftest import RUNNING_CORPUS

        index, created = _prepare_relations(RUNNING_CORPUS, connectives, lexicon)
        got = {rel.units: rel.kind for rel in created}
        assert got == {(0, 1): OPPOSITE, (2, 3): SIMILAR}
        assert {rel.units: rel.rule for rel in created} == {(0, 1): 2, (2, 3): 1}

    def test_same_sentence_shift_between_spans(self, connectives, lexicon):
        corpus_dict = {
            "reviews": [
                {
                    "id": "r",
                    "sentences": [
                        {
                            "id": "s",
                            "text": "nice screen but terrible keyboard",
                            "aspects": [
                                {"id": "a1", "term": "screen"},
                                {"id": "a2", "term": "keyboard"},
                            ],
                        }
                    ],
                }
            ]
        }
        index, created = _prepare_relations(corpus_dict, connectives, lexicon)
        (rel,) = created
        assert rel.kind == OPPOSITE and rel.rule == 3

    def test_same_sentence_no_shift_is_similar(self, connectives, lexicon):
        corpus_dict = {
            "reviews": [
                {
                    "id": "r",
                    "sentences": [
                        {
                            "id": "s",
                            "text": "the screen and the keyboard are good",
                            "aspects": [
                                {"id": "a1", "term": "screen"},
                                {"id": "a2", "term": "keyboard"},
                            ],
                        }
                    ],
                }
            ]
        }
        index, created = _prepare_relations(corpus_dict, connectives, lexicon)
        (rel,) = created
        assert rel.kind == SIMILAR and rel.rule == 1

    def test_non_adjacent_sentences_unrelated(self, connectives, lexicon):
        corpus_dict = {
            "reviews": [
                {
                    "id": "r",
                    "sentences": [
                        {"id": "s1", "text": "good screen", "aspects": [{"id": "a", "term": "screen"}]},
                        {"id": "s2", "text": "fine", "aspects": []},
                        {"id": "s3", "text": "good keyboard", "aspects": [{"id": "a", "term": "keyboard"}]},
                    ],
                }
            ]
        }
        index, created = _prepare_relations(corpus_dict, connectives, lexicon)
        assert created == []

    def test_mid_sentence_shift_blocks_adjacent_rule(self, connectives, lexicon):
        # second sentence has an inner shift: neither rule 1 nor rule 2 applies
        corpus_dict = {
            "reviews": [
                {
                    "id": "r",
                    "sentences": [
                        {"id": "s1", "text": "good screen", "aspects": [{"id": "a", "term": "screen"}]},
                        {
                            "id": "s2",
                            "text": "nice keys but terrible feel",
                            "aspects": [{"id": "a", "term": "keys"}],
                        },
                    ],
                }
            ]
        }
        index, created = _prepare_relations(corpus_dict, connectives, lexicon)
        assert created == []


class TestFeatureStats:
    def _small_index(self):
        index = FeatureIndex()
        good = index.add_word(0, (("good",), False))
        index.add_word(1, (("good",), False))
        index.add_word(2, (("good",), False))
        index.add_relation(0, 1, SIMILAR, rule=1)
        index.add_relation(1, 2, OPPOSITE, rule=2)
        return index, good

    def test_rebuild_counts(self):
        index, good = self._small_index()
        stats = FeatureStats(index)
        stats.rebuild({0: 1, 1: 1, 2: 0})
        assert stats.labeled_bearers(good) == 3
        # 2 positives of 3 bearers: smoothed (2+1)/(3+2)
        assert stats.positive_fraction(good) == pytest.approx(3 / 5)
        # similar (0,1) agrees, opposite (1,2) disagrees: both correct
        assert stats.relation_accuracy(SIMILAR) == pytest.approx((1 + 1) / (1 + 2))
        assert stats.relation_accuracy(OPPOSITE) == pytest.approx((1 + 1) / (1 + 2))

    def test_unobserved_feature(self):
        index, good = self._small_index()
        stats = FeatureStats(index)
        stats.rebuild({})
        assert not stats.observed(good)
        assert stats.positive_fraction(good) == pytest.approx(0.5)
        assert stats.relation_accuracy(SIMILAR) == pytest.approx(0.5)

    def test_incremental_update_matches_rebuild(self):
        index, good = self._small_index()
        incremental = FeatureStats(index)
        incremental.rebuild({0: 1})
        labels = {0: 1}
        for uid, value in ((1, 0), (2, 1)):
            labels[uid] = value
            incremental.update(uid, value, labels)
        rebuilt = FeatureStats(index)
        rebuilt.rebuild(labels)
        assert incremental.pos == rebuilt.pos
        assert incremental.n == rebuilt.n
        assert incremental.kind_correct == rebuilt.kind_correct
        assert incremental.kind_total == rebuilt.kind_total
