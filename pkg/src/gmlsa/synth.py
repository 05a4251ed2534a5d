"""Synthetic review generator with planted polarities.

Easy sentences are constructed to satisfy the easy-instance rules exactly,
with gold matching the rule outcome. Hard sentences come in four shapes:
connective-guarded, long-distance negation, and two featureless relation
carriers (plain follow-on = similar, shift-led follow-on = opposite). The
noise parameter is the probability that a hard sentence's evidence misleads:
its sentiment word or its relation then contradicts the recorded gold.
Featureless singletons ("bare") have no evidence at all and carry gold
positive, matching the default-positive fallback rule, so a noise=0 corpus
is perfectly recoverable.
"""

from __future__ import annotations

import random
from typing import Dict, List

from .corpus import Corpus, NEGATIVE, POSITIVE, corpus_from_dict
from .lexicon import Lexicon

POSITIVE_WORDS: Dict[str, float] = {
    "great": 3.0,
    "good": 2.0,
    "excellent": 3.5,
    "amazing": 3.0,
    "wonderful": 3.0,
    "fantastic": 3.5,
    "pleasant": 2.0,
    "superb": 3.0,
    "delicious": 2.5,
    "friendly": 2.0,
    "charming": 2.0,
    "tasty": 2.5,
}

NEGATIVE_WORDS: Dict[str, float] = {
    "terrible": -3.5,
    "bad": -2.0,
    "awful": -3.0,
    "poor": -2.0,
    "horrible": -3.5,
    "disappointing": -2.5,
    "nasty": -2.5,
    "mediocre": -1.5,
    "bland": -1.5,
    "dreadful": -3.0,
    "rude": -2.5,
    "greasy": -1.5,
}

ASPECTS = [
    "service",
    "food",
    "staff",
    "menu",
    "price",
    "location",
    "ambience",
    "portions",
    "seating",
    "dessert",
]

FILLERS = ["really", "truly", "honestly", "definitely", "absolutely"]

_WORDS = {POSITIVE: sorted(POSITIVE_WORDS), NEGATIVE: sorted(NEGATIVE_WORDS)}


def synthetic_lexicon() -> Lexicon:
    """The lexicon the generated corpora are built against."""
    return Lexicon({**POSITIVE_WORDS, **NEGATIVE_WORDS}, min_strength=1.0)


def _flip(polarity: str) -> str:
    return NEGATIVE if polarity == POSITIVE else POSITIVE


def _easy_sentence(rng: random.Random, aspect: str, gold: str) -> str:
    word = rng.choice(_WORDS[gold])
    opposite_word = rng.choice(_WORDS[_flip(gold)])
    pick = rng.randrange(4)
    if pick == 0:
        return f"the {aspect} was {word} ."
    if pick == 1:
        return f"{word} {aspect} ."
    if pick == 2:
        # local negation: the flipped word lands back on gold
        return f"the {aspect} is not {opposite_word} ."
    return f"the {aspect} was {rng.choice(FILLERS)} {word} ."


def _connective_sentence(rng: random.Random, aspect: str, word_polarity: str) -> str:
    word = rng.choice(_WORDS[word_polarity])
    return f"if you ask me the {aspect} was {word} ."


def _long_negation_sentence(rng: random.Random, aspect: str, word_polarity: str) -> str:
    # negation at position 0, sentiment word five tokens later: outside the window
    word = rng.choice(_WORDS[word_polarity])
    return f"don't imagine anyone calling the {aspect} {word} ."


def _plain_relation_sentence(rng: random.Random, aspect: str) -> str:
    return f"the {aspect} left quite an impression ."


def _shift_relation_sentence(rng: random.Random, aspect: str) -> str:
    return f"however , the {aspect} left quite an impression ."


def _bare_sentence(rng: random.Random, aspect: str) -> str:
    return f"the {aspect} arrived exactly as described ."


def generate_synthetic(
    n_units: int,
    easy_fraction: float = 0.5,
    relation_density: float = 0.6,
    noise: float = 0.0,
    seed: int = 0,
) -> Corpus:
    """Corpus of n_units single-aspect sentences with gold labels planted."""
    if n_units <= 0:
        raise ValueError("n_units must be positive")
    for name, v in (
        ("easy_fraction", easy_fraction),
        ("relation_density", relation_density),
        ("noise", noise),
    ):
        if not 0.0 <= v <= 1.0:
            raise ValueError(f"{name} = {v} outside [0, 1]")
    rng = random.Random(seed)
    reviews = []
    made = 0
    while made < n_units:
        remaining = n_units - made
        if remaining >= 2 and rng.random() < relation_density:
            size = min(remaining, rng.choice((2, 2, 3)))
        else:
            size = 1
        rid = f"r{len(reviews):05d}"
        sentences = []
        prev_gold = None
        for j in range(size):
            aspect = rng.choice(ASPECTS)
            start = rng.choice((POSITIVE, NEGATIVE))
            easy = rng.random() < easy_fraction
            if easy:
                gold = prev_gold if prev_gold is not None else start
                text = _easy_sentence(rng, aspect, gold)
            else:
                mislead = rng.random() < noise
                if j > 0:
                    kind = rng.choice(("connective", "long_negation", "similar", "opposite"))
                elif size == 1 and rng.random() < 0.1:
                    kind = "bare"
                else:
                    kind = rng.choice(("connective", "long_negation"))
                if kind == "bare":
                    gold = POSITIVE
                    text = _bare_sentence(rng, aspect)
                elif kind == "connective":
                    gold = prev_gold if prev_gold is not None else start
                    word_polarity = _flip(gold) if mislead else gold
                    text = _connective_sentence(rng, aspect, word_polarity)
                elif kind == "long_negation":
                    gold = prev_gold if prev_gold is not None else start
                    word_polarity = _flip(gold) if mislead else gold
                    text = _long_negation_sentence(rng, aspect, word_polarity)
                elif kind == "similar":
                    gold = _flip(prev_gold) if mislead else prev_gold
                    text = _plain_relation_sentence(rng, aspect)
                else:
                    base = _flip(prev_gold)
                    gold = _flip(base) if mislead else base
                    text = _shift_relation_sentence(rng, aspect)
            sentences.append(
                {
                    "id": f"s{j}",
                    "text": text,
                    "aspects": [{"id": "a0", "term": aspect, "gold": gold}],
                }
            )
            prev_gold = gold
            made += 1
            if made >= n_units:
                break
        reviews.append({"id": rid, "sentences": sentences})
    return corpus_from_dict({"reviews": reviews}, source=f"<synthetic seed={seed}>")
