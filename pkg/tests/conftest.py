"""Shared fixtures: the laptop running corpus, a small lexicon, embeddings."""

import pytest

from gmlsa.corpus import corpus_from_dict
from gmlsa.lexicon import Lexicon, load_connectives

# Four laptop sentences exercising both relation rules and both aspect modes.
RUNNING_CORPUS = {
    "reviews": [
        {
            "id": "r1",
            "sentences": [
                {
                    "id": "s1",
                    "text": "I like the battery that can last long time.",
                    "aspects": [{"id": "a1", "term": "battery", "gold": "positive"}],
                },
                {
                    "id": "s2",
                    "text": "However, the keyboard sits a little far back for me.",
                    "aspects": [{"id": "a1", "term": "keyboard", "gold": "negative"}],
                },
            ],
        },
        {
            "id": "r2",
            "sentences": [
                {
                    "id": "s1",
                    "text": "The laptop has a long battery life.",
                    "aspects": [{"id": "a1", "term": "battery", "gold": "positive"}],
                },
                {
                    "id": "s2",
                    "text": "It also can run my games smoothly.",
                    "aspects": [{"id": "a1", "category": "performance", "gold": "positive"}],
                },
            ],
        },
    ]
}

# One easy sentence with local negation, one long-distance negation, one
# polarity conflict: the three canonical hardness shapes.
EASY_EXAMPLE = "the screen is not good for carrying around in your bare hands"
HARD_NEGATION_EXAMPLE = "I don't know why anyone would want to write a great review about this battery"
HARD_CONFLICT_EXAMPLE = "I like this laptop, the only problem is that it can not last long time"

LEXICON_SCORES = {
    "like": 2.0,
    "long": 1.0,
    "smoothly": 2.0,
    "good": 3.0,
    "great": 3.0,
    "nice": 2.0,
    "problem": -2.0,
    "terrible": -3.0,
}

EMBEDDING_LINES = [
    "7 4",
    "performance 1.0 0.2 0.0 0.0",
    "games 0.9 0.35 0.0 0.0",
    "run 0.8 0.3 0.1 0.0",
    "battery 0.0 0.0 1.0 0.2",
    "keyboard 0.0 0.1 0.9 0.3",
    "screen 0.1 0.0 0.8 0.5",
    "smoothly 0.5 0.5 0.0 0.2",
]


@pytest.fixture(scope="session")
def connectives():
    return load_connectives()


@pytest.fixture
def lexicon():
    return Lexicon(dict(LEXICON_SCORES))


@pytest.fixture
def running_corpus():
    return corpus_from_dict(RUNNING_CORPUS)


@pytest.fixture
def embeddings_path(tmp_path):
    path = tmp_path / "vectors.txt"
    path.write_text("\n".join(EMBEDDING_LINES) + "\n", encoding="utf-8")
    return path
