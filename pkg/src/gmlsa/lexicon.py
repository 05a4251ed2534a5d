"""Sentiment lexicons, connective lists, hit and negation detection, fallback scoring."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from importlib import resources
from typing import Dict, FrozenSet, Iterable, List, Optional, Tuple

from .corpus import NEGATIVE, POSITIVE

log = logging.getLogger(__name__)

MAX_ABS_SCORE = 4.0
DEFAULT_NEGATION_WINDOW = 3

CONNECTIVE_SECTIONS = ("contrast", "hypothetical", "condition", "negation", "shift")


class LexiconError(ValueError):
    """A lexicon or connectives file cannot be parsed."""


@dataclass
class Lexicon:
    entries: Dict[str, float]
    min_strength: float = 1.0

    def score(self, token: str) -> Optional[float]:
        return self.entries.get(token)

    def is_active(self, token: str) -> bool:
        """Active tokens participate in hit detection; weak entries stay loaded but inert."""
        s = self.entries.get(token)
        return s is not None and abs(s) >= self.min_strength


def load_lexicon(path, normalize: bool = False, min_strength: float = 1.0) -> Lexicon:
    entries: Dict[str, float] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.rstrip("\n")
            if not stripped.strip():
                continue
            if "\t" not in stripped:
                raise LexiconError(f"{path}:{lineno}: expected token<TAB>score")
            token, raw_score = stripped.split("\t", 1)
            token = token.strip().lower()
            try:
                score = float(raw_score)
            except ValueError as exc:
                raise LexiconError(f"{path}:{lineno}: unparsable score {raw_score!r}") from exc
            if token in entries:
                log.warning("%s:%d: duplicate lexicon token %r, last wins", path, lineno, token)
            entries[token] = score
    if normalize and entries:
        peak = max(abs(s) for s in entries.values())
        if peak > 0:
            scale = MAX_ABS_SCORE / peak
            entries = {t: s * scale for t, s in entries.items()}
    return Lexicon(entries, min_strength)


def save_lexicon(lexicon: Lexicon, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for token in sorted(lexicon.entries):
            fh.write(f"{token}\t{lexicon.entries[token]}\n")


class PhraseSet:
    """Set of token sequences with greedy longest-first matching."""

    def __init__(self, phrases: Iterable[Tuple[str, ...]]):
        self.phrases = frozenset(p for p in phrases if p)
        self._by_first: Dict[str, List[Tuple[str, ...]]] = {}
        for p in self.phrases:
            self._by_first.setdefault(p[0], []).append(p)
        for options in self._by_first.values():
            options.sort(key=len, reverse=True)

    def __len__(self) -> int:
        return len(self.phrases)

    def __iter__(self):
        return iter(self.phrases)

    def match_at(self, tokens: List[str], i: int) -> int:
        """Length of the longest phrase starting at position i, or 0."""
        for p in self._by_first.get(tokens[i], ()):
            if tuple(tokens[i : i + len(p)]) == p:
                return len(p)
        return 0

    def present(self, tokens: List[str]) -> bool:
        return any(self.match_at(tokens, i) for i in range(len(tokens)))

    def find(self, tokens: List[str]) -> List[Tuple[int, int]]:
        """Non-overlapping [start, end) occurrences, scanned left to right."""
        spans = []
        i = 0
        while i < len(tokens):
            n = self.match_at(tokens, i)
            if n:
                spans.append((i, i + n))
                i += n
            else:
                i += 1
        return spans


@dataclass
class ConnectiveLists:
    contrast: PhraseSet
    hypothetical: PhraseSet
    condition: PhraseSet
    negation: FrozenSet[str]
    shift: PhraseSet

    def hardness_connective_present(self, tokens: List[str]) -> bool:
        """Any contrast, hypothetical or condition connective anywhere in the sentence."""
        return (
            self.contrast.present(tokens)
            or self.hypothetical.present(tokens)
            or self.condition.present(tokens)
        )


def load_connectives(path=None) -> ConnectiveLists:
    """Parse the sectioned connectives resource; with no path, the packaged default."""
    if path is None:
        text = resources.files("gmlsa").joinpath("resources/connectives.ini").read_text("utf-8")
        source = "<default>"
    else:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
        source = str(path)
    sections: Dict[str, List[Tuple[str, ...]]] = {name: [] for name in CONNECTIVE_SECTIONS}
    current = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("[") and line.endswith("]"):
            name = line[1:-1].strip().lower()
            if name not in sections:
                raise LexiconError(f"{source}:{lineno}: unknown section [{name}]")
            current = name
            continue
        if current is None:
            raise LexiconError(f"{source}:{lineno}: entry before any section header")
        sections[current].append(tuple(line.lower().split()))
    negation = frozenset(tok for phrase in sections["negation"] for tok in phrase)
    return ConnectiveLists(
        contrast=PhraseSet(sections["contrast"]),
        hypothetical=PhraseSet(sections["hypothetical"]),
        condition=PhraseSet(sections["condition"]),
        negation=negation,
        shift=PhraseSet(sections["shift"]),
    )


@dataclass(frozen=True)
class SentimentHit:
    token_index: int
    word: str
    score: float
    negated: bool

    @property
    def raw_polarity(self) -> str:
        return POSITIVE if self.score > 0 else NEGATIVE

    @property
    def effective_polarity(self) -> str:
        if self.negated:
            return NEGATIVE if self.raw_polarity == POSITIVE else POSITIVE
        return self.raw_polarity

    @property
    def effective_score(self) -> float:
        return -self.score if self.negated else self.score


def find_sentiment_hits(
    tokens: List[str],
    lexicon: Lexicon,
    connectives: ConnectiveLists,
    window: int = DEFAULT_NEGATION_WINDOW,
) -> List[SentimentHit]:
    """One hit per active lexicon token; negated iff an odd number of negation
    tokens occurs within the `window` tokens immediately preceding it."""
    hits = []
    for i, tok in enumerate(tokens):
        if not lexicon.is_active(tok):
            continue
        lo = max(0, i - window)
        n_neg = sum(1 for j in range(lo, i) if tokens[j] in connectives.negation)
        hits.append(SentimentHit(i, tok, lexicon.entries[tok], n_neg % 2 == 1))
    return hits


def has_long_distance_negation(
    tokens: List[str],
    hits: List[SentimentHit],
    connectives: ConnectiveLists,
    window: int = DEFAULT_NEGATION_WINDOW,
    span: Optional[Tuple[int, int]] = None,
) -> bool:
    """True iff some negation token (within span, if given) falls outside the
    window preceding every sentiment hit considered."""
    start, end = span if span is not None else (0, len(tokens))
    positions = [h.token_index for h in hits if start <= h.token_index < end]
    for i in range(start, end):
        if tokens[i] not in connectives.negation:
            continue
        if not any(p - window <= i < p for p in positions):
            return True
    return False


@dataclass(frozen=True)
class FallbackLabel:
    polarity: str
    score: float
    default: bool


def fallback_label(hits: List[SentimentHit], clause: Tuple[int, int]) -> FallbackLabel:
    """Lexicon-sum polarity over the clause; empty or zero sums default to positive."""
    start, end = clause
    in_clause = [h for h in hits if start <= h.token_index < end]
    total = sum(h.effective_score for h in in_clause)
    return FallbackLabel(
        POSITIVE if total >= 0 else NEGATIVE, total, not in_clause or total == 0
    )
