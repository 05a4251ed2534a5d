"""Easy-instance identification: the lexicon-rule labeler that seeds inference."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple

from .corpus import AspectRef, AspectUnit, NEGATIVE, POSITIVE
from .lexicon import (
    ConnectiveLists,
    Lexicon,
    SentimentHit,
    find_sentiment_hits,
    has_long_distance_negation,
)

REASON_NO_SENTIMENT = "no_sentiment_word"
REASON_CONFLICT = "conflicting_polarities"
REASON_CONNECTIVE = "connective_present"
REASON_LONG_NEGATION = "long_distance_negation"


class NoEvidenceError(RuntimeError):
    """Zero easy instances found; gradual inference cannot start without evidence."""


@dataclass(frozen=True)
class EasyDecision:
    unit_id: int
    polarity: Optional[str]
    reasons: FrozenSet[str]

    @property
    def easy(self) -> bool:
        return not self.reasons


def classify_easiness(
    unit_id: int,
    tokens: List[str],
    clause: Tuple[int, int],
    hits: Sequence[SentimentHit],
    connectives: ConnectiveLists,
    window: int = 3,
) -> EasyDecision:
    """Easy iff the clause has sentiment hits of one effective polarity, the
    sentence carries no contrast/hypothetical/condition connective, and no
    negation in the clause sits outside its window (long-distance)."""
    start, end = clause
    clause_hits = [h for h in hits if start <= h.token_index < end]
    reasons = set()
    if not clause_hits:
        reasons.add(REASON_NO_SENTIMENT)
    else:
        polarities = {h.effective_polarity for h in clause_hits}
        if len(polarities) > 1:
            reasons.add(REASON_CONFLICT)
    if connectives.hardness_connective_present(tokens):
        reasons.add(REASON_CONNECTIVE)
    if has_long_distance_negation(tokens, clause_hits, connectives, window, span=clause):
        reasons.add(REASON_LONG_NEGATION)
    if reasons:
        return EasyDecision(unit_id, None, frozenset(reasons))
    return EasyDecision(unit_id, clause_hits[0].effective_polarity, frozenset())


@dataclass
class EvidenceSet:
    labels: Dict[int, str]
    source: str = "easy"


@dataclass
class EasyStats:
    total_units: int
    easy_units: int
    reason_histogram: Dict[str, int]
    accuracy: Optional[float]

    @property
    def proportion(self) -> float:
        return self.easy_units / self.total_units if self.total_units else 0.0

    def to_dict(self) -> dict:
        out = {
            "proportion": self.proportion,
            "easy_units": self.easy_units,
            "total_units": self.total_units,
            "reason_histogram": dict(sorted(self.reason_histogram.items())),
        }
        if self.accuracy is not None:
            out["accuracy"] = self.accuracy
        return out


def label_easy_instances(
    units: Sequence[AspectUnit],
    aspects: Dict[int, AspectRef],
    tokens_of: Dict[int, List[str]],
    clauses: Dict[int, Tuple[int, int]],
    hits_of: Dict[int, Sequence[SentimentHit]],
    connectives: ConnectiveLists,
    window: int = 3,
) -> Tuple[EvidenceSet, EasyStats, List[EasyDecision]]:
    """Classify every unit; collect the evidence set and Prop/Acc statistics."""
    decisions = []
    labels: Dict[int, str] = {}
    histogram: Counter = Counter()
    correct = 0
    with_gold = 0
    for unit in units:
        decision = classify_easiness(
            unit.unit_id,
            tokens_of[unit.unit_id],
            clauses[unit.unit_id],
            hits_of[unit.unit_id],
            connectives,
            window,
        )
        decisions.append(decision)
        if decision.easy:
            labels[unit.unit_id] = decision.polarity
            gold = aspects[unit.unit_id].gold
            if gold is not None:
                with_gold += 1
                correct += int(gold == decision.polarity)
        else:
            for reason in decision.reasons:
                histogram[reason] += 1
    if not labels:
        raise NoEvidenceError(
            "no easy instances found; check that the lexicon matches the corpus "
            "vocabulary and that min_strength is not filtering everything out"
        )
    accuracy = correct / with_gold if with_gold else None
    stats = EasyStats(len(units), len(labels), dict(histogram), accuracy)
    return EvidenceSet(labels), stats, decisions
