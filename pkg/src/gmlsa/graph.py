"""Global factor graph over polarity variables: potentials, labeling state,
and per-target subgraph extraction."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Set, Tuple

import numpy as np

from .corpus import AspectUnit, NEGATIVE, POSITIVE
from .easy import EvidenceSet
from .features import FeatureIndex, RelationalFeature, WordFeature

EVIDENCE = "evidence"
INFERENCE = "inference"

METHOD_EASY = "easy"
METHOD_INFERRED = "inferred"
METHOD_FALLBACK = "fallback"

POLARITY_VALUE = {POSITIVE: 1, NEGATIVE: 0}
VALUE_POLARITY = {1: POSITIVE, 0: NEGATIVE}


class GraphError(RuntimeError):
    """Structural inconsistency or illegal labeling in the factor graph."""


@dataclass
class PolarityVariable:
    unit_id: int
    kind: str
    value: Optional[int] = None
    probability: Optional[float] = None
    entropy: Optional[float] = None
    labeled_at: Optional[int] = None
    method: Optional[str] = None

    @property
    def labeled(self) -> bool:
        return self.value is not None


def word_potential(feature: WordFeature, value: int) -> float:
    """exp(weight) when the bearer is positive, 1 otherwise."""
    if value not in (0, 1):
        raise GraphError(f"polarity value must be 0 or 1, got {value!r}")
    return math.exp(feature.weight) if value == 1 else 1.0


def relational_potential(feature: RelationalFeature, value_i: int, value_j: int) -> float:
    """exp(weight) when the endpoints agree, 1 otherwise; symmetric."""
    if value_i not in (0, 1) or value_j not in (0, 1):
        raise GraphError(f"polarity values must be 0 or 1, got ({value_i!r}, {value_j!r})")
    return math.exp(feature.weight) if value_i == value_j else 1.0


@dataclass
class Subgraph:
    """Target-centric slice of the graph; closed under factor scopes.

    clamped maps every labeled member (evidence or gradually labeled) to its
    fixed value. Factors reference the shared feature objects, so weights
    seen here always reflect the current global state.
    """

    target: int
    unit_ids: List[int]
    clamped: Dict[int, int]
    word_factors: List[Tuple[int, WordFeature]]
    relation_factors: List[Tuple[int, int, RelationalFeature]]

    @property
    def unlabeled_ids(self) -> List[int]:
        return [u for u in self.unit_ids if u not in self.clamped]

    def score(self, assignment: Dict[int, int]) -> float:
        """Unnormalized potential product of a full assignment (tests and
        diagnostics; inference uses vectorized equivalents)."""
        total = 1.0
        for u, feat in self.word_factors:
            total *= word_potential(feat, assignment[u])
        for a, b, rel in self.relation_factors:
            total *= relational_potential(rel, assignment[a], assignment[b])
        return total


class FactorGraph:
    """One polarity variable per aspect unit plus the factors of a FeatureIndex.

    Evidence variables are fixed at build time; inference variables get their
    value exactly once and from then on enter subgraphs as evidence.
    """

    def __init__(
        self,
        units: Sequence[AspectUnit],
        evidence: EvidenceSet,
        index: FeatureIndex,
        hops: int = 2,
        bearer_cap: int = 40,
        seed: int = 0,
    ):
        self.index = index
        self.hops = hops
        self.bearer_cap = bearer_cap
        self.seed = seed
        self.variables: List[PolarityVariable] = []
        for unit in units:
            if unit.unit_id != len(self.variables):
                raise GraphError("unit ids must be dense and in order")
            if unit.unit_id in evidence.labels:
                value = POLARITY_VALUE[evidence.labels[unit.unit_id]]
                self.variables.append(
                    PolarityVariable(unit.unit_id, EVIDENCE, value, method=METHOD_EASY)
                )
            else:
                self.variables.append(PolarityVariable(unit.unit_id, INFERENCE))
        n = len(self.variables)
        for feat in index.word_features:
            for bearer in feat.bearers:
                if not 0 <= bearer < n:
                    raise GraphError(
                        f"word feature {feat.feature_id} bearer {bearer} has no variable"
                    )
        for rel in index.relations:
            for endpoint in rel.units:
                if not 0 <= endpoint < n:
                    raise GraphError(
                        f"relation {rel.feature_id} endpoint {endpoint} has no variable"
                    )

    def variable(self, unit_id: int) -> PolarityVariable:
        return self.variables[unit_id]

    def unlabeled_ids(self) -> List[int]:
        return [v.unit_id for v in self.variables if v.value is None]

    def labels(self) -> Dict[int, int]:
        return {v.unit_id: v.value for v in self.variables if v.value is not None}

    def label(
        self,
        unit_id: int,
        value: int,
        method: str,
        iteration: Optional[int] = None,
        probability: Optional[float] = None,
        entropy: Optional[float] = None,
    ) -> None:
        var = self.variables[unit_id]
        if var.value is not None:
            raise GraphError(f"variable {unit_id} is already labeled; labels are final")
        if value not in (0, 1):
            raise GraphError(f"invalid polarity value {value!r}")
        var.value = value
        var.method = method
        var.labeled_at = iteration
        var.probability = probability
        var.entropy = entropy

    def extract_subgraph(self, target: int) -> Subgraph:
        """Target, its relational neighborhood within the hop bound, and the
        bearers of the target's word features. The bearer pool is held under
        the cap so per-candidate cost stays flat as labels accumulate: labeled
        bearers fill the quota first, then a deterministic sample of unlabeled
        ones takes the remaining room."""
        var = self.variables[target]
        if var.kind != INFERENCE or var.value is not None:
            raise GraphError(f"subgraph target {target} must be an unlabeled inference variable")
        included: Set[int] = {target}
        frontier = [target]
        for _ in range(self.hops):
            nxt = []
            for u in frontier:
                for rel in self.index.relations_of(u):
                    other = rel.other(u)
                    if other not in included:
                        included.add(other)
                        nxt.append(other)
            frontier = nxt
        pool: Set[int] = set()
        for feat in self.index.word_features_of(target):
            pool.update(feat.bearers)
        pool -= included
        labeled_pool = sorted(u for u in pool if self.variables[u].value is not None)
        unlabeled_pool = sorted(u for u in pool if self.variables[u].value is None)
        if len(pool) > self.bearer_cap:
            rng = np.random.default_rng(
                np.random.SeedSequence([self.seed, 929, target])
            )
            if len(labeled_pool) >= self.bearer_cap:
                picked = rng.choice(len(labeled_pool), size=self.bearer_cap, replace=False)
                labeled_pool = [labeled_pool[i] for i in sorted(picked)]
                unlabeled_pool = []
            else:
                room = self.bearer_cap - len(labeled_pool)
                picked = rng.choice(len(unlabeled_pool), size=room, replace=False)
                unlabeled_pool = [unlabeled_pool[i] for i in sorted(picked)]
        included.update(labeled_pool)
        included.update(unlabeled_pool)
        members = sorted(included)
        word_factors = []
        for u in members:
            for feat in self.index.word_features_of(u):
                word_factors.append((u, feat))
        relation_factors = []
        seen = set()
        for u in members:
            for rel in self.index.relations_of(u):
                if rel.feature_id in seen:
                    continue
                a, b = rel.units
                if a in included and b in included:
                    seen.add(rel.feature_id)
                    relation_factors.append((a, b, rel))
        clamped = {
            u: self.variables[u].value for u in members if self.variables[u].value is not None
        }
        return Subgraph(target, members, clamped, word_factors, relation_factors)

    def dump(self) -> dict:
        """JSON-ready adjacency listing for diagnostics."""
        out = []
        for var in self.variables:
            out.append(
                {
                    "unit_id": var.unit_id,
                    "kind": var.kind,
                    "value": var.value,
                    "method": var.method,
                    "word_features": [
                        {"feature_id": f.feature_id, "surface": list(f.surface),
                         "negated": f.negated, "weight": f.weight}
                        for f in self.index.word_features_of(var.unit_id)
                    ],
                    "relations": [
                        {"feature_id": r.feature_id, "kind": r.kind, "rule": r.rule,
                         "other": r.other(var.unit_id), "weight": r.weight}
                        for r in self.index.relations_of(var.unit_id)
                    ],
                }
            )
        return {"variables": out}
