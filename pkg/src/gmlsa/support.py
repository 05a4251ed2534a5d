"""Evidential support over the whole unlabeled pool, maintained incrementally.

Direct per-variable mass assembly lives here too; the tracker is the fast
path the engine loop uses, cross-checked against the direct path in tests.
"""

from __future__ import annotations

from typing import Dict, List, Optional

import numpy as np

from .evidence import (
    FRAME_CERTAINTY,
    Mass,
    UncertaintyParams,
    combine_all,
    relation_certainty_mass,
    relation_support_mass,
    word_certainty_mass,
    word_support_mass,
)
from .features import OPPOSITE, SIMILAR, FeatureIndex, FeatureStats


def support_masses(
    unit_id: int,
    index: FeatureIndex,
    stats: FeatureStats,
    labels: Dict[int, int],
    params: UncertaintyParams,
) -> List[Mass]:
    """Support masses of the unit's observed features, in feature-id order."""
    masses = []
    for feat in sorted(index.word_features_of(unit_id), key=lambda f: f.feature_id):
        if stats.observed(feat):
            masses.append(
                word_support_mass(stats.positive_fraction(feat), params.word_uncertainty)
            )
    for rel in sorted(index.relations_of(unit_id), key=lambda r: r.feature_id):
        if labels.get(rel.other(unit_id)) is not None:
            masses.append(
                relation_support_mass(
                    stats.relation_accuracy(rel.kind), params.relation_uncertainty
                )
            )
    return masses


def certainty_masses(
    unit_id: int,
    index: FeatureIndex,
    stats: FeatureStats,
    labels: Dict[int, int],
    params: UncertaintyParams,
) -> Mass:
    """Combined polarity-certainty mass of the unit's observed features."""
    masses = []
    for feat in sorted(index.word_features_of(unit_id), key=lambda f: f.feature_id):
        if stats.observed(feat):
            masses.append(
                word_certainty_mass(stats.positive_fraction(feat), params.word_rank_uncertainty)
            )
    for rel in sorted(index.relations_of(unit_id), key=lambda r: r.feature_id):
        other_value = labels.get(rel.other(unit_id))
        if other_value is not None:
            masses.append(
                relation_certainty_mass(
                    rel.weight, other_value == 1, params.relation_rank_uncertainty
                )
            )
    return combine_all(masses, FRAME_CERTAINTY)


def _mass_logs(m: Mass) -> np.ndarray:
    """Log commonalities of (first proposition, second proposition, frame)."""
    return np.log(np.array([m.m_a + m.m_both, m.m_b + m.m_both, m.m_both]))


class SupportTracker:
    """Per-variable running commonality products over observed support masses.

    The Dempster-combined belief in "labelable" needs only three sums per
    variable: log q_L = sum of log(m_L + m_frame) over observed sources, log
    q_U likewise, and log q_frame = sum of log m_frame; then belief =
    (q_L - q_frame) / (q_L + q_U - q_frame). The commonality form is order
    independent, which is what makes incremental maintenance exact. A new
    label touches the affected features' unlabeled bearers, plus one O(n)
    vectorized adjustment per relation kind whose accuracy moved.
    """

    def __init__(
        self,
        index: FeatureIndex,
        stats: FeatureStats,
        params: UncertaintyParams,
        n_units: int,
        labels: Dict[int, int],
    ):
        self.index = index
        self.stats = stats
        self.params = params
        self.n = n_units
        self.labeled = np.zeros(n_units, dtype=bool)
        for uid in labels:
            self.labeled[uid] = True
        self.logq = np.zeros((3, n_units), dtype=np.float64)
        self.observed_sources = np.zeros(n_units, dtype=np.int64)
        self.kind_obs = {
            SIMILAR: np.zeros(n_units, dtype=np.int64),
            OPPOSITE: np.zeros(n_units, dtype=np.int64),
        }
        self.kind_logs = {kind: self._kind_mass_logs(kind) for kind in (SIMILAR, OPPOSITE)}
        self._bearers: Dict[int, np.ndarray] = {}
        self.word_logs: Dict[int, Optional[np.ndarray]] = {}
        for feat in index.word_features:
            bearers = np.fromiter(sorted(feat.bearers), dtype=np.int64, count=len(feat.bearers))
            self._bearers[feat.feature_id] = bearers
            if stats.observed(feat):
                logs = self._word_mass_logs(feat)
                self.word_logs[feat.feature_id] = logs
                targets = self._unlabeled(bearers)
                self.logq[:, targets] += logs[:, None]
                self.observed_sources[targets] += 1
            else:
                self.word_logs[feat.feature_id] = None
        for rel in index.relations:
            a, b = rel.units
            if self.labeled[a] != self.labeled[b]:
                unl = b if self.labeled[a] else a
                self.kind_obs[rel.kind][unl] += 1
                self.logq[:, unl] += self.kind_logs[rel.kind]
                self.observed_sources[unl] += 1

    def _word_mass_logs(self, feat) -> np.ndarray:
        return _mass_logs(
            word_support_mass(self.stats.positive_fraction(feat), self.params.word_uncertainty)
        )

    def _kind_mass_logs(self, kind: str) -> np.ndarray:
        return _mass_logs(
            relation_support_mass(
                self.stats.relation_accuracy(kind), self.params.relation_uncertainty
            )
        )

    def _unlabeled(self, ids: np.ndarray) -> np.ndarray:
        return ids[~self.labeled[ids]] if len(ids) else ids

    def on_label(self, unit_id: int, value: int) -> None:
        """Fold one new label in; call after FeatureStats.update for the same label."""
        self.labeled[unit_id] = True
        for feat in self.index.word_features_of(unit_id):
            new_logs = self._word_mass_logs(feat)
            old_logs = self.word_logs[feat.feature_id]
            targets = self._unlabeled(self._bearers[feat.feature_id])
            if old_logs is None:
                self.logq[:, targets] += new_logs[:, None]
                self.observed_sources[targets] += 1
            else:
                self.logq[:, targets] += (new_logs - old_logs)[:, None]
            self.word_logs[feat.feature_id] = new_logs
        for kind in (SIMILAR, OPPOSITE):
            new_logs = self._kind_mass_logs(kind)
            delta = new_logs - self.kind_logs[kind]
            if np.any(delta != 0.0):
                self.logq += delta[:, None] * self.kind_obs[kind][None, :]
                self.kind_logs[kind] = new_logs
        for rel in self.index.relations_of(unit_id):
            other = rel.other(unit_id)
            if not self.labeled[other]:
                self.kind_obs[rel.kind][other] += 1
                self.logq[:, other] += self.kind_logs[rel.kind]
                self.observed_sources[other] += 1

    def scores(self) -> np.ndarray:
        """Support score per unit id; labeled and featureless units score 0."""
        mx = self.logq.max(axis=0)
        q = np.exp(self.logq - mx[None, :])
        denom = q[0] + q[1] - q[2]
        with np.errstate(invalid="ignore", divide="ignore"):
            out = np.where(denom > 0.0, (q[0] - q[2]) / np.maximum(denom, 1e-300), 0.0)
        out[self.observed_sources == 0] = 0.0
        out[self.labeled] = 0.0
        return out
