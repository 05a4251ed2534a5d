"""Subgraph weight learning and marginal estimation.

Gibbs chains alternate with gradient steps in the contrastive style: expected
sufficient statistics under the evidence-clamped chain minus those under the
free chain. The final marginal is the mean over post-burn-in sweeps of the
target's conditional probability given the rest of the chain, which has the
same expectation as the raw state fraction but much lower variance at the
default sweep budget. An exact enumeration oracle covers small subgraphs.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from numba import njit

from .evidence import binary_entropy
from .features import OPPOSITE, SIMILAR
from .graph import Subgraph

MAX_EXACT_UNLABELED = 15

KIND_ORDER = (SIMILAR, OPPOSITE)


class SubgraphTooLargeError(ValueError):
    """Exact enumeration refused: too many unlabeled variables."""


@dataclass
class InferenceConfig:
    burn_in_sweeps: int = 100
    sample_sweeps: int = 1000
    learning_epochs: int = 5
    step_size: float = 0.01
    l2: float = 0.01
    weight_clamp: float = 10.0
    seed: int = 0

    def validate(self) -> None:
        if self.burn_in_sweeps <= 0 or self.sample_sweeps <= 0 or self.learning_epochs <= 0:
            raise ValueError("sweep and epoch counts must be positive")
        if self.weight_clamp <= 0:
            raise ValueError("weight_clamp must be positive")


@dataclass
class LearnedWeights:
    word: Dict[int, float]
    similar: float
    opposite: float


@dataclass
class MarginalResult:
    probability: float
    entropy: float
    learned_weights: LearnedWeights


def entropy(p: float) -> float:
    """Natural-log binary entropy; endpoints return 0 by convention."""
    return binary_entropy(p)


@njit(cache=True, nogil=True)
def _run_chain(
    indptr,
    nbr,
    nbr_w,
    bias,
    free,
    state,
    uniforms,
    burn_in,
    n_sweeps,
    var_counts,
    edge_i,
    edge_j,
    agree_counts,
    target,
):
    """One Gibbs chain over the free variables.

    Post-burn-in it accumulates per-variable occupancy and per-edge agreement
    counts, and returns the summed conditional probability of `target` (pass
    target = -1 to skip). The conditional of a variable is the logistic of
    its word-factor bias plus sum of edge weights signed by neighbor state.
    """
    u = 0
    cond_sum = 0.0
    for s in range(burn_in + n_sweeps):
        record = s >= burn_in
        for k in range(free.shape[0]):
            v = free[k]
            field = bias[v]
            for t in range(indptr[v], indptr[v + 1]):
                field += nbr_w[t] * (2.0 * state[nbr[t]] - 1.0)
            p1 = 1.0 / (1.0 + np.exp(-field))
            if uniforms[u] < p1:
                state[v] = 1
            else:
                state[v] = 0
            u += 1
            if record and v == target:
                cond_sum += p1
        if record:
            for w in range(state.shape[0]):
                var_counts[w] += state[w]
            for e in range(edge_i.shape[0]):
                if state[edge_i[e]] == state[edge_j[e]]:
                    agree_counts[e] += 1
    return cond_sum


class CompiledSubgraph:
    """Array form of a Subgraph for the sampling kernel.

    Word factors collapse into per-variable bias terms (a word factor's
    log-potential gap between the two states is exactly its weight), so the
    inner loop only walks relation edges. The CSR adjacency stores edge ids,
    letting tied relation weights refresh in place between epochs.
    """

    def __init__(self, sub: Subgraph, kind_weights: Dict[str, float]):
        self.sub = sub
        self.n = len(sub.unit_ids)
        self.local = {u: i for i, u in enumerate(sub.unit_ids)}
        self.target_local = self.local[sub.target]

        self.clamp_mask = np.zeros(self.n, dtype=np.bool_)
        self.clamp_values = np.zeros(self.n, dtype=np.int8)
        for u, val in sub.clamped.items():
            i = self.local[u]
            self.clamp_mask[i] = True
            self.clamp_values[i] = val
        self.free_vars = np.array(
            [i for i in range(self.n) if not self.clamp_mask[i]], dtype=np.int64
        )
        self.all_vars = np.arange(self.n, dtype=np.int64)

        feats = []
        feat_slot: Dict[int, int] = {}
        wf_var = []
        wf_feat = []
        for u, feat in sub.word_factors:
            slot = feat_slot.setdefault(feat.feature_id, len(feats))
            if slot == len(feats):
                feats.append(feat)
            wf_var.append(self.local[u])
            wf_feat.append(slot)
        self.word_feats = feats
        self.word_weights = np.array([f.weight for f in feats], dtype=np.float64)
        self.wf_var = np.array(wf_var, dtype=np.int64)
        self.wf_feat = np.array(wf_feat, dtype=np.int64)

        self.kind_weights = np.array(
            [kind_weights[SIMILAR], kind_weights[OPPOSITE]], dtype=np.float64
        )
        edge_i = []
        edge_j = []
        edge_kind = []
        for a, b, rel in sub.relation_factors:
            edge_i.append(self.local[a])
            edge_j.append(self.local[b])
            edge_kind.append(KIND_ORDER.index(rel.kind))
        self.edge_i = np.array(edge_i, dtype=np.int64)
        self.edge_j = np.array(edge_j, dtype=np.int64)
        self.edge_kind = np.array(edge_kind, dtype=np.int64)

        degree = np.zeros(self.n + 1, dtype=np.int64)
        for e in range(len(self.edge_i)):
            degree[self.edge_i[e] + 1] += 1
            degree[self.edge_j[e] + 1] += 1
        self.indptr = np.cumsum(degree)
        total = int(self.indptr[-1])
        self.nbr = np.zeros(total, dtype=np.int64)
        self.nbr_edge = np.zeros(total, dtype=np.int64)
        cursor = self.indptr[:-1].copy()
        for e in range(len(self.edge_i)):
            i, j = self.edge_i[e], self.edge_j[e]
            self.nbr[cursor[i]] = j
            self.nbr_edge[cursor[i]] = e
            cursor[i] += 1
            self.nbr[cursor[j]] = i
            self.nbr_edge[cursor[j]] = e
            cursor[j] += 1

    def bias(self) -> np.ndarray:
        b = np.zeros(self.n, dtype=np.float64)
        if len(self.wf_var):
            np.add.at(b, self.wf_var, self.word_weights[self.wf_feat])
        return b

    def edge_weights(self) -> np.ndarray:
        return self.kind_weights[self.edge_kind]

    def nbr_weights(self) -> np.ndarray:
        if len(self.nbr_edge):
            return self.edge_weights()[self.nbr_edge]
        return np.zeros(0, dtype=np.float64)

    def snapshot(self) -> LearnedWeights:
        word = {
            f.feature_id: float(self.word_weights[slot])
            for slot, f in enumerate(self.word_feats)
        }
        return LearnedWeights(word, float(self.kind_weights[0]), float(self.kind_weights[1]))


def compile_subgraph(sub: Subgraph, kind_weights: Dict[str, float]) -> CompiledSubgraph:
    return CompiledSubgraph(sub, kind_weights)


def _init_state(comp: CompiledSubgraph, free: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    state = comp.clamp_values.copy()
    if len(free):
        state[free] = (rng.random(len(free)) < 0.5).astype(np.int8)
    return state


def _chain_stats(
    comp: CompiledSubgraph,
    free: np.ndarray,
    config: InferenceConfig,
    rng: np.random.Generator,
    bias: np.ndarray,
    nbr_w: np.ndarray,
    target: int = -1,
) -> Tuple[np.ndarray, np.ndarray, float]:
    """Run one chain; return mean occupancies, mean edge agreements, and the
    mean conditional probability of target (0.0 when target < 0)."""
    sweeps = config.burn_in_sweeps + config.sample_sweeps
    state = _init_state(comp, free, rng)
    uniforms = rng.random(sweeps * max(1, len(free)))
    var_counts = np.zeros(comp.n, dtype=np.int64)
    agree_counts = np.zeros(len(comp.edge_i), dtype=np.int64)
    cond_sum = _run_chain(
        comp.indptr,
        comp.nbr,
        nbr_w,
        bias,
        free,
        state,
        uniforms,
        config.burn_in_sweeps,
        config.sample_sweeps,
        var_counts,
        comp.edge_i,
        comp.edge_j,
        agree_counts,
        target,
    )
    scale = 1.0 / config.sample_sweeps
    return var_counts * scale, agree_counts * scale, cond_sum * scale


def learn_weights(comp: CompiledSubgraph, config: InferenceConfig) -> CompiledSubgraph:
    """Contrastive gradient ascent on the subgraph's log marginal likelihood.

    Word weights move individually; relation weights move tied per kind under
    their sign constraints (similar >= 0 >= opposite) and the global clamp.
    Deterministic given config.seed and the subgraph.
    """
    config.validate()
    if not comp.clamp_mask.any():
        raise ValueError("learning requires at least one evidence variable in the subgraph")
    rng = np.random.default_rng(np.random.SeedSequence([config.seed & (2**64 - 1), 1]))
    for _ in range(config.learning_epochs):
        bias = comp.bias()
        nbr_w = comp.nbr_weights()
        occ_clamped, agree_clamped, _ = _chain_stats(
            comp, comp.free_vars, config, rng, bias, nbr_w
        )
        occ_free, agree_free, _ = _chain_stats(comp, comp.all_vars, config, rng, bias, nbr_w)

        occ_diff = occ_clamped - occ_free
        if len(comp.word_weights):
            grad = np.zeros(len(comp.word_weights), dtype=np.float64)
            np.add.at(grad, comp.wf_feat, occ_diff[comp.wf_var])
            comp.word_weights += config.step_size * (grad - config.l2 * comp.word_weights)
            np.clip(
                comp.word_weights, -config.weight_clamp, config.weight_clamp, out=comp.word_weights
            )
        if len(comp.edge_i):
            agree_diff = agree_clamped - agree_free
            kind_grad = np.bincount(comp.edge_kind, weights=agree_diff, minlength=2)
            comp.kind_weights += config.step_size * (kind_grad - config.l2 * comp.kind_weights)
            np.clip(
                comp.kind_weights, -config.weight_clamp, config.weight_clamp, out=comp.kind_weights
            )
            comp.kind_weights[0] = max(comp.kind_weights[0], 0.0)
            comp.kind_weights[1] = min(comp.kind_weights[1], 0.0)
    return comp


def infer_marginal(comp: CompiledSubgraph, config: InferenceConfig) -> MarginalResult:
    """Marginal of the subgraph target with evidence clamped."""
    config.validate()
    rng = np.random.default_rng(np.random.SeedSequence([config.seed & (2**64 - 1), 2]))
    bias = comp.bias()
    nbr_w = comp.nbr_weights()
    _, _, probability = _chain_stats(
        comp, comp.free_vars, config, rng, bias, nbr_w, target=comp.target_local
    )
    return MarginalResult(probability, binary_entropy(probability), comp.snapshot())


def run_subgraph(
    sub: Subgraph, kind_weights: Dict[str, float], config: InferenceConfig
) -> MarginalResult:
    """Compile, learn, infer: the per-candidate unit of work in the engine loop."""
    comp = compile_subgraph(sub, kind_weights)
    learn_weights(comp, config)
    return infer_marginal(comp, config)


def exact_marginal(sub: Subgraph, target: Optional[int] = None) -> float:
    """Marginal by full enumeration over unlabeled assignments.

    Independent of the sampling path on purpose: works straight off the
    Subgraph factor lists. Refuses more than MAX_EXACT_UNLABELED unlabeled
    variables.
    """
    target = sub.target if target is None else target
    unlabeled = [u for u in sub.unit_ids if u not in sub.clamped]
    if target not in unlabeled:
        raise ValueError(f"target {target} is not an unlabeled member of the subgraph")
    if len(unlabeled) > MAX_EXACT_UNLABELED:
        raise SubgraphTooLargeError(
            f"{len(unlabeled)} unlabeled variables exceed the enumeration cap "
            f"of {MAX_EXACT_UNLABELED}"
        )
    pos = {u: i for i, u in enumerate(unlabeled)}
    n = len(unlabeled)
    rows = np.arange(1 << n, dtype=np.int64)
    states = ((rows[:, None] >> np.arange(n)) & 1).astype(np.float64)
    log_score = np.zeros(len(rows), dtype=np.float64)
    for u, feat in sub.word_factors:
        if u in sub.clamped:
            if sub.clamped[u] == 1:
                log_score += feat.weight
        else:
            log_score += feat.weight * states[:, pos[u]]
    for a, b, rel in sub.relation_factors:
        va, vb = sub.clamped.get(a), sub.clamped.get(b)
        if va is not None and vb is not None:
            if va == vb:
                log_score += rel.weight
        elif va is not None:
            log_score += rel.weight * (states[:, pos[b]] == va)
        elif vb is not None:
            log_score += rel.weight * (states[:, pos[a]] == vb)
        else:
            log_score += rel.weight * (states[:, pos[a]] == states[:, pos[b]])
    log_score -= log_score.max()
    weights = np.exp(log_score)
    return float(weights[states[:, pos[target]] == 1.0].sum() / weights.sum())
