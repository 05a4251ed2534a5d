"""Belief masses over two-proposition frames, Dempster combination, and the
support / certainty scoring that drives candidate selection."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Iterable, List, Optional, Sequence, Tuple

FRAME_SUPPORT = "support"  # propositions: labelable (L) vs unlabelable (U)
FRAME_CERTAINTY = "certainty"  # propositions: positive (L+) vs negative (L-)

MASS_TOL = 1e-9


class MassError(ValueError):
    """Mass components out of domain or frames mismatched."""


@dataclass(frozen=True)
class UncertaintyParams:
    """Discount put on the full frame by each evidence source.

    The *_rank values play the same role in the certainty masses used for
    candidate ranking; they default to the support-side values.
    """

    word_uncertainty: float = 0.4
    relation_uncertainty: float = 0.1
    word_rank_uncertainty: float = 0.4
    relation_rank_uncertainty: float = 0.1

    def validate(self) -> None:
        for name in (
            "word_uncertainty",
            "relation_uncertainty",
            "word_rank_uncertainty",
            "relation_rank_uncertainty",
        ):
            v = getattr(self, name)
            if not (0.0 < v <= 1.0):
                raise ValueError(f"{name} = {v} outside (0, 1]")


class TotalConflictError(ArithmeticError):
    """Dempster combination attempted on fully contradictory masses (K = 1)."""


@dataclass(frozen=True)
class Mass:
    """Basic belief assignment: m_a on the first proposition, m_b on the
    second, m_both on the whole frame; the empty set always carries 0.

    conflict accumulates 1 - prod(1 - K_step) over the combinations that
    produced this mass; a fresh single-source mass has conflict 0.
    """

    frame: str
    m_a: float
    m_b: float
    m_both: float
    conflict: float = 0.0

    def __post_init__(self):
        for name, v in (("m_a", self.m_a), ("m_b", self.m_b), ("m_both", self.m_both)):
            if v < -MASS_TOL or not math.isfinite(v):
                raise MassError(f"{name} = {v} out of range")
        total = self.m_a + self.m_b + self.m_both
        if abs(total - 1.0) > MASS_TOL:
            raise MassError(f"mass components sum to {total}, expected 1")

    def pignistic(self) -> float:
        """Point probability of the first proposition: its mass plus half the frame's."""
        return self.m_a + 0.5 * self.m_both


def vacuous(frame: str) -> Mass:
    return Mass(frame, 0.0, 0.0, 1.0)


def _check_unit_interval(name: str, v: float, closed_top: bool = False) -> None:
    hi_ok = v <= 1.0 if closed_top else v < 1.0
    if not (0.0 < v and hi_ok):
        top = "]" if closed_top else ")"
        raise MassError(f"{name} = {v} outside (0,1{top}")


def word_support_mass(positive_fraction: float, uncertainty: float) -> Mass:
    """Support mass of an observed word feature: the discounted majority
    proportion backs L, the minority backs U, the discount stays on the frame."""
    _check_unit_interval("positive_fraction", positive_fraction)
    _check_unit_interval("uncertainty", uncertainty, closed_top=True)
    p_hi = max(positive_fraction, 1.0 - positive_fraction)
    scale = 1.0 - uncertainty
    return Mass(FRAME_SUPPORT, scale * p_hi, scale * (1.0 - p_hi), uncertainty)


def relation_support_mass(accuracy: float, uncertainty: float) -> Mass:
    """Support mass of a relation whose other endpoint is labeled."""
    _check_unit_interval("accuracy", accuracy)
    _check_unit_interval("uncertainty", uncertainty, closed_top=True)
    scale = 1.0 - uncertainty
    return Mass(FRAME_SUPPORT, scale * accuracy, scale * (1.0 - accuracy), uncertainty)


def word_certainty_mass(positive_fraction: float, uncertainty: float) -> Mass:
    """Certainty mass of a word feature: discounted P on L+, complement on L-."""
    _check_unit_interval("positive_fraction", positive_fraction)
    _check_unit_interval("uncertainty", uncertainty, closed_top=True)
    scale = 1.0 - uncertainty
    return Mass(
        FRAME_CERTAINTY, scale * positive_fraction, scale * (1.0 - positive_fraction), uncertainty
    )


def relation_certainty_mass(weight: float, other_positive: bool, uncertainty: float) -> Mass:
    """Certainty mass of a relation with one labeled endpoint: the logistic of
    the tied weight gives the probability the target matches a positive
    endpoint; a negative endpoint mirrors it."""
    _check_unit_interval("uncertainty", uncertainty, closed_top=True)
    p = 1.0 / (1.0 + math.exp(-weight))
    if not other_positive:
        p = 1.0 - p
    scale = 1.0 - uncertainty
    return Mass(FRAME_CERTAINTY, scale * p, scale * (1.0 - p), uncertainty)


def combine(m1: Mass, m2: Mass) -> Mass:
    """Dempster's rule for the two-proposition frame.

    K collects the strictly contradictory products; surviving products are
    renormalized by 1 - K. Cumulative conflict composes multiplicatively so
    combining many sources reports 1 - prod(1 - K_step).
    """
    if m1.frame != m2.frame:
        raise MassError(f"cannot combine frames {m1.frame!r} and {m2.frame!r}")
    k = m1.m_a * m2.m_b + m1.m_b * m2.m_a
    norm = 1.0 - k
    if norm <= 0.0:
        raise TotalConflictError("total conflict: K = 1")
    a = (m1.m_a * m2.m_a + m1.m_a * m2.m_both + m1.m_both * m2.m_a) / norm
    b = (m1.m_b * m2.m_b + m1.m_b * m2.m_both + m1.m_both * m2.m_b) / norm
    both = (m1.m_both * m2.m_both) / norm
    conflict = 1.0 - (1.0 - m1.conflict) * (1.0 - m2.conflict) * (1.0 - k)
    return Mass(m1.frame, a, b, both, conflict)


def combine_all(masses: Sequence[Mass], frame: str) -> Mass:
    """Sequential combination in the given order; empty input yields the vacuous mass."""
    result = vacuous(frame)
    for m in masses:
        result = combine(result, m)
    return result


@dataclass(frozen=True)
class SupportScore:
    score: float
    conflict: float
    total_conflict: bool
    n_sources: int


def evidential_support(masses: Sequence[Mass]) -> SupportScore:
    """Combined belief that the variable can be confidently labeled.

    `masses` holds support masses of the variable's observed features only;
    with none of them the score is 0 by definition. Total conflict also
    scores 0, flagged so callers can treat the variable as maximally unsure.
    """
    if not masses:
        return SupportScore(0.0, 0.0, False, 0)
    try:
        combined = combine_all(masses, FRAME_SUPPORT)
    except TotalConflictError:
        return SupportScore(0.0, 1.0, True, len(masses))
    return SupportScore(combined.m_a, combined.conflict, False, len(masses))


def binary_entropy(p: float) -> float:
    """Natural-log entropy of a Bernoulli probability; endpoints give 0."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"probability {p} outside [0, 1]")
    if p == 0.0 or p == 1.0:
        return 0.0
    return -(p * math.log(p) + (1.0 - p) * math.log(1.0 - p))


def conflict_rank_key(mass: Mass, unit_id: int) -> Tuple[float, float, int]:
    """Sort key for candidate ranking: less conflict, then lower pignistic
    entropy, then lower unit id. Lowest key = most promising."""
    return (mass.conflict, binary_entropy(mass.pignistic()), unit_id)
