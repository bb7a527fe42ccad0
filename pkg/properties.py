#!/usr/bin/env python3
"""
Property constraints (linearity, adjacency, cooccurrence, exclusion,
requirement) evaluated over the token spans of construction participants.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum

from errors import DomainError, ValidationError

logger = logging.getLogger(__name__)

HARD = "hard"
SOFT = "soft"
WEIGHTS = (HARD, SOFT)


class Kind(str, Enum):
    LINEARITY = "lin"
    ADJACENCY = "adj"
    COOCCURRENCE = "cooc"
    EXCLUSION = "excl"
    REQUIREMENT = "req"
    DEPENDENCY = "dep"


class Verdict(str, Enum):
    SATISFIED = "satisfied"
    VIOLATED = "violated"
    INAPPLICABLE = "inapplicable"


class _Unmatched:
    __slots__ = ()

    def __repr__(self):
        return "UNMATCHED"

    def __bool__(self):
        return False


UNMATCHED = _Unmatched()

_BINARY = (Kind.LINEARITY, Kind.ADJACENCY, Kind.EXCLUSION, Kind.COOCCURRENCE, Kind.REQUIREMENT)


@dataclass(frozen=True)
class PropertyConstraint:
    kind: Kind
    participants: tuple = field(compare=False)
    weight: str = HARD
    # where each participant sits in the owning construction's sign; tags are renumbered on dump
    paths: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))
        object.__setattr__(self, "participants", tuple(self.participants))
        if self.weight not in WEIGHTS:
            raise ValidationError([(self.label, f"weight must be hard or soft, got {self.weight!r}")])
        if self.kind in _BINARY and len(self.participants) != 2:
            raise ValidationError([(self.label, f"{self.kind.value} takes exactly 2 participants")])

    @property
    def label(self):
        return f"{self.kind.value}({', '.join(self.participants)})"


class SpanAssignment:
    """Participant tag -> inclusive 0-based (start, end) token span, or UNMATCHED."""

    def __init__(self, spans=None, length=None):
        self.spans = dict(spans or {})
        self.length = length

    def span(self, tag):
        return self.spans.get(tag, UNMATCHED)

    def validate(self):
        issues = []
        matched = [(tag, span) for tag, span in self.spans.items() if span is not UNMATCHED]
        for tag, (start, end) in matched:
            if start < 0 or end < start or (self.length is not None and end >= self.length):
                issues.append((tag, f"span {start}-{end} outside the sentence"))
        for i, (tag_a, (start_a, end_a)) in enumerate(matched):
            for tag_b, (start_b, end_b) in matched[i + 1:]:
                if start_a <= end_b and start_b <= end_a:
                    issues.append((tag_a, f"span {start_a}-{end_a} overlaps {tag_b} {start_b}-{end_b}"))
        if issues:
            raise ValidationError(issues)


@dataclass(frozen=True)
class PropertyEvaluation:
    constraints: tuple
    verdicts: tuple
    hard_violations: int
    soft_violations: int

    def rows(self):
        return list(zip(self.constraints, self.verdicts))


def _judge(kind, first, second):
    matched_first = first is not UNMATCHED
    matched_second = second is not UNMATCHED
    if kind == Kind.DEPENDENCY:
        return Verdict.INAPPLICABLE
    if kind in (Kind.LINEARITY, Kind.ADJACENCY):
        if not (matched_first and matched_second):
            return Verdict.INAPPLICABLE
        if kind == Kind.LINEARITY:
            ok = first[1] < second[0]
        else:
            ok = first[1] + 1 == second[0]
    elif kind == Kind.COOCCURRENCE:
        ok = matched_first == matched_second
    elif kind == Kind.EXCLUSION:
        ok = not (matched_first and matched_second)
    else:
        ok = (not matched_first) or matched_second
    return Verdict.SATISFIED if ok else Verdict.VIOLATED


def evaluate(constraints, assignment):
    """One verdict per constraint, in order, plus hard/soft violation counts."""
    assignment.validate()
    verdicts = []
    hard = soft = 0
    for constraint in constraints:
        spans = [assignment.span(tag) for tag in constraint.participants]
        if constraint.kind == Kind.DEPENDENCY:
            verdict = Verdict.INAPPLICABLE
        else:
            verdict = _judge(constraint.kind, spans[0], spans[1])
        if verdict == Verdict.VIOLATED:
            if constraint.weight == HARD:
                hard += 1
            else:
                soft += 1
        verdicts.append(verdict)
    return PropertyEvaluation(tuple(constraints), tuple(verdicts), hard, soft)


def relaxation_score(evaluation, soft_penalty):
    """0 with any hard violation, else (1 - soft_penalty) per soft violation."""
    if not 0.0 < soft_penalty <= 1.0:
        raise DomainError(f"soft_penalty must lie in (0, 1], got {soft_penalty}")
    if evaluation.hard_violations > 0:
        return 0.0
    score = 1.0
    for _ in range(evaluation.soft_violations):
        score *= 1.0 - soft_penalty
    return score
