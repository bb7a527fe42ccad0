"""Property constraints: verdicts, relaxation and an exhaustive oracle over small sentences."""

import itertools

import pytest

from errors import DomainError, ValidationError
from properties import (
    HARD,
    SOFT,
    UNMATCHED,
    Kind,
    PropertyConstraint,
    SpanAssignment,
    Verdict,
    evaluate,
    relaxation_score,
)

TAGS = ("p0", "p1", "p2", "p3")
ORACLE_KINDS = (Kind.LINEARITY, Kind.ADJACENCY, Kind.COOCCURRENCE, Kind.EXCLUSION, Kind.REQUIREMENT)


def _constraint(kind, first, second, *, weight: str = HARD) -> PropertyConstraint:
    return PropertyConstraint(kind, (first, second), weight)


def _oracle(kind, first, second) -> Verdict:
    """Verdict from token position sets rather than span arithmetic."""
    a = set(range(first[0], first[1] + 1)) if first is not UNMATCHED else set()
    b = set(range(second[0], second[1] + 1)) if second is not UNMATCHED else set()
    if kind in (Kind.LINEARITY, Kind.ADJACENCY) and not (a and b):
        return Verdict.INAPPLICABLE
    if kind == Kind.LINEARITY:
        ok = all(i < j for i in a for j in b)
    elif kind == Kind.ADJACENCY:
        ok = any(j == i + 1 and i == max(a) and j == min(b) for i in a for j in b)
    elif kind == Kind.COOCCURRENCE:
        ok = bool(a) == bool(b)
    elif kind == Kind.EXCLUSION:
        ok = not (a and b)
    else:
        ok = not a or bool(b)
    return Verdict.SATISFIED if ok else Verdict.VIOLATED


def _assignments(length: int, participants: int):
    """Every non-overlapping assignment of spans (or UNMATCHED) to the first `participants` tags."""
    spans = [UNMATCHED] + [(s, e) for s in range(length) for e in range(s, length)]

    def extend(index, taken):
        if index == participants:
            yield {}
            return
        for span in spans:
            cells = set() if span is UNMATCHED else set(range(span[0], span[1] + 1))
            if cells & taken:
                continue
            for rest in extend(index + 1, taken | cells):
                yield {TAGS[index]: span, **rest}

    yield from extend(0, set())


def test_exhaustive_agreement_with_position_oracle() -> None:
    checked = 0
    for length in range(1, 7):
        for participants in range(2, 5):
            tags = TAGS[:participants]
            constraints = [_constraint(kind, a, b) for kind in ORACLE_KINDS
                           for a, b in itertools.permutations(tags, 2)]
            for spans in _assignments(length, participants):
                evaluation = evaluate(constraints, SpanAssignment(spans, length))
                for constraint, verdict in evaluation.rows():
                    first, second = (spans[tag] for tag in constraint.participants)
                    assert verdict == _oracle(constraint.kind, first, second), (constraint.label, spans)
                assert evaluation.hard_violations == evaluation.verdicts.count(Verdict.VIOLATED)
                checked += 1
    assert checked > 5000


def test_ditransitive_order() -> None:
    constraints = [
        _constraint(Kind.LINEARITY, "subj", "v"),
        _constraint(Kind.LINEARITY, "v", "obl"),
        _constraint(Kind.LINEARITY, "obl", "obj"),
        _constraint(Kind.ADJACENCY, "v", "obl"),
        _constraint(Kind.ADJACENCY, "obl", "obj"),
    ]
    good = SpanAssignment({"subj": (0, 0), "v": (1, 1), "obl": (2, 2), "obj": (3, 4)}, 5)
    assert set(evaluate(constraints, good).verdicts) == {Verdict.SATISFIED}

    flipped = SpanAssignment({"subj": (0, 0), "v": (1, 1), "obj": (2, 2), "obl": (3, 4)}, 5)
    verdicts = dict((c.label, v) for c, v in evaluate(constraints, flipped).rows())
    assert verdicts["lin(obl, obj)"] == Verdict.VIOLATED


def test_unmatched_participant_makes_lin_inapplicable() -> None:
    evaluation = evaluate([_constraint(Kind.LINEARITY, "a", "b")], SpanAssignment({"a": (0, 0)}, 3))
    assert evaluation.verdicts == (Verdict.INAPPLICABLE,)
    assert evaluation.hard_violations == 0


def test_dependency_is_always_inapplicable() -> None:
    constraint = PropertyConstraint(Kind.DEPENDENCY, ("a", "b", "c"))
    evaluation = evaluate([constraint], SpanAssignment({"a": (0, 0), "b": (1, 1)}, 2))
    assert evaluation.verdicts == (Verdict.INAPPLICABLE,)


def test_violation_counts_by_weight() -> None:
    constraints = [
        _constraint(Kind.LINEARITY, "a", "b"),
        _constraint(Kind.ADJACENCY, "a", "b", weight=SOFT),
        _constraint(Kind.EXCLUSION, "a", "b", weight=SOFT),
    ]
    evaluation = evaluate(constraints, SpanAssignment({"a": (2, 2), "b": (0, 0)}, 3))
    assert evaluation.hard_violations == 1
    assert evaluation.soft_violations == 2


def test_overlapping_spans_are_rejected() -> None:
    with pytest.raises(ValidationError):
        evaluate([_constraint(Kind.LINEARITY, "a", "b")], SpanAssignment({"a": (0, 2), "b": (2, 3)}, 4))
    with pytest.raises(ValidationError):
        SpanAssignment({"a": (0, 4)}, 3).validate()


def test_binary_kinds_take_two_participants() -> None:
    with pytest.raises(ValidationError):
        PropertyConstraint(Kind.LINEARITY, ("a", "b", "c"))
    with pytest.raises(ValidationError):
        PropertyConstraint(Kind.ADJACENCY, ("a", "b"), "medium")


def test_constraint_label() -> None:
    assert _constraint(Kind.ADJACENCY, "#1", "#3").label == "adj(#1, #3)"


@pytest.mark.parametrize(
    "hard, soft, expected",
    [(0, 0, 1.0), (1, 0, 0.0), (0, 2, 0.5625), (1, 3, 0.0)],
)
def test_relaxation_score(hard: int, soft: int, expected: float) -> None:
    constraints = [_constraint(Kind.EXCLUSION, "a", "b")] * hard \
        + [_constraint(Kind.EXCLUSION, "a", "b", weight=SOFT)] * soft
    evaluation = evaluate(constraints, SpanAssignment({"a": (0, 0), "b": (1, 1)}, 2))
    assert relaxation_score(evaluation, 0.25) == pytest.approx(expected)


def test_relaxation_score_is_monotone_in_penalty() -> None:
    constraints = [_constraint(Kind.EXCLUSION, "a", "b", weight=SOFT)] * 3
    evaluation = evaluate(constraints, SpanAssignment({"a": (0, 0), "b": (1, 1)}, 2))
    penalties = [step / 20 for step in range(1, 21)]
    scores = [relaxation_score(evaluation, penalty) for penalty in penalties]
    assert scores == sorted(scores, reverse=True)
    with pytest.raises(DomainError):
        relaxation_score(evaluation, 0.0)


def test_satisfied_linearity_orders_the_participants() -> None:
    for spans in _assignments(5, 4):
        matched = [tag for tag in TAGS if spans.get(tag, UNMATCHED) is not UNMATCHED]
        constraints = [_constraint(Kind.LINEARITY, a, b) for a, b in zip(matched, matched[1:])]
        evaluation = evaluate(constraints, SpanAssignment(spans, 5))
        if all(v == Verdict.SATISFIED for v in evaluation.verdicts):
            by_position = sorted(matched, key=lambda tag: spans[tag][0])
            assert by_position == matched
