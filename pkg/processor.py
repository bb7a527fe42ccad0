#!/usr/bin/env python3
"""
Incremental dual-route interpreter.

Per token: scan -> try_direct_route -> compose -> try_direct_route. Scanning
instantiates lexical constructions and re-derives every cue; the direct route
recognises a construction once it is cued, none of its hard cues fails, and
its activation scaled by the property relaxation score reaches the threshold;
composition loose-unifies saturated signs into open argument slots. Events fire as soon as their trigger holds and their target exists.
Every step is appended to the trace.
"""

import json
import logging
import re
from dataclasses import dataclass, field, replace

from activation import (
    LEXICAL,
    SYNTACTIC,
    ActivationRecord,
    CueMatch,
    base_activation,
    lexical_F,
    recompute,
    semantic_coherence,
)
from avm_codec import dump_avm
from errors import (
    EmptyInput,
    NoScorableRoles,
    SimilarityBelowThreshold,
    UnificationFailure,
    ValidationError,
    format_path,
)
from feature_structure import (
    ABSENT,
    TOP,
    FeatureList,
    FeatureStructure,
    Number,
    Provenance,
    Unspecified,
    VectorRef,
    embed,
    first_path,
    iter_nodes,
    loose_unify,
    mark,
    resolve_path,
    substitute,
    subsumes,
    unifiable,
    with_feature,
)
from grammar_model import CONSTRUCTION, FRAME, apply_event, expectation_paths, surface_word
from properties import (
    UNMATCHED,
    PropertyConstraint,
    PropertyEvaluation,
    SpanAssignment,
    Verdict,
    evaluate,
    relaxation_score,
)

logger = logging.getLogger(__name__)

DIRECT = "direct"
COMPOSITIONAL = "compositional"

TRACE_KINDS = ("SCAN", "CUE", "ACTIVATE", "PROPERTY", "FIRE-EVENT", "DIRECT", "COMPOSE", "CLASH", "EXPECT")

_WORD = re.compile(r"[^\W_]+(?:'[^\W_]+)*")


@dataclass(frozen=True)
class Token:
    surface: str
    index: int
    surprisal_multiplier: float = 1.0


def tokenize(text):
    """Lower-cased words; whitespace and punctuation separate them."""
    return [Token(word, index) for index, word in enumerate(_WORD.findall(text.lower()))]


@dataclass(frozen=True)
class TraceRecord:
    index: int
    kind: str
    payload: dict

    def line(self):
        body = json.dumps(self.payload, sort_keys=True, ensure_ascii=False)
        return f"{self.index:04d} {self.kind} {body}"

    def as_dict(self):
        return {"index": self.index, "kind": self.kind, "payload": self.payload}


@dataclass(eq=False)
class Instance:
    """One use of a construction (or frame) in the sentence.

    `observed` holds only what the input contributed; `structure` adds the
    expectations of the events fired on this instance.
    """

    uid: int
    name: str
    observed: FeatureStructure
    position: int
    span: tuple
    route: str = COMPOSITIONAL
    category: str = CONSTRUCTION
    version: int = 0
    integrated: bool = False
    consumed_by: int = None
    events: list = field(default_factory=list)
    daughters: list = field(default_factory=list)
    structure: FeatureStructure = None

    def __post_init__(self):
        if self.structure is None:
            self.structure = self.observed

    @property
    def label(self):
        return f"{self.name}@{self.position}"


@dataclass
class ParseState:
    tokens: list = field(default_factory=list)
    instances: list = field(default_factory=list)
    records: dict = field(default_factory=dict)
    satisfied: dict = field(default_factory=dict)
    verdicts: dict = field(default_factory=dict)
    activated: list = field(default_factory=list)
    named: list = field(default_factory=list)
    fired: list = field(default_factory=list)
    recognitions: list = field(default_factory=list)
    frame_instances: dict = field(default_factory=dict)
    completions: dict = field(default_factory=dict)
    attempts: set = field(default_factory=set)
    reported: set = field(default_factory=set)
    trace: list = field(default_factory=list)
    index: int = 0
    _next_uid: int = 0

    def new_uid(self):
        self._next_uid += 1
        return self._next_uid

    def log(self, kind, payload):
        if kind not in TRACE_KINDS:
            raise ValueError(f"unknown trace record kind {kind!r}")
        self.trace.append(TraceRecord(self.index, kind, payload))

    def roots(self):
        return [inst for inst in self.instances if not inst.integrated]

    def instance(self, uid):
        for inst in self.instances:
            if inst.uid == uid:
                return inst
        return None


@dataclass
class Interpretation:
    tokens: list
    meaning: FeatureStructure
    route_labels: dict
    scores: dict
    residue: list
    recognitions: list
    activated: list
    activated_frames: list
    bindings: dict
    trace: list
    records: dict = field(default_factory=dict)

    def trace_lines(self):
        return [record.line() for record in self.trace]

    def to_dict(self):
        meaning, _ = dump_avm(self.meaning)
        return {
            "sentence": " ".join(token.surface for token in self.tokens),
            "tokens": [token.surface for token in self.tokens],
            "meaning": meaning,
            "route_labels": self.route_labels,
            "scores": self.scores,
            "residue": self.residue,
            "recognitions": self.recognitions,
            "activated": self.activated,
            "activated_frames": self.activated_frames,
            "bindings": self.bindings,
            "records": self.records,
            "trace": [record.as_dict() for record in self.trace],
        }


# ---------------------------------------------------------------------------
# Small helpers
# ---------------------------------------------------------------------------

def _observe(structure):
    return mark(structure, [structure.node_id], Provenance.OBSERVED)


def _slots(structure):
    arg_st = structure.get("arg-st")
    return list(arg_st.items) if isinstance(arg_st, FeatureList) else []


def _filled(slot):
    return isinstance(slot, FeatureStructure) and slot.provenance == Provenance.OBSERVED


def _saturated(inst):
    return all(_filled(slot) for slot in _slots(inst.observed))


def _span_of(slot):
    span = slot.get("span") if isinstance(slot, FeatureStructure) else None
    if isinstance(span, FeatureList) and len(span.items) == 2 \
            and all(isinstance(item, Number) for item in span.items):
        return (span.items[0].value, span.items[1].value)
    return UNMATCHED


def _as_filler(inst):
    start, end = inst.span
    return with_feature(inst.observed, "span", FeatureList([Number(start), Number(end)]))


def _clash_payload(error):
    payload = {"path": format_path(error.path), "reason": str(error)}
    if isinstance(error, SimilarityBelowThreshold):
        payload["score"] = error.score
    return payload


def _frames_in(structure):
    found = resolve_path(structure, ("meaning", "sem", "frames"))
    if not isinstance(found, FeatureList):
        return []
    return [item for item in found.items if isinstance(item, FeatureStructure)]


# ---------------------------------------------------------------------------
# Spans and cues
# ---------------------------------------------------------------------------

def find_anchor(state, grammar, construction):
    """First free instance whose category unifies with the construction's and whose arg-st has the same length."""
    category = construction.category
    arg_st = construction.arg_st
    if not isinstance(category, FeatureStructure) or arg_st is None:
        return None
    for inst in state.roots():
        if inst.route == DIRECT or inst.category != CONSTRUCTION:
            continue
        theirs = resolve_path(inst.observed, ("form", "syn", "cat"))
        if isinstance(theirs, FeatureStructure) and len(_slots(inst.observed)) == len(arg_st.items) \
                and unifiable(category, theirs, grammar.hierarchy):
            return inst
    return None


def canonical_constraints(construction):
    """Property constraints with participants renamed to the first path of their node."""
    renamed = []
    for constraint in construction.properties:
        labels = []
        for path in constraint.paths:
            node = resolve_path(construction.sign, path)
            labels.append(format_path(first_path(construction.sign, node.node_id)))
        renamed.append(PropertyConstraint(constraint.kind, tuple(labels), constraint.weight, constraint.paths))
    return renamed


def assign_spans(state, grammar, construction):
    """SpanAssignment over the construction's participants, plus the anchor it used."""
    anchor = find_anchor(state, grammar, construction)
    category = construction.category
    slots = construction.arg_st.items if construction.arg_st is not None else ()
    anchor_slots = _slots(anchor.observed) if anchor is not None else []
    spans, used = {}, set()
    for constraint in canonical_constraints(construction):
        for label, path in zip(constraint.participants, constraint.paths):
            if label in spans:
                continue
            node = resolve_path(construction.sign, path)
            span = UNMATCHED
            if len(path) == 3 and path[:2] == ("form", "surface"):
                word = surface_word(node)
                for token in state.tokens:
                    if token.surface == word and token.index not in used:
                        used.add(token.index)
                        span = (token.index, token.index)
                        break
            elif node is category and anchor is not None:
                span = (anchor.position, anchor.position)
            else:
                for k, slot in enumerate(slots):
                    if slot is node and k < len(anchor_slots) and _filled(anchor_slots[k]):
                        span = _span_of(anchor_slots[k])
                        break
            spans[label] = span
    return SpanAssignment(spans, len(state.tokens)), anchor


def property_evaluation(state, grammar, construction):
    """PropertyEvaluation of a construction's constraints over the current spans."""
    constraints = canonical_constraints(construction)
    assignment, _ = assign_spans(state, grammar, construction)
    try:
        return evaluate(constraints, assignment)
    except ValidationError as e:
        logger.debug("Span assignment for %s rejected: %s", construction.name, e)
        return PropertyEvaluation(tuple(constraints), (Verdict.INAPPLICABLE,) * len(constraints), 0, 0)


def report_verdicts(state, name, evaluation, relaxation):
    """Trace every constraint whose verdict differs from the last one reported."""
    last = state.verdicts.setdefault(name, {})
    for constraint, verdict in evaluation.rows():
        if last.get(constraint.label, Verdict.INAPPLICABLE) == verdict:
            continue
        last[constraint.label] = verdict
        state.log("PROPERTY", {"construction": name, "constraint": constraint.label,
                               "weight": constraint.weight, "verdict": verdict.value,
                               "relaxation": relaxation})


def _lexical_evidence(tokens, cue, vectors):
    target = cue.target()
    best, multiplier = 0.0, 1.0
    for token in tokens:
        score = lexical_F(token.surface, target, vectors)
        if score > best:
            best, multiplier = score, token.surprisal_multiplier
    return best, multiplier


def _path_cue_holds(state, cue):
    for inst in state.instances:
        value = resolve_path(inst.observed, cue.path)
        if value is not ABSENT and subsumes(cue.value, value):
            return True
    return False


def cue_matches(state, grammar, vectors, params, category, obj, evaluation=None):
    """CueMatches of one grammar object under the current state; satisfaction is sticky."""
    sticky = state.satisfied.setdefault(obj.name, [])
    matches = []

    def add(label, kind, weight, F, fan, holds, multiplier, declared):
        if holds and label not in sticky:
            sticky.append(label)
            state.log("CUE", {"object": obj.name, "cue": label, "F": F})
        matches.append(CueMatch(label, kind, weight, F, fan, label in sticky, multiplier, declared))

    for cue in obj.cues.lexical:
        F, multiplier = _lexical_evidence(state.tokens, cue, vectors)
        threshold = params.sim_threshold if cue.vector is not None else 1.0
        holds = F > 0.0 and F >= threshold
        add(cue.label, LEXICAL, cue.weight, F, grammar.fan(cue.key), holds, multiplier, cue.declared)

    for cue in obj.cues.syntactic:
        if cue.kind is None:
            add(cue.label, SYNTACTIC, cue.weight, 1.0, grammar.fan(cue.key),
                _path_cue_holds(state, cue), 1.0, cue.declared)
            continue
        if evaluation is None:
            continue
        for constraint, verdict in evaluation.rows():
            if constraint.kind == cue.kind:
                add(constraint.label, SYNTACTIC, constraint.weight, 1.0, 1,
                    verdict == Verdict.SATISFIED, 1.0, True)
    return tuple(matches)


def refresh(state, grammar, vectors, params):
    """Recompute every ActivationRecord; trace objects that become activated."""
    for category, obj in grammar.objects():
        evaluation, relaxation = None, 1.0
        if category == CONSTRUCTION and grammar.expanded(obj.name).properties:
            evaluation = property_evaluation(state, grammar, grammar.expanded(obj.name))
            relaxation = relaxation_score(evaluation, params.soft_penalty)
            report_verdicts(state, obj.name, evaluation, relaxation)
        matches = cue_matches(state, grammar, vectors, params, category, obj, evaluation)
        record = ActivationRecord(obj.name, category, base_activation(obj.frequency, obj.recency, params),
                                  matches, relaxation=relaxation)
        record = recompute(record, params)
        state.records[obj.name] = record
        instantiated = category == CONSTRUCTION and any(inst.name == obj.name for inst in state.instances)
        if obj.name not in state.activated and (record.satisfied or instantiated or obj.name in state.named):
            state.activated.append(obj.name)
            state.log("ACTIVATE", {"object": obj.name, "category": category, "A": record.A,
                                   "sigma": record.sigma})


# ---------------------------------------------------------------------------
# Events
# ---------------------------------------------------------------------------

def _apply_observing(event, target, grammar, vectors, params):
    """apply_event where an observed slot that disagrees with the expectation keeps the observation."""
    refinement = event.refinement
    replacements, mismatches = {}, []
    for path in expectation_paths(event):
        observed = resolve_path(target, path)
        expected = resolve_path(refinement, path)
        if not (isinstance(observed, FeatureStructure) and observed.provenance == Provenance.OBSERVED):
            continue
        try:
            loose_unify(observed, expected, grammar.hierarchy, vectors, params.sim_threshold)
        except UnificationFailure as e:
            mismatches.append((path, e))
            replacements[expected.node_id] = Unspecified()
    if replacements:
        event = replace(event, refinement=substitute(refinement, replacements))
    return apply_event(event, target, grammar.hierarchy, vectors, params.sim_threshold), mismatches


def reapply_events(state, inst, grammar, vectors, params):
    structure = inst.observed
    for name in inst.events:
        event = grammar.events[name]
        try:
            structure, mismatches = _apply_observing(event, structure, grammar, vectors, params)
        except UnificationFailure as e:
            key = ("clash", name, inst.uid, inst.version)
            if key not in state.reported:
                state.reported.add(key)
                state.log("CLASH", {"event": name, "target": inst.label, **_clash_payload(e)})
            continue
        for path, error in mismatches:
            key = ("mismatch", name, inst.uid, path)
            if key not in state.reported:
                state.reported.add(key)
                payload = {"event": name, "target": inst.label, "path": format_path(path),
                           "observation_wins": True, "reason": str(error)}
                if isinstance(error, SimilarityBelowThreshold):
                    payload["score"] = error.score
                state.log("EXPECT", payload)
    inst.structure = structure


def _event_target(state, grammar, event):
    target = event.specialize_target
    if grammar.category_of(target) == FRAME:
        inst = state.frame_instances.get(target)
        if inst is None:
            structure = grammar.instantiate(target)
            inst = Instance(state.new_uid(), target, structure, state.index, (state.index, state.index),
                            route=None, category=FRAME)
            state.frame_instances[target] = inst
        return inst
    candidates = [inst for inst in state.roots() if inst.name == target]
    return candidates[-1] if candidates else None


def _name(state, name):
    if name not in state.named:
        state.named.append(name)


def fire_events(state, grammar, vectors, params):
    """Fire, in declaration order, every cued event whose hard trigger cues hold and whose target exists."""
    fired_any = False
    for event in grammar.events.values():
        record = state.records[event.name]
        if event.name in state.fired or not (record.cued and record.hard_cues_satisfied):
            continue
        inst = _event_target(state, grammar, event)
        if inst is None:
            continue
        state.fired.append(event.name)
        inst.events.append(event.name)
        reapply_events(state, inst, grammar, vectors, params)
        expected = [format_path(path) for path in expectation_paths(event)
                    if getattr(resolve_path(inst.structure, path), "provenance", None) == Provenance.EXPECTED]
        state.log("FIRE-EVENT", {"event": event.name, "target": inst.label, "expected": expected})
        _name(state, event.specialize_target)
        for _, node in iter_nodes(event.refinement):
            if isinstance(node, FeatureStructure) and node.type_tag in grammar.frames:
                _name(state, node.type_tag)
        fired_any = True
    return fired_any


def settle(state, grammar, vectors, params):
    refresh(state, grammar, vectors, params)
    while fire_events(state, grammar, vectors, params):
        refresh(state, grammar, vectors, params)


# ---------------------------------------------------------------------------
# The three steps
# ---------------------------------------------------------------------------

def _lexical_construction(grammar, word):
    for construction in grammar.constructions.values():
        if not construction.is_lexical:
            continue
        forms = [construction.surface[0]] + [cue.form for cue in construction.cues.lexical if cue.form]
        if word in forms:
            return construction
    return None


def _absorb(state, grammar, token, created):
    """Let a recognised multiword construction take the token that continues its surface."""
    for uid, next_word in list(state.completions.items()):
        inst = state.instance(uid)
        surface = grammar.expanded(inst.name).surface
        if next_word >= len(surface) or inst.integrated:
            continue
        if token.index == inst.span[1] + 1 and token.surface == surface[next_word]:
            inst.span = (inst.span[0], token.index)
            state.completions[uid] = next_word + 1
            if created is not None:
                created.integrated = True
                created.consumed_by = uid
            state.log("EXPECT", {"instance": inst.label, "absorbed": token.surface, "position": token.index})
            return True
    return False


def scan(state, token, grammar, vectors, params):
    """Add one token: instantiate its lexical construction, re-derive cues, fire ready events."""
    if token.index != len(state.tokens):
        raise ValueError(f"token index {token.index} does not follow {len(state.tokens)} scanned tokens")
    state.index = token.index
    state.tokens.append(token)
    construction = _lexical_construction(grammar, token.surface)
    created = None
    if construction is not None:
        created = Instance(state.new_uid(), construction.name, _observe(grammar.instantiate(construction.name)),
                           token.index, (token.index, token.index))
        state.instances.append(created)
        state.log("SCAN", {"token": token.surface, "instance": created.label})
    else:
        state.log("SCAN", {"token": token.surface, "residue": True})
    _absorb(state, grammar, token, created)
    settle(state, grammar, vectors, params)
    return state


def _candidates(state, anchor, k):
    free = [inst for inst in state.roots() if inst is not anchor and inst.category == CONSTRUCTION
            and _saturated(inst)]
    if k == 0:
        left = [inst for inst in free if inst.span[1] < anchor.span[0]]
        return sorted(left, key=lambda inst: (-inst.span[1], inst.uid))
    right = [inst for inst in free if inst.span[0] > anchor.span[1]]
    return sorted(right, key=lambda inst: (inst.span[0], inst.uid))


def _selection_clash(anchor, filler, hierarchy):
    """Reason the anchor's SELECT category refuses the filler, or None."""
    selected = resolve_path(anchor.observed, ("form", "syn", "cat", "select"))
    if not isinstance(selected, FeatureStructure) or selected.type_tag == "none":
        return None
    theirs = resolve_path(filler.observed, ("form", "syn", "cat"))
    if isinstance(theirs, FeatureStructure) and unifiable(selected, theirs, hierarchy):
        return None
    return f"{anchor.name} selects {selected.type_tag}"


def _fill_one(state, anchor, grammar, vectors, params):
    for k, slot in enumerate(_slots(anchor.observed)):
        if _filled(slot):
            continue
        for filler in _candidates(state, anchor, k):
            key = (anchor.uid, anchor.version, k, filler.uid, filler.version)
            if key in state.attempts:
                continue
            state.attempts.add(key)
            refusal = _selection_clash(anchor, filler, grammar.hierarchy)
            if refusal is not None:
                state.log("CLASH", {"anchor": anchor.label, "slot": k, "filler": filler.label,
                                    "path": "form.syn.cat.select", "reason": refusal})
                continue
            try:
                merged = loose_unify(anchor.observed, embed(("arg-st", k), _as_filler(filler)),
                                     grammar.hierarchy, vectors, params.sim_threshold)
            except UnificationFailure as e:
                state.log("CLASH", {"anchor": anchor.label, "slot": k, "filler": filler.label,
                                    **_clash_payload(e)})
                continue
            anchor.observed = merged
            anchor.version += 1
            anchor.span = (min(anchor.span[0], filler.span[0]), max(anchor.span[1], filler.span[1]))
            filler.integrated = True
            filler.consumed_by = anchor.uid
            reapply_events(state, anchor, grammar, vectors, params)
            state.log("COMPOSE", {"anchor": anchor.label, "slot": k, "filler": filler.label,
                                  "span": list(filler.span)})
            return True
    return False


def compose(state, grammar, vectors, params):
    """Fill open argument slots until nothing more fits; slot 0 from the left, the rest from the right."""
    progress = True
    while progress:
        progress = False
        for anchor in state.roots():
            if anchor.category == CONSTRUCTION and _fill_one(state, anchor, grammar, vectors, params):
                progress = True
                break
    settle(state, grammar, vectors, params)
    return state


def _without_meaning(slot):
    if not isinstance(slot, FeatureStructure) or "meaning" not in slot:
        return slot
    table = {name: value for name, value in slot.features.items() if name != "meaning"}
    return FeatureStructure(slot.type_tag, table, slot.provenance)


def participant_instances(state, construction):
    """One saturated instance per declared participant, earliest first; None while one is missing."""
    found = []
    for name in construction.participants:
        match = next((inst for inst in state.instances if inst.name == name and inst.route != DIRECT
                      and inst not in found and _saturated(inst)), None)
        if match is None:
            return None
        found.append(match)
    return found


def _recognize(state, grammar, vectors, params, construction):
    record = state.records[construction.name]
    assignment, anchor = assign_spans(state, grammar, construction)
    structure = _observe(grammar.instantiate(construction.name))
    if anchor is not None:
        for k, slot in enumerate(_slots(anchor.observed)):
            if not _filled(slot):
                continue
            content = _without_meaning(slot) if construction.opaque_meaning else slot
            try:
                structure = loose_unify(structure, embed(("arg-st", k), content),
                                        grammar.hierarchy, vectors, params.sim_threshold)
            except UnificationFailure as e:
                state.log("CLASH", {"anchor": anchor.label, "slot": k, "construction": construction.name,
                                    **_clash_payload(e)})

    daughters = participant_instances(state, construction) or []
    spans = [span for span in assignment.spans.values() if span is not UNMATCHED]
    spans.extend(daughter.span for daughter in daughters)
    if anchor is not None:
        spans.append(anchor.span)
    hull = (min(s for s, _ in spans), max(e for _, e in spans)) if spans else (state.index, state.index)
    position = anchor.position if anchor is not None else hull[0]
    inst = Instance(state.new_uid(), construction.name, structure, position, hull, route=DIRECT,
                    daughters=[daughter.uid for daughter in daughters])
    for other in state.roots():
        if hull[0] <= other.span[0] and other.span[1] <= hull[1]:
            other.integrated = True
            other.consumed_by = inst.uid
    state.instances.append(inst)

    hard = [match.cue for match in record.cue_matches if match.weight_class == "hard"]
    state.log("DIRECT", {"construction": construction.name, "instance": inst.label, "span": list(hull),
                         "A": record.A, "relaxation": record.relaxation,
                         "threshold": params.recognition_threshold, "hard_cues": hard,
                         "daughters": [daughter.label for daughter in daughters]})
    recognition = {"construction": construction.name, "instance": inst.label, "token": state.index,
                   "A": record.A, "relaxation": record.relaxation}
    state.recognitions.append(recognition)

    surface = construction.surface
    if len(surface) > 1:
        covered = 0
        while covered < len(surface) and hull[0] + covered <= hull[1] \
                and state.tokens[hull[0] + covered].surface == surface[covered]:
            covered += 1
        state.completions[inst.uid] = covered
        for offset, word in enumerate(surface[covered:]):
            state.log("EXPECT", {"instance": inst.label, "expects": word, "position": hull[0] + covered + offset})
    return recognition


def recognizable(record, params):
    """Cued, no hard cue unsatisfied, no hard property violated, and A times relaxation reaches the threshold."""
    return record.cued and record.hard_cues_satisfied and record.relaxation > 0.0 \
        and record.support >= params.recognition_threshold


def try_direct_route(state, grammar, vectors, params):
    """Recognise the best eligible construction that is recognizable under the current state."""
    recognized = {entry["construction"] for entry in state.recognitions}
    order = list(grammar.constructions)
    candidates = []
    for name, construction in grammar.constructions.items():
        expanded = grammar.expanded(name)
        record = state.records.get(name)
        if name in recognized or record is None or not expanded.direct_eligible:
            continue
        if recognizable(record, params) and participant_instances(state, expanded) is not None:
            candidates.append((-record.support, -len(record.satisfied), order.index(name), expanded))
    if not candidates:
        return []
    candidates.sort(key=lambda entry: entry[:3])
    recognition = _recognize(state, grammar, vectors, params, candidates[0][3])
    settle(state, grammar, vectors, params)
    return [recognition]


# ---------------------------------------------------------------------------
# Interpretation
# ---------------------------------------------------------------------------

def _collect_frames(structure, frames, seen, opaque):
    for frame in _frames_in(structure):
        if frame.node_id not in seen:
            seen.add(frame.node_id)
            frames.append(frame)
    if opaque:
        return
    for slot in _slots(structure):
        if isinstance(slot, FeatureStructure):
            _collect_frames(slot, frames, seen, False)


def _index_owners(structure, owners):
    for slot in _slots(structure):
        if not isinstance(slot, FeatureStructure):
            continue
        index = resolve_path(slot, ("meaning", "sem", "index"))
        if index is not ABSENT and index.node_id not in owners:
            owners[index.node_id] = slot
        _index_owners(slot, owners)


def _expected_label(node):
    frames = _frames_in(node)
    if frames:
        return frames[0].type_tag
    for path in (("meaning", "sem", "index", "ds-vector"), ("ds-vector",)):
        found = resolve_path(node, path)
        if isinstance(found, VectorRef):
            return found.word
    return node.type_tag if isinstance(node, FeatureStructure) else "unspecified"


def _binding(value, owners, tokens):
    slot = owners.get(value.node_id)
    if slot is not None:
        if slot.provenance == Provenance.EXPECTED:
            return f"expected:{_expected_label(slot)}"
        span = _span_of(slot)
        if span is not UNMATCHED:
            return " ".join(token.surface for token in tokens[span[0]:span[1] + 1])
    if isinstance(value, FeatureStructure) and value.provenance == Provenance.EXPECTED:
        return f"expected:{_expected_label(value)}"
    return None


def _theta(grammar, vectors, structure):
    if vectors is None:
        return None
    prototypes = {}
    for frame in _frames_in(structure):
        for role, prototype in grammar.prototypes(frame.type_tag, vectors).items():
            prototypes.setdefault(role, prototype)
    try:
        return semantic_coherence(structure, prototypes, vectors)
    except NoScorableRoles:
        return None


def finish(state, grammar, vectors, params):
    """Fire what is still pending and put every fired event back on its final observed structure."""
    settle(state, grammar, vectors, params)
    for inst in state.instances + list(state.frame_instances.values()):
        if inst.events:
            reapply_events(state, inst, grammar, vectors, params)
    return state


def build_interpretation(state, grammar, vectors, params):
    roots = sorted(state.roots(), key=lambda inst: (inst.span[0], inst.uid))
    frames, seen, owners = [], set(), {}
    for inst in roots:
        opaque = inst.route == DIRECT and grammar.constructions[inst.name].opaque_meaning
        _collect_frames(inst.structure, frames, seen, opaque)
        _index_owners(inst.structure, owners)
        if opaque:
            continue
        for uid in inst.daughters:
            daughter = state.instance(uid)
            _collect_frames(daughter.structure, frames, seen, False)
            _index_owners(daughter.structure, owners)
            index = resolve_path(daughter.structure, ("meaning", "sem", "index"))
            if index is not ABSENT and index.node_id not in owners:
                owners[index.node_id] = _as_filler(daughter)
    for inst in state.frame_instances.values():
        frames.append(mark(inst.structure, [inst.structure.node_id], Provenance.EXPECTED))
    meaning = FeatureStructure(TOP, {"frames": FeatureList(frames)})

    bindings = {}
    for frame in frames:
        if frame.type_tag in bindings:
            continue
        roles = {}
        for role, value in frame.features.items():
            label = _binding(value, owners, state.tokens)
            if label is not None:
                roles[role] = label
        bindings[frame.type_tag] = roles

    scores = {}
    for inst in roots + [inst for inst in state.instances if inst.route == DIRECT and inst not in roots]:
        record = state.records[inst.name]
        scores[inst.label] = {"A": record.A, "theta": _theta(grammar, vectors, inst.observed),
                              "sigma": record.sigma, "relaxation": record.relaxation}

    covered = set()
    for inst in roots:
        covered.update(range(inst.span[0], inst.span[1] + 1))
    residue = [token.surface for token in state.tokens if token.index not in covered]

    activated = [obj.name for _, obj in grammar.objects() if obj.name in state.activated]
    return Interpretation(
        tokens=list(state.tokens),
        meaning=meaning,
        route_labels={inst.label: inst.route for inst in state.instances},
        scores=scores,
        residue=residue,
        recognitions=list(state.recognitions),
        activated=activated,
        activated_frames=[name for name in activated if grammar.category_of(name) == FRAME],
        bindings=bindings,
        trace=list(state.trace),
        records={name: {"A": state.records[name].A, "sigma": state.records[name].sigma} for name in activated},
    )


def interpret(sentence, grammar, vectors, params):
    """Interpret a sentence (text or Token list). Deterministic; raises EmptyInput."""
    if isinstance(sentence, str):
        tokens = tokenize(sentence)
    else:
        tokens = [Token(item.lower(), i) if isinstance(item, str) else item for i, item in enumerate(sentence)]
    if not tokens:
        raise EmptyInput("nothing to interpret")
    state = ParseState()
    for token in tokens:
        scan(state, token, grammar, vectors, params)
        try_direct_route(state, grammar, vectors, params)
        compose(state, grammar, vectors, params)
        try_direct_route(state, grammar, vectors, params)
    finish(state, grammar, vectors, params)
    logger.debug("Interpreted %r: %d trace records", " ".join(t.surface for t in tokens), len(state.trace))
    return build_interpretation(state, grammar, vectors, params)
