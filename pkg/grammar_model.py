#!/usr/bin/env python3
"""
The grammar: constructions, frames and events over one type hierarchy.

Loading parses the JSON grammar file, collects every validation problem and
reports them together; expansion folds ancestor constructions into their
descendants; events specialise a construction or frame instance.
"""

import json
import logging
from dataclasses import dataclass, field, replace
from pathlib import Path

from avm_codec import AvmParser, dump_avm, is_tag, parse_avm
from errors import Clash, InheritanceClash, ParseError, UnificationFailure, ValidationError, format_path
from feature_structure import (
    ABSENT,
    FeatureList,
    FeatureStructure,
    Provenance,
    Text,
    TypeHierarchy,
    VectorRef,
    copy_structure,
    first_path,
    isomorphic,
    loose_unify,
    mark,
    resolve_path,
    subsumes,
    to_text,
    unifiable,
    unify,
)
from properties import HARD, WEIGHTS, Kind, PropertyConstraint
from vector_space import build_prototype

logger = logging.getLogger(__name__)

CONSTRUCTION = "construction"
FRAME = "frame"
EVENT = "event"

RELATION_KINDS = ("inheritance", "precedence", "perspective")
TOP_LEVEL_KEYS = ("hierarchy", "constructions", "frames", "events")
SIGN_KEYS = ("form", "meaning", "arg-st")


# ---------------------------------------------------------------------------
# Cues
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LexicalCue:
    """A surface form or a vector reference, optionally taken from a tagged node."""

    form: str = None
    vector: str = None
    weight: str = HARD
    declared: bool = False
    path: tuple = None
    tag: str = field(default=None, compare=False)

    @property
    def key(self):
        return f"vec:{self.vector}" if self.vector is not None else f"form:{self.form}"

    @property
    def label(self):
        return f"->{self.vector}" if self.vector is not None else self.form

    def target(self):
        """What lexical_F compares tokens against."""
        return VectorRef(self.vector) if self.vector is not None else self.form


@dataclass(frozen=True)
class SyntacticCue:
    """Either every constraint of one property kind, or a value expected at a path."""

    kind: Kind = None
    path: tuple = None
    value: object = field(default=None, compare=False)
    value_text: str = None
    weight: str = HARD
    declared: bool = False

    @property
    def key(self):
        if self.kind is not None:
            return None
        return f"path:{format_path(self.path)}={self.value_text}"

    @property
    def label(self):
        if self.kind is not None:
            return self.kind.value
        return f"{format_path(self.path)}={self.value_text}"


@dataclass(frozen=True)
class CueSet:
    lexical: tuple = ()
    syntactic: tuple = ()

    def __len__(self):
        return len(self.lexical) + len(self.syntactic)

    def keys(self):
        """Distinct fan keys, in declaration order."""
        keys = [cue.key for cue in self.lexical + self.syntactic if cue.key is not None]
        return list(dict.fromkeys(keys))


# ---------------------------------------------------------------------------
# Grammar objects
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Construction:
    name: str
    sign: FeatureStructure
    cues: CueSet = field(default_factory=CueSet)
    supertypes: tuple = ()
    participants: tuple = ()
    properties: tuple = ()
    opaque_meaning: bool = False
    covert_args: bool = False
    frequency: float = 0.0
    recency: float = 1.0
    expanded: bool = False

    @property
    def form(self):
        return self.sign.get("form", ABSENT)

    @property
    def meaning(self):
        return self.sign.get("meaning", ABSENT)

    @property
    def arg_st(self):
        found = self.sign.get("arg-st", ABSENT)
        return found if isinstance(found, FeatureList) else None

    @property
    def category(self):
        return resolve_path(self.sign, ("form", "syn", "cat"))

    @property
    def surface(self):
        """Surface words, lower-cased; empty for schematic constructions."""
        found = resolve_path(self.sign, ("form", "surface"))
        if not isinstance(found, FeatureList):
            return []
        return [surface_word(item) for item in found.items]

    @property
    def is_lexical(self):
        return len(self.surface) == 1 and self.surface[0] is not None

    @property
    def frames(self):
        found = resolve_path(self.sign, ("meaning", "sem", "frames"))
        if not isinstance(found, FeatureList):
            return []
        return [item for item in found.items if isinstance(item, FeatureStructure)]

    @property
    def direct_eligible(self):
        return not self.is_lexical and (bool(self.frames) or bool(self.participants))


@dataclass(frozen=True, eq=False)
class Frame:
    name: str
    elements: FeatureStructure
    lex_cues: tuple = ()
    relations: tuple = ()
    prototypes: dict = field(default_factory=dict)
    frequency: float = 0.0
    recency: float = 1.0

    @property
    def roles(self):
        return list(self.elements.features)

    @property
    def cues(self):
        return CueSet(lexical=self.lex_cues)

    def parents(self):
        return [target for kind, target in self.relations if kind == "inheritance"]


@dataclass(frozen=True, eq=False)
class Event:
    name: str
    specialize_target: str
    refinement: FeatureStructure
    trigger: CueSet = field(default_factory=CueSet)
    frequency: float = 0.0
    recency: float = 1.0

    @property
    def cues(self):
        return self.trigger


def surface_word(value):
    if isinstance(value, FeatureStructure) and value.is_atom:
        return value.type_tag.lower()
    if isinstance(value, Text):
        return value.text.lower()
    return None


class _AnyVectors:
    """Every pair of words counts as similar; vectors are not compared during validation."""

    def similarity(self, first, second):
        return 1.0


class Grammar:
    """Constructions, frames and events in declaration order. Immutable once loaded."""

    def __init__(self, hierarchy, constructions, frames, events, declared_hierarchy=None, source="<grammar>"):
        self.hierarchy = hierarchy
        self.constructions = dict(constructions)
        self.frames = dict(frames)
        self.events = dict(events)
        self.declared_hierarchy = dict(declared_hierarchy or {})
        self.source = source
        self.issues = []
        self.fans = {}
        self._expanded = {}

    def objects(self):
        """(category, object) pairs: constructions, then frames, then events."""
        return [(CONSTRUCTION, c) for c in self.constructions.values()] \
            + [(FRAME, f) for f in self.frames.values()] \
            + [(EVENT, e) for e in self.events.values()]

    def lookup(self, name):
        for table in (self.constructions, self.frames, self.events):
            if name in table:
                return table[name]
        return None

    def category_of(self, name):
        if name in self.constructions:
            return CONSTRUCTION
        if name in self.frames:
            return FRAME
        if name in self.events:
            return EVENT
        return None

    def expanded(self, name):
        """Construction with its ancestors folded in (cached at load)."""
        found = self._expanded.get(name)
        if found is None:
            found = expand_inheritance(self.constructions[name], self)
            self._expanded[name] = found
        return found

    def frame_structure(self, name, _seen=()):
        frame = self.frames[name]
        result = frame.elements
        for parent in frame.parents():
            if parent in self.frames and parent not in _seen:
                result = unify(self.frame_structure(parent, _seen + (name,)), result, self.hierarchy)
        return result

    def instantiate(self, name):
        """Fresh copy of the expanded structure of a construction or frame."""
        if name in self.constructions:
            return copy_structure(self.expanded(name).sign)
        if name in self.frames:
            return copy_structure(self.frame_structure(name))
        raise KeyError(name)

    def prototypes(self, frame_name, vectors):
        """role -> Prototype for one frame, skipping roles whose fillers are out of vocabulary."""
        frame = self.frames.get(frame_name)
        built = {}
        if frame is None or vectors is None:
            return built
        for role, fillers in frame.prototypes.items():
            if all(word in vectors for word, _ in fillers):
                built[role] = build_prototype(fillers, vectors)
        return built

    def fan(self, key):
        return max(1, self.fans.get(key, 1))


# ---------------------------------------------------------------------------
# Reading
# ---------------------------------------------------------------------------

def _read_source(source):
    if isinstance(source, (str, Path)):
        location = str(source)
        with open(source, "rb") as handle:
            data = handle.read()
    else:
        location = getattr(source, "name", "<grammar>")
        data = source.read()
    if isinstance(data, bytes):
        try:
            data = data.decode("utf-8")
        except UnicodeDecodeError as e:
            raise ParseError(location, f"not UTF-8 text ({e})")
    return data, str(location)


def _is_number(value):
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def _decode_json(text, location):
    def no_duplicates(pairs):
        table = {}
        for key, value in pairs:
            if key in table:
                raise ParseError(location, f"duplicate key {key!r}")
            table[key] = value
        return table

    try:
        return json.loads(text, object_pairs_hook=no_duplicates)
    except json.JSONDecodeError as e:
        raise ParseError(f"{location}:{e.lineno}:{e.colno}", e.msg)


class _Builder:
    """Turns decoded JSON into grammar objects, recording reference problems as issues."""

    def __init__(self, location):
        self.location = location
        self.issues = []

    def fail(self, where, reason):
        return ParseError(f"{self.location}:{where}", reason)

    def issue(self, name, rule):
        self.issues.append((name, rule))

    def number(self, obj, key, default, where):
        value = obj.get(key, default)
        if not _is_number(value):
            raise self.fail(where, f"{key} must be a number")
        return float(value)

    def names(self, obj, key, where):
        value = obj.get(key, [])
        if isinstance(value, str):
            value = [value]
        if not isinstance(value, list) or not all(isinstance(item, str) for item in value):
            raise self.fail(where, f"{key} must be a list of names")
        return tuple(value)

    def weight(self, entry, name):
        if "weight" not in entry:
            return HARD, False
        if entry["weight"] not in WEIGHTS:
            self.issue(name, f"cue weight must be hard or soft, got {entry['weight']!r}")
            return HARD, True
        return entry["weight"], True

    # -- cues -------------------------------------------------------------

    def lexical_cue(self, entry, name, where, scope=None):
        if isinstance(entry, str):
            if is_tag(entry):
                return self.tagged_lexical_cue(entry, HARD, False, name, scope)
            return LexicalCue(form=entry.lower())
        if not isinstance(entry, dict):
            raise self.fail(where, f"malformed lexical cue {entry!r}")
        weight, declared = self.weight(entry, name)
        keys = sorted(key for key in entry if key != "weight")
        if keys == ["form"] and isinstance(entry["form"], str):
            return LexicalCue(form=entry["form"].lower(), weight=weight, declared=declared)
        if keys == ["vec"] and isinstance(entry["vec"], str):
            return LexicalCue(vector=entry["vec"].lower(), weight=weight, declared=declared)
        if keys == ["tag"] and is_tag(entry["tag"]):
            return self.tagged_lexical_cue(entry["tag"], weight, declared, name, scope)
        raise self.fail(where, f"malformed lexical cue {entry!r}")

    def tagged_lexical_cue(self, tag, weight, declared, name, scope):
        node, path = self.resolve_tag(tag, name, scope)
        if node is None:
            return None
        if isinstance(node, VectorRef):
            return LexicalCue(vector=node.word, weight=weight, declared=declared, path=path, tag=tag)
        word = surface_word(node)
        if word is None:
            self.issue(name, f"cue tag {tag} must hold an atom, a text or a vector")
            return None
        return LexicalCue(form=word, weight=weight, declared=declared, path=path, tag=tag)

    def syntactic_cue(self, entry, name, where, scope=None):
        if not isinstance(entry, dict):
            raise self.fail(where, f"malformed syntactic cue {entry!r}")
        weight, declared = self.weight(entry, name)
        keys = sorted(key for key in entry if key != "weight")
        if keys == ["property"]:
            try:
                kind = Kind(entry["property"])
            except ValueError:
                raise self.fail(where, f"unknown property kind {entry['property']!r}")
            return SyntacticCue(kind=kind, weight=weight, declared=declared)
        if keys == ["path", "value"]:
            path = entry["path"]
            if not isinstance(path, list) or not all(isinstance(step, (str, int)) for step in path):
                raise self.fail(where, "cue path must be a list of feature names and indices")
            value = parse_avm(entry["value"], f"{self.location}:{where}.value")
            return SyntacticCue(path=tuple(path), value=value, value_text=to_text(value),
                                weight=weight, declared=declared)
        if keys == ["tag"] and is_tag(entry["tag"]):
            node, path = self.resolve_tag(entry["tag"], name, scope)
            if node is None:
                return None
            return SyntacticCue(path=path, value=node, value_text=to_text(node),
                                weight=weight, declared=declared)
        raise self.fail(where, f"malformed syntactic cue {entry!r}")

    def cue_set(self, obj, name, where, scope=None):
        if obj is None:
            return CueSet()
        if not isinstance(obj, dict) or set(obj) - {"lexical", "syntactic"}:
            raise self.fail(where, "cues must be an object with 'lexical' and 'syntactic' lists")
        lexical = [self.lexical_cue(entry, name, f"{where}.lexical.{i}", scope)
                   for i, entry in enumerate(obj.get("lexical", []))]
        syntactic = [self.syntactic_cue(entry, name, f"{where}.syntactic.{i}", scope)
                     for i, entry in enumerate(obj.get("syntactic", []))]
        return CueSet(tuple(c for c in lexical if c is not None), tuple(c for c in syntactic if c is not None))

    def resolve_tag(self, tag, name, scope):
        if scope is None:
            self.issue(name, f"tag {tag} used where no structure is in scope")
            return None, None
        parser, root = scope
        node = parser.node_for_tag(tag)
        if node is None:
            self.issue(name, f"tag {tag} does not resolve to a node")
            return None, None
        return node, first_path(root, node.node_id)

    # -- constructions ----------------------------------------------------

    def construction(self, name, obj):
        where = f"constructions.{name}"
        if not isinstance(obj, dict):
            raise self.fail(where, "construction must be an object")
        allowed = ("supertypes", "participants", "opaque_meaning", "covert_args",
                   "frequency", "recency", "cues") + SIGN_KEYS
        unknown = [key for key in obj if key not in allowed]
        if unknown:
            raise self.fail(where, f"unknown key(s) {unknown}")

        form = obj.get("form")
        if form is not None and not isinstance(form, dict):
            raise self.fail(f"{where}.form", "form must be an object")
        declared_properties = (form or {}).get("properties", {})
        sign_json = {}
        for key in SIGN_KEYS:
            if key in obj:
                value = obj[key]
                if key == "form":
                    value = {k: v for k, v in value.items() if k != "properties"}
                sign_json[key] = value
        parser = AvmParser(f"{self.location}:{where}")
        sign = parser.parse(sign_json)
        scope = (parser, sign)

        return Construction(
            name=name,
            sign=sign,
            cues=self.cue_set(obj.get("cues"), name, f"{where}.cues", scope),
            supertypes=self.names(obj, "supertypes", where),
            participants=self.names(obj, "participants", where),
            properties=self.properties(declared_properties, name, f"{where}.form.properties", scope),
            opaque_meaning=bool(obj.get("opaque_meaning", False)),
            covert_args=bool(obj.get("covert_args", False)),
            frequency=self.number(obj, "frequency", 0.0, where),
            recency=self.number(obj, "recency", 1.0, where),
        )

    def properties(self, declared, name, where, scope):
        if not isinstance(declared, dict):
            raise self.fail(where, "properties must map a kind to a list of tag lists")
        constraints = []
        for kind_name, entries in declared.items():
            try:
                kind = Kind(kind_name)
            except ValueError:
                raise self.fail(where, f"unknown property kind {kind_name!r}")
            if not isinstance(entries, list):
                raise self.fail(f"{where}.{kind_name}", "expected a list of tag lists")
            for index, entry in enumerate(entries):
                weight = HARD
                if isinstance(entry, dict):
                    weight = entry.get("weight", HARD)
                    entry = entry.get("tags")
                if not isinstance(entry, list) or not all(is_tag(tag) for tag in entry):
                    raise self.fail(f"{where}.{kind_name}.{index}", "expected a list of tags")
                groups = [entry[i:i + 2] for i in range(len(entry) - 1)] \
                    if kind == Kind.LINEARITY and len(entry) > 2 else [entry]
                for tags in groups:
                    constraint = self.constraint(kind, tags, weight, name, scope)
                    if constraint is not None:
                        constraints.append(constraint)
        return tuple(constraints)

    def constraint(self, kind, tags, weight, name, scope):
        paths = []
        for tag in tags:
            node, path = self.resolve_tag(tag, name, scope)
            if node is None:
                return None
            paths.append(path)
        try:
            return PropertyConstraint(kind, tuple(tags), weight, tuple(paths))
        except ValidationError as e:
            for _, rule in e.issues:
                self.issue(name, rule)
            return None

    # -- frames and events --------------------------------------------------

    def frame(self, name, obj):
        where = f"frames.{name}"
        if not isinstance(obj, dict):
            raise self.fail(where, "frame must be an object")
        elements = obj.get("elements", {})
        if not isinstance(elements, dict) or any(key.startswith("@") for key in elements):
            raise self.fail(f"{where}.elements", "elements must map role names to structures")
        structure = parse_avm({"@sort": name, **elements}, f"{self.location}:{where}.elements")

        relations = []
        for index, relation in enumerate(obj.get("relations", [])):
            if not (isinstance(relation, list) and len(relation) == 2
                    and all(isinstance(part, str) for part in relation)):
                raise self.fail(f"{where}.relations.{index}", "relation must be [kind, target]")
            relations.append(tuple(relation))

        prototypes = {}
        declared = obj.get("prototypes", {})
        if not isinstance(declared, dict):
            raise self.fail(f"{where}.prototypes", "prototypes must map role names to filler lists")
        for role, fillers in declared.items():
            if not isinstance(fillers, list):
                raise self.fail(f"{where}.prototypes.{role}", "fillers must be a list")
            entries = []
            for filler in fillers:
                if isinstance(filler, str):
                    entries.append((filler.lower(), 1.0))
                elif isinstance(filler, list) and len(filler) == 2 and isinstance(filler[0], str) \
                        and _is_number(filler[1]) and filler[1] > 0:
                    entries.append((filler[0].lower(), float(filler[1])))
                else:
                    raise self.fail(f"{where}.prototypes.{role}",
                                    f"malformed filler {filler!r}, expected a word or [word, weight > 0]")
            prototypes[role] = tuple(entries)

        lex_cues = [self.lexical_cue(entry, name, f"{where}.lex_cues.{i}")
                    for i, entry in enumerate(obj.get("lex_cues", []))]
        return Frame(
            name=name,
            elements=structure,
            lex_cues=tuple(cue for cue in lex_cues if cue is not None),
            relations=tuple(relations),
            prototypes=prototypes,
            frequency=self.number(obj, "frequency", 0.0, where),
            recency=self.number(obj, "recency", 1.0, where),
        )

    def event(self, name, obj):
        where = f"events.{name}"
        if not isinstance(obj, dict) or not isinstance(obj.get("specialize"), str):
            raise self.fail(where, "event must be an object naming its 'specialize' target")
        parser = AvmParser(f"{self.location}:{where}.refinement")
        refinement = parser.parse(obj.get("refinement", {}))
        if not isinstance(refinement, FeatureStructure):
            raise self.fail(f"{where}.refinement", "refinement must be a structure")
        return Event(
            name=name,
            specialize_target=obj["specialize"],
            refinement=refinement,
            trigger=self.cue_set(obj.get("trigger"), name, f"{where}.trigger", (parser, refinement)),
            frequency=self.number(obj, "frequency", 0.0, where),
            recency=self.number(obj, "recency", 1.0, where),
        )


def build_grammar(data, location="<grammar>"):
    """Grammar from decoded JSON, unvalidated; reference problems are left in `grammar.issues`."""
    if not isinstance(data, dict):
        raise ParseError(location, "top level must be an object")
    unknown = [key for key in data if key not in TOP_LEVEL_KEYS]
    if unknown:
        raise ParseError(location, f"unknown top-level key(s) {unknown}")
    builder = _Builder(location)

    declared = {}
    if not isinstance(data.get("hierarchy", {}), dict):
        raise ParseError(f"{location}:hierarchy", "expected an object mapping types to supertypes")
    for type_tag, supertypes in data.get("hierarchy", {}).items():
        supertypes = [supertypes] if isinstance(supertypes, str) else supertypes
        if not isinstance(supertypes, list):
            raise ParseError(f"{location}:hierarchy.{type_tag}", "supertypes must be a list")
        declared[type_tag] = list(supertypes)

    sections = {}
    for key, build in (("constructions", builder.construction), ("frames", builder.frame),
                       ("events", builder.event)):
        table = data.get(key, {})
        if not isinstance(table, dict):
            raise ParseError(f"{location}:{key}", "expected an object keyed by name")
        sections[key] = {name: build(name, obj) for name, obj in table.items()}

    hierarchy = TypeHierarchy(declared)
    for construction in sections["constructions"].values():
        hierarchy.add(construction.name, construction.supertypes)
    for frame in sections["frames"].values():
        hierarchy.add(frame.name, frame.parents())

    grammar = Grammar(hierarchy, sections["constructions"], sections["frames"], sections["events"],
                      declared, location)
    grammar.issues = builder.issues
    return grammar


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------

def compute_fans(grammar):
    """Cue key -> number of grammar objects listing that cue."""
    fans = {}
    for _, obj in grammar.objects():
        for key in obj.cues.keys():
            fans[key] = fans.get(key, 0) + 1
    return fans


def validate_grammar(grammar, vectors=None):
    """Every rule violation as (object name, rule); expansions and fans are cached on the way."""
    issues = list(grammar.issues)
    known_types = set(grammar.declared_hierarchy) | set(grammar.constructions) | set(grammar.frames)
    for supertypes in grammar.declared_hierarchy.values():
        known_types.update(supertypes)

    owners = {}
    for category, obj in grammar.objects():
        owners.setdefault(obj.name, []).append(category)
    for name, categories in owners.items():
        if len(categories) > 1:
            issues.append((name, f"name used by more than one kind of object ({', '.join(categories)})"))

    cyclic = grammar.hierarchy.find_cycles()
    for type_tag in cyclic:
        issues.append((type_tag, "type hierarchy cycle"))

    for c in grammar.constructions.values():
        for supertype in c.supertypes:
            if supertype not in known_types:
                issues.append((c.name, f"unknown supertype {supertype}"))
        for participant in c.participants:
            if participant not in grammar.constructions:
                issues.append((c.name, f"unknown participant construction {participant}"))
        if c.direct_eligible and not len(c.cues):
            issues.append((c.name, "construction with a frame meaning needs at least one cue"))
        val = resolve_path(c.sign, ("form", "syn", "val"))
        if not c.covert_args and isinstance(val, FeatureList) and c.arg_st is not None \
                and not unifiable(val, c.arg_st, grammar.hierarchy):
            issues.append((c.name, "arg-st and val are not element-wise unifiable"))
        if c.frequency < 0 or c.recency <= 0:
            issues.append((c.name, "frequency must be >= 0 and recency > 0"))
        if c.name not in cyclic:
            try:
                grammar._expanded[c.name] = expand_inheritance(c, grammar)
            except InheritanceClash as e:
                issues.append((c.name, str(e)))

    for frame in grammar.frames.values():
        for kind, target in frame.relations:
            if kind not in RELATION_KINDS:
                issues.append((frame.name, f"unknown frame relation {kind}"))
            if target not in grammar.frames:
                issues.append((frame.name, f"relation target {target} is not a frame"))
        for role, fillers in frame.prototypes.items():
            if role not in frame.elements:
                issues.append((frame.name, f"prototype for unknown role {role}"))
            for word, weight in fillers:
                if weight <= 0:
                    issues.append((frame.name, f"prototype weight for {word} must be positive"))
                if vectors is not None and word not in vectors:
                    issues.append((frame.name, f"prototype filler {word} is out of vocabulary"))
        if vectors is not None:
            for cue in frame.lex_cues:
                word = cue.vector if cue.vector is not None else cue.form
                if word not in vectors:
                    issues.append((frame.name, f"lexical cue {cue.label} is out of vocabulary"))
        if frame.frequency < 0 or frame.recency <= 0:
            issues.append((frame.name, "frequency must be >= 0 and recency > 0"))

    for event in grammar.events.values():
        target = event.specialize_target
        if grammar.category_of(target) not in (CONSTRUCTION, FRAME):
            issues.append((event.name, f"specialize target {target} does not exist"))
        elif not len(event.trigger):
            issues.append((event.name, "event needs at least one trigger cue"))
        elif target not in cyclic:
            try:
                loose_unify(grammar.instantiate(target), event.refinement, grammar.hierarchy,
                            _AnyVectors(), -1.0)
            except (UnificationFailure, InheritanceClash) as e:
                issues.append((event.name, f"refinement does not unify with {target}: {e}"))

    grammar.fans = compute_fans(grammar)
    return issues


def load_grammar(source, vectors=None):
    """Parse and fully validate a grammar file (path or byte/text stream)."""
    text, location = _read_source(source)
    grammar = build_grammar(_decode_json(text, location), location)
    issues = validate_grammar(grammar, vectors)
    if issues:
        raise ValidationError(issues)
    logger.info("Loaded grammar %s: %d constructions, %d frames, %d events", location,
                len(grammar.constructions), len(grammar.frames), len(grammar.events))
    return grammar


# ---------------------------------------------------------------------------
# Inheritance and events
# ---------------------------------------------------------------------------

def expand_inheritance(construction, grammar):
    """Fold every ancestor construction, most generic first, then the construction itself."""
    ancestors = grammar.hierarchy.ancestors(construction.name)
    names = grammar.hierarchy.topological(
        [name for name in grammar.constructions if name != construction.name and name in ancestors])
    if not names:
        return construction
    layers = [(name, grammar.constructions[name].sign) for name in names]
    layers.append((construction.name, construction.sign))

    result = layers[0][1]
    for position in range(1, len(layers)):
        name, sign = layers[position]
        try:
            result = unify(result, sign, grammar.hierarchy)
        except Clash as clash:
            first, path = _blame(layers[:position], sign, grammar.hierarchy, clash)
            raise InheritanceClash(construction.name, first, name, path)

    properties = []
    for name in names + [construction.name]:
        source = construction if name == construction.name else grammar.constructions[name]
        for constraint in source.properties:
            if constraint not in properties:
                properties.append(constraint)
    return replace(construction, sign=result, properties=tuple(properties), expanded=True)


def _blame(earlier, sign, hierarchy, clash):
    for name, other in earlier:
        try:
            unify(other, sign, hierarchy)
        except Clash as e:
            return name, e.path
    return earlier[-1][0], clash.path


def expectation_paths(event):
    """Slots an event pre-fills: refinement arg-st items, or its top-level elements."""
    arg_st = event.refinement.get("arg-st")
    if isinstance(arg_st, FeatureList):
        return [("arg-st", k) for k, item in enumerate(arg_st.items) if isinstance(item, FeatureStructure)]
    return [(name,) for name, value in event.refinement.features.items() if isinstance(value, FeatureStructure)]


def apply_event(event, target_instance, hierarchy, vectors, sim_threshold):
    """Loose-unify the refinement in; slots it adds information to are marked expected.

    Raises Clash or SimilarityBelowThreshold.
    """
    result = loose_unify(target_instance, event.refinement, hierarchy, vectors, sim_threshold)
    expected = []
    for path in expectation_paths(event):
        before = resolve_path(target_instance, path)
        after = resolve_path(result, path)
        if not isinstance(after, FeatureStructure):
            continue
        if isinstance(before, FeatureStructure):
            if before.provenance == Provenance.OBSERVED or subsumes(after, before, hierarchy):
                continue
        expected.append(after.node_id)
    if expected:
        result = mark(result, expected, Provenance.EXPECTED)
    logger.debug("Applied %s, %d slot(s) expected", event.name, len(expected))
    return result


# ---------------------------------------------------------------------------
# Writing
# ---------------------------------------------------------------------------

def _dump_lexical(cue, tag_of=None, sign=None):
    if cue.path is not None and sign is not None:
        body = {"tag": tag_of[resolve_path(sign, cue.path).node_id]}
    elif cue.vector is not None:
        body = {"vec": cue.vector}
    else:
        body = {"form": cue.form}
    if cue.declared:
        body["weight"] = cue.weight
    return body


def _dump_syntactic(cue):
    if cue.kind is not None:
        body = {"property": cue.kind.value}
    else:
        body = {"path": list(cue.path), "value": dump_avm(cue.value)[0]}
    if cue.declared:
        body["weight"] = cue.weight
    return body


def _dump_cues(cues, tag_of=None, sign=None):
    body = {}
    if cues.lexical:
        body["lexical"] = [_dump_lexical(cue, tag_of, sign) for cue in cues.lexical]
    if cues.syntactic:
        body["syntactic"] = [_dump_syntactic(cue) for cue in cues.syntactic]
    return body


def _cue_nodes(cues, sign):
    return [resolve_path(sign, cue.path).node_id for cue in cues.lexical if cue.path is not None]


def _dump_construction(c):
    participant_nodes = [resolve_path(c.sign, path).node_id
                         for constraint in c.properties for path in constraint.paths]
    sign_json, tag_of = dump_avm(c.sign, participant_nodes + _cue_nodes(c.cues, c.sign))
    body = {}
    for key, value in (("supertypes", list(c.supertypes)), ("participants", list(c.participants))):
        if value:
            body[key] = value
    if c.opaque_meaning:
        body["opaque_meaning"] = True
    if c.covert_args:
        body["covert_args"] = True
    body["frequency"] = c.frequency
    body["recency"] = c.recency
    for key in SIGN_KEYS:
        if key in sign_json:
            body[key] = sign_json[key]
    if c.properties:
        properties = body.setdefault("form", {}).setdefault("properties", {})
        for constraint in c.properties:
            tags = [tag_of[resolve_path(c.sign, path).node_id] for path in constraint.paths]
            entry = tags if constraint.weight == HARD else {"tags": tags, "weight": constraint.weight}
            properties.setdefault(constraint.kind.value, []).append(entry)
    if len(c.cues):
        body["cues"] = _dump_cues(c.cues, tag_of, c.sign)
    return body


def _dump_frame(frame):
    elements, _ = dump_avm(frame.elements)
    if not isinstance(elements, dict):
        elements = {}
    elements = {key: value for key, value in elements.items() if key not in ("@sort", "@tag")}
    body = {"elements": elements}
    if frame.lex_cues:
        body["lex_cues"] = [_dump_lexical(cue) for cue in frame.lex_cues]
    if frame.relations:
        body["relations"] = [list(relation) for relation in frame.relations]
    if frame.prototypes:
        body["prototypes"] = {role: [[word, weight] for word, weight in fillers]
                              for role, fillers in frame.prototypes.items()}
    body["frequency"] = frame.frequency
    body["recency"] = frame.recency
    return body


def _dump_event(event):
    refinement, tag_of = dump_avm(event.refinement, _cue_nodes(event.trigger, event.refinement))
    return {
        "specialize": event.specialize_target,
        "refinement": refinement,
        "trigger": _dump_cues(event.trigger, tag_of, event.refinement),
        "frequency": event.frequency,
        "recency": event.recency,
    }


def dump_grammar(grammar):
    """JSON text that load_grammar reads back into a structurally equal grammar."""
    document = {
        "hierarchy": grammar.declared_hierarchy,
        "constructions": {name: _dump_construction(c) for name, c in grammar.constructions.items()},
        "frames": {name: _dump_frame(f) for name, f in grammar.frames.items()},
        "events": {name: _dump_event(e) for name, e in grammar.events.items()},
    }
    return json.dumps(document, indent=2, ensure_ascii=False)


def structurally_equal(first, second):
    """Same objects in the same order, with isomorphic structures and equal cues."""
    if first.declared_hierarchy != second.declared_hierarchy:
        return False
    for mine, theirs in ((first.constructions, second.constructions), (first.frames, second.frames),
                         (first.events, second.events)):
        if list(mine) != list(theirs):
            return False
    for name, a in first.constructions.items():
        b = second.constructions[name]
        if (a.supertypes, a.participants, a.opaque_meaning, a.covert_args, a.frequency, a.recency,
                a.cues, a.properties) != (b.supertypes, b.participants, b.opaque_meaning, b.covert_args,
                                          b.frequency, b.recency, b.cues, b.properties):
            return False
        if not isomorphic(a.sign, b.sign):
            return False
    for name, a in first.frames.items():
        b = second.frames[name]
        if (a.lex_cues, a.relations, a.prototypes, a.frequency, a.recency) != \
                (b.lex_cues, b.relations, b.prototypes, b.frequency, b.recency):
            return False
        if not isomorphic(a.elements, b.elements):
            return False
    for name, a in first.events.items():
        b = second.events[name]
        if (a.specialize_target, a.trigger, a.frequency, a.recency) != \
                (b.specialize_target, b.trigger, b.frequency, b.recency):
            return False
        if not isomorphic(a.refinement, b.refinement):
            return False
    return True
