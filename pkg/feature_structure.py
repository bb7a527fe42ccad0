#!/usr/bin/env python3
"""
Typed feature structures with reentrancy: unification, subsumption and
similarity-gated loose unification.

Structures are immutable graphs. Two paths share a value when they reach the
same node object; every operation that combines structures allocates fresh
nodes and leaves its inputs untouched.
"""

import heapq
import itertools
import logging
from enum import Enum
from types import MappingProxyType

from errors import Clash, SimilarityBelowThreshold

logger = logging.getLogger(__name__)

TOP = "*top*"

_node_ids = itertools.count(1)


class Provenance(str, Enum):
    OBSERVED = "observed"
    EXPECTED = "expected"


def merge_provenance(left, right):
    """An observation outranks an expectation, which outranks no marking."""
    if Provenance.OBSERVED in (left, right):
        return Provenance.OBSERVED
    if Provenance.EXPECTED in (left, right):
        return Provenance.EXPECTED
    return None


class _Absent:
    __slots__ = ()

    def __repr__(self):
        return "ABSENT"

    def __bool__(self):
        return False


ABSENT = _Absent()


# ---------------------------------------------------------------------------
# Nodes
# ---------------------------------------------------------------------------

class FeatureValue:
    """Base node. `node_id` identifies the node for reentrancy."""

    __slots__ = ("node_id",)

    def __init__(self):
        object.__setattr__(self, "node_id", next(_node_ids))

    def __setattr__(self, name, value):
        raise AttributeError(f"{type(self).__name__} is immutable")

    def __repr__(self):
        return f"<{type(self).__name__} {to_text(self)}>"


class Unspecified(FeatureValue):
    __slots__ = ()


class Text(FeatureValue):
    __slots__ = ("text",)

    def __init__(self, text):
        super().__init__()
        object.__setattr__(self, "text", str(text))


class Number(FeatureValue):
    __slots__ = ("value",)

    def __init__(self, value):
        super().__init__()
        object.__setattr__(self, "value", value)


class VectorRef(FeatureValue):
    """Reference to a word vector; `prototype` marks a slot expectation rather than a filler."""

    __slots__ = ("word", "prototype")

    def __init__(self, word, prototype=False):
        super().__init__()
        object.__setattr__(self, "word", str(word).lower())
        object.__setattr__(self, "prototype", bool(prototype))


class FeatureList(FeatureValue):
    """Positional list; an open tail accepts any number of further items."""

    __slots__ = ("items", "open_tail")

    def __init__(self, items=(), open_tail=False):
        super().__init__()
        object.__setattr__(self, "items", tuple(items))
        object.__setattr__(self, "open_tail", bool(open_tail))

    def __len__(self):
        return len(self.items)

    def __getitem__(self, index):
        return self.items[index]


class FeatureStructure(FeatureValue):
    """A typed node with ordered features. An atom is a featureless structure."""

    __slots__ = ("type_tag", "_features", "provenance")

    def __init__(self, type_tag=TOP, features=None, provenance=None):
        super().__init__()
        table = dict(features or {})
        for name, value in table.items():
            if not isinstance(value, FeatureValue):
                raise TypeError(f"feature {name!r} holds {type(value).__name__}, not a FeatureValue")
        object.__setattr__(self, "type_tag", str(type_tag))
        object.__setattr__(self, "_features", table)
        object.__setattr__(self, "provenance", Provenance(provenance) if provenance else None)

    @property
    def features(self):
        return MappingProxyType(self._features)

    @property
    def is_atom(self):
        return not self._features

    def __getitem__(self, name):
        return self._features[name]

    def __contains__(self, name):
        return name in self._features

    def get(self, name, default=None):
        return self._features.get(name, default)


def atom(symbol):
    return FeatureStructure(symbol)


# ---------------------------------------------------------------------------
# Type hierarchy
# ---------------------------------------------------------------------------

class TypeHierarchy:
    """Partial order over type tags with multiple inheritance and a single top sort.

    Tags never declared are leaves directly under the top sort.
    """

    def __init__(self, parents=None):
        self._parents = {TOP: ()}
        self._order = [TOP]
        self._ancestor_cache = {}
        for type_tag, supertypes in (parents or {}).items():
            self.add(type_tag, supertypes)

    def add(self, type_tag, supertypes=()):
        if type_tag == TOP:
            return
        known = tuple(s for s in self._parents.get(type_tag, ()) if s != TOP)
        fresh = tuple(s for s in supertypes if s not in (type_tag, TOP))
        merged = tuple(dict.fromkeys(known + fresh)) or (TOP,)
        if type_tag not in self._parents:
            self._order.append(type_tag)
        self._parents[type_tag] = merged
        self._ancestor_cache.clear()

    def __contains__(self, type_tag):
        return type_tag in self._parents

    @property
    def types(self):
        return list(self._order)

    def supertypes(self, type_tag):
        return self._parents.get(type_tag, (TOP,) if type_tag != TOP else ())

    def ancestors(self, type_tag):
        """All supertypes of `type_tag`, itself and the top sort included."""
        cached = self._ancestor_cache.get(type_tag)
        if cached is not None:
            return cached
        seen = {type_tag}
        stack = [type_tag]
        while stack:
            current = stack.pop()
            for parent in self.supertypes(current):
                if parent not in seen:
                    seen.add(parent)
                    stack.append(parent)
        seen.add(TOP)
        result = frozenset(seen)
        self._ancestor_cache[type_tag] = result
        return result

    def is_subtype(self, sub, sup):
        return sup == TOP or sub == sup or sup in self.ancestors(sub)

    def glb(self, left, right):
        """Maximal common subtypes, sorted; empty when the two tags are incompatible."""
        if self.is_subtype(left, right):
            return [left]
        if self.is_subtype(right, left):
            return [right]
        common = [t for t in self._order if self.is_subtype(t, left) and self.is_subtype(t, right)]
        maximal = [t for t in common if not any(u != t and self.is_subtype(t, u) for u in common)]
        return sorted(maximal)

    def find_cycles(self):
        """Type tags that sit on a supertype cycle, in declaration order."""
        state = {}
        cyclic = []

        def visit(node, trail):
            state[node] = "active"
            for parent in self._parents.get(node, ()):
                if state.get(parent) == "active":
                    start = trail.index(parent) if parent in trail else 0
                    for member in trail[start:] + [node]:
                        if member not in cyclic:
                            cyclic.append(member)
                elif parent not in state:
                    visit(parent, trail + [node])
            state[node] = "done"

        for type_tag in self._order:
            if type_tag not in state:
                visit(type_tag, [])
        return cyclic

    def topological(self, tags):
        """Order `tags` most generic first; ties keep the given order."""
        pending = list(dict.fromkeys(tags))
        ordered = []
        while pending:
            for tag in pending:
                if not any(other != tag and self.is_subtype(tag, other) for other in pending):
                    ordered.append(tag)
                    pending.remove(tag)
                    break
            else:
                ordered.extend(pending)
                break
        return ordered


FLAT_HIERARCHY = TypeHierarchy()


# ---------------------------------------------------------------------------
# Traversal helpers
# ---------------------------------------------------------------------------

def children(value):
    if isinstance(value, FeatureStructure):
        return list(value.features.items())
    if isinstance(value, FeatureList):
        return list(enumerate(value.items))
    return []


def resolve_path(value, path):
    """Value reached by following `path` (feature names and list indices), or ABSENT."""
    node = value
    for step in path:
        if isinstance(node, FeatureStructure) and isinstance(step, str) and step in node:
            node = node[step]
        elif isinstance(node, FeatureList) and isinstance(step, int) and 0 <= step < len(node.items):
            node = node.items[step]
        else:
            return ABSENT
    return node


def iter_paths(value, prefix=()):
    """Every (path, node) pair, shared nodes once per path, in feature order."""
    yield prefix, value
    for step, child in children(value):
        yield from iter_paths(child, prefix + (step,))


def iter_nodes(value):
    """Each distinct node once, paired with the first path that reaches it."""
    seen = set()
    for path, node in iter_paths(value):
        if node.node_id not in seen:
            seen.add(node.node_id)
            yield path, node


def first_path(value, node_id, skip=()):
    for path, node in iter_paths(value):
        if node.node_id == node_id and not (path and path[0] in skip):
            return path
    return None


def shared_nodes(value):
    """node_ids with two or more incoming edges (the reentrant nodes)."""
    incoming = {}
    for _, node in iter_nodes(value):
        for _, child in children(node):
            incoming[child.node_id] = incoming.get(child.node_id, 0) + 1
    return {node_id for node_id, count in incoming.items() if count > 1}


def _rebuild(value, transform):
    """Copy a graph keeping its sharing; `transform(node)` may return a replacement or None."""
    memo = {}

    def copy(node):
        done = memo.get(node.node_id)
        if done is not None:
            return done
        replacement = transform(node)
        if replacement is not None:
            memo[node.node_id] = replacement
            return replacement
        if isinstance(node, FeatureStructure):
            result = FeatureStructure(
                node.type_tag,
                {name: copy(child) for name, child in node.features.items()},
                node.provenance,
            )
        elif isinstance(node, FeatureList):
            result = FeatureList([copy(item) for item in node.items], node.open_tail)
        elif isinstance(node, Text):
            result = Text(node.text)
        elif isinstance(node, Number):
            result = Number(node.value)
        elif isinstance(node, VectorRef):
            result = VectorRef(node.word, node.prototype)
        else:
            result = Unspecified()
        memo[node.node_id] = result
        return result

    return copy(value)


def copy_structure(value):
    return _rebuild(value, lambda node: None)


def substitute(value, replacements):
    """Copy of `value` where every node whose id is a key of `replacements` is swapped for its value."""
    return _rebuild(value, lambda node: replacements.get(node.node_id))


def mark(value, node_ids, provenance):
    """Copy of `value` with the structures in `node_ids` marked with `provenance`."""
    provenance = Provenance(provenance) if provenance else None
    targets = set(node_ids)
    memo = {}

    def copy(node):
        done = memo.get(node.node_id)
        if done is not None:
            return done
        if isinstance(node, FeatureStructure):
            result = FeatureStructure(
                node.type_tag,
                {name: copy(child) for name, child in node.features.items()},
                provenance if node.node_id in targets else node.provenance,
            )
        elif isinstance(node, FeatureList):
            result = FeatureList([copy(item) for item in node.items], node.open_tail)
        else:
            result = copy_structure(node)
        memo[node.node_id] = result
        return result

    return copy(value)


def with_feature(structure, name, value):
    """New root with `name` set to `value`; everything below the root stays shared."""
    table = dict(structure.features)
    table[name] = value
    return FeatureStructure(structure.type_tag, table, structure.provenance)


def embed(path, value):
    """Smallest structure holding `value` at `path`; list steps become open lists."""
    node = value
    for step in reversed(tuple(path)):
        if isinstance(step, int):
            node = FeatureList([Unspecified() for _ in range(step)] + [node], open_tail=True)
        else:
            node = FeatureStructure(TOP, {step: node})
    return node


# ---------------------------------------------------------------------------
# Unification
# ---------------------------------------------------------------------------

def _path_key(path):
    return (len(path), tuple((0, step) if isinstance(step, str) else (1, step) for step in path))


class _Cell:
    __slots__ = ("kind", "type_tag", "features", "items", "open_tail",
                 "scalar", "word", "prototype", "provenance")

    def __init__(self, kind, **fields):
        self.kind = kind
        self.type_tag = fields.get("type_tag")
        self.features = fields.get("features", {})
        self.items = fields.get("items", [])
        self.open_tail = fields.get("open_tail", False)
        self.scalar = fields.get("scalar")
        self.word = fields.get("word")
        self.prototype = fields.get("prototype", False)
        self.provenance = fields.get("provenance")

    def describe(self):
        if self.kind == "fs":
            return self.type_tag if not self.features else f"[{self.type_tag} ...]"
        if self.kind == "vec":
            return f"->{self.word}"
        if self.kind in ("text", "number"):
            return repr(self.scalar)
        if self.kind == "list":
            return f"<{len(self.items)} items{', ...' if self.open_tail else ''}>"
        return "unspecified"


class _Unifier:
    """Union-find over the nodes of both operands, pairs visited in (depth, path) order."""

    def __init__(self, hierarchy, vectors=None, threshold=None, loose=False):
        self.hierarchy = hierarchy or FLAT_HIERARCHY
        self.vectors = vectors
        self.threshold = threshold
        self.loose = loose
        self.parent = {}
        self.cells = {}
        self.queue = []
        self.counter = itertools.count()

    def register(self, value):
        for _, node in iter_nodes(value):
            if node.node_id in self.parent:
                continue
            self.parent[node.node_id] = node.node_id
            if isinstance(node, FeatureStructure):
                cell = _Cell("fs", type_tag=node.type_tag, provenance=node.provenance,
                             features={name: child.node_id for name, child in node.features.items()})
            elif isinstance(node, FeatureList):
                cell = _Cell("list", items=[item.node_id for item in node.items], open_tail=node.open_tail)
            elif isinstance(node, Text):
                cell = _Cell("text", scalar=node.text)
            elif isinstance(node, Number):
                cell = _Cell("number", scalar=node.value)
            elif isinstance(node, VectorRef):
                cell = _Cell("vec", word=node.word, prototype=node.prototype)
            else:
                cell = _Cell("unspec")
            self.cells[node.node_id] = cell

    def find(self, node_id):
        root = node_id
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[node_id] != root:
            self.parent[node_id], node_id = root, self.parent[node_id]
        return root

    def push(self, path, left, right):
        heapq.heappush(self.queue, (_path_key(path), next(self.counter), path, left, right))

    def run(self, left, right):
        self.register(left)
        self.register(right)
        self.push((), left.node_id, right.node_id)
        while self.queue:
            _, _, path, x, y = heapq.heappop(self.queue)
            rx, ry = self.find(x), self.find(y)
            if rx == ry:
                continue
            merged = self.merge(self.cells[rx], self.cells[ry], path)
            self.parent[ry] = rx
            self.cells[rx] = merged
            del self.cells[ry]
        return self.build(self.find(left.node_id))

    def merge(self, cx, cy, path):
        if cx.kind == "unspec":
            return cy
        if cy.kind == "unspec":
            return cx
        if cx.kind != cy.kind:
            raise Clash(path, cx.describe(), cy.describe(), "kind mismatch")
        if cx.kind == "fs":
            return self._merge_structures(cx, cy, path)
        if cx.kind == "list":
            return self._merge_lists(cx, cy, path)
        if cx.kind == "vec":
            return self._merge_vectors(cx, cy, path)
        if cx.scalar != cy.scalar:
            raise Clash(path, cx.describe(), cy.describe(), f"{cx.kind} mismatch")
        return cx

    def _merge_structures(self, cx, cy, path):
        if cx.type_tag == cy.type_tag:
            type_tag = cx.type_tag
        else:
            candidates = self.hierarchy.glb(cx.type_tag, cy.type_tag)
            if not candidates:
                raise Clash(path, cx.type_tag, cy.type_tag, "incompatible types")
            if len(candidates) > 1:
                raise Clash(path, cx.type_tag, cy.type_tag,
                            f"ambiguous greatest lower bound {candidates}")
            type_tag = candidates[0]
        features = dict(cx.features)
        for name, child in cy.features.items():
            if name in features:
                self.push(path + (name,), features[name], child)
            else:
                features[name] = child
        return _Cell("fs", type_tag=type_tag, features=features,
                     provenance=merge_provenance(cx.provenance, cy.provenance))

    def _merge_lists(self, cx, cy, path):
        nx, ny = len(cx.items), len(cy.items)
        if (not cx.open_tail and not cy.open_tail and nx != ny) \
                or (not cx.open_tail and ny > nx) or (not cy.open_tail and nx > ny):
            raise Clash(path, cx.describe(), cy.describe(), "list length mismatch")
        for index in range(min(nx, ny)):
            self.push(path + (index,), cx.items[index], cy.items[index])
        longer = cx.items if nx >= ny else cy.items
        items = list(cx.items[:min(nx, ny)]) + list(longer[min(nx, ny):])
        return _Cell("list", items=items, open_tail=cx.open_tail and cy.open_tail)

    def _merge_vectors(self, cx, cy, path):
        if cx.word == cy.word:
            return _Cell("vec", word=cx.word, prototype=cx.prototype and cy.prototype)
        if not self.loose:
            raise Clash(path, cx.describe(), cy.describe(), "different vectors")
        score = self.vectors.similarity(cx.word, cy.word) if self.vectors is not None else None
        if score is None or score < self.threshold:
            raise SimilarityBelowThreshold(path, score, cx.word, cy.word, self.threshold)
        if cx.prototype and not cy.prototype:
            return cy
        return cx

    def build(self, root):
        self._check_acyclic(root)
        memo = {}

        def make(node_id):
            rep = self.find(node_id)
            done = memo.get(rep)
            if done is not None:
                return done
            cell = self.cells[rep]
            if cell.kind == "fs":
                node = FeatureStructure(cell.type_tag,
                                        {name: make(child) for name, child in cell.features.items()},
                                        cell.provenance)
            elif cell.kind == "list":
                node = FeatureList([make(item) for item in cell.items], cell.open_tail)
            elif cell.kind == "text":
                node = Text(cell.scalar)
            elif cell.kind == "number":
                node = Number(cell.scalar)
            elif cell.kind == "vec":
                node = VectorRef(cell.word, cell.prototype)
            else:
                node = Unspecified()
            memo[rep] = node
            return node

        return make(root)

    def _check_acyclic(self, root):
        state = {}
        stack = [(self.find(root), False)]
        while stack:
            rep, leaving = stack.pop()
            if leaving:
                state[rep] = "done"
                continue
            if state.get(rep) == "done":
                continue
            state[rep] = "active"
            stack.append((rep, True))
            cell = self.cells[rep]
            successors = list(cell.features.values()) if cell.kind == "fs" else \
                list(cell.items) if cell.kind == "list" else []
            for child in successors:
                child_rep = self.find(child)
                if state.get(child_rep) == "active":
                    raise Clash((), "structure", "structure", "cyclic result")
                if child_rep not in state:
                    stack.append((child_rep, False))


def unify(a, b, hierarchy=None):
    """Most general structure subsumed by both `a` and `b`.

    Raises Clash with the failing path and the two incompatible values.
    """
    return _Unifier(hierarchy).run(a, b)


def loose_unify(a, b, hierarchy, vectors, sim_threshold):
    """Like unify, except that differing vectors merge when their cosine reaches `sim_threshold`.

    The merged node keeps the filler vector over a prototype vector, else the left one.
    Raises Clash or SimilarityBelowThreshold.
    """
    return _Unifier(hierarchy, vectors, sim_threshold, loose=True).run(a, b)


def unifiable(a, b, hierarchy=None):
    try:
        unify(a, b, hierarchy)
    except Clash:
        return False
    return True


def subsumes(general, specific, hierarchy=None):
    """True when every path, value and reentrancy of `general` is present in `specific`."""
    hierarchy = hierarchy or FLAT_HIERARCHY
    mapping = {}

    def check(g, s):
        bound = mapping.get(g.node_id)
        if bound is not None:
            return bound == s.node_id
        mapping[g.node_id] = s.node_id
        if isinstance(g, Unspecified):
            return True
        if type(g) is not type(s):
            return False
        if isinstance(g, FeatureStructure):
            if not hierarchy.is_subtype(s.type_tag, g.type_tag):
                return False
            return all(name in s and check(child, s[name]) for name, child in g.features.items())
        if isinstance(g, FeatureList):
            if g.open_tail:
                if len(s.items) < len(g.items):
                    return False
            elif s.open_tail or len(s.items) != len(g.items):
                return False
            return all(check(gi, si) for gi, si in zip(g.items, s.items))
        if isinstance(g, Text):
            return g.text == s.text
        if isinstance(g, Number):
            return g.value == s.value
        if isinstance(g, VectorRef):
            return g.word == s.word or (g.prototype and not s.prototype)
        return False

    return check(general, specific)


def isomorphic(x, y):
    """Structural equality up to node_id renaming; feature order is ignored."""
    forward, backward = {}, {}

    def walk(a, b):
        if a.node_id in forward or b.node_id in backward:
            return forward.get(a.node_id) == b.node_id and backward.get(b.node_id) == a.node_id
        forward[a.node_id] = b.node_id
        backward[b.node_id] = a.node_id
        if type(a) is not type(b):
            return False
        if isinstance(a, FeatureStructure):
            if a.type_tag != b.type_tag or a.provenance != b.provenance:
                return False
            if set(a.features) != set(b.features):
                return False
            return all(walk(child, b[name]) for name, child in a.features.items())
        if isinstance(a, FeatureList):
            if a.open_tail != b.open_tail or len(a.items) != len(b.items):
                return False
            return all(walk(ai, bi) for ai, bi in zip(a.items, b.items))
        if isinstance(a, Text):
            return a.text == b.text
        if isinstance(a, Number):
            return a.value == b.value
        if isinstance(a, VectorRef):
            return a.word == b.word and a.prototype == b.prototype
        return True

    return walk(x, y)


# ---------------------------------------------------------------------------
# Display
# ---------------------------------------------------------------------------

def to_text(value):
    """One-line AVM rendering with `#n` tags on shared nodes."""
    shared = shared_nodes(value)
    tags = {}

    def render(node):
        prefix = ""
        if node.node_id in shared:
            if node.node_id in tags:
                return f"#{tags[node.node_id]}"
            tags[node.node_id] = len(tags) + 1
            prefix = f"#{tags[node.node_id]}"
        if isinstance(node, FeatureStructure):
            if node.is_atom and node.provenance is None:
                body = node.type_tag
            else:
                inner = " ".join(f"{name}: {render(child)}" for name, child in node.features.items())
                sort = "" if node.type_tag == TOP else node.type_tag
                flag = f" ({node.provenance.value})" if node.provenance else ""
                body = f"[{sort}{' ' if sort and inner else ''}{inner}]{flag}"
        elif isinstance(node, FeatureList):
            items = [render(item) for item in node.items] + (["..."] if node.open_tail else [])
            body = "<" + ", ".join(items) + ">"
        elif isinstance(node, Text):
            body = repr(node.text)
        elif isinstance(node, Number):
            body = repr(node.value)
        elif isinstance(node, VectorRef):
            body = ("~" if node.prototype else "") + "->" + node.word
        else:
            body = "_"
        return f"{prefix}{body}"

    return render(value)
