#!/usr/bin/env python3
"""
AVM notation used by grammar files.

    null                      unspecified
    "N"                       atom (featureless structure of sort N)
    true / false              atoms "+" / "-"
    3, 0.5                    numbers
    {"@text": "put"}          text
    {"vec": "book"}           vector reference ({"prototype": true} for slot prototypes)
    [a, b, "..."]             list, trailing "..." leaves the tail open
    {"@sort": "NP", "case": "nom"}
    "#2"                      reentrancy tag; the tagged content is written once as
                              {"@tag": "#2", ...} or {"@tag": "#2", "@value": <any AVM>}

Keys starting with "@" are reserved; everything else is a feature name.
"""

import logging
import re

from errors import ParseError, format_path
from feature_structure import (
    TOP,
    FeatureList,
    FeatureStructure,
    Number,
    Provenance,
    Text,
    Unspecified,
    VectorRef,
    atom,
    iter_paths,
    shared_nodes,
)

logger = logging.getLogger(__name__)

TAG_PATTERN = re.compile(r"^#(\d+)$")
OPEN_TAIL = "..."
RESERVED_KEYS = ("@sort", "@tag", "@value", "@provenance", "@text")


def is_tag(value):
    return isinstance(value, str) and TAG_PATTERN.match(value) is not None


class AvmParser:
    """Builds one structure (one tag scope) from its JSON form."""

    def __init__(self, location="<avm>"):
        self.location = location
        self.contents = {}
        self.occurrences = {}
        self.nodes = {}
        self._building = []

    def error(self, path, reason):
        return ParseError(f"{self.location}:{format_path(path)}", reason)

    def parse(self, obj):
        self._collect(obj, ())
        return self._build(obj, ())

    def node_for_tag(self, tag):
        """Node bound to `tag` after parse(); None when the tag never occurred."""
        return self.nodes.get(tag)

    def _collect(self, obj, path):
        if isinstance(obj, str) and is_tag(obj):
            self.occurrences[obj] = self.occurrences.get(obj, 0) + 1
        elif isinstance(obj, list):
            for index, item in enumerate(obj):
                self._collect(item, path + (index,))
        elif isinstance(obj, dict):
            tag = obj.get("@tag")
            if tag is not None:
                if not is_tag(tag):
                    raise self.error(path, f"malformed tag {tag!r}")
                if tag in self.contents:
                    raise self.error(path, f"tag {tag} carries content twice")
                self.contents[tag] = (obj, path)
                self.occurrences[tag] = self.occurrences.get(tag, 0) + 1
            for key, value in obj.items():
                if key == "@value" or not key.startswith("@"):
                    self._collect(value, path + (key,))

    def _build(self, obj, path):
        if obj is None:
            return Unspecified()
        if isinstance(obj, bool):
            return atom("+" if obj else "-")
        if isinstance(obj, (int, float)):
            return Number(obj)
        if isinstance(obj, str):
            if is_tag(obj):
                return self._tagged(obj, path)
            if obj == OPEN_TAIL:
                raise self.error(path, '"..." is only allowed as the last list item')
            return atom(obj)
        if isinstance(obj, list):
            open_tail = bool(obj) and obj[-1] == OPEN_TAIL
            items = obj[:-1] if open_tail else obj
            return FeatureList([self._build(item, path + (index,)) for index, item in enumerate(items)],
                               open_tail)
        if isinstance(obj, dict):
            if "@tag" in obj:
                return self._tagged(obj["@tag"], path)
            return self._build_object(obj, path)
        raise self.error(path, f"unsupported value {obj!r}")

    def _tagged(self, tag, path):
        node = self.nodes.get(tag)
        if node is not None:
            return node
        if tag in self._building:
            raise self.error(path, f"tag {tag} contains itself (cyclic structure)")
        self._building.append(tag)
        content = self.contents.get(tag)
        node = self._build_object(content[0], content[1]) if content else Unspecified()
        self._building.pop()
        self.nodes[tag] = node
        return node

    def _build_object(self, obj, path):
        keys = [key for key in obj if key != "@tag"]
        unknown = [key for key in keys if key.startswith("@") and key not in RESERVED_KEYS]
        if unknown:
            raise self.error(path, f"unknown reserved key(s) {unknown}")
        if "@value" in obj:
            if keys != ["@value"]:
                raise self.error(path, '"@value" cannot be combined with other keys')
            return self._build(obj["@value"], path)
        if "@text" in obj:
            if keys != ["@text"] or not isinstance(obj["@text"], str):
                raise self.error(path, '"@text" must hold a string and stand alone')
            return Text(obj["@text"])
        if "vec" in obj:
            extra = [key for key in keys if key not in ("vec", "prototype")]
            if extra or not isinstance(obj["vec"], str):
                raise self.error(path, f"malformed vector reference {obj!r}")
            return VectorRef(obj["vec"], obj.get("prototype", False))
        sort = obj.get("@sort", TOP)
        if not isinstance(sort, str):
            raise self.error(path, f"@sort must be a string, got {sort!r}")
        provenance = obj.get("@provenance")
        if provenance is not None and provenance not in (p.value for p in Provenance):
            raise self.error(path, f"unknown provenance {provenance!r}")
        features = {key: self._build(value, path + (key,))
                    for key, value in obj.items() if not key.startswith("@")}
        return FeatureStructure(sort, features, provenance)


def parse_avm(obj, location="<avm>"):
    return AvmParser(location).parse(obj)


def dump_avm(value, force_tags=()):
    """JSON form of `value` plus the tag assigned to each tagged node_id.

    Nodes reached by several paths are always tagged; `force_tags` adds more.
    """
    tagged = shared_nodes(value) | set(force_tags)
    tag_of = {}
    for _, node in iter_paths(value):
        if node.node_id in tagged and node.node_id not in tag_of:
            tag_of[node.node_id] = f"#{len(tag_of) + 1}"
    emitted = set()

    def render(node):
        tag = tag_of.get(node.node_id)
        if tag is not None:
            if node.node_id in emitted:
                return tag
            emitted.add(node.node_id)
        if isinstance(node, Unspecified):
            return tag if tag else None
        if isinstance(node, FeatureStructure):
            if node.is_atom and node.provenance is None and tag is None:
                if node.type_tag == TOP:
                    return {}
                if is_tag(node.type_tag) or node.type_tag == OPEN_TAIL:
                    return {"@sort": node.type_tag}
                return node.type_tag
            body = {}
            if tag:
                body["@tag"] = tag
            if node.type_tag != TOP:
                body["@sort"] = node.type_tag
            if node.provenance is not None:
                body["@provenance"] = node.provenance.value
            for name, child in node.features.items():
                body[name] = render(child)
            return body
        if isinstance(node, VectorRef):
            body = {"vec": node.word}
            if node.prototype:
                body["prototype"] = True
        elif isinstance(node, Text):
            body = {"@text": node.text}
        elif isinstance(node, Number):
            body = node.value
        else:
            body = [render(item) for item in node.items] + ([OPEN_TAIL] if node.open_tail else [])
        if tag is None:
            return body
        if isinstance(body, dict):
            return {"@tag": tag, **body}
        return {"@tag": tag, "@value": body}

    return render(value), tag_of
