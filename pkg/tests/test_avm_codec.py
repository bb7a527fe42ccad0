"""AVM notation: parsing, tag scopes and dumping."""

import pytest

from avm_codec import OPEN_TAIL, AvmParser, dump_avm, is_tag, parse_avm
from errors import ParseError
from feature_structure import (
    TOP,
    FeatureList,
    FeatureStructure,
    Number,
    Provenance,
    Text,
    Unspecified,
    VectorRef,
    isomorphic,
)


def test_scalars_and_atoms() -> None:
    assert isinstance(parse_avm(None), Unspecified)
    assert parse_avm("N").type_tag == "N"
    assert parse_avm(True).type_tag == "+"
    assert parse_avm(False).type_tag == "-"
    assert parse_avm(3).value == 3
    assert isinstance(parse_avm({"@text": "put"}), Text)
    assert parse_avm({}).type_tag == TOP


def test_vectors_and_lists() -> None:
    vec = parse_avm({"vec": "Reader", "prototype": True})
    assert isinstance(vec, VectorRef)
    assert (vec.word, vec.prototype) == ("reader", True)

    items = parse_avm(["a", "b", OPEN_TAIL])
    assert isinstance(items, FeatureList)
    assert items.open_tail and len(items) == 2


def test_tags_make_shared_nodes() -> None:
    fs = parse_avm({"val": ["#1"], "arg-st": [{"@tag": "#1", "cat": "N"}]})
    assert fs["val"].items[0] is fs["arg-st"].items[0]
    assert fs["val"].items[0]["cat"].type_tag == "N"


def test_tag_without_content_is_a_shared_unspecified_node() -> None:
    fs = parse_avm({"a": "#4", "b": "#4"})
    assert isinstance(fs["a"], Unspecified)
    assert fs["a"] is fs["b"]


def test_tagged_non_structure_uses_value() -> None:
    fs = parse_avm({"a": {"@tag": "#1", "@value": ["x"]}, "b": "#1"})
    assert fs["a"] is fs["b"]
    assert isinstance(fs["a"], FeatureList)


def test_node_for_tag() -> None:
    parser = AvmParser("<test>")
    fs = parser.parse({"a": {"@tag": "#2", "@sort": "put"}})
    assert parser.node_for_tag("#2") is fs["a"]
    assert parser.node_for_tag("#9") is None


def test_provenance_key() -> None:
    fs = parse_avm({"@sort": "N", "@provenance": "expected"})
    assert fs.provenance == Provenance.EXPECTED


@pytest.mark.parametrize(
    "obj, reason",
    [
        ({"a": {"@tag": "#1", "b": "#1"}}, "cyclic"),
        ({"a": {"@tag": "#1"}, "b": {"@tag": "#1"}}, "twice"),
        ({"a": {"@tag": "1x"}}, "malformed tag"),
        ({"@bogus": 1}, "reserved"),
        (["...", "a"], "last list item"),
        ({"@value": 1, "x": 2}, "@value"),
        ({"@provenance": "imagined"}, "provenance"),
        ({"vec": "book", "extra": 1}, "vector"),
    ],
)
def test_malformed_notation(obj, reason: str) -> None:
    with pytest.raises(ParseError, match=reason):
        parse_avm(obj, "grammar.json:x")


def test_parse_error_names_the_location() -> None:
    with pytest.raises(ParseError) as info:
        parse_avm({"a": {"@tag": "#1", "b": "#1"}}, "g.json:constructions.x")
    assert "g.json:constructions.x" in str(info.value)


def test_is_tag() -> None:
    assert is_tag("#12")
    assert not is_tag("#")
    assert not is_tag("12")
    assert not is_tag(3)


def test_dump_then_parse_keeps_structure_and_sharing() -> None:
    obj = {
        "@sort": "sign",
        "form": {"surface": [{"@text": "put"}, "all"], "syn": {"cat": {"@sort": "V", "vf": "fin"}}},
        "meaning": {"sem": {"index": {"@tag": "#1", "ds-vector": {"vec": "eggs", "prototype": True}}}},
        "arg-st": [{"index": "#1", "span": [0, 2]}, "..."],
        "flag": {"@sort": "N", "@provenance": "observed"},
        "open": None,
    }
    fs = parse_avm(obj)
    dumped, tag_of = dump_avm(fs)
    again = parse_avm(dumped)
    assert isomorphic(fs, again)
    assert len(tag_of) == 1


def test_dump_forces_tags() -> None:
    fs = parse_avm({"surface": ["put", "all"]})
    node = fs["surface"].items[0]
    dumped, tag_of = dump_avm(fs, [node.node_id])
    assert dumped["surface"][0] == {"@tag": tag_of[node.node_id], "@sort": "put"}


def test_dump_plain_values() -> None:
    fs = FeatureStructure(TOP, {"n": Number(2.5), "top": FeatureStructure(TOP)})
    dumped, _ = dump_avm(fs)
    assert dumped == {"n": 2.5, "top": {}}
