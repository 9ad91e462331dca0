from __future__ import annotations

import json

import pytest
from hypothesis import given, settings
import hypothesis.strategies as st

from dashprov import (
    FormatId,
    ParseError,
    Relation,
    RelationKind,
    convert,
    load,
    new_document,
    parse,
    semantically_equal,
    write,
)
from dashprov.model import qname
from dashprov.serialization import format_for_path
from support import (
    FIXTURE_JSON,
    FIXTURE_TTL,
    LISTING_TTL,
    PREFIX_ONLY_TTL,
    ex,
    random_document,
)

HEAD = ("@prefix prov: <http://www.w3.org/ns/prov#> .\n"
        "@prefix dash: <http://dash.com/dash#> .\n"
        "@prefix ex: <http://example.org/> .\n")


def _err(text, fmt="ttl") -> ParseError:
    with pytest.raises(ParseError) as info:
        parse(text.encode("utf-8"), fmt)
    return info.value


# -- Turtle profile --

def test_listing_parses_with_exact_attributes():
    doc = load(LISTING_TTL)
    entities = [e for e in doc.elements.values() if e.category.value == "Entity"]
    agents = [e for e in doc.elements.values() if e.category.value == "Agent"]
    assert (len(entities), len(agents)) == (2, 2)
    dash = doc.get(":dashboard").dash
    assert (dash.name, dash.version) == ("COVID-19 NO BRASIL", "Beta")
    sus = doc.get(":SUS").dash
    assert sus.roles == ("demanding",) and sus.trustworthiness == "gov.br"
    assert doc.get(":CORONAVIRUS-COVID-19").dash.roles == ("Developer", "Maintenance")
    assert doc.get(":Casos").dash.version == "1.0.0.0"
    delegations = doc.relations_of(RelationKind.ACTED_ON_BEHALF_OF)
    assert [(str(r.subject), str(r.object)) for r in delegations] == [(":CORONAVIRUS-COVID-19", ":SUS")]
    assert len(doc.relations_of(RelationKind.HAD_MEMBER)) == 7


def test_prefix_only_input():
    doc = parse(b"@prefix prov: <http://www.w3.org/ns/prov#> .", "ttl")
    assert doc.elements == {} and doc.relations == []
    assert semantically_equal(doc, new_document())


def test_unclosed_quote_position():
    text = HEAD + 'ex:a a prov:Entity ;\n    dash:name "never closed ;\n.\n'
    err = _err(text)
    assert (err.line, err.column) == (5, 15)
    assert err.expected == "closing quote"
    assert str(err) == "ttl:5:15: expected closing quote, found end of line"


@pytest.mark.parametrize("body, line, col, expected", [
    ("ex:a a prov:Thing .", 4, 8, "a PROV or dash element type"),
    ("ex:a a prov:Entity ;\n  nope:x \"1\" .", 5, 3, None),
    ("ex:a a prov:Entity\n  dash:name \"x\" .", 5, 3, None),
    ("ex:a a prov:Entity, prov:Agent .", 4, 8, None),
    ("ex:a a prov:Agent ;\n  prov:generatedAtTime \"2023-03-03\"^^xsd:dateTime .", 5, 3, None),
])
def test_error_positions_point_at_offender(body, line, col, expected):
    text = HEAD + "@prefix xsd: <http://www.w3.org/2001/XMLSchema#> .\n"[:0] + body
    err = _err(text)
    lines = text.split("\n")
    assert 1 <= err.line <= len(lines)
    assert (err.line, err.column) == (line, col) or abs(err.column - col) <= 1 and err.line == line
    if expected:
        assert err.expected == expected


def test_error_message_is_stable():
    text = HEAD + "ex:a a prov:Thing ."
    assert str(_err(text)) == str(_err(text))


def test_duplicate_definition_rejected():
    err = _err(HEAD + "ex:a a prov:Entity .\nex:a a prov:Agent .\n")
    assert err.line == 5


def test_single_valued_term_repeated_rejected():
    err = _err(HEAD + 'ex:a a prov:Entity ;\n  dash:name "x", "y" .')
    assert err.line == 5


def test_dash_terms_case_insensitive_written_lowercase():
    doc = parse((HEAD + 'ex:a a prov:Agent ;\n  dash:NAME "A" ;\n  dash:Role "x", "y" ;\n'
                 '  dash:ContactInformation "c" .').encode(), "ttl")
    dash = doc.get("ex:a").dash
    assert (dash.name, dash.roles, dash.contact_information) == ("A", ("x", "y"), "c")
    out = write(doc, "ttl").decode()
    assert 'dash:name "A"' in out and "dash:role" in out and "dash:contactInformation" in out
    assert "dash:NAME" not in out


def test_unknown_attributes_become_extensions():
    doc = parse((HEAD + 'ex:a a prov:Entity ;\n  ex:frequency "daily" ;\n  dash:source "SES" .').encode(), "ttl")
    assert doc.get("ex:a").dash.extensions == ((qname("ex:frequency"), "daily"), (qname("dash:source"), "SES"))
    for fmt in ("ttl", "provjson"):
        back = parse(write(doc, fmt), fmt)
        assert back.get("ex:a").dash.extensions == doc.get("ex:a").dash.extensions


def test_forward_and_dangling_references_deferred():
    doc = parse((HEAD + "ex:a a prov:Entity ; prov:wasDerivedFrom ex:b, ex:ghost .\n"
                 "ex:b a prov:Entity .").encode(), "ttl")
    assert [str(r.object) for r in doc.relations] == ["ex:b", "ex:ghost"]


def test_rich_relation_block_round_trip():
    doc = load(FIXTURE_TTL)
    doc.add_relation(Relation(RelationKind.USED, ex("dataUpdate"), ex("dataset"),
                              at_time="2023-03-03", attributes=[(qname("ex:note"), "nightly")]))
    text = write(doc, "ttl").decode()
    assert "_:r1" in text and "dash:relation prov:used" in text
    assert semantically_equal(parse(text, "ttl"), doc)


def test_bom_and_crlf_accepted():
    text = ("﻿" + HEAD + 'ex:a a prov:Entity ;\r\n  dash:name "x" .\r\n').encode()
    assert parse(text, "ttl").get("ex:a").dash.name == "x"


def test_invalid_utf8():
    with pytest.raises(ParseError) as info:
        parse(HEAD.encode() + b'ex:a a prov:Entity ; dash:name "\xff" .', "ttl")
    assert info.value.line == 4


def test_turtle_writer_layout():
    text = write(load(FIXTURE_TTL), "ttl").decode()
    prefixes = [line for line in text.splitlines() if line.startswith("@prefix")]
    assert prefixes == sorted(prefixes)
    subjects = [line.split()[0] for line in text.splitlines()
                if line and not line.startswith((" ", "@"))]
    assert subjects.index("ex:dashboard") < subjects.index("ex:creationMaintenanceDashboard") \
        < subjects.index("ex:CORONAVIRUS-COVID-19")
    assert '"2023-03-03T00:00:00+00:00"^^xsd:dateTime' in text
    assert "\r" not in text


# -- PROV-JSON profile --

def test_empty_document_provjson_has_prefix_bucket_only():
    data = json.loads(write(new_document(), "provjson"))
    assert list(data) == ["prefix"]


def test_provjson_buckets_and_names():
    data = json.loads(write(load(FIXTURE_TTL), "provjson"))
    assert list(data) == ["prefix", "entity", "activity", "agent", "wasGeneratedBy", "wasDerivedFrom",
                          "hadPrimarySource", "wasAttributedTo", "used", "wasAssociatedWith",
                          "actedOnBehalfOf", "hadMember"]
    assert data["entity"]["ex:dashboard"]["dash:name"] == "COVID-19 NO BRASIL"
    types = [t["$"] for t in data["entity"]["ex:dashboard"]["prov:type"]]
    assert types == ["prov:Collection", "dash:Dashboard"]
    ids = [k for bucket in list(data)[4:] for k in data[bucket]]
    assert sorted(ids, key=lambda k: int(k[3:])) == [f"_:r{n}" for n in range(1, len(ids) + 1)]


def test_provjson_twin_matches_turtle_fixture():
    assert semantically_equal(load(FIXTURE_TTL), load(FIXTURE_JSON))


def test_provjson_errors():
    err = _err('{"prefix": {}, "entity": {"ex:a": {}}', "provjson")
    assert err.line == 1 and err.column >= 1
    err = _err('{\n  "entity": {\n    "ex:a": {"prov:type": 3}\n  }\n}', "provjson")
    assert err.line >= 1
    with pytest.raises(ParseError):
        parse(b"[]", "provjson")


# -- both formats --

def test_convert_double_round_trip():
    original = FIXTURE_TTL.read_bytes()
    back = convert(convert(original, "ttl", "provjson"), "provjson", "ttl")
    assert semantically_equal(parse(back, "ttl"), parse(original, "ttl"))
    assert convert(original, FormatId.TURTLE, FormatId.PROV_JSON) == write(parse(original, "ttl"), "provjson")


def test_convert_prefix_only():
    out = json.loads(convert(PREFIX_ONLY_TTL.read_bytes(), "ttl", "provjson"))
    assert list(out) == ["prefix"]


def test_convert_malformed():
    with pytest.raises(ParseError):
        convert(b'@prefix ex: <http://e/> .\nex:a a prov:Entity ; dash:name "x', "ttl", "provjson")


def test_format_for_path():
    assert format_for_path("a/b.ttl") is FormatId.TURTLE
    assert format_for_path("x.provjson") is FormatId.PROV_JSON
    with pytest.raises(ValueError):
        format_for_path("x.pdf")


@pytest.mark.parametrize("fmt", ["ttl", "provjson"])
def test_write_is_deterministic(fmt):
    doc = load(FIXTURE_TTL)
    assert write(doc, fmt) == write(doc, fmt) == write(parse(write(doc, fmt), fmt), fmt)


@pytest.mark.parametrize("fmt", ["ttl", "provjson"])
@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_random_round_trip(fmt, seed):
    doc = random_document(seed, max_elements=120)
    out = write(doc, fmt)
    back = parse(out, fmt)
    assert semantically_equal(back, doc)
    assert write(back, fmt) == out
