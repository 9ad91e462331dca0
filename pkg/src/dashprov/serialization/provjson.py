"""PROV-JSON profile.

Top-level buckets are ``prefix``, ``entity``, ``activity``, ``agent`` and one
bucket per relation kind. Relation records are keyed ``_:r1``, ``_:r2``, ...
in document order. The empty prefix is written as ``default``.
Extension attributes repeating a key are written as a JSON array under that
key, so values of one key keep their order but different keys do not
interleave.
"""

from __future__ import annotations

import json
import re

from ..errors import ParseError, ProvenanceError
from ..model import (
    CATEGORY_TYPES,
    COLLECTION_TYPE,
    GENERIC_REFINEMENT,
    REFINEMENT_TYPES,
    Category,
    DashAttributes,
    Element,
    ElementKind,
    ProvenanceDocument,
    QualifiedName,
    Relation,
    RelationKind,
    Timestamp,
    canonical_dash_term,
)
from ._common import AttributeBag, decode, position_of

FORMAT = "provjson"

ELEMENT_BUCKETS = {"entity": Category.ENTITY, "activity": Category.ACTIVITY, "agent": Category.AGENT}

# (subject role, object role) per relation bucket, as in standard PROV-JSON
RELATION_ROLES = {
    RelationKind.WAS_GENERATED_BY: ("prov:entity", "prov:activity"),
    RelationKind.WAS_DERIVED_FROM: ("prov:generatedEntity", "prov:usedEntity"),
    RelationKind.HAD_PRIMARY_SOURCE: ("prov:generatedEntity", "prov:usedEntity"),
    RelationKind.WAS_ATTRIBUTED_TO: ("prov:entity", "prov:agent"),
    RelationKind.USED: ("prov:activity", "prov:entity"),
    RelationKind.WAS_ASSOCIATED_WITH: ("prov:activity", "prov:agent"),
    RelationKind.ACTED_ON_BEHALF_OF: ("prov:delegate", "prov:responsible"),
    RelationKind.HAD_MEMBER: ("prov:collection", "prov:entity"),
}
TIME_KEY = "prov:time"
ELEMENT_TIME_KEYS = {
    Category.ENTITY: {"prov:generatedAtTime": "generated_at"},
    Category.ACTIVITY: {"prov:startTime": "started_at", "prov:endTime": "ended_at",
                        "prov:startedAtTime": "started_at", "prov:endedAtTime": "ended_at"},
    Category.AGENT: {},
}
_WRITE_TIME_KEYS = {"generated_at": "prov:generatedAtTime",
                    "started_at": "prov:startTime", "ended_at": "prov:endTime"}
_TYPE_BY_NAME = {**{v: ("refinement", k) for k, v in REFINEMENT_TYPES.items()},
                 **{v: ("category", k) for k, v in CATEGORY_TYPES.items()},
                 COLLECTION_TYPE: ("collection", True)}
_SYNTHETIC_ID = re.compile(r"_:r(\d+)\Z")


def _qn_value(name: QualifiedName) -> dict:
    return {"$": str(name), "type": "prov:QUALIFIED_NAME"}


def _group(pairs) -> dict:
    grouped: dict[str, list[str]] = {}
    for k, v in pairs:
        grouped.setdefault(str(k), []).append(v)
    return {k: v[0] if len(v) == 1 else v for k, v in grouped.items()}


def write(doc: ProvenanceDocument) -> bytes:
    out: dict = {"prefix": {(p or "default"): iri for p, iri in sorted(doc.prefixes.items())}}
    for bucket, category in ELEMENT_BUCKETS.items():
        records = {}
        for el in doc.of_category(category):
            rec: dict = {}
            extra_types = el.kind.type_names()[1:]
            if extra_types:
                rec["prov:type"] = [_qn_value(t) for t in extra_types]
            for term, value in el.dash.terms():
                key = f"dash:{term}"
                if term in ("role", "annotations"):
                    rec.setdefault(key, []).append(value)
                else:
                    rec[key] = value
            for attr, key in _WRITE_TIME_KEYS.items():
                value = getattr(el, attr)
                if value is not None:
                    rec[key] = value.isoformat()
            rec.update(_group(el.dash.extensions))
            records[str(el.id)] = rec
        if records:
            out[bucket] = records
    for n, r in enumerate(doc.relations, 1):
        s_role, o_role = RELATION_ROLES[r.kind]
        rec = {s_role: str(r.subject), o_role: str(r.object)}
        if r.at_time is not None:
            rec[TIME_KEY] = r.at_time.isoformat()
        rec.update(_group(r.attributes))
        out.setdefault(r.kind.value, {})[f"_:r{n}"] = rec
    # relation buckets in the fixed kind order after the element buckets
    ordered = {k: out[k] for k in ["prefix", *ELEMENT_BUCKETS] if k in out}
    ordered.update({k.value: out[k.value] for k in RelationKind if k.value in out})
    return (json.dumps(ordered, ensure_ascii=False, indent=2) + "\n").encode("utf-8")


class _Reader:
    def __init__(self, text: str):
        self.text = text
        self.doc = ProvenanceDocument()

    def fail(self, needle, expected: str, found: str):
        """ParseError positioned at the first occurrence of ``needle`` as a JSON key."""
        line, col = 1, 1
        if needle is not None:
            idx = self.text.find(json.dumps(needle, ensure_ascii=False))
            if idx < 0:
                idx = self.text.find(str(needle))
            if idx >= 0:
                line, col = position_of(self.text, idx)
        return ParseError(FORMAT, line, col, expected, found)

    def qname(self, raw, where) -> QualifiedName:
        if isinstance(raw, dict) and "$" in raw:
            raw = raw["$"]
        if not isinstance(raw, str):
            raise self.fail(where, "qualified name string", type(raw).__name__)
        try:
            name = QualifiedName.parse(raw)
        except ValueError:
            raise self.fail(raw, "qualified name", repr(raw)) from None
        if name.prefix not in self.doc.prefixes:
            raise self.fail(raw, "declared prefix", f"undeclared prefix {name.prefix!r}")
        return name

    def string(self, raw, where) -> str:
        if isinstance(raw, dict) and "$" in raw:
            raw = raw["$"]
        if not isinstance(raw, str):
            raise self.fail(where, "string value", json.dumps(raw, ensure_ascii=False)[:40])
        return raw

    def strings(self, raw, where) -> list[str]:
        items = raw if isinstance(raw, list) else [raw]
        return [self.string(v, where) for v in items]

    def timestamp(self, raw, where) -> Timestamp:
        text = self.string(raw, where)
        try:
            return Timestamp.parse(text)
        except ValueError:
            raise self.fail(text, "ISO-8601 date-time with UTC offset", repr(text)) from None

    def read(self) -> ProvenanceDocument:
        try:
            data = json.loads(self.text)
        except json.JSONDecodeError as exc:
            raise ParseError(FORMAT, exc.lineno, exc.colno, "valid JSON", exc.msg) from None
        if not isinstance(data, dict):
            raise ParseError(FORMAT, 1, 1, "JSON object", type(data).__name__)
        relation_buckets = {k.value: k for k in RelationKind}
        for key in data:
            if key != "prefix" and key not in ELEMENT_BUCKETS and key not in relation_buckets:
                raise self.fail(key, "PROV-JSON bucket name", repr(key))
            if not isinstance(data[key], dict):
                raise self.fail(key, f"object for bucket {key!r}", type(data[key]).__name__)

        for prefix, iri in data.get("prefix", {}).items():
            token = "" if prefix == "default" else prefix
            if not isinstance(iri, str):
                raise self.fail(prefix, "namespace IRI string", type(iri).__name__)
            try:
                self.doc.declare_prefix(token, iri)
            except (ProvenanceError, ValueError) as exc:
                raise self.fail(prefix, "compatible prefix declaration", str(exc)) from None

        for bucket, category in ELEMENT_BUCKETS.items():
            for raw_id, rec in data.get(bucket, {}).items():
                self.element(raw_id, rec, category)

        records = []
        for bucket, kind in relation_buckets.items():
            for n, (key, rec) in enumerate(data.get(bucket, {}).items()):
                m = _SYNTHETIC_ID.match(key)
                order = (0, int(m.group(1))) if m else (1, len(records))
                records.append((order, key, kind, rec))
        records.sort(key=lambda item: item[0])
        for _, key, kind, rec in records:
            self.relation(key, kind, rec)
        return self.doc

    def element(self, raw_id, rec, category: Category):
        eid = self.qname(raw_id, raw_id)
        if not isinstance(rec, dict):
            raise self.fail(raw_id, "attribute object", type(rec).__name__)
        refinement, collection = None, False
        bag = AttributeBag()
        times = {}
        time_keys = ELEMENT_TIME_KEYS[category]
        for key, value in rec.items():
            if key == "prov:type":
                for t in value if isinstance(value, list) else [value]:
                    what, v = _TYPE_BY_NAME.get(self.qname(t, key), (None, None))
                    if what == "collection":
                        collection = True
                    elif what == "category" and v is category:
                        pass
                    elif what == "refinement" and refinement is None and v.category is category:
                        refinement = v
                    else:
                        raise self.fail(raw_id, f"prov:type valid for {category.value}", str(t))
                continue
            if key in time_keys:
                if time_keys[key] in times:
                    raise self.fail(key, "a single value", "a second timestamp")
                times[time_keys[key]] = self.timestamp(value, key)
                continue
            name = self.qname(key, key)
            term = canonical_dash_term(name.local) if name.prefix == "dash" else None
            if term is not None:
                values = self.strings(value, key)
                for v in values:
                    if not bag.set(term, v):
                        raise self.fail(key, f"a single dash:{term} value", "several values")
            else:
                for v in self.strings(value, key):
                    bag.extensions.append((name, v))
        try:
            kind = ElementKind(category, refinement or GENERIC_REFINEMENT[category], collection)
            element = Element(eid, kind, DashAttributes(**bag.kwargs()), **times)
            self.doc.add_element(element, strict=False)
        except ProvenanceError as exc:
            raise self.fail(raw_id, "valid element definition", str(exc)) from None

    def relation(self, key, kind: RelationKind, rec):
        if not isinstance(rec, dict):
            raise self.fail(key, "relation record object", type(rec).__name__)
        s_role, o_role = RELATION_ROLES[kind]
        for role in (s_role, o_role):
            if role not in rec:
                raise self.fail(key, f"{role} in {kind.value} record", "nothing")
        at_time = self.timestamp(rec[TIME_KEY], TIME_KEY) if TIME_KEY in rec else None
        attributes = []
        for k, v in rec.items():
            if k in (s_role, o_role, TIME_KEY):
                continue
            name = self.qname(k, k)
            attributes += [(name, s) for s in self.strings(v, k)]
        try:
            relation = Relation(kind, self.qname(rec[s_role], key), self.qname(rec[o_role], key),
                                at_time, tuple(attributes))
            self.doc.add_relation(relation, strict=False)
        except ProvenanceError as exc:
            raise self.fail(key, "valid relation", str(exc)) from None


def parse(data: bytes | str) -> ProvenanceDocument:
    return _Reader(decode(data, FORMAT)).read()
