"""Typed provenance graph: qualified names, elements, relations, documents.

The document is the unit every other module works on. Builders (parsers,
the scaffold command) use the in-place methods on
:class:`ProvenanceDocument`; the module-level functions of the same names
return an updated copy and leave their argument untouched.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from datetime import datetime, time, timezone
from enum import Enum
from typing import Iterable, Iterator
from urllib.parse import urlparse

from .errors import (
    DanglingReference,
    DuplicateIdentifier,
    KindMismatch,
    NotACollection,
    PrefixConflict,
    SignatureViolation,
    UndeclaredPrefix,
    UnknownIdentifier,
)

PROV_NS = "http://www.w3.org/ns/prov#"
DASH_NS = "http://dash.com/dash#"
XSD_NS = "http://www.w3.org/2001/XMLSchema#"

CANONICAL_PREFIXES = {"prov": PROV_NS, "dash": DASH_NS, "xsd": XSD_NS}

# "default" names the empty prefix in PROV-JSON, so it cannot be a real token.
RESERVED_PREFIX_TOKENS = frozenset({"default"})

_PREFIX_RE = re.compile(r"(?:[A-Za-z_][A-Za-z0-9_-]*)?\Z")
_LOCAL_RE = re.compile(r"[^\s:;,.\"'<>#()\[\]{}\\^@|`]+\Z")


def is_valid_prefix(token: str) -> bool:
    return bool(_PREFIX_RE.match(token))


def is_valid_local(token: str) -> bool:
    return bool(_LOCAL_RE.match(token))


@dataclass(frozen=True)
class QualifiedName:
    """``prefix:local`` name. The prefix may be empty (``:dashboard``)."""

    prefix: str
    local: str

    def __post_init__(self):
        if not is_valid_prefix(self.prefix):
            raise ValueError(f"invalid prefix token {self.prefix!r}")
        if not is_valid_local(self.local):
            raise ValueError(f"invalid local name {self.local!r}")
        # names are hashed constantly during graph work
        object.__setattr__(self, "_hash", hash((self.prefix, self.local)))

    def __hash__(self) -> int:
        return self._hash

    @classmethod
    def parse(cls, text: str) -> QualifiedName:
        prefix, sep, local = text.partition(":")
        if not sep:
            # bare names resolve against the default (empty) prefix
            return cls("", text)
        return cls(prefix, local)

    def __str__(self) -> str:
        return f"{self.prefix}:{self.local}"

    def __lt__(self, other: QualifiedName) -> bool:
        return str(self) < str(other)


def qname(text: str | QualifiedName) -> QualifiedName:
    return text if isinstance(text, QualifiedName) else QualifiedName.parse(text)


@dataclass(frozen=True, order=True)
class Timestamp:
    """Timezone-aware instant. Ordering and equality are by instant."""

    instant: datetime

    def __post_init__(self):
        if self.instant.tzinfo is None or self.instant.utcoffset() is None:
            raise ValueError("timestamp requires an explicit UTC offset")

    @classmethod
    def parse(cls, text: str) -> Timestamp:
        text = text.strip()
        if len(text) == 10:
            # date-only input means midnight UTC
            d = datetime.strptime(text, "%Y-%m-%d").date()
            return cls(datetime.combine(d, time(0), tzinfo=timezone.utc))
        if text.endswith(("Z", "z")):
            text = text[:-1] + "+00:00"
        dt = datetime.fromisoformat(text)
        if dt.tzinfo is None:
            raise ValueError(f"timestamp {text!r} has no UTC offset")
        return cls(dt)

    def isoformat(self) -> str:
        return self.instant.isoformat()

    def __str__(self) -> str:
        return self.isoformat()


class Category(str, Enum):
    ENTITY = "Entity"
    AGENT = "Agent"
    ACTIVITY = "Activity"


class Refinement(str, Enum):
    DASHBOARD = "Dashboard"
    SUBTOPIC_COLLECTION = "SubtopicCollection"
    VISUAL_ENTITY = "VisualEntity"
    DATA_ENTITY = "DataEntity"
    GENERIC_ENTITY = "GenericEntity"
    ORGANIZATION = "Organization"
    DEPARTMENT = "Department"
    PERSON = "Person"
    SOFTWARE_AGENT = "SoftwareAgent"
    GENERIC_AGENT = "GenericAgent"
    CREATION_MAINTENANCE = "CreationMaintenance"
    SUSTAINABILITY = "Sustainability"
    DATA_UPDATE = "DataUpdate"
    GENERIC_ACTIVITY = "GenericActivity"

    @property
    def category(self) -> Category:
        return _REFINEMENT_CATEGORY[self]


_REFINEMENT_CATEGORY = {
    **{r: Category.ENTITY for r in (
        Refinement.DASHBOARD, Refinement.SUBTOPIC_COLLECTION, Refinement.VISUAL_ENTITY,
        Refinement.DATA_ENTITY, Refinement.GENERIC_ENTITY)},
    **{r: Category.AGENT for r in (
        Refinement.ORGANIZATION, Refinement.DEPARTMENT, Refinement.PERSON,
        Refinement.SOFTWARE_AGENT, Refinement.GENERIC_AGENT)},
    **{r: Category.ACTIVITY for r in (
        Refinement.CREATION_MAINTENANCE, Refinement.SUSTAINABILITY,
        Refinement.DATA_UPDATE, Refinement.GENERIC_ACTIVITY)},
}

GENERIC_REFINEMENT = {
    Category.ENTITY: Refinement.GENERIC_ENTITY,
    Category.AGENT: Refinement.GENERIC_AGENT,
    Category.ACTIVITY: Refinement.GENERIC_ACTIVITY,
}

COLLECTION_REFINEMENTS = frozenset({Refinement.DASHBOARD, Refinement.SUBTOPIC_COLLECTION})

# rdf:type / prov:type terms; generic refinements carry no extra type
CATEGORY_TYPES = {
    Category.ENTITY: QualifiedName("prov", "Entity"),
    Category.AGENT: QualifiedName("prov", "Agent"),
    Category.ACTIVITY: QualifiedName("prov", "Activity"),
}
COLLECTION_TYPE = QualifiedName("prov", "Collection")
REFINEMENT_TYPES = {
    Refinement.DASHBOARD: QualifiedName("dash", "Dashboard"),
    Refinement.SUBTOPIC_COLLECTION: QualifiedName("dash", "SubtopicCollection"),
    Refinement.VISUAL_ENTITY: QualifiedName("dash", "VisualEntity"),
    Refinement.DATA_ENTITY: QualifiedName("dash", "DataEntity"),
    Refinement.ORGANIZATION: QualifiedName("prov", "Organization"),
    Refinement.DEPARTMENT: QualifiedName("dash", "Department"),
    Refinement.PERSON: QualifiedName("prov", "Person"),
    Refinement.SOFTWARE_AGENT: QualifiedName("prov", "SoftwareAgent"),
    Refinement.CREATION_MAINTENANCE: QualifiedName("dash", "CreationMaintenance"),
    Refinement.SUSTAINABILITY: QualifiedName("dash", "Sustainability"),
    Refinement.DATA_UPDATE: QualifiedName("dash", "DataUpdate"),
}


@dataclass(frozen=True)
class ElementKind:
    category: Category
    refinement: Refinement
    is_collection: bool = False

    def __post_init__(self):
        if self.refinement.category is not self.category:
            raise KindMismatch(f"{self.refinement.value} is not a refinement of {self.category.value}")
        if self.refinement in COLLECTION_REFINEMENTS and not self.is_collection:
            raise KindMismatch(f"{self.refinement.value} must be a collection")
        if self.is_collection and self.category is not Category.ENTITY:
            raise KindMismatch("only entities can be collections")

    @classmethod
    def of(cls, refinement: Refinement | str, collection: bool = False) -> ElementKind:
        refinement = Refinement(refinement)
        return cls(refinement.category, refinement,
                   collection or refinement in COLLECTION_REFINEMENTS)

    def type_names(self) -> list[QualifiedName]:
        """PROV type terms encoding this kind, base category first."""
        names = [CATEGORY_TYPES[self.category]]
        if self.is_collection:
            names.append(COLLECTION_TYPE)
        if self.refinement in REFINEMENT_TYPES:
            names.append(REFINEMENT_TYPES[self.refinement])
        return names


# dash: term -> DashAttributes field; canonical spelling is the key
DASH_TERMS = {
    "name": "name",
    "version": "version",
    "role": "roles",
    "description": "description",
    "annotations": "annotations",
    "contactInformation": "contact_information",
    "trustworthiness": "trustworthiness",
    "url": "url",
}
MULTI_VALUED_TERMS = frozenset({"role", "annotations"})
_DASH_TERMS_FOLDED = {k.lower(): k for k in DASH_TERMS}


def canonical_dash_term(local: str) -> str | None:
    """Map any casing of a dash term (``Name``, ``NAME``) to its canonical form."""
    return _DASH_TERMS_FOLDED.get(local.lower())


TIME_TERMS = {
    "generatedAtTime": Category.ENTITY,
    "startedAtTime": Category.ACTIVITY,
    "endedAtTime": Category.ACTIVITY,
}

def is_absolute_url(value: str) -> bool:
    parsed = urlparse(value)
    return bool(parsed.scheme and parsed.netloc)


@dataclass(frozen=True)
class DashAttributes:
    name: str | None = None
    version: str | None = None
    roles: tuple[str, ...] = ()
    description: str | None = None
    annotations: tuple[str, ...] = ()
    contact_information: str | None = None
    trustworthiness: str | None = None
    url: str | None = None
    extensions: tuple[tuple[QualifiedName, str], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "roles", tuple(self.roles))
        object.__setattr__(self, "annotations", tuple(self.annotations))
        object.__setattr__(self, "extensions", tuple((qname(k), v) for k, v in self.extensions))
        if self.url is not None and not is_absolute_url(self.url):
            raise KindMismatch(f"dash:url must be an absolute URL, got {self.url!r}")
        for key, value in self.extensions:
            if is_reserved_attribute(key):
                raise KindMismatch(f"{key} is a modeled attribute and cannot be an extension")
            if not isinstance(value, str):
                raise KindMismatch(f"extension {key} must have a string value")

    def terms(self) -> Iterator[tuple[str, str]]:
        """Yield ``(canonical dash term, value)`` pairs in canonical order."""
        for term, attr in DASH_TERMS.items():
            value = getattr(self, attr)
            if term in MULTI_VALUED_TERMS:
                for v in value:
                    yield term, v
            elif value is not None:
                yield term, value


RELATION_TERMS: dict[str, "RelationKind"] = {}


def is_reserved_attribute(key: QualifiedName) -> bool:
    if key.prefix == "dash" and canonical_dash_term(key.local) is not None:
        return True
    if key.prefix == "dash" and key.local in ("relation", "subject", "object"):
        return True
    if key.prefix == "prov" and (
        key.local in TIME_TERMS or key.local in RELATION_TERMS
        or key.local in ("type", "atTime", "time", "startTime", "endTime")
    ):
        return True
    return False


@dataclass(frozen=True)
class Element:
    id: QualifiedName
    kind: ElementKind
    dash: DashAttributes = field(default_factory=DashAttributes)
    generated_at: Timestamp | None = None
    started_at: Timestamp | None = None
    ended_at: Timestamp | None = None

    def __post_init__(self):
        object.__setattr__(self, "id", qname(self.id))
        if self.generated_at is not None and self.category is not Category.ENTITY:
            raise KindMismatch(f"{self.id}: generatedAtTime is only allowed on entities")
        if (self.started_at or self.ended_at) and self.category is not Category.ACTIVITY:
            raise KindMismatch(f"{self.id}: startedAtTime/endedAtTime are only allowed on activities")

    @property
    def category(self) -> Category:
        return self.kind.category

    @property
    def refinement(self) -> Refinement:
        return self.kind.refinement

    @property
    def is_collection(self) -> bool:
        return self.kind.is_collection

    @property
    def times_ordered(self) -> bool:
        if self.started_at is None or self.ended_at is None:
            return True
        return self.started_at <= self.ended_at


def entity(id, refinement=Refinement.GENERIC_ENTITY, *, collection=False,
           generated_at=None, **dash) -> Element:
    return Element(qname(id), ElementKind.of(refinement, collection),
                   DashAttributes(**dash), generated_at=_ts(generated_at))


def agent(id, refinement=Refinement.GENERIC_AGENT, **dash) -> Element:
    return Element(qname(id), ElementKind.of(refinement), DashAttributes(**dash))


def activity(id, refinement=Refinement.GENERIC_ACTIVITY, *, started_at=None,
             ended_at=None, **dash) -> Element:
    return Element(qname(id), ElementKind.of(refinement), DashAttributes(**dash),
                   started_at=_ts(started_at), ended_at=_ts(ended_at))


def _ts(value):
    if value is None or isinstance(value, Timestamp):
        return value
    if isinstance(value, datetime):
        return Timestamp(value)
    return Timestamp.parse(value)


class RelationKind(str, Enum):
    WAS_GENERATED_BY = "wasGeneratedBy"
    WAS_DERIVED_FROM = "wasDerivedFrom"
    HAD_PRIMARY_SOURCE = "hadPrimarySource"
    WAS_ATTRIBUTED_TO = "wasAttributedTo"
    USED = "used"
    WAS_ASSOCIATED_WITH = "wasAssociatedWith"
    ACTED_ON_BEHALF_OF = "actedOnBehalfOf"
    HAD_MEMBER = "hadMember"

    @property
    def term(self) -> QualifiedName:
        return QualifiedName("prov", self.value)

    @property
    def signature(self) -> tuple[Category, Category]:
        return SIGNATURES[self]


RELATION_TERMS.update({k.value: k for k in RelationKind})

SIGNATURES = {
    RelationKind.WAS_GENERATED_BY: (Category.ENTITY, Category.ACTIVITY),
    RelationKind.WAS_DERIVED_FROM: (Category.ENTITY, Category.ENTITY),
    RelationKind.HAD_PRIMARY_SOURCE: (Category.ENTITY, Category.ENTITY),
    RelationKind.WAS_ATTRIBUTED_TO: (Category.ENTITY, Category.AGENT),
    RelationKind.USED: (Category.ACTIVITY, Category.ENTITY),
    RelationKind.WAS_ASSOCIATED_WITH: (Category.ACTIVITY, Category.AGENT),
    RelationKind.ACTED_ON_BEHALF_OF: (Category.AGENT, Category.AGENT),
    RelationKind.HAD_MEMBER: (Category.ENTITY, Category.ENTITY),
}


def signature_problem(kind: RelationKind, subject: Element, obj: Element) -> str | None:
    """Describe why ``subject -kind-> obj`` breaks the signature, or None."""
    want_s, want_o = SIGNATURES[kind]
    if subject.category is not want_s or obj.category is not want_o:
        return (f"{kind.value} requires {want_s.value} -> {want_o.value}, "
                f"got {subject.category.value} -> {obj.category.value}")
    if kind is RelationKind.HAD_MEMBER and not subject.is_collection:
        return f"hadMember subject {subject.id} is not a collection"
    return None


@dataclass(frozen=True)
class Relation:
    kind: RelationKind
    subject: QualifiedName
    object: QualifiedName
    at_time: Timestamp | None = None
    attributes: tuple[tuple[QualifiedName, str], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "kind", RelationKind(self.kind))
        object.__setattr__(self, "subject", qname(self.subject))
        object.__setattr__(self, "object", qname(self.object))
        object.__setattr__(self, "at_time", _ts(self.at_time))
        object.__setattr__(self, "attributes", tuple((qname(k), v) for k, v in self.attributes))
        for key, value in self.attributes:
            if is_reserved_attribute(key):
                raise KindMismatch(f"{key} is reserved and cannot be a relation attribute")
            if not isinstance(value, str):
                raise KindMismatch(f"relation attribute {key} must have a string value")

    @property
    def is_plain(self) -> bool:
        return self.at_time is None and not self.attributes


@dataclass
class ProvenanceDocument:
    prefixes: dict[str, str] = field(default_factory=lambda: dict(CANONICAL_PREFIXES))
    elements: dict[QualifiedName, Element] = field(default_factory=dict)
    relations: list[Relation] = field(default_factory=list)

    # -- mutation (builders only) --

    def declare_prefix(self, prefix: str, iri: str) -> None:
        if not is_valid_prefix(prefix) or prefix in RESERVED_PREFIX_TOKENS:
            raise ValueError(f"invalid prefix token {prefix!r}")
        if not iri:
            raise ValueError("namespace IRI must be non-empty")
        bound = self.prefixes.get(prefix)
        if bound is not None and bound != iri:
            raise PrefixConflict(f"prefix {prefix!r} is already bound to <{bound}>")
        self.prefixes[prefix] = iri

    def add_element(self, element: Element, *, strict: bool = True) -> None:
        """Insert ``element``.

        ``strict=False`` skips the activity time-order check so that parsers can
        hand such documents to the validator instead of failing.
        """
        self.require_declared(element.id)
        for key, _ in element.dash.extensions:
            self.require_declared(key)
        if element.id in self.elements:
            raise DuplicateIdentifier(f"{element.id} is already defined")
        if strict and not element.times_ordered:
            raise KindMismatch(f"{element.id}: startedAtTime is after endedAtTime")
        self.elements[element.id] = element

    def add_relation(self, relation: Relation, *, strict: bool = True) -> None:
        self.require_declared(relation.subject)
        self.require_declared(relation.object)
        for key, _ in relation.attributes:
            self.require_declared(key)
        if strict:
            for end in (relation.subject, relation.object):
                if end not in self.elements:
                    raise DanglingReference(f"{relation.kind.value}: {end} is not defined")
            problem = signature_problem(relation.kind, self.elements[relation.subject],
                                        self.elements[relation.object])
            if problem:
                raise SignatureViolation(problem)
        self.relations.append(relation)

    def require_declared(self, name: QualifiedName) -> None:
        if name.prefix not in self.prefixes:
            raise UndeclaredPrefix(f"prefix {name.prefix!r} of {name} is not declared")

    # -- read access --

    def __contains__(self, id) -> bool:
        return qname(id) in self.elements

    def get(self, id) -> Element:
        try:
            return self.elements[qname(id)]
        except KeyError:
            raise UnknownIdentifier(f"{id} is not defined") from None

    def of_category(self, category: Category) -> list[Element]:
        return sorted((e for e in self.elements.values() if e.category is category),
                      key=lambda e: str(e.id))

    def relations_of(self, *kinds: RelationKind) -> list[Relation]:
        return [r for r in self.relations if r.kind in kinds]

    def copy(self) -> ProvenanceDocument:
        # elements and relations are immutable, so copying the containers suffices
        return ProvenanceDocument(dict(self.prefixes), dict(self.elements), list(self.relations))


# -- value-semantics interface --

def new_document() -> ProvenanceDocument:
    return ProvenanceDocument()


def declare_prefix(doc: ProvenanceDocument, prefix: str, iri: str) -> ProvenanceDocument:
    out = doc.copy()
    out.declare_prefix(prefix, iri)
    return out


def add_element(doc: ProvenanceDocument, element: Element) -> ProvenanceDocument:
    out = doc.copy()
    out.add_element(element)
    return out


def add_relation(doc: ProvenanceDocument, relation: Relation) -> ProvenanceDocument:
    out = doc.copy()
    out.add_relation(relation)
    return out


def members_of(doc: ProvenanceDocument, collection) -> list[QualifiedName]:
    coll = doc.get(collection)
    if coll.category is not Category.ENTITY or not coll.is_collection:
        raise NotACollection(f"{coll.id} is not a collection entity")
    return [r.object for r in doc.relations
            if r.kind is RelationKind.HAD_MEMBER and r.subject == coll.id]


def semantic_key(doc: ProvenanceDocument):
    """Comparable form that ignores what serialization may legitimately reorder.

    Relations are grouped by (subject, kind) keeping their order inside each
    group, and extension lists are grouped by key keeping per-key value order.
    """
    elements = {
        str(i): (e.kind, replace(e.dash, extensions=()), _group_pairs(e.dash.extensions),
                 e.generated_at, e.started_at, e.ended_at)
        for i, e in doc.elements.items()
    }
    groups: dict[tuple[str, str], list] = {}
    for r in doc.relations:
        groups.setdefault((str(r.subject), r.kind.value), []).append(
            (str(r.object), r.at_time, _group_pairs(r.attributes)))
    return dict(doc.prefixes), elements, groups


def semantically_equal(a: ProvenanceDocument, b: ProvenanceDocument) -> bool:
    return semantic_key(a) == semantic_key(b)


def _group_pairs(pairs: Iterable[tuple[QualifiedName, str]]) -> tuple:
    grouped: dict[str, list[str]] = {}
    for k, v in pairs:
        grouped.setdefault(str(k), []).append(v)
    return tuple(sorted((k, tuple(v)) for k, v in grouped.items()))
