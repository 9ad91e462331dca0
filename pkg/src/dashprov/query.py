"""Read-only questions over a document: lineage, delegation, attribution, freshness."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

from . import _graph
from .errors import CyclicDelegation, CyclicDerivation, LayeringError, UnknownIdentifier
from .layering import LAYERS, infer_layers
from .model import (
    Category,
    ProvenanceDocument,
    QualifiedName,
    Refinement,
    RelationKind,
    Timestamp,
    qname,
)

DERIVATION_KINDS = (RelationKind.WAS_DERIVED_FROM, RelationKind.HAD_PRIMARY_SOURCE)


def _require(doc: ProvenanceDocument, id, category: Category):
    el = doc.get(id)
    if el.category is not category:
        raise UnknownIdentifier(f"{el.id} is an {el.category.value}, not an {category.value}")
    return el


@dataclass
class LineageReport:
    root: QualifiedName
    edges: list[tuple[QualifiedName, RelationKind, QualifiedName]] = field(default_factory=list)
    depth_by_node: dict[QualifiedName, int] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "root": str(self.root),
            "edges": [[str(s), k.value, str(o)] for s, k, o in self.edges],
            "depthByNode": {str(k): v for k, v in self.depth_by_node.items()},
        }


def lineage(doc: ProvenanceDocument, id) -> LineageReport:
    """Breadth-first derivation closure over wasDerivedFrom and hadPrimarySource."""
    root = _require(doc, id, Category.ENTITY).id
    edges = [(r.subject, r.kind, r.object) for r in doc.relations_of(*DERIVATION_KINDS)]
    adj = _graph.adjacency((s, o) for s, _, o in edges)
    for comp in _graph.cyclic_components(adj):
        raise CyclicDerivation("derivation cycle through " + ", ".join(map(str, comp)))
    depth = _graph.bfs_levels(adj, root)
    reached = [e for e in edges if e[0] in depth]
    seen, unique = set(), []
    for e in reached:
        if e not in seen:
            seen.add(e)
            unique.append(e)
    unique.sort(key=lambda e: (depth[e[0]], str(e[0]), e[1].value, str(e[2])))
    ordered = dict(sorted(depth.items(), key=lambda kv: (kv[1], str(kv[0]))))
    return LineageReport(root, unique, ordered)


def _principals(doc: ProvenanceDocument) -> dict[QualifiedName, list[QualifiedName]]:
    adj = _graph.adjacency((r.subject, r.object)
                           for r in doc.relations_of(RelationKind.ACTED_ON_BEHALF_OF))
    for comp in _graph.cyclic_components(adj):
        raise CyclicDelegation("delegation cycle through " + ", ".join(map(str, comp)))
    return adj


def delegation_chain(doc: ProvenanceDocument, agent) -> list[QualifiedName]:
    """Principals reachable by actedOnBehalfOf, nearest first.

    A branching hierarchy is flattened breadth-first; principals at the same
    distance come in id order.
    """
    start = _require(doc, agent, Category.AGENT).id
    depth = _graph.bfs_levels(_principals(doc), start)
    return [a for a, _ in sorted(depth.items(), key=lambda kv: (kv[1], str(kv[0]))) if a != start]


@dataclass(frozen=True)
class AttributedAgent:
    agent: QualifiedName
    roles: tuple[str, ...]
    via_delegation: bool

    def to_dict(self) -> dict:
        return {"agent": str(self.agent), "roles": list(self.roles),
                "viaDelegation": self.via_delegation}


def attribution(doc: ProvenanceDocument, id) -> list[AttributedAgent]:
    target = _require(doc, id, Category.ENTITY).id
    direct = sorted({r.object for r in doc.relations_of(RelationKind.WAS_ATTRIBUTED_TO)
                     if r.subject == target}, key=str)
    indirect: set[QualifiedName] = set()
    for a in direct:
        if a in doc.elements and doc.elements[a].category is Category.AGENT:
            indirect.update(delegation_chain(doc, a))
    indirect -= set(direct)

    def roles(a):
        el = doc.elements.get(a)
        return el.dash.roles if el is not None else ()

    return ([AttributedAgent(a, roles(a), False) for a in direct]
            + [AttributedAgent(a, roles(a), True) for a in sorted(indirect, key=str)])


@dataclass(frozen=True)
class FreshnessReport:
    entity: QualifiedName
    latest_generation: Timestamp | None
    latest_update_activity_end: Timestamp | None
    effective_freshness: Timestamp | None

    def to_dict(self) -> dict:
        fmt = lambda t: t.isoformat() if t is not None else None  # noqa: E731
        return {"entity": str(self.entity),
                "latestGeneration": fmt(self.latest_generation),
                "latestUpdateActivityEnd": fmt(self.latest_update_activity_end),
                "effectiveFreshness": fmt(self.effective_freshness)}


def update_activities(doc: ProvenanceDocument, id) -> list[QualifiedName]:
    """DataUpdate activities that generated or used the entity or anything in its lineage."""
    report = lineage(doc, id)
    scope = set(report.depth_by_node)
    found = set()
    for r in doc.relations:
        if r.kind is RelationKind.WAS_GENERATED_BY and r.subject in scope:
            act = r.object
        elif r.kind is RelationKind.USED and r.object in scope:
            act = r.subject
        else:
            continue
        el = doc.elements.get(act)
        if el is not None and el.refinement is Refinement.DATA_UPDATE:
            found.add(act)
    return sorted(found, key=str)


def freshness(doc: ProvenanceDocument, id) -> FreshnessReport:
    el = _require(doc, id, Category.ENTITY)
    ends = [doc.elements[a].ended_at for a in update_activities(doc, el.id)]
    ends = [t for t in ends if t is not None]
    latest_update = max(ends) if ends else None
    present = [t for t in (el.generated_at, latest_update) if t is not None]
    return FreshnessReport(el.id, el.generated_at, latest_update, max(present) if present else None)


def stats(doc: ProvenanceDocument) -> dict:
    """Element, relation, layer and prefix counts. Never raises."""
    by_category = Counter(e.category.value for e in doc.elements.values())
    by_refinement = Counter(e.refinement.value for e in doc.elements.values())
    by_relation = Counter(r.kind.value for r in doc.relations)
    layers = {layer.value: 0 for layer in LAYERS}
    layer_error = None
    try:
        assignment = infer_layers(doc)
    except LayeringError as exc:
        layer_error = str(exc)
    else:
        for layer in LAYERS:
            layers[layer.value] = len(assignment.members(layer, doc, visual_only=True))
    return {
        "prefixes": len(doc.prefixes),
        "elements": len(doc.elements),
        "relations": len(doc.relations),
        "byCategory": {c.value: by_category.get(c.value, 0) for c in Category},
        "byRefinement": {r.value: by_refinement.get(r.value, 0) for r in Refinement},
        "byRelation": {k.value: by_relation.get(k.value, 0) for k in RelationKind},
        "layers": layers,
        "layerError": layer_error,
    }


def lookup(doc: ProvenanceDocument, text: str) -> QualifiedName:
    """Resolve a CLI-style id, falling back to a unique local-name match."""
    try:
        name = qname(text)
    except ValueError:
        raise UnknownIdentifier(f"{text!r} is not a valid identifier") from None
    if name in doc.elements:
        return name
    if ":" not in text:
        matches = [i for i in doc.elements if i.local == text]
        if len(matches) == 1:
            return matches[0]
    raise UnknownIdentifier(f"{text} is not defined")


__all__ = [
    "AttributedAgent", "FreshnessReport", "LineageReport", "attribution",
    "delegation_chain", "freshness", "lineage", "lookup", "stats", "update_activities",
]
