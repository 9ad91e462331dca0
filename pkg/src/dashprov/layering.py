"""Three-layer decomposition of a dashboard: whole, subtopics, individual views.

Layers are inferred from the ``hadMember`` graph hanging off the single
``Dashboard`` entity. Agents and activities have no layer of their own; they
join a layer view only through relations to that layer's entities.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from . import _graph
from .errors import (
    DepthExceeded,
    LayeringError,
    MembershipCycle,
    MultipleRootDashboards,
    NoRootDashboard,
    UnlayeredTarget,
)
from .model import Category, ProvenanceDocument, QualifiedName, Refinement, RelationKind, qname

MAX_DEPTH = 2


class Layer(str, Enum):
    L1 = "L1_Dashboard"
    L2 = "L2_Subtopic"
    L3 = "L3_Individual"
    UNLAYERED = "Unlayered"

    @property
    def number(self) -> int | None:
        return {Layer.L1: 1, Layer.L2: 2, Layer.L3: 3}.get(self)

    @classmethod
    def from_number(cls, n: int | str) -> Layer:
        try:
            return {1: cls.L1, 2: cls.L2, 3: cls.L3}[int(n)]
        except (KeyError, ValueError):
            raise ValueError(f"layer must be 1, 2 or 3, got {n!r}") from None


LAYERS = (Layer.L1, Layer.L2, Layer.L3)


@dataclass
class LayerAssignment:
    root: QualifiedName
    layers: dict[QualifiedName, frozenset[Layer]] = field(default_factory=dict)
    depth: dict[QualifiedName, int] = field(default_factory=dict)

    def of(self, id) -> frozenset[Layer]:
        return self.layers.get(qname(id), frozenset({Layer.UNLAYERED}))

    def members(self, layer: Layer, doc: ProvenanceDocument | None = None,
                visual_only: bool = False) -> list[QualifiedName]:
        """Ids carrying ``layer``, sorted. ``visual_only`` drops data entities."""
        ids = [i for i, ls in self.layers.items() if layer in ls]
        if visual_only:
            if doc is None:
                raise ValueError("visual_only needs the document")
            ids = [i for i in ids if doc.elements[i].refinement is not Refinement.DATA_ENTITY]
        return sorted(ids, key=str)


@dataclass(frozen=True)
class MembershipProblem:
    error: type[LayeringError]
    subjects: tuple[QualifiedName, ...]
    message: str


def membership_graph(doc: ProvenanceDocument) -> dict[QualifiedName, list[QualifiedName]]:
    """hadMember adjacency over defined elements only (dangling edges skipped)."""
    return _graph.adjacency(
        (r.subject, r.object) for r in doc.relations
        if r.kind is RelationKind.HAD_MEMBER and r.subject in doc.elements
        and r.object in doc.elements)


def membership_problems(doc: ProvenanceDocument, adj=None) -> list[MembershipProblem]:
    """Every structural reason layering would fail, in a stable order."""
    problems = []
    roots = [e.id for e in doc.of_category(Category.ENTITY)
             if e.refinement is Refinement.DASHBOARD]
    if not roots:
        problems.append(MembershipProblem(NoRootDashboard, (), "document has no Dashboard entity"))
    elif len(roots) > 1:
        problems.append(MembershipProblem(
            MultipleRootDashboards, tuple(roots),
            f"{len(roots)} Dashboard entities; exactly one root is allowed"))
    if adj is None:
        adj = membership_graph(doc)
    cycles = _graph.cyclic_components(adj)
    for comp in cycles:
        problems.append(MembershipProblem(
            MembershipCycle, tuple(comp),
            "hadMember cycle through " + ", ".join(map(str, comp))))
    if len(roots) == 1 and not cycles:
        levels = _levels(adj, roots[0])
        if len(levels) > MAX_DEPTH + 1:
            too_deep = sorted(levels[MAX_DEPTH + 1], key=str)
            problems.append(MembershipProblem(
                DepthExceeded, tuple(too_deep),
                f"membership nested deeper than {MAX_DEPTH} levels below the dashboard: "
                + ", ".join(map(str, too_deep))))
    return problems


def _levels(adj, root, limit=MAX_DEPTH + 1) -> list[set[QualifiedName]]:
    """levels[k] = nodes reachable from root by some path of exactly k hops."""
    levels = [{root}]
    while len(levels) <= limit:
        nxt = {m for n in levels[-1] for m in adj.get(n, ())}
        if not nxt:
            break
        levels.append(nxt)
    return levels


def infer_layers(doc: ProvenanceDocument) -> LayerAssignment:
    return _infer(doc, membership_graph(doc))


def _infer(doc: ProvenanceDocument, adj) -> LayerAssignment:
    problems = membership_problems(doc, adj)
    if problems:
        first = problems[0]
        raise first.error(first.message)
    root = next(e.id for e in doc.elements.values() if e.refinement is Refinement.DASHBOARD)
    depth = _graph.bfs_levels(adj, root)

    layers: dict[QualifiedName, set[Layer]] = {}
    for id, d in depth.items():
        el = doc.elements[id]
        if d == 0:
            layer = Layer.L1
        elif d == 1 and el.is_collection:
            layer = Layer.L2
        else:
            layer = Layer.L3
        layers[id] = {layer}

    # data entities inherit layers from the layered visual entities derived from them
    for r in doc.relations_of(RelationKind.WAS_DERIVED_FROM):
        src, data = doc.elements.get(r.subject), doc.elements.get(r.object)
        if src is None or data is None or data.refinement is not Refinement.DATA_ENTITY:
            continue
        if src.refinement is Refinement.DATA_ENTITY or r.subject not in layers:
            continue
        layers.setdefault(r.object, set()).update(layers[r.subject])

    out = {}
    for e in doc.elements.values():
        if e.category is Category.ENTITY:
            out[e.id] = frozenset(layers.get(e.id) or {Layer.UNLAYERED})
    return LayerAssignment(root=root, layers=out, depth=depth)


def layer_view(doc: ProvenanceDocument, layer: Layer) -> ProvenanceDocument:
    """Sub-document for one layer.

    Keeps the layer's entities, every agent or activity directly related to
    them, and the relations whose both endpoints are kept.
    """
    assignment = infer_layers(doc)
    keep = {i for i, ls in assignment.layers.items() if layer in ls}
    attached = set()
    for r in doc.relations:
        for here, there in ((r.subject, r.object), (r.object, r.subject)):
            other = doc.elements.get(there)
            if here in keep and other is not None and other.category is not Category.ENTITY:
                attached.add(there)
    keep |= attached
    view = ProvenanceDocument(prefixes=dict(doc.prefixes))
    for id, el in doc.elements.items():
        if id in keep:
            view.elements[id] = el
    view.relations = [r for r in doc.relations if r.subject in keep and r.object in keep]
    return view


def drill_path(doc: ProvenanceDocument, target) -> list[QualifiedName]:
    """hadMember chain from the root down to ``target``.

    With several parents the chain that is smallest as a sequence of id
    strings wins.
    """
    target = doc.get(target).id
    adj = membership_graph(doc)
    assignment = _infer(doc, adj)
    if target not in assignment.depth:
        raise UnlayeredTarget(f"{target} is not reachable from the dashboard by membership")
    parents: dict[QualifiedName, set[QualifiedName]] = {}
    for s, objs in adj.items():
        for o in objs:
            parents.setdefault(o, set()).add(s)

    def chains(node):
        if node == assignment.root:
            return [[node]]
        return [c + [node] for p in parents.get(node, ()) if p in assignment.depth
                for c in chains(p)]

    return min(chains(target), key=lambda c: [str(x) for x in c])
