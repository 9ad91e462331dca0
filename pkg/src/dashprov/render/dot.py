from __future__ import annotations

from ..errors import LayeringError
from ..layering import LAYERS, Layer, infer_layers, layer_view
from ..model import Category, Element, ProvenanceDocument, Refinement
from .options import RenderOptions

# conventional PROV depiction: yellow ellipses, blue boxes, orange houses
NODE_STYLE = {
    Category.ENTITY: 'shape=ellipse, style=filled, fillcolor="#fffc87"',
    Category.ACTIVITY: 'shape=box, style=filled, fillcolor="#9fb1fc"',
    Category.AGENT: 'shape=house, style=filled, fillcolor="#fed37f"',
}
LAYER_TITLES = {
    Layer.L1: "Layer 1: dashboard",
    Layer.L2: "Layer 2: subtopics",
    Layer.L3: "Layer 3: visual entities",
}


def dot_quote(text: str) -> str:
    escaped = text.replace("\\", "\\\\").replace('"', '\\"')
    escaped = escaped.replace("\r", "").replace("\n", "\\n")
    return f'"{escaped}"'


def _label(el: Element, include_attributes: bool) -> str:
    lines = [el.dash.name or str(el.id)]
    if include_attributes:
        lines.append(f"[{el.refinement.value}] {el.id}")
        for term, value in el.dash.terms():
            if term != "name":
                lines.append(f"{term}: {value}")
        for attr in ("generated_at", "started_at", "ended_at"):
            ts = getattr(el, attr)
            if ts is not None:
                lines.append(f"{attr.replace('_', ' ')}: {ts}")
    return "\n".join(lines)


def _node(el: Element, opts, indent: str) -> str:
    style = NODE_STYLE[el.category]
    if el.is_collection:
        style += ", peripheries=2"
    return f"{indent}{dot_quote(str(el.id))} [label={dot_quote(_label(el, opts.include_attributes))}, {style}];"


def to_dot(doc: ProvenanceDocument, opts: RenderOptions | None = None) -> str:
    """DOT digraph with one node per element and one labelled edge per relation.

    Visual entities are grouped into one cluster per layer when the document
    has a valid layer structure.
    """
    opts = opts or RenderOptions()
    clusters: dict[Layer, list] = {}
    try:
        assignment = infer_layers(doc)
    except LayeringError:
        if opts.layer_filter is not None:
            raise
        assignment = None
    if opts.layer_filter is not None:
        doc = layer_view(doc, opts.layer_filter)

    title = opts.title or "provenance"
    if not doc.elements and not doc.relations:
        return f"digraph {dot_quote(title)} {{\n}}\n"

    lines = [f"digraph {dot_quote(title)} {{",
             "  graph [rankdir=BT, fontname=Helvetica];",
             "  node [fontname=Helvetica];",
             "  edge [fontname=Helvetica, fontsize=10];"]
    loose = []
    for el in sorted(doc.elements.values(), key=lambda e: (_ORDER[e.category], str(e.id))):
        layers = assignment.of(el.id) if assignment and el.category is Category.ENTITY else None
        if layers and len(layers) == 1 and el.refinement is not Refinement.DATA_ENTITY \
                and next(iter(layers)) in LAYER_TITLES:
            clusters.setdefault(next(iter(layers)), []).append(el)
        else:
            loose.append(el)
    for layer in LAYERS:
        if layer in clusters:
            lines.append(f"  subgraph cluster_{layer.number} {{")
            lines.append(f"    label={dot_quote(LAYER_TITLES[layer])};")
            lines += [_node(el, opts, "    ") for el in clusters[layer]]
            lines.append("  }")
    lines += [_node(el, opts, "  ") for el in loose]
    for r in doc.relations:
        lines.append(f"  {dot_quote(str(r.subject))} -> {dot_quote(str(r.object))} "
                     f"[label={dot_quote(r.kind.value)}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


_ORDER = {Category.ENTITY: 0, Category.ACTIVITY: 1, Category.AGENT: 2}
