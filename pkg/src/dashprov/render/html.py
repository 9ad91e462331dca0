from __future__ import annotations

from html import escape
from urllib.parse import urlparse

from ..errors import CyclicDelegation
from ..layering import LAYERS, Layer, infer_layers
from ..model import Category, Element, ProvenanceDocument, QualifiedName, Refinement, RelationKind
from ..query import delegation_chain
from .options import RenderOptions

SECTION_TITLES = {
    Layer.L1: "Layer 1 &middot; The dashboard as a whole",
    Layer.L2: "Layer 2 &middot; Subtopics",
    Layer.L3: "Layer 3 &middot; Individual visual entities",
}

STYLE = """
body { font-family: Helvetica, Arial, sans-serif; margin: 2em auto; max-width: 60em; color: #222; }
section { border-top: 2px solid #ccc; margin-top: 2em; }
h1 { font-size: 1.6em; }
li.entity, li.agent, li.activity { margin-bottom: 0.8em; }
.id { color: #777; font-family: monospace; font-size: 0.9em; }
dl { margin: 0.3em 0 0 1em; }
dt { font-weight: bold; float: left; clear: left; margin-right: 0.5em; }
dd { margin: 0 0 0.2em 0; }
.empty { color: #888; font-style: italic; }
"""


def _name(doc: ProvenanceDocument, id: QualifiedName) -> str:
    el = doc.elements.get(id)
    return (el.dash.name if el is not None and el.dash.name else None) or str(id)


def _link(url: str) -> str:
    # only web links become anchors; anything else is shown as text
    if urlparse(url).scheme in ("http", "https"):
        return f'<a href="{escape(url, quote=True)}">{escape(url)}</a>'
    return escape(url)


def _attributes(el: Element) -> str:
    rows = []
    d = el.dash
    for label, value in (("Description", d.description), ("Version", d.version),
                         ("Contact", d.contact_information),
                         ("Trustworthiness", d.trustworthiness)):
        if value:
            rows.append(f"<dt>{label}</dt><dd>{escape(value)}</dd>")
    if d.url:
        rows.append(f"<dt>URL</dt><dd>{_link(d.url)}</dd>")
    for note in d.annotations:
        rows.append(f"<dt>Annotation</dt><dd>{escape(note)}</dd>")
    if el.generated_at:
        rows.append(f"<dt>Generated</dt><dd>{escape(str(el.generated_at))}</dd>")
    for key, value in d.extensions:
        rows.append(f"<dt>{escape(str(key))}</dt><dd>{escape(value)}</dd>")
    return f"<dl>{''.join(rows)}</dl>" if rows else ""


def _entity_item(el: Element, css: str) -> str:
    return (f'<li class="entity {css}"><strong>{escape(el.dash.name or str(el.id))}</strong> '
            f'<span class="id">{escape(str(el.id))}</span>{_attributes(el)}</li>')


def _agent_item(doc: ProvenanceDocument, el: Element) -> str:
    roles = ", ".join(el.dash.roles)
    parts = [f'<li class="agent"><strong>{escape(el.dash.name or str(el.id))}</strong> '
             f'<span class="id">{escape(str(el.id))}</span>']
    if roles:
        parts.append(f" &middot; roles: {escape(roles)}")
    try:
        chain = delegation_chain(doc, el.id)
    except CyclicDelegation:
        chain = []
    if chain:
        names = [el.dash.name or str(el.id)] + [_name(doc, a) for a in chain]
        parts.append('<div class="chain">Acts on behalf of: '
                     + " &rarr; ".join(escape(n) for n in names) + "</div>")
    parts.append(_attributes(el) + "</li>")
    return "".join(parts)


def _activity_item(el: Element) -> str:
    start = str(el.started_at) if el.started_at else "?"
    end = str(el.ended_at) if el.ended_at else "?"
    span = "" if not (el.started_at or el.ended_at) else f" &middot; {escape(start)} &ndash; {escape(end)}"
    return (f'<li class="activity"><strong>{escape(el.dash.name or str(el.id))}</strong> '
            f'<span class="id">{escape(str(el.id))}</span> [{escape(el.refinement.value)}]'
            f'{span}{_attributes(el)}</li>')


def _section(doc: ProvenanceDocument, layer: Layer, ids: list[QualifiedName]) -> str:
    entities = [doc.elements[i] for i in ids]
    visual = [e for e in entities if e.refinement is not Refinement.DATA_ENTITY]
    data = [e for e in entities if e.refinement is Refinement.DATA_ENTITY]
    in_layer = set(ids)

    activities: set[QualifiedName] = set()
    agents: set[QualifiedName] = set()
    for r in doc.relations:
        if r.kind is RelationKind.WAS_ATTRIBUTED_TO and r.subject in in_layer:
            agents.add(r.object)
        elif r.kind is RelationKind.WAS_GENERATED_BY and r.subject in in_layer:
            activities.add(r.object)
        elif r.kind is RelationKind.USED and r.object in in_layer:
            activities.add(r.subject)
    for r in doc.relations_of(RelationKind.WAS_ASSOCIATED_WITH):
        if r.subject in activities:
            agents.add(r.object)
    agent_els = [doc.elements[a] for a in sorted(agents, key=str)
                 if a in doc.elements and doc.elements[a].category is Category.AGENT]
    activity_els = [doc.elements[a] for a in sorted(activities, key=str)
                    if a in doc.elements and doc.elements[a].category is Category.ACTIVITY]

    out = [f'<section id="layer-{layer.number}">', f"<h2>{SECTION_TITLES[layer]}</h2>"]

    def block(title, items):
        out.append(f"<h3>{title}</h3>")
        if items:
            out.append("<ul>" + "".join(items) + "</ul>")
        else:
            out.append('<p class="empty">None recorded for this layer.</p>')

    block("Entities", [_entity_item(e, "visual") for e in visual])
    if data:
        block("Data", [_entity_item(e, "data") for e in data])
    block("Responsible agents", [_agent_item(doc, a) for a in agent_els])
    block("Activities", [_activity_item(a) for a in activity_els])
    out.append("</section>")
    return "\n".join(out)


def to_html_report(doc: ProvenanceDocument, opts: RenderOptions | None = None) -> str:
    """Self-contained HTML page with one section per layer.

    Raises the layering error when the document has no valid layer structure.
    """
    opts = opts or RenderOptions()
    assignment = infer_layers(doc)
    root = doc.elements[assignment.root]
    title = opts.title or f"Provenance of {root.dash.name or root.id}"
    layers = [opts.layer_filter] if opts.layer_filter is not None else list(LAYERS)
    sections = [_section(doc, layer, assignment.members(layer)) for layer in layers]
    return "\n".join([
        "<!DOCTYPE html>",
        '<html lang="en">',
        "<head>",
        '<meta charset="utf-8">',
        f"<title>{escape(title)}</title>",
        f"<style>{STYLE}</style>",
        "</head>",
        "<body>",
        f"<h1>{escape(title)}</h1>",
        *sections,
        "</body>",
        "</html>",
    ]) + "\n"
