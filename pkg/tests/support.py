"""Shared helpers for the test suite: fixture paths, random documents,
brute-force reference implementations and a small DOT syntax checker."""

from __future__ import annotations

import random
import re
from datetime import datetime, timedelta, timezone
from pathlib import Path

from dashprov.model import (
    Category,
    Element,
    ElementKind,
    ProvenanceDocument,
    QualifiedName,
    Refinement,
    Relation,
    RelationKind,
    SIGNATURES,
    Timestamp,
    DashAttributes,
)

ROOT = Path(__file__).resolve().parent.parent
FIXTURES = ROOT / "fixtures"
FIXTURE_TTL = FIXTURES / "covid19_brasil.ttl"
FIXTURE_JSON = FIXTURES / "covid19_brasil.provjson"
LISTING_TTL = FIXTURES / "published_listing.ttl"
OUTLINE = FIXTURES / "covid19_brasil_outline.json"
MINIMAL_TTL = FIXTURES / "minimal_single_chart.ttl"
CORRUPT_TTL = FIXTURES / "corrupt.ttl"
PREFIX_ONLY_TTL = FIXTURES / "prefix_only.ttl"


def ex(local: str) -> QualifiedName:
    return QualifiedName("ex", local)


# -- random documents --

_LOCAL_CHARS = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_-éÓçãõ"
_TEXT_CHARS = ("abcdefghij KLMNOP 0123 éÓçã ñ ü 中文 "
               "\"'\\\n\t#;,.:<>&{}[]()^@|`%$")
_ENTITY_REFINEMENTS = [Refinement.DASHBOARD, Refinement.SUBTOPIC_COLLECTION,
                       Refinement.VISUAL_ENTITY, Refinement.DATA_ENTITY,
                       Refinement.GENERIC_ENTITY]
_AGENT_REFINEMENTS = [Refinement.ORGANIZATION, Refinement.DEPARTMENT, Refinement.PERSON,
                      Refinement.SOFTWARE_AGENT, Refinement.GENERIC_AGENT]
_ACTIVITY_REFINEMENTS = [Refinement.CREATION_MAINTENANCE, Refinement.SUSTAINABILITY,
                         Refinement.DATA_UPDATE, Refinement.GENERIC_ACTIVITY]


def random_text(rng: random.Random, max_len: int = 24) -> str:
    return "".join(rng.choice(_TEXT_CHARS) for _ in range(rng.randint(0, max_len)))


def random_timestamp(rng: random.Random) -> Timestamp:
    base = datetime(2000, 1, 1, tzinfo=timezone.utc)
    offset = timezone(timedelta(minutes=15 * rng.randint(-48, 56)))
    instant = base + timedelta(seconds=rng.randint(0, 10**9))
    if rng.random() < 0.3:
        instant += timedelta(microseconds=rng.randint(1, 999_999))
    return Timestamp(instant.astimezone(offset))


def _maybe(rng, p, make):
    return make() if rng.random() < p else None


def _extensions(rng):
    return tuple((QualifiedName(rng.choice(["ext", "ex"]), rng.choice(["note", "source", "freq"])),
                  random_text(rng, 12))
                 for _ in range(rng.choice([0, 0, 0, 1, 2, 3])))


def random_dash(rng: random.Random) -> DashAttributes:
    return DashAttributes(
        name=_maybe(rng, 0.8, lambda: random_text(rng)),
        version=_maybe(rng, 0.3, lambda: random_text(rng, 8)),
        roles=tuple(random_text(rng, 10) for _ in range(rng.choice([0, 0, 1, 2]))),
        description=_maybe(rng, 0.4, lambda: random_text(rng, 60)),
        annotations=tuple(random_text(rng, 30) for _ in range(rng.choice([0, 0, 1, 3]))),
        contact_information=_maybe(rng, 0.2, lambda: random_text(rng)),
        trustworthiness=_maybe(rng, 0.2, lambda: random_text(rng, 8)),
        url=_maybe(rng, 0.3, lambda: f"https://example.org/{rng.randint(0, 999)}?q=a&b=\"c\""),
        extensions=_extensions(rng),
    )


def random_document(seed: int, max_elements: int = 300, max_relations: int | None = None
                    ) -> ProvenanceDocument:
    """A core-valid document with every element category, refinement and relation kind."""
    rng = random.Random(seed)
    doc = ProvenanceDocument()
    doc.declare_prefix("ex", "http://example.org/ns#")
    doc.declare_prefix("ext", "urn:x-ext:")
    if rng.random() < 0.5:
        doc.declare_prefix("", "http://example.org/default#")
    prefixes = sorted(p for p in doc.prefixes if p in ("ex", "", "ext"))

    n = rng.randint(0, max_elements)
    ids = set()
    while len(ids) < n:
        local = "".join(rng.choice(_LOCAL_CHARS) for _ in range(rng.randint(1, 10)))
        ids.add(QualifiedName(rng.choice(prefixes), local))
    for id in sorted(ids):
        category = rng.choice(list(Category))
        dash = random_dash(rng)
        if category is Category.ENTITY:
            ref = rng.choice(_ENTITY_REFINEMENTS)
            kind = ElementKind.of(ref, collection=rng.random() < 0.3)
            el = Element(id, kind, dash, generated_at=_maybe(rng, 0.4, lambda: random_timestamp(rng)))
        elif category is Category.AGENT:
            el = Element(id, ElementKind.of(rng.choice(_AGENT_REFINEMENTS)), dash)
        else:
            times = sorted(t for t in (_maybe(rng, 0.5, lambda: random_timestamp(rng)),
                                       _maybe(rng, 0.5, lambda: random_timestamp(rng)))
                           if t is not None)
            start = end = None
            if len(times) == 2:
                start, end = times
            elif times:
                start, end = (times[0], None) if rng.random() < 0.5 else (None, times[0])
            el = Element(id, ElementKind.of(rng.choice(_ACTIVITY_REFINEMENTS)), dash,
                         started_at=start, ended_at=end)
        doc.add_element(el)

    by_cat = {c: [e for e in doc.elements.values() if e.category is c] for c in Category}
    collections = [e for e in by_cat[Category.ENTITY] if e.is_collection]
    budget = rng.randint(0, max_relations if max_relations is not None else 2 * n + 1)
    for _ in range(budget):
        kind = rng.choice(list(RelationKind))
        s_cat, o_cat = SIGNATURES[kind]
        subjects = collections if kind is RelationKind.HAD_MEMBER else by_cat[s_cat]
        if not subjects or not by_cat[o_cat]:
            continue
        rel = Relation(kind, rng.choice(subjects).id, rng.choice(by_cat[o_cat]).id,
                       at_time=_maybe(rng, 0.1, lambda: random_timestamp(rng)),
                       attributes=_extensions(rng) if rng.random() < 0.15 else ())
        doc.add_relation(rel)
    return doc


def random_dag(seed: int, max_nodes: int = 200) -> ProvenanceDocument:
    """Entities with acyclic derivations, agents with acyclic delegation and attribution."""
    rng = random.Random(seed)
    doc = ProvenanceDocument()
    doc.declare_prefix("ex", "http://example.org/ns#")
    n = rng.randint(1, max_nodes)
    n_agents = rng.randint(1, max(1, n // 3))
    ents = [ex(f"e{i}") for i in range(n - n_agents)] or [ex("e0")]
    ags = [ex(f"a{i}") for i in range(n_agents)]
    rng.shuffle(ents)
    rng.shuffle(ags)
    for e in ents:
        doc.add_element(Element(e, ElementKind.of(rng.choice(_ENTITY_REFINEMENTS[2:]))))
    for a in ags:
        doc.add_element(Element(a, ElementKind.of(Refinement.ORGANIZATION),
                                DashAttributes(roles=(f"role-{a.local}",))))
    density = rng.random() * 3
    # edges only go from earlier to later in the shuffled order, so no cycles
    for nodes, kinds in ((ents, [RelationKind.WAS_DERIVED_FROM, RelationKind.HAD_PRIMARY_SOURCE]),
                         (ags, [RelationKind.ACTED_ON_BEHALF_OF])):
        for _ in range(int(density * len(nodes))):
            if len(nodes) < 2:
                break
            i, j = sorted(rng.sample(range(len(nodes)), 2))
            doc.add_relation(Relation(rng.choice(kinds), nodes[i], nodes[j]))
    for _ in range(rng.randint(0, len(ents))):
        doc.add_relation(Relation(RelationKind.WAS_ATTRIBUTED_TO, rng.choice(ents), rng.choice(ags)))
    return doc


def random_membership_tree(seed: int, max_nodes: int = 200) -> ProvenanceDocument:
    """A dashboard with optional subtopics, shared members, stray entities and data links."""
    rng = random.Random(seed)
    doc = ProvenanceDocument()
    doc.declare_prefix("ex", "http://example.org/ns#")
    root = ex("root")
    doc.add_element(Element(root, ElementKind.of(Refinement.DASHBOARD)))
    n = rng.randint(0, max_nodes - 1)
    n_topics = 0 if rng.random() < 0.25 else rng.randint(0, max(0, n // 5))
    topics = [ex(f"t{i}") for i in range(n_topics)]
    charts = [ex(f"c{i}") for i in range(n - n_topics)]
    data = [ex(f"d{i}") for i in range(rng.randint(0, 10))]
    for t in topics:
        doc.add_element(Element(t, ElementKind.of(Refinement.SUBTOPIC_COLLECTION)))
    for c in charts:
        doc.add_element(Element(c, ElementKind.of(Refinement.VISUAL_ENTITY)))
    for d in data:
        doc.add_element(Element(d, ElementKind.of(Refinement.DATA_ENTITY)))
    for t in topics:
        if rng.random() < 0.9:
            doc.add_relation(Relation(RelationKind.HAD_MEMBER, root, t))
    for c in charts:
        parents = rng.sample([root] + topics, k=min(len(topics) + 1, rng.choice([0, 1, 1, 1, 2])))
        for p in parents:
            doc.add_relation(Relation(RelationKind.HAD_MEMBER, p, c))
    for d in data:
        sources = [root] + topics + charts
        for src in rng.sample(sources, k=min(len(sources), rng.randint(0, 3))):
            doc.add_relation(Relation(RelationKind.WAS_DERIVED_FROM, src, d))
    return doc


# -- brute-force reference implementations --

def closure_depths(edges: list[tuple], start) -> dict:
    """Shortest hop count from start by naive relaxation (Bellman-Ford style)."""
    depth = {start: 0}
    changed = True
    while changed:
        changed = False
        for s, o in edges:
            if s in depth and depth[s] + 1 < depth.get(o, 10**9):
                depth[o] = depth[s] + 1
                changed = True
    return depth


def oracle_lineage(doc: ProvenanceDocument, root):
    kinds = (RelationKind.WAS_DERIVED_FROM, RelationKind.HAD_PRIMARY_SOURCE)
    edges = [(r.subject, r.kind, r.object) for r in doc.relations if r.kind in kinds]
    depth = closure_depths([(s, o) for s, _, o in edges], root)
    reached = {e for e in edges if e[0] in depth}
    return depth, reached


def oracle_delegation(doc: ProvenanceDocument, agent) -> list:
    edges = [(r.subject, r.object) for r in doc.relations
             if r.kind is RelationKind.ACTED_ON_BEHALF_OF]
    depth = closure_depths(edges, agent)
    return sorted((a for a in depth if a != agent), key=lambda a: (depth[a], str(a)))


def oracle_attribution(doc: ProvenanceDocument, id) -> list[tuple]:
    direct = {r.object for r in doc.relations
              if r.kind is RelationKind.WAS_ATTRIBUTED_TO and r.subject == id}
    principals = set()
    for a in direct:
        principals |= set(oracle_delegation(doc, a))
    principals -= direct
    return ([(a, False) for a in sorted(direct, key=str)]
            + [(a, True) for a in sorted(principals, key=str)])


def oracle_paths(doc: ProvenanceDocument, root) -> dict:
    """Every hadMember path from root to each node, by exhaustive depth-first search."""
    children: dict = {}
    for r in doc.relations:
        if r.kind is RelationKind.HAD_MEMBER:
            children.setdefault(r.subject, []).append(r.object)
    paths: dict = {}

    def walk(path):
        paths.setdefault(path[-1], []).append(list(path))
        for c in children.get(path[-1], []):
            if c not in path:
                walk(path + [c])

    walk([root])
    return paths


def oracle_layers(doc: ProvenanceDocument) -> dict:
    root = next(e.id for e in doc.elements.values() if e.refinement is Refinement.DASHBOARD)
    paths = oracle_paths(doc, root)
    out = {}
    for node, ps in paths.items():
        shortest = min(len(p) for p in ps) - 1
        if shortest == 0:
            out[node] = {"L1_Dashboard"}
        elif shortest == 1 and doc.elements[node].is_collection:
            out[node] = {"L2_Subtopic"}
        else:
            out[node] = {"L3_Individual"}
    for r in doc.relations:
        if (r.kind is RelationKind.WAS_DERIVED_FROM and r.subject in paths
                and doc.elements[r.subject].refinement is not Refinement.DATA_ENTITY
                and doc.elements[r.object].refinement is Refinement.DATA_ENTITY):
            out.setdefault(r.object, set()).update(out[r.subject])
    for e in doc.elements.values():
        if e.category is Category.ENTITY and e.id not in out:
            out[e.id] = {"Unlayered"}
    return out


# -- DOT syntax --

_DOT_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<id>"(?:[^"\\]|\\.)*"|[A-Za-z_\x80-￿][A-Za-z0-9_\x80-￿]*|-?(?:\.[0-9]+|[0-9]+(?:\.[0-9]*)?))
  | (?P<edge>->)
  | (?P<punct>[{}\[\];,=])
""", re.VERBOSE)


class DotSyntaxError(ValueError):
    pass


def dot_tokens(text: str) -> list[tuple[str, str]]:
    out, pos = [], 0
    while pos < len(text):
        m = _DOT_TOKEN.match(text, pos)
        if not m:
            raise DotSyntaxError(f"bad character {text[pos]!r} at offset {pos}")
        pos = m.end()
        if m.lastgroup != "ws":
            out.append((m.lastgroup, m.group()))
    return out


def check_dot(text: str) -> tuple[int, int]:
    """Parse a DOT digraph (the subset this project emits); return (nodes, edges)."""
    toks = dot_tokens(text)
    pos = 0
    nodes, edges = set(), 0

    def peek():
        return toks[pos] if pos < len(toks) else ("eof", "")

    def take(kind=None, value=None):
        nonlocal pos
        tok = peek()
        if (kind and tok[0] != kind) or (value and tok[1] != value):
            raise DotSyntaxError(f"expected {value or kind}, found {tok[1] or 'end'!r}")
        pos += 1
        return tok

    def attr_list():
        take("punct", "[")
        while peek()[1] != "]":
            take("id")
            take("punct", "=")
            take("id")
            if peek()[1] in (",", ";"):
                take()
        take("punct", "]")

    def stmt_list():
        nonlocal edges
        while peek()[1] != "}":
            tok = peek()
            if tok == ("id", "subgraph"):
                take()
                if peek()[0] == "id":
                    take()
                take("punct", "{")
                stmt_list()
                take("punct", "}")
            elif tok[1] in ("graph", "node", "edge") and toks[pos + 1][1] == "[":
                take()
                attr_list()
            else:
                first = take("id")
                if peek()[1] == "=":
                    take()
                    take("id")
                elif peek()[0] == "edge":
                    take()
                    take("id")
                    edges += 1
                    if peek()[1] == "[":
                        attr_list()
                else:
                    nodes.add(first[1])
                    if peek()[1] == "[":
                        attr_list()
            if peek()[1] == ";":
                take()

    if peek() == ("id", "strict"):
        take()
    take("id", "digraph")
    if peek()[0] == "id":
        take()
    take("punct", "{")
    stmt_list()
    take("punct", "}")
    if pos != len(toks):
        raise DotSyntaxError("trailing tokens after the graph")
    return len(nodes), edges


# -- single-rule mutants of the fixture --

def _mutate(doc: ProvenanceDocument, rule: str) -> ProvenanceDocument:
    from dataclasses import replace

    m = doc.copy()
    R = RelationKind
    if rule == "R1":
        m.add_relation(Relation(R.WAS_GENERATED_BY, ex("População"), ex("dataset")), strict=False)
    elif rule == "R2":
        act = m.elements[ex("dataUpdate")]
        m.elements[act.id] = replace(act, started_at=act.ended_at, ended_at=act.started_at)
    elif rule == "R3":
        m.add_relation(Relation(R.WAS_DERIVED_FROM, ex("dataset"), ex("dashboard")))
    elif rule == "R4":
        m.add_relation(Relation(R.HAD_MEMBER, ex("Brasil"), ex("dashboard")))
    elif rule == "R5":
        el = m.elements[ex("População")]
        m.elements[el.id] = replace(el, dash=replace(el.dash, name=None))
    elif rule == "R6":
        m.add_relation(Relation(R.ACTED_ON_BEHALF_OF, ex("Governo-Federal"), ex("CORONAVIRUS-COVID-19")))
    elif rule == "R7":
        m.add_relation(Relation(R.WAS_DERIVED_FROM, ex("População"), ex("missing")), strict=False)
    elif rule == "R8":
        m.add_element(Element(ex("orphan"), ElementKind.of(Refinement.VISUAL_ENTITY),
                              DashAttributes(name="Orphan chart")))
    elif rule == "R9":
        m.add_relation(Relation(R.HAD_MEMBER, ex("dashboard"), ex("Casos")))
    elif rule == "R10":
        m.add_element(Element(ex("planilha"), ElementKind.of(Refinement.DATA_ENTITY),
                              DashAttributes(name="Planilha sem fonte")))
        m.add_relation(Relation(R.WAS_DERIVED_FROM, ex("População"), ex("planilha")))
    else:
        raise KeyError(rule)
    return m


RULE_IDS = [f"R{i}" for i in range(1, 11)]


def mutant(doc: ProvenanceDocument, rule: str) -> ProvenanceDocument:
    """The fixture with one violation of ``rule`` seeded in."""
    return _mutate(doc, rule)
