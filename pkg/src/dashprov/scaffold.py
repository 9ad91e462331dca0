"""Build a skeleton provenance document from a small dashboard outline.

Outline format (JSON)::

    {
      "dashboardName": "COVID-19 NO BRASIL",
      "subtopics": [{"name": "Casos", "entities": ["Casos novos", "..."]}],
      "entities": ["Chart placed directly on the dashboard"],
      "agents": [{"name": "Taskforce", "kind": "organization",
                  "role": "developer", "delegatesTo": "SUS"}]
    }

``entities``, ``agents`` and ``delegatesTo`` are optional; ``role`` and
``delegatesTo`` also accept lists. Optional ``description``, ``version`` and
``url`` keys are copied to the dashboard, and ``url`` to agents.
"""

from __future__ import annotations

import re
import unicodedata

from .model import (
    ProvenanceDocument,
    QualifiedName,
    Refinement,
    Relation,
    RelationKind,
    activity,
    agent,
    entity,
)

PREFIX = "ex"
NAMESPACE = "http://example.org/dashboard#"

AGENT_KINDS = {
    "organization": Refinement.ORGANIZATION,
    "department": Refinement.DEPARTMENT,
    "person": Refinement.PERSON,
    "software": Refinement.SOFTWARE_AGENT,
    "softwareagent": Refinement.SOFTWARE_AGENT,
    "generic": Refinement.GENERIC_AGENT,
    "agent": Refinement.GENERIC_AGENT,
}

_UNSAFE = re.compile(r"[\s:;,.\"'<>#()\[\]{}\\^@|`/?!&=+*%$~]+")


class OutlineError(ValueError):
    pass


def slug(name: str) -> str:
    text = unicodedata.normalize("NFC", name).strip()
    text = _UNSAFE.sub("-", text).strip("-")
    return text or "item"


class _Ids:
    def __init__(self):
        self.used: set[str] = set()

    def new(self, name: str) -> QualifiedName:
        base = slug(name)
        local, n = base, 2
        while local in self.used:
            local = f"{base}-{n}"
            n += 1
        self.used.add(local)
        return QualifiedName(PREFIX, local)


def _str(value, where: str) -> str:
    if not isinstance(value, str) or not value.strip():
        raise OutlineError(f"{where} must be a non-empty string")
    return value


def _str_list(value, where: str) -> list[str]:
    if value is None:
        return []
    items = [value] if isinstance(value, str) else value
    if not isinstance(items, list):
        raise OutlineError(f"{where} must be a string or a list of strings")
    if isinstance(value, str):
        return [_str(value, where)]
    return [_str(v, f"{where}[{i}]") for i, v in enumerate(items)]


def scaffold(outline: dict) -> ProvenanceDocument:
    if not isinstance(outline, dict):
        raise OutlineError("outline must be a JSON object")
    dashboard_name = _str(outline.get("dashboardName"), "dashboardName")
    subtopics = outline.get("subtopics", [])
    if not isinstance(subtopics, list):
        raise OutlineError("subtopics must be a list")
    agent_entries = outline.get("agents", [])
    if not isinstance(agent_entries, list):
        raise OutlineError("agents must be a list")

    ids = _Ids()
    doc = ProvenanceDocument()
    doc.declare_prefix(PREFIX, NAMESPACE)

    root = QualifiedName(PREFIX, "dashboard")
    ids.used.add(root.local)
    extras = {k: outline[k] for k in ("description", "version", "url") if outline.get(k)}
    doc.add_element(entity(root, Refinement.DASHBOARD, name=dashboard_name, **extras))

    creation = ids.new("creation-maintenance")
    doc.add_element(activity(creation, Refinement.CREATION_MAINTENANCE,
                             name=f"Creation and maintenance of {dashboard_name}"))

    generated = [root]
    memberships = []
    for i, topic in enumerate(subtopics):
        if not isinstance(topic, dict):
            raise OutlineError(f"subtopics[{i}] must be an object")
        tname = _str(topic.get("name"), f"subtopics[{i}].name")
        tid = ids.new(tname)
        doc.add_element(entity(tid, Refinement.SUBTOPIC_COLLECTION, name=tname))
        memberships.append((root, tid))
        generated.append(tid)
        for ename in _str_list(topic.get("entities"), f"subtopics[{i}].entities"):
            eid = ids.new(ename)
            doc.add_element(entity(eid, Refinement.VISUAL_ENTITY, name=ename))
            memberships.append((tid, eid))
            generated.append(eid)
    for ename in _str_list(outline.get("entities"), "entities"):
        eid = ids.new(ename)
        doc.add_element(entity(eid, Refinement.VISUAL_ENTITY, name=ename))
        memberships.append((root, eid))
        generated.append(eid)

    agent_ids: dict[str, QualifiedName] = {}
    delegations = []
    for i, entry in enumerate(agent_entries):
        if not isinstance(entry, dict):
            raise OutlineError(f"agents[{i}] must be an object")
        aname = _str(entry.get("name"), f"agents[{i}].name")
        if aname in agent_ids:
            raise OutlineError(f"agent {aname!r} is listed twice")
        kind = str(entry.get("kind", "generic")).lower()
        if kind not in AGENT_KINDS:
            raise OutlineError(f"agents[{i}].kind must be one of {', '.join(sorted(AGENT_KINDS))}")
        aid = ids.new(aname)
        agent_ids[aname] = aid
        extras = {"url": entry["url"]} if entry.get("url") else {}
        doc.add_element(agent(aid, AGENT_KINDS[kind], name=aname,
                              roles=_str_list(entry.get("role"), f"agents[{i}].role"), **extras))
        delegations += [(aname, p) for p in _str_list(entry.get("delegatesTo"), f"agents[{i}].delegatesTo")]

    for rel_s, rel_o in memberships:
        doc.add_relation(Relation(RelationKind.HAD_MEMBER, rel_s, rel_o))
    for eid in generated:
        doc.add_relation(Relation(RelationKind.WAS_GENERATED_BY, eid, creation))
    principals = set()
    for delegate, principal in delegations:
        if principal not in agent_ids:
            raise OutlineError(f"delegatesTo names unknown agent {principal!r}")
        principals.add(principal)
        doc.add_relation(Relation(RelationKind.ACTED_ON_BEHALF_OF, agent_ids[delegate], agent_ids[principal]))
    # the dashboard is attributed to the agents acting directly, not to their principals
    for aname, aid in agent_ids.items():
        if aname not in principals:
            doc.add_relation(Relation(RelationKind.WAS_ATTRIBUTED_TO, root, aid))
            doc.add_relation(Relation(RelationKind.WAS_ASSOCIATED_WITH, creation, aid))
    return doc
