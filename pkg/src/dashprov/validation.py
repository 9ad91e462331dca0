"""Rule engine: structural PROV checks plus dashboard-model completeness.

Rules carry stable ids (R1..R10) so callers pin on ids, never on message
text. Each rule is a generator of findings; :func:`validate` runs the rules
enabled by a profile and returns diagnostics in a deterministic order.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Iterator

from . import _graph
from .errors import UnknownProfile, UnknownRule
from .layering import membership_problems
from .model import (
    SIGNATURES,
    Category,
    ProvenanceDocument,
    QualifiedName,
    Refinement,
    RelationKind,
    signature_problem,
)


class Severity(str, Enum):
    ERROR = "Error"
    WARNING = "Warning"
    INFO = "Info"

    @property
    def rank(self) -> int:
        return {"Error": 3, "Warning": 2, "Info": 1}[self.value]

    def __lt__(self, other):
        if not isinstance(other, Severity):
            return NotImplemented
        return self.rank < other.rank


@dataclass(frozen=True)
class Diagnostic:
    rule_id: str
    severity: Severity
    subjects: tuple[QualifiedName, ...]
    message: str

    def sort_key(self):
        return (-self.severity.rank, rule_number(self.rule_id),
                [str(s) for s in self.subjects], self.message)

    def to_dict(self) -> dict:
        return {"ruleId": self.rule_id, "severity": self.severity.value,
                "subjects": [str(s) for s in self.subjects], "message": self.message}


Finding = tuple[Severity, tuple[QualifiedName, ...], str]


@dataclass(frozen=True)
class Rule:
    id: str
    title: str
    severity: Severity
    strict_only: bool
    motivation: str
    check: Callable[[ProvenanceDocument], Iterator[Finding]]
    detail: str = ""


def rule_number(rule_id: str) -> int:
    return int(rule_id[1:])


# -- rule bodies --

def _r1_signatures(doc):
    for r in doc.relations:
        s, o = doc.elements.get(r.subject), doc.elements.get(r.object)
        if s is None or o is None:
            continue  # R7 reports these
        problem = signature_problem(r.kind, s, o)
        if problem:
            yield Severity.ERROR, (r.subject, r.object), problem


def _r2_time_order(doc):
    for a in doc.of_category(Category.ACTIVITY):
        if not a.times_ordered:
            yield (Severity.ERROR, (a.id,),
                   f"activity starts at {a.started_at} but ends earlier, at {a.ended_at}")


def _cycles(doc, kinds, what):
    adj = _graph.adjacency(
        (r.subject, r.object) for r in doc.relations
        if r.kind in kinds and r.subject in doc.elements and r.object in doc.elements)
    for comp in _graph.cyclic_components(adj):
        yield Severity.ERROR, tuple(comp), f"{what} cycle through " + ", ".join(map(str, comp))


def _r3_derivation_cycle(doc):
    yield from _cycles(doc, (RelationKind.WAS_DERIVED_FROM, RelationKind.HAD_PRIMARY_SOURCE),
                       "derivation")


def _r4_membership(doc):
    for p in membership_problems(doc):
        yield Severity.ERROR, p.subjects, p.message


def _r5_metadata(doc):
    for e in sorted(doc.elements.values(), key=lambda e: str(e.id)):
        if not e.dash.name:
            yield Severity.ERROR, (e.id,), "missing dash:name"
        missing = []
        if e.refinement is Refinement.DASHBOARD:
            missing += [t for t, v in (("description", e.dash.description),
                                       ("version", e.dash.version), ("url", e.dash.url)) if not v]
        if e.category is Category.AGENT:
            missing += [t for t, v in (("role", e.dash.roles), ("url", e.dash.url)) if not v]
        if missing:
            yield (Severity.WARNING, (e.id,),
                   "missing recommended " + ", ".join("dash:" + m for m in missing))


def _r6_delegation_cycle(doc):
    yield from _cycles(doc, (RelationKind.ACTED_ON_BEHALF_OF,), "delegation")


def _r7_dangling(doc):
    for r in doc.relations:
        missing = [x for x in (r.subject, r.object) if x not in doc.elements]
        if missing:
            yield (Severity.ERROR, (r.subject, r.object),
                   f"{r.kind.value} refers to undefined " + ", ".join(map(str, missing)))


def _r8_orphans(doc):
    touched = {x for r in doc.relations for x in (r.subject, r.object)}
    for e in sorted(doc.elements.values(), key=lambda e: str(e.id)):
        if e.id not in touched:
            yield Severity.WARNING, (e.id,), "element takes part in no relation"


def _r9_duplicate_members(doc):
    counts = Counter((r.subject, r.object) for r in doc.relations_of(RelationKind.HAD_MEMBER))
    for (coll, member), n in counts.items():
        if n > 1:
            yield Severity.WARNING, (coll, member), f"{member} listed {n} times as a member of {coll}"


def _r10_unsourced_data(doc):
    sourced = {r.subject for r in doc.relations_of(
        RelationKind.HAD_PRIMARY_SOURCE, RelationKind.WAS_ATTRIBUTED_TO)}
    for e in doc.of_category(Category.ENTITY):
        if e.refinement is Refinement.DATA_ENTITY and e.id not in sourced:
            yield (Severity.WARNING, (e.id,),
                   "data entity has neither a primary source nor an attributed agent")


def _signature_table() -> str:
    lines = []
    for kind, (s, o) in SIGNATURES.items():
        suffix = " (subject must be a collection)" if kind is RelationKind.HAD_MEMBER else ""
        lines.append(f"  prov:{kind.value}: {s.value} -> {o.value}{suffix}")
    return "\n".join(lines)


RULES: dict[str, Rule] = {r.id: r for r in [
    Rule("R1", "relation endpoint signature", Severity.ERROR, False,
         "Each PROV relation connects fixed element categories, e.g. wasGeneratedBy "
         "states which activity generated an entity.",
         _r1_signatures, "Allowed signatures:\n" + _signature_table()),
    Rule("R2", "activity time order", Severity.ERROR, False,
         "startedAtTime and endedAtTime tell users when an activity ran; "
         "an activity cannot end before it starts.",
         _r2_time_order),
    Rule("R3", "acyclic derivation", Severity.ERROR, False,
         "Lineage questions (which entities was this derived from?) must terminate, "
         "so wasDerivedFrom and hadPrimarySource together must form no cycle.",
         _r3_derivation_cycle),
    Rule("R4", "dashboard membership shape", Severity.ERROR, True,
         "The dashboard is decomposed into three visual layers: the dashboard, its "
         "subtopics and individual visual entities. This needs one Dashboard root, an "
         "acyclic hadMember graph and no collection nested below the subtopic level.",
         _r4_membership),
    Rule("R5", "metadata completeness", Severity.ERROR, False,
         "dash:name is how users identify a provenance element. The dashboard should "
         "also state its description, version and url, and agents their role and url. "
         "A missing name is an error; the other gaps are warnings.",
         _r5_metadata),
    Rule("R6", "acyclic delegation", Severity.ERROR, False,
         "actedOnBehalfOf records hierarchies and delegated responsibility between "
         "agents; a hierarchy cannot loop back on itself.",
         _r6_delegation_cycle),
    Rule("R7", "dangling reference", Severity.ERROR, False,
         "Every relation endpoint must be a defined element. Parsers allow forward "
         "references, so this is re-checked after parsing.",
         _r7_dangling),
    Rule("R8", "orphan element", Severity.WARNING, True,
         "An element that takes part in no relation conveys no provenance.",
         _r8_orphans),
    Rule("R9", "duplicate membership", Severity.WARNING, True,
         "The same member listed twice in one collection is usually a transcription slip.",
         _r9_duplicate_members),
    Rule("R10", "unsourced data entity", Severity.WARNING, True,
         "Data-source transparency: dashboards often fail to tell users where their "
         "data comes from. A data entity should name a primary source or an attributed agent.",
         _r10_unsourced_data),
]}


@dataclass(frozen=True)
class Profile:
    name: str
    enabled_rules: frozenset[str]
    severity_overrides: dict[str, Severity] = field(default_factory=dict)


CORE = Profile("core", frozenset(r.id for r in RULES.values() if not r.strict_only))
DASHBOARD_STRICT = Profile("dashboard-strict", frozenset(RULES))
PROFILES = {p.name: p for p in (CORE, DASHBOARD_STRICT)}


def get_profile(name: str) -> Profile:
    try:
        return PROFILES[name]
    except KeyError:
        raise UnknownProfile(f"unknown profile {name!r}; choose from {', '.join(PROFILES)}") from None


def validate(doc: ProvenanceDocument, profile: Profile | str = DASHBOARD_STRICT) -> list[Diagnostic]:
    if isinstance(profile, str):
        profile = get_profile(profile)
    diagnostics = []
    for rule_id in sorted(profile.enabled_rules, key=rule_number):
        if rule_id not in RULES:
            raise UnknownRule(rule_id)
        override = profile.severity_overrides.get(rule_id)
        for severity, subjects, message in RULES[rule_id].check(doc):
            diagnostics.append(Diagnostic(rule_id, override or severity, tuple(subjects), message))
    return sorted(diagnostics, key=Diagnostic.sort_key)


def has_errors(diagnostics: list[Diagnostic]) -> bool:
    return any(d.severity is Severity.ERROR for d in diagnostics)


def explain_rule(rule_id: str) -> str:
    try:
        rule = RULES[rule_id]
    except KeyError:
        raise UnknownRule(f"unknown rule {rule_id!r}") from None
    profiles = [p.name for p in PROFILES.values() if rule.id in p.enabled_rules]
    text = [f"{rule.id}: {rule.title}",
            f"severity: {rule.severity.value}",
            f"profiles: {', '.join(profiles)}",
            f"why: {rule.motivation}"]
    if rule.detail:
        text.append(rule.detail)
    return "\n".join(text)


def format_text(diagnostics: list[Diagnostic]) -> str:
    if not diagnostics:
        return "no findings\n"
    lines = []
    for d in diagnostics:
        where = ", ".join(map(str, d.subjects)) or "(document)"
        lines.append(f"{d.severity.value.lower()} {d.rule_id} [{where}] {d.message}")
    counts = Counter(d.severity for d in diagnostics)
    lines.append(f"{counts[Severity.ERROR]} error(s), {counts[Severity.WARNING]} warning(s), "
                 f"{counts[Severity.INFO]} info")
    return "\n".join(lines) + "\n"


def format_json(diagnostics: list[Diagnostic]) -> str:
    return json.dumps([d.to_dict() for d in diagnostics], ensure_ascii=False, indent=2) + "\n"
