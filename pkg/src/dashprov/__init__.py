"""Dashboard provenance: a layered extension of W3C-PROV for information dashboards."""

from __future__ import annotations

from .errors import *  # noqa: F401,F403
from .errors import ParseError, ProvenanceError
from .layering import Layer, LayerAssignment, drill_path, infer_layers, layer_view
from .model import (
    Category,
    DashAttributes,
    Element,
    ElementKind,
    ProvenanceDocument,
    QualifiedName,
    Refinement,
    Relation,
    RelationKind,
    Timestamp,
    activity,
    add_element,
    add_relation,
    agent,
    declare_prefix,
    entity,
    members_of,
    new_document,
    qname,
    semantically_equal,
)
from .query import attribution, delegation_chain, freshness, lineage, stats
from .render import RenderOptions, to_dot, to_html_report
from .scaffold import scaffold
from .serialization import FormatId, convert, dump, load, parse, write
from .validation import Diagnostic, Profile, Severity, explain_rule, get_profile, validate

__version__ = "0.1.0"
