"""Static views of a provenance document: Graphviz DOT and a per-layer HTML report."""

from .dot import to_dot
from .html import to_html_report
from .options import RenderOptions

__all__ = ["RenderOptions", "to_dot", "to_html_report"]
