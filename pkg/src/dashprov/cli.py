"""``dashprov`` command line.

Exit codes: 0 success, 1 validation errors, 2 parse or input error, 3 usage error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import query, serialization
from .errors import LayeringError, ParseError, ProvenanceError, UnknownIdentifier, UnknownRule
from .layering import Layer
from .model import ProvenanceDocument
from .render import RenderOptions, to_dot, to_html_report
from .scaffold import OutlineError, scaffold
from .serialization import FormatId
from .validation import PROFILES, Severity, explain_rule, format_json, format_text, validate

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_INPUT = 2
EXIT_USAGE = 3

PROFILE_ENV = "DASHPROV_PROFILE"


class UsageError(Exception):
    pass


class InputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _format(path: str, flag: str) -> FormatId:
    if flag != "auto":
        return FormatId(flag)
    try:
        return serialization.format_for_path(path)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _load(path: str, flag: str = "auto") -> ProvenanceDocument:
    fmt = _format(path, flag)
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise InputError(f"{path}: cannot read: {exc.strerror or exc}") from None
    try:
        return serialization.parse(data, fmt)
    except ParseError as exc:
        raise InputError(f"{path}:{exc.line}:{exc.column}: expected {exc.expected}, found {exc.found}") from None


def _emit_json(payload) -> None:
    sys.stdout.write(json.dumps(payload, ensure_ascii=False, indent=2) + "\n")


# -- commands --

def cmd_validate(args) -> int:
    doc = _load(args.path, args.format)
    diagnostics = validate(doc, args.profile)
    sys.stdout.write(format_json(diagnostics) if args.report == "json" else format_text(diagnostics))
    if any(d.severity is Severity.ERROR for d in diagnostics):
        return EXIT_INVALID
    if args.strict_warnings and any(d.severity is Severity.WARNING for d in diagnostics):
        return EXIT_INVALID
    return EXIT_OK


def cmd_convert(args) -> int:
    target = _format(args.output, args.to)
    doc = _load(args.input, args.format)
    Path(args.output).write_bytes(serialization.write(doc, target))
    return EXIT_OK


def _name(doc, id) -> str:
    el = doc.elements.get(id)
    return f"{id} ({el.dash.name})" if el is not None and el.dash.name else str(id)


def cmd_query(args) -> int:
    doc = _load(args.path, args.format)
    try:
        target = query.lookup(doc, args.id)
        result = _QUERIES[args.query](doc, target)
    except UnknownIdentifier as exc:
        raise InputError(str(exc)) from None
    if args.report == "json":
        _emit_json({"query": args.query, "id": str(target), "result": _as_json(result)})
        return EXIT_OK
    out = sys.stdout
    if args.query == "lineage":
        out.write(f"lineage of {_name(doc, target)}\n")
        if len(result.depth_by_node) == 1:
            out.write("  (no derivations)\n")
        for node, depth in result.depth_by_node.items():
            if node != target:
                out.write(f"  depth {depth}: {_name(doc, node)}\n")
        for s, kind, o in result.edges:
            out.write(f"  {s} {kind.value} {o}\n")
    elif args.query == "delegation":
        if not result:
            out.write(f"{_name(doc, target)} acts on behalf of no other agent\n")
        else:
            out.write(f"{_name(doc, target)} acts on behalf of:\n")
            for n, a in enumerate(result, 1):
                out.write(f"  {n}. {_name(doc, a)}\n")
    elif args.query == "attribution":
        if not result:
            out.write(f"{_name(doc, target)} is not attributed to any agent\n")
        for item in result:
            how = "via delegation" if item.via_delegation else "direct"
            roles = f" roles: {', '.join(item.roles)}" if item.roles else ""
            out.write(f"  {how}: {_name(doc, item.agent)}{roles}\n")
    else:
        fmt = lambda t: str(t) if t is not None else "unknown"  # noqa: E731
        out.write(f"freshness of {_name(doc, target)}\n"
                  f"  latest generation: {fmt(result.latest_generation)}\n"
                  f"  latest data update end: {fmt(result.latest_update_activity_end)}\n"
                  f"  effective freshness: {fmt(result.effective_freshness)}\n")
    return EXIT_OK


_QUERIES = {
    "lineage": query.lineage,
    "delegation": query.delegation_chain,
    "attribution": query.attribution,
    "freshness": query.freshness,
}


def _as_json(result):
    if isinstance(result, list):
        return [_as_json(x) for x in result]
    if hasattr(result, "to_dict"):
        return result.to_dict()
    return str(result)


def cmd_render(args) -> int:
    suffix = Path(args.out).suffix.lower()
    if suffix not in (".dot", ".html"):
        raise UsageError(f"unsupported output extension {suffix!r}; use .dot or .html")
    doc = _load(args.path, args.format)
    opts = RenderOptions(layer_filter=Layer.from_number(args.layer) if args.layer else None,
                         include_attributes=args.attributes, title=args.title)
    try:
        text = to_dot(doc, opts) if suffix == ".dot" else to_html_report(doc, opts)
    except LayeringError as exc:
        raise InputError(f"{args.path}: cannot compute layers: {exc}") from None
    Path(args.out).write_text(text, encoding="utf-8", newline="\n")
    return EXIT_OK


def cmd_scaffold(args) -> int:
    target = _format(args.out, "auto")
    try:
        outline = json.loads(Path(args.outline).read_text(encoding="utf-8"))
    except OSError as exc:
        raise InputError(f"{args.outline}: cannot read: {exc.strerror or exc}") from None
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise InputError(f"{args.outline}: malformed outline: {exc}") from None
    try:
        doc = scaffold(outline)
    except (OutlineError, ProvenanceError) as exc:
        raise InputError(f"{args.outline}: malformed outline: {exc}") from None
    Path(args.out).write_bytes(serialization.write(doc, target))
    return EXIT_OK


def cmd_stats(args) -> int:
    doc = _load(args.path, args.format)
    summary = query.stats(doc)
    if args.report == "json":
        _emit_json(summary)
        return EXIT_OK
    lines = [f"prefixes: {summary['prefixes']}",
             f"elements: {summary['elements']}",
             f"relations: {summary['relations']}"]
    lines += [f"  {k}: {v}" for k, v in summary["byCategory"].items()]
    lines += [f"  {k}: {v}" for k, v in summary["byRefinement"].items() if v]
    lines += [f"  {k}: {v}" for k, v in summary["byRelation"].items() if v]
    lines += [f"layer {Layer(k).number} ({k}): {v}" for k, v in summary["layers"].items()]
    if summary["layerError"]:
        lines.append(f"layers unavailable: {summary['layerError']}")
    sys.stdout.write("\n".join(lines) + "\n")
    return EXIT_OK


def cmd_explain(args) -> int:
    try:
        sys.stdout.write(explain_rule(args.rule) + "\n")
    except UnknownRule as exc:
        raise UsageError(str(exc)) from None
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    default_profile = os.environ.get(PROFILE_ENV) or "dashboard-strict"
    formats = ["auto", *(f.value for f in FormatId)]

    parser = _Parser(prog="dashprov", description="Dashboard provenance toolkit.")
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    p = sub.add_parser("validate", help="check a document against a rule profile")
    p.add_argument("path")
    p.add_argument("--profile", default=default_profile)
    p.add_argument("--format", choices=formats, default="auto")
    p.add_argument("--report", choices=["text", "json"], default="text")
    p.add_argument("--strict-warnings", action="store_true", help="treat warnings as failures")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("convert", help="convert between .ttl and .provjson")
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--format", choices=formats, default="auto", help="input format")
    p.add_argument("--to", choices=formats, default="auto", help="output format")
    p.set_defaults(func=cmd_convert)

    p = sub.add_parser("query", help="lineage, delegation, attribution or freshness of an element")
    p.add_argument("query", choices=sorted(_QUERIES))
    p.add_argument("id")
    p.add_argument("path")
    p.add_argument("--format", choices=formats, default="auto")
    p.add_argument("--report", choices=["text", "json"], default="text")
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("render", help="write a DOT graph or an HTML report")
    p.add_argument("path")
    p.add_argument("--out", required=True)
    p.add_argument("--layer", choices=["1", "2", "3"])
    p.add_argument("--attributes", action="store_true", help="show attributes in DOT labels")
    p.add_argument("--title")
    p.add_argument("--format", choices=formats, default="auto")
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("scaffold", help="build a skeleton document from a JSON outline")
    p.add_argument("outline")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_scaffold)

    p = sub.add_parser("stats", help="count elements, relations and layer sizes")
    p.add_argument("path")
    p.add_argument("--format", choices=formats, default="auto")
    p.add_argument("--report", choices=["text", "json"], default="text")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("explain", help="describe a validation rule")
    p.add_argument("rule")
    p.set_defaults(func=cmd_explain)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "profile", None) is not None and args.profile not in PROFILES:
        print(f"dashprov: unknown profile {args.profile!r} (choose from {', '.join(PROFILES)})",
              file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"dashprov: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InputError as exc:
        print(f"dashprov: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
