"""Constrained Turtle profile.

Accepted grammar::

    document   := (prefixDecl | block)*
    prefixDecl := '@prefix' PNAME_NS IRIREF '.'
    block      := subject predicateObjectList? '.'
    subject    := PNAME | '_:' label
    predicateObjectList := verb objectList (';' (verb objectList)?)*
    verb       := 'a' | PNAME
    objectList := object (',' object)*
    object     := PNAME | STRING ('^^' PNAME)?

``#`` starts a comment running to the end of the line. String literals are
single-line with the usual backslash escapes. A typed subject block (one
carrying ``a``) defines an element; an untyped block may only add relations.
Relations that carry a time or extra attributes are written as ``_:rN``
blocks using ``dash:relation``, ``dash:subject`` and ``dash:object``.
"""

from __future__ import annotations

import re
import unicodedata
from dataclasses import dataclass

from ..errors import ParseError, ProvenanceError
from ..model import (
    CATEGORY_TYPES,
    COLLECTION_TYPE,
    GENERIC_REFINEMENT,
    RELATION_TERMS,
    REFINEMENT_TYPES,
    TIME_TERMS,
    Category,
    DashAttributes,
    Element,
    ElementKind,
    ProvenanceDocument,
    QualifiedName,
    Relation,
    RelationKind,
    Timestamp,
    canonical_dash_term,
    is_valid_local,
)
from ._common import AttributeBag, decode

FORMAT = "ttl"

_CATEGORY_BY_TYPE = {v: k for k, v in CATEGORY_TYPES.items()}
_REFINEMENT_BY_TYPE = {v: k for k, v in REFINEMENT_TYPES.items()}
_PUNCT = ",;."
_LOCAL_STOP = set(" \t\r\n:;,.\"'<>#()[]{}\\^@|`")
_LOCAL_RUN = re.compile("[^" + re.escape("".join(sorted(_LOCAL_STOP))) + "]*")
_BLANK = re.compile(r"[ \t\r\n]*(?:#[^\n]*[ \t\r\n]*)*")
_WORD = re.compile(r"[\w-]*")
_IRI_RUN = re.compile(r"[^>\n]*")
_STRING_RUN = re.compile(r'[^"\\\n]+')
_ESCAPES = {"n": "\n", "t": "\t", "r": "\r", "b": "\b", "f": "\f", '"': '"', "'": "'", "\\": "\\"}
_TIME_PREDICATES = {QualifiedName("prov", t): t for t in TIME_TERMS}
_AT_TIME = QualifiedName("prov", "atTime")
_REL_KIND = QualifiedName("dash", "relation")
_REL_SUBJECT = QualifiedName("dash", "subject")
_REL_OBJECT = QualifiedName("dash", "object")


@dataclass
class Token:
    kind: str  # PREFIX IRI PNAME BNODE STRING DTYPE PUNCT A EOF
    value: object
    line: int
    col: int

    def describe(self) -> str:
        if self.kind == "EOF":
            return "end of input"
        if self.kind == "STRING":
            return "string literal"
        if self.kind == "PNAME":
            prefix, local = self.value
            return f"'{prefix}:{local or ''}'"
        if self.kind == "IRI":
            return f"<{self.value}>"
        return repr(self.value)


class Lexer:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0
        self.line = 1
        self.col = 1

    def error(self, expected, found, line=None, col=None):
        return ParseError(FORMAT, line or self.line, col or self.col, expected, found)

    def _peek(self, k=0):
        i = self.pos + k
        return self.text[i] if i < len(self.text) else ""

    def _advance(self, n=1):
        self._skip_to(self.pos + n)

    def _skip_to(self, end):
        newlines = self.text.count("\n", self.pos, end)
        if newlines:
            self.line += newlines
            self.col = end - self.text.rfind("\n", self.pos, end)
        else:
            self.col += end - self.pos
        self.pos = end

    def tokens(self):
        while True:
            tok = self._next()
            yield tok
            if tok.kind == "EOF":
                return

    def _next(self) -> Token:
        self._skip_to(_BLANK.match(self.text, self.pos).end())
        line, col = self.line, self.col
        c = self._peek()
        if not c:
            return Token("EOF", None, line, col)
        if c == "@":
            start = self.pos
            self._advance()
            while self._peek().isalpha():
                self._advance()
            word = self.text[start:self.pos]
            if word != "@prefix":
                raise self.error("'@prefix'", repr(word), line, col)
            return Token("PREFIX", word, line, col)
        if c == "<":
            self._advance()
            start = self.pos
            self._skip_to(_IRI_RUN.match(self.text, self.pos).end())
            if self._peek() != ">":
                raise self.error("'>' closing the IRI", self._found_here(), line, col)
            iri = self.text[start:self.pos]
            self._advance()
            return Token("IRI", iri, line, col)
        if c == '"':
            return Token("STRING", self._string(line, col), line, col)
        if c == "^":
            if self._peek(1) != "^":
                raise self.error("'^^'", repr(c))
            self._advance(2)
            return Token("DTYPE", "^^", line, col)
        if c in _PUNCT:
            self._advance()
            return Token("PUNCT", c, line, col)
        if c == "_" and self._peek(1) == ":":
            self._advance(2)
            start = self.pos
            self._skip_to(_WORD.match(self.text, self.pos).end())
            if start == self.pos:
                raise self.error("blank node label", self._found_here())
            return Token("BNODE", self.text[start:self.pos], line, col)
        return self._name(line, col)

    def _found_here(self):
        c = self._peek()
        if not c:
            return "end of input"
        if c == "\n":
            return "end of line"
        return repr(c)

    def _string(self, line, col) -> str:
        self._advance()
        out = []
        while True:
            run = _STRING_RUN.match(self.text, self.pos)
            if run:
                out.append(run.group())
                self._skip_to(run.end())
            c = self._peek()
            if not c or c == "\n":
                raise self.error("closing quote", "end of input" if not c else "end of line", line, col)
            if c == '"':
                self._advance()
                return "".join(out)
            if c == "\\":
                esc_line, esc_col = self.line, self.col
                nxt = self._peek(1)
                if nxt in _ESCAPES:
                    out.append(_ESCAPES[nxt])
                    self._advance(2)
                elif nxt in ("u", "U"):
                    width = 4 if nxt == "u" else 8
                    digits = self.text[self.pos + 2:self.pos + 2 + width]
                    try:
                        if len(digits) != width:
                            raise ValueError
                        out.append(chr(int(digits, 16)))
                    except ValueError:
                        raise self.error(f"{width} hex digits", repr(digits), esc_line, esc_col) from None
                    self._advance(2 + width)
                else:
                    raise self.error("escape sequence", repr("\\" + nxt), esc_line, esc_col)
                continue

    def _name(self, line, col) -> Token:
        start = self.pos
        c = self._peek()
        if c.isalpha() or c == "_":
            self._skip_to(_WORD.match(self.text, self.pos).end())
        prefix = self.text[start:self.pos]
        if self._peek() != ":":
            if prefix == "a":
                return Token("A", "a", line, col)
            raise self.error("prefixed name, literal or punctuation",
                             repr(prefix) if prefix else self._found_here(), line, col)
        self._advance()
        lstart = self.pos
        self._skip_to(_LOCAL_RUN.match(self.text, self.pos).end())
        local = self.text[lstart:self.pos]
        if local and not is_valid_local(local):
            raise self.error("valid local name", repr(local), line, col)
        return Token("PNAME", (prefix, local or None), line, col)


@dataclass
class Statement:
    verb: Token
    objects: list[tuple[Token, Token | None]]  # (object, datatype)


class Parser:
    def __init__(self, text: str):
        self.toks = list(Lexer(text).tokens())
        self.i = 0
        self.doc = ProvenanceDocument()

    # -- token helpers --

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def take(self) -> Token:
        t = self.toks[self.i]
        self.i += 1
        return t

    def fail(self, tok: Token, expected: str, found: str | None = None):
        return ParseError(FORMAT, tok.line, tok.col, expected, found or tok.describe())

    def expect(self, kind, value=None, what=None) -> Token:
        t = self.tok
        if t.kind != kind or (value is not None and t.value != value):
            raise self.fail(t, what or repr(value or kind))
        return self.take()

    def resolve(self, tok: Token) -> QualifiedName:
        prefix, local = tok.value
        if prefix not in self.doc.prefixes:
            raise self.fail(tok, "declared prefix", f"undeclared prefix {prefix!r}")
        if local is None:
            raise self.fail(tok, "local name after ':'")
        return QualifiedName(prefix, local)

    # -- grammar --

    def parse(self) -> ProvenanceDocument:
        while self.tok.kind != "EOF":
            if self.tok.kind == "PREFIX":
                self.prefix_decl()
            elif self.tok.kind in ("PNAME", "BNODE"):
                self.block()
            else:
                raise self.fail(self.tok, "'@prefix' or a subject")
        return self.doc

    def prefix_decl(self):
        self.take()
        name = self.expect("PNAME", what="prefix name ending in ':'")
        prefix, local = name.value
        if local is not None:
            raise self.fail(name, "prefix name ending in ':'")
        iri = self.expect("IRI", what="namespace IRI")
        try:
            self.doc.declare_prefix(prefix, iri.value)
        except (ProvenanceError, ValueError) as exc:
            raise self.fail(name, "compatible prefix declaration", str(exc)) from None
        self.expect("PUNCT", ".", "'.'")

    def block(self):
        subject = self.take()
        statements = []
        while not (self.tok.kind == "PUNCT" and self.tok.value == "."):
            if self.tok.kind not in ("A", "PNAME"):
                raise self.fail(self.tok, "predicate or '.'")
            verb = self.take()
            objects = [self.object()]
            while self.tok.kind == "PUNCT" and self.tok.value == ",":
                self.take()
                objects.append(self.object())
            statements.append(Statement(verb, objects))
            if self.tok.kind == "PUNCT" and self.tok.value == ";":
                while self.tok.kind == "PUNCT" and self.tok.value == ";":
                    self.take()
            elif not (self.tok.kind == "PUNCT" and self.tok.value == "."):
                raise self.fail(self.tok, "';' or '.'")
        self.take()
        if subject.kind == "BNODE":
            self.relation_block(subject, statements)
        else:
            self.subject_block(subject, statements)

    def object(self):
        t = self.tok
        if t.kind == "PNAME":
            return self.take(), None
        if t.kind == "STRING":
            self.take()
            dtype = None
            if self.tok.kind == "DTYPE":
                self.take()
                dtype = self.expect("PNAME", what="datatype name")
                self.resolve(dtype)
            return t, dtype
        raise self.fail(t, "prefixed name or string literal")

    # -- semantics --

    def literal(self, obj: tuple[Token, Token | None]) -> str:
        tok = obj[0]
        if tok.kind != "STRING":
            raise self.fail(tok, "string literal")
        return tok.value

    def reference(self, obj: tuple[Token, Token | None]) -> QualifiedName:
        tok = obj[0]
        if tok.kind != "PNAME":
            raise self.fail(tok, "prefixed name reference")
        return self.resolve(tok)

    def timestamp(self, obj) -> Timestamp:
        text = self.literal(obj)
        try:
            return Timestamp.parse(text)
        except ValueError:
            raise self.fail(obj[0], "ISO-8601 date-time with UTC offset", repr(text)) from None

    def subject_block(self, subject: Token, statements: list[Statement]):
        sid = self.resolve(subject)
        types = [s for s in statements if s.verb.kind == "A"]
        if not types:
            for st in statements:
                pred = self.resolve(st.verb)
                kind = RELATION_TERMS.get(pred.local) if pred.prefix == "prov" else None
                if kind is None:
                    raise self.fail(st.verb, "relation predicate (untyped block)")
                for obj in st.objects:
                    self.doc.add_relation(Relation(kind, sid, self.reference(obj)), strict=False)
            return

        kind = self.element_kind([o for s in types for o in s.objects])
        bag = AttributeBag()
        times: dict[str, Timestamp] = {}
        relations = []
        for st in statements:
            if st.verb.kind == "A":
                continue
            pred = self.resolve(st.verb)
            term = canonical_dash_term(pred.local) if pred.prefix == "dash" else None
            if term is not None:
                for obj in st.objects:
                    if not bag.set(term, self.literal(obj)):
                        raise self.fail(obj[0], f"a single dash:{term} value", "a second value")
            elif pred in _TIME_PREDICATES:
                name = _TIME_PREDICATES[pred]
                if len(st.objects) != 1 or name in times:
                    raise self.fail(st.objects[-1][0], f"a single prov:{name} value", "a second value")
                if TIME_TERMS[name] is not kind.category:
                    raise self.fail(st.verb, f"a predicate allowed on {kind.category.value}",
                                    f"prov:{name}")
                times[name] = self.timestamp(st.objects[0])
            elif pred.prefix == "prov" and pred.local in RELATION_TERMS:
                for obj in st.objects:
                    relations.append(Relation(RELATION_TERMS[pred.local], sid, self.reference(obj)))
            else:
                for obj in st.objects:
                    bag.extensions.append((pred, self.literal(obj)))
        try:
            element = Element(sid, kind, DashAttributes(**bag.kwargs()),
                              generated_at=times.get("generatedAtTime"),
                              started_at=times.get("startedAtTime"),
                              ended_at=times.get("endedAtTime"))
            self.doc.add_element(element, strict=False)
        except ProvenanceError as exc:
            raise self.fail(subject, "valid element definition", str(exc)) from None
        for r in relations:
            self.doc.add_relation(r, strict=False)

    def element_kind(self, objects) -> ElementKind:
        categories, refinements, collection = set(), set(), False
        for obj in objects:
            t = self.reference(obj)
            if t in _CATEGORY_BY_TYPE:
                categories.add(_CATEGORY_BY_TYPE[t])
            elif t in _REFINEMENT_BY_TYPE:
                refinements.add(_REFINEMENT_BY_TYPE[t])
            elif t == COLLECTION_TYPE:
                collection = True
            else:
                raise self.fail(obj[0], "a PROV or dash element type", str(t))
        tok = objects[0][0]
        if len(refinements) > 1:
            raise self.fail(tok, "at most one refinement type",
                            ", ".join(sorted(r.value for r in refinements)))
        categories |= {r.category for r in refinements}
        if not categories:
            categories = {Category.ENTITY} if collection else set()
        if len(categories) != 1:
            raise self.fail(tok, "exactly one of prov:Entity, prov:Agent, prov:Activity",
                            ", ".join(sorted(c.value for c in categories)) or "none")
        category = categories.pop()
        refinement = refinements.pop() if refinements else GENERIC_REFINEMENT[category]
        try:
            return ElementKind(category, refinement, collection)
        except ProvenanceError as exc:
            raise self.fail(tok, "consistent element types", str(exc)) from None

    def relation_block(self, subject: Token, statements: list[Statement]):
        fields: dict[QualifiedName, object] = {}
        attributes = []
        for st in statements:
            if st.verb.kind == "A":
                raise self.fail(st.verb, "relation field")
            pred = self.resolve(st.verb)
            if pred in (_REL_KIND, _REL_SUBJECT, _REL_OBJECT, _AT_TIME):
                if len(st.objects) != 1 or pred in fields:
                    raise self.fail(st.verb, f"a single {pred} value", "several values")
                obj = st.objects[0]
                fields[pred] = self.timestamp(obj) if pred == _AT_TIME else (self.reference(obj), obj[0])
            else:
                attributes += [(pred, self.literal(obj)) for obj in st.objects]
        for need in (_REL_KIND, _REL_SUBJECT, _REL_OBJECT):
            if need not in fields:
                raise self.fail(subject, f"{need} in relation block")
        kind_name, kind_tok = fields[_REL_KIND]
        if kind_name.prefix != "prov" or kind_name.local not in RELATION_TERMS:
            raise self.fail(kind_tok, "a prov relation term", str(kind_name))
        try:
            relation = Relation(RELATION_TERMS[kind_name.local], fields[_REL_SUBJECT][0],
                                fields[_REL_OBJECT][0], fields.get(_AT_TIME), tuple(attributes))
            self.doc.add_relation(relation, strict=False)
        except ProvenanceError as exc:
            raise self.fail(subject, "valid relation", str(exc)) from None


def parse(data: bytes | str) -> ProvenanceDocument:
    return Parser(decode(data, FORMAT)).parse()


# -- writer --

def quote(value: str) -> str:
    out = ['"']
    for ch in value:
        if ch == '"':
            out.append('\\"')
        elif ch == "\\":
            out.append("\\\\")
        elif ch == "\n":
            out.append("\\n")
        elif ch == "\r":
            out.append("\\r")
        elif ch == "\t":
            out.append("\\t")
        elif unicodedata.category(ch) == "Cc":
            out.append(f"\\u{ord(ch):04X}")
        else:
            out.append(ch)
    out.append('"')
    return "".join(out)


def _time(ts: Timestamp) -> str:
    return quote(ts.isoformat()) + "^^xsd:dateTime"


def _run_lines(pairs: list[tuple[str, str]]) -> list[str]:
    """Collapse consecutive pairs sharing a predicate into comma lists."""
    lines: list[tuple[str, list[str]]] = []
    for pred, obj in pairs:
        if lines and lines[-1][0] == pred:
            lines[-1][1].append(obj)
        else:
            lines.append((pred, [obj]))
    return [f"{p} {', '.join(objs)}" for p, objs in lines]


def _block(subject: str, lines: list[str]) -> str:
    if not lines:
        return f"{subject} ."
    head, *rest = lines
    if head.startswith("a "):
        return " ;\n".join([f"{subject} {head}"] + ["    " + line for line in rest]) + " ."
    return subject + "\n" + " ;\n".join("    " + line for line in lines) + " ."


def write(doc: ProvenanceDocument) -> bytes:
    parts = []
    prefix_lines = [f"@prefix {p}: <{iri}> ." for p, iri in sorted(doc.prefixes.items())]
    parts.append("\n".join(prefix_lines))

    rich_groups = {(r.subject, r.kind) for r in doc.relations if not r.is_plain}
    inline: dict[QualifiedName, list[Relation]] = {}
    qualified: list[Relation] = []
    for r in doc.relations:
        if (r.subject, r.kind) in rich_groups:
            qualified.append(r)
        else:
            inline.setdefault(r.subject, []).append(r)

    for category in (Category.ENTITY, Category.ACTIVITY, Category.AGENT):
        for el in doc.of_category(category):
            lines = ["a " + ", ".join(map(str, el.kind.type_names()))]
            pairs = [(f"dash:{term}", quote(v)) for term, v in el.dash.terms()]
            for name, value in (("generatedAtTime", el.generated_at),
                                ("startedAtTime", el.started_at), ("endedAtTime", el.ended_at)):
                if value is not None:
                    pairs.append((f"prov:{name}", _time(value)))
            pairs += [(str(k), quote(v)) for k, v in el.dash.extensions]
            pairs += [(str(r.kind.term), str(r.object)) for r in inline.pop(el.id, [])]
            parts.append(_block(str(el.id), lines + _run_lines(pairs)))

    # relations whose subject is not a defined element keep an untyped block
    for subject, rels in inline.items():
        parts.append(_block(str(subject), _run_lines([(str(r.kind.term), str(r.object)) for r in rels])))

    # numbered among themselves so that a reparsed document writes identically
    for n, r in enumerate(qualified, 1):
        lines = [f"dash:relation {r.kind.term}", f"dash:subject {r.subject}", f"dash:object {r.object}"]
        if r.at_time is not None:
            lines.append(f"prov:atTime {_time(r.at_time)}")
        lines += [f"{k} {quote(v)}" for k, v in r.attributes]
        parts.append(_block(f"_:r{n}", lines))
    return ("\n\n".join(parts) + "\n").encode("utf-8")
