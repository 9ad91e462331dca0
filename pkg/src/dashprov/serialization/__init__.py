"""Reading and writing provenance documents (PROV-JSON and a Turtle profile)."""

from __future__ import annotations

from enum import Enum
from pathlib import Path

from ..model import ProvenanceDocument
from . import provjson, turtle


class FormatId(str, Enum):
    PROV_JSON = "provjson"
    TURTLE = "ttl"


_MODULES = {FormatId.PROV_JSON: provjson, FormatId.TURTLE: turtle}
EXTENSIONS = {".provjson": FormatId.PROV_JSON, ".json": FormatId.PROV_JSON, ".ttl": FormatId.TURTLE}


def format_for_path(path: str | Path) -> FormatId:
    suffix = Path(path).suffix.lower()
    try:
        return EXTENSIONS[suffix]
    except KeyError:
        raise ValueError(f"cannot infer format from extension {suffix!r} "
                         f"(known: {', '.join(EXTENSIONS)})") from None


def parse(data: bytes | str, format: FormatId | str) -> ProvenanceDocument:
    return _MODULES[FormatId(format)].parse(data)


def write(doc: ProvenanceDocument, format: FormatId | str) -> bytes:
    return _MODULES[FormatId(format)].write(doc)


def convert(data: bytes | str, source: FormatId | str, target: FormatId | str) -> bytes:
    return write(parse(data, source), target)


def load(path: str | Path, format: FormatId | str | None = None) -> ProvenanceDocument:
    path = Path(path)
    return parse(path.read_bytes(), format or format_for_path(path))


def dump(doc: ProvenanceDocument, path: str | Path, format: FormatId | str | None = None) -> None:
    path = Path(path)
    path.write_bytes(write(doc, format or format_for_path(path)))
