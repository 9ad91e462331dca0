from __future__ import annotations

from dataclasses import dataclass, field

from ..model import (
    DASH_TERMS,
    MULTI_VALUED_TERMS,
    QualifiedName,
)


def decode(data: bytes | str, fmt: str) -> str:
    from ..errors import ParseError

    if isinstance(data, str):
        text = data
    else:
        try:
            text = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            head = data[: exc.start].decode("utf-8", "replace")
            line, col = position_of(head, len(head))
            raise ParseError(fmt, line, col, "UTF-8 text", f"byte 0x{data[exc.start]:02x}") from None
    return text[1:] if text.startswith("\ufeff") else text


def position_of(text: str, offset: int) -> tuple[int, int]:
    """1-based (line, column) of character ``offset`` in ``text``."""
    line = text.count("\n", 0, offset) + 1
    col = offset - (text.rfind("\n", 0, offset) + 1) + 1
    return line, col


@dataclass
class AttributeBag:
    """Accumulates dash attribute values while a parser walks one element."""

    values: dict[str, object] = field(default_factory=dict)
    extensions: list[tuple[QualifiedName, str]] = field(default_factory=list)

    def set(self, term: str, value: str) -> bool:
        """Store a dash term value; False if a single-valued term is already set."""
        attr = DASH_TERMS[term]
        if term in MULTI_VALUED_TERMS:
            self.values.setdefault(attr, []).append(value)
            return True
        if attr in self.values:
            return False
        self.values[attr] = value
        return True

    def kwargs(self) -> dict:
        return {**self.values, "extensions": self.extensions}
