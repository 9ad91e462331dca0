"""Exception hierarchy shared by every dashprov module."""

from __future__ import annotations


class ProvenanceError(Exception):
    """Base class for all dashprov errors."""


class PrefixConflict(ProvenanceError):
    pass


class UndeclaredPrefix(ProvenanceError):
    pass


class DuplicateIdentifier(ProvenanceError):
    pass


class KindMismatch(ProvenanceError, ValueError):
    """Element kind, timestamps or attributes are inconsistent."""


class DanglingReference(ProvenanceError):
    pass


class SignatureViolation(ProvenanceError):
    pass


class UnknownIdentifier(ProvenanceError):
    pass


class NotACollection(ProvenanceError):
    pass


class LayeringError(ProvenanceError):
    """Base for failures of the three-layer decomposition."""


class NoRootDashboard(LayeringError):
    pass


class MultipleRootDashboards(LayeringError):
    pass


class MembershipCycle(LayeringError):
    pass


class DepthExceeded(LayeringError):
    pass


class UnlayeredTarget(LayeringError):
    pass


class UnknownProfile(ProvenanceError):
    pass


class UnknownRule(ProvenanceError):
    pass


class CyclicDerivation(ProvenanceError):
    pass


class CyclicDelegation(ProvenanceError):
    pass


class ParseError(ProvenanceError):
    """Syntax or structure error in a serialized document.

    ``line`` and ``column`` are 1-based and always point inside the input.
    """

    def __init__(self, format: str, line: int, column: int, expected: str, found: str):
        self.format = format
        self.line = line
        self.column = column
        self.expected = expected
        self.found = found
        super().__init__(f"{format}:{line}:{column}: expected {expected}, found {found}")
