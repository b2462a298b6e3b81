"""Exception hierarchy shared by all tantra modules.

Every failure raised by the library derives from :class:`TantraError`, so
callers (notably the CLI) can separate domain failures from genuine bugs.
Validation findings are *not* exceptions; they are reported as data by
:mod:`tantra.validation`.
"""

from __future__ import annotations


class TantraError(Exception):
    """Base class for all domain errors."""


# --- element construction / reification ---

class EmptyName(TantraError):
    """Element name is empty or whitespace-only."""


class SkippedLevel(TantraError):
    """Promotion target is not the immediate next reification level."""


class IncompletePayload(TantraError):
    """Promotion payload lacks a field required by the target level."""


class UnknownSubject(TantraError):
    """Measure subject id does not resolve to a stored element."""


class NonFiniteValue(TantraError):
    """Measure value is NaN or infinite."""


# --- graph store ---

class DuplicateId(TantraError):
    """Id already present in the store."""


class DanglingEndpoint(TantraError):
    """Relationship endpoint id does not resolve."""


class RelatorNotARelator(TantraError):
    """Mediating element exists but is not of the Relators aspect."""


class UnknownId(TantraError):
    """Id does not resolve to a stored record."""


class IoFailure(TantraError):
    """Filesystem read or write failed."""


class MalformedRecord(TantraError):
    """Persistence file contains an unreadable record."""

    def __init__(self, line: int, reason: str):
        super().__init__(f"line {line}: {reason}")
        self.line = line
        self.reason = reason


# --- metrics ---

class EmptyAspect(TantraError):
    """No element of the requested aspect exists."""


class EmptyGroup(TantraError):
    """A group selector resolved to zero elements."""


class UnknownKind(TantraError):
    """Metrics configuration carries no rule for the requested kind."""


class UnresolvedBinding(TantraError):
    """Goal metric binding matched no measure."""


class UnknownEvent(TantraError):
    """Event id does not resolve to a When-aspect element."""


# --- theory of change ---

class MissingMarkers(TantraError):
    """Intervention record declares no change markers."""


class UnknownActor(TantraError):
    """Intervention actor id does not resolve."""


class UnknownIntervention(TantraError):
    """No intervention is stored under the given id."""


class MarkerUnmeasured(TantraError):
    """A change marker has no measure at one of the compared events."""

    def __init__(self, metric_name: str, event: str):
        super().__init__(f"marker {metric_name!r} has no measure at event {event}")
        self.metric_name = metric_name
        self.event = event


# --- query language ---

class QuerySyntaxError(TantraError):
    """Query text failed to parse."""

    def __init__(self, line: int, column: int, expected: tuple[str, ...], found: str):
        exp = " or ".join(expected)
        super().__init__(f"line {line}, column {column}: expected {exp}, found {found}")
        self.line = line
        self.column = column
        self.expected = expected
        self.found = found


class UnknownLabel(TantraError):
    """Node pattern label is not one of the nine aspects."""


class UnknownVariable(TantraError):
    """WHERE or RETURN references a variable absent from the pattern."""


# --- ingestion ---

class BadMapping(TantraError):
    """Ingest mapping is inconsistent with itself or the source header."""
