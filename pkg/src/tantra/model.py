"""Core domain types of the tantra matrix.

The model is a nine-by-five grid: every element is classified under exactly
one of nine aspects (Who, Where, What, When, How, Why, Relationships,
Relators, Separations) and sits at exactly one of five reification levels
(Contextual < Conceptual < Logical < Physical < Instantiated). Moving an
element up one level is a *promotion* and each level demands its own payload:

    Contextual    name + scope
    Conceptual    + definition
    Logical       + at least one logical attribute (mappings to other aspects)
    Physical      + schema configuration (labels and property keys)
    Instantiated  + the element id is final and caller-visible

Quantities never live on ordinary elements: any numeric observation is a
:class:`Measure`, a Why-aspect record pointing at its subject and optionally
at a When-aspect event. Relationships are typed directed edges that may be
*mediated* by a Relators-aspect element (the institution that makes the
relationship possible, e.g. a mandi mediating a farmer-trader sale).

All types here are immutable values; construction and promotion return new
objects. Mutation of a graph happens only through :mod:`tantra.store`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from datetime import date
from enum import Enum

from .errors import EmptyName, IncompletePayload, SkippedLevel

# Property values allowed on elements and relationships.
Literal = str | float | bool | date

ElementId = str


class Aspect(Enum):
    """The nine interrogative columns of the matrix."""

    WHO = "Who"
    WHERE = "Where"
    WHAT = "What"
    WHEN = "When"
    HOW = "How"
    WHY = "Why"
    RELATIONSHIPS = "Relationships"
    RELATORS = "Relators"
    SEPARATIONS = "Separations"

    @property
    def id_prefix(self) -> str:
        return _ASPECT_PREFIX[self]

    @classmethod
    def from_label(cls, label: str) -> "Aspect":
        return cls(label)


_ASPECT_PREFIX = {
    Aspect.WHO: "WHO",
    Aspect.WHERE: "WHR",
    Aspect.WHAT: "WHT",
    Aspect.WHEN: "WHN",
    Aspect.HOW: "HOW",
    Aspect.WHY: "WHY",
    Aspect.RELATIONSHIPS: "RLS",
    Aspect.RELATORS: "RTR",
    Aspect.SEPARATIONS: "SEP",
}

# Ids for records that are not aspect elements.
RELATIONSHIP_PREFIX = "REL"
MEASURE_PREFIX = "MSR"


class Perspective(Enum):
    """The five reification levels, strictly ordered."""

    CONTEXTUAL = "Contextual"
    CONCEPTUAL = "Conceptual"
    LOGICAL = "Logical"
    PHYSICAL = "Physical"
    INSTANTIATED = "Instantiated"

    @property
    def rank(self) -> int:
        return _PERSPECTIVE_RANK[self]

    def successor(self) -> "Perspective | None":
        order = list(Perspective)
        return order[self.rank + 1] if self.rank + 1 < len(order) else None

    def __lt__(self, other: "Perspective") -> bool:
        return self.rank < other.rank

    def __le__(self, other: "Perspective") -> bool:
        return self.rank <= other.rank

    def __gt__(self, other: "Perspective") -> bool:
        return self.rank > other.rank

    def __ge__(self, other: "Perspective") -> bool:
        return self.rank >= other.rank


_PERSPECTIVE_RANK = {p: i for i, p in enumerate(Perspective)}


class SeparationKind(Enum):
    """The seven barriers that can keep two market parties apart."""

    INFORMATIONAL = "Informational"
    SPATIAL = "Spatial"
    TEMPORAL = "Temporal"
    FINANCIAL = "Financial"
    CAPABILITY = "Capability"
    INTELLECTUAL = "Intellectual"
    SOCIO_POLITICAL = "SocioPolitical"


class SubEcosystem(Enum):
    """The seven constituent ecosystems of the agricultural ecosystem."""

    BIOLOGICAL_NATURAL_RESOURCE = "BiologicalNaturalResource"
    SOCIAL = "Social"
    ECONOMIC = "Economic"
    BUSINESS = "Business"
    WELFARE = "Welfare"
    INDUSTRIAL = "Industrial"
    INFORMATION = "Information"


def canonical_name(name: str) -> str:
    """Trim and collapse internal whitespace, preserving case."""
    return " ".join(name.split())


def name_key(name: str) -> str:
    """Case-insensitive duplicate-detection key for canonical names."""
    return canonical_name(name).casefold()


def is_numeric_literal(value) -> bool:
    """True for int/float property values; bool is a flag, not a quantity."""
    return isinstance(value, (int, float)) and not isinstance(value, bool)


@dataclass(frozen=True)
class SchemaConfig:
    """Physical-level configuration: node labels and declared property keys."""

    labels: frozenset[str] = frozenset()
    property_keys: frozenset[str] = frozenset()

    @staticmethod
    def of(labels=(), property_keys=()) -> "SchemaConfig":
        return SchemaConfig(frozenset(labels), frozenset(property_keys))


@dataclass(frozen=True, eq=True)
class Element:
    """A node of the matrix: one aspect, one reification level, its payload.

    ``logical_attrs`` maps attribute names to either another element's id or
    a literal; it is what ties an element to the rest of the grid.
    ``properties`` holds scalar literals only. Numeric values belong on
    measures; the validator flags them on any non-Why element.
    """

    id: ElementId
    aspect: Aspect
    perspective: Perspective
    name: str
    scope: str
    definition: str | None = None
    logical_attrs: dict[str, Literal | ElementId] = field(default_factory=dict, hash=False)
    schema_config: SchemaConfig | None = None
    sub_ecosystem: SubEcosystem | None = None
    properties: dict[str, Literal] = field(default_factory=dict, hash=False)

    @property
    def dedup_key(self) -> str:
        return name_key(self.name)


@dataclass(frozen=True, eq=True)
class Relationship:
    """A typed directed edge, optionally mediated by a Relators element."""

    id: ElementId
    rel_type: str
    source: ElementId
    target: ElementId
    relator: ElementId | None = None
    properties: dict[str, Literal] = field(default_factory=dict, hash=False)


@dataclass(frozen=True, eq=True)
class Measure:
    """A quantitative observation, always housed under the Why aspect."""

    id: ElementId
    metric_name: str
    value: float
    unit: str
    subject: ElementId
    at_event: ElementId | None = None

    @property
    def aspect(self) -> Aspect:
        return Aspect.WHY


class IdIssuer:
    """Issues ids of the form ``<prefix>-<zero-padded counter>``.

    Counters never rewind, so an issuer that survives save/load never
    repeats an id even for records deleted before the save.
    """

    WIDTH = 6

    def __init__(self, counters: dict[str, int] | None = None):
        self._counters: dict[str, int] = dict(counters or {})

    def next(self, prefix: str) -> ElementId:
        n = self._counters.get(prefix, 0)
        self._counters[prefix] = n + 1
        return f"{prefix}-{n:0{self.WIDTH}d}"

    def counters(self) -> dict[str, int]:
        return dict(self._counters)

    def __eq__(self, other) -> bool:
        return isinstance(other, IdIssuer) and self._counters == other._counters


def new_element(issuer: IdIssuer, aspect: Aspect, name: str, scope: str) -> Element:
    """Create a Contextual element with a freshly issued id.

    The name is canonicalized (trimmed, internal whitespace collapsed).
    Raises :class:`EmptyName` if nothing remains after canonicalization.
    """
    cname = canonical_name(name)
    if not cname:
        raise EmptyName("element name must be non-empty")
    return Element(
        id=issuer.next(aspect.id_prefix),
        aspect=aspect,
        perspective=Perspective.CONTEXTUAL,
        name=cname,
        scope=scope,
    )


def promote(
    e: Element,
    to: Perspective,
    *,
    definition: str | None = None,
    logical_attrs: dict[str, Literal | ElementId] | None = None,
    schema_config: SchemaConfig | None = None,
    properties: dict[str, Literal] | None = None,
) -> Element:
    """Raise an element exactly one reification level, merging new payload.

    Only the payload demanded by the target level is required; extra
    ``properties`` may ride along at any step. Lower-level payloads are
    always preserved. Raises :class:`SkippedLevel` when ``to`` is not the
    immediate successor and :class:`IncompletePayload` when the target
    level's requirement is missing.
    """
    if e.perspective.successor() is not to:
        raise SkippedLevel(
            f"cannot promote {e.id} from {e.perspective.value} to {to.value}"
        )

    merged_props = dict(e.properties)
    if properties:
        merged_props.update(properties)

    new_definition = e.definition
    new_attrs = dict(e.logical_attrs)
    new_schema = e.schema_config

    if to is Perspective.CONCEPTUAL:
        if not (definition and definition.strip()):
            raise IncompletePayload(f"{e.id}: Conceptual level requires a definition")
        new_definition = definition
    elif to is Perspective.LOGICAL:
        if definition:
            new_definition = definition
        if not logical_attrs:
            raise IncompletePayload(f"{e.id}: Logical level requires logical_attrs")
        new_attrs.update(logical_attrs)
    elif to is Perspective.PHYSICAL:
        if logical_attrs:
            new_attrs.update(logical_attrs)
        if schema_config is None:
            raise IncompletePayload(f"{e.id}: Physical level requires schema_config")
        new_schema = schema_config
    elif to is Perspective.INSTANTIATED:
        # Id was issued at creation; instantiation makes it final. No new
        # payload is required, but late property additions are accepted.
        if schema_config is not None:
            new_schema = schema_config

    return replace(
        e,
        perspective=to,
        definition=new_definition,
        logical_attrs=new_attrs,
        schema_config=new_schema,
        properties=merged_props,
    )


def payload_gaps(e: Element) -> list[str]:
    """Names of payload fields missing for the element's current level.

    Empty list means the element satisfies the completeness rule. Used by
    the validator; promotion uses its own per-step checks.
    """
    gaps: list[str] = []
    if not canonical_name(e.name):
        gaps.append("name")
    if e.perspective >= Perspective.CONCEPTUAL and not (e.definition and e.definition.strip()):
        gaps.append("definition")
    if e.perspective >= Perspective.LOGICAL and not e.logical_attrs:
        gaps.append("logical_attrs")
    if e.perspective >= Perspective.PHYSICAL and e.schema_config is None:
        gaps.append("schema_config")
    return gaps


def check_finite(value: float) -> float:
    """Coerce a measure value to float, rejecting NaN and infinities."""
    from .errors import NonFiniteValue

    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise NonFiniteValue(f"measure value must be a finite number, got {value!r}")
    v = float(value)
    if not math.isfinite(v):
        raise NonFiniteValue(f"measure value must be finite, got {value!r}")
    return v
