"""In-memory property graph with secondary indices and durable persistence.

The store keeps three primary maps (elements, relationships, measures) plus
indices by aspect, by perspective, by canonical name, and adjacency in both
directions. Every mutating operation leaves the indices exactly consistent
with the primary maps; tests verify this by rebuilding them from scratch.

Persistence is line-delimited JSON: a header line followed by one record per
line, elements first, then relationships, then measures, each group sorted
by id. The byte stream is canonical, so a SHA-256 over it serves as a
structural hash for fixtures.

Concurrency contract: single writer, multiple readers. Mutations require
exclusive access; pure reads may run concurrently between mutations. The
store spawns no threads of its own and may be handed between threads.
"""

from __future__ import annotations

import hashlib
import io
import json
from datetime import date

from .errors import (
    DanglingEndpoint,
    DuplicateId,
    IoFailure,
    MalformedRecord,
    RelatorNotARelator,
    UnknownEvent,
    UnknownId,
    UnknownSubject,
)
from .model import (
    Aspect,
    Element,
    ElementId,
    IdIssuer,
    Literal,
    Measure,
    MEASURE_PREFIX,
    Perspective,
    Relationship,
    RELATIONSHIP_PREFIX,
    SchemaConfig,
    SubEcosystem,
    canonical_name,
    check_finite,
    name_key,
    new_element,
)

FORMAT_NAME = "tantra-graph"
FORMAT_VERSION = 1


class TantraGraph:
    """Property graph holding elements, relationships, and measures."""

    def __init__(self, issuer: IdIssuer | None = None):
        self.ids = issuer or IdIssuer()
        self.elements: dict[ElementId, Element] = {}
        self.relationships: dict[ElementId, Relationship] = {}
        self.measures: dict[ElementId, Measure] = {}
        self.index_by_aspect: dict[Aspect, set[ElementId]] = {a: set() for a in Aspect}
        self.index_by_perspective: dict[Perspective, set[ElementId]] = {
            p: set() for p in Perspective
        }
        self.index_by_name: dict[str, set[ElementId]] = {}
        self.adjacency_out: dict[ElementId, set[ElementId]] = {}
        self.adjacency_in: dict[ElementId, set[ElementId]] = {}

    # --- basic queries ---

    def __len__(self) -> int:
        return len(self.elements)

    def __contains__(self, eid: ElementId) -> bool:
        return eid in self.elements or eid in self.relationships or eid in self.measures

    def __eq__(self, other) -> bool:
        if not isinstance(other, TantraGraph):
            return NotImplemented
        return (
            self.elements == other.elements
            and self.relationships == other.relationships
            and self.measures == other.measures
            and self.ids == other.ids
        )

    def element(self, eid: ElementId) -> Element:
        try:
            return self.elements[eid]
        except KeyError:
            raise UnknownId(f"no element {eid}") from None

    def elements_of_aspect(self, aspect: Aspect) -> list[Element]:
        return [self.elements[i] for i in sorted(self.index_by_aspect[aspect])]

    def find_by_name(self, name: str, aspect: Aspect | None = None) -> list[Element]:
        """Elements whose canonical name matches ``name`` case-insensitively."""
        ids = self.index_by_name.get(name_key(name), set())
        out = [self.elements[i] for i in sorted(ids)]
        if aspect is not None:
            out = [e for e in out if e.aspect is aspect]
        return out

    def relationships_from(self, eid: ElementId) -> list[Relationship]:
        return [self.relationships[r] for r in sorted(self.adjacency_out.get(eid, ()))]

    def relationships_to(self, eid: ElementId) -> list[Relationship]:
        return [self.relationships[r] for r in sorted(self.adjacency_in.get(eid, ()))]

    def measures_of(self, subject: ElementId) -> list[Measure]:
        return [m for _, m in sorted(self.measures.items()) if m.subject == subject]

    # --- mutation ---

    def insert_element(self, e: Element) -> ElementId:
        if e.id in self:
            raise DuplicateId(f"id {e.id} already in store")
        self.elements[e.id] = e
        self.index_by_aspect[e.aspect].add(e.id)
        self.index_by_perspective[e.perspective].add(e.id)
        self.index_by_name.setdefault(e.dedup_key, set()).add(e.id)
        return e.id

    def replace_element(self, e: Element) -> None:
        """Swap in a new value for an existing element id (e.g. after promote)."""
        old = self.element(e.id)
        if old.aspect is not e.aspect:
            raise ValueError(f"aspect of {e.id} is immutable")
        self._unindex_element(old)
        self.elements[e.id] = e
        self.index_by_aspect[e.aspect].add(e.id)
        self.index_by_perspective[e.perspective].add(e.id)
        self.index_by_name.setdefault(e.dedup_key, set()).add(e.id)

    def create_element(self, aspect: Aspect, name: str, scope: str) -> Element:
        """Issue, create, and insert a Contextual element in one step."""
        e = new_element(self.ids, aspect, name, scope)
        self.insert_element(e)
        return e

    def insert_relationship(self, r: Relationship) -> ElementId:
        if r.id in self:
            raise DuplicateId(f"id {r.id} already in store")
        if r.source not in self.elements:
            raise DanglingEndpoint(f"relationship {r.id}: unknown source {r.source}")
        if r.target not in self.elements:
            raise DanglingEndpoint(f"relationship {r.id}: unknown target {r.target}")
        if r.relator is not None:
            relator = self.elements.get(r.relator)
            if relator is None:
                raise DanglingEndpoint(f"relationship {r.id}: unknown relator {r.relator}")
            if relator.aspect is not Aspect.RELATORS:
                raise RelatorNotARelator(
                    f"relationship {r.id}: {r.relator} has aspect "
                    f"{relator.aspect.value}, not Relators"
                )
        self.relationships[r.id] = r
        self.adjacency_out.setdefault(r.source, set()).add(r.id)
        self.adjacency_in.setdefault(r.target, set()).add(r.id)
        return r.id

    def connect(
        self,
        rel_type: str,
        source: ElementId,
        target: ElementId,
        relator: ElementId | None = None,
        properties: dict[str, Literal] | None = None,
    ) -> Relationship:
        """Issue an edge id and insert the relationship in one step."""
        r = Relationship(
            id=self.ids.next(RELATIONSHIP_PREFIX),
            rel_type=rel_type,
            source=source,
            target=target,
            relator=relator,
            properties=dict(properties or {}),
        )
        self.insert_relationship(r)
        return r

    def insert_measure(self, m: Measure) -> ElementId:
        if m.id in self:
            raise DuplicateId(f"id {m.id} already in store")
        if m.subject not in self.elements:
            raise UnknownSubject(f"measure {m.id}: unknown subject {m.subject}")
        if m.at_event is not None:
            self._require_event(m.at_event)
        self.measures[m.id] = m
        return m.id

    def attach_measure(
        self,
        subject: ElementId,
        metric_name: str,
        value: float,
        unit: str,
        at_event: ElementId | None = None,
    ) -> Measure:
        """Record a quantitative observation against an existing element."""
        if subject not in self.elements:
            raise UnknownSubject(f"unknown subject {subject}")
        if at_event is not None:
            self._require_event(at_event)
        m = Measure(
            id=self.ids.next(MEASURE_PREFIX),
            metric_name=canonical_name(metric_name),
            value=check_finite(value),
            unit=unit,
            subject=subject,
            at_event=at_event,
        )
        self.measures[m.id] = m
        return m

    def _require_event(self, eid: ElementId) -> Element:
        ev = self.elements.get(eid)
        if ev is None or ev.aspect is not Aspect.WHEN:
            raise UnknownEvent(f"{eid} is not a When-aspect element")
        return ev

    def remove_relationship(self, rid: ElementId) -> None:
        r = self.relationships.pop(rid, None)
        if r is None:
            raise UnknownId(f"no relationship {rid}")
        self._unindex_relationship(r)

    def remove_element(self, eid: ElementId) -> int:
        """Remove an element and everything that references it.

        Cascades to relationships touching the element as source, target, or
        relator, and to measures whose subject or timestamp event it is, so
        no dangling reference can survive. Returns the number of records
        removed, the element itself included.
        """
        e = self.elements.get(eid)
        if e is None:
            raise UnknownId(f"no element {eid}")
        removed = 1
        doomed_rels = [
            r.id
            for r in self.relationships.values()
            if eid in (r.source, r.target, r.relator)
        ]
        for rid in doomed_rels:
            self._unindex_relationship(self.relationships.pop(rid))
            removed += 1
        doomed_measures = [
            m.id for m in self.measures.values() if eid in (m.subject, m.at_event)
        ]
        for mid in doomed_measures:
            del self.measures[mid]
            removed += 1
        del self.elements[eid]
        self._unindex_element(e)
        self.adjacency_out.pop(eid, None)
        self.adjacency_in.pop(eid, None)
        return removed

    def _unindex_element(self, e: Element) -> None:
        self.index_by_aspect[e.aspect].discard(e.id)
        self.index_by_perspective[e.perspective].discard(e.id)
        bucket = self.index_by_name.get(e.dedup_key)
        if bucket is not None:
            bucket.discard(e.id)
            if not bucket:
                del self.index_by_name[e.dedup_key]

    def _unindex_relationship(self, r: Relationship) -> None:
        for adj, end in ((self.adjacency_out, r.source), (self.adjacency_in, r.target)):
            bucket = adj.get(end)
            if bucket is not None:
                bucket.discard(r.id)
                if not bucket:
                    del adj[end]

    # --- persistence ---

    def save(self, path) -> int:
        """Write the canonical JSON-lines form; returns bytes written."""
        data = self.to_bytes()
        try:
            with open(path, "wb") as fh:
                fh.write(data)
        except OSError as exc:
            raise IoFailure(f"cannot write {path}: {exc}") from exc
        return len(data)

    def to_bytes(self) -> bytes:
        buf = io.StringIO()
        header = {
            "format": FORMAT_NAME,
            "version": FORMAT_VERSION,
            "counters": self.ids.counters(),
        }
        buf.write(_dump(header))
        buf.write("\n")
        for _, e in sorted(self.elements.items()):
            buf.write(_dump(_element_record(e)))
            buf.write("\n")
        for _, r in sorted(self.relationships.items()):
            buf.write(_dump(_relationship_record(r)))
            buf.write("\n")
        for _, m in sorted(self.measures.items()):
            buf.write(_dump(_measure_record(m)))
            buf.write("\n")
        return buf.getvalue().encode("utf-8")

    def structural_hash(self) -> str:
        """SHA-256 hex digest over the canonical save bytes."""
        return hashlib.sha256(self.to_bytes()).hexdigest()


def save(g: TantraGraph, path) -> int:
    return g.save(path)


def load(path) -> TantraGraph:
    """Read a graph saved by :func:`save`; inverse up to structural equality."""
    try:
        with open(path, "rb") as fh:
            data = fh.read()
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc
    return from_bytes(data)


def from_bytes(data: bytes) -> TantraGraph:
    lines = data.decode("utf-8").split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise MalformedRecord(1, "empty file, expected header")
    header = _parse_line(lines[0], 1)
    if header.get("format") != FORMAT_NAME:
        raise MalformedRecord(1, f"unexpected format {header.get('format')!r}")
    if header.get("version") != FORMAT_VERSION:
        raise MalformedRecord(1, f"unsupported version {header.get('version')!r}")
    counters = header.get("counters", {})
    if not isinstance(counters, dict):
        raise MalformedRecord(1, "header counters must be an object")
    g = TantraGraph(IdIssuer({str(k): int(v) for k, v in counters.items()}))
    for n, line in enumerate(lines[1:], start=2):
        rec = _parse_line(line, n)
        kind = rec.get("rec")
        try:
            if kind == "element":
                g.insert_element(_element_from(rec))
            elif kind == "relationship":
                g.insert_relationship(_relationship_from(rec))
            elif kind == "measure":
                g.insert_measure(_measure_from(rec))
            else:
                raise MalformedRecord(n, f"unknown record kind {kind!r}")
        except MalformedRecord:
            raise
        except (KeyError, TypeError, ValueError) as exc:
            raise MalformedRecord(n, f"bad {kind} record: {exc}") from exc
    return g


# --- record codecs ---


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, ensure_ascii=False, separators=(",", ":"))


def _parse_line(line: str, n: int) -> dict:
    if not line.strip():
        raise MalformedRecord(n, "blank line")
    try:
        rec = json.loads(line)
    except json.JSONDecodeError as exc:
        raise MalformedRecord(n, f"invalid JSON: {exc.msg}") from exc
    if not isinstance(rec, dict):
        raise MalformedRecord(n, "record is not a JSON object")
    return rec


def _encode_literal(v: Literal | ElementId):
    if isinstance(v, date):
        return {"$date": v.isoformat()}
    return v


def _decode_literal(v):
    if isinstance(v, dict):
        if set(v) != {"$date"}:
            raise ValueError(f"unexpected object literal {v!r}")
        return date.fromisoformat(v["$date"])
    if isinstance(v, int) and not isinstance(v, bool):
        return float(v)
    return v


def _encode_map(m: dict) -> dict:
    return {k: _encode_literal(v) for k, v in m.items()}


def _decode_map(m: dict) -> dict:
    return {k: _decode_literal(v) for k, v in m.items()}


def _element_record(e: Element) -> dict:
    return {
        "rec": "element",
        "id": e.id,
        "aspect": e.aspect.value,
        "perspective": e.perspective.value,
        "name": e.name,
        "scope": e.scope,
        "definition": e.definition,
        "logical_attrs": _encode_map(e.logical_attrs),
        "schema_config": None
        if e.schema_config is None
        else {
            "labels": sorted(e.schema_config.labels),
            "property_keys": sorted(e.schema_config.property_keys),
        },
        "sub_ecosystem": None if e.sub_ecosystem is None else e.sub_ecosystem.value,
        "properties": _encode_map(e.properties),
    }


def _element_from(rec: dict) -> Element:
    sc = rec["schema_config"]
    return Element(
        id=rec["id"],
        aspect=Aspect(rec["aspect"]),
        perspective=Perspective(rec["perspective"]),
        name=rec["name"],
        scope=rec["scope"],
        definition=rec["definition"],
        logical_attrs=_decode_map(rec["logical_attrs"]),
        schema_config=None
        if sc is None
        else SchemaConfig.of(sc["labels"], sc["property_keys"]),
        sub_ecosystem=None
        if rec["sub_ecosystem"] is None
        else SubEcosystem(rec["sub_ecosystem"]),
        properties=_decode_map(rec["properties"]),
    )


def _relationship_record(r: Relationship) -> dict:
    return {
        "rec": "relationship",
        "id": r.id,
        "rel_type": r.rel_type,
        "source": r.source,
        "target": r.target,
        "relator": r.relator,
        "properties": _encode_map(r.properties),
    }


def _relationship_from(rec: dict) -> Relationship:
    return Relationship(
        id=rec["id"],
        rel_type=rec["rel_type"],
        source=rec["source"],
        target=rec["target"],
        relator=rec["relator"],
        properties=_decode_map(rec["properties"]),
    )


def _measure_record(m: Measure) -> dict:
    return {
        "rec": "measure",
        "id": m.id,
        "metric_name": m.metric_name,
        "value": m.value,
        "unit": m.unit,
        "subject": m.subject,
        "at_event": m.at_event,
    }


def _measure_from(rec: dict) -> Measure:
    return Measure(
        id=rec["id"],
        metric_name=rec["metric_name"],
        value=float(rec["value"]),
        unit=rec["unit"],
        subject=rec["subject"],
        at_event=rec["at_event"],
    )
