"""Conformance checks: matrix coverage and rule violations.

``validate`` never raises on bad graph content; every finding is a
:class:`Violation` carrying a stable machine-readable code:

    MISSING_ASPECT        a required aspect has no element
    INCOMPLETE_PAYLOAD    element payload short of its reification level
    NUMERIC_ON_NON_WHY    numeric property outside the Why aspect
    RELATOR_REQUIRED      mediated relationship type without a relator
    REL_TYPE_NOT_ALLOWED  relationship type outside the policy allow-list
    DANGLING_REF          reference that does not resolve
    DUP_NAME              duplicate canonical name within one aspect

Validation is pure: the same graph and policy always yield the same report.
It only reads the graph, so it may run concurrently with other readers.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field

from .model import Aspect, ElementId, Perspective, is_numeric_literal, payload_gaps
from .store import TantraGraph

# Anything shaped like an issued id counts as a reference in logical_attrs.
_ID_PATTERN = re.compile(r"^[A-Z]{3}-\d{6}$")

DEFAULT_MEDIATED_TYPES = frozenset(
    {"RECEIVES_BENEFIT", "SELLS_AT", "INSURED_BY", "FINANCED_BY"}
)


@dataclass(frozen=True)
class SchemaPolicy:
    """What a conforming graph must look like.

    ``relator_mediated_types`` lists relationship types that only make sense
    through an institution and therefore require a relator. When an
    allow-list is given, every mediated type must be on it.
    """

    relator_mediated_types: frozenset[str] = DEFAULT_MEDIATED_TYPES
    allowed_rel_types: frozenset[str] | None = None
    required_aspects: frozenset[Aspect] = frozenset(Aspect)

    def __post_init__(self):
        if self.allowed_rel_types is not None:
            stray = self.relator_mediated_types - self.allowed_rel_types
            if stray:
                raise ValueError(
                    f"mediated types not in allow-list: {sorted(stray)}"
                )


def default_policy() -> SchemaPolicy:
    return SchemaPolicy()


@dataclass(frozen=True)
class Violation:
    code: str
    subjects: tuple[ElementId, ...]
    message: str


@dataclass(frozen=True)
class MatrixCoverage:
    """Element counts per (aspect, perspective) cell of the 9x5 matrix."""

    counts: dict[tuple[Aspect, Perspective], int] = field(hash=False, default_factory=dict)

    def cell(self, aspect: Aspect, perspective: Perspective) -> int:
        return self.counts.get((aspect, perspective), 0)

    def row_total(self, aspect: Aspect) -> int:
        return sum(self.cell(aspect, p) for p in Perspective)

    def column_total(self, perspective: Perspective) -> int:
        return sum(self.cell(a, perspective) for a in Aspect)

    def total(self) -> int:
        return sum(self.counts.values())

    def to_tsv(self) -> str:
        lines = ["aspect\t" + "\t".join(p.value for p in Perspective) + "\ttotal"]
        for a in Aspect:
            cells = [str(self.cell(a, p)) for p in Perspective]
            lines.append(a.value + "\t" + "\t".join(cells) + f"\t{self.row_total(a)}")
        footer = ["total"] + [str(self.column_total(p)) for p in Perspective]
        lines.append("\t".join(footer) + f"\t{self.total()}")
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...]
    matrix: MatrixCoverage

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_jsonl(self) -> str:
        lines = [
            json.dumps(
                {"format": "tantra-validation", "version": 1, "ok": self.ok},
                sort_keys=True,
                separators=(",", ":"),
            )
        ]
        for v in self.violations:
            lines.append(
                json.dumps(
                    {
                        "rec": "violation",
                        "code": v.code,
                        "subjects": list(v.subjects),
                        "message": v.message,
                    },
                    sort_keys=True,
                    separators=(",", ":"),
                )
            )
        matrix = {
            a.value: {p.value: self.matrix.cell(a, p) for p in Perspective}
            for a in Aspect
        }
        lines.append(
            json.dumps(
                {"rec": "matrix", "counts": matrix},
                sort_keys=True,
                separators=(",", ":"),
            )
        )
        return "\n".join(lines) + "\n"


def matrix_coverage(g: TantraGraph) -> MatrixCoverage:
    """Count elements in every aspect-by-perspective cell."""
    counts: dict[tuple[Aspect, Perspective], int] = {}
    for e in g.elements.values():
        key = (e.aspect, e.perspective)
        counts[key] = counts.get(key, 0) + 1
    return MatrixCoverage(counts)


def validate(g: TantraGraph, policy: SchemaPolicy | None = None) -> ValidationReport:
    """Report every rule violation in the graph under the given policy."""
    policy = policy or default_policy()
    found: list[Violation] = []

    for aspect in sorted(policy.required_aspects, key=lambda a: a.value):
        if not g.index_by_aspect[aspect]:
            found.append(
                Violation(
                    "MISSING_ASPECT",
                    (),
                    f"required aspect {aspect.value} has no element",
                )
            )

    for eid, e in sorted(g.elements.items()):
        gaps = payload_gaps(e)
        if gaps:
            found.append(
                Violation(
                    "INCOMPLETE_PAYLOAD",
                    (eid,),
                    f"{eid} at {e.perspective.value} lacks {', '.join(gaps)}",
                )
            )
        if e.aspect is not Aspect.WHY:
            for key in sorted(e.properties):
                if is_numeric_literal(e.properties[key]):
                    found.append(
                        Violation(
                            "NUMERIC_ON_NON_WHY",
                            (eid,),
                            f"{eid} ({e.aspect.value}) carries numeric property "
                            f"{key!r}; quantities belong on measures",
                        )
                    )
        for key in sorted(e.logical_attrs):
            v = e.logical_attrs[key]
            if isinstance(v, str) and _ID_PATTERN.match(v) and v not in g.elements:
                found.append(
                    Violation(
                        "DANGLING_REF",
                        (eid,),
                        f"{eid}: logical attribute {key!r} points at missing {v}",
                    )
                )

    for rid, r in sorted(g.relationships.items()):
        if policy.allowed_rel_types is not None and r.rel_type not in policy.allowed_rel_types:
            found.append(
                Violation(
                    "REL_TYPE_NOT_ALLOWED",
                    (rid,),
                    f"{rid}: type {r.rel_type} is not in the allow-list",
                )
            )
        if r.rel_type in policy.relator_mediated_types and r.relator is None:
            found.append(
                Violation(
                    "RELATOR_REQUIRED",
                    (rid,),
                    f"{rid}: {r.rel_type} must be mediated by a relator",
                )
            )
        for label, ref in (("source", r.source), ("target", r.target), ("relator", r.relator)):
            if ref is not None and ref not in g.elements:
                found.append(
                    Violation(
                        "DANGLING_REF",
                        (rid,),
                        f"{rid}: {label} {ref} does not resolve",
                    )
                )

    for mid, m in sorted(g.measures.items()):
        if m.subject not in g.elements:
            found.append(
                Violation("DANGLING_REF", (mid,), f"{mid}: subject {m.subject} does not resolve")
            )
        if m.at_event is not None and m.at_event not in g.elements:
            found.append(
                Violation("DANGLING_REF", (mid,), f"{mid}: event {m.at_event} does not resolve")
            )

    # Duplicate canonical names, scoped to a single aspect.
    seen: dict[tuple[Aspect, str], list[ElementId]] = {}
    for eid, e in sorted(g.elements.items()):
        seen.setdefault((e.aspect, e.dedup_key), []).append(eid)
    for (aspect, key), ids in sorted(seen.items(), key=lambda kv: (kv[0][0].value, kv[0][1])):
        if len(ids) > 1:
            found.append(
                Violation(
                    "DUP_NAME",
                    tuple(ids),
                    f"aspect {aspect.value}: {len(ids)} elements share the name {key!r}",
                )
            )

    return ValidationReport(tuple(found), matrix_coverage(g))


def policy_to_jsonl(policy: SchemaPolicy) -> str:
    header = {"format": "tantra-policy", "version": 1}
    rec = {
        "rec": "policy",
        "relator_mediated_types": sorted(policy.relator_mediated_types),
        "allowed_rel_types": None
        if policy.allowed_rel_types is None
        else sorted(policy.allowed_rel_types),
        "required_aspects": sorted(a.value for a in policy.required_aspects),
    }
    return (
        json.dumps(header, sort_keys=True, separators=(",", ":"))
        + "\n"
        + json.dumps(rec, sort_keys=True, separators=(",", ":"))
        + "\n"
    )


def load_policy(path) -> SchemaPolicy:
    from .errors import IoFailure, MalformedRecord

    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = [ln for ln in fh.read().split("\n") if ln.strip()]
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc
    if not lines:
        raise MalformedRecord(1, "empty policy file")
    header = json.loads(lines[0])
    if header.get("format") != "tantra-policy":
        raise MalformedRecord(1, f"unexpected format {header.get('format')!r}")
    for n, line in enumerate(lines[1:], start=2):
        rec = json.loads(line)
        if rec.get("rec") == "policy":
            allowed = rec.get("allowed_rel_types")
            return SchemaPolicy(
                relator_mediated_types=frozenset(rec.get("relator_mediated_types", ())),
                allowed_rel_types=None if allowed is None else frozenset(allowed),
                required_aspects=frozenset(
                    Aspect(a) for a in rec.get("required_aspects", [a.value for a in Aspect])
                ),
            )
    raise MalformedRecord(len(lines), "no policy record found")
