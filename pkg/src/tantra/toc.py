"""Theory-of-change ledger: register interventions, track their markers,
walk their logic backward.

An intervention dossier has fourteen narrative fields, from the summary
statement down to knock-on effects, plus change markers that tie it to
measurable quantities. Registered records are stored *as* How-aspect
elements (list-valued fields ride along JSON-encoded in the element's
properties), so matrix coverage and validation see interventions like any
other process.

Evidence for an assumption is an ordinary ``SUPPORTED_BY`` relationship
from the intervention element to any element, carrying the assumption text
in its ``assumption`` property. ``backward_chain`` flags assumptions with
no such edge and actors with no relationship at all.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace

from .errors import (
    MarkerUnmeasured,
    MissingMarkers,
    UnknownActor,
    UnknownEvent,
    UnknownIntervention,
)
from .metrics import MetricsConfig, _matching_measures, _aggregate, default_config, resolve_group
from .model import (
    Aspect,
    ElementId,
    Perspective,
    SchemaConfig,
    canonical_name,
    new_element,
    promote,
)
from .store import TantraGraph

EVIDENCE_REL_TYPE = "SUPPORTED_BY"

# Fields persisted into the backing element, in dossier order.
NARRATIVE_FIELDS = (
    "summary",
    "problem",
    "overall_goal",
    "change_process",
    "change_markers",
    "meta_theory",
    "inputs",
    "actors",
    "domains_of_change",
    "internal_risks",
    "assumptions",
    "external_risks",
    "obstacles",
    "knock_on_effects",
)

_LIST_FIELDS = {
    "inputs",
    "actors",
    "domains_of_change",
    "internal_risks",
    "assumptions",
    "external_risks",
    "obstacles",
    "knock_on_effects",
}


@dataclass(frozen=True)
class ChangeMarker:
    metric_name: str
    subject: str | None = None


@dataclass(frozen=True)
class InterventionRecord:
    """A theory-of-change dossier; all fourteen narrative fields are always
    present (lists may be empty, markers may not)."""

    summary: str
    problem: str
    overall_goal: str
    change_process: str
    change_markers: tuple[ChangeMarker, ...]
    meta_theory: str
    inputs: tuple[str, ...] = ()
    actors: tuple[ElementId, ...] = ()
    domains_of_change: tuple[str, ...] = ()
    internal_risks: tuple[str, ...] = ()
    assumptions: tuple[str, ...] = ()
    external_risks: tuple[str, ...] = ()
    obstacles: tuple[str, ...] = ()
    knock_on_effects: tuple[str, ...] = ()
    id: ElementId | None = None
    linked_process: ElementId | None = None


def register_intervention(g: TantraGraph, rec: InterventionRecord) -> ElementId:
    """Store the dossier as an Instantiated How-aspect element."""
    if not rec.change_markers:
        raise MissingMarkers("an intervention needs at least one change marker")
    for actor in rec.actors:
        if actor not in g.elements:
            raise UnknownActor(f"actor {actor} is not in the graph")
    if rec.linked_process is not None and rec.linked_process not in g.elements:
        raise UnknownActor(f"linked process {rec.linked_process} is not in the graph")

    e = new_element(g.ids, Aspect.HOW, rec.summary, "theory-of-change intervention")
    if rec.id is not None:
        e = replace(e, id=rec.id)
    e = promote(e, Perspective.CONCEPTUAL, definition=rec.problem)
    attrs: dict = {"overall_goal": rec.overall_goal}
    if rec.linked_process is not None:
        attrs["linked_process"] = rec.linked_process
    e = promote(e, Perspective.LOGICAL, logical_attrs=attrs)
    e = promote(
        e,
        Perspective.PHYSICAL,
        schema_config=SchemaConfig.of(
            labels=("How", "Intervention"),
            property_keys=("intervention",) + NARRATIVE_FIELDS,
        ),
    )
    props: dict = {"intervention": True}
    for name in NARRATIVE_FIELDS:
        value = getattr(rec, name)
        if name == "change_markers":
            props[name] = json.dumps(
                [{"metric_name": m.metric_name, "subject": m.subject} for m in value],
                sort_keys=True,
            )
        elif name in _LIST_FIELDS:
            props[name] = json.dumps(list(value), sort_keys=True)
        else:
            props[name] = value
    e = promote(e, Perspective.INSTANTIATED, properties=props)
    g.insert_element(e)
    return e.id


def is_intervention(g: TantraGraph, eid: ElementId) -> bool:
    e = g.elements.get(eid)
    return bool(e is not None and e.aspect is Aspect.HOW and e.properties.get("intervention"))


def get_intervention(g: TantraGraph, eid: ElementId) -> InterventionRecord:
    """Decode the dossier back out of its backing element."""
    if not is_intervention(g, eid):
        raise UnknownIntervention(f"no intervention stored under {eid}")
    e = g.elements[eid]
    kwargs: dict = {"id": eid, "linked_process": e.logical_attrs.get("linked_process")}
    for name in NARRATIVE_FIELDS:
        raw = e.properties[name]
        if name == "change_markers":
            kwargs[name] = tuple(
                ChangeMarker(m["metric_name"], m["subject"]) for m in json.loads(raw)
            )
        elif name in _LIST_FIELDS:
            kwargs[name] = tuple(json.loads(raw))
        else:
            kwargs[name] = raw
    return InterventionRecord(**kwargs)


def list_interventions(g: TantraGraph) -> list[ElementId]:
    return [eid for eid in sorted(g.elements) if is_intervention(g, eid)]


def add_evidence(
    g: TantraGraph, intervention: ElementId, assumption: str, evidence: ElementId
):
    """Link an assumption to a supporting element."""
    if not is_intervention(g, intervention):
        raise UnknownIntervention(f"no intervention stored under {intervention}")
    return g.connect(
        EVIDENCE_REL_TYPE,
        intervention,
        evidence,
        properties={"assumption": canonical_name(assumption)},
    )


@dataclass(frozen=True)
class MarkerOutcome:
    metric_name: str
    baseline: float
    followup: float

    @property
    def delta(self) -> float:
        return self.followup - self.baseline

    @property
    def direction(self) -> str:
        if self.delta > 0:
            return "increase"
        if self.delta < 0:
            return "decrease"
        return "none"


def evaluate_intervention(
    g: TantraGraph,
    eid: ElementId,
    baseline: ElementId,
    followup: ElementId,
    config: MetricsConfig | None = None,
) -> list[MarkerOutcome]:
    """Aggregate each change marker at both events and report the deltas.

    Insensitive to measure insertion order; ``baseline == followup`` yields
    all-zero deltas by construction.
    """
    config = config or default_config()
    rec = get_intervention(g, eid)
    for ev in (baseline, followup):
        node = g.elements.get(ev)
        if node is None or node.aspect is not Aspect.WHEN:
            raise UnknownEvent(f"{ev} is not a When-aspect element")
    outcomes = []
    for marker in rec.change_markers:
        subjects = None
        if marker.subject is not None:
            subjects = resolve_group(g, marker.subject, config)
        values = {}
        for label, ev in (("baseline", baseline), ("followup", followup)):
            found = _matching_measures(g, marker.metric_name, subjects, ev, config)
            if not found:
                raise MarkerUnmeasured(marker.metric_name, ev)
            values[label] = _aggregate(found, "sum")
        outcomes.append(MarkerOutcome(marker.metric_name, values["baseline"], values["followup"]))
    return outcomes


@dataclass(frozen=True)
class ChainReport:
    """Backward walk from outcome to assumptions, with gaps flagged."""

    intervention: ElementId
    overall_goal: str
    change_process: str
    inputs: tuple[str, ...]
    unsupported_assumptions: tuple[str, ...]
    disconnected_actors: tuple[ElementId, ...]

    @property
    def flags(self) -> int:
        return len(self.unsupported_assumptions) + len(self.disconnected_actors)


def backward_chain(g: TantraGraph, eid: ElementId) -> ChainReport:
    """Walk outcome -> process -> inputs -> assumptions, flagging gaps."""
    rec = get_intervention(g, eid)

    supported = set()
    for r in g.relationships_from(eid):
        if r.rel_type == EVIDENCE_REL_TYPE:
            text = r.properties.get("assumption")
            if isinstance(text, str):
                supported.add(canonical_name(text))
    unsupported = tuple(
        a for a in rec.assumptions if canonical_name(a) not in supported
    )

    disconnected = []
    for actor in rec.actors:
        if not g.relationships_from(actor) and not g.relationships_to(actor):
            disconnected.append(actor)

    return ChainReport(
        intervention=eid,
        overall_goal=rec.overall_goal,
        change_process=rec.change_process,
        inputs=rec.inputs,
        unsupported_assumptions=unsupported,
        disconnected_actors=tuple(disconnected),
    )


# --- import/export: one JSON object per record ---


def record_to_json(rec: InterventionRecord) -> str:
    obj = {
        "id": rec.id,
        "linked_process": rec.linked_process,
        "summary": rec.summary,
        "problem": rec.problem,
        "overall_goal": rec.overall_goal,
        "change_process": rec.change_process,
        "change_markers": [
            {"metric_name": m.metric_name, "subject": m.subject} for m in rec.change_markers
        ],
        "meta_theory": rec.meta_theory,
        "inputs": list(rec.inputs),
        "actors": list(rec.actors),
        "domains_of_change": list(rec.domains_of_change),
        "internal_risks": list(rec.internal_risks),
        "assumptions": list(rec.assumptions),
        "external_risks": list(rec.external_risks),
        "obstacles": list(rec.obstacles),
        "knock_on_effects": list(rec.knock_on_effects),
    }
    return json.dumps(obj, sort_keys=True, ensure_ascii=False, indent=2) + "\n"


def record_from_json(text: str) -> InterventionRecord:
    obj = json.loads(text)
    return InterventionRecord(
        summary=obj["summary"],
        problem=obj["problem"],
        overall_goal=obj["overall_goal"],
        change_process=obj["change_process"],
        change_markers=tuple(
            ChangeMarker(m["metric_name"], m.get("subject")) for m in obj["change_markers"]
        ),
        meta_theory=obj["meta_theory"],
        inputs=tuple(obj.get("inputs", ())),
        actors=tuple(obj.get("actors", ())),
        domains_of_change=tuple(obj.get("domains_of_change", ())),
        internal_risks=tuple(obj.get("internal_risks", ())),
        assumptions=tuple(obj.get("assumptions", ())),
        external_risks=tuple(obj.get("external_risks", ())),
        obstacles=tuple(obj.get("obstacles", ())),
        knock_on_effects=tuple(obj.get("knock_on_effects", ())),
        id=obj.get("id"),
        linked_process=obj.get("linked_process"),
    )
