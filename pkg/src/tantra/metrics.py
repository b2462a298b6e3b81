"""Quantitative layer: reification entropy, separation scores, goal and
phenomena evaluation.

Reification entropy treats the five levels as outcomes of a distribution:
for one aspect, H = -sum(q_p * log2 q_p) over the fraction q_p of that
aspect's elements sitting at each level (0 log 0 := 0). A fully reified
aspect column scores 0; elements smeared evenly across all five levels
score log2(5).

Separation scores quantify how hard it is for group ``a`` to reach group
``b`` for one of seven separation kinds. All scores are the complement of a
fraction of qualifying evidence, hence live in [0, 1], shrink (weakly) when
a qualifying link is added, and are invariant under duplicating group
members together with their links. Which relationship types qualify per
kind is configuration, not code; :func:`default_config` ships a vocabulary
that matches the bundled dataset.

Group selectors are either an explicit collection of element ids or a name:
a name resolves to the elements carrying it, plus every element linked to
one of them by a membership edge (``MEMBER_OF``/``INSTANCE_OF``/``IS_A``).

Everything here is read-only over the graph and safe under concurrent
readers.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from datetime import date

from .errors import (
    EmptyAspect,
    EmptyGroup,
    IoFailure,
    MalformedRecord,
    UnknownEvent,
    UnknownKind,
    UnresolvedBinding,
)
from .model import Aspect, Element, ElementId, Perspective, SeparationKind, SubEcosystem, name_key
from .store import TantraGraph

# A group selector is either a name (str) or a collection of element ids.
MEMBERSHIP_REL_TYPES = frozenset({"MEMBER_OF", "INSTANCE_OF", "IS_A"})


# --- configuration ---


@dataclass(frozen=True)
class SeparationRule:
    """Qualifying-link vocabulary for one separation kind.

    ``rel_types`` are the edge types that count as bridging the separation.
    ``target_names`` restricts which reached elements qualify (empty means
    any); ``excluded_names`` disqualifies targets (e.g. informal money
    lenders for the financial kind); ``b_rel_types`` is only used by the
    temporal kind for the counterpart group's window edges.
    """

    kind: SeparationKind
    rel_types: frozenset[str]
    target_names: frozenset[str] = frozenset()
    excluded_names: frozenset[str] = frozenset()
    b_rel_types: frozenset[str] = frozenset()


@dataclass(frozen=True)
class MarkerSpec:
    """One change-marker metric tracked for a phenomenon or intervention."""

    metric_name: str
    agg: str = "sum"  # sum | mean | count


PHENOMENA = ("Coevolution", "Self-organization", "Adaptation", "Emergence")


@dataclass(frozen=True)
class MetricsConfig:
    separations: dict[SeparationKind, SeparationRule] = field(hash=False, default_factory=dict)
    phenomena: dict[str, tuple[MarkerSpec, ...]] = field(hash=False, default_factory=dict)
    membership_rel_types: frozenset[str] = MEMBERSHIP_REL_TYPES


def default_config() -> MetricsConfig:
    mk = SeparationKind
    rules = {
        mk.INFORMATIONAL: SeparationRule(mk.INFORMATIONAL, frozenset({"INFORMED_BY"})),
        mk.SPATIAL: SeparationRule(mk.SPATIAL, frozenset({"LOCATED_NEAR", "SERVED_BY"})),
        mk.TEMPORAL: SeparationRule(
            mk.TEMPORAL,
            frozenset({"SELLS_DURING"}),
            b_rel_types=frozenset({"BUYS_DURING"}),
        ),
        mk.FINANCIAL: SeparationRule(
            mk.FINANCIAL,
            frozenset({"FINANCED_BY"}),
            excluded_names=frozenset({"money lender", "money lenders"}),
        ),
        mk.CAPABILITY: SeparationRule(mk.CAPABILITY, frozenset({"HAS_CAPABILITY"})),
        mk.INTELLECTUAL: SeparationRule(mk.INTELLECTUAL, frozenset({"HAS_KNOWHOW"})),
        mk.SOCIO_POLITICAL: SeparationRule(
            mk.SOCIO_POLITICAL, frozenset({"MEMBER_OF", "AFFILIATED_WITH"})
        ),
    }
    phenomena = {
        "Coevolution": (MarkerSpec("Profit Share Spread", "mean"),),
        "Self-organization": (MarkerSpec("Cooperative Memberships", "sum"),),
        "Adaptation": (MarkerSpec("Diversified Acreage", "sum"),),
        "Emergence": (MarkerSpec("Non-Farm Income", "count"),),
    }
    return MetricsConfig(rules, phenomena)


def config_to_jsonl(config: MetricsConfig) -> str:
    lines = [json.dumps({"format": "tantra-metrics", "version": 1}, sort_keys=True, separators=(",", ":"))]
    for kind in SeparationKind:
        rule = config.separations.get(kind)
        if rule is None:
            continue
        lines.append(
            json.dumps(
                {
                    "rec": "separation",
                    "kind": kind.value,
                    "rel_types": sorted(rule.rel_types),
                    "target_names": sorted(rule.target_names),
                    "excluded_names": sorted(rule.excluded_names),
                    "b_rel_types": sorted(rule.b_rel_types),
                },
                sort_keys=True,
                separators=(",", ":"),
            )
        )
    for name in PHENOMENA:
        markers = config.phenomena.get(name, ())
        lines.append(
            json.dumps(
                {
                    "rec": "phenomenon",
                    "name": name,
                    "markers": [{"metric_name": m.metric_name, "agg": m.agg} for m in markers],
                },
                sort_keys=True,
                separators=(",", ":"),
            )
        )
    return "\n".join(lines) + "\n"


def load_config(path) -> MetricsConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = [ln for ln in fh.read().split("\n") if ln.strip()]
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc
    if not lines:
        raise MalformedRecord(1, "empty metrics config")
    header = json.loads(lines[0])
    if header.get("format") != "tantra-metrics":
        raise MalformedRecord(1, f"unexpected format {header.get('format')!r}")
    separations: dict[SeparationKind, SeparationRule] = {}
    phenomena: dict[str, tuple[MarkerSpec, ...]] = {}
    for n, line in enumerate(lines[1:], start=2):
        rec = json.loads(line)
        kind = rec.get("rec")
        if kind == "separation":
            sk = SeparationKind(rec["kind"])
            separations[sk] = SeparationRule(
                kind=sk,
                rel_types=frozenset(rec.get("rel_types", ())),
                target_names=frozenset(rec.get("target_names", ())),
                excluded_names=frozenset(rec.get("excluded_names", ())),
                b_rel_types=frozenset(rec.get("b_rel_types", ())),
            )
        elif kind == "phenomenon":
            phenomena[rec["name"]] = tuple(
                MarkerSpec(m["metric_name"], m.get("agg", "sum")) for m in rec.get("markers", ())
            )
        else:
            raise MalformedRecord(n, f"unknown record kind {kind!r}")
    return MetricsConfig(separations, phenomena)


# --- reification entropy ---


def reification_entropy(g: TantraGraph, aspect: Aspect) -> float:
    """Shannon entropy (bits) of the aspect's reification-level distribution."""
    ids = g.index_by_aspect[aspect]
    if not ids:
        raise EmptyAspect(f"no element of aspect {aspect.value}")
    counts = {p: 0 for p in Perspective}
    for eid in ids:
        counts[g.elements[eid].perspective] += 1
    total = len(ids)
    h = 0.0
    for c in counts.values():
        if c:
            q = c / total
            h -= q * math.log2(q)
    return h


# --- separation scoring ---


@dataclass(frozen=True)
class SeparationAssessment:
    kind: SeparationKind
    scope: tuple[str, str]
    score: float
    evidence: tuple[ElementId, ...]


def resolve_group(
    g: TantraGraph,
    selector,
    config: MetricsConfig | None = None,
) -> set[ElementId]:
    """Resolve a selector (name or id collection) to a set of element ids."""
    config = config or default_config()
    if isinstance(selector, str):
        roots = {e.id for e in g.find_by_name(selector)}
        members = set(roots)
        for r in g.relationships.values():
            if r.rel_type in config.membership_rel_types and r.target in roots:
                members.add(r.source)
        return members
    return {eid for eid in selector if eid in g.elements}


def _group_label(selector) -> str:
    return selector if isinstance(selector, str) else f"<{len(list(selector))} ids>"


def separation_score(
    g: TantraGraph,
    kind: SeparationKind,
    a,
    b,
    config: MetricsConfig | None = None,
) -> SeparationAssessment:
    """Score the separation of kind ``kind`` between groups ``a`` and ``b``."""
    config = config or default_config()
    rule = config.separations.get(kind)
    if rule is None:
        raise UnknownKind(f"no rule configured for {kind.value}")
    if not isinstance(a, str):
        a = tuple(a)
    if not isinstance(b, str):
        b = tuple(b)
    group_a = resolve_group(g, a, config)
    group_b = resolve_group(g, b, config)
    if not group_a:
        raise EmptyGroup(f"group {_group_label(a)!r} resolved to no elements")
    if not group_b:
        raise EmptyGroup(f"group {_group_label(b)!r} resolved to no elements")

    if kind is SeparationKind.TEMPORAL:
        fraction, evidence = _temporal_overlap(g, rule, group_a, group_b)
    elif kind is SeparationKind.INFORMATIONAL:
        fraction, evidence = _member_fraction(g, group_a, _informed_by_path(g, rule))
    elif kind is SeparationKind.SPATIAL:
        fraction, evidence = _member_fraction(g, group_a, _direct_to_group(g, rule, group_b))
    elif kind is SeparationKind.FINANCIAL:
        fraction, evidence = _member_fraction(g, group_a, _institutional_edge(g, rule))
    else:  # Capability, Intellectual, SocioPolitical: carry the configured link
        fraction, evidence = _member_fraction(g, group_a, _any_edge_of(g, rule))
    score = 1.0 - fraction
    score = min(1.0, max(0.0, score))
    return SeparationAssessment(
        kind=kind,
        scope=(_group_label(a), _group_label(b)),
        score=score,
        evidence=tuple(sorted(evidence)),
    )


def _member_fraction(g, group_a, qualifier):
    qualified = 0
    evidence: set[ElementId] = set()
    for member in sorted(group_a):
        hit = qualifier(member)
        if hit:
            qualified += 1
            evidence.update(hit)
    return qualified / len(group_a), evidence


def _qualifying_target(g: TantraGraph, rule: SeparationRule, eid: ElementId) -> bool:
    e = g.elements.get(eid)
    if e is None or e.aspect is not Aspect.RELATORS:
        return False
    key = name_key(e.name)
    if rule.excluded_names and key in {name_key(x) for x in rule.excluded_names}:
        return False
    if rule.target_names:
        return key in {name_key(x) for x in rule.target_names}
    return True


def _informed_by_path(g: TantraGraph, rule: SeparationRule):
    """Reachability along the configured edge types to a qualifying relator."""

    def qualifier(member: ElementId):
        seen = {member}
        frontier = [member]
        used: list[ElementId] = []
        while frontier:
            nid = frontier.pop()
            for r in g.relationships_from(nid):
                if r.rel_type not in rule.rel_types:
                    continue
                if _qualifying_target(g, rule, r.target):
                    used.append(r.id)
                    return used
                if r.target not in seen:
                    seen.add(r.target)
                    used.append(r.id)
                    frontier.append(r.target)
        return []

    return qualifier


def _direct_to_group(g: TantraGraph, rule: SeparationRule, group_b: set[ElementId]):
    def qualifier(member: ElementId):
        return [
            r.id
            for r in g.relationships_from(member)
            if r.rel_type in rule.rel_types and r.target in group_b
        ]

    return qualifier


def _institutional_edge(g: TantraGraph, rule: SeparationRule):
    def qualifier(member: ElementId):
        return [
            r.id
            for r in g.relationships_from(member)
            if r.rel_type in rule.rel_types and _qualifying_target(g, rule, r.target)
        ]

    return qualifier


def _any_edge_of(g: TantraGraph, rule: SeparationRule):
    def qualifier(member: ElementId):
        return [r.id for r in g.relationships_from(member) if r.rel_type in rule.rel_types]

    return qualifier


def _event_window(e: Element) -> tuple[date, date] | None:
    start = e.properties.get("start_date")
    if not isinstance(start, date):
        return None
    end = e.properties.get("end_date")
    return start, end if isinstance(end, date) else start


def _temporal_overlap(g, rule, group_a, group_b):
    """Fraction of a's sale windows that overlap some buying window of b."""

    def windows(group, rel_types):
        out: dict[ElementId, tuple[date, date]] = {}
        edges: dict[ElementId, list[ElementId]] = {}
        for member in group:
            for r in g.relationships_from(member):
                if r.rel_type not in rel_types:
                    continue
                ev = g.elements.get(r.target)
                if ev is None or ev.aspect is not Aspect.WHEN:
                    continue
                w = _event_window(ev)
                if w is not None:
                    out[ev.id] = w
                    edges.setdefault(ev.id, []).append(r.id)
        return out, edges

    a_windows, a_edges = windows(group_a, rule.rel_types)
    b_windows, b_edges = windows(group_b, rule.b_rel_types or rule.rel_types)
    if not a_windows:
        return 0.0, set()
    overlapping = 0
    evidence: set[ElementId] = set()
    for ev_id, (a_start, a_end) in sorted(a_windows.items()):
        for b_id, (b_start, b_end) in sorted(b_windows.items()):
            if a_start <= b_end and b_start <= a_end:
                overlapping += 1
                evidence.update(a_edges[ev_id])
                evidence.update(b_edges[b_id])
                break
    return overlapping / len(a_windows), evidence


# --- goals ---


@dataclass(frozen=True)
class MetricBinding:
    metric_name: str
    subject: "str | tuple[ElementId, ...] | None" = None
    direction: str = "maximize"  # maximize | minimize
    target: float | None = None
    agg: str = "sum"  # sum | mean | count


@dataclass(frozen=True)
class GoalRecord:
    ecosystem: SubEcosystem
    statement: str
    metric_bindings: tuple[MetricBinding, ...]

    def __post_init__(self):
        if not self.metric_bindings:
            raise ValueError("a goal needs at least one metric binding")


@dataclass(frozen=True)
class GoalResult:
    metric_name: str
    observed: float
    target: float | None
    direction: str
    met: bool | None


def _aggregate(values: list[float], agg: str) -> float:
    if agg == "count":
        return float(len(values))
    if agg == "mean":
        return sum(values) / len(values)
    if agg == "sum":
        return sum(values)
    raise UnknownKind(f"unknown aggregation {agg!r}")


def _matching_measures(
    g: TantraGraph,
    metric_name: str,
    subjects: set[ElementId] | None,
    at_event: ElementId | None,
    config: MetricsConfig,
) -> list[float]:
    wanted = name_key(metric_name)
    out = []
    for _, m in sorted(g.measures.items()):
        if name_key(m.metric_name) != wanted:
            continue
        if subjects is not None and m.subject not in subjects:
            continue
        if at_event is not None and m.at_event != at_event:
            continue
        out.append(m.value)
    return out


def goal_eval(
    g: TantraGraph,
    goal: GoalRecord,
    at_event: ElementId | None = None,
    config: MetricsConfig | None = None,
) -> list[GoalResult]:
    """Aggregate each binding's measures and compare against its target."""
    config = config or default_config()
    if at_event is not None:
        _require_event(g, at_event)
    results = []
    for binding in goal.metric_bindings:
        subjects = None
        if binding.subject is not None:
            subjects = resolve_group(g, binding.subject, config)
        values = _matching_measures(g, binding.metric_name, subjects, at_event, config)
        if not values:
            raise UnresolvedBinding(
                f"binding {binding.metric_name!r} matched no measure"
            )
        observed = _aggregate(values, binding.agg)
        met: bool | None = None
        if binding.target is not None:
            met = (
                observed >= binding.target
                if binding.direction == "maximize"
                else observed <= binding.target
            )
        results.append(
            GoalResult(binding.metric_name, observed, binding.target, binding.direction, met)
        )
    return results


# --- phenomena change markers ---


@dataclass(frozen=True)
class MarkerDelta:
    phenomenon: str
    metric_name: str
    baseline: float
    followup: float

    @property
    def delta(self) -> float:
        return self.followup - self.baseline


def _require_event(g: TantraGraph, eid: ElementId) -> Element:
    ev = g.elements.get(eid)
    if ev is None or ev.aspect is not Aspect.WHEN:
        raise UnknownEvent(f"{eid} is not a When-aspect element")
    return ev


def phenomena_report(
    g: TantraGraph,
    window: tuple[ElementId, ElementId],
    config: MetricsConfig | None = None,
) -> list[MarkerDelta]:
    """Change-marker values at both ends of the window, per phenomenon."""
    config = config or default_config()
    baseline_ev, followup_ev = window
    _require_event(g, baseline_ev)
    _require_event(g, followup_ev)
    rows = []
    for phenomenon in PHENOMENA:
        for marker in config.phenomena.get(phenomenon, ()):
            v0 = _marker_value(g, marker, baseline_ev, config)
            v1 = _marker_value(g, marker, followup_ev, config)
            rows.append(MarkerDelta(phenomenon, marker.metric_name, v0, v1))
    return rows


def _marker_value(g, marker: MarkerSpec, event: ElementId, config: MetricsConfig) -> float:
    values = _matching_measures(g, marker.metric_name, None, event, config)
    if not values:
        return 0.0
    return _aggregate(values, marker.agg)


def deltas_to_tsv(rows: list[MarkerDelta]) -> str:
    lines = ["phenomenon\tmetric\tbaseline\tfollowup\tdelta"]
    for r in rows:
        lines.append(
            f"{r.phenomenon}\t{r.metric_name}\t{r.baseline:g}\t{r.followup:g}\t{r.delta:+g}"
        )
    return "\n".join(lines) + "\n"


def goal_results_to_tsv(results: list[GoalResult]) -> str:
    lines = ["metric\tobserved\ttarget\tdirection\tmet"]
    for r in results:
        target = "" if r.target is None else f"{r.target:g}"
        met = "" if r.met is None else str(r.met).lower()
        lines.append(f"{r.metric_name}\t{r.observed:g}\t{target}\t{r.direction}\t{met}")
    return "\n".join(lines) + "\n"


def load_goals(path) -> list[GoalRecord]:
    """Read goal records from a JSON-lines file."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = [ln for ln in fh.read().split("\n") if ln.strip()]
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc
    if not lines:
        raise MalformedRecord(1, "empty goals file")
    header = json.loads(lines[0])
    if header.get("format") != "tantra-goals":
        raise MalformedRecord(1, f"unexpected format {header.get('format')!r}")
    goals = []
    for n, line in enumerate(lines[1:], start=2):
        rec = json.loads(line)
        if rec.get("rec") != "goal":
            raise MalformedRecord(n, f"unknown record kind {rec.get('rec')!r}")
        bindings = tuple(
            MetricBinding(
                metric_name=bd["metric_name"],
                subject=bd.get("subject"),
                direction=bd.get("direction", "maximize"),
                target=bd.get("target"),
                agg=bd.get("agg", "sum"),
            )
            for bd in rec.get("metric_bindings", ())
        )
        goals.append(
            GoalRecord(
                ecosystem=SubEcosystem(rec.get("ecosystem", "Economic")),
                statement=rec.get("statement", ""),
                metric_bindings=bindings,
            )
        )
    return goals


def goals_to_jsonl(goals: list[GoalRecord]) -> str:
    lines = [json.dumps({"format": "tantra-goals", "version": 1}, sort_keys=True, separators=(",", ":"))]
    for goal in goals:
        lines.append(
            json.dumps(
                {
                    "rec": "goal",
                    "ecosystem": goal.ecosystem.value,
                    "statement": goal.statement,
                    "metric_bindings": [
                        {
                            "metric_name": bd.metric_name,
                            "subject": bd.subject if isinstance(bd.subject, str) else (
                                list(bd.subject) if bd.subject is not None else None
                            ),
                            "direction": bd.direction,
                            "target": bd.target,
                            "agg": bd.agg,
                        }
                        for bd in goal.metric_bindings
                    ],
                },
                sort_keys=True,
                separators=(",", ":"),
            )
        )
    return "\n".join(lines) + "\n"
