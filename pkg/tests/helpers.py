"""Shared test machinery: seeded graph generation and independent oracles.

The oracles here deliberately do not reuse the library's own traversal or
indexing code paths: the brute-force matcher scans every node assignment,
and the index oracle rebuilds secondary indices from the primary maps.
"""

from __future__ import annotations

import itertools
import random
from datetime import date, timedelta

from tantra.model import (
    Aspect,
    Element,
    Measure,
    Perspective,
    Relationship,
    SchemaConfig,
    SubEcosystem,
    name_key,
)
from tantra.store import TantraGraph

ASPECT_BY_LABEL = {a.value: a for a in Aspect}


def random_graph(
    rng: random.Random,
    n_elements: int = 14,
    n_relationships: int = 16,
    n_measures: int = 5,
) -> TantraGraph:
    """A structurally arbitrary graph: any aspect, any level, mixed payloads."""
    g = TantraGraph()
    aspects = list(Aspect)
    perspectives = list(Perspective)
    for i in range(n_elements):
        aspect = rng.choice(aspects)
        perspective = rng.choice(perspectives)
        props = {}
        if rng.random() < 0.5:
            props["note"] = f"p{rng.randrange(100)}"
        if rng.random() < 0.3:
            props["flag"] = rng.random() < 0.5
        if rng.random() < 0.3:
            props["weight"] = round(rng.uniform(-5, 5), 3)
        if rng.random() < 0.2:
            props["start_date"] = date(2019, 1, 1) + timedelta(days=rng.randrange(400))
        e = Element(
            id=g.ids.next(aspect.id_prefix),
            aspect=aspect,
            perspective=perspective,
            name=f"node {i}",
            scope="generated",
            definition=f"def {i}" if perspective >= Perspective.CONCEPTUAL else None,
            logical_attrs={"k": f"v{i}"} if perspective >= Perspective.LOGICAL else {},
            schema_config=SchemaConfig.of(("L",), ("note",))
            if perspective >= Perspective.PHYSICAL
            else None,
            sub_ecosystem=rng.choice(list(SubEcosystem)) if rng.random() < 0.3 else None,
            properties=props,
        )
        g.insert_element(e)
    ids = sorted(g.elements)
    relators = [i for i in ids if g.elements[i].aspect is Aspect.RELATORS]
    types = ("SELLS_TO", "MEMBER_OF", "INFORMED_BY", "LINKS")
    for _ in range(n_relationships):
        r = Relationship(
            id=g.ids.next("REL"),
            rel_type=rng.choice(types),
            source=rng.choice(ids),
            target=rng.choice(ids),
            relator=rng.choice(relators) if relators and rng.random() < 0.3 else None,
            properties={"since": f"y{rng.randrange(30)}"} if rng.random() < 0.3 else {},
        )
        g.insert_relationship(r)
    whens = [i for i in ids if g.elements[i].aspect is Aspect.WHEN]
    for _ in range(n_measures):
        m = Measure(
            id=g.ids.next("MSR"),
            metric_name=rng.choice(("Yield", "Acreage", "Output")),
            value=round(rng.uniform(0, 100), 2),
            unit="u",
            subject=rng.choice(ids),
            at_event=rng.choice(whens) if whens and rng.random() < 0.5 else None,
        )
        g.insert_measure(m)
    return g


# --- independent index oracle ---


def rebuilt_indices(g: TantraGraph):
    by_aspect = {a: set() for a in Aspect}
    by_perspective = {p: set() for p in Perspective}
    by_name: dict[str, set] = {}
    adj_out: dict[str, set] = {}
    adj_in: dict[str, set] = {}
    for eid, e in g.elements.items():
        by_aspect[e.aspect].add(eid)
        by_perspective[e.perspective].add(eid)
        by_name.setdefault(name_key(e.name), set()).add(eid)
    for rid, r in g.relationships.items():
        adj_out.setdefault(r.source, set()).add(rid)
        adj_in.setdefault(r.target, set()).add(rid)
    return by_aspect, by_perspective, by_name, adj_out, adj_in


def _nonempty(d: dict) -> dict:
    return {k: v for k, v in d.items() if v}


def assert_indices_consistent(g: TantraGraph):
    by_aspect, by_perspective, by_name, adj_out, adj_in = rebuilt_indices(g)
    assert _nonempty(g.index_by_aspect) == _nonempty(by_aspect)
    assert _nonempty(g.index_by_perspective) == _nonempty(by_perspective)
    assert _nonempty(g.index_by_name) == _nonempty(by_name)
    assert _nonempty(g.adjacency_out) == _nonempty(adj_out)
    assert _nonempty(g.adjacency_in) == _nonempty(adj_in)


# --- independent brute-force query oracle ---


def _get(node, key):
    if isinstance(node, Measure):
        fields = {
            "id": node.id,
            "name": node.metric_name,
            "metric_name": node.metric_name,
            "value": node.value,
            "unit": node.unit,
            "subject": node.subject,
            "at_event": node.at_event,
            "aspect": "Why",
        }
        return fields.get(key)
    fields = {
        "id": node.id,
        "name": node.name,
        "scope": node.scope,
        "definition": node.definition,
        "aspect": node.aspect.value,
        "perspective": node.perspective.value,
        "sub_ecosystem": None if node.sub_ecosystem is None else node.sub_ecosystem.value,
    }
    if key in fields:
        return fields[key]
    if key in node.properties:
        return node.properties[key]
    return node.logical_attrs.get(key)


def _eq(actual, wanted) -> bool:
    if actual is None:
        return False
    if isinstance(wanted, bool) or isinstance(actual, bool):
        return actual is wanted
    if isinstance(wanted, float) and isinstance(actual, (int, float)):
        return float(actual) == wanted
    return actual == wanted


def _pred_holds(actual, op, wanted) -> bool:
    if actual is None:
        return False
    if op == "=":
        return _eq(actual, wanted)
    if op == "!=":
        return not _eq(actual, wanted)
    if op == "CONTAINS":
        return isinstance(actual, str) and isinstance(wanted, str) and wanted in actual
    if isinstance(actual, bool) or isinstance(wanted, bool):
        return False
    try:
        return actual < wanted if op == "<" else actual > wanted
    except TypeError:
        return False


def brute_force_rows(g: TantraGraph, q) -> list[tuple]:
    """Every match by exhaustive node assignment, projected like execute()."""
    universe = [g.elements[i] for i in sorted(g.elements)]
    universe += [m for _, m in sorted(g.measures.items())]
    rels = [g.relationships[i] for i in sorted(g.relationships)]

    def node_ok(node, pattern) -> bool:
        if pattern.label is not None and _get(node, "aspect") != pattern.label:
            return False
        return all(_eq(_get(node, k), v) for k, v in pattern.props)

    def edge_count(a, b, pattern) -> int:
        n = 0
        for r in rels:
            if r.source != a.id or r.target != b.id:
                continue
            if pattern.rel_type is not None and r.rel_type != pattern.rel_type:
                continue
            if pattern.via is not None:
                if r.relator is None:
                    continue
                relator = g.elements.get(r.relator)
                if relator is None or name_key(relator.name) != name_key(pattern.via):
                    continue
            n += 1
        return n

    slots = {n.var: i for i, n in enumerate(q.nodes) if n.var is not None}
    columns = tuple(sorted(slots)) if q.returns is None else q.returns
    rows: list[tuple] = []
    for combo in itertools.product(universe, repeat=len(q.nodes)):
        if not all(node_ok(node, pat) for node, pat in zip(combo, q.nodes)):
            continue
        multiplicity = 1
        for i, epat in enumerate(q.edges):
            multiplicity *= edge_count(combo[i], combo[i + 1], epat)
            if multiplicity == 0:
                break
        if multiplicity == 0:
            continue
        if not all(
            _pred_holds(_get(combo[slots[p.var]], p.key), p.op, p.value) for p in q.where
        ):
            continue
        row = tuple(combo[slots[v]].id for v in columns)
        rows.extend([row] * multiplicity)
    rows.sort()
    return rows


# --- minimal DOT grammar checker ---


def check_dot(text: str):
    """Parse the digraph subset we emit; raises AssertionError on bad syntax."""
    tokens = _dot_tokens(text)
    pos = 0

    def peek():
        return tokens[pos] if pos < len(tokens) else ("EOF", "")

    def take(kind, value=None):
        nonlocal pos
        k, v = peek()
        assert k == kind and (value is None or v == value), f"expected {kind} {value}, got {k} {v!r}"
        pos += 1
        return v

    take("ID", "digraph")
    if peek()[0] == "ID":
        take("ID")
    take("PUNCT", "{")
    while peek() != ("PUNCT", "}"):
        _dot_statement(take, peek)
    take("PUNCT", "}")
    assert peek()[0] == "EOF", f"trailing tokens: {peek()!r}"


def _dot_statement(take, peek):
    if peek()[0] == "STRING" or peek()[0] == "ID":
        take(peek()[0])
    else:
        raise AssertionError(f"statement must start with an id, got {peek()!r}")
    if peek() == ("PUNCT", "="):  # graph attribute, e.g. rankdir=LR
        take("PUNCT", "=")
        kind = peek()[0]
        assert kind in ("STRING", "ID"), f"attr value expected, got {peek()!r}"
        take(kind)
        if peek() == ("PUNCT", ";"):
            take("PUNCT", ";")
        return
    while peek() == ("PUNCT", "->"):
        take("PUNCT", "->")
        kind = peek()[0]
        assert kind in ("STRING", "ID"), f"edge target must be an id, got {peek()!r}"
        take(kind)
    if peek() == ("PUNCT", "["):
        take("PUNCT", "[")
        while peek() != ("PUNCT", "]"):
            assert peek()[0] == "ID", f"attr name expected, got {peek()!r}"
            take("ID")
            take("PUNCT", "=")
            kind = peek()[0]
            assert kind in ("STRING", "ID"), f"attr value expected, got {peek()!r}"
            take(kind)
            if peek() == ("PUNCT", ","):
                take("PUNCT", ",")
        take("PUNCT", "]")
    if peek() == ("PUNCT", ";"):
        take("PUNCT", ";")


def _dot_tokens(text: str):
    tokens = []
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
            continue
        if text.startswith("->", i):
            tokens.append(("PUNCT", "->"))
            i += 2
            continue
        if c in "{}[]=,;":
            tokens.append(("PUNCT", c))
            i += 1
            continue
        if c == '"':
            j = i + 1
            while j < n and text[j] != '"':
                j += 2 if text[j] == "\\" else 1
            assert j < n, "unterminated string"
            tokens.append(("STRING", text[i + 1 : j]))
            i = j + 1
            continue
        if c.isalnum() or c in "_#-.":
            j = i
            while j < n and (text[j].isalnum() or text[j] in "_#-."):
                j += 1
            tokens.append(("ID", text[i:j]))
            i = j
            continue
        raise AssertionError(f"unexpected character {c!r} in DOT output")
    return tokens
