"""Pattern-matching query language over a graph.

Grammar (keywords are uppercase):

    query   := "MATCH" pattern ("WHERE" pred ("AND" pred)*)? "RETURN" returns
    pattern := node (edge node)*
    node    := "(" VAR? (":" LABEL)? props? ")"
    edge    := "-[" (":" TYPE)? ("VIA" STRING)? "]->"
    props   := "{" key ":" literal ("," key ":" literal)* "}"
    pred    := VAR "." key op literal      op: = != < > CONTAINS
    returns := "*" | VAR ("," VAR)*

Labels are the nine aspect names. Matching is homomorphism-based: two
variables may bind the same node. Measures take part as Why-aspect nodes
(their ``name`` is the metric name). Property lookup on an element falls
through from intrinsic fields to properties to logical attributes. Results
are every match, ordered by the tuple of bound ids, so output is
deterministic for a fixed graph.

``parse`` is pure; ``execute`` only reads the graph.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .errors import QuerySyntaxError, UnknownLabel, UnknownVariable
from .model import Aspect, Element, ElementId, Measure, name_key
from .store import TantraGraph

QueryLiteral = str | float | bool

ASPECT_LABELS = {a.value: a for a in Aspect}

_KEYWORDS = {"MATCH", "WHERE", "AND", "RETURN", "VIA", "CONTAINS", "TRUE", "FALSE"}


# --- AST ---


@dataclass(frozen=True)
class NodePattern:
    var: str | None = None
    label: str | None = None
    props: tuple[tuple[str, QueryLiteral], ...] = ()


@dataclass(frozen=True)
class EdgePattern:
    rel_type: str | None = None
    via: str | None = None


@dataclass(frozen=True)
class Predicate:
    var: str
    key: str
    op: str
    value: QueryLiteral


@dataclass(frozen=True)
class Query:
    nodes: tuple[NodePattern, ...]
    edges: tuple[EdgePattern, ...]
    where: tuple[Predicate, ...] = ()
    returns: tuple[str, ...] | None = None  # None means RETURN *

    @property
    def variables(self) -> tuple[str, ...]:
        return tuple(n.var for n in self.nodes if n.var is not None)


# --- tokenizer ---


@dataclass(frozen=True)
class _Token:
    kind: str
    text: str
    line: int
    column: int


_PUNCT = {
    "(": "LPAREN",
    ")": "RPAREN",
    "{": "LBRACE",
    "}": "RBRACE",
    ":": "COLON",
    ",": "COMMA",
    ".": "DOT",
    "*": "STAR",
}


def _tokenize(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    line, col, i = 1, 1, 0
    n = len(text)

    def err(expected: tuple[str, ...], found: str):
        raise QuerySyntaxError(line, col, expected, found)

    while i < n:
        c = text[i]
        if c == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if c.isspace():
            i += 1
            col += 1
            continue
        start_col = col
        if c in _PUNCT:
            tokens.append(_Token(_PUNCT[c], c, line, col))
            i += 1
            col += 1
            continue
        if text.startswith("-[", i):
            tokens.append(_Token("EDGE_OPEN", "-[", line, col))
            i += 2
            col += 2
            continue
        if text.startswith("]->", i):
            tokens.append(_Token("EDGE_CLOSE", "]->", line, col))
            i += 3
            col += 3
            continue
        if text.startswith("!=", i):
            tokens.append(_Token("OP", "!=", line, col))
            i += 2
            col += 2
            continue
        if c in "=<>":
            tokens.append(_Token("OP", c, line, col))
            i += 1
            col += 1
            continue
        if c == '"':
            j = i + 1
            out = []
            while j < n and text[j] != '"':
                if text[j] == "\\" and j + 1 < n:
                    esc = text[j + 1]
                    out.append({"n": "\n", "t": "\t", '"': '"', "\\": "\\"}.get(esc, esc))
                    j += 2
                else:
                    out.append(text[j])
                    j += 1
            if j >= n:
                col = start_col
                err(("closing quote",), "end of input")
            tokens.append(_Token("STRING", "".join(out), line, col))
            col += j + 1 - i
            i = j + 1
            continue
        if c.isdigit() or (c == "-" and i + 1 < n and text[i + 1].isdigit()):
            j = i + 1
            while j < n and (text[j].isdigit() or text[j] == "."):
                j += 1
            raw = text[i:j]
            try:
                value = float(raw)
            except ValueError:
                err(("number",), raw)
            tokens.append(_Token("NUMBER", raw, line, col))
            col += j - i
            i = j
            continue
        if c.isalpha() or c == "_":
            j = i + 1
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            word = text[i:j]
            kind = word if word in _KEYWORDS else "IDENT"
            tokens.append(_Token(kind, word, line, col))
            col += j - i
            i = j
            continue
        err(("a token",), c)
    tokens.append(_Token("EOF", "", line, col))
    return tokens


# --- parser ---


class _Parser:
    def __init__(self, tokens: list[_Token]):
        self.tokens = tokens
        self.pos = 0

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def take(self, *kinds: str) -> _Token:
        tok = self.peek()
        if tok.kind not in kinds:
            found = tok.text if tok.kind != "EOF" else "end of input"
            raise QuerySyntaxError(tok.line, tok.column, kinds, found)
        self.pos += 1
        return tok

    def at(self, *kinds: str) -> bool:
        return self.peek().kind in kinds

    def parse_query(self) -> Query:
        self.take("MATCH")
        nodes = [self.parse_node()]
        edges: list[EdgePattern] = []
        while self.at("EDGE_OPEN"):
            edges.append(self.parse_edge())
            nodes.append(self.parse_node())
        where: list[Predicate] = []
        if self.at("WHERE"):
            self.take("WHERE")
            where.append(self.parse_pred())
            while self.at("AND"):
                self.take("AND")
                where.append(self.parse_pred())
        self.take("RETURN")
        returns: tuple[str, ...] | None
        if self.at("STAR"):
            self.take("STAR")
            returns = None
        else:
            names = [self.take("IDENT").text]
            while self.at("COMMA"):
                self.take("COMMA")
                names.append(self.take("IDENT").text)
            returns = tuple(names)
        self.take("EOF")

        q = Query(tuple(nodes), tuple(edges), tuple(where), returns)
        seen: set[str] = set()
        for node in q.nodes:
            if node.var is not None:
                if node.var in seen:
                    tok = self.tokens[0]
                    raise QuerySyntaxError(
                        tok.line, tok.column, ("fresh variable name",), node.var
                    )
                seen.add(node.var)
        return q

    def parse_node(self) -> NodePattern:
        self.take("LPAREN")
        var = None
        label = None
        props: tuple[tuple[str, QueryLiteral], ...] = ()
        if self.at("IDENT"):
            var = self.take("IDENT").text
        if self.at("COLON"):
            self.take("COLON")
            label = self.take("IDENT").text
        if self.at("LBRACE"):
            props = self.parse_props()
        self.take("RPAREN")
        return NodePattern(var, label, props)

    def parse_edge(self) -> EdgePattern:
        self.take("EDGE_OPEN")
        rel_type = None
        via = None
        if self.at("COLON"):
            self.take("COLON")
            rel_type = self.take("IDENT").text
        if self.at("VIA"):
            self.take("VIA")
            via = self.take("STRING").text
        self.take("EDGE_CLOSE")
        return EdgePattern(rel_type, via)

    def parse_props(self) -> tuple[tuple[str, QueryLiteral], ...]:
        self.take("LBRACE")
        pairs = [self.parse_prop()]
        while self.at("COMMA"):
            self.take("COMMA")
            pairs.append(self.parse_prop())
        self.take("RBRACE")
        return tuple(pairs)

    def parse_prop(self) -> tuple[str, QueryLiteral]:
        key = self.take("IDENT").text
        self.take("COLON")
        return key, self.parse_literal()

    def parse_pred(self) -> Predicate:
        var = self.take("IDENT").text
        self.take("DOT")
        key = self.take("IDENT").text
        tok = self.take("OP", "CONTAINS")
        op = tok.text
        return Predicate(var, key, op, self.parse_literal())

    def parse_literal(self) -> QueryLiteral:
        tok = self.take("STRING", "NUMBER", "TRUE", "FALSE")
        if tok.kind == "STRING":
            return tok.text
        if tok.kind == "NUMBER":
            return float(tok.text)
        return tok.kind == "TRUE"


def parse(text: str) -> Query:
    """Parse query text into an AST; raises :class:`QuerySyntaxError`."""
    return _Parser(_tokenize(text)).parse_query()


def to_text(q: Query) -> str:
    """Canonical text form; ``parse(to_text(parse(t))) == parse(t)``."""
    parts = ["MATCH "]
    for i, node in enumerate(q.nodes):
        if i:
            parts.append(_edge_text(q.edges[i - 1]))
        parts.append(_node_text(node))
    if q.where:
        preds = " AND ".join(
            f"{p.var}.{p.key} {p.op} {_literal_text(p.value)}" for p in q.where
        )
        parts.append(f" WHERE {preds}")
    if q.returns is None:
        parts.append(" RETURN *")
    else:
        parts.append(" RETURN " + ", ".join(q.returns))
    return "".join(parts)


def _node_text(n: NodePattern) -> str:
    inner = n.var or ""
    if n.label:
        inner += f":{n.label}"
    if n.props:
        body = ", ".join(f"{k}: {_literal_text(v)}" for k, v in n.props)
        inner += (" " if inner else "") + "{" + body + "}"
    return f"({inner})"


def _edge_text(e: EdgePattern) -> str:
    inner = ""
    if e.rel_type:
        inner += f":{e.rel_type}"
    if e.via is not None:
        inner += (" " if inner else "") + f"VIA {json.dumps(e.via)}"
    return f"-[{inner}]->"


def _literal_text(v: QueryLiteral) -> str:
    if isinstance(v, bool):
        return "TRUE" if v else "FALSE"
    if isinstance(v, float):
        return str(int(v)) if v.is_integer() else repr(v)
    return json.dumps(v, ensure_ascii=False)


# --- execution ---


@dataclass(frozen=True)
class Match:
    """One subgraph match: node ids in pattern order, edge ids between them."""

    node_ids: tuple[ElementId, ...]
    edge_ids: tuple[ElementId, ...]


@dataclass(frozen=True)
class ResultTable:
    columns: tuple[str, ...]
    rows: tuple[tuple[ElementId, ...], ...] = field(hash=False, default=())

    def to_tsv(self) -> str:
        lines = ["\t".join(self.columns)]
        lines.extend("\t".join(row) for row in self.rows)
        return "\n".join(lines) + "\n"


def _node_universe(g: TantraGraph, label: str | None):
    if label is not None:
        if label not in ASPECT_LABELS:
            raise UnknownLabel(f"{label!r} is not one of the nine aspects")
        aspect = ASPECT_LABELS[label]
        nodes = [g.elements[i] for i in sorted(g.index_by_aspect[aspect])]
        if aspect is Aspect.WHY:
            nodes.extend(m for _, m in sorted(g.measures.items()))
        return nodes
    out = [g.elements[i] for i in sorted(g.elements)]
    out.extend(m for _, m in sorted(g.measures.items()))
    return out


def node_get(node: Element | Measure, key: str):
    """Uniform property access for elements and measures."""
    if isinstance(node, Measure):
        intrinsic = {
            "id": node.id,
            "name": node.metric_name,
            "metric_name": node.metric_name,
            "value": node.value,
            "unit": node.unit,
            "subject": node.subject,
            "at_event": node.at_event,
            "aspect": node.aspect.value,
        }
        return intrinsic.get(key)
    intrinsic = {
        "id": node.id,
        "name": node.name,
        "scope": node.scope,
        "definition": node.definition,
        "aspect": node.aspect.value,
        "perspective": node.perspective.value,
        "sub_ecosystem": None if node.sub_ecosystem is None else node.sub_ecosystem.value,
    }
    if key in intrinsic:
        return intrinsic[key]
    if key in node.properties:
        return node.properties[key]
    return node.logical_attrs.get(key)


def _values_equal(actual, wanted: QueryLiteral) -> bool:
    if actual is None:
        return False
    if isinstance(wanted, bool) or isinstance(actual, bool):
        return actual is wanted
    if isinstance(wanted, float) and isinstance(actual, (int, float)):
        return float(actual) == wanted
    return actual == wanted


def _node_matches(g: TantraGraph, node, pattern: NodePattern) -> bool:
    if pattern.label is not None and node.aspect is not ASPECT_LABELS[pattern.label]:
        return False
    for key, wanted in pattern.props:
        if not _values_equal(node_get(node, key), wanted):
            return False
    return True


def _edge_matches(g: TantraGraph, rel, pattern: EdgePattern) -> bool:
    if pattern.rel_type is not None and rel.rel_type != pattern.rel_type:
        return False
    if pattern.via is not None:
        if rel.relator is None:
            return False
        relator = g.elements.get(rel.relator)
        if relator is None or name_key(relator.name) != name_key(pattern.via):
            return False
    return True


def find_matches(g: TantraGraph, q: Query) -> list[Match]:
    """Enumerate every homomorphic match of the pattern, sorted by ids."""
    first = [n for n in _node_universe(g, q.nodes[0].label) if _node_matches(g, n, q.nodes[0])]
    # Validate remaining labels up front so an unmatchable head still errors.
    for node in q.nodes[1:]:
        if node.label is not None and node.label not in ASPECT_LABELS:
            raise UnknownLabel(f"{node.label!r} is not one of the nine aspects")

    matches: list[Match] = []

    def extend(idx: int, node_ids: list[ElementId], edge_ids: list[ElementId]):
        if idx == len(q.nodes):
            matches.append(Match(tuple(node_ids), tuple(edge_ids)))
            return
        pattern = q.nodes[idx]
        edge_pat = q.edges[idx - 1]
        for rel in g.relationships_from(node_ids[-1]):
            if not _edge_matches(g, rel, edge_pat):
                continue
            target = g.elements.get(rel.target)
            if target is None or not _node_matches(g, target, pattern):
                continue
            node_ids.append(target.id)
            edge_ids.append(rel.id)
            extend(idx + 1, node_ids, edge_ids)
            node_ids.pop()
            edge_ids.pop()

    for head in first:
        extend(1, [head.id], [])
    matches.sort(key=lambda m: m.node_ids)
    return matches


def execute(g: TantraGraph, q: Query) -> ResultTable:
    """Run a query, returning bindings for the requested variables."""
    var_slots: dict[str, int] = {}
    for i, node in enumerate(q.nodes):
        if node.var is not None:
            var_slots[node.var] = i
    for pred in q.where:
        if pred.var not in var_slots:
            raise UnknownVariable(f"WHERE references unbound variable {pred.var!r}")
    columns = tuple(sorted(var_slots)) if q.returns is None else q.returns
    for name in columns:
        if name not in var_slots:
            raise UnknownVariable(f"RETURN references unbound variable {name!r}")

    def node_of(m: Match, slot: int):
        nid = m.node_ids[slot]
        return g.elements.get(nid) or g.measures[nid]

    rows: list[tuple[ElementId, ...]] = []
    for m in find_matches(g, q):
        ok = True
        for pred in q.where:
            actual = node_get(node_of(m, var_slots[pred.var]), pred.key)
            if not _apply_op(actual, pred.op, pred.value):
                ok = False
                break
        if ok:
            rows.append(tuple(m.node_ids[var_slots[v]] for v in columns))
    return ResultTable(columns, tuple(rows))


def _apply_op(actual, op: str, wanted: QueryLiteral) -> bool:
    if actual is None:
        return False
    if op == "=":
        return _values_equal(actual, wanted)
    if op == "!=":
        return not _values_equal(actual, wanted)
    if op == "CONTAINS":
        return isinstance(actual, str) and isinstance(wanted, str) and wanted in actual
    if op in ("<", ">"):
        try:
            if isinstance(actual, bool) or isinstance(wanted, bool):
                return False
            result = actual < wanted if op == "<" else actual > wanted
        except TypeError:
            return False
        return bool(result)
    raise AssertionError(f"unreachable operator {op}")
