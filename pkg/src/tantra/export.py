"""Render a graph, or a query selection of it, as DOT or GraphML.

Node labels are element names; shape and fill color are keyed by aspect.
A relator-mediated relationship is drawn through its relator: one edge from
the source into the relator node, a second from the relator to the target,
so the mediating institution is visible in the picture. Measures appear as
note-shaped nodes tied to their subject.

Output is byte-deterministic for a fixed graph: nodes and edges are emitted
in sorted id order and all attributes are written in a fixed sequence.
"""

from __future__ import annotations

import json
from xml.etree import ElementTree as ET

from .model import Aspect, Measure, Perspective
from .query import Query, find_matches
from .store import TantraGraph

# DOT shape and fill per aspect; GraphML carries the aspect name instead.
ASPECT_STYLE: dict[Aspect, tuple[str, str]] = {
    Aspect.WHO: ("ellipse", "#aed6f1"),
    Aspect.WHERE: ("house", "#a9dfbf"),
    Aspect.WHAT: ("box", "#f9e79b"),
    Aspect.WHEN: ("trapezium", "#f5cba7"),
    Aspect.HOW: ("hexagon", "#d7bde2"),
    Aspect.WHY: ("diamond", "#f5b7b1"),
    Aspect.RELATIONSHIPS: ("parallelogram", "#d5dbdb"),
    Aspect.RELATORS: ("octagon", "#fadbd8"),
    Aspect.SEPARATIONS: ("doubleoctagon", "#e6b0aa"),
}

MEASURE_SHAPE = ("note", "#fdebd0")


def _selection(g: TantraGraph, query: Query | None):
    """Resolve the node/edge id sets to export."""
    if query is None:
        return set(g.elements) | set(g.measures), set(g.relationships)
    node_ids: set[str] = set()
    edge_ids: set[str] = set()
    for m in find_matches(g, query):
        node_ids.update(m.node_ids)
        edge_ids.update(m.edge_ids)
    # Mediating relators must appear for the edges we draw.
    for rid in edge_ids:
        rel = g.relationships[rid]
        if rel.relator is not None:
            node_ids.add(rel.relator)
    return node_ids, edge_ids


def export_dot(g: TantraGraph, query: Query | None = None) -> str:
    node_ids, edge_ids = _selection(g, query)
    lines = ["digraph tantra {", "  rankdir=LR;", '  node [style="filled"];']
    for nid in sorted(node_ids):
        if nid in g.elements:
            e = g.elements[nid]
            shape, color = ASPECT_STYLE[e.aspect]
            label = e.name
        else:
            m = g.measures[nid]
            shape, color = MEASURE_SHAPE
            label = f"{m.metric_name} = {m.value:g} {m.unit}"
        lines.append(
            f'  "{nid}" [label={json.dumps(label, ensure_ascii=False)}, '
            f'shape="{shape}", fillcolor="{color}"];'
        )
    for rid in sorted(edge_ids):
        r = g.relationships[rid]
        label = json.dumps(r.rel_type, ensure_ascii=False)
        if r.relator is not None and r.relator in node_ids:
            lines.append(f'  "{r.source}" -> "{r.relator}" [label={label}, style="dashed", arrowhead="none"];')
            lines.append(f'  "{r.relator}" -> "{r.target}" [style="dashed"];')
        else:
            lines.append(f'  "{r.source}" -> "{r.target}" [label={label}];')
    for nid in sorted(node_ids):
        if nid in g.measures:
            m = g.measures[nid]
            if m.subject in node_ids:
                lines.append(f'  "{m.subject}" -> "{nid}" [style="dotted", arrowhead="none"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


_GRAPHML_NS = "http://graphml.graphdrawing.org/xmlns"

_NODE_KEYS = ("aspect", "perspective", "name")
_EDGE_KEYS = ("rel_type", "relator")


def export_graphml(g: TantraGraph, query: Query | None = None) -> str:
    node_ids, edge_ids = _selection(g, query)
    root = ET.Element("graphml", xmlns=_GRAPHML_NS)
    for i, key in enumerate(_NODE_KEYS):
        ET.SubElement(
            root, "key", id=f"d{i}", **{"for": "node"},
            **{"attr.name": key, "attr.type": "string"},
        )
    for i, key in enumerate(_EDGE_KEYS, start=len(_NODE_KEYS)):
        ET.SubElement(
            root, "key", id=f"d{i}", **{"for": "edge"},
            **{"attr.name": key, "attr.type": "string"},
        )
    graph = ET.SubElement(root, "graph", id="tantra", edgedefault="directed")

    def put(parent, key_id: str, value: str):
        d = ET.SubElement(parent, "data", key=key_id)
        d.text = value

    for nid in sorted(node_ids):
        node = ET.SubElement(graph, "node", id=nid)
        if nid in g.elements:
            e = g.elements[nid]
            put(node, "d0", e.aspect.value)
            put(node, "d1", e.perspective.value)
            put(node, "d2", e.name)
        else:
            m = g.measures[nid]
            put(node, "d0", Aspect.WHY.value)
            put(node, "d1", Perspective.INSTANTIATED.value)
            put(node, "d2", m.metric_name)
    for rid in sorted(edge_ids):
        r = g.relationships[rid]
        edge = ET.SubElement(graph, "edge", id=rid, source=r.source, target=r.target)
        put(edge, "d3", r.rel_type)
        put(edge, "d4", "" if r.relator is None else r.relator)
    for nid in sorted(node_ids):
        if nid in g.measures:
            m = g.measures[nid]
            if m.subject in node_ids:
                edge = ET.SubElement(
                    graph, "edge", id=f"{nid}-subject", source=m.subject, target=nid
                )
                put(edge, "d3", "MEASURES")
                put(edge, "d4", "")
    ET.indent(root)
    return ET.tostring(root, encoding="unicode", xml_declaration=False) + "\n"
