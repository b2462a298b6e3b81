"""Analyst report: delimited tables plus rendered figures.

``write_report`` drops a small dossier into a directory: the coverage
matrix and per-aspect entropy as TSV files, the same two as PNG charts, and
knowledge-graph drawings of the headline subgraphs (participant roles, farm
types, the MSP crop grouping, the measure vocabulary). Figures use the
Agg backend so the function is safe on headless machines.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import networkx as nx

from .dataset import FARM_PARENT, MEASURE_PARENT, MSP_GROUP
from .export import ASPECT_STYLE
from .metrics import reification_entropy
from .model import Aspect, ElementId, Perspective
from .store import TantraGraph
from .validation import matrix_coverage

_LAYOUT_SEED = 7


def write_report(g: TantraGraph, out_dir) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []

    mc = matrix_coverage(g)
    written.append(_write_text(out / "matrix_coverage.tsv", mc.to_tsv()))
    written.append(_matrix_figure(mc, out / "matrix_coverage.png"))

    entropy = {
        a: reification_entropy(g, a) for a in Aspect if g.index_by_aspect[a]
    }
    lines = ["aspect\tentropy_bits"]
    lines += [f"{a.value}\t{h:.6f}" for a, h in entropy.items()]
    written.append(_write_text(out / "entropy.tsv", "\n".join(lines) + "\n"))
    written.append(_entropy_figure(entropy, out / "entropy.png"))

    for stem, nodes, edges in _headline_subgraphs(g):
        written.append(_graph_figure(g, nodes, edges, out / f"{stem}.png"))
    return written


def _write_text(path: Path, text: str) -> Path:
    path.write_text(text, encoding="utf-8")
    return path


def _matrix_figure(mc, path: Path) -> Path:
    grid = [[mc.cell(a, p) for p in Perspective] for a in Aspect]
    fig, ax = plt.subplots(figsize=(7, 5))
    im = ax.imshow(grid, cmap="YlGn")
    ax.set_xticks(range(len(Perspective)), [p.value for p in Perspective], rotation=30, ha="right")
    ax.set_yticks(range(len(Aspect)), [a.value for a in Aspect])
    for i, row in enumerate(grid):
        for j, v in enumerate(row):
            ax.text(j, i, str(v), ha="center", va="center", fontsize=8)
    ax.set_title("Elements per aspect and reification level")
    fig.colorbar(im, ax=ax, shrink=0.8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def _entropy_figure(entropy: dict, path: Path) -> Path:
    fig, ax = plt.subplots(figsize=(7, 4))
    labels = [a.value for a in entropy]
    values = [entropy[a] for a in entropy]
    ax.bar(labels, values, color="#6c8ebf")
    ax.set_ylabel("entropy (bits)")
    ax.set_ylim(0, 2.4)
    ax.axhline(2.321928, linestyle="--", linewidth=1, color="#999999")
    ax.set_title("Reification entropy per aspect (dashed: uniform bound)")
    plt.setp(ax.get_xticklabels(), rotation=30, ha="right")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def _headline_subgraphs(g: TantraGraph):
    """(stem, node ids, relationship ids) for the four headline drawings."""
    who = set(g.index_by_aspect[Aspect.WHO])
    who_edges = {
        r.id
        for r in g.relationships.values()
        if r.source in who and r.target in who
    }
    yield "who_roles", who, who_edges

    for stem, parent_name, aspect, rel_type in (
        ("farm_types", FARM_PARENT, Aspect.WHAT, "IS_A"),
        ("msp_crops", MSP_GROUP, Aspect.WHAT, "UNDER_MSP"),
        ("measures", MEASURE_PARENT, Aspect.WHY, "IS_A"),
    ):
        parents = g.find_by_name(parent_name, aspect)
        if not parents:
            continue
        pid = parents[0].id
        edges = {
            r.id
            for r in g.relationships.values()
            if r.rel_type == rel_type and r.target == pid
        }
        nodes = {pid} | {g.relationships[r].source for r in edges}
        yield stem, nodes, edges


def _graph_figure(g: TantraGraph, node_ids: set[ElementId], edge_ids: set, path: Path) -> Path:
    nxg = nx.DiGraph()
    colors = []
    labels = {}
    for nid in sorted(node_ids):
        e = g.elements[nid]
        nxg.add_node(nid)
        colors.append(ASPECT_STYLE[e.aspect][1])
        labels[nid] = e.name
    edge_labels = {}
    for rid in sorted(edge_ids):
        r = g.relationships[rid]
        nxg.add_edge(r.source, r.target)
        edge_labels[(r.source, r.target)] = r.rel_type
    pos = nx.spring_layout(nxg, seed=_LAYOUT_SEED)
    fig, ax = plt.subplots(figsize=(9, 7))
    nx.draw_networkx_nodes(nxg, pos, ax=ax, node_color=colors, node_size=900, edgecolors="#555555")
    nx.draw_networkx_edges(nxg, pos, ax=ax, arrows=True, edge_color="#777777")
    nx.draw_networkx_labels(nxg, pos, labels, ax=ax, font_size=7)
    if len(edge_labels) <= 24:
        nx.draw_networkx_edge_labels(nxg, pos, edge_labels, ax=ax, font_size=6)
    ax.axis("off")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
