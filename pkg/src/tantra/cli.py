"""Command-line surface.

Data goes to stdout, diagnostics to stderr, so output can be golden-file
tested. Exit codes: 0 success, 1 validation or domain failure, 2 usage or
parse error, 3 I/O failure.

The graph path resolves in order: ``--graph`` flag, config file, the
``TANTRA_GRAPH`` environment variable, then ``tantra_graph.jsonl``.
"""

from __future__ import annotations

import json
import os
import sys
from dataclasses import dataclass
from pathlib import Path

import click

from . import dataset, export, metrics, store, toc, validation
from .errors import (
    BadMapping,
    IoFailure,
    MalformedRecord,
    QuerySyntaxError,
    TantraError,
    UnknownLabel,
    UnknownVariable,
)
from .model import Aspect, SeparationKind
from .query import execute, parse

DEFAULT_GRAPH = "tantra_graph.jsonl"

_USAGE_ERRORS = (QuerySyntaxError, UnknownLabel, UnknownVariable, BadMapping)
_IO_ERRORS = (IoFailure, MalformedRecord)


@dataclass
class CliConfig:
    graph: str
    metrics_config: str | None = None
    policy: str | None = None
    out_format: str = "tsv"


def _load_config_file(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            obj = json.load(fh)
    except OSError as exc:
        raise IoFailure(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise BadMapping(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise BadMapping(f"config {path} must hold a JSON object")
    return obj


def _resolve(ctx_params: dict, config_path: str | None) -> CliConfig:
    file_cfg = _load_config_file(config_path)
    graph = (
        ctx_params.get("graph")
        or file_cfg.get("graph")
        or os.environ.get("TANTRA_GRAPH")
        or DEFAULT_GRAPH
    )
    return CliConfig(
        graph=graph,
        metrics_config=ctx_params.get("metrics_config") or file_cfg.get("metrics_config"),
        policy=ctx_params.get("policy") or file_cfg.get("policy"),
        out_format=ctx_params.get("out_format") or file_cfg.get("format") or "tsv",
    )


def _die(exc: Exception) -> None:
    click.echo(str(exc), err=True)
    if isinstance(exc, _USAGE_ERRORS):
        sys.exit(2)
    if isinstance(exc, _IO_ERRORS) or isinstance(exc, OSError):
        sys.exit(3)
    sys.exit(1)


def _open_graph(cfg: CliConfig) -> store.TantraGraph:
    return store.load(cfg.graph)


def _metrics_config(cfg: CliConfig) -> metrics.MetricsConfig:
    if cfg.metrics_config:
        return metrics.load_config(cfg.metrics_config)
    return metrics.default_config()


def _policy(cfg: CliConfig) -> validation.SchemaPolicy:
    if cfg.policy:
        return validation.load_policy(cfg.policy)
    return validation.default_policy()


def _event_id(g: store.TantraGraph, token: str) -> str:
    """Accept a When element by id or by unique name."""
    if token in g.elements:
        return token
    hits = g.find_by_name(token, Aspect.WHEN)
    if len(hits) == 1:
        return hits[0].id
    return token  # let the domain layer produce the precise error


@click.group()
@click.option("--graph", type=str, default=None, help="Graph file path.")
@click.option("--config", "config_path", type=str, default=None, help="JSON config file.")
@click.option("--metrics-config", type=str, default=None, help="Metrics config (JSON lines).")
@click.option("--policy", type=str, default=None, help="Schema policy (JSON lines).")
@click.pass_context
def main(ctx, graph, config_path, metrics_config, policy):
    """Knowledge-graph engine: build, validate, query, measure, evaluate."""
    try:
        ctx.obj = _resolve(
            {"graph": graph, "metrics_config": metrics_config, "policy": policy},
            config_path,
        )
    except TantraError as exc:
        _die(exc)


@main.command()
@click.option("--demo", is_flag=True, help="Write the bundled agricultural dataset.")
@click.pass_obj
def init(cfg: CliConfig, demo):
    """Create a graph file."""
    try:
        g = dataset.build_agri_dataset() if demo else store.TantraGraph()
        n = g.save(cfg.graph)
        click.echo(f"wrote {n} bytes to {cfg.graph}", err=True)
    except TantraError as exc:
        _die(exc)


@main.command()
@click.pass_obj
def validate(cfg: CliConfig):
    """Check the graph against the schema policy; exit 1 on violations."""
    try:
        g = _open_graph(cfg)
        report = validation.validate(g, _policy(cfg))
    except TantraError as exc:
        _die(exc)
    click.echo(report.to_jsonl(), nl=False)
    sys.exit(0 if report.ok else 1)


@main.command()
@click.argument("text")
@click.pass_obj
def query(cfg: CliConfig, text):
    """Run a MATCH query and print the bindings table."""
    try:
        g = _open_graph(cfg)
        table = execute(g, parse(text))
    except TantraError as exc:
        _die(exc)
    click.echo(table.to_tsv(), nl=False)


@main.command(name="export")
@click.option("--format", "fmt", type=click.Choice(["dot", "graphml"]), required=True)
@click.option("--query", "query_text", type=str, default=None)
@click.pass_obj
def export_cmd(cfg: CliConfig, fmt, query_text):
    """Write a DOT or GraphML document to stdout."""
    try:
        g = _open_graph(cfg)
        selection = parse(query_text) if query_text else None
        doc = export.export_dot(g, selection) if fmt == "dot" else export.export_graphml(g, selection)
    except TantraError as exc:
        _die(exc)
    click.echo(doc, nl=False)


@main.group(name="metrics")
def metrics_group():
    """Quantitative reports (TSV)."""


@metrics_group.command()
@click.option("--aspect", required=True, type=click.Choice([a.value for a in Aspect]))
@click.pass_obj
def entropy(cfg: CliConfig, aspect):
    """Reification entropy of one aspect, in bits."""
    try:
        g = _open_graph(cfg)
        h = metrics.reification_entropy(g, Aspect(aspect))
    except TantraError as exc:
        _die(exc)
    click.echo("aspect\tentropy_bits")
    click.echo(f"{aspect}\t{h:.6f}")


@metrics_group.command()
@click.option("--kind", required=True, type=click.Choice([k.value for k in SeparationKind]))
@click.option("--from", "group_a", required=True, type=str)
@click.option("--to", "group_b", required=True, type=str)
@click.pass_obj
def separation(cfg: CliConfig, kind, group_a, group_b):
    """Score one separation kind between two named groups."""
    try:
        g = _open_graph(cfg)
        sa = metrics.separation_score(
            g, SeparationKind(kind), group_a, group_b, _metrics_config(cfg)
        )
    except TantraError as exc:
        _die(exc)
    click.echo("kind\tfrom\tto\tscore\tevidence")
    click.echo(f"{kind}\t{group_a}\t{group_b}\t{sa.score:.6f}\t{len(sa.evidence)}")


@metrics_group.command()
@click.option("--file", "goals_file", required=True, type=str)
@click.option("--at", "at_event", type=str, default=None)
@click.pass_obj
def goals(cfg: CliConfig, goals_file, at_event):
    """Evaluate goal records from a JSON-lines file."""
    try:
        g = _open_graph(cfg)
        mcfg = _metrics_config(cfg)
        records = metrics.load_goals(goals_file)
        event = _event_id(g, at_event) if at_event else None
        rows = []
        for goal in records:
            for res in metrics.goal_eval(g, goal, event, mcfg):
                rows.append((goal.ecosystem.value, goal.statement, res))
    except TantraError as exc:
        _die(exc)
    click.echo("ecosystem\tstatement\tmetric\tobserved\ttarget\tdirection\tmet")
    for eco, statement, res in rows:
        target = "" if res.target is None else f"{res.target:g}"
        met = "" if res.met is None else str(res.met).lower()
        click.echo(
            f"{eco}\t{statement}\t{res.metric_name}\t{res.observed:g}\t{target}"
            f"\t{res.direction}\t{met}"
        )


@metrics_group.command()
@click.option("--baseline", required=True, type=str)
@click.option("--followup", required=True, type=str)
@click.pass_obj
def phenomena(cfg: CliConfig, baseline, followup):
    """Change-marker deltas per ecosystem phenomenon across a window."""
    try:
        g = _open_graph(cfg)
        rows = metrics.phenomena_report(
            g, (_event_id(g, baseline), _event_id(g, followup)), _metrics_config(cfg)
        )
    except TantraError as exc:
        _die(exc)
    click.echo(metrics.deltas_to_tsv(rows), nl=False)


@main.group(name="toc")
def toc_group():
    """Theory-of-change intervention ledger."""


@toc_group.command()
@click.option("--file", "record_file", required=True, type=str)
@click.pass_obj
def register(cfg: CliConfig, record_file):
    """Register an intervention record (JSON) and print its id."""
    try:
        g = _open_graph(cfg)
        with open(record_file, "r", encoding="utf-8") as fh:
            rec = toc.record_from_json(fh.read())
        iid = toc.register_intervention(g, rec)
        g.save(cfg.graph)
    except OSError as exc:
        _die(IoFailure(str(exc)))
    except (TantraError, KeyError, json.JSONDecodeError) as exc:
        _die(exc if isinstance(exc, TantraError) else BadMapping(str(exc)))
    click.echo(iid)


@toc_group.command(name="eval")
@click.option("--id", "iid", required=True, type=str)
@click.option("--baseline", required=True, type=str)
@click.option("--followup", required=True, type=str)
@click.pass_obj
def eval_cmd(cfg: CliConfig, iid, baseline, followup):
    """Report marker values and deltas between two events."""
    try:
        g = _open_graph(cfg)
        outcomes = toc.evaluate_intervention(
            g, iid, _event_id(g, baseline), _event_id(g, followup), _metrics_config(cfg)
        )
    except TantraError as exc:
        _die(exc)
    click.echo("metric\tbaseline\tfollowup\tdelta\tdirection")
    for o in outcomes:
        click.echo(f"{o.metric_name}\t{o.baseline:g}\t{o.followup:g}\t{o.delta:+g}\t{o.direction}")


@toc_group.command()
@click.option("--id", "iid", required=True, type=str)
@click.pass_obj
def chain(cfg: CliConfig, iid):
    """Walk the intervention logic backward and flag gaps."""
    try:
        g = _open_graph(cfg)
        report = toc.backward_chain(g, iid)
    except TantraError as exc:
        _die(exc)
    click.echo("field\tvalue")
    click.echo(f"overall_goal\t{report.overall_goal}")
    click.echo(f"change_process\t{report.change_process}")
    for item in report.inputs:
        click.echo(f"input\t{item}")
    for item in report.unsupported_assumptions:
        click.echo(f"unsupported_assumption\t{item}")
    for actor in report.disconnected_actors:
        click.echo(f"disconnected_actor\t{actor}")
    click.echo(f"flags\t{report.flags}")


@main.command()
@click.option("--out-dir", required=True, type=str)
@click.pass_obj
def report(cfg: CliConfig, out_dir):
    """Render TSV tables and PNG figures into a directory."""
    from . import report as report_mod

    try:
        g = _open_graph(cfg)
        written = report_mod.write_report(g, out_dir)
    except TantraError as exc:
        _die(exc)
    for path in written:
        click.echo(str(path))


if __name__ == "__main__":
    main()
