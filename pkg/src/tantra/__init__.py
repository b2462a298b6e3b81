"""Ontology-driven knowledge-graph engine.

Elements live on a nine-aspect by five-level matrix, relationships may be
mediated by relator institutions, quantities are measures under the Why
aspect, and the normative loop (goals, interventions, separations) is
evaluated on top of the same graph. A bundled agricultural-ecosystem
dataset exercises the whole surface; see :mod:`tantra.dataset`.
"""

from .errors import TantraError
from .model import (
    Aspect,
    Element,
    ElementId,
    IdIssuer,
    Measure,
    Perspective,
    Relationship,
    SchemaConfig,
    SeparationKind,
    SubEcosystem,
    canonical_name,
    new_element,
    promote,
)
from .store import TantraGraph, load, save
from .validation import SchemaPolicy, ValidationReport, default_policy, matrix_coverage, validate
from .metrics import (
    GoalRecord,
    MetricBinding,
    MetricsConfig,
    SeparationAssessment,
    default_config,
    goal_eval,
    phenomena_report,
    reification_entropy,
    separation_score,
)
from .toc import (
    ChangeMarker,
    InterventionRecord,
    backward_chain,
    evaluate_intervention,
    get_intervention,
    register_intervention,
)
from .query import Query, execute, parse, to_text
from .export import export_dot, export_graphml
from .dataset import IngestMapping, build_agri_dataset, ingest_csv

__all__ = [
    "Aspect",
    "ChangeMarker",
    "Element",
    "ElementId",
    "GoalRecord",
    "IdIssuer",
    "IngestMapping",
    "InterventionRecord",
    "Measure",
    "MetricBinding",
    "MetricsConfig",
    "Perspective",
    "Query",
    "Relationship",
    "SchemaConfig",
    "SchemaPolicy",
    "SeparationAssessment",
    "SeparationKind",
    "SubEcosystem",
    "TantraError",
    "TantraGraph",
    "ValidationReport",
    "backward_chain",
    "build_agri_dataset",
    "canonical_name",
    "default_config",
    "default_policy",
    "evaluate_intervention",
    "execute",
    "export_dot",
    "export_graphml",
    "get_intervention",
    "goal_eval",
    "ingest_csv",
    "load",
    "matrix_coverage",
    "new_element",
    "parse",
    "phenomena_report",
    "promote",
    "register_intervention",
    "reification_entropy",
    "save",
    "separation_score",
    "to_text",
    "validate",
]
