import dataclasses
import random

import pytest

from helpers import random_graph
from tantra.dataset import build_agri_dataset
from tantra.model import Aspect, Perspective
from tantra.store import TantraGraph
from tantra.validation import (
    MatrixCoverage,
    SchemaPolicy,
    default_policy,
    load_policy,
    matrix_coverage,
    policy_to_jsonl,
    validate,
)


def _codes(report):
    return [v.code for v in report.violations]


def test_empty_graph_reports_nine_missing_aspects():
    report = validate(TantraGraph(), SchemaPolicy(required_aspects=frozenset(Aspect)))
    assert _codes(report) == ["MISSING_ASPECT"] * 9


def test_relator_required_for_mediated_type():
    g = TantraGraph()
    a = g.create_element(Aspect.WHO, "Beneficiary", "s")
    b = g.create_element(Aspect.WHAT, "Income Support", "s")
    g.connect("RECEIVES_BENEFIT", a.id, b.id)
    report = validate(g, SchemaPolicy(required_aspects=frozenset()))
    assert _codes(report) == ["RELATOR_REQUIRED"]


def test_numeric_property_flagged_outside_why():
    g = TantraGraph()
    e = g.create_element(Aspect.WHO, "Farmer", "s")
    g.replace_element(dataclasses.replace(e, properties={"acreage": 2.5}))
    report = validate(g, SchemaPolicy(required_aspects=frozenset()))
    assert "NUMERIC_ON_NON_WHY" in _codes(report)
    # bool and date are flags/timestamps, not quantities
    g2 = TantraGraph()
    e2 = g2.create_element(Aspect.WHO, "Farmer", "s")
    g2.replace_element(dataclasses.replace(e2, properties={"active": True}))
    assert "NUMERIC_ON_NON_WHY" not in _codes(validate(g2, SchemaPolicy(required_aspects=frozenset())))


def test_numeric_property_allowed_on_why():
    g = TantraGraph()
    e = g.create_element(Aspect.WHY, "Yield", "s")
    g.replace_element(dataclasses.replace(e, properties={"scale": 1.0}))
    assert "NUMERIC_ON_NON_WHY" not in _codes(validate(g, SchemaPolicy(required_aspects=frozenset())))


def test_duplicate_names_per_aspect_only():
    g = TantraGraph()
    g.create_element(Aspect.RELATORS, "Mandi", "s")
    g.create_element(Aspect.WHERE, "Mandi", "s")  # legitimate cross-aspect reuse
    report = validate(g, SchemaPolicy(required_aspects=frozenset()))
    assert "DUP_NAME" not in _codes(report)
    g.create_element(Aspect.WHERE, "  mandi ", "s")  # canonical duplicate
    report = validate(g, SchemaPolicy(required_aspects=frozenset()))
    assert _codes(report).count("DUP_NAME") == 1


def test_incomplete_payload_detected():
    g = TantraGraph()
    e = g.create_element(Aspect.WHO, "Farmer", "s")
    g.replace_element(dataclasses.replace(e, perspective=Perspective.LOGICAL))
    report = validate(g, SchemaPolicy(required_aspects=frozenset()))
    assert "INCOMPLETE_PAYLOAD" in _codes(report)


def test_dangling_logical_attr_detected():
    g = TantraGraph()
    e = g.create_element(Aspect.WHO, "Farmer", "s")
    g.replace_element(dataclasses.replace(e, logical_attrs={"ref": "WHT-000042"}))
    report = validate(g, SchemaPolicy(required_aspects=frozenset()))
    assert "DANGLING_REF" in _codes(report)


def test_rel_type_allow_list():
    g = TantraGraph()
    a = g.create_element(Aspect.WHO, "A", "s")
    b = g.create_element(Aspect.WHO, "B", "s")
    g.connect("UNUSUAL", a.id, b.id)
    policy = SchemaPolicy(
        relator_mediated_types=frozenset(),
        allowed_rel_types=frozenset({"SELLS_TO"}),
        required_aspects=frozenset(),
    )
    assert _codes(validate(g, policy)) == ["REL_TYPE_NOT_ALLOWED"]


def test_policy_invariant_mediated_subset_of_allowed():
    with pytest.raises(ValueError):
        SchemaPolicy(
            relator_mediated_types=frozenset({"SELLS_AT"}),
            allowed_rel_types=frozenset({"SELLS_TO"}),
        )


def test_matrix_counts_and_sums():
    g = TantraGraph()
    assert matrix_coverage(g).total() == 0
    g.create_element(Aspect.WHO, "Farmer", "s")
    mc = matrix_coverage(g)
    assert mc.cell(Aspect.WHO, Perspective.CONTEXTUAL) == 1
    assert mc.total() == 1
    assert mc.row_total(Aspect.WHO) == 1
    assert mc.column_total(Perspective.CONTEXTUAL) == 1


def test_matrix_sum_equals_element_count_random():
    rng = random.Random(17)
    for _ in range(25):
        g = random_graph(rng)
        assert matrix_coverage(g).total() == len(g.elements)


def test_validate_is_pure(demo_graph):
    r1 = validate(demo_graph)
    r2 = validate(demo_graph)
    assert r1 == r2


def test_report_jsonl_shape(demo_graph):
    text = validate(demo_graph).to_jsonl()
    lines = text.strip().split("\n")
    assert '"format":"tantra-validation"' in lines[0]
    assert '"rec":"matrix"' in lines[-1]


def test_policy_file_round_trip(tmp_path):
    policy = SchemaPolicy(
        relator_mediated_types=frozenset({"FINANCED_BY"}),
        allowed_rel_types=frozenset({"FINANCED_BY", "SELLS_TO"}),
        required_aspects=frozenset({Aspect.WHO, Aspect.WHY}),
    )
    p = tmp_path / "policy.jsonl"
    p.write_text(policy_to_jsonl(policy))
    assert load_policy(p) == policy


# --- mutation testing over the bundled dataset: each injected defect is
# caught with its own code, and only that defect is reported ---


def test_pristine_dataset_validates_clean(demo_graph):
    report = validate(demo_graph, default_policy())
    assert report.violations == ()


def test_mutation_dropped_relator_detected(demo_copy):
    g = demo_copy
    rid, rel = next(
        (rid, r) for rid, r in sorted(g.relationships.items())
        if r.rel_type == "FINANCED_BY"
    )
    g.remove_relationship(rid)
    g.insert_relationship(dataclasses.replace(rel, relator=None))
    report = validate(g, default_policy())
    assert _codes(report) == ["RELATOR_REQUIRED"]
    assert report.violations[0].subjects == (rid,)


def test_mutation_numeric_on_who_detected(demo_copy):
    g = demo_copy
    eid = sorted(g.index_by_aspect[Aspect.WHO])[0]
    e = g.elements[eid]
    g.replace_element(dataclasses.replace(e, properties={**e.properties, "count": 3.0}))
    report = validate(g, default_policy())
    assert _codes(report) == ["NUMERIC_ON_NON_WHY"]


def test_mutation_duplicate_name_detected(demo_copy):
    g = demo_copy
    eid = sorted(g.index_by_aspect[Aspect.WHO])[0]
    clone = g.create_element(Aspect.WHO, g.elements[eid].name, "s")
    report = validate(g, default_policy())
    codes = _codes(report)
    assert "DUP_NAME" in codes
    dup = next(v for v in report.violations if v.code == "DUP_NAME")
    assert set(dup.subjects) == {eid, clone.id}
