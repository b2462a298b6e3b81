import random

import pytest

from helpers import assert_indices_consistent, random_graph
from tantra.errors import (
    DanglingEndpoint,
    DuplicateId,
    MalformedRecord,
    NonFiniteValue,
    RelatorNotARelator,
    UnknownId,
    UnknownSubject,
)
from tantra.model import Aspect, Perspective, Relationship
from tantra.store import TantraGraph, from_bytes, load, save


def _mini():
    g = TantraGraph()
    farmer = g.create_element(Aspect.WHO, "Farmer", "s")
    trader = g.create_element(Aspect.WHO, "APMC Trader", "s")
    mandi = g.create_element(Aspect.RELATORS, "Mandi", "s")
    return g, farmer, trader, mandi


def test_insert_element_updates_indices():
    g, farmer, *_ = _mini()
    assert farmer.id in g.index_by_aspect[Aspect.WHO]
    assert farmer.id in g.index_by_perspective[Perspective.CONTEXTUAL]
    assert g.find_by_name("farmer")[0].id == farmer.id


def test_insert_duplicate_id_rejected():
    g, farmer, *_ = _mini()
    with pytest.raises(DuplicateId):
        g.insert_element(farmer)


def test_insert_relationship_mediated():
    g, farmer, trader, mandi = _mini()
    r = g.connect("SELLS_TO", farmer.id, trader.id, mandi.id)
    assert r.id in g.adjacency_out[farmer.id]
    assert r.id in g.adjacency_in[trader.id]


def test_insert_relationship_dangling_endpoint():
    g, farmer, *_ = _mini()
    with pytest.raises(DanglingEndpoint):
        g.insert_relationship(
            Relationship(id=g.ids.next("REL"), rel_type="X", source=farmer.id, target="WHO-999999")
        )


def test_relator_must_have_relators_aspect():
    g, farmer, trader, _ = _mini()
    with pytest.raises(RelatorNotARelator):
        g.connect("SELLS_TO", farmer.id, trader.id, relator=trader.id)


def test_remove_isolated_element_counts_one():
    g, farmer, *_ = _mini()
    assert g.remove_element(farmer.id) == 1
    assert farmer.id not in g.elements
    assert_indices_consistent(g)


def test_remove_cascades_incident_edges():
    g, farmer, trader, mandi = _mini()
    g.connect("SELLS_TO", farmer.id, trader.id, mandi.id)
    g.connect("KNOWS", trader.id, farmer.id)
    assert g.remove_element(farmer.id) == 3  # node + 2 edges
    assert not g.relationships
    assert_indices_consistent(g)


def test_remove_cascades_relator_edges_and_measures():
    g, farmer, trader, mandi = _mini()
    g.connect("SELLS_TO", farmer.id, trader.id, mandi.id)
    g.attach_measure(farmer.id, "Acreage", 2.5, "hectare")
    # removing the relator must not leave the mediated edge behind
    assert g.remove_element(mandi.id) == 2
    assert not g.relationships
    # removing the subject takes its measure along
    assert g.remove_element(farmer.id) == 2
    assert not g.measures
    assert_indices_consistent(g)


def test_remove_unknown_id():
    g, *_ = _mini()
    with pytest.raises(UnknownId):
        g.remove_element("WHO-424242")


def test_attach_measure_validates():
    g, farmer, *_ = _mini()
    m = g.attach_measure(farmer.id, "Acreage", 2.5, "hectare")
    assert m.subject == farmer.id and m.value == 2.5
    with pytest.raises(UnknownSubject):
        g.attach_measure("WHO-999999", "Yield", 3.0, "t/ha")
    with pytest.raises(NonFiniteValue):
        g.attach_measure(farmer.id, "Yield", float("nan"), "t/ha")


def test_empty_graph_round_trip(tmp_path):
    g = TantraGraph()
    path = tmp_path / "empty.jsonl"
    n = save(g, path)
    assert n == len(path.read_bytes())
    assert path.read_text().count("\n") == 1  # header only
    assert load(path) == g


def test_round_trip_preserves_everything(tmp_path):
    rng = random.Random(11)
    g = random_graph(rng)
    path = tmp_path / "g.jsonl"
    save(g, path)
    g2 = load(path)
    assert g2 == g
    assert g2.structural_hash() == g.structural_hash()


def test_ids_never_repeat_after_round_trip(tmp_path):
    g, farmer, trader, _ = _mini()
    issued = {farmer.id, trader.id}
    g.remove_element(trader.id)
    path = tmp_path / "g.jsonl"
    save(g, path)
    g2 = load(path)
    fresh = g2.create_element(Aspect.WHO, "Another", "s")
    assert fresh.id not in issued


def test_truncated_file_is_malformed(tmp_path):
    g = random_graph(random.Random(3))
    data = g.to_bytes()
    cut = data[: int(len(data) * 0.7)]
    with pytest.raises(MalformedRecord) as err:
        from_bytes(cut)
    assert err.value.line > 1


def test_bad_header_is_malformed():
    with pytest.raises(MalformedRecord):
        from_bytes(b'{"format":"something-else","version":1}\n')
    with pytest.raises(MalformedRecord):
        from_bytes(b"")
    with pytest.raises(MalformedRecord):
        from_bytes(b"not json at all\n")


def test_save_bytes_are_canonical():
    rng = random.Random(5)
    g = random_graph(rng)
    assert g.to_bytes() == g.to_bytes()
    assert g.to_bytes().endswith(b"\n")
    assert b"\r" not in g.to_bytes()


def test_index_consistency_under_mixed_ops():
    # 500+ random inserts/removes, indices must always equal a fresh rebuild.
    rng = random.Random(99)
    g = TantraGraph()
    aspects = list(Aspect)
    for step in range(520):
        roll = rng.random()
        ids = sorted(g.elements)
        if roll < 0.45 or not ids:
            g.create_element(rng.choice(aspects), f"n{step}", "s")
        elif roll < 0.65 and len(ids) >= 2:
            src, dst = rng.choice(ids), rng.choice(ids)
            relators = [i for i in ids if g.elements[i].aspect is Aspect.RELATORS]
            relator = rng.choice(relators) if relators and rng.random() < 0.4 else None
            g.connect(rng.choice(("A", "B", "C")), src, dst, relator)
        elif roll < 0.8:
            g.attach_measure(rng.choice(ids), "m", rng.random(), "u")
        else:
            g.remove_element(rng.choice(ids))
        if step % 50 == 0:
            assert_indices_consistent(g)
    assert_indices_consistent(g)
