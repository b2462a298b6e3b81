import random

import pytest

from helpers import brute_force_rows, random_graph
from tantra.errors import QuerySyntaxError, UnknownLabel, UnknownVariable
from tantra.model import Aspect
from tantra.query import EdgePattern, NodePattern, execute, parse, to_text
from tantra.store import TantraGraph, from_bytes


QUERY_CORPUS = [
    'MATCH (x) RETURN x',
    'MATCH (x:Who) RETURN x',
    'MATCH (x:Who) RETURN *',
    'MATCH (f:Who {name: "Farmer"})-[:SELLS_TO VIA "Mandi"]->(t:Who) RETURN t',
    'MATCH (m:Why) WHERE m.metric_name = "Yield" RETURN *',
    'MATCH (a)-[:SELLS_TO]->(b) RETURN a, b',
    'MATCH (a)-[]->(b) RETURN a, b',
    'MATCH (a:What)-[:IS_A]->(b:What {name: "Farm"}) RETURN a',
    'MATCH (a:Who)-[:MEMBER_OF]->(g:Relationships) RETURN a, g',
    'MATCH (x:Relators) WHERE x.name CONTAINS "Bank" RETURN x',
    'MATCH (x:Why) WHERE x.value > 1000 RETURN x',
    'MATCH (x:Why) WHERE x.value < 0.5 AND x.unit = "fraction" RETURN x',
    'MATCH (x:Who {name: "Farmers"})-[:FINANCED_BY]->(b) RETURN b',
    'MATCH (x {flag: TRUE}) RETURN x',
    'MATCH (x {weight: -1.5}) RETURN x',
    'MATCH (a)-[:A]->(b)-[:B VIA "Hub"]->(c) RETURN a, b, c',
    'MATCH (x:When) WHERE x.name != "Procurement" RETURN x',
    'MATCH (a:Who)-[VIA "Arthiya"]->(b:Who) RETURN a, b',
    'MATCH (x:Separations) RETURN x',
    'MATCH (s:How {reform: TRUE}) WHERE s.name CONTAINS "Farming" RETURN s',
]


def test_corpus_has_twenty_queries():
    assert len(QUERY_CORPUS) == 20


@pytest.mark.parametrize("text", QUERY_CORPUS)
def test_parse_print_parse_fixpoint(text):
    ast = parse(text)
    printed = to_text(ast)
    assert parse(printed) == ast
    # printing is itself a fixpoint once canonicalized
    assert to_text(parse(printed)) == printed


def test_parse_shapes():
    q = parse('MATCH (f:Who {name: "Farmer"})-[:SELLS_TO VIA "Mandi"]->(t:Who) RETURN t')
    assert len(q.nodes) == 2 and len(q.edges) == 1
    assert q.nodes[0] == NodePattern("f", "Who", (("name", "Farmer"),))
    assert q.edges[0] == EdgePattern("SELLS_TO", "Mandi")
    assert q.returns == ("t",)

    q2 = parse('MATCH (m:Why) WHERE m.metric_name = "Yield" RETURN *')
    assert len(q2.where) == 1 and q2.returns is None


def test_syntax_error_carries_position():
    with pytest.raises(QuerySyntaxError) as err:
        parse("MATCH (x:")
    assert err.value.line == 1
    assert err.value.column == 10
    assert err.value.expected

    with pytest.raises(QuerySyntaxError):
        parse("MATCH (x) WHERE x.a ~ 1 RETURN x")
    with pytest.raises(QuerySyntaxError):
        parse("RETURN x")
    with pytest.raises(QuerySyntaxError):
        parse('MATCH (x) RETURN x trailing')


def test_duplicate_variable_rejected():
    with pytest.raises(QuerySyntaxError):
        parse("MATCH (x)-[:A]->(x) RETURN x")


def test_unknown_label_raised_at_execute():
    g = TantraGraph()
    g.create_element(Aspect.WHO, "A", "s")
    with pytest.raises(UnknownLabel):
        execute(g, parse("MATCH (x:Banana) RETURN x"))


def test_unknown_variable_raised_at_execute():
    g = TantraGraph()
    g.create_element(Aspect.WHO, "A", "s")
    with pytest.raises(UnknownVariable):
        execute(g, parse("MATCH (x) RETURN y"))
    with pytest.raises(UnknownVariable):
        execute(g, parse("MATCH (x) WHERE y.a = 1 RETURN x"))


def _flow_fixture():
    g = TantraGraph()
    farmer = g.create_element(Aspect.WHO, "Farmer", "s")
    trader = g.create_element(Aspect.WHO, "Trader", "s")
    retailer = g.create_element(Aspect.WHO, "Retailer", "s")
    mandi = g.create_element(Aspect.RELATORS, "Mandi", "s")
    g.connect("SELLS_TO", farmer.id, trader.id, mandi.id)
    g.connect("SELLS_TO", trader.id, retailer.id)
    g.attach_measure(farmer.id, "Yield", 3.5, "t/ha")
    return g, farmer, trader, retailer, mandi


def test_execute_basics():
    g, farmer, trader, retailer, mandi = _flow_fixture()
    assert len(execute(g, parse("MATCH (x:Who) RETURN x")).rows) == 3
    rows = execute(g, parse('MATCH (a)-[:SELLS_TO VIA "Mandi"]->(b) RETURN a, b')).rows
    assert rows == ((farmer.id, trader.id),)
    assert execute(g, parse('MATCH (a)-[:NO_SUCH]->(b) RETURN a')).rows == ()
    assert execute(g, parse('MATCH (x:Who {name: "Nobody"}) RETURN x')).rows == ()


def test_measures_match_as_why_nodes():
    g, farmer, *_ = _flow_fixture()
    rows = execute(g, parse('MATCH (m:Why) WHERE m.metric_name = "Yield" RETURN m')).rows
    assert len(rows) == 1 and rows[0][0].startswith("MSR-")
    rows2 = execute(g, parse('MATCH (m:Why) WHERE m.value > 3 RETURN m')).rows
    assert rows2 == rows


def test_homomorphism_allows_shared_bindings():
    g = TantraGraph()
    a = g.create_element(Aspect.WHO, "A", "s")
    g.connect("KNOWS", a.id, a.id)
    rows = execute(g, parse("MATCH (x)-[:KNOWS]->(y) RETURN x, y")).rows
    assert rows == ((a.id, a.id),)


def test_rows_are_sorted_and_deterministic(demo_graph):
    t1 = execute(demo_graph, parse("MATCH (x:Who) RETURN x"))
    t2 = execute(demo_graph, parse("MATCH (x:Who) RETURN x"))
    assert t1 == t2
    assert list(t1.rows) == sorted(t1.rows)


def test_execute_counts_match_brute_force_on_random_graphs():
    rng = random.Random(23)
    patterns = [
        "MATCH (x) RETURN x",
        "MATCH (x:Who) RETURN x",
        "MATCH (a)-[]->(b) RETURN a, b",
        "MATCH (a)-[:SELLS_TO]->(b) RETURN a, b",
        "MATCH (a)-[]->(b)-[]->(c) RETURN a, b, c",
        'MATCH (a {flag: TRUE})-[]->(b) RETURN a, b',
        'MATCH (a) WHERE a.note CONTAINS "1" RETURN a',
        'MATCH (a {k: "v1"}) RETURN a',  # logical-attribute fallback
        'MATCH (a:Why) WHERE a.value > 50 RETURN a',
        'MATCH (a)-[:MEMBER_OF]->(b) WHERE b.name != "node 3" RETURN a, b',
    ]
    for _ in range(12):
        g = random_graph(rng, n_elements=rng.randrange(8, 22), n_relationships=20)
        for text in patterns:
            q = parse(text)
            got = sorted(execute(g, q).rows)
            want = brute_force_rows(g, q)
            assert got == want, f"{text} diverged from brute force"


def test_execute_invariant_under_round_trip(demo_graph):
    data = demo_graph.to_bytes()
    g2 = from_bytes(data)
    for text in QUERY_CORPUS:
        q = parse(text)
        assert execute(demo_graph, q) == execute(g2, q)


def test_output_ids_exist_in_graph(demo_graph):
    for text in QUERY_CORPUS:
        table = execute(demo_graph, parse(text))
        for row in table.rows:
            for eid in row:
                assert eid in demo_graph
