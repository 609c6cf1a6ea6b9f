from __future__ import annotations

import random

import pytest

from heapquery.cypher_ast import NodePattern, PathPattern, RelPattern
from heapquery.cypher_frontend import expand_positional, parse, validate
from heapquery.errors import TypeMismatchError
from heapquery.property_graph import PropertyGraph, structurally_equal
from heapquery.query_engine import (
    ABSENT,
    NodeRef,
    execute,
    execute_batch,
    match_pattern,
)
from heapquery.subgraph import ExtractionConfig, extract

from .conftest import (
    CONTAINS_KEY_QUERY,
    REACHABLE_QUERY,
    REPOK_QUERY,
    TREE_CREATE_QUERY,
    TWO_HOP_QUERY,
    UID,
)
from .generators import build_hashmap_snapshot, build_tree_case, random_graph, random_query
from .oracles import enumerate_rows, hashmap_contains, worklist_repok


def node_by_value(graph, value):
    return next(n for n in graph.nodes() if n.properties.get("value") == value)


def expanded(fmt, args):
    query = parse(expand_positional(fmt, args).text)
    assert validate(query) == []
    return query


class TestMatchPattern:
    def test_reachability_returns_all_but_start(self, tree_graph):
        table, _ = execute(expanded(REACHABLE_QUERY, [UID["c"]]), tree_graph)
        got = {v.id for (v,) in table.rows}
        start = next(n for n in tree_graph.nodes() if n.properties.get("$uid") == UID["c"])
        assert len(got) == 7
        assert got == {n.id for n in tree_graph.nodes()} - {start.id}

    def test_two_hops_direction_and_value(self, tree_graph):
        table, _ = execute(expanded(TWO_HOP_QUERY, [UID["c"]]), tree_graph)
        assert [tree_graph.node(v.id).properties["$uid"] for (v,) in table.rows] == [UID["a"]]

    def test_optional_match_yields_absent_row(self):
        g = PropertyGraph()
        g.add_node("A")
        path = PathPattern(
            (NodePattern("n"), NodePattern("m")),
            (RelPattern(None, ("f",), "out"),),
        )
        rows = match_pattern(g, (path,), optional=True)
        assert rows == [{"n": ABSENT, "m": ABSENT}]

    def test_range_one_to_two(self, tree_graph):
        query = expanded("MATCH (n {value: 4})-[:left|right*1..2]->(m) RETURN m", [])
        table, _ = execute(query, tree_graph)
        values = sorted(tree_graph.node(v.id).properties["value"] for (v,) in table.rows)
        assert values == [1, 2, 3, 5]  # b, d and b's children a, e

    def test_relationship_not_reused_within_path(self):
        g = PropertyGraph()
        a, b = g.add_node("A"), g.add_node("A")
        g.add_relationship("f", a, b)
        # a-f->b back over the same edge is not a valid 2-hop path
        query = expanded("MATCH (n)-[:f*2]-(m) RETURN n, m", [])
        table, _ = execute(query, g)
        assert table.rows == []

    def test_parallel_edges_give_two_paths(self):
        g = PropertyGraph()
        a, b = g.add_node("A"), g.add_node("B")
        g.add_relationship("f", a, b)
        g.add_relationship("f", a, b)
        query = expanded("MATCH (n:A)-[:f]->(m) RETURN m", [])
        table, _ = execute(query, g)
        assert len(table.rows) == 2

    def test_closed_walk_requires_pinned_endpoint(self):
        g = PropertyGraph()
        a, b = g.add_node("A"), g.add_node("A")
        g.add_relationship("f", a, b)
        g.add_relationship("f", b, a)
        free, _ = execute(expanded("MATCH (n {$1})-[:f*1..]->(m) RETURN m", [0]), _with_uids(g))
        pinned, _ = execute(expanded("MATCH (m {$1})-[:f*1..]->(m) RETURN m", [0]), _with_uids(g))
        assert {v.id for (v,) in free.rows} == {1}
        assert len(pinned.rows) == 1

    def test_zero_length_stays_on_start(self):
        g = PropertyGraph()
        a = g.add_node("A")
        query = expanded("MATCH (n:A)-[:f*0..]->(m) RETURN m", [])
        table, _ = execute(query, g)
        assert [v.id for (v,) in table.rows] == [a]


def _with_uids(graph: PropertyGraph) -> PropertyGraph:
    for node in graph.nodes():
        node.properties.setdefault("$uid", node.id)
    return graph


class TestEvalExpression:
    def test_equals_reflexive_on_node(self, tree_graph):
        n = NodeRef(next(iter([n.id for n in tree_graph.nodes()])))
        query = expanded("MATCH (n {$1}) RETURN equals(n, n)", [UID["a"]])
        table, _ = execute(query, tree_graph)
        assert table.rows == [(True,)]

    def test_equals_is_structural_modulo_uid(self, tree_graph):
        # a{value:1} vs a rebuilt twin with a different uid
        twin = tree_graph.copy()
        twin_id = twin.add_node("BinaryTree$Node", {"value": 1, "$uid": 99})
        query = expanded("MATCH (n {$1}), (m {$2}) RETURN equals(n, m)", [UID["a"], 99])
        table, _ = execute(query, twin)
        assert table.rows == [(True,)]

    def test_property_comparison(self, tree_graph):
        query = expanded("MATCH (a {$1}), (c {$2}) RETURN a.value < c.value", [UID["a"], UID["c"]])
        table, _ = execute(query, tree_graph)
        assert table.rows == [(True,)]  # 1 < 4

    def test_absent_comparison_filters_row(self, tree_graph):
        # f has no value property: comparison yields absent, WHERE drops it
        query = expanded("MATCH (n:`BinaryTree`) WHERE n.value = 1 RETURN n", [])
        table, _ = execute(query, tree_graph)
        assert table.rows == []

    def test_type_mismatch_on_order(self):
        g = PropertyGraph()
        g.add_node("A", {"p": "text"})
        query = expanded("MATCH (n:A) WHERE n.p < 1 RETURN n", [])
        with pytest.raises(TypeMismatchError):
            execute(query, g)

    def test_int_float_equality_is_type_sensitive(self):
        g = PropertyGraph()
        g.add_node("A", {"p": 1})
        table, _ = execute(expanded("MATCH (n:A) RETURN n.p = 1.0, n.p = 1", []), g)
        assert table.rows == [(False, True)]

    def test_three_valued_logic(self):
        g = PropertyGraph()
        g.add_node("A", {"p": 1})
        # absent OR true is true; absent AND true is absent (row dropped)
        kept, _ = execute(expanded("MATCH (n:A) WHERE n.q = 1 OR n.p = 1 RETURN n", []), g)
        assert len(kept.rows) == 1
        dropped, _ = execute(expanded("MATCH (n:A) WHERE n.q = 1 AND n.p = 1 RETURN n", []), g)
        assert dropped.rows == []


class TestExecute:
    def test_tree_creation_query(self, tree_instances_graph):
        graph = PropertyGraph()
        table, graph = execute(expanded(expand_positional(TREE_CREATE_QUERY, ["BinaryTree$Node", "BinaryTree"]).text, []), graph)
        assert structurally_equal(graph, tree_instances_graph)
        assert len(table.rows) == 1
        (result,) = table.rows[0]
        assert graph.node(result.id).label == "BinaryTree"

    def test_merge_existing_pattern_binds_without_writing(self, tree_graph):
        before = tree_graph.copy()
        query = expanded("MATCH (c {$1}), (b {$2}) MERGE (c)-[:left]->(b) RETURN c", [UID["c"], UID["b"]])
        table, after = execute(query, tree_graph)
        assert structurally_equal(before, after)
        assert len(table.rows) == 1

    def test_merge_creates_whole_pattern_when_absent(self):
        g = PropertyGraph()
        query = expanded("MERGE (x:A)-[:r]->(y:B) RETURN x", [])
        table, g = execute(query, g)
        assert g.node_count == 2
        assert g.relationship_count == 1
        # merging again finds it instead of duplicating
        table, g = execute(expanded("MERGE (x:A)-[:r]->(y:B) RETURN x", []), g)
        assert g.node_count == 2
        assert g.relationship_count == 1

    def test_create_instantiates_per_row(self):
        g = PropertyGraph()
        g.add_node("A")
        g.add_node("A")
        query = expanded("MATCH (n:A) CREATE (m:B) RETURN m", [])
        table, g = execute(query, g)
        assert sum(1 for n in g.nodes() if n.label == "B") == 2

    def test_read_only_clauses_do_not_mutate(self, tree_graph):
        before = tree_graph.copy()
        execute(expanded("MATCH (n:`BinaryTree$Node`) WHERE n.value > 1 RETURN DISTINCT n", []), tree_graph)
        assert structurally_equal(before, tree_graph)

    def test_distinct_idempotent(self, tree_graph):
        once, _ = execute(expanded("MATCH (n)-[*1..2]-(m) RETURN DISTINCT m", []), tree_graph)
        table2, _ = execute(expanded("MATCH (n)-[*1..2]-(m) RETURN DISTINCT m", []), tree_graph)
        assert once.rows == table2.rows
        assert len(once.rows) == len({r for r in once.rows})

    def test_count_star_equals_binding_bag(self, tree_graph):
        rows = match_pattern(tree_graph, parse("MATCH (n)-[:left]->(m) RETURN n").clauses[0].patterns)
        table, _ = execute(expanded("MATCH (n)-[:left]->(m) RETURN count(*)", []), tree_graph)
        assert table.rows == [(len(rows),)]

    def test_determinism(self, tree_graph):
        first, _ = execute(expanded("MATCH (n)-[:left|right*1..]->(m) RETURN n, m", []), tree_graph)
        second, _ = execute(expanded("MATCH (n)-[:left|right*1..]->(m) RETURN n, m", []), tree_graph)
        assert first.rows == second.rows

    def test_no_rollback_on_failure(self):
        g = PropertyGraph()
        g.add_node("A", {"p": "s"})
        query = expanded("CREATE (b:B) MATCH (n:A) WHERE n.p < 1 RETURN n", [])
        with pytest.raises(TypeMismatchError):
            execute(query, g)
        assert sum(1 for n in g.nodes() if n.label == "B") == 1

    def test_aggregate_over_empty_table_counts_zero(self):
        g = PropertyGraph()
        table, _ = execute(expanded("MATCH (n:Missing) RETURN count(n) > 0", []), g)
        assert table.rows == [(False,)]


class TestInvariantQueries:
    def test_repok_on_valid_tree(self, tree_snapshot):
        graph = extract(tree_snapshot, ExtractionConfig(root=UID["f"]))
        table, _ = execute(expanded(REPOK_QUERY, [UID["f"]]), graph)
        assert table.rows == [(True,)]

    def test_repok_detects_back_edge(self, tree_snapshot):
        graph = extract(tree_snapshot, ExtractionConfig(root=UID["f"]))
        a = next(n for n in graph.nodes() if n.properties.get("$uid") == UID["a"])
        c = next(n for n in graph.nodes() if n.properties.get("$uid") == UID["c"])
        graph.add_relationship("left", a.id, c.id)
        table, _ = execute(expanded(REPOK_QUERY, [UID["f"]]), graph)
        assert table.rows == [(False,)]

    def test_contains_key_small_fixture(self):
        rng = random.Random(7)
        snapshot, map_id, probe_id, present = build_hashmap_snapshot(rng, 3)
        graph = extract(snapshot, ExtractionConfig())
        table, _ = execute(expanded(CONTAINS_KEY_QUERY, [map_id, probe_id]), graph)
        assert table.rows == [(hashmap_contains(snapshot, map_id, probe_id),)]
        assert table.rows == [(present,)]

    def test_array_slots_are_queryable_by_index(self):
        rng = random.Random(8)
        snapshot, map_id, _, _ = build_hashmap_snapshot(rng, 6)
        graph = extract(snapshot, ExtractionConfig())
        query = expanded(
            "MATCH (h {$1})-[:table]->(t)-[e:element]->(x) WHERE e.index >= 0 RETURN count(x)",
            [map_id],
        )
        table, _ = execute(query, graph)
        occupied = sum(1 for slot in snapshot.object(map_id).fields["table"].ids if slot is not None)
        assert table.rows == [(occupied,)]


class TestExecuteBatch:
    def test_union_of_per_element_results(self, tree_graph):
        expansion = expand_positional("MATCH (n {[]1})-[:left|right]->(m) RETURN m", [[UID["a"], UID["b"]]])
        queries = [parse(text) for text in expansion.queries()]
        table, _ = execute_batch(queries, tree_graph)
        # a has no children, b has two
        values = sorted(tree_graph.node(v.id).properties["value"] for (v,) in table.rows)
        assert values == [1, 3]

    def test_empty_collection(self, tree_graph):
        expansion = expand_positional("MATCH (n {[]1}) RETURN n", [[]])
        table, _ = execute_batch([parse(t) for t in expansion.queries()], tree_graph)
        assert table.columns == []
        assert table.rows == []

    def test_singleton_equals_plain_execute(self, tree_graph):
        expansion = expand_positional("MATCH (n {[]1})-[:left]->(m) RETURN m", [[UID["c"]]])
        batch_table, _ = execute_batch([parse(t) for t in expansion.queries()], tree_graph)
        plain_table, _ = execute(expanded("MATCH (n {$1})-[:left]->(m) RETURN m", [UID["c"]]), tree_graph)
        assert batch_table.rows == plain_table.rows

    def test_batch_is_bag_union_of_singles(self, tree_graph):
        import random
        from collections import Counter

        rng = random.Random(17)
        for _ in range(20):
            uids = [rng.choice(list(UID.values())) for _ in range(rng.randint(0, 4))]
            fmt = "MATCH (n {[]1})-[:left|right*1..]->(m) RETURN m"
            expansion = expand_positional(fmt, [uids])
            batch_table, _ = execute_batch([parse(t) for t in expansion.queries()], tree_graph)
            singles = Counter()
            for uid in uids:
                single, _ = execute(expanded("MATCH (n {$1})-[:left|right*1..]->(m) RETURN m", [uid]), tree_graph)
                singles += single.as_bag()
            assert batch_table.as_bag() == singles


class TestOracleEquivalence:
    def test_random_queries_match_bruteforce(self):
        rng = random.Random(2024)
        for _ in range(120):
            graph = random_graph(rng)
            query = random_query(rng)
            assert validate(query) == []
            table, _ = execute(query, graph)
            assert table.as_bag() == enumerate_rows(graph, query)

    def test_read_only_queries_never_mutate(self):
        rng = random.Random(4)
        for _ in range(40):
            graph = random_graph(rng)
            before = graph.copy()
            execute(random_query(rng), graph)
            assert structurally_equal(before, graph)
            assert graph.audit() == []

    def test_write_queries_keep_indexes_consistent(self, tree_graph):
        writes = [
            "CREATE (x:Extra {value: 9})-[:left]->(y:Extra {value: 10}) RETURN x",
            "MERGE (x:Extra {value: 9})-[:left]->(y:Extra {value: 10}) RETURN x",
            "MATCH (n:Extra) CREATE (n)-[:mark]->(m:Flag) RETURN m",
        ]
        for text in writes:
            _, tree_graph = execute(expanded(text, []), tree_graph)
            assert tree_graph.audit() == []

    def test_tree_parity_with_worklist(self):
        rng = random.Random(99)
        for kind in ("valid", "cyclic", "size-mismatch", "forest"):
            for _ in range(10):
                snapshot, tree_id = build_tree_case(rng, kind)
                graph = extract(snapshot, ExtractionConfig(root=tree_id))
                table, _ = execute(expanded(REPOK_QUERY, [tree_id]), graph)
                assert table.rows == [(worklist_repok(snapshot, tree_id),)], (kind, snapshot)
