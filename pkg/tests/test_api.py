from __future__ import annotations

import pytest

from heapquery.api import (
    QueryContext,
    query_boolean,
    query_bounded,
    query_long,
    query_object,
    query_string,
    query_unbounded,
)
from heapquery.errors import CursorError, PipelineError, UnknownColumnError
from heapquery.subgraph import ClassInfo, ExtractionConfig, FieldDecl, HeapObject, HeapSnapshot

from .conftest import CONTAINS_KEY_QUERY, REPOK_QUERY, TWO_HOP_QUERY, UID
from .oracles import reachable_from


@pytest.fixture
def ctx(tree_snapshot) -> QueryContext:
    return QueryContext(tree_snapshot)


class TestQueryBounded:
    def test_two_hop_from_root_node(self, ctx):
        rs = query_bounded(ctx, UID["c"], TWO_HOP_QUERY, UID["c"])
        assert rs.row_count() == 1
        assert rs.next()
        assert rs.get("m") == UID["a"]

    def test_count_over_interior_subgraph(self, ctx, tree_snapshot):
        # reachable objects from b plus the one class-metadata node
        expected = len(reachable_from(tree_snapshot, [UID["b"]])) + 1
        rs = query_bounded(ctx, UID["b"], "MATCH (n) RETURN count(n)")
        rs.next()
        assert expected == 4
        assert rs.get(0) == expected

    def test_unknown_root(self, ctx):
        with pytest.raises(PipelineError) as exc:
            query_bounded(ctx, 404, "MATCH (n) RETURN n")
        assert exc.value.stage == "extract"

    def test_multiple_roots_via_list(self, ctx):
        rs = query_bounded(ctx, [UID["a"], UID["d"]], "MATCH (n:`BinaryTree$Node`) RETURN count(n)")
        rs.next()
        assert rs.get(0) == 2


class TestQueryUnbounded:
    def test_node_instance_count(self, ctx):
        rs = query_unbounded(ctx, "MATCH (n:`BinaryTree$Node`) RETURN count(n)")
        rs.next()
        assert rs.get(0) == 5

    def test_singleton_assertion(self, ctx):
        rs = query_unbounded(ctx, "MATCH (n:`BinaryTree`) RETURN count(n)")
        rs.next()
        assert rs.get(0) == 1

    def test_garbage_visible_unless_collected(self, tree_snapshot):
        extra = HeapObject(99, "BinaryTree$Node", {"value": 9})
        snap = HeapSnapshot(tree_snapshot.classes, tree_snapshot.objects + [extra], tree_snapshot.roots)
        plain = QueryContext(snap)
        rs = query_unbounded(plain, "MATCH (n:`BinaryTree$Node`) RETURN count(n)")
        rs.next()
        assert rs.get(0) == 6
        gc = QueryContext(snap, ExtractionConfig(force_collect=True))
        rs = query_unbounded(gc, "MATCH (n:`BinaryTree$Node`) RETURN count(n)")
        rs.next()
        assert rs.get(0) == 5

    def test_bounded_rows_subset_of_unbounded(self, ctx):
        query = "MATCH (n:`BinaryTree$Node`)-[:left]->(m) RETURN m"
        bounded = query_bounded(ctx, UID["c"], query)
        unbounded = query_unbounded(ctx, query)

        def uids(rs):
            out = set()
            while rs.next():
                out.add(rs.get("m"))
            return out

        assert uids(bounded) <= uids(unbounded)


class TestTypedVariants:
    def test_boolean_invariant_query(self, ctx):
        assert query_boolean(ctx, REPOK_QUERY, UID["f"], root=UID["f"]) is True

    def test_long_agrees_with_generic(self, ctx):
        count = query_long(ctx, "MATCH (n:`BinaryTree$Node`) RETURN count(n)")
        rs = query_unbounded(ctx, "MATCH (n:`BinaryTree$Node`) RETURN count(n)")
        rs.next()
        assert count == rs.get(0) == 5

    def test_string_variant(self, ctx):
        assert query_string(ctx, "MATCH (c:Class {name: 'BinaryTree'}) RETURN c.name") == "BinaryTree"

    def test_boolean_on_node_is_cast_error(self, ctx):
        with pytest.raises(PipelineError) as exc:
            query_boolean(ctx, "MATCH (n {$1}) RETURN n", UID["a"])
        assert exc.value.stage == "result"

    def test_shape_error_on_many_rows(self, ctx):
        with pytest.raises(PipelineError) as exc:
            query_long(ctx, "MATCH (n:`BinaryTree$Node`) RETURN n.value")
        assert exc.value.stage == "result"

    def test_query_object_resolves_snapshot_object(self, ctx, tree_snapshot):
        uid, obj = query_object(ctx, "MATCH (n:`BinaryTree`) RETURN n")
        assert uid == UID["f"]
        assert obj is tree_snapshot.object(UID["f"])


class TestResultSet:
    def test_empty_result(self, ctx):
        rs = query_unbounded(ctx, "MATCH (n:`Missing`) RETURN n")
        assert rs.next() is False
        assert rs.row() == 0

    def test_cursor_semantics(self, ctx):
        rs = query_unbounded(ctx, "MATCH (n:`BinaryTree$Node`)-[:left]->(m) RETURN m")
        assert rs.row_count() == 2
        assert rs.next() is True
        assert rs.row() == 1
        assert rs.next() is True
        assert rs.row() == 2
        assert rs.next() is False

    def test_get_before_next(self, ctx):
        rs = query_unbounded(ctx, "MATCH (n:`BinaryTree`) RETURN n")
        with pytest.raises(CursorError):
            rs.get(0)

    def test_get_by_alias_and_index(self, ctx):
        rs = query_unbounded(ctx, "MATCH (n:`BinaryTree`) RETURN n.size AS s")
        assert rs.columns() == ["s"]
        rs.next()
        assert rs.get("s") == rs.get(0) == 5

    def test_unknown_column(self, ctx):
        rs = query_unbounded(ctx, "MATCH (n:`BinaryTree`) RETURN n")
        rs.next()
        with pytest.raises(UnknownColumnError):
            rs.get("zzz")


class TestBatch:
    def test_union_through_facade(self, ctx):
        rs = query_unbounded(ctx, "MATCH (n {[]1})-[:left|right]->(m) RETURN m", [UID["a"], UID["b"]])
        uids = []
        while rs.next():
            uids.append(rs.get("m"))
        assert sorted(uids) == sorted([UID["a"], UID["e"]])


class TestStageTagging:
    def test_expand_stage(self, ctx):
        with pytest.raises(PipelineError) as exc:
            query_unbounded(ctx, "MATCH (n {$1}) RETURN n")
        assert exc.value.stage == "expand"

    def test_parse_stage(self, ctx):
        with pytest.raises(PipelineError) as exc:
            query_unbounded(ctx, "MATCH (n RETURN n")
        assert exc.value.stage == "parse"

    def test_validate_stage(self, ctx):
        with pytest.raises(PipelineError) as exc:
            query_unbounded(ctx, "MATCH (n) RETURN z")
        assert exc.value.stage == "validate"

    def test_execute_stage(self, tree_snapshot):
        classes = tree_snapshot.classes + [
            ClassInfo("S", None, (FieldDecl("s", "primitive", "String"),))
        ]
        snap = HeapSnapshot(classes, tree_snapshot.objects + [HeapObject(50, "S", {"s": "x"})], tree_snapshot.roots)
        ctx = QueryContext(snap)
        with pytest.raises(PipelineError) as exc:
            query_unbounded(ctx, "MATCH (n:S) WHERE n.s < 1 RETURN n")
        assert exc.value.stage == "execute"


class TestExtractionMemo:
    def test_cache_reuses_graph(self, tree_snapshot):
        ctx = QueryContext(tree_snapshot, cache_extractions=True)
        first = query_unbounded(ctx, "MATCH (n) RETURN count(n)")
        second = query_unbounded(ctx, "MATCH (n) RETURN count(n)")
        assert first._graph is second._graph

    def test_no_cache_by_default(self, tree_snapshot):
        ctx = QueryContext(tree_snapshot)
        first = query_unbounded(ctx, "MATCH (n) RETURN count(n)")
        second = query_unbounded(ctx, "MATCH (n) RETURN count(n)")
        assert first._graph is not second._graph


class TestContainsKeyThroughFacade:
    def test_present_and_absent(self):
        import random

        from .generators import build_hashmap_snapshot
        from .oracles import hashmap_contains

        rng = random.Random(3)
        for _ in range(10):
            snapshot, map_id, probe_id, _present = build_hashmap_snapshot(rng, rng.randint(3, 20))
            ctx = QueryContext(snapshot)
            got = query_boolean(ctx, CONTAINS_KEY_QUERY, map_id, probe_id)
            assert got == hashmap_contains(snapshot, map_id, probe_id)
