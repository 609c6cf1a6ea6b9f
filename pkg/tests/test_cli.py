from __future__ import annotations

import io
import json

import pytest

from heapquery.cli import main
from heapquery.property_graph import structurally_equal
from heapquery.snapshot_io import load_snapshot
from heapquery.subgraph import extract

from .conftest import DATA, UID, build_point_graph


@pytest.fixture
def snapshot_path(tmp_path):
    path = tmp_path / "tree.json"
    path.write_bytes((DATA / "tree_snapshot.json").read_bytes())
    return str(path)


@pytest.fixture
def program_path(tmp_path):
    path = tmp_path / "prog.mj"
    path.write_text((DATA / "binary_tree_point.mj").read_text())
    return str(path)


class TestRun:
    def test_point_program_prints_snapshot(self, program_path, capsys):
        assert main(["run", program_path]) == 0
        out = capsys.readouterr().out
        snapshot = load_snapshot(out.encode())
        assert structurally_equal(extract(snapshot), build_point_graph())

    def test_output_is_canonical_json(self, program_path, capsys):
        main(["run", program_path])
        out = capsys.readouterr().out.strip()
        assert out == json.dumps(json.loads(out), sort_keys=True, separators=(",", ":"))

    def test_empty_program(self, tmp_path, capsys):
        path = tmp_path / "empty.mj"
        path.write_text("")
        assert main(["run", str(path)]) == 0
        assert json.loads(capsys.readouterr().out) == {"classes": [], "objects": [], "roots": {}}

    def test_unparsable_program(self, tmp_path, capsys):
        path = tmp_path / "bad.mj"
        path.write_text("class {")
        assert main(["run", str(path)]) == 1
        err = capsys.readouterr().err
        assert "1:" in err

    def test_missing_file(self, capsys):
        assert main(["run", "/nonexistent/prog.mj"]) == 1


class TestQuery:
    def test_two_hop_query_renders_node_cell(self, snapshot_path, capsys):
        code = main(
            [
                "query",
                snapshot_path,
                "-q",
                "MATCH (n {$1})-[:left|right*2]->(m {value: 1}) RETURN m",
                "--root",
                str(UID["c"]),
                str(UID["c"]),
            ]
        )
        assert code == 0
        out = capsys.readouterr().out.splitlines()
        assert out[0] == "m"
        assert out[1] == f"#{UID['a']}:BinaryTree$Node"

    def test_gc_flag_shrinks_count(self, tmp_path, capsys):
        doc = json.loads((DATA / "tree_snapshot.json").read_text())
        doc["objects"].append({"id": 99, "class": "BinaryTree$Node", "fields": {"value": 9}})
        path = tmp_path / "garbage.json"
        path.write_text(json.dumps(doc))
        main(["query", str(path), "-q", "MATCH (n:`BinaryTree$Node`) RETURN count(n)"])
        plain = int(capsys.readouterr().out.splitlines()[1])
        main(["query", str(path), "-q", "MATCH (n:`BinaryTree$Node`) RETURN count(n)", "--gc"])
        collected = int(capsys.readouterr().out.splitlines()[1])
        assert plain == 6
        assert collected == 5

    def test_conflicting_lists_exit_2(self, snapshot_path, capsys):
        code = main(
            ["query", snapshot_path, "-q", "MATCH (n) RETURN n", "--whitelist", "X", "--blacklist", "X"]
        )
        assert code == 2
        assert "whitelist" in capsys.readouterr().err

    def test_bad_query_exit_2_names_stage(self, snapshot_path, capsys):
        assert main(["query", snapshot_path, "-q", "MATCH (n RETURN n"]) == 2
        assert "[parse]" in capsys.readouterr().err

    def test_unbound_variable_names_validate_stage(self, snapshot_path, capsys):
        assert main(["query", snapshot_path, "-q", "MATCH (n) RETURN zz"]) == 2
        assert "[validate]" in capsys.readouterr().err

    def test_missing_snapshot_exit_1(self, capsys):
        assert main(["query", "/nonexistent.json", "-q", "RETURN 1"]) == 1

    def test_time_flag_reports_stages(self, snapshot_path, capsys):
        main(["query", snapshot_path, "-q", "MATCH (n) RETURN count(n)", "--time"])
        err = capsys.readouterr().err
        assert "time_ms" in err
        for stage in ("expand", "extract", "parse", "validate", "execute"):
            assert stage in err

    def test_lint_warning_on_unreturned_create(self, snapshot_path, capsys):
        main(["query", snapshot_path, "-q", "CREATE (x:Tmp) RETURN 1"])
        assert "warning" in capsys.readouterr().err

    def test_output_is_byte_deterministic(self, snapshot_path, capsys):
        argv = ["query", snapshot_path, "-q", "MATCH (n)-[:left|right*1..]->(m) RETURN n, m"]
        main(argv)
        first = capsys.readouterr().out
        main(argv)
        assert capsys.readouterr().out == first


class TestExport:
    def test_writes_both_files(self, snapshot_path, tmp_path, capsys):
        out_dir = tmp_path / "csv"
        assert main(["export", snapshot_path, "-o", str(out_dir)]) == 0
        nodes = (out_dir / "nodes.csv").read_text().strip().splitlines()
        rels = (out_dir / "relationships.csv").read_text().strip().splitlines()
        # 6 instances + 2 class nodes + binder
        assert len(nodes) == 1 + 9
        assert len(rels) == 1 + 12

    def test_root_restricts_subgraph(self, snapshot_path, tmp_path):
        out_dir = tmp_path / "csv"
        assert main(["export", snapshot_path, "-o", str(out_dir), "--root", str(UID["a"])]) == 0
        nodes = (out_dir / "nodes.csv").read_text().strip().splitlines()
        assert len(nodes) == 1 + 2  # leaf + its class node

    def test_unwritable_output(self, snapshot_path, tmp_path, capsys):
        blocker = tmp_path / "file"
        blocker.write_text("")
        assert main(["export", snapshot_path, "-o", str(blocker / "sub")]) == 1


class TestRepl:
    def run_repl(self, snapshot_path, lines, monkeypatch, capsys):
        monkeypatch.setattr("sys.stdin", io.StringIO("\n".join(lines) + "\n"))
        code = main(["repl", snapshot_path])
        captured = capsys.readouterr()
        return code, captured.out, captured.err

    def test_two_queries_share_graph(self, snapshot_path, monkeypatch, capsys):
        code, out, err = self.run_repl(
            snapshot_path,
            [
                "MATCH (n {`$uid`: 13})-[*]-(m) RETURN count(DISTINCT m)",
                "MATCH (n {`$uid`: 13})-[:left|right*2]->(m {value: 1}) RETURN m",
                ":quit",
            ],
            monkeypatch,
            capsys,
        )
        assert code == 0
        assert "count(DISTINCT m)\n8\n" in out  # reachable nodes incl. binder
        assert f"m\n#{UID['a']}:BinaryTree$Node\n" in out

    def test_writes_accumulate(self, snapshot_path, monkeypatch, capsys):
        code, out, _ = self.run_repl(
            snapshot_path,
            [
                "CREATE (x:Extra {value: 1}) RETURN x",
                "MATCH (x:Extra) RETURN count(x)",
                ":quit",
            ],
            monkeypatch,
            capsys,
        )
        assert code == 0
        assert "count(x)\n1\n" in out

    def test_bad_line_keeps_looping(self, snapshot_path, monkeypatch, capsys):
        code, out, err = self.run_repl(
            snapshot_path,
            ["MATCH (n RETURN", "RETURN 1", ":quit"],
            monkeypatch,
            capsys,
        )
        assert code == 0
        assert "error" in err
        assert "1" in out

    def test_quit_exits_zero(self, snapshot_path, monkeypatch, capsys):
        code, _, _ = self.run_repl(snapshot_path, [":quit"], monkeypatch, capsys)
        assert code == 0

    def test_eof_exits_zero(self, snapshot_path, monkeypatch, capsys):
        monkeypatch.setattr("sys.stdin", io.StringIO(""))
        assert main(["repl", snapshot_path]) == 0
