import json

import pytest

from quadmating.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


class TestExitCodes:
    def test_fsr_success(self, capsys):
        code, out, _ = run(capsys, "mate", "fsr", "1/6", "1/6")
        assert code == 0
        data = json.loads(out)
        assert [t["name"] for t in data["rule"]["tile_types"]] == ["4-gon", "8-gon"]
        assert data["rule"]["matrix"] == [[0, 1], [2, 1]]

    def test_fsr_obstructed(self, capsys):
        code, out, _ = run(capsys, "mate", "fsr", "7/8", "1/4")
        assert code == 3
        data = json.loads(out)
        assert data["error"] == "ObstructedMating"
        assert len(data["report"]["witnesses"]) >= 1

    def test_fsr_single_tree(self, capsys):
        code, out, _ = run(capsys, "mate", "fsr", "7/8", "1/4", "--single-tree", "alpha")
        assert code == 0
        data = json.loads(out)
        assert [t["name"] for t in data["rule"]["tile_types"]] == ["10-gon"]
        assert data["rule"]["matrix"] == [[2]]

    def test_pseudo_equator_pinched(self, capsys):
        code, out, _ = run(capsys, "mate", "pseudo-equator", "1/6", "13/14")
        assert code == 4
        assert json.loads(out)["pinched"] is True

    def test_pseudo_equator_success(self, capsys):
        code, out, _ = run(capsys, "mate", "pseudo-equator", "1/6", "1/6")
        assert code == 0
        data = json.loads(out)
        assert data["decomposition"]["recovered_pair"] == ["1/6", "1/6"]

    def test_invalid_mating(self, capsys):
        code, _, err = run(capsys, "mate", "validate", "1/4", "3/4")
        assert code == 2
        assert json.loads(err)["reason"] == "ConjugateLimbs"

    def test_not_misiurewicz(self, capsys):
        code, _, err = run(capsys, "mate", "validate", "1/6", "1/3")
        assert code == 2
        assert json.loads(err)["reason"] == "NotMisiurewicz"

    def test_decimal_rejected(self, capsys):
        code, _, _ = run(capsys, "poly", "tree", "0.5")
        assert code == 64

    def test_unknown_command(self, capsys):
        code, _, _ = run(capsys, "nonsense")
        assert code == 64

    def test_level_too_deep(self, capsys):
        code, _, _ = run(
            capsys,
            "--expansion-bound", "2",
            "render", "1/6", "1/6", "--format", "json", "--target", "complex", "--level", "5",
        )
        assert code == 5


class TestArtifacts:
    def test_poly_tree(self, capsys):
        code, out, _ = run(capsys, "poly", "tree", "1/6")
        assert code == 0
        data = json.loads(out)
        assert len(data["vertices"]) == 4
        assert sum(1 for v in data["vertices"] if v["branch"]) == 1

    def test_partition(self, capsys):
        code, out, _ = run(capsys, "mate", "partition", "1/6", "1/6")
        assert code == 0
        assert len(json.loads(out)["tau_classes"]) == 6

    def test_obstruction_report(self, capsys):
        code, out, _ = run(capsys, "mate", "obstruction", "7/8", "1/4")
        assert code == 0
        assert json.loads(out)["status"] == "obstructed"

    def test_rule_iterate_census(self, capsys):
        code, out, _ = run(capsys, "rule", "iterate", "1/6", "1/6", "--levels", "3")
        assert code == 0
        data = json.loads(out)
        assert data["censuses"] == [[1, 1], [2, 2], [4, 4], [8, 8]]
        assert [c["level"] for c in data["complexes"]] == [0, 1, 2, 3]

    def test_render_formats(self, capsys):
        for fmt, needle in (("json", '"V"'), ("dot", "graph complex"), ("svg", "<svg")):
            code, out, _ = run(
                capsys, "render", "1/6", "1/6", "--format", fmt, "--target", "complex"
            )
            assert code == 0 and needle in out

    def test_render_expanded_level(self, capsys):
        code, out, _ = run(
            capsys, "render", "1/6", "1/6", "--format", "json", "--target", "complex",
            "--level", "2",
        )
        assert code == 0
        data = json.loads(out)
        assert (data["V"], data["E"], data["F"]) == (18, 24, 8)


class TestDeterminismAndCache:
    def test_repeated_runs_identical(self, capsys):
        _, out1, _ = run(capsys, "mate", "fsr", "1/6", "1/6")
        _, out2, _ = run(capsys, "mate", "fsr", "1/6", "1/6")
        assert out1 == out2

    def test_workspace_transparency(self, capsys, tmp_path):
        _, plain, _ = run(capsys, "mate", "partition", "1/6", "1/6")
        ws = str(tmp_path / "cache")
        code, first, _ = run(capsys, "--workspace", ws, "mate", "partition", "1/6", "1/6")
        assert code == 0
        code, second, _ = run(capsys, "--workspace", ws, "mate", "partition", "1/6", "1/6")
        assert code == 0
        assert plain == first == second
        assert any((tmp_path / "cache").iterdir())

    def test_cache_schema_guard(self, tmp_path):
        from quadmating.workspace import Workspace

        ws = Workspace(tmp_path / "w")
        ws.put("op", {"x": 1}, "payload\n")
        assert ws.get("op", {"x": 1}) == "payload\n"
        # corrupt the schema version
        path = next((tmp_path / "w").glob("op__*.json"))
        entry = json.loads(path.read_text())
        entry["schema"] = -1
        path.write_text(json.dumps(entry))
        assert ws.get("op", {"x": 1}) is None
