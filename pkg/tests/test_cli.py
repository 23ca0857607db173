import json

import pytest

from ruleform.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


@pytest.fixture()
def demo_paths(demo_catalog_path, d2d6_rules_path, demo_rules_path):
    return str(demo_catalog_path), str(d2d6_rules_path), str(demo_rules_path)


def test_compile_emits_display_rules(capsys, demo_paths):
    catalog, d2d6, _ = demo_paths
    code, out, _ = run(capsys, "compile", d2d6, catalog)
    assert code == 0
    doc = json.loads(out)
    assert doc["ruleCount"] == 2
    assert doc["displayRuleCount"] == doc["expectedDisplayRuleCount"] == 6
    assert len(doc["displayRules"]) == 6


def test_compile_to_file(capsys, tmp_path, demo_paths):
    catalog, d2d6, _ = demo_paths
    out_path = tmp_path / "display.json"
    code, out, _ = run(capsys, "compile", d2d6, catalog, "-o", str(out_path))
    assert code == 0
    assert json.loads(out_path.read_text())["displayRuleCount"] == 6


def test_lint_reports_unused_conditions(capsys, demo_paths):
    catalog, d2d6, _ = demo_paths
    code, out, _ = run(capsys, "lint", d2d6, catalog)
    assert code == 0
    assert "unused_condition" in out


def test_lint_clean(capsys, demo_paths):
    catalog, _, demo = demo_paths
    code, out, _ = run(capsys, "lint", demo, catalog)
    assert code == 0
    assert "no issues found" in out


def test_order_reports_objective_one_for_d2d6(capsys, demo_paths):
    catalog, d2d6, _ = demo_paths
    for mode in ("frequency", "optimize", "brute"):
        code, out, _ = run(capsys, "order", d2d6, catalog, "--mode", mode, "--format", "data")
        assert code == 0
        doc = json.loads(out)
        assert doc["objective"] == 1
        assert doc["comparison"]["frequency"] == 1
        assert doc["comparison"]["optimize"] == 1
        assert doc["comparison"]["brute"] == 1


def test_order_with_drugs(capsys, demo_paths):
    catalog, d2d6, _ = demo_paths
    code, out, _ = run(
        capsys, "order", d2d6, catalog, "--drugs", "antipsychotic", "--format", "data"
    )
    assert code == 0
    assert json.loads(out)["objective"] == 3


def test_order_bench_small(capsys):
    code, out, _ = run(
        capsys,
        "order-bench",
        "--instances", "5",
        "--clinical", "5",
        "--rules", "4",
        "--seed", "0",
        "--format", "data",
    )
    assert code == 0
    doc = json.loads(out)
    assert len(doc["instances"]) == 5
    assert doc["heuristicRegressions"] == 0
    assert doc["optimalMatches"] >= 4


def test_run_cases(capsys, tmp_path, demo_paths):
    catalog, d2d6, _ = demo_paths
    cases = tmp_path / "cases.json"
    cases.write_text(
        json.dumps(
            [
                {"id": "fibre_case", "drugs": ["fibre"], "groundTruth": []},
                {
                    "id": "d6_case",
                    "drugs": ["antipsychotic"],
                    "groundTruth": ["parkinsonism"],
                },
            ]
        )
    )
    code, out, _ = run(capsys, "run-cases", d2d6, catalog, str(cases), "--format", "data")
    assert code == 0
    doc = json.loads(out)
    by_id = {c["id"]: c for c in doc["cases"]}
    # fibre blocks every D2 display rule; no antipsychotic blocks D6 entirely
    assert by_id["fibre_case"]["conditionsDisplayed"] == 0
    assert by_id["fibre_case"]["rulesTriggered"] == 0
    assert by_id["d6_case"]["conditionsDisplayed"] == 3
    assert by_id["d6_case"]["rulesTriggered"] == 1
    assert doc["mean"]["drugCount"] == 1.0


def test_run_cases_empty_suite(capsys, tmp_path, demo_paths):
    catalog, d2d6, _ = demo_paths
    cases = tmp_path / "cases.json"
    cases.write_text("[]")
    code, out, _ = run(capsys, "run-cases", d2d6, catalog, str(cases), "--format", "data")
    assert code == 0
    doc = json.loads(out)
    assert doc["cases"] == [] and doc["mean"] is None
    code, out, _ = run(capsys, "run-cases", d2d6, catalog, str(cases))
    assert code == 0
    assert "Mean" not in out


def test_generate_writes_files(capsys, tmp_path):
    code, out, _ = run(
        capsys,
        "generate",
        "--rules", "30",
        "--clinical", "20",
        "--drugs", "10",
        "--stopp-fraction", "0.5",
        "--seed", "7",
        "--out-dir", str(tmp_path),
        "--cases", "5",
    )
    assert code == 0
    assert (tmp_path / "catalog.yaml").exists()
    assert (tmp_path / "rulebase.rules").exists()
    cases = json.loads((tmp_path / "cases.json").read_text())
    assert len(cases) == 5


def test_generate_deterministic(capsys, tmp_path):
    args = [
        "generate", "--rules", "10", "--clinical", "8", "--drugs", "4",
        "--stopp-fraction", "0.5", "--seed", "9",
    ]
    code, _, _ = run(capsys, *args, "--out-dir", str(tmp_path / "a"))
    assert code == 0
    code, _, _ = run(capsys, *args, "--out-dir", str(tmp_path / "b"))
    assert code == 0
    assert (tmp_path / "a/catalog.yaml").read_bytes() == (tmp_path / "b/catalog.yaml").read_bytes()
    assert (tmp_path / "a/rulebase.rules").read_bytes() == (tmp_path / "b/rulebase.rules").read_bytes()


def test_generate_rejects_zero_rules(capsys, tmp_path):
    code, _, err = run(
        capsys,
        "generate",
        "--rules", "0",
        "--clinical", "5",
        "--drugs", "2",
        "--out-dir", str(tmp_path),
    )
    assert code == 2
    assert "rule_count" in err


def test_dump_full_lists_referenced_conditions(capsys, demo_paths):
    catalog, d2d6, _ = demo_paths
    code, out, _ = run(capsys, "dump-full", d2d6, catalog, "--format", "data")
    assert code == 0
    doc = json.loads(out)
    ids = {item["conditionId"] for panel in doc for item in panel["items"]}
    assert ids == {"constipation", "diverticulosis", "parkinsonism", "lewy_body"}
    code, out, _ = run(capsys, "dump-full", d2d6, catalog)
    assert code == 0
    assert "total: 4 conditions" in out


def test_dump_full_empty_rulebase(capsys, tmp_path, demo_paths):
    catalog, _, _ = demo_paths
    empty = tmp_path / "empty.rules"
    empty.write_text("# nothing here\n")
    code, out, _ = run(capsys, "dump-full", str(empty), catalog)
    assert code == 0
    assert "total: 0 conditions" in out


def test_dump_full_synthetic_73(capsys, tmp_path):
    run(
        capsys,
        "generate",
        "--rules", "124",
        "--clinical", "73",
        "--drugs", "40",
        "--stopp-fraction", "0.69",
        "--seed", "1",
        "--out-dir", str(tmp_path),
    )
    code, out, _ = run(
        capsys,
        "dump-full",
        str(tmp_path / "rulebase.rules"),
        str(tmp_path / "catalog.yaml"),
    )
    assert code == 0
    # 124 rules over 73 conditions reference all or nearly all of them
    total = int(out.rsplit("total:", 1)[1].split()[0])
    assert total == 73


def test_bench_reports_percentiles(capsys, demo_paths):
    catalog, d2d6, _ = demo_paths
    code, out, _ = run(
        capsys, "bench", d2d6, catalog, "--repetitions", "50", "--format", "data"
    )
    assert code == 0
    doc = json.loads(out)
    assert doc["repetitions"] == 50
    assert doc["medianSeconds"] <= doc["p95Seconds"] or doc["p95Seconds"] >= 0


def test_usage_error_exit_code(capsys):
    code, _, err = run(capsys, "order")  # missing arguments
    assert code == 1


def test_unknown_input_file_exit_code(capsys, demo_paths):
    catalog, _, _ = demo_paths
    code, _, _ = run(capsys, "compile", "/nonexistent.rules", catalog)
    assert code == 2


def test_parse_error_exit_code(capsys, tmp_path, demo_paths):
    catalog, _, _ = demo_paths
    bad = tmp_path / "bad.rules"
    bad.write_text("rule X {\n  present clinical ghost\n  action custom \"x\"\n}\n")
    code, _, err = run(capsys, "compile", str(bad), catalog)
    assert code == 2
    assert "ghost" in err


def test_serve_fails_fast_on_missing_catalog(capsys):
    code, _, _ = run(
        capsys, "serve", "--catalog", "/nonexistent.yaml", "--rulebase", "demo=/nonexistent.rules"
    )
    assert code == 2


def test_serve_rejects_bad_mount_syntax(capsys, demo_paths):
    catalog, d2d6, _ = demo_paths
    code, _, _ = run(capsys, "serve", "--catalog", catalog, "--rulebase", "justapath")
    assert code == 1


def test_help_exits_zero(capsys):
    code, out, _ = run(capsys, "--help")
    assert code == 0
    assert "compile" in out and "serve" in out
