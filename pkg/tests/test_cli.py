import json

import pandas as pd
from pytest import raises

from entlab.cli import EXIT_ERROR, EXIT_PASSED, build_parser, main, result_frame, run
from entlab.core.exceptions import PlantingInfeasibleError, UnknownSubcommandError
from entlab.experiments.suites import SUITES, SuiteResult
from entlab.experiments.workflow import WorkflowState, make_suite_node


def write_config(tmp_path, **values):
    lines = [
        f"run_log_path = {tmp_path / 'runs' / 'runs.jsonl'}",
        f"results_dir = {tmp_path / 'results'}",
    ]
    lines += [f"{key} = {value}" for key, value in values.items()]
    path = tmp_path / "lab.conf"
    path.write_text("\n".join(lines) + "\n")
    return str(path)


def run_log_lines(tmp_path):
    return [json.loads(line) for line in (tmp_path / "runs" / "runs.jsonl").read_text().splitlines()]


def test_moment_check_prints_a_sorted_record(lab_settings, tmp_path, capsys):
    code = main(["moment-check", "--config", write_config(tmp_path), "--seed", "3"])
    assert code == EXIT_PASSED
    printed = capsys.readouterr().out.strip()
    record = json.loads(printed)
    assert list(record) == sorted(record)
    assert record["schema_version"] == 1
    assert record["subcommand"] == "moment-check"
    assert record["seed"] == 3
    assert record["passed"] is True
    assert record["metrics"]["first_disagreement_size_n4_m1_k1"] == 3
    assert run_log_lines(tmp_path)[-1]["checks"] == record["checks"]


def test_records_do_not_depend_on_the_run(lab_settings, tmp_path):
    config = write_config(tmp_path)
    first, _ = run("classical-oracle", config, seed=5)
    second, _ = run("classical-oracle", config, seed=5)
    assert first.metrics == second.metrics
    assert first.checks == second.checks
    assert len(run_log_lines(tmp_path)) == 2


def test_classical_oracle_csv_output(lab_settings, tmp_path):
    out = tmp_path / "oracle.csv"
    code = main(["classical-oracle", "--config", write_config(tmp_path), "--format", "csv", "--out", str(out)])
    assert code == EXIT_PASSED
    table = pd.read_csv(out)
    assert list(table.columns) == ["protocol", "bits", "advantage"]
    assert table.loc[0, "advantage"] == "1/3"


def test_unknown_subcommand_is_a_usage_error():
    with raises(SystemExit) as exit_info:
        build_parser().parse_args(["teleport"])
    assert exit_info.value.code == 2
    with raises(UnknownSubcommandError):
        run("teleport")


def test_bad_config_exits_with_error_and_logs_the_failure(lab_settings, tmp_path, capsys):
    config = write_config(tmp_path, warp_factor=9)
    assert main(["moment-check", "--config", config]) == EXIT_ERROR
    assert "ConfigError" in capsys.readouterr().err
    failed = run_log_lines(tmp_path)[-1]
    assert failed["passed"] is False
    assert failed["error"].startswith("ConfigError")


def test_result_frame_without_table():
    result = SuiteResult("demo", metrics={"rate": 0.5}, checks={"ok": True})
    frame = result_frame(result)
    assert list(frame.columns) == ["name", "kind", "value"]
    assert list(frame["kind"]) == ["metric", "check"]


def test_suite_node_records_errors(monkeypatch):
    def infeasible(seed, jobs):
        raise PlantingInfeasibleError("no instance")

    monkeypatch.setitem(SUITES, "forr-demo", infeasible)
    node = make_suite_node("forr-demo")
    state: WorkflowState = {"seed": 1, "jobs": 1, "results": {}, "errors": {}}
    state = node(state)
    assert state["errors"]["forr-demo"] == "PlantingInfeasibleError: no instance"
    assert not state["results"]["forr-demo"].passed
