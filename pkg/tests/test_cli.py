import json

import pytest
from click.testing import CliRunner

from clqr.cli import EXIT_NOT_2D, EXIT_SCHEMA, main
from conftest import load_double_integrator_doc


@pytest.fixture(scope="module")
def runner():
    return CliRunner()


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    problem = d / "problem.json"
    problem.write_text(json.dumps(load_double_integrator_doc()))
    return d


@pytest.fixture(scope="module")
def solved(runner, workdir):
    part = workdir / "partition.json"
    counters = workdir / "counters.csv"
    result = runner.invoke(main, [
        "solve", "--input", str(workdir / "problem.json"),
        "--algorithm", "dp", "--n-max", "2",
        "--out-partition", str(part), "--out-counters", str(counters),
    ])
    assert result.exit_code == 0, result.output
    return part, counters, result.output


def test_solve_outputs(solved):
    part, counters, output = solved
    assert "N_reached=2" in output
    assert "finitely_determined=" in output
    doc = json.loads(part.read_text())
    assert doc["schema"] == 1 and doc["horizon"] == 2
    header = counters.read_text().splitlines()[0]
    assert header.startswith("N,candidates,pruning_tests")


def test_solve_is_deterministic(runner, workdir, solved):
    part2 = workdir / "partition2.json"
    counters2 = workdir / "counters2.csv"
    result = runner.invoke(main, [
        "solve", "--input", str(workdir / "problem.json"),
        "--algorithm", "dp", "--n-max", "2",
        "--out-partition", str(part2), "--out-counters", str(counters2),
    ])
    assert result.exit_code == 0
    assert part2.read_bytes() == solved[0].read_bytes()
    assert counters2.read_bytes() == solved[1].read_bytes()


def test_solve_missing_input(runner, tmp_path):
    result = runner.invoke(main, [
        "solve", "--input", str(tmp_path / "nope.json"), "--n-max", "1",
        "--out-partition", str(tmp_path / "p.json"),
        "--out-counters", str(tmp_path / "c.csv"),
    ])
    assert result.exit_code == EXIT_SCHEMA


def test_solve_bad_schema(runner, tmp_path):
    doc = load_double_integrator_doc()
    doc["schema"] = 9
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(doc))
    result = runner.invoke(main, [
        "solve", "--input", str(bad), "--n-max", "1",
        "--out-partition", str(tmp_path / "p.json"),
        "--out-counters", str(tmp_path / "c.csv"),
    ])
    assert result.exit_code == EXIT_SCHEMA


def test_solve_bad_env_seed(runner, workdir, monkeypatch):
    monkeypatch.setenv("DPMPQP_SEED", "not-a-number")
    result = runner.invoke(main, [
        "solve", "--input", str(workdir / "problem.json"), "--n-max", "1",
        "--out-partition", str(workdir / "px.json"),
        "--out-counters", str(workdir / "cx.csv"),
    ])
    assert result.exit_code == EXIT_SCHEMA


def test_eval_at_origin(runner, solved):
    part = solved[0]
    result = runner.invoke(main, ["eval", "--partition", str(part),
                                  "--x", "0.0,0.0"])
    assert result.exit_code == 0
    assert abs(float(result.output.strip())) < 1e-9


def test_eval_infeasible(runner, solved):
    result = runner.invoke(main, ["eval", "--partition", str(solved[0]),
                                  "--x", "10000,10000"])
    assert result.exit_code == 0
    assert result.output.strip() == "infeasible"


def test_eval_malformed_vector(runner, solved):
    result = runner.invoke(main, ["eval", "--partition", str(solved[0]),
                                  "--x", "1.0,abc"])
    assert result.exit_code == EXIT_SCHEMA


def test_eval_wrong_dimension(runner, solved):
    result = runner.invoke(main, ["eval", "--partition", str(solved[0]),
                                  "--x", "1.0"])
    assert result.exit_code == EXIT_SCHEMA


def test_plot_svg_and_curves(runner, workdir, solved):
    part, counters, _ = solved
    svg = workdir / "partition.svg"
    curves = workdir / "curves.csv"
    result = runner.invoke(main, [
        "plot", "--partition", str(part), "--counters", str(counters),
        "--out", str(svg), "--out-curves", str(curves),
    ])
    assert result.exit_code == 0, result.output
    assert svg.read_text().startswith("<svg")
    assert curves.read_text().startswith("algorithm,N,metric,value")


def test_plot_csv_output(runner, workdir, solved):
    out = workdir / "regions.csv"
    result = runner.invoke(main, ["plot", "--partition", str(solved[0]),
                                  "--out", str(out)])
    assert result.exit_code == 0
    assert out.read_text().startswith("region,")


def test_plot_svg_rejects_3d(runner, tmp_path):
    fake = {"schema": 1, "horizon": 1,
            "regions": [{"active_set": [], "C": [[1.0, 0.0, 0.0]], "d": [1.0],
                         "gain": [[0.0, 0.0, 0.0]], "offset": [0.0],
                         "stage_classification": "interior"}],
            "metadata": {}}
    p = tmp_path / "fake.json"
    p.write_text(json.dumps(fake))
    result = runner.invoke(main, ["plot", "--partition", str(p),
                                  "--out", str(tmp_path / "o.svg")])
    assert result.exit_code == EXIT_NOT_2D
