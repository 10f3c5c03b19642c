import csv
import json
import textwrap

import numpy as np
import pytest

from dopg import cli
from dopg.errors import ResonanceError

CASE1 = """
case: {name: case1, alpha: 1e-4}
discretization: {N: 4, M: 5}
experiment:
  solver: both
  grid_density: 31
  refine: {axis: space, values: [2, 3, 4]}
  bench: {dims: [1, 2], N: 3, M: 4, repeats: 1, crossover_M: [2, 3]}
"""


@pytest.fixture
def config(tmp_path):
    def make(text=CASE1, name="run.yaml"):
        p = tmp_path / name
        p.write_text(textwrap.dedent(text))
        return str(p)

    return make


def rows(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


def test_solve_writes_outputs(config, tmp_path):
    out = tmp_path / "out"
    assert cli.main(["solve", "--config", config(), "--out", str(out)]) == 0
    coeffs = rows(out / "coefficients.csv")
    assert len(coeffs) == 4 * 5 and list(coeffs[0]) == ["n", "m1", "value"]
    err = rows(out / "error.csv")
    assert float(err[0]["linf"]) <= 1e-9
    man = json.loads((out / "manifest.json").read_text())
    assert man["manifest"]["command"] == "solve"
    assert man["manifest"]["results"]["fast_direct_discrepancy"] <= 1e-10
    assert man["config"]["case"]["name"] == "case1"


def test_malformed_config_exits_2_without_output(config, tmp_path, capsys):
    bad = config("case: {name: case1}\ndiscretization:\n  N: 0\n  M: 3\n", "bad.yaml")
    out = tmp_path / "never"
    assert cli.main(["solve", "--config", bad, "--out", str(out)]) == 2
    assert "line 3" in capsys.readouterr().err
    assert not out.exists()


def test_converge_writes_csv_and_svg(config, tmp_path):
    out = tmp_path / "conv"
    assert cli.main(["converge", "--config", config(), "--out", str(out)]) == 0
    table = rows(out / "convergence.csv")
    assert [r["M"] for r in table] == ["2", "3", "4"]
    assert all(r["status"] == "ok" for r in table)
    assert table[-1]["rate"] and not table[0]["rate"]
    assert (out / "convergence.svg").read_text().lstrip().startswith("<?xml")


def test_converge_single_step(config, tmp_path):
    path = config(CASE1.replace("values: [2, 3, 4]", "values: [3]"))
    out = tmp_path / "one"
    assert cli.main(["converge", "--config", path, "--out", str(out)]) == 0
    table = rows(out / "convergence.csv")
    assert len(table) == 1 and table[0]["rate"] == ""


def test_converge_failure_keeps_partial_results(config, tmp_path, monkeypatch):
    real = cli.fast_solve
    calls = []

    def flaky(ops, F, eig=None):
        calls.append(1)
        if len(calls) == 2:
            raise ResonanceError("Lambda vanished")
        return real(ops, F, eig)

    monkeypatch.setattr(cli, "fast_solve", flaky)
    path = config(CASE1.replace("solver: both", "solver: fast"))
    out = tmp_path / "fail"
    assert cli.main(["converge", "--config", path, "--out", str(out)]) == 3
    table = rows(out / "convergence.csv")
    assert table[0]["status"] == "ok"
    assert table[1]["status"].startswith("failed")


def test_solve_numeric_failure_exit_3(config, tmp_path, monkeypatch, capsys):
    def boom(ops, F, eig=None):
        raise ResonanceError("Lambda vanished")

    monkeypatch.setattr(cli, "fast_solve", boom)
    path = config(CASE1.replace("solver: both", "solver: fast"))
    assert cli.main(["solve", "--config", path, "--out", str(tmp_path / "x")]) == 3
    assert "ResonanceError" in capsys.readouterr().err


def test_bench(config, tmp_path):
    out = tmp_path / "bench"
    assert cli.main(["bench", "--config", config(), "--out", str(out), "--seed", "7"]) == 0
    table = rows(out / "benchmark.csv")
    studies = {r["study"] for r in table}
    assert studies == {"table", "crossover"}
    assert all(r["status"] == "ok" for r in table)
    man = json.loads((out / "manifest.json").read_text())
    assert man["manifest"]["seed"] == 7
    assert set(man["manifest"]["results"]["fast_seconds"]) == {"1", "2"}


def test_dump_matrices(config, tmp_path):
    out = tmp_path / "mats"
    assert cli.main(["dump-matrices", "--config", config(), "--out", str(out)]) == 0
    M = np.loadtxt(out / "matrices" / "M_1.csv", delimiter=",")
    assert M.shape == (5, 5)
    assert M[0, 0] == pytest.approx(-2.4, rel=1e-15)


def test_manifest_rerun_reproduces_coefficients(config, tmp_path):
    first, second = tmp_path / "a", tmp_path / "b"
    assert cli.main(["solve", "--config", config(), "--out", str(first)]) == 0
    manifest = str(first / "manifest.json")
    assert cli.main(["solve", "--config", manifest, "--out", str(second)]) == 0
    assert (first / "coefficients.csv").read_text() == (second / "coefficients.csv").read_text()


def test_threads_flag(config, tmp_path):
    out = tmp_path / "t"
    assert cli.main(["solve", "--config", config(), "--out", str(out), "--threads", "1"]) == 0
    assert json.loads((out / "manifest.json").read_text())["manifest"]["threads"] == 1
    assert cli.main(["solve", "--config", config(), "--out", str(out), "--threads", "0"]) == 2


def test_forcing_without_case(config, tmp_path):
    path = config("""
        problem:
          temporal: {kind: dirac, at: 0.3}
          diffusion: {kind: dirac, at: 0.7}
          load: "t * sin(pi * x1)"
        discretization: {N: 3, M: 4}
    """)
    out = tmp_path / "f"
    assert cli.main(["solve", "--config", path, "--out", str(out)]) == 0
    assert not (out / "error.csv").exists()
    assert cli.main(["converge", "--config", path, "--out", str(out)]) == 2
