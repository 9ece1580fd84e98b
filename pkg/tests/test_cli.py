import csv
import json

import pytest

from cli import EXIT_CONFIG, EXIT_OK, EXIT_SOLVER, EXIT_TARGET, main
from utils.validation import POISEUILLE_PARAMS

UNIFORM = {"case": "uniform-flow", "parameters": {"polynomial_degree": 6}}
SQUARE = {"vertices": [[0, 0], [1, 0], [1, 1], [0, 1]], "edges": [{}] * 4, "lightning_poles": 0}


@pytest.fixture
def write_config(tmp_path):
    def write(document, name="config.json"):
        path = tmp_path / name
        path.write_text(document if isinstance(document, str) else json.dumps(document))
        return str(path)
    return write


class TestSolve:
    """The solve subcommand and its exit codes."""

    def test_writes_artifacts(self, tmp_path, write_config):
        """A successful solve writes the report, poles, field grid and contours."""
        out = tmp_path / "out"
        code = main(["solve", "--config", write_config(UNIFORM), "--out-dir", str(out), "--grid", "12", "9"])
        assert code == EXIT_OK
        assert {p.name for p in out.iterdir()} == {"report.json", "poles.csv", "field.csv", "psi.svg"}
        report = json.loads((out / "report.json").read_text())
        assert report["max_residual"] < 1e-10
        with (out / "field.csv").open() as f:
            assert sum(1 for _ in csv.reader(f)) == 1 + 12 * 9

    def test_accuracy_target_missed(self, tmp_path, write_config):
        """An unreachable accuracy target exits with the target code but keeps the artifacts."""
        out = tmp_path / "out"
        code = main(["solve", "--config", write_config(UNIFORM), "--out-dir", str(out),
                     "--accuracy-target", "20", "--grid", "4", "4"])
        assert code == EXIT_TARGET
        report = json.loads((out / "report.json").read_text())
        assert report["target_met"] is False
        assert report["accuracy_target"] == 20

    def test_poiseuille_pressure_drop(self, tmp_path, write_config, capsys):
        """The straight channel reports the Poiseuille pressure drop."""
        document = {"case": "constricted-channel", "parameters": POISEUILLE_PARAMS, "output": {"write_grid": False}}
        out = tmp_path / "out"
        assert main(["solve", "--config", write_config(document), "--out-dir", str(out)]) == EXIT_OK
        assert json.loads((out / "report.json").read_text())["pressure_drop"] == pytest.approx(24.0, abs=1e-8)
        assert not (out / "field.csv").exists()
        assert "pressure drop: 24" in capsys.readouterr().out

    def test_weighting_override(self, tmp_path, write_config):
        """The command-line weighting replaces the document's."""
        out = tmp_path / "out"
        code = main(["solve", "--config", write_config(UNIFORM), "--out-dir", str(out), "--weighting", "spacing",
                     "--grid", "4", "4"])
        assert code == EXIT_OK

    @pytest.mark.parametrize("document", [
        "{not json",
        {"case": "no-such-case"},
        {"case": "uniform-flow", "domain": SQUARE},
        {"case": "constricted-channel", "parameters": {"lam": 1.5}},
        {"case": "uniform-flow", "schema_version": 2},
    ])
    def test_configuration_errors(self, tmp_path, write_config, document):
        """Invalid documents exit with the configuration code before any output is created."""
        out = tmp_path / "out"
        assert main(["solve", "--config", write_config(document), "--out-dir", str(out)]) == EXIT_CONFIG
        assert not out.exists()

    def test_missing_config(self, tmp_path):
        """An unreadable configuration file is a configuration error."""
        assert main(["solve", "--config", str(tmp_path / "absent.json"), "--out-dir", str(tmp_path)]) == EXIT_CONFIG

    def test_solver_failure(self, tmp_path, write_config):
        """More unknowns than samples is a solver failure."""
        document = {"domain": {**SQUARE, "samples_per_edge": 2, "polynomial_degree": 200}}
        assert main(["solve", "--config", write_config(document), "--out-dir", str(tmp_path / "out")]) == EXIT_SOLVER


def test_poles(tmp_path, write_config, capsys):
    """The poles subcommand writes AAA poles for the constricted channel."""
    out = tmp_path / "out"
    document = {"case": "constricted-channel", "parameters": {"lam": 0.6}}
    assert main(["poles", "--config", write_config(document), "--out-dir", str(out)]) == EXIT_OK
    with (out / "poles.csv").open() as f:
        rows = list(csv.DictReader(f))
    assert rows and all(row["source"] == "aaa" for row in rows)
    assert "constricted-channel" in capsys.readouterr().out


class TestSweep:
    """Parameter sweeps."""

    def test_unsupported_case(self, tmp_path, write_config):
        """Only the constricted channel can be swept."""
        document = {"case": "two-cylinder", "parameters": {"case": "d"}}
        code = main(["sweep", "--config", write_config(document), "--out-dir", str(tmp_path / "out"),
                     "--values", "0.2"])
        assert code == EXIT_CONFIG

    def test_invalid_value(self, tmp_path, write_config):
        """Every value is validated before any solve."""
        code = main(["sweep", "--config", write_config({"case": "constricted-channel"}),
                     "--out-dir", str(tmp_path / "out"), "--values", "0.2", "1.0"])
        assert code == EXIT_CONFIG
        assert not (tmp_path / "out").exists()

    def test_missing_values(self, tmp_path, write_config):
        """A sweep without values is a configuration error."""
        code = main(["sweep", "--config", write_config({"case": "constricted-channel"}),
                     "--out-dir", str(tmp_path / "out")])
        assert code == EXIT_CONFIG

    @pytest.mark.slow
    def test_sweep_table(self, tmp_path, write_config):
        """The table has one row per value in the requested order."""
        document = {"case": "constricted-channel", "sweep": {"values": [0.4, 0.2], "table_csv": "dp.csv"}}
        out = tmp_path / "out"
        assert main(["sweep", "--config", write_config(document), "--out-dir", str(out)]) == EXIT_OK
        with (out / "dp.csv").open() as f:
            rows = list(csv.DictReader(f))
        assert [float(row["lam"]) for row in rows] == [0.4, 0.2]
        assert all(float(row["rel_elt4"]) <= 0.03 for row in rows)


@pytest.mark.slow
def test_validate(tmp_path, capsys):
    """The quick acceptance suite passes and is written to validate.json."""
    out = tmp_path / "out"
    assert main(["validate", "--out-dir", str(out)]) == EXIT_OK
    summary = json.loads((out / "validate.json").read_text())
    assert summary["passed"] is True
    assert len(summary["checks"]) >= 4
    assert "couette velocity" in capsys.readouterr().out
