import json
import subprocess
import sys

import jsonschema
import numpy as np
import pytest

from mlurn import cli


def run_json(capsys, *argv):
    code = cli.main(list(argv) + ["--json"])
    out = json.loads(capsys.readouterr().out)
    return code, out


def validate(name, payload):
    jsonschema.validate(payload, cli.SCHEMAS[name])


class TestSolve:
    def test_examples(self, capsys):
        expected = {
            "condorcet-winner": ["1", "0", "0"],
            "condorcet-cycle": ["1/3", "1/3", "1/3"],
            "cycle-with-loser": ["1/3", "1/6", "1/2", "0"],
        }
        for name, lot in expected.items():
            code, out = run_json(capsys, "solve", "--example", name)
            assert code == 0
            validate("solve", out)
            assert out["lottery"] == lot and out["unique"] == "unique"

    def test_text_output(self, capsys):
        assert cli.main(["solve", "--example", "condorcet-winner"]) == 0
        text = capsys.readouterr().out
        assert "maximal lottery: (1, 0, 0)" in text
        assert "condorcet winner: 1" in text

    def test_profile_file(self, capsys, tmp_path):
        f = tmp_path / "p.txt"
        f.write_text("d=2\n3: 2 1\n1: 1 2\n")
        code, out = run_json(capsys, "solve", "--profile", str(f))
        assert code == 0 and out["lottery"] == ["0", "1"]
        assert len(out["manifest"]["input_sha256"]) == 64

    def test_parse_error_exit_code(self, capsys, tmp_path):
        f = tmp_path / "bad.txt"
        f.write_text("d=3\n1: 1 2\n")
        assert cli.main(["solve", "--profile", str(f)]) == 2
        assert "line 2" in capsys.readouterr().err

    def test_missing_input(self, capsys):
        assert cli.main(["solve"]) == 2
        assert cli.main(["solve", "--example", "nope"]) == 2
        assert cli.main(["solve", "--profile", "/nonexistent/file"]) == 2


class TestSimulate:
    def test_json_and_csv(self, capsys, tmp_path):
        out_csv = tmp_path / "run.csv"
        code, out = run_json(capsys, "simulate", "--example", "condorcet-winner", "--balls", "20",
                             "--mutation", "0.05", "--rounds", "2000", "--seed", "3", "--out", str(out_csv))
        assert code == 0
        validate("simulate", out)
        assert out["runs"][0]["rounds"] == 2000
        assert out_csv.read_text().startswith("round,count_1,count_2,count_3,winner,")
        manifest = json.loads((tmp_path / "run.csv.manifest.json").read_text())
        assert manifest["seed"] == 3 and manifest["subcommand"] == "simulate"
        assert manifest["argv"][0] == "simulate"

    def test_replay_reproduces_bytes(self, capsys, tmp_path):
        first = tmp_path / "a.csv"
        cli.main(["simulate", "--example", "condorcet-cycle", "--balls", "30", "--mutation", "1/20",
                  "--rounds", "5000", "--seed", "9", "--stride", "7", "--out", str(first)])
        second = tmp_path / "b.csv"
        assert cli.main(["replay", str(first) + ".manifest.json", "--out", str(second)]) == 0
        capsys.readouterr()
        assert first.read_bytes() == second.read_bytes()

    def test_several_runs(self, capsys, tmp_path):
        code, out = run_json(capsys, "simulate", "--example", "condorcet-cycle", "--balls", "10",
                             "--mutation", "0.1", "--rounds", "100", "--runs", "3",
                             "--out", str(tmp_path / "r.csv"))
        assert code == 0 and len(out["runs"]) == 3 and len(out["files"]) == 3
        assert len({r["seed"] for r in out["runs"]}) == 3

    def test_round_guard(self, capsys):
        code = cli.main(["simulate", "--example", "condorcet-cycle", "--balls", "10", "--mutation", "0.1",
                         "--rounds", "1000", "--max-rounds", "999"])
        assert code == 3

    def test_bad_rate(self, capsys):
        code = cli.main(["simulate", "--example", "condorcet-cycle", "--balls", "10", "--mutation", "2",
                         "--rounds", "10"])
        assert code == 2


class TestChainCommands:
    def test_stationary(self, capsys, tmp_path):
        out_csv = tmp_path / "pi.csv"
        code, out = run_json(capsys, "stationary", "--example", "condorcet-winner", "--balls", "30",
                             "--mutation", "0.02", "--delta", "0.4", "--out", str(out_csv))
        assert code == 0
        validate("stationary", out)
        assert out["states"] == 496 and out["ml_ball_mass"] >= 0.9
        assert len(out_csv.read_text().splitlines()) == 497

    def test_exact_method(self, capsys):
        code, out = run_json(capsys, "stationary", "--example", "condorcet-winner", "--balls", "5",
                             "--mutation", "1/10", "--method", "gth")
        assert code == 0 and out["method"] == "gth"

    def test_state_cap(self, capsys):
        code = cli.main(["stationary", "--example", "condorcet-winner", "--balls", "100",
                         "--mutation", "0.1", "--state-cap", "100"])
        assert code == 3

    def test_no_mutation(self, capsys):
        assert cli.main(["stationary", "--example", "condorcet-winner", "--balls", "5",
                         "--mutation", "0"]) == 2

    def test_levelsets(self, capsys):
        code, out = run_json(capsys, "levelsets", "--example", "condorcet-winner", "--balls", "20",
                             "--mutation", "0.02", "--alt", "1")
        assert code == 0
        validate("levelsets", out)
        assert len(out["sigma"]) == 21 and sum(out["sigma"]) == pytest.approx(1)
        assert cli.main(["levelsets", "--example", "condorcet-winner", "--balls", "5",
                         "--mutation", "0.1", "--alt", "4"]) == 2


class TestDynamicsCommands:
    def test_ode(self, capsys, tmp_path):
        code, out = run_json(capsys, "ode", "--example", "cycle-with-loser-printed", "--mutation", "0.01",
                             "--t-end", "50", "--start", "0.4,0.3,0.2,0.1", "--out", str(tmp_path / "o.csv"))
        assert code == 0
        validate("ode", out)
        assert sum(out["final"]) == pytest.approx(1)
        header = (tmp_path / "o.csv").read_text().splitlines()[0]
        assert header == "t,y_1,y_2,y_3,y_4,entropy"

    def test_ode_bad_start(self, capsys):
        assert cli.main(["ode", "--example", "condorcet-cycle", "--mutation", "0.01", "--t-end", "1",
                         "--start", "0.5,0.5"]) == 2

    def test_fixedpoint(self, capsys):
        code, out = run_json(capsys, "fixedpoint", "--example", "condorcet-winner",
                             "--schedule", "0.1,0.02,0.005")
        assert code == 0
        validate("fixedpoint", out)
        d = [p["distance_to_ml"] for p in out["points"]]
        assert d[0] > d[1] > d[2]
        assert cli.main(["fixedpoint", "--example", "condorcet-winner", "--schedule", "0.01,0.1"]) == 2


class TestBoundsAndAxioms:
    def test_bounds(self, capsys):
        code, out = run_json(capsys, "bounds", "--example", "condorcet-winner", "--delta", "0.2",
                             "--tau", "0.1")
        assert code == 0
        validate("bounds", out)
        assert out["recipe"]["N_min"] == 70 and out["recipe"]["beta"] == "5/8"
        assert out["certification"] is None

    def test_bounds_without_winner(self, capsys):
        assert cli.main(["bounds", "--example", "condorcet-cycle", "--delta", "0.2", "--tau", "0.1"]) == 2
        assert "Condorcet" in capsys.readouterr().err

    def test_axioms(self, capsys):
        code, out = run_json(capsys, "axioms", "--suite", "population", "--samples", "20")
        assert code == 0
        validate("axioms", out)
        assert out["failures"] == 0
        code, out = run_json(capsys, "axioms", "--suite", "condorcet", "--samples", "10",
                             "--delta", "0.01", "--epsilon", "0.01")
        assert code == 0 and out["failures"] == 0

    def test_axioms_reports_failures(self, capsys):
        # the perturbed rule cannot satisfy exact consistency
        code, out = run_json(capsys, "axioms", "--suite", "population", "--samples", "20",
                             "--delta", "0.05", "--epsilon", "0")
        assert code == 1 and out["failures"] > 0


class TestFigures:
    def test_fig2_left(self, capsys, tmp_path):
        code, out = run_json(capsys, "figures", "fig2-left", "--out-dir", str(tmp_path))
        assert code == 0
        validate("figures", out)
        lines = (tmp_path / "fig2-left.csv").read_text().splitlines()
        assert len(lines) == 1002
        assert out["summary"]["N"] == 50

    def test_fig4(self, capsys, tmp_path):
        code, out = run_json(capsys, "figures", "fig4", "--out-dir", str(tmp_path))
        assert code == 0
        lo, hi = out["summary"]["r=0"]["entropy_band_after_t50"]
        assert lo > 1e-3 and hi - lo < 0.1 * hi
        assert out["summary"]["r=0.01"]["final_entropy"] < 1e-8
        assert (tmp_path / "fig4-r0.01.csv").exists()

    def test_scaled_fig3_has_entropy(self, capsys, tmp_path):
        code, out = run_json(capsys, "figures", "fig3", "--scale", "0.01", "--out-dir", str(tmp_path))
        assert code == 0
        header = (tmp_path / "fig3.csv").read_text().splitlines()[0]
        assert header.endswith(",entropy")

    def test_unknown_and_guard(self, capsys, tmp_path):
        assert cli.main(["figures", "fig9", "--out-dir", str(tmp_path)]) == 2
        assert cli.main(["figures", "fig3", "--max-rounds", "1000", "--out-dir", str(tmp_path)]) == 3

    def test_figure_replay(self, capsys, tmp_path):
        cli.main(["figures", "fig2-left", "--seed", "4", "--out-dir", str(tmp_path / "a")])
        cli.main(["replay", str(tmp_path / "a" / "fig2-left.csv.manifest.json"), "--out", str(tmp_path / "b")])
        capsys.readouterr()
        assert (tmp_path / "a" / "fig2-left.csv").read_bytes() == (tmp_path / "b" / "fig2-left.csv").read_bytes()

    def test_bad_manifest(self, capsys, tmp_path):
        f = tmp_path / "m.json"
        f.write_text("{}")
        assert cli.main(["replay", str(f)]) == 2


class TestEntryPoint:
    def test_module_invocation(self):
        res = subprocess.run([sys.executable, "-m", "mlurn.cli", "--version"], capture_output=True, text=True)
        assert res.returncode == 0 and "mlurn" in res.stdout
