import csv
import io
import json

import pytest

from quantawed.channels import MarriageMillSpec
from quantawed.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


class TestTable:
    def test_csv(self, capsys):
        code, out, _ = run(capsys, "table")
        assert code == 0
        rows = list(csv.DictReader(io.StringIO(out)))
        assert [r["kind"] for r in rows] == ["PUP2", "CUP2", "FPUP", "FCUP"]
        assert [round(float(r["R"]), 12) for r in rows] == [2, 2, 1, 3]
        assert [r["ratio"] for r in rows] == ["1:1:1", "1:1:1", "1:1:2", "3:3:2"]

    def test_json_sampled(self, capsys):
        code, out, _ = run(capsys, "table", "--format", "json", "--trials", "20000", "--seed", "3")
        doc = json.loads(out)
        assert code == 0 and doc["schema_version"] == 1 and doc["matches_reference_table"]
        assert all(r["sampled"]["n"] == 20000 for r in doc["rows"])

    def test_seeded_repeatable(self, capsys):
        _, a, _ = run(capsys, "table", "--trials", "100", "--seed", "1")
        _, b, _ = run(capsys, "table", "--trials", "100", "--seed", "1")
        assert a == b


class TestClone:
    def test_json(self, capsys):
        code, out, _ = run(capsys, "clone", "--format", "json", "--trials", "30000")
        doc = json.loads(out)
        assert code == 0
        assert abs(doc["wrong_fraction_analytic"] - 1 / 3) < 1e-12
        assert doc["sampled_within_3sigma"]

    def test_csv(self, capsys):
        code, out, _ = run(capsys, "clone")
        assert code == 0
        assert "assertions_hold,True" in out


class TestNogo:
    def test_text(self, capsys):
        code, out, _ = run(capsys, "nogo")
        assert code == 0 and "0.5" in out

    def test_json_family(self, capsys):
        code, out, _ = run(capsys, "nogo", "--format", "json")
        doc = json.loads(out)
        assert abs(doc["ratio"] - 0.5) < 1e-10
        assert abs(doc["deficit"] - 0.5) < 1e-12

    def test_template_roundtrip(self, capsys, tmp_path):
        _, out, _ = run(capsys, "nogo", "--template", "perfect")
        path = tmp_path / "perfect.json"
        path.write_text(out)
        assert MarriageMillSpec.load(path) == MarriageMillSpec.perfect()
        code, out, _ = run(capsys, "nogo", "--spec", str(path), "--format", "json")
        doc = json.loads(out)
        assert code == 0 and not doc["on_manifold"]
        assert doc["residual_norm"] > 0.1

    def test_canonical_spec_text(self, capsys, tmp_path):
        path = tmp_path / "c.json"
        MarriageMillSpec.canonical().save(path)
        _, out, _ = run(capsys, "nogo", "--spec", str(path))
        assert "verdict: on-manifold" in out

    def test_bad_spec(self, capsys, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{not json")
        code, _, err = run(capsys, "nogo", "--spec", str(path))
        assert code == 2 and "error" in err


class TestEpr:
    @pytest.mark.parametrize("strategy,verdict", [
        ("direct", "no signaling"),
        ("clone", "no signaling"),
        ("wed-perfect", "signaling"),
        ("wed-constrained", "no signaling"),
    ])
    def test_verdicts(self, capsys, strategy, verdict):
        code, out, err = run(capsys, "epr", "--strategy", strategy, "--trials", "40000",
                             "--format", "json")
        doc = json.loads(out)
        assert code == 0
        assert doc["verdict"] == verdict
        assert doc["consistent_with_analytic"]
        assert f"verdict: {verdict}" in err

    def test_unknown_strategy(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["epr", "--strategy", "teleport"])
        assert exc.value.code != 0

    def test_wed_without_spec(self, capsys):
        code, _, err = run(capsys, "epr", "--strategy", "wed", "--trials", "100")
        assert code == 2 and "error" in err

    def test_wed_with_spec(self, capsys, tmp_path):
        path = tmp_path / "c.json"
        MarriageMillSpec.canonical().save(path)
        code, out, _ = run(capsys, "epr", "--strategy", "wed", "--spec", str(path),
                           "--trials", "2000")
        assert code == 0 and "verdict,no signaling" in out

    def test_nonpositive_trials(self, capsys):
        with pytest.raises(SystemExit):
            main(["epr", "--strategy", "direct", "--trials", "0"])


def test_module_entry():
    import subprocess
    import sys

    r = subprocess.run([sys.executable, "-m", "quantawed", "table"], capture_output=True, text=True)
    assert r.returncode == 0 and r.stdout.startswith("kind,")
