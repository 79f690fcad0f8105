import csv
import io
import json
import subprocess
import sys

import pytest

from bosonsculpt import fock, protocols
from bosonsculpt.cli import dumps_report, format_float, main


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


class TestSculpt:
    def test_bipartite(self, capsys):
        code, out, _ = run_cli(capsys, "sculpt", "bipartite", "--n", "2")
        assert code == 0
        report = json.loads(out)
        assert report["fidelity"] == pytest.approx(1, abs=1e-10)
        assert report["purity"] == pytest.approx(0.25, abs=1e-10)
        assert report["rank"] == 4
        assert report["success_weight"] == pytest.approx(0.5)
        assert "wall_time_s" not in report

    def test_writes_state(self, capsys, tmp_path):
        out = tmp_path / "phi.json"
        assert run_cli(capsys, "sculpt", "bipartite", "--n", "3", "--out", str(out))[0] == 0
        state = fock.load_state(tmp_path / "phi.state.json")
        assert fock.fidelity(state, protocols.target_phi(3)) == pytest.approx(1)
        assert json.loads(out.read_text())["rank"] == 6

    def test_ghz_default_phase_misses_for_even_n(self, capsys):
        code, out, err = run_cli(capsys, "sculpt", "ghz", "--n", "2")
        assert code == 2
        assert json.loads(out)["fidelity"] < 1e-12
        assert "fidelity" in err

    def test_ghz_plus_phase(self, capsys):
        code, out, _ = run_cli(capsys, "sculpt", "ghz", "--n", "4", "--ghz-phase", "plus")
        assert code == 0
        assert json.loads(out)["ghz_relative_phase"] == "plus"

    @pytest.mark.parametrize("extra", [[], ["--flipped"]])
    def test_w(self, capsys, extra):
        code, out, _ = run_cli(capsys, "sculpt", "w", "--n", "3", *extra)
        assert code == 0
        assert json.loads(out)["qubits_relabeled"] is (not extra)

    def test_dicke(self, capsys):
        code, out, _ = run_cli(capsys, "sculpt", "dicke", "--n", "4", "--m", "2")
        assert code == 0
        assert json.loads(out)["protocol"]["steps"] == 12

    def test_timing_opt_in(self, capsys):
        _, out, _ = run_cli(capsys, "sculpt", "bipartite", "--n", "2", "--timing")
        assert json.loads(out)["wall_time_s"] >= 0

    def test_deterministic(self, capsys):
        _, a, _ = run_cli(capsys, "sculpt", "ghz", "--n", "3")
        _, b, _ = run_cli(capsys, "sculpt", "ghz", "--n", "3")
        assert a == b

    @pytest.mark.parametrize(
        "argv",
        [
            ["sculpt", "bipartite", "--n", "1"],
            ["sculpt", "dicke", "--n", "3"],
            ["sculpt", "dicke", "--n", "3", "--m", "3"],
            ["sculpt", "ghz", "--n", "3", "--m", "1"],
            ["sculpt", "ghz", "--n", "3", "--flipped"],
            ["sculpt", "cluster", "--n", "3"],
            ["sculpt", "bipartite", "--n", "two"],
            ["teleport"],
        ],
    )
    def test_invalid_input(self, capsys, argv):
        with pytest.raises(SystemExit) as info:
            code = main(argv)
            raise SystemExit(code)
        assert info.value.code == 1


class TestAnalyze:
    def test_random_state_round_trip(self, capsys, tmp_path):
        path = tmp_path / "s.json"
        assert run_cli(capsys, "random-state", "--modes", "4", "--seed", "7", "--out", str(path))[0] == 0
        code, out, _ = run_cli(capsys, "analyze", str(path))
        assert code == 0
        report = json.loads(out)
        assert sum(report["r"]) == pytest.approx(1)
        assert 0.25 <= report["purity"] <= 1
        assert report["residual"] <= 1e-9

    def test_random_state_seeded(self, capsys):
        _, a, _ = run_cli(capsys, "random-state", "--modes", "3", "--seed", "1")
        _, b, _ = run_cli(capsys, "random-state", "--modes", "3", "--seed", "1")
        _, c, _ = run_cli(capsys, "random-state", "--modes", "3", "--seed", "2")
        assert a == b != c

    def test_flag_form(self, capsys, tmp_path):
        path = tmp_path / "phi.json"
        fock.save_state(protocols.target_phi(2), path)
        code, out, _ = run_cli(capsys, "analyze", "--input", str(path))
        assert code == 0
        assert json.loads(out)["rank"] == 4

    def test_rejects_three_particles(self, capsys, tmp_path):
        path = tmp_path / "s.json"
        fock.save_state(fock.sym_state(3), path)
        assert run_cli(capsys, "analyze", str(path))[0] == 1

    def test_missing_file(self, capsys, tmp_path):
        assert run_cli(capsys, "analyze", str(tmp_path / "nope.json"))[0] == 1


class TestOptics:
    def test_herald(self, capsys, tmp_path):
        path = tmp_path / "s.json"
        fock.save_state(fock.basis_state((0, 2)), path)
        code, out, _ = run_cli(capsys, "optics", "herald", "--t", "0.9", "--mode", "2",
                               "--input", str(path))
        assert code == 0
        assert json.loads(out)["probability"] == pytest.approx(2 * 0.81 * 0.19)

    def test_herald_bad_mode(self, capsys, tmp_path):
        path = tmp_path / "s.json"
        fock.save_state(fock.basis_state((0, 2)), path)
        args = ["optics", "herald", "--t", "0.9", "--input", str(path)]
        assert run_cli(capsys, *args, "--mode", "3")[0] == 1
        assert run_cli(capsys, *args, "--mode", "1")[0] == 1

    def test_module(self, capsys):
        code, out, _ = run_cli(capsys, "optics", "module", "--t", "0.9")
        assert code == 0
        report = json.loads(out)
        assert report["total_probability"] == pytest.approx(1, abs=1e-10)
        dets = {row["detector"]: row for row in report["single_clicks"]}
        assert set(dets) == {"a", "b", "c", "d"}
        assert dets["d"]["fidelity_to_ideal"] == pytest.approx(1)

    @pytest.mark.parametrize("t", ["1.0", "0", "-0.5"])
    def test_bad_t(self, capsys, t):
        assert run_cli(capsys, "optics", "module", "--t", t)[0] == 1

    def test_sweep_csv(self, capsys, tmp_path):
        path = tmp_path / "sweep.csv"
        code, out, _ = run_cli(capsys, "optics", "sweep", "--t", "0.9:0.99:3",
                               "--clicks", "b,d", "--out", str(path))
        assert code == 0
        rows = list(csv.DictReader(io.StringIO(out)))
        assert list(rows[0]) == ["t", "pattern", "probability", "fidelity"]
        assert len(rows) == 3
        assert rows[0]["pattern"] == "b,d"
        assert path.read_text() == out

    def test_sweep_workers_identical(self, capsys):
        args = ["optics", "sweep", "--t", "0.9:0.99:4", "--clicks", "d"]
        _, a, _ = run_cli(capsys, *args)
        _, b, _ = run_cli(capsys, *args, "--workers", "4")
        assert a == b

    def test_sweep_bad_clicks(self, capsys):
        assert run_cli(capsys, "optics", "sweep", "--t", "0.9", "--clicks", "e")[0] == 1


def test_format_float():
    assert format_float(1.0) == "1.0"
    assert format_float(0.1) == "0.10000000000000001"
    assert float(format_float(1e-20)) == 1e-20
    with pytest.raises(ValueError):
        format_float(float("nan"))


def test_dumps_report_sorted():
    text = dumps_report({"b": [1.0, 2], "a": {"y": True, "x": None}})
    assert json.loads(text) == {"a": {"x": None, "y": True}, "b": [1.0, 2]}
    assert text.index('"a"') < text.index('"b"')


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "bosonsculpt", "sculpt", "bipartite", "--n", "2"],
                         capture_output=True, text=True)
    assert res.returncode == 0
    assert json.loads(res.stdout)["rank"] == 4
