import json

import numpy as np
import pytest

from nu_analyzer import read_report, ring_matrix, write_matrix
from nu_analyzer.cli import grid_records, main


@pytest.fixture()
def ring4_csv(tmp_path):
    path = tmp_path / "ring4.csv"
    write_matrix(ring_matrix(np.ones(4)), path)
    return str(path)


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestAnalyze:
    def test_ring4(self, capsys, ring4_csv):
        code, out, _ = run_cli(capsys, "analyze", ring4_csv)
        assert code == 0
        data = json.loads(out)
        assert data["mu"] == pytest.approx(1.0, rel=1e-9)
        assert data["nubar"] == pytest.approx(1.0, rel=1e-12)
        assert data["nu_lower"]["bound"] == pytest.approx(0.25, abs=1e-9)
        assert data["nu_lower"]["indices"] == [1, 2, 3, 4]

    def test_identity(self, capsys, tmp_path):
        path = tmp_path / "ident.csv"
        write_matrix(np.eye(3), path)
        code, out, _ = run_cli(capsys, "analyze", str(path))
        data = json.loads(out)
        assert code == 0
        assert data["mu"] == pytest.approx(1.0, rel=1e-9)
        assert data["nubar"] == pytest.approx(1.0)
        assert data["nu_lower"]["bound"] == pytest.approx(1.0, rel=1e-9)
        assert data["diagnostics"]["diagonally_maximal"] is True

    def test_oracle_flag(self, capsys, tmp_path):
        path = tmp_path / "m2.csv"
        write_matrix(np.array([[0.5, 1.0], [1.0, 0.5]]), path)
        code, out, _ = run_cli(capsys, "analyze", str(path), "--oracle")
        data = json.loads(out)
        assert data["nu_exact"]["value"] == pytest.approx(0.75, rel=1e-9)
        assert data["nu_exact"]["method"] == "closed_form_2x2"

    def test_system_json_input(self, capsys, tmp_path):
        path = tmp_path / "sys.json"
        path.write_text(
            json.dumps({"n": 2, "entries": [{"i": 1, "j": 2, "impulse": [1.0]},
                                            {"i": 2, "j": 1, "impulse": [1.0]}]})
        )
        code, out, _ = run_cli(capsys, "analyze", str(path))
        assert code == 0
        assert json.loads(out)["mu"] == pytest.approx(1.0, rel=1e-9)

    def test_validation_error_exit_code(self, capsys, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("0.0,-1.0\n1.0,0.0\n")
        code, out, err = run_cli(capsys, "analyze", str(path))
        assert code == 2
        assert out == ""
        assert "negative" in err

    def test_report_file_out(self, capsys, tmp_path, ring4_csv):
        out_path = tmp_path / "report.json"
        code, out, _ = run_cli(capsys, "analyze", ring4_csv, "--out", str(out_path))
        assert code == 0
        report = read_report(out_path)
        assert report.nubar == pytest.approx(1.0)


class TestBalance:
    def test_oscillation_note(self, capsys, tmp_path):
        path = tmp_path / "osc.csv"
        write_matrix(np.array([[0.0, 1.0], [0.25, 0.0]]), path)
        code, out, err = run_cli(capsys, "balance", str(path), "--theta", "1.0")
        assert code == 0
        data = json.loads(out)
        assert data["oscillating"] is True
        assert data["note"] == "oscillation detected"
        assert "oscillation detected" in err

    def test_converged_half_step(self, capsys, tmp_path):
        path = tmp_path / "osc.csv"
        write_matrix(np.array([[0.0, 1.0], [0.25, 0.0]]), path)
        code, out, _ = run_cli(capsys, "balance", str(path), "--theta", "0.5")
        data = json.loads(out)
        assert data["converged"] is True
        assert data["objective"] == pytest.approx(0.5, rel=1e-3)

    def test_identity_converges_after_one_update(self, capsys, tmp_path):
        path = tmp_path / "ident.csv"
        write_matrix(np.eye(2), path)
        code, out, _ = run_cli(capsys, "balance", str(path), "--theta", "0.9")
        data = json.loads(out)
        assert data["converged"] is True
        assert data["updates"] == 1

    def test_trace_file(self, capsys, tmp_path):
        path = tmp_path / "m.csv"
        write_matrix(np.array([[0.0, 1.0], [0.25, 0.0]]), path)
        trace_path = tmp_path / "trace.csv"
        code, _, _ = run_cli(capsys, "balance", str(path), "--trace", str(trace_path))
        assert code == 0
        assert trace_path.read_text().startswith("t,objective,rel_change")


class TestGrid:
    def test_record_count_and_bounds(self):
        records = grid_records(5)
        assert len(records) == 125
        for r in records:
            assert 1.0 - 1e-6 <= r.ratio_nubar_nu <= 2.0 + 1e-6

    def test_corner_values(self):
        records = {(r.x, r.w, r.y): r for r in grid_records(2)}
        corner = records[(1.0, 1.0, 1.0)]
        assert corner.mu == pytest.approx(2.0, rel=1e-9)
        assert corner.nu == pytest.approx(1.0, rel=1e-9)
        assert corner.nubar == pytest.approx(1.0, rel=1e-9)
        swap = records[(0.0, 1.0, 0.0)]
        assert swap.mu == pytest.approx(1.0, rel=1e-9)
        assert swap.nu == pytest.approx(0.5, rel=1e-9)
        assert swap.nubar == pytest.approx(1.0, rel=1e-9)

    def test_csv_output_and_plot_script(self, capsys, tmp_path):
        out_path = tmp_path / "grid.csv"
        code, _, _ = run_cli(capsys, "grid2x2", "--steps", "3", "--out", str(out_path))
        assert code == 0
        lines = out_path.read_text().splitlines()
        assert lines[0] == "x,w,y,mu,nu,nubar,ratio_mu_nu,ratio_nubar_nu"
        assert len(lines) == 28
        assert (tmp_path / "grid.gp").exists()


class TestBench:
    def test_small_study_deterministic_bytes(self, capsys, tmp_path):
        args = [
            "bench", "--mode", "size", "--trials", "3", "--thetas", "0.5",
            "--ns", "3,4", "--tols", "0.01", "--seed", "11", "--max-iter", "300",
        ]
        p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
        assert run_cli(capsys, *args, "--out", str(p1))[0] == 0
        assert run_cli(capsys, *args, "--threads", "3", "--out", str(p2))[0] == 0
        assert p1.read_bytes() == p2.read_bytes()
        header = p1.read_text().splitlines()[0]
        assert header == "n,theta,tol,max_iters,median_iters,failures"


class TestRing:
    def test_ring_report(self, capsys):
        code, out, _ = run_cli(capsys, "ring", "--n", "4")
        data = json.loads(out)
        assert code == 0
        assert data["mu"] == pytest.approx(1.0, rel=1e-9)
        assert data["nubar"] == pytest.approx(1.0)
        assert data["nu_exact"]["value"] == pytest.approx(0.25)
        assert data["nu_exact"]["method"] == "ring"
        assert data["nu_lower"]["bound"] == pytest.approx(0.25, abs=1e-9)

    def test_weighted_ring(self, capsys):
        code, out, _ = run_cli(capsys, "ring", "--weights", "2.0,0.5")
        data = json.loads(out)
        assert data["nu_exact"]["value"] == pytest.approx(0.5, rel=1e-9)

    def test_weight_count_mismatch(self, capsys):
        code, _, err = run_cli(capsys, "ring", "--n", "3", "--weights", "1.0,1.0")
        assert code == 2
