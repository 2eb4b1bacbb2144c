import json
import subprocess
import sys

import numpy as np
import pytest
from click.testing import CliRunner

from wingforge import datastore
from wingforge.cli import cli, main
from wingforge.geometry import import_stl


@pytest.fixture()
def runner():
    return CliRunner()


def run_ok(runner, args):
    result = runner.invoke(cli, args, catch_exceptions=False)
    assert result.exit_code == 0, result.output
    return result


class TestGeometryCommand:
    def test_writes_stl_and_sidecar(self, runner, tmp_path):
        out = tmp_path / "wing.stl"
        r = run_ok(runner, [
            "geometry", "--c-r", "0.9", "--b", "1.2", "--taper", "0.6",
            "--sweep", "15", "--n-chord", "12", "--n-span", "6",
            "--out", str(out), "--json"])
        payload = json.loads(r.output)
        assert out.stat().st_size == 84 + 50 * payload["n_triangles"]
        mesh = import_stl(out)
        assert mesh.is_watertight()
        sidecar = json.loads((tmp_path / "wing.stl.json").read_text())
        assert sidecar["design"]["sweep_deg"] == 15.0

    def test_invalid_design_exit_1(self, capsys):
        code = main(["geometry", "--c-r", "-1", "--b", "1", "--taper", "0.5",
                     "--sweep", "0", "--out", "/tmp/x.stl"])
        assert code == 1
        assert "error" in capsys.readouterr().err


class TestDoeCommands:
    def test_sample_and_split(self, runner, tmp_path):
        cases = tmp_path / "cases.jsonl"
        run_ok(runner, ["doe", "sample", "--n", "120", "--seed", "7",
                        "--out", str(cases)])
        assert len(datastore.read_cases_jsonl(cases)) == 120

        split_out = tmp_path / "split.json"
        r = run_ok(runner, [
            "doe", "split", "--cases", str(cases), "--n-ood", "10",
            "--n-interp", "10", "--n-id-random", "10", "--n-val", "10",
            "--seed", "1", "--out", str(split_out), "--json"])
        payload = json.loads(r.output)
        assert payload["train"] == 80
        manifest = json.loads(split_out.read_text())
        assert len(manifest["assignments"]) == 120

    def test_sample_deterministic(self, runner, tmp_path):
        a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
        run_ok(runner, ["doe", "sample", "--n", "20", "--seed", "3",
                        "--out", str(a)])
        run_ok(runner, ["doe", "sample", "--n", "20", "--seed", "3",
                        "--out", str(b)])
        assert a.read_text() == b.read_text()

    def test_scan_grid_size(self, runner, tmp_path):
        out = tmp_path / "scan.jsonl"
        alphas = ",".join(f"{v:g}" for v in np.linspace(-5, 10, 31))
        sweeps = ",".join(f"{v:g}" for v in np.linspace(0, 40, 8))
        run_ok(runner, ["doe", "scan", "--c-r", "0.806", "--b", "1.1963",
                        "--taper", "0.562", "--u-inf", "250",
                        "--alpha-list", alphas, "--sweep-list", sweeps,
                        "--out", str(out)])
        assert len(datastore.read_cases_jsonl(out)) == 248


class TestPredictCommand:
    def test_single_case_json(self, runner):
        r = run_ok(runner, ["predict", "--c-r", "0.9", "--b", "1.2",
                            "--taper", "0.6", "--sweep", "15",
                            "--u-inf", "200", "--alpha", "4", "--json"])
        payload = json.loads(r.output)
        assert payload["C_l"] > 0
        assert payload["lift_to_drag"] == pytest.approx(
            payload["C_l"] / payload["C_D"])

    def test_case_list_to_csv(self, runner, tmp_path):
        cases = tmp_path / "cases.jsonl"
        run_ok(runner, ["doe", "sample", "--n", "10", "--seed", "0",
                        "--out", str(cases)])
        out = tmp_path / "coeffs.csv"
        run_ok(runner, ["predict", "--cases", str(cases), "--out", str(out)])
        rows = datastore.import_coefficients_csv(out)
        assert len(rows) == 10
        assert all("lift_to_drag" in r for r in rows)

    def test_missing_flags_exit_1(self):
        assert main(["predict", "--c-r", "0.9"]) == 1


class TestIntegrateCommand:
    def test_round_trip_against_predict(self, runner, tmp_path):
        # export the builtin backend's field and reintegrate it via files
        from wingforge.aero import Atmosphere, InflowConditions
        from wingforge.geometry import (MeshResolution, WingDesign,
                                        export_stl, planform_area)
        from wingforge.surrogate import BuiltinLiftLine

        design = WingDesign(0.9, 1.2, 0.6, 15.0)
        inflow = InflowConditions(200.0, 4.0)
        be = BuiltinLiftLine(field_resolution=MeshResolution(24, 12))
        pred = be.predict(design, inflow, Atmosphere(), with_field=True)
        mesh_path = tmp_path / "wing.stl"
        export_stl(pred.mesh, mesh_path, "binary")
        ps = tmp_path / "p_s.wfg"
        tau = tmp_path / "tau.wfg"
        ps.write_bytes(datastore.encode_blob("p_s", pred.surface_field.p_s))
        tau.write_bytes(datastore.encode_blob("tau", pred.surface_field.tau))

        r = run_ok(runner, [
            "integrate", "--mesh", str(mesh_path), "--p-s", str(ps),
            "--tau", str(tau), "--u-inf", "200", "--alpha", "4",
            "--a-ref", str(planform_area(design)), "--json"])
        payload = json.loads(r.output)
        # float32 file round trip limits the match, not the integration
        assert payload["C_l"] == pytest.approx(pred.coefficients.C_l,
                                               rel=1e-3)
        assert payload["C_D"] == pytest.approx(pred.coefficients.C_D,
                                               rel=1e-3)


class TestMetricsParetoPolar:
    @pytest.fixture()
    def coeff_csv(self, runner, tmp_path):
        cases = tmp_path / "cases.jsonl"
        run_ok(runner, ["doe", "sample", "--n", "40", "--seed", "5",
                        "--out", str(cases)])
        out = tmp_path / "coeffs.csv"
        run_ok(runner, ["predict", "--cases", str(cases), "--out", str(out)])
        return out

    def test_metrics_perfect_prediction(self, runner, coeff_csv, tmp_path):
        r = run_ok(runner, ["metrics", "--pred", str(coeff_csv),
                            "--gt", str(coeff_csv), "--json"])
        payload = json.loads(r.output)
        for entry in payload["report"]:
            assert entry["relative_l2"] == pytest.approx(0.0, abs=1e-12)
            assert entry["r_squared"] == pytest.approx(1.0, abs=1e-12)

    def test_pareto_csv_and_plot(self, runner, coeff_csv, tmp_path):
        out = tmp_path / "front.csv"
        plot = tmp_path / "front.svg"
        r = run_ok(runner, ["pareto", "--coefficients", str(coeff_csv),
                            "--out", str(out), "--plot", str(plot),
                            "--json"])
        payload = json.loads(r.output)
        front = datastore.import_coefficients_csv(out)
        assert len(front) == payload["front_size"] >= 1
        cds = [r["C_D"] for r in front]
        assert cds == sorted(cds)
        assert plot.stat().st_size > 0

    def test_polar_series(self, runner, tmp_path):
        scan = tmp_path / "scan.jsonl"
        run_ok(runner, ["doe", "scan", "--c-r", "0.8", "--b", "1.2",
                        "--taper", "0.6", "--u-inf", "200",
                        "--alpha-list", "-2,0,2,4",
                        "--sweep-list", "0,20", "--out", str(scan)])
        coeffs = tmp_path / "coeffs.csv"
        run_ok(runner, ["predict", "--cases", str(scan), "--out", str(coeffs)])
        out = tmp_path / "polar.csv"
        r = run_ok(runner, ["polar", "--coefficients", str(coeffs),
                            "--out", str(out), "--json"])
        assert json.loads(r.output)["n_series"] == 2
        rows = datastore.import_coefficients_csv(out)
        assert len(rows) == 8


class TestOptimizeCommand:
    def test_json_output_and_trace(self, runner, tmp_path):
        out = tmp_path / "result.json"
        trace = tmp_path / "trace.csv"
        r = run_ok(runner, ["optimize", "--method", "gradient",
                            "--budget", "100", "--seed", "0",
                            "--out", str(out), "--trace-csv", str(trace),
                            "--json"])
        payload = json.loads(r.output)
        assert payload["evaluations"] <= 100
        saved = json.loads(out.read_text())
        assert saved["best_value"] == payload["best_value"]
        header = trace.read_text().splitlines()[0]
        assert header.startswith("evaluations,value,c_r")


class TestExitCodes:
    def test_unknown_command(self):
        assert main(["frobnicate"]) == 1

    def test_missing_file(self):
        assert main(["predict", "--cases", "/nonexistent.jsonl",
                     "--out", "/tmp/o.csv"]) == 1

    def test_success_code_zero(self, tmp_path):
        assert main(["doe", "sample", "--n", "3", "--seed", "0",
                     "--out", str(tmp_path / "c.jsonl")]) == 0

    def test_console_script_installed(self):
        proc = subprocess.run([sys.executable, "-m", "wingforge.cli",
                               "--help"], capture_output=True, text=True)
        assert proc.returncode == 0
        assert "optimization toolkit" in proc.stdout
