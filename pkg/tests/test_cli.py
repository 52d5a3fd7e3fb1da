import json
import subprocess
import sys

import pytest

from cdwork.cli import main

SMALL_HO = ["--beta", "2", "--fock-dim", "80", "--grid", "51",
            "--tau", "0.8", "--tau-list", "0.8,1.2,1.6"]


def read_all(outdir):
    return {p.name: p.read_bytes() for p in sorted(outdir.iterdir())}


class TestHoFigure1:
    def test_small_run_and_determinism(self, tmp_path):
        out_a, out_b = tmp_path / "a", tmp_path / "b"
        for out in (out_a, out_b):
            code = main(["ho-figure1", *SMALL_HO, "--out", str(out)])
            assert code == 0
        assert read_all(out_a) == read_all(out_b)
        names = set(read_all(out_a))
        assert {"ho_figure1_mean_work.csv", "ho_figure1_variance.csv",
                "ho_figure1_excess.csv", "ho_figure1_fluctuation_average.csv",
                "ho_figure1_summary.json"} <= names

    def test_summary_contents(self, tmp_path):
        main(["ho-figure1", *SMALL_HO, "--out", str(tmp_path)])
        summary = json.loads((tmp_path / "ho_figure1_summary.json").read_text())
        assert summary["passed"] is True
        assert summary["ordering_ok"] is True
        assert summary["max_equality_residual"] <= 1e-6
        assert 0.0 < summary["bures_length"] < summary["eta_length"] \
            < summary["ell"]
        assert summary["fit"]["exponent"] == pytest.approx(-1.0, abs=1e-6)

    def test_flat_ramp_skips_fit(self, tmp_path):
        code = main(["ho-figure1", "--omega-i", "2", "--omega-f", "2",
                     "--beta", "2", "--fock-dim", "80", "--grid", "31",
                     "--tau-list", "0.8,1.2,1.6", "--out", str(tmp_path)])
        assert code == 0
        summary = json.loads((tmp_path / "ho_figure1_summary.json").read_text())
        assert summary["fit"] is None
        assert summary["ell"] == 0.0

    def test_csv_metadata_layout(self, tmp_path):
        main(["ho-figure1", *SMALL_HO, "--out", str(tmp_path)])
        lines = (tmp_path / "ho_figure1_mean_work.csv").read_text().splitlines()
        assert lines[0].startswith("# cdwork ")
        header_at = next(i for i, line in enumerate(lines)
                         if not line.startswith("#"))
        assert lines[header_at].split(",") == ["t", "mean_cd", "mean_ad"]
        assert any(line.startswith("# config-hash=") for line in lines[:header_at])

    def test_json_format(self, tmp_path):
        code = main(["ho-figure1", *SMALL_HO, "--format", "json",
                     "--out", str(tmp_path)])
        assert code == 0
        data = json.loads((tmp_path / "ho_figure1_mean_work.json").read_text())
        assert set(data["columns"]) == {"t", "mean_cd", "mean_ad"}


class TestIsingFigure2:
    def test_sweep_run(self, tmp_path):
        code = main(["ising-figure2", "--n-list", "32,64,128,256,512,1024",
                     "--grid", "101", "--out", str(tmp_path)])
        assert code == 0
        summary = json.loads(
            (tmp_path / "ising_figure2_summary.json").read_text())
        assert 0.50 <= summary["scaling"]["alpha"] <= 0.53
        assert summary["scaling"]["passed"] is True

    def test_single_size_skips_fit(self, tmp_path):
        code = main(["ising-figure2", "--n-list", "32",
                     "--trajectory-sites", "32", "--grid", "51",
                     "--out", str(tmp_path)])
        assert code == 0
        summary = json.loads(
            (tmp_path / "ising_figure2_summary.json").read_text())
        assert summary["scaling"] is None
        assert not (tmp_path / "ising_figure2_scaling.csv").exists()


class TestIonWaveforms:
    def test_csv_schema(self, tmp_path):
        code = main(["ion-waveforms", "--nu", "3", "--grid", "101",
                     "--out", str(tmp_path)])
        assert code == 0
        lines = (tmp_path / "ion_waveforms.csv").read_text().splitlines()
        header = next(line for line in lines if not line.startswith("#"))
        assert header.split(",") == [
            "t", "omega", "omega_dot", "Omega", "re_Omega_eff1",
            "im_Omega_eff1", "Omega_eff2", "validity_ratio"]
        validity = json.loads(
            (tmp_path / "ion_waveforms_validity.json").read_text())
        assert validity["within_validity"] is True

    def test_bad_detuning_exit_code(self, tmp_path, capsys):
        code = main(["ion-waveforms", "--nu", "2", "--out", str(tmp_path)])
        assert code == 1
        assert "InvalidDetuning" in capsys.readouterr().err


class TestConfigHandling:
    def test_unknown_config_key_named(self, tmp_path, capsys):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"omega_i": 1.0, "frequenzy": 2.0}))
        code = main(["ho-figure1", "--config", str(cfg)])
        assert code == 2
        assert "frequenzy" in capsys.readouterr().err

    def test_flags_override_config(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({
            "omega_f": 2.5, "beta": 2.0, "fock_dim": 80, "grid": 101,
            "tau_list": [0.8, 1.2, 1.6]}))
        out = tmp_path / "out"
        code = main(["ho-figure1", "--config", str(cfg),
                     "--omega-f", "2.0", "--out", str(out)])
        assert code == 0
        summary = json.loads((out / "ho_figure1_summary.json").read_text())
        assert summary["config"]["omega_f"] == 2.0
        assert summary["config"]["beta"] == 2.0

    def test_invalid_values_exit_two(self, capsys):
        assert main(["ho-figure1", "--beta", "-1"]) == 2
        assert main(["ho-figure1", "--tau", "-0.5"]) == 2
        cfg_err = capsys.readouterr().err
        assert "beta" in cfg_err and "tau" in cfg_err

    def test_truncation_error_exit_one(self, tmp_path, capsys):
        code = main(["ho-figure1", "--fock-dim", "40", "--grid", "21",
                     "--tau-list", "0.8", "--out", str(tmp_path)])
        assert code == 1
        assert "TruncationError" in capsys.readouterr().err


class TestVerifyCommand:
    def test_default_run_passes(self, tmp_path, capsys):
        code = main(["verify", "--chain-samples", "2",
                     "--out", str(tmp_path)])
        out = capsys.readouterr().out
        assert code == 0
        assert "all 24 checks passed" in out
        report = json.loads((tmp_path / "verify_report.json").read_text())
        assert report["passed"] is True
        assert len(report["checks"]) == 24

    def test_corrupted_auxiliary_term_fails(self, capsys):
        code = main(["verify", "--h1-scale", "2.0", "--chain-samples", "1"])
        out = capsys.readouterr().out
        assert code == 1
        assert "FAIL transitionless-certificate" in out

    def test_small_basis_surfaces_truncation_error(self, capsys):
        code = main(["verify", "--fock-dim", "40", "--chain-samples", "1"])
        assert code == 1
        assert "TruncationError" in capsys.readouterr().err


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "cdwork.cli", "--version"],
        capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.strip()
