import json
import math

import pytest

from qiopa.cli import main


def run(tmp_path, *args):
    return main([*args, "--out", str(tmp_path)])


def load(tmp_path, name):
    return json.loads((tmp_path / name).read_text())


def test_state_defaults(tmp_path):
    assert run(tmp_path, "state") == 0
    summary = load(tmp_path, "state_summary.json")
    closed = 1 + 6 * math.sinh(1.19) ** 2
    assert summary["mean_photons_total"] == pytest.approx(closed, abs=1e-4)
    assert summary["mean_photons_total"] == pytest.approx(14.35, abs=0.01)
    assert summary["norm_psi"] == pytest.approx(1.0, abs=1e-9)
    assert len(summary["gamma_head"]) == 4
    psi = load(tmp_path, "psi.json")
    assert all(set(item) == {"occ", "trigger", "amp"} for item in psi)
    sigma = load(tmp_path, "sigma.json")
    assert {item["trigger"] for item in sigma} == {"H", "V"}


def test_state_zero_gain_single_term(tmp_path):
    assert run(tmp_path, "state", "--g", "0", "--qubit", "H") == 0
    psi = load(tmp_path, "psi.json")
    assert len(psi) == 1
    assert psi[0]["occ"] == [1, 0, 0, 0]


def test_invalid_eta_exits_2(tmp_path, capsys):
    assert run(tmp_path, "state", "--eta1", "1.5") == 2
    assert "eta1" in capsys.readouterr().err


def test_invalid_qubit_exits_2(tmp_path):
    assert run(tmp_path, "state", "--qubit", "diag") == 2


def test_unknown_flag_exits_2(tmp_path):
    assert main(["state", "--nonsense"]) == 2


def test_fringe_defaults(tmp_path):
    assert run(tmp_path, "fringe") == 0
    sidecar = load(tmp_path, "fringe_visibility.json")
    assert sidecar["visibility_k1"] == pytest.approx(0.409374, abs=1e-4)
    assert abs(sidecar["visibility_k1"] - 0.4202) <= 0.02
    assert sidecar["visibility_k2"] == pytest.approx(1.0 / 3.0, abs=1e-4)
    lines = (tmp_path / "fringe.csv").read_text().strip().splitlines()
    assert lines[0] == "phi,rate_plus_k1,rate_minus_k1,rate_plus_k2,rate_minus_k2,degenerate"
    assert len(lines) == 33


def test_fringe_too_few_points_exits_2(tmp_path):
    assert run(tmp_path, "fringe", "--points", "4") == 2


def test_fringe_small_gain(tmp_path):
    assert run(tmp_path, "fringe", "--g", "1e-4", "--points", "16") == 0
    sidecar = load(tmp_path, "fringe_visibility.json")
    # conditioning on both arms caps the small-gain fringe at 2/3
    assert sidecar["visibility_k1"] == pytest.approx(2.0 / 3.0, abs=1e-3)
    assert sidecar["visibility_k1_theory"] == pytest.approx(1.0, abs=1e-6)


def test_reduce_rho(tmp_path):
    assert run(tmp_path, "reduce", "--target", "rho") == 0
    witness = load(tmp_path, "witness_rho.json")
    assert witness["ppt_min_eigenvalue"] == pytest.approx(-0.057911, abs=1e-5)
    data = load(tmp_path, "rho.json")
    assert data["labels"] == ["k1", "k2"]
    assert data["provenance"]["eta1"] == 0.049


def test_reduce_rho_prime(tmp_path):
    assert run(tmp_path, "reduce", "--target", "rho_prime") == 0
    witness = load(tmp_path, "witness_rho_prime.json")
    assert witness["ppt_min_eigenvalue"] == pytest.approx(-0.029208, abs=1e-5)
    assert witness["transposed_subsystem"] == "trigger"
    assert witness["marginal_entropy_bits"]["trigger"] == pytest.approx(1.0, abs=1e-6)


def test_reduce_zero_gain_exits_3(tmp_path, capsys):
    assert run(tmp_path, "reduce", "--g", "0") == 3
    assert "degenerate" in capsys.readouterr().err.lower()


def test_tomo_runs_are_byte_identical(tmp_path):
    a = tmp_path / "a"
    b = tmp_path / "b"
    for out in (a, b):
        assert main(["tomo", "--seed", "7", "--boot", "40", "--out", str(out)]) == 0
    for name in ("counts_rho_prime.csv", "rho_hat_rho_prime.json", "tomo_report_rho_prime.json"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_tomo_seed_changes_counts(tmp_path):
    a = tmp_path / "a"
    b = tmp_path / "b"
    assert main(["tomo", "--seed", "7", "--boot", "10", "--out", str(a)]) == 0
    assert main(["tomo", "--seed", "8", "--boot", "10", "--out", str(b)]) == 0
    assert (a / "counts_rho_prime.csv").read_text() != (b / "counts_rho_prime.csv").read_text()


def test_tomo_noiseless_is_exact(tmp_path):
    assert run(tmp_path, "tomo", "--noiseless", "--boot", "10") == 0
    report = load(tmp_path, "tomo_report_rho_prime.json")
    assert report["fidelity_to_target"] >= 1 - 1e-9
    assert report["noiseless"] is True


def test_tomo_reference_scale_and_bootstrap(tmp_path):
    assert run(tmp_path, "tomo", "--boot", "60") == 0
    report = load(tmp_path, "tomo_report_rho_prime.json")
    assert abs(report["max_count"] - 1866) <= 5 * math.sqrt(1866)
    assert report["ppt_min_eigenvalue_reconstructed"] < 0
    assert 0.004 / 3 <= report["bootstrap"]["stddev"] <= 0.004 * 3
    counts = (tmp_path / "counts_rho_prime.csv").read_text().strip().splitlines()
    assert len(counts) == 6**3 + 1


def test_tomo_minimal_scheme(tmp_path):
    assert run(tmp_path, "tomo", "--scheme", "minimal", "--boot", "10", "--target", "rho") == 0
    counts = (tmp_path / "counts_rho.csv").read_text().strip().splitlines()
    assert len(counts) == 4**2 + 1


def test_report_rows_at_defaults(tmp_path):
    assert run(tmp_path, "report") == 0
    report = load(tmp_path, "report.json")
    rows = {row["name"]: row for row in report["rows"]}
    assert len(report["rows"]) == 8
    assert report["at_operating_point"] is True
    assert rows["visibility_k1"]["pass"] is True
    assert rows["cloning_fidelity"]["pass"] is True
    assert rows["ppt_min_two_qubit"]["pass"] is True
    assert rows["ppt_min_three_qubit"]["pass"] is True
    assert rows["entanglement_entropy"]["pass"] is True
    assert rows["branch_distance"]["pass"] is True
    # photon-number rows are documented, never asserted
    assert rows["mean_photons_total"]["pass"] is None
    assert rows["mean_photons_total"]["reference"]["value"] == 11.1
    assert rows["mean_photons_k1"]["reference"]["value"] == 6.1
    assert any(abs(p["value"] + 0.046) <= 5e-3 for p in rows["ppt_min_two_qubit"]["eta_sweep"])


def test_report_off_operating_point(tmp_path):
    assert run(tmp_path, "report", "--g", "0.5") == 0
    report = load(tmp_path, "report.json")
    rows = {row["name"]: row for row in report["rows"]}
    assert report["at_operating_point"] is False
    for name in (
        "visibility_k1",
        "cloning_fidelity",
        "mean_photons_total",
        "mean_photons_k1",
        "ppt_min_two_qubit",
        "ppt_min_three_qubit",
    ):
        assert rows[name]["reference"] == "not applicable (off paper operating point)"
        assert rows[name]["pass"] is None
    # gain-independent identities stay checked
    assert rows["entanglement_entropy"]["pass"] is True
    assert rows["branch_distance"]["pass"] is True


def test_config_file_with_flag_override(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"g": 0.5, "qubit": "plus"}))
    out = tmp_path / "out"
    assert main(["state", "--config", str(cfg), "--g", "0.8", "--out", str(out)]) == 0
    summary = load(out, "state_summary.json")
    assert summary["config"]["g"] == 0.8
    assert summary["config"]["qubit"] == "plus"


def test_unknown_config_key_exits_2(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"gain": 1.0}))
    assert main(["state", "--config", str(cfg), "--out", str(tmp_path)]) == 2
    assert "gain" in capsys.readouterr().err


def test_out_env_variable(tmp_path, monkeypatch):
    monkeypatch.setenv("QIOPA_OUT", str(tmp_path / "env_out"))
    assert main(["state", "--g", "0"]) == 0
    assert (tmp_path / "env_out" / "state_summary.json").exists()


def test_emitted_numbers_parse_losslessly(tmp_path):
    assert run(tmp_path, "reduce", "--target", "rho") == 0
    text = (tmp_path / "rho.json").read_text()
    data = json.loads(text)
    assert json.loads(json.dumps(data)) == data
