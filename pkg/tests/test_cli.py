from __future__ import annotations

import json
import shutil
import subprocess
import sys

import jsonschema
import pytest

from phonon_herald.cli import main, run
from phonon_herald.config import parse_config
from phonon_herald.errors import ConfigError
from phonon_herald.output import SUMMARY_SCHEMAS, read_csv

PARAMS = """\
[params]
cavity_length_mm = 1
laser_wavelength_nm = 1064
mech_freq_ghz = 1
laser_power_mw = {power}
mirror_mass_ng = 5
finesse = {finesse}
bath_temp_mk = {temp}
mech_damping_hz = 100
detuning_ratio = -1
"""


def write_config(tmp_path, scenario: str, power=5, finesse=10000, temp=1, name="run.ini"):
    path = tmp_path / name
    path.write_text(PARAMS.format(power=power, finesse=finesse, temp=temp) + "\n[scenario]\n" + scenario)
    return path


def invoke(command, config, out, *extra):
    return main([command, "--config", str(config), "--out", str(out), *extra])


def test_derive(tmp_path):
    cfg = write_config(tmp_path, "")
    assert invoke("derive", cfg, tmp_path / "o") == 0
    data = json.loads((tmp_path / "o" / "derive.json").read_text())
    jsonschema.validate(data, SUMMARY_SCHEMAS["derive"])
    assert data["derived"]["g"] == pytest.approx(51847, rel=5e-3)
    assert data["stability"]["stable"] is True
    assert data["derived"]["weak_coupling"] is True


def test_derive_zero_power(tmp_path):
    cfg = write_config(tmp_path, "", power=0)
    assert invoke("derive", cfg, tmp_path / "o") == 0
    data = json.loads((tmp_path / "o" / "derive.json").read_text())
    assert data["derived"]["g"] == 0.0 and data["stability"]["stable"] is True


def test_derive_bad_finesse(tmp_path, capsys):
    cfg = write_config(tmp_path, "", finesse=0.5)
    assert invoke("derive", cfg, tmp_path / "o") == 2
    assert "finesse" in capsys.readouterr().err
    assert not (tmp_path / "o").exists()


def test_fidelity_sweep_table(tmp_path, reference_config_path):
    assert invoke("fidelity-sweep", reference_config_path, tmp_path, "--formats", "csv,json,svg") == 0
    header, rows = read_csv(tmp_path / "fidelity_sweep.csv")
    assert header == ["t_us", "fidelity", "n_eff", "log_negativity", "heralding_weight"]
    assert len(rows) == 10
    assert float(rows[0]["fidelity"]) == pytest.approx(0.999968, abs=1e-3)
    jsonschema.validate(json.loads((tmp_path / "fidelity_sweep.json").read_text()), SUMMARY_SCHEMAS["fidelity-sweep"])
    assert (tmp_path / "fidelity_sweep.svg").read_bytes().lstrip().startswith(b"<?xml")


def test_fidelity_sweep_single_point(tmp_path):
    cfg = write_config(tmp_path, "times_us = 9\n")
    assert invoke("fidelity-sweep", cfg, tmp_path) == 0
    _, rows = read_csv(tmp_path / "fidelity_sweep.csv")
    assert len(rows) == 1 and float(rows[0]["fidelity"]) == pytest.approx(0.99974, abs=1e-3)


def test_fidelity_sweep_partial_failure(tmp_path):
    cfg = write_config(tmp_path, "times_us = 0, 9\n")
    assert invoke("fidelity-sweep", cfg, tmp_path) == 0
    header, rows = read_csv(tmp_path / "fidelity_sweep.csv")
    assert header[-1] == "error"
    assert rows[0]["fidelity"] == "" and "vacuum" in rows[0]["error"]
    assert rows[1]["error"] == ""
    assert json.loads((tmp_path / "fidelity_sweep.json").read_text())["n_failed"] == 1


def test_fidelity_sweep_all_fail(tmp_path):
    cfg = write_config(tmp_path, "times_us = 0\n")
    assert invoke("fidelity-sweep", cfg, tmp_path) == 4


def test_fidelity_sweep_empty_times(tmp_path, capsys):
    cfg = write_config(tmp_path, "times_us =\n")
    assert invoke("fidelity-sweep", cfg, tmp_path) == 2
    assert "times_us" in capsys.readouterr().err


def test_wigner(tmp_path):
    cfg = write_config(tmp_path, "time_us = 9\nresolution = 61\n")
    assert invoke("wigner", cfg, tmp_path, "--formats", "csv,json,svg") == 0
    header, rows = read_csv(tmp_path / "wigner.csv")
    assert header == ["delta_r", "delta_i", "W"] and len(rows) == 61 * 61
    meta = json.loads((tmp_path / "wigner.json").read_text())
    jsonschema.validate(meta, SUMMARY_SCHEMAS["wigner"])
    assert meta["min_value"] < 0 and meta["min_location"] == [0.0, 0.0]
    assert abs(meta["normalization_residual"]) < 1e-6


def test_wigner_ideal_fock(tmp_path):
    cfg = write_config(tmp_path, "resolution = 61\n")
    assert invoke("wigner", cfg, tmp_path, "--ideal-fock", "1") == 0
    meta = json.loads((tmp_path / "wigner.json").read_text())
    assert meta["min_value"] == pytest.approx(-2 / 3.141592653589793, abs=1e-12)
    assert meta["source"] == "ideal_fock_1" and meta["time_us"] is None


def test_wigner_at_zero_time(tmp_path, capsys):
    cfg = write_config(tmp_path, "time_us = 0\n")
    assert invoke("wigner", cfg, tmp_path) == 4
    assert "photon" in capsys.readouterr().err


def test_phonon_stats(tmp_path):
    cfg = write_config(tmp_path, "time_us = 9\nn_max = 4\n")
    assert invoke("phonon-stats", cfg, tmp_path, "--formats", "csv,json,svg") == 0
    header, rows = read_csv(tmp_path / "phonon_stats.csv")
    assert header == ["n", "probability"] and len(rows) == 5
    probs = [float(r["probability"]) for r in rows]
    assert max(range(5), key=probs.__getitem__) == 1
    jsonschema.validate(json.loads((tmp_path / "phonon_stats.json").read_text()), SUMMARY_SCHEMAS["phonon-stats"])


def test_phonon_stats_ideal(tmp_path):
    cfg = write_config(tmp_path, "n_max = 3\n")
    assert invoke("phonon-stats", cfg, tmp_path, "--ideal-fock", "1") == 0
    _, rows = read_csv(tmp_path / "phonon_stats.csv")
    assert [float(r["probability"]) for r in rows] == pytest.approx([0, 1, 0, 0], abs=1e-12)
    assert all(r["probability"] != "-0" for r in rows)


def test_phonon_stats_at_50mk_matches_library(tmp_path):
    # the CLI must report what the analysis layer computes; the shape itself is judged elsewhere
    from phonon_herald.analysis import Scenario, phonon_distribution
    from phonon_herald.params import reference_params

    cfg = write_config(tmp_path, "time_us = 9\nn_max = 4\n", temp=50)
    assert invoke("phonon-stats", cfg, tmp_path) == 0
    meta = json.loads((tmp_path / "phonon_stats.json").read_text())
    w = Scenario(reference_params(bath_temp_mk=50.0)).conditional_wigner(9e-6)
    dist = phonon_distribution(w, 4)
    assert meta["probabilities"] == pytest.approx(list(dist.probabilities), abs=1e-15)
    assert meta["mode"] == dist.mode


def test_temp_sweep(tmp_path):
    cfg = write_config(tmp_path, "temps_mk = 1, 5, 10, 15, 20, 25, 50\ntimes_us = 9\n")
    assert invoke("temp-sweep", cfg, tmp_path, "--formats", "csv,json,svg") == 0
    header, rows = read_csv(tmp_path / "temp_sweep.csv")
    assert header == ["T_mK", "t_us", "fidelity", "n_eff", "log_negativity"]
    f = [float(r["fidelity"]) for r in rows]
    assert all(a >= b for a, b in zip(f, f[1:]))
    assert [r["T_mK"] for r in rows] == ["1", "5", "10", "15", "20", "25", "50"]
    jsonschema.validate(json.loads((tmp_path / "temp_sweep.json").read_text()), SUMMARY_SCHEMAS["temp-sweep"])


def test_temp_sweep_single_and_duplicate(tmp_path):
    cfg = write_config(tmp_path, "temps_mk = 5, 5\ntimes_us = 9\n")
    assert invoke("temp-sweep", cfg, tmp_path) == 0
    _, rows = read_csv(tmp_path / "temp_sweep.csv")
    assert len(rows) == 2 and rows[0] == rows[1]
    cfg = write_config(tmp_path, "temps_mk = 5\ntimes_us = 9\n", name="one.ini")
    assert invoke("temp-sweep", cfg, tmp_path / "one", "--formats", "csv,svg") == 0
    assert len(read_csv(tmp_path / "one" / "temp_sweep.csv")[1]) == 1


def test_entanglement(tmp_path):
    cfg = write_config(tmp_path, "times_us = 0, 1, 9, 45\n")
    assert invoke("entanglement", cfg, tmp_path, "--formats", "csv,json,svg") == 0
    header, rows = read_csv(tmp_path / "entanglement.csv")
    assert header == ["t_us", "log_negativity", "n_eff"]
    en = {float(r["t_us"]): float(r["log_negativity"]) for r in rows}
    assert en[0.0] == 0.0 and en[1.0] > 0
    assert 2e-4 <= en[9.0] <= 8e-4
    jsonschema.validate(json.loads((tmp_path / "entanglement.json").read_text()), SUMMARY_SCHEMAS["entanglement"])


def test_entanglement_without_coupling(tmp_path):
    cfg = write_config(tmp_path, "times_us = 1, 9, 45\n", power=0)
    assert invoke("entanglement", cfg, tmp_path) == 0
    _, rows = read_csv(tmp_path / "entanglement.csv")
    assert all(float(r["log_negativity"]) == 0.0 for r in rows)


def test_unstable_exit_code(tmp_path):
    cfg = write_config(tmp_path, "times_us = 1\n", power=5e12)
    assert invoke("entanglement", cfg, tmp_path) == 3


def test_csv_round_trip_is_exact(tmp_path, reference_config_path):
    code, arts = run(["entanglement", "--config", str(reference_config_path), "--out", str(tmp_path), "--formats", "json,csv"])
    assert code == 0
    data = json.loads((tmp_path / "entanglement.json").read_text())
    _, rows = read_csv(tmp_path / "entanglement.csv")
    for row, point in zip(rows, data["points"]):
        assert float(row["log_negativity"]) == point["log_negativity"]
        assert float(row["t_us"]) == point["t_us"]
    kinds = sorted(a.kind for a in arts)
    assert kinds == ["csv", "json"]


def test_printed_artifacts_carry_checksums(tmp_path, capsys):
    import hashlib

    cfg = write_config(tmp_path, "")
    invoke("derive", cfg, tmp_path)
    kind, path, digest = capsys.readouterr().out.strip().split("\t")
    assert kind == "json"
    assert digest == "sha256:" + hashlib.sha256(open(path, "rb").read()).hexdigest()


@pytest.mark.parametrize(
    "text, fragment",
    [
        ("[params]\nfoo = 1\n", "foo"),
        ("[params]\ncavity_length_mm = 1\n", "missing"),
        ("[extra]\n", "extra"),
        (PARAMS.format(power=5, finesse=1e4, temp=1) + "[scenario]\nbogus = 1\n", "bogus"),
        (PARAMS.format(power=5, finesse="ten", temp=1), "finesse"),
        (PARAMS.format(power=5, finesse=1e4, temp=1) + "[scenario]\nresolution = 1\n", "resolution"),
        (PARAMS.format(power=5, finesse=1e4, temp=1) + "[scenario]\nformats = png\n", "png"),
    ],
)
def test_config_rejections(text, fragment):
    with pytest.raises(ConfigError, match=fragment):
        parse_config(text)


def test_config_command_mismatch(tmp_path):
    cfg = write_config(tmp_path, "command = derive\ntimes_us = 1\n")
    assert invoke("entanglement", cfg, tmp_path) == 2


def test_missing_config_file(tmp_path):
    assert invoke("derive", tmp_path / "nope.ini", tmp_path) == 2


def test_usage_errors_exit_2():
    with pytest.raises(SystemExit) as info:
        main(["derive"])
    assert info.value.code == 2
    with pytest.raises(SystemExit) as info:
        main(["launch", "--config", "x"])
    assert info.value.code == 2


@pytest.mark.skipif(shutil.which("phonon-herald") is None, reason="console script not installed")
def test_console_script(tmp_path):
    cfg = write_config(tmp_path, "")
    proc = subprocess.run(
        ["phonon-herald", "derive", "--config", str(cfg), "--out", str(tmp_path)],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0, proc.stderr
    assert proc.stdout.startswith("json\t")


def test_module_entry_point(tmp_path):
    cfg = write_config(tmp_path, "", finesse=0.5)
    proc = subprocess.run(
        [sys.executable, "-m", "phonon_herald.cli", "derive", "--config", str(cfg), "--out", str(tmp_path)],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 2 and "finesse" in proc.stderr
