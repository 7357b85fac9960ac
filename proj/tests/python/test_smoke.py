import json
import os
import subprocess

import numpy as np
import pytest

rydgauge = pytest.importorskip("rydgauge")


def test_version():
    assert rydgauge.version().startswith("rydgauge ")


def test_spectrum_is_hermitian_and_sorted():
    H = rydgauge.hamiltonian(0.3, -0.4, 0.9)
    assert np.allclose(H, H.conj().T, atol=1e-14)
    e = rydgauge.eigenvalues(0.3, -0.4, 0.9)
    assert np.allclose(np.sort(np.linalg.eigvalsh(H)), e, atol=1e-12)


def test_monopoles_and_well():
    d = rydgauge.locate_degeneracy()
    assert abs(d["z"] - 0.98) < 0.05
    assert rydgauge.chern_number([0.0, 0.0, d["z"]])["chern"] == 1
    assert rydgauge.chern_number([0.0, 0.0, -d["z"]])["chern"] == -1
    assert abs(rydgauge.locate_well()["R_min"] - 0.845) < 0.005
    assert abs(rydgauge.locate_avoided_crossing()["R"] - 1.33) < 0.05


def test_bad_config_raises():
    with pytest.raises(rydgauge.ConfigError):
        rydgauge.run("chern", {"chern": {"radius": "big"}})
    with pytest.raises(ValueError):
        rydgauge.mass_parameter("Rb87")


def test_selftest_and_chern_command(tmp_path):
    assert rydgauge.selftest()["all_passed"]
    out = rydgauge.run("chern", {"chern": {"n_theta": 30, "n_phi": 60}}, out_dir=tmp_path)
    assert [s["chern"] for s in out["spheres"]] == [1, -1, 0]
    on_disk = json.loads((tmp_path / "chern.json").read_text())
    assert on_disk["spheres"] == out["spheres"]
    assert on_disk["version"] == rydgauge.version()


@pytest.mark.skipif("RYDGAUGE_CLI" not in os.environ, reason="CLI path not provided")
def test_cli_outputs_are_deterministic(tmp_path):
    cli = os.environ["RYDGAUGE_CLI"]
    cfg = tmp_path / "p.cfg"
    cfg.write_text("[potentials]\nn = 21\nsurface_n = 10\n")
    for d in ("a", "b"):
        subprocess.run([cli, "potentials", "--config", str(cfg), "--out", str(tmp_path / d)], check=True,
                       capture_output=True)
    for name in os.listdir(tmp_path / "a"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
