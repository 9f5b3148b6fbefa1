import csv
import json

import numpy as np
import pytest

from deltakick import floquet
from deltakick.cli import run
from deltakick.output import read_pgm16
from deltakick.params import make_params

FIG1 = "M = 1\nN = 80\nR = 1\nS = 2\nk = 5\n"


@pytest.fixture
def cfg(tmp_path):
    path = tmp_path / "fig1.cfg"
    path.write_text(FIG1)
    return path


def rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_spectrum(cfg, tmp_path):
    out = tmp_path / "out"
    assert run(["spectrum", "--config", str(cfg), "--out", str(out), "--state-index", "0,3"]) == 0
    spec = rows(out / "spectrum.csv")
    assert len(spec) == 320
    assert list(spec[0]) == ["index", "quasi_energy", "eigenvalue_re", "eigenvalue_im", "residual"]
    vec = rows(out / "state_3.csv")
    assert list(vec[0]) == ["q", "p_q", "amp_re", "amp_im"] and len(vec) == 320
    meta = json.loads((out / "spectrum.json").read_text())
    assert meta["params"]["P"] == 320 and meta["input"]["k"] == 5.0
    assert meta["unitarity_error"] < 1e-10


def test_spectrum_k0_is_permutation_phases(tmp_path):
    out = tmp_path / "o"
    assert run(["spectrum", "--M", "1", "--N", "4", "--R", "1", "--S", "2", "--k", "0",
                "--theta0", "0.5", "--out", str(out)]) == 0
    p = make_params(1, 4, 1, 2, k=0, theta0=0.5)
    B = floquet.build_block(p, 0.5).entries
    want = np.sort(np.angle(np.linalg.eigvals(B)))
    got = np.sort([np.arctan2(float(r["eigenvalue_im"]), float(r["eigenvalue_re"]))
                   for r in rows(out / "spectrum.csv")])
    assert np.allclose(got, want, atol=1e-12)


def test_invalid_n_exit_code(tmp_path, capsys):
    assert run(["spectrum", "--M", "1", "--N", "79", "--R", "1", "--S", "2", "--k", "1",
                "--out", str(tmp_path)]) == 1
    assert "N must be even" in capsys.readouterr().err


def test_bad_flag_is_validation_error(tmp_path):
    with pytest.raises(SystemExit) as info:
        run(["husimi", "--grid", "12by4", "--out", str(tmp_path)])
    assert info.value.code == 1


def test_husimi_outputs(cfg, tmp_path):
    out = tmp_path / "h"
    assert run(["husimi", "--config", str(cfg), "--out", str(out), "--state-index", "5",
                "--grid", "32x24", "--csv"]) == 0
    img, maxval = read_pgm16(out / "husimi_5.pgm")
    assert img.shape == (24, 32) and img.max() == 65535
    meta = json.loads((out / "husimi_5.json").read_text())
    assert meta["grid"]["nz"] == 32 and meta["raw_max"] > 0 and meta["state_index"] == 5
    dump = rows(out / "husimi_5.csv")
    assert len(dump) == 32 * 24 and set(dump[0]) == {"z", "p", "theta", "J", "value"}
    assert max(float(r["value"]) for r in dump) == pytest.approx(meta["raw_max"])


def test_husimi_plane_wave_is_uniform_in_z(cfg, tmp_path):
    out = tmp_path / "pw"
    assert run(["husimi", "--config", str(cfg), "--out", str(out), "--plane-wave", "10",
                "--grid", "16x64"]) == 0
    img, _ = read_pgm16(out / "plane_10.pgm")
    assert np.all(img == img[:, :1])
    assert img.max() == 65535


def test_husimi_bad_index(cfg, tmp_path):
    assert run(["husimi", "--config", str(cfg), "--out", str(tmp_path), "--state-index", "320"]) == 1


def test_poincare(cfg, tmp_path):
    assert run(["poincare", "--config", str(cfg), "--out", str(tmp_path), "--init", "2.7,0",
                "--init", "1,1", "--steps", "500", "--coords", "section"]) == 0
    pts = rows(tmp_path / "poincare.csv")
    assert list(pts[0]) == ["traj_id", "step", "theta", "J"]
    assert len(pts) == 2 * 501
    first = [r for r in pts if r["traj_id"] == "0"]
    assert float(first[0]["theta"]) == 2.7 and float(first[0]["J"]) == pytest.approx(0.0)
    J = np.array([float(r["J"]) for r in first])
    assert np.all((J >= 0) & (J < 2 * np.pi))


def test_poincare_requires_init(cfg, tmp_path):
    assert run(["poincare", "--config", str(cfg), "--out", str(tmp_path)]) == 1


def test_orbits(cfg, tmp_path):
    assert run(["orbits", "--config", str(cfg), "--out", str(tmp_path), "--order", "2", "--jump", "1"]) == 0
    cat = rows(tmp_path / "orbits.csv")
    assert list(cat[0]) == ["o", "j", "theta_0", "theta_1", "J_0", "J_1", "trace", "stable"]
    assert abs(float(cat[0]["trace"])) < 2 and cat[0]["stable"] == "1"


def test_orbits_zero_kick(tmp_path, capsys):
    code = run(["orbits", "--K", "0", "--Omega", "0.5", "--order", "2", "--jump", "1", "--out", str(tmp_path)])
    assert code == 2
    assert "continuum" in capsys.readouterr().err


def test_orbits_epsilon_map(tmp_path):
    assert run(["orbits", "--M", "19", "--N", "20", "--R", "103", "--S", "200", "--k", "1",
                "--map", "epsilon", "--order", "2", "--jump", "-1", "--out", str(tmp_path)]) == 0
    assert rows(tmp_path / "orbits.csv")[0]["stable"] == "1"


def test_evolve(tmp_path):
    out = tmp_path / "ev"
    args = ["evolve", "--M", "1", "--N", "20", "--R", "1", "--S", "2", "--k", "1",
            "--kicks", "30", "--beta-samples", "11", "--threads", "2", "--out", str(out)]
    assert run(args) == 0
    series = rows(out / "evolve_series.csv")
    assert list(series[0]) == ["kick", "p_bin_lo", "p_bin_hi", "mass"]
    for t in (0, 30):
        assert sum(float(r["mass"]) for r in series if r["kick"] == str(t)) == pytest.approx(1.0, abs=1e-10)
    summary = rows(out / "evolve_summary.csv")
    assert len(summary) == 31 and list(summary[0]) == ["kick", "peak_p", "mode_fraction"]
    meta = json.loads((out / "evolve.json").read_text())
    assert meta["mixture"]["samples"] == 11 and meta["mode"] == {"order": 2, "jump": 1}
    # bit-exact rerun
    first = (out / "evolve_series.csv").read_bytes()
    assert run(args) == 0
    assert (out / "evolve_series.csv").read_bytes() == first


def test_evolve_zero_kicks(tmp_path):
    assert run(["evolve", "--M", "1", "--N", "20", "--R", "1", "--S", "2", "--k", "1",
                "--kicks", "0", "--beta-samples", "5", "--out", str(tmp_path)]) == 0
    series = rows(tmp_path / "evolve_series.csv")
    assert {r["kick"] for r in series} == {"0"}
    assert len(rows(tmp_path / "evolve_summary.csv")) == 1


def test_config_carries_command_options(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text(FIG1 + "kicks = 3\nbeta-samples = 3\n")
    assert run(["evolve", "--config", str(cfg), "--out", str(tmp_path)]) == 0
    assert len(rows(tmp_path / "evolve_summary.csv")) == 4
    assert run(["evolve", "--config", str(cfg), "--kicks", "5", "--out", str(tmp_path)]) == 0
    assert len(rows(tmp_path / "evolve_summary.csv")) == 6  # the flag wins
