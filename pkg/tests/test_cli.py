import json
import math
from pathlib import Path

import numpy as np
import pytest

from biphoton.cli import run
from biphoton.io import read_pgm

EXAMPLES = Path(__file__).resolve().parents[1] / "examples_cfg"

SMALL = """
format: biphoton-config/1
pump:
  pulse_duration_fwhm: 6.0
  profile: {kind: gaussian, waist_w: 0.6}
grid: {n_points: 96}
"""


def _cfg(tmp_path, text, name="run.yaml"):
    f = tmp_path / name
    f.write_text(text)
    return str(f)


def _meta(out):
    return json.loads((Path(out) / "meta.json").read_text())


def test_jsa_outputs_and_meta(tmp_path):
    out = tmp_path / "o"
    assert run(["jsa", "--config", _cfg(tmp_path, SMALL), "--out", str(out)]) == 0
    meta = _meta(out)
    assert sorted(meta["outputs"]) == ["jsa_imag.csv", "jsa_real.csv", "jsi.csv", "jsi.pgm"]
    assert meta["config"]["pump"]["profile"]["waist_w"] == 0.6
    assert meta["config"]["pump"]["pulse_duration_fwhm"] == 6.0
    assert meta["command"] == "jsa"
    img = read_pgm(out / "jsi.pgm")
    assert img.shape == (96, 96) and img.max() == 65535
    rows = (out / "jsi.csv").read_text().splitlines()
    assert len(rows) == 97 and rows[0].startswith("lambda_s_nm")


def test_formats_flag_limits_outputs(tmp_path):
    out = tmp_path / "o"
    assert run(["jsa", "--config", _cfg(tmp_path, SMALL), "--out", str(out), "--formats", "pgm"]) == 0
    assert _meta(out)["outputs"] == ["jsi.pgm"]


def test_schmidt_example_config(tmp_path):
    out = tmp_path / "o"
    assert run(["schmidt", "--config", str(EXAMPLES / "near_separable.yaml"), "--out", str(out)]) == 0
    k = json.loads((out / "schmidt.json").read_text())["schmidt_number_K"]
    assert k == pytest.approx(1.01, abs=0.01)


def test_schmidt_separable_state(tmp_path):
    # sigma_+ == sigma_- with a long device and no cavity
    tau, vg = 6.0, 0.1
    w = vg * tau / math.sqrt(2 * math.log(2))
    text = f"""
device: {{length_L: 40.0, cavity_enabled: false, group_velocity_vg: {vg}}}
pump:
  pulse_duration_fwhm: {tau}
  profile: {{kind: gaussian, waist_w: {w!r}}}
grid: {{n_points: 128, spread: 6}}
"""
    out = tmp_path / "o"
    assert run(["schmidt", "--config", _cfg(tmp_path, text), "--out", str(out)]) == 0
    assert _meta(out)["results"]["schmidt_number_K"] == pytest.approx(1.0, abs=1e-3)


def test_hom_and_wigner(tmp_path):
    text = SMALL + "hom: {delays: {start: -10, stop: 10, num: 21}}\nwigner: {t_minus: {start: -5, stop: 5, num: 11}}\n"
    cfg = _cfg(tmp_path, text)
    assert run(["hom", "--config", cfg, "--out", str(tmp_path / "h")]) == 0
    assert (tmp_path / "h" / "hom.csv").read_text().count("\n") == 22
    assert run(["wigner", "--config", cfg, "--out", str(tmp_path / "w")]) == 0
    outs = _meta(tmp_path / "w")["outputs"]
    assert {"wigner.csv", "wigner.pgm", "hom_from_wigner.csv"} <= set(outs)


def test_sweep_writes_one_file_per_value(tmp_path):
    text = SMALL + "sweep: {parameter: pump.profile.phase_step_delta_phi, values: [0, pi/4, pi/2, 3*pi/2, pi]}\n"
    text = text.replace("kind: gaussian", "kind: phase_step")
    out = tmp_path / "o"
    assert run(["sweep", "--config", _cfg(tmp_path, text), "--out", str(out), "--formats", "csv,json"]) == 0
    for i in range(5):
        assert (out / f"jsi_{i:03d}.csv").is_file()
    sweep = json.loads((out / "sweep.json").read_text())
    assert len(sweep["schmidt_number_K"]) == 5
    assert sweep["values"][4] == pytest.approx(math.pi)


def test_design_and_reimport(tmp_path):
    text = SMALL + "design: {exchange_phase_delta_phi: pi, alpha: 1, beta: 0.3, n_samples: 256}\n"
    out = tmp_path / "o"
    assert run(["design-pump", "--config", _cfg(tmp_path, text), "--out", str(out)]) == 0
    assert _meta(out)["results"]["relation_residual"] < 1e-8
    text2 = SMALL.replace("{kind: gaussian, waist_w: 0.6}", f"{{kind: designed, file: {out / 'pump_design.csv'}}}")
    assert run(["schmidt", "--config", _cfg(tmp_path, text2, "b.yaml"), "--out", str(tmp_path / "p")]) == 0


def test_visibility_study(tmp_path):
    text = SMALL + """
visibility_study:
  perturbations:
    - {label: offset, degeneracy_offset: 0.05}
    - {label: comb, comb_shift: 0.015}
"""
    out = tmp_path / "o"
    assert run(["visibility-study", "--config", _cfg(tmp_path, text), "--out", str(out)]) == 0
    rows = json.loads((out / "visibility.json").read_text())
    assert [r["label"] for r in rows] == ["baseline", "offset", "comb"]
    assert rows[0]["delta_v"] == 0.0


def test_validate_ok(capsys):
    assert run(["validate", "--config", str(EXAMPLES / "near_separable.yaml")]) == 0
    assert "config OK" in capsys.readouterr().out


def test_validate_reflectivity(tmp_path, capsys):
    cfg = _cfg(tmp_path, "device:\n  reflectivity_TE: 1.2\n")
    assert run(["validate", "--config", cfg]) == 2
    lines = [ln for ln in capsys.readouterr().out.splitlines() if ln.strip()]
    assert len(lines) == 1
    assert "device.reflectivity_TE" in lines[0] and "line 2" in lines[0]


def test_validate_nonmonotone_profile(tmp_path, capsys):
    (tmp_path / "p.csv").write_text("z_mm,intensity,phase_rad\n0,1,0\n-0.1,1,0\n")
    cfg = _cfg(tmp_path, "pump:\n  profile: {kind: sampled, file: p.csv}\n")
    assert run(["validate", "--config", cfg]) == 2
    out = capsys.readouterr().out
    assert "pump.profile.file" in out and "increasing" in out


def test_validate_unknown_field_and_bad_expression(tmp_path, capsys):
    cfg = _cfg(tmp_path, "pump:\n  wavelenght_p: 700\nsweep: {values: [pi/, 1]}\n")
    assert run(["validate", "--config", cfg]) == 2
    out = capsys.readouterr().out
    assert "pump.wavelenght_p" in out


def test_exit_code_config_error(tmp_path):
    assert run(["jsa", "--config", _cfg(tmp_path, "device: [1, 2\n"), "--out", str(tmp_path / "o")]) == 2
    assert run(["jsa", "--config", str(tmp_path / "missing.yaml"), "--out", str(tmp_path / "o")]) == 2


def test_exit_code_numerical_failure(tmp_path):
    # profile entirely outside the device: the phase-matching function vanishes
    text = "pump:\n  profile:\n    kind: sampled\n    samples: [[5, 1, 0], [6, 1, 0]]\ngrid: {n_points: 32}\n"
    assert run(["jsa", "--config", _cfg(tmp_path, text), "--out", str(tmp_path / "o")]) == 3


def test_exit_code_design_infeasible(tmp_path):
    text = SMALL + "design: {exchange_phase_delta_phi: pi, alpha: 1, beta: 0.001}\n"
    assert run(["design-pump", "--config", _cfg(tmp_path, text), "--out", str(tmp_path / "o")]) == 4


def test_threads_do_not_change_outputs(tmp_path):
    cfg = _cfg(tmp_path, SMALL)
    assert run(["jsa", "--config", cfg, "--out", str(tmp_path / "a"), "--threads", "1"]) == 0
    assert run(["jsa", "--config", cfg, "--out", str(tmp_path / "b"), "--threads", "4"]) == 0
    for f in ("jsi.csv", "jsa_real.csv", "jsi.pgm", "meta.json"):
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()


def test_bad_formats_flag(tmp_path):
    with pytest.raises(SystemExit):
        run(["jsa", "--config", "x", "--out", "y", "--formats", "png"])
