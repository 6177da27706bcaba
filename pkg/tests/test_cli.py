import io
import math
import subprocess
import sys

import numpy as np
import pytest

from anisoscope import verification
from anisoscope.cli import dispatch, load_field, parse_config
from anisoscope.errors import ValidationError
from anisoscope.schemes import TABLE1, MultiDimScheme
from anisoscope.spectral import VelocityPolar, anisotropy_polar


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = dispatch(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


def table(text):
    lines = [ln for ln in text.splitlines() if ln and not ln.startswith("#")]
    return lines[0].split(","), [[float(x) for x in ln.split(",")] for ln in lines[1:]]


def comments(text):
    return dict(ln[2:].split("=", 1) for ln in text.splitlines()
                if ln.startswith("# ") and "=" in ln and not ln.startswith("# manifest"))


def test_list_schemes():
    code, out, _ = run("list-schemes")
    assert code == 0
    assert out.startswith("# manifest: command=list-schemes version=")
    records = [ln for ln in out.splitlines() if not ln.startswith("#")]
    assert len(records) == 10
    assert [r.split(";")[0] for r in records[:8]] == list(TABLE1)


def test_wavenumber_curve():
    code, out, _ = run("wavenumber", "--scheme", "E4")
    header, rows = table(out)
    assert code == 0 and len(rows) == 64
    assert rows[0][1] == 0.0
    assert rows[-1][0] == pytest.approx(math.pi)


def test_polar_round_trip():
    code, out, _ = run("polar", "--scheme", "E4", "--ppw", "6", "--beta", "0.5")
    assert code == 0
    header, rows = table(out)
    assert header == ["angle_rad", "c_n_over_c", "g_n_over_c"] and len(rows) == 72
    parsed = VelocityPolar.from_csv(out, 6.0)
    lib = anisotropy_polar(MultiDimScheme(TABLE1["E4"], 0.5), 6.0)
    assert np.array_equal(parsed.phase, lib.phase)
    assert float(comments(out)["spread"]) == lib.spread


def test_optimize_commands():
    code, out, _ = run("optimize-icf", "--scheme", "E2")
    (beta, value, at_zero), = table(out)[1]
    assert code == 0 and beta > 0 and value < at_zero
    code, out, _ = run("optimize-gs", "--wmax", "1.5")
    (alpha, value, at_third), = table(out)[1]
    assert code == 0 and value <= at_third


def test_stability_command():
    code, out, _ = run("stability", "--scheme", "E2", "--direction", "45",
                       "--grid-points", "11")
    (limit, boundary, margin), = table(out)[1]
    assert code == 0
    assert limit == pytest.approx(1 / math.sqrt(2))
    assert boundary <= limit and margin == pytest.approx(boundary - limit)


def test_simulate_with_dump(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# plane wave\nscheme = E4\nn = 32\nk = 0.05\nsteps = 200\n"
                   "angle_deg = 45\nppw = 8\n")
    dump = tmp_path / "final.bin"
    code, out, _ = run("simulate", "--config", str(cfg), "--dump", str(dump))
    assert code == 0
    header, rows = table(out)
    assert header == ["time", "l2_norm", "max_abs"]
    assert rows[-1][0] == pytest.approx(10.0)
    notes = comments(out)
    emp, pred = float(notes["phase_speed_empirical"]), float(notes["phase_speed_predicted"])
    assert abs(emp - pred) < 1e-5
    field = load_field(dump)
    assert field.shape == (32, 32)
    assert math.sqrt(float(np.sum(field * field))) == pytest.approx(rows[-1][1], rel=1e-15)
    assert "time=10" in (tmp_path / "final.bin.hdr").read_text()


def test_parse_config_rejects_unknown_keys():
    assert parse_config("n = 32 # grid\n\nseed=3") == {"n": 32, "seed": 3}
    with pytest.raises(ValidationError):
        parse_config("colour = red")
    with pytest.raises(ValidationError):
        parse_config("n = many")


def test_usage_error_exit_code():
    code, out, err = run("polar", "--scheme", "E4")
    assert code == 1 and err.startswith("ERROR:usage:")


def test_validation_error_exit_code():
    code, _, err = run("wavenumber", "--scheme", "E5")
    assert code == 1 and err.startswith("ERROR:validation:")


def test_numerical_error_exit_code():
    code, _, err = run("stability", "--scheme", "E2", "--sigma-min", "1.5",
                       "--sigma-max", "2", "--grid-points", "3")
    assert code == 2 and err.startswith("ERROR:boundary-not-found:")


def test_verify_passes():
    code, out, _ = run("verify")
    assert code == 0
    lines = [ln for ln in out.splitlines() if ln.startswith("# PASS") or ln.startswith("# FAIL")]
    assert lines and all(ln.startswith("# PASS") for ln in lines)


def test_verify_failure_exit_code(monkeypatch):
    monkeypatch.setattr(verification, "run_checks",
                        lambda: [verification.Check("broken", False, "forced")])
    code, out, err = run("verify")
    assert code == 2 and err.startswith("ERROR:verify:")
    assert "# FAIL broken: forced" in out


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "anisoscope.cli", "wavenumber", "--scheme",
                           "E2", "--samples", "4"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert len(table(proc.stdout)[1]) == 4
