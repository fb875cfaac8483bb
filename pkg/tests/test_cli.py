import csv
import json
import subprocess
import sys

import pytest
from hypothesis import given
from hypothesis import strategies as st

from mdsearch import cli
from mdsearch.channels import ChannelModel
from mdsearch.optimize import capacity


def run(tmp_path, *argv):
    out = tmp_path / "out.dat"
    code = cli.main([*argv, "--out", str(out)])
    return code, out


def rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_mi_curve_fig3(tmp_path):
    code, out = run(tmp_path, "mi-curve", "--a", "0.7", "--b", "0.1")
    assert code == 0
    r = rows(out)
    vals = [float(x["mi_bits"]) for x in r]
    assert abs(vals[-1] - 0.0072255460) < 1e-6
    i = max(range(len(vals)), key=vals.__getitem__)
    assert 0 < i < len(vals) - 1
    man = json.loads((tmp_path / "out.dat.manifest.json").read_text())
    assert man["command"] == "mi-curve" and man["outputs"] == [str(out)]
    assert man["config"]["channel"]["a"] == 0.7


def test_mi_curve_monotone_for_fixed_noise(tmp_path):
    code, out = run(tmp_path, "mi-curve", "--a", "0", "--b", "0.1")
    vals = [float(x["mi_bits"]) for x in rows(out)]
    assert all(b >= a for a, b in zip(vals, vals[1:]))
    assert vals[-1] == max(vals)


def test_empty_grid_step_uses_default(tmp_path):
    ini = tmp_path / "c.ini"
    ini.write_text("[scheme]\ngrid_step =\n")
    code, out = run(tmp_path, "mi-curve", "--config", str(ini))
    assert code == 0
    man = json.loads((tmp_path / "out.dat.manifest.json").read_text())
    assert man["config"]["scheme"]["grid_step"] == 1e-3
    assert len(rows(out)) == 501


def test_csv_uses_twelve_significant_digits(tmp_path):
    _, out = run(tmp_path, "mi-curve", "--grid_step", "0.01")
    text = out.read_text()
    assert "," in text and ";" not in text
    for r in rows(out)[1:]:
        digits = r["mi_bits"].replace(".", "").replace("-", "").split("e")[0].lstrip("0")
        assert len(digits) <= 12


def test_exponents_ordering(tmp_path):
    code, out = run(tmp_path, "exponents", "--a", "0.7", "--b", "0.1")
    assert code == 0
    r = rows(out)
    assert len(r) == 50
    first = {k: float(v) for k, v in r[0].items()}
    assert first["random_coding"] <= first["forney"]
    assert first["burnashev_qstar"] <= first["yamamoto_itoh"]
    assert all(float(v) >= 0 for row in r for v in row.values())
    last = {k: float(v) for k, v in r[-1].items()}
    assert last["rate"] == pytest.approx(capacity(ChannelModel.linear_bsc(0.7, 0.1), 0.0), abs=1e-11)
    assert last["two_phase_burnashev"] == 0.0


def test_optimize_json(tmp_path):
    code, out = run(tmp_path, "optimize", "--a", "0.7", "--b", "0.1")
    d = json.loads(out.read_text())
    assert code == 0 and abs(d["q_star"] - 0.149998) < 1e-5


def test_simulate_smoke_and_determinism(tmp_path):
    a = tmp_path / "a.json"
    b = tmp_path / "b.json"
    argv = ["simulate", "--scheme", "nonadaptive", "--trials", "10", "--a", "0", "--b", "0.1",
            "--delta", "0.03125", "--N", "20", "--prior", "0.5"]
    assert cli.main([*argv, "--out", str(a)]) == 0
    assert cli.main([*argv, "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    d = json.loads(a.read_text())
    for key in ("trials", "error_rate", "error_ci", "erasure_rate", "mean_stopping_time", "scheme_tag", "config"):
        assert key in d
    assert d["trials"] == 10


def test_simulate_sweep_non_increasing(tmp_path):
    code, out = run(tmp_path, "simulate", "--scheme", "nonadaptive", "--a", "0", "--b", "0.1",
                    "--delta", "0.015625", "--prior", "0.5", "--sweep_N", "16,24,32", "--trials", "2000")
    assert code == 0
    r = rows(out)
    assert [int(x["N"]) for x in r] == [16, 24, 32]
    errs = [float(x["error_rate"]) for x in r]
    assert errs[0] >= errs[1] >= errs[2]
    assert list(r[0]) == ["N", "rate", "error_rate", "ci_low", "ci_high", "erasure_rate", "mean_tau"]


@pytest.mark.parametrize("scheme", ["forney", "yamamoto-itoh", "moving"])
def test_simulate_other_schemes(tmp_path, scheme):
    extra = ["--N", "5", "--delta", "0.5", "--v_max", "0.1"] if scheme == "moving" else ["--N", "16"]
    code, out = run(tmp_path, "simulate", "--scheme", scheme, "--trials", "20", "--a", "0", "--b", "0.1",
                    "--prior", "0.5", *extra)
    assert code == 0
    assert json.loads(out.read_text())["scheme_tag"] == scheme


def test_infeasible_rate_reports_maximum(tmp_path, capsys):
    code, _ = run(tmp_path, "simulate", "--a", "0", "--b", "0.1", "--delta", "0.015625", "--N", "8")
    assert code == 2
    assert "0.531004" in capsys.readouterr().err


def test_config_errors(tmp_path, capsys):
    assert run(tmp_path, "mi-curve", "--a", "zero")[0] == 2
    assert run(tmp_path, "simulate", "--scheme", "teleport")[0] == 2
    assert run(tmp_path, "mi-curve", "--a", "0.9", "--b", "0.1")[0] == 2
    ini = tmp_path / "bad.ini"
    ini.write_text("[channel]\na = 0.7\nbb = 1\n")
    capsys.readouterr()
    assert run(tmp_path, "mi-curve", "--config", str(ini))[0] == 2
    assert "bad.ini:3" in capsys.readouterr().err


def test_resource_guard_exit_code(tmp_path):
    code, _ = run(tmp_path, "bounds-audit", "--audit_N_max", "40", "--audit_M_max", "200")
    assert code == 3


def test_small_bounds_audit(tmp_path):
    code, out = run(tmp_path, "bounds-audit", "--audit_N_max", "4", "--audit_M_max", "6",
                    "--audit_v_max", "0.1")
    assert code == 0
    r = rows(out)
    assert len(r) == 4 * 5
    assert all(int(x["count"]) <= float(x["count_bound"]) for x in r)


def test_flags_override_file(tmp_path):
    ini = tmp_path / "c.ini"
    ini.write_text("[channel]\na = 0.5\n[sim]\nseed = 4\n")
    args, extra = cli._parser().parse_known_args(["optimize", "--config", str(ini), "--a=0.2", "--seed", "9"])
    cfg = cli.resolve_config(args, extra)
    assert cfg["a"] == 0.2 and cfg["seed"] == 9


def test_config_round_trip():
    cfg = cli.RunConfig()
    cfg.set("sweep_N", "16, 24")
    cfg.set("w_policy", "0.25")
    cfg.set("audit_v_max", "0.1,0.25")
    back = cli.RunConfig.from_ini(cfg.to_ini())
    assert back.values == cfg.values


@given(a=st.floats(0, 0.6), b=st.floats(0, 0.19), seed=st.integers(0, 2**31), trials=st.integers(1, 10**6))
def test_config_round_trip_property(a, b, seed, trials):
    cfg = cli.RunConfig()
    cfg.set("a", repr(a))
    cfg.set("b", repr(b))
    cfg.set("seed", str(seed))
    cfg.set("trials", str(trials))
    assert cli.RunConfig.from_ini(cfg.to_ini()).values == cfg.values


def test_console_entry_point(tmp_path):
    out = tmp_path / "o.json"
    res = subprocess.run(
        [sys.executable, "-m", "mdsearch.cli", "optimize", "--out", str(out)], capture_output=True, text=True
    )
    assert res.returncode == 0 and out.exists()
