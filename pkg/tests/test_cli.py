import csv
import json
import math

import numpy as np
import pytest

from eventloc import cli


def run(tmp_path, *args, name="out"):
    out = tmp_path / name
    code = cli.main([*args, "--out", str(out)])
    return code, out


def rows(path):
    with open(path, encoding="utf-8", newline="") as fh:
        return list(csv.DictReader(fh))


def test_estimate_alpha_track(tmp_path):
    code, out = run(tmp_path, "estimate", "--scenario", "alpha-track")
    assert code == 0
    r = {x["quantity"]: x for x in rows(out / "estimate.csv")}
    for q, ref in (("Delta_t", 1e-18), ("passage_time", 1e-16), ("delta_p_over_p", 1e-5), ("l_c", 2e-7)):
        assert float(r[q]["paper_value"]) == ref
        assert r[q]["decade_match"] == "true"
    raw = (out / "estimate.csv").read_bytes()
    assert b"\r" not in raw and raw.endswith(b"\n")
    assert raw.decode("utf-8").startswith("quantity,value,unit,paper_value,decade_match\n")


def test_seventeen_digit_floats():
    assert cli.fmt(0.1) == "0.10000000000000001"
    assert float(cli.fmt(math.pi)) == math.pi
    assert cli.fmt(True) == "true" and cli.fmt(3) == "3" and cli.fmt(None) == ""


def test_manifest_records_inputs(tmp_path):
    code, out = run(tmp_path, "estimate", "--scenario", "thermal-gas", "--T", "300", "--seed", "7")
    assert code == 0
    man = json.loads((out / "manifest.json").read_text())
    assert man["parameters"]["T_K"] == 300.0 and man["seed"] == 7
    assert man["tolerance_profile"] == "strict" and "grid" in man["tolerances"]
    assert set(man["outputs"]) == {"estimate.csv"}
    assert {"numpy", "scipy", "python", "eventloc"} <= set(man["versions"])
    assert "time" not in json.dumps(man).lower().replace("time_", "")


def test_unknown_config_key_exit_2(tmp_path, capsys):
    cfg = tmp_path / "bad.json"
    cfg.write_text(json.dumps({"name": "x", "E0_eV": 2.0, "colour": "red"}))
    code, _ = run(tmp_path, "rate", "--config", str(cfg))
    assert code == 2
    err = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert err == {"error": "validation", "key": "colour", "message": "unknown key 'colour' for rate"}


@pytest.mark.parametrize("content,key", [("{not json", "config"), ("[1, 2]", "config"),
                                         ('{"E0_eV": "two"}', "E0_eV"),
                                         ('{"target": "chsh"}', "target")])
def test_malformed_config(tmp_path, capsys, content, key):
    cfg = tmp_path / "c.json"
    cfg.write_text(content)
    code, _ = run(tmp_path, "estimate", "--config", str(cfg))
    assert code == 2
    assert json.loads(capsys.readouterr().err.strip().splitlines()[-1])["key"] == key


def test_config_values_used(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"name": "hot", "target": "estimate", "scenario": "thermal-gas", "T_K": 1172.0}))
    code, out = run(tmp_path, "estimate", "--config", str(cfg))
    assert code == 0
    a = float(rows(out / "estimate.csv")[0]["value"])
    code, out2 = run(tmp_path, "estimate", "--scenario", "thermal-gas", name="cold")
    assert a == pytest.approx(float(rows(out2 / "estimate.csv")[0]["value"]) / 2, rel=1e-12)


def test_bad_flags_exit_2(tmp_path, capsys):
    assert run(tmp_path, "estimate", "--scenario", "nope")[0] == 2
    assert json.loads(capsys.readouterr().err.strip().splitlines()[-1])["key"] == "scenario"
    assert run(tmp_path, "chsh", "--angles", "0,1")[0] == 2
    assert run(tmp_path, "rate", "--seed", "-1")[0] == 2
    assert run(tmp_path, "rate", "--set", "lc_cm=0")[0] == 2
    assert run(tmp_path, "rate", "--set", "nonsense")[0] == 2


def test_numerical_failure_exit_1(tmp_path, capsys):
    code, _ = run(tmp_path, "formfactor", "--set", "n_grid=8")
    assert code == 1
    assert json.loads(capsys.readouterr().err.strip().splitlines()[-1])["error"] == "numerical"


def test_internal_error_exit_3(tmp_path, monkeypatch, capsys):
    def boom(p, ctx):
        raise RuntimeError("boom")
    monkeypatch.setitem(cli.COMMANDS, "constants", boom)
    assert run(tmp_path, "constants")[0] == 3
    assert json.loads(capsys.readouterr().err.strip())["error"] == "internal"


def test_constants(tmp_path):
    code, out = run(tmp_path, "constants")
    assert code == 0
    names = [r["name"] for r in rows(out / "constants.csv")]
    assert "hbar" in names and "mass_alpha" in names


def test_chsh_singlet_and_lhv_file(tmp_path):
    code, out = run(tmp_path, "chsh")
    assert code == 0
    assert float(rows(out / "chsh.csv")[0]["S"]) == pytest.approx(2 * math.sqrt(2), abs=1e-12)
    lam = list((np.arange(72) + 0.5) * 5.0)
    model = tmp_path / "lhv.json"
    model.write_text(json.dumps({"lam1_deg": lam, "lam2_deg": lam, "rho": (np.eye(72) / 72).tolist()}))
    code, out = run(tmp_path, "chsh", "--model", f"lhv:{model}", name="lhv")
    assert code == 0
    assert float(rows(out / "chsh.csv")[0]["S"]) == pytest.approx(2.0, abs=1e-12)


def test_chsh_random_seeded(tmp_path):
    a = run(tmp_path, "chsh", "--model", "random", "--seed", "5", "--set", "n_random=500", name="a")[1]
    b = run(tmp_path, "chsh", "--model", "random", "--seed", "5", "--set", "n_random=500", name="b")[1]
    assert (a / "chsh_random.csv").read_bytes() == (b / "chsh_random.csv").read_bytes()
    assert float(rows(a / "chsh_random.csv")[0]["max_S"]) <= 2.0


def test_gaussmix_both_directions(tmp_path):
    code, out = run(tmp_path, "gaussmix", "--alpha", "1", "--beta", "2", "--gamma", "3")
    r = rows(out / "gaussmix.csv")[0]
    assert code == 0 and r["equal"] == "true"
    assert float(r["beta_prime"]) == pytest.approx(1 / (1 / 2 + 1 / 6))
    code, out = run(tmp_path, "gaussmix", "--alpha-prime", "1", "--beta-prime", "2", name="rev")
    r = rows(out / "gaussmix.csv")[0]
    assert code == 0 and r["equal"] == "true" and float(r["sampled"]) < 1e-12
    assert run(tmp_path, "gaussmix", "--alpha", "1", name="bad")[0] == 2


def test_histories_matrix_input(tmp_path):
    def dump(name, m):
        p = tmp_path / name
        with open(p, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["i", "j", "re", "im"])
            for (i, j), v in np.ndenumerate(m):
                w.writerow([i, j, v.real, v.imag])
        return str(p)
    plus = np.full((2, 2), 0.5)
    code, out = run(tmp_path, "histories", "--set", f"rho_csv={json.dumps(dump('rho.csv', plus))}",
                    "--set", f"P1_csv={json.dumps(dump('p1.csv', np.diag([1.0, 0.0])))}",
                    "--set", f"P2_csv={json.dumps(dump('p2.csv', plus))}")
    assert code == 0
    assert float(rows(out / "histories.csv")[0]["residual"]) == -0.5


def test_pairings_from_config(tmp_path):
    cfg = tmp_path / "p.json"
    cfg.write_text(json.dumps({"atoms": [{"x_cm": 0.0}, {"x_cm": 1e-7}], "beams": [{"x_cm": 0.0}, {"x_cm": 1e-7}],
                               "sigma_cm2": 1e-15}))
    code, out = run(tmp_path, "pairings", "--config", str(cfg))
    assert code == 0
    assert len(rows(out / "pairings.csv")) == 4
    classes = [r["class"] for r in rows(out / "pairing_combinations.csv")]
    assert classes.count("coherent-hbt") == 2
    cfg.write_text(json.dumps({"atoms": [{"x_cm": 0.0, "mass": 1}]}))
    assert run(tmp_path, "pairings", "--config", str(cfg), name="bad")[0] == 2


def test_track_and_stationary_fast(tmp_path):
    code, out = run(tmp_path, "track", "--tolerance-profile", "fast", "--set", "lc_cm=1e-5",
                    "--set", "Z_cm=6e-5")
    assert code == 0
    r = rows(out / "track.csv")
    assert len(r) > 3 and sum(float(x["weight"]) for x in r) == pytest.approx(1.0)
    code, out = run(tmp_path, "stationary", "--tolerance-profile", "fast", name="sp")
    assert code == 0
    pt = {x["quantity"]: float(x["value"]) for x in rows(out / "stationary_point.csv")}
    assert pt["dt"] == pytest.approx(1e-18)
    assert len(rows(out / "stationary.csv")) == 7
