import math
import subprocess
import sys

import numpy as np
import pytest

from kerrcat.cli import main
from kerrcat.experiments import (
    EXPERIMENTS,
    ConfigError,
    ExperimentConfig,
    Sweep,
    fmt,
    parse_config,
    run,
)
from kerrcat.measurements import s_perfect_analytic
from kerrcat.validation import _fit_center, all_passed, check_a2, check_truncation, validate


def write_cfg(tmp_path, text, name="run.cfg"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def read_csv(path):
    lines = open(path).read().splitlines()
    meta = [line for line in lines if line.startswith("#")]
    body = [line for line in lines if not line.startswith("#")]
    header = body[0].split(",")
    data = np.array([[float(v) for v in row.split(",")] for row in body[1:]])
    return meta, header, data


def test_sweep_parsing():
    assert Sweep.parse("0:1:3").values == (0.0, 0.5, 1.0)
    assert Sweep.parse("2:2:1").values == (2.0,)
    assert Sweep.parse("0.1, 0.4").values == (0.1, 0.4)
    for bad in ("1:0:5", "0:1:0", "0:1", "a,b", "nan"):
        with pytest.raises(ConfigError):
            Sweep.parse(bad)


def test_config_errors_carry_line_numbers():
    with pytest.raises(ConfigError, match=r"my.cfg:3"):
        parse_config("experiment=s-sweep\ngamma=0:1:3\nbogus line\n", "my.cfg")
    with pytest.raises(ConfigError, match=r"my.cfg:2: duplicate"):
        parse_config("gamma=1\ngamma=2\n", "my.cfg")
    with pytest.raises(ConfigError, match="unknown key"):
        parse_config("experiment=s-sweep\nwidth=3\n")
    with pytest.raises(ConfigError, match="missing 'experiment'"):
        parse_config("gamma=1\n")
    with pytest.raises(ConfigError, match="unknown"):
        parse_config("experiment=fig9\n")
    with pytest.raises(ConfigError, match="not ordered"):
        parse_config("experiment=s-sweep\ngamma=3:0:10\n")


def test_overrides_win_and_defaults_merge():
    cfg = parse_config("experiment=s-sweep\ngamma=0:1:3  # comment\n", overrides=["gamma=0.5", "c=0"])
    assert cfg.sweep("gamma").values == (0.5,)
    assert cfg.get("c") == 0.0
    assert cfg.get("eta") == 1.0
    assert "experiment=s-sweep" in cfg.echo()


def test_fmt_twelve_digits():
    assert fmt(1 / 3) == "0.333333333333"
    assert fmt(-0.0) == "0"
    assert fmt(2.0) == "2"


def test_every_experiment_has_parseable_defaults():
    for name in EXPERIMENTS:
        ExperimentConfig(name)


def test_s_sweep_columns_and_agreement(tmp_path):
    cfg = parse_config("experiment=s-sweep\ngamma=0:3:31\n")
    res = run(cfg)
    assert res.columns[:1] == ["gamma"] and {"S_numeric", "S_analytic", "abs_diff"} <= set(res.columns)
    assert res.ok
    g, s = res.column("gamma"), res.column("S_numeric")
    assert np.allclose(s, [s_perfect_analytic(x) for x in g], atol=1e-6)
    # below the bound for every gamma > 0, with the gap closing towards gamma ~ 2 and beyond
    assert np.all(s[g > 0] < 2.0)
    dev = (2 - s) / 2
    assert dev[np.argmin(np.abs(g - 2.0))] < 0.003
    assert g[np.argmax(dev)] == pytest.approx(0.8, abs=0.1)


def test_pdf_in_phase_hills():
    res = run(parse_config("experiment=pdf-in-phase\ngamma=1.5\neta=0.1,0.8\n"))
    assert res.ok
    eta, x, p = res.column("eta"), res.column("x"), res.column("p_numeric")
    step = x[1] - x[0]
    # at eta = 0.1 the hills (width 1/sqrt2) overlap into one maximum, so fit the centres
    sel = eta == 0.1
    centre = math.sqrt(0.2) * 1.5
    assert centre == pytest.approx(0.67, abs=0.005)
    assert _fit_center(x[sel], p[sel], 1.5, 0.1) == pytest.approx(centre, abs=step)
    sel = eta == 0.8
    xs, ps = x[sel], p[sel]
    peaks = [xs[i] for i in range(1, len(ps) - 1) if ps[i] > ps[i - 1] and ps[i] > ps[i + 1]]
    assert len(peaks) == 2
    assert peaks[1] == pytest.approx(math.sqrt(1.6) * 1.5, abs=step)


def test_cat_generate_report():
    res = run(parse_config("experiment=cat-generate\n"))
    row = dict(zip(res.columns, res.rows[0]))
    assert row["p_inconclusive"] == pytest.approx(math.exp(-2), rel=1e-6)
    assert row["fidelity_even"] == pytest.approx(1.0, abs=1e-9)
    assert res.ok


def test_coincidence_ideal_and_renormalized():
    res = run(parse_config("experiment=coincidence\ngamma=2\neta=0.75\n"))
    assert res.ok
    assert np.max(res.column("abs_diff")) < 1e-8
    g = 2.0
    e = math.exp(-2 * g * g)
    a = res.column("alpha")
    assert np.allclose(res.column("P_numeric"),
                       res.column("P_renormalized") * (1 + e * np.cos(a)) / (1 + e), atol=1e-14)


def test_atomic_and_kerr_experiments():
    res = run(parse_config("experiment=atomic-eigenvalue\n"))
    err = res.column("rel_err")
    lv = res.column("levels")
    for n in (4, 6):
        e = err[lv == n]
        assert e[0] < 0.02 and np.all(np.diff(e) < 0)
    res = run(parse_config("experiment=kerr-rate\n"))
    phi = np.abs(res.column("chi_tau"))
    assert np.all((phi > math.pi / 10) & (phi < 10 * math.pi))


def test_cli_run_deterministic_with_png(tmp_path):
    cfg = write_cfg(tmp_path, "experiment=pdf-out-phase\ngamma=1\neta=0.4,0.9\npoints=201\n")
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["run", "--config", cfg, "--out", str(a)]) == 0
    assert main(["run", "--config", cfg, "--out", str(b), "--no-plot"]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert (tmp_path / "a.png").stat().st_size > 1000
    assert not (tmp_path / "b.png").exists()
    meta, header, data = read_csv(a)
    assert meta[0].startswith("# kerrcat")
    assert "# experiment=pdf-out-phase" in meta
    assert "# levels per mode: automatic" in meta
    assert header == ["gamma", "eta", "x", "p_numeric", "p_analytic", "abs_diff"]
    assert data.shape == (402, 6)


def test_cli_exit_codes(tmp_path, capsys):
    good = write_cfg(tmp_path, "experiment=pdf-in-phase\ngamma=1.5\neta=0.1\n")
    out = str(tmp_path / "o.csv")
    assert main(["run", "--config", good, "--out", out, "--no-plot"]) == 0
    # a sampling too coarse to normalize is a failed embedded check
    assert main(["run", "--config", good, "--set", "points=11", "--out", out, "--no-plot"]) == 1
    assert main(["run", "--config", good, "--set", "x_max=2", "--out", out, "--no-plot"]) == 2
    assert main(["run", "--config", good, "--set", "eta=1.5", "--out", out, "--no-plot"]) == 2
    assert main(["run", "--config", good, "--set", "truncation=8", "--out", out, "--no-plot"]) == 2
    bad = write_cfg(tmp_path, "experiment=pdf-in-phase\ngamma\n", "bad.cfg")
    assert main(["run", "--config", bad, "--out", out]) == 2
    assert "bad.cfg:2" in capsys.readouterr().err
    assert main(["run", "--config", str(tmp_path / "missing.cfg"), "--out", out]) == 2
    assert main(["run", "--out", out]) == 2
    assert main(["frobnicate"]) == 2


def test_list_experiments(capsys):
    assert main(["list-experiments"]) == 0
    text = capsys.readouterr().out
    for name in EXPERIMENTS:
        assert name in text


def test_console_script_entry_point():
    r = subprocess.run([sys.executable, "-m", "kerrcat.cli", "list-experiments"],
                       capture_output=True, text=True, check=False)
    assert r.returncode == 0 and "s-sweep" in r.stdout


def test_validate_negative_control():
    assert check_a2(True).passed
    perturbed = lambda g: s_perfect_analytic(g) * 1.001  # noqa: E731
    assert not check_a2(True, perturbed).passed


def test_validate_flags_reduced_truncation():
    assert check_truncation(2.0).passed
    r = check_truncation(2.0, 8)
    assert not r.passed and "8 levels" in r.detail


def test_validate_report_never_raises(monkeypatch):
    import kerrcat.validation as v

    def boom(fast=False):
        raise RuntimeError("boom")

    for name in ("check_a3", "check_a4", "check_a5", "check_a6", "check_a7", "check_a8",
                 "check_a9", "check_a10", "check_a1"):
        monkeypatch.setattr(v, name, boom)
    results = validate(fast=True)
    assert [r.name for r in results][:10] == ["A1", "A2", "A3", "A4", "A5", "A6", "A7", "A8", "A9", "A10"]
    assert not all_passed(results)
    assert "boom" in results[0].detail


def test_cli_validate_exit_codes(monkeypatch, capsys):
    import kerrcat.validation as v
    from kerrcat.validation import CriterionResult

    good = [CriterionResult("A1", True, "ok"), CriterionResult("X", False, "aux", supplementary=True)]
    monkeypatch.setattr(v, "validate", lambda fast=False, truncation=None: good)
    assert main(["validate", "--fast"]) == 0
    monkeypatch.setattr(v, "validate", lambda fast=False, truncation=None: good + [
        CriterionResult("A2", False, "bad")])
    assert main(["validate"]) == 1
    out = capsys.readouterr().out
    assert "A2     FAIL" in out and "1 criterion(s) failed" in out
