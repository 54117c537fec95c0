from __future__ import annotations

import csv
import hashlib
import json

import numpy as np
import pytest

from conftest import weekly_spec
from lpplkit.cli import main
from lpplkit.fitting import FitResult
from lpplkit.model import LpplParams, evaluate
from lpplkit.reference import DJIA_2009_2016

SMALL = {"tc_offset_min": 1.0, "tc_offset_max": 2.0, "omega_min": 12.0, "omega_max": 18.0}


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    (d / "spec.json").write_text(json.dumps(weekly_spec().to_dict()))
    (d / "small.json").write_text(json.dumps(SMALL))
    assert main(["synth", "--config", str(d / "spec.json"), "--out", str(d / "synth.csv")]) == 0
    return d


@pytest.fixture(scope="module")
def fit_doc(workdir):
    out = workdir / "fit" / "fit.json"
    code = main(["fit", "--in", str(workdir / "synth.csv"), "--out", str(out)])
    assert code == 0
    return out


def rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def fit_document(params: LpplParams, converged: bool = True) -> dict:
    r = FitResult(params, 1.0, 0.1, 100, (2009.0, 2016.0), converged, 5, 50)
    return {"schema": "lpplkit.fit", "schema_version": 1, "result": r.to_dict()}


def test_fit_synthetic(fit_doc):
    doc = json.loads(fit_doc.read_text())
    assert doc["schema"] == "lpplkit.fit" and doc["schema_version"] == 1
    res = doc["result"]
    assert abs(res["linear"]["tc"] - 2017.80) < 1e-2
    assert res["published"]["gauge"]
    assert doc["config"]["tc_step"] == 0.05


def test_fit_side_files(fit_doc):
    residual_rows = rows(fit_doc.with_name("fit.residuals.csv"))
    assert len(residual_rows) == 366
    assert max(abs(float(r["Residual"])) for r in residual_rows) < 1e-3
    curve = rows(fit_doc.with_name("fit.curve.csv"))
    assert len(curve) >= 500
    manifest = json.loads(fit_doc.with_name("fit.manifest.json").read_text())
    assert manifest["command"] == "fit" and manifest["tool_version"]
    (path, digest), = manifest["inputs"].items()
    assert digest == hashlib.sha256(open(path, "rb").read()).hexdigest()
    assert len(manifest["outputs"]) == 3


def test_fit_reproduced_from_manifest(fit_doc, tmp_path):
    manifest = json.loads(fit_doc.with_name("fit.manifest.json").read_text())
    cfg = tmp_path / "resolved.json"
    cfg.write_text(json.dumps(manifest["config"]))
    argv = list(manifest["argv"])
    argv[argv.index("--out") + 1] = str(tmp_path / "again.json")
    assert main(argv + ["--config", str(cfg)]) == 0
    assert (tmp_path / "again.json").read_bytes() == fit_doc.read_bytes()
    for suffix in ("residuals.csv", "curve.csv"):
        assert (tmp_path / f"again.{suffix}").read_bytes() == fit_doc.with_name(f"fit.{suffix}").read_bytes()


def test_fit_to_stdout(workdir, capsys):
    assert main(["fit", "--in", str(workdir / "synth.csv"), "--config", str(workdir / "small.json"),
                 "--window-start", "2012-01-01"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["input"]["window_start"] >= "2012-01-01"


def test_missing_input(tmp_path, capsys):
    out = tmp_path / "o" / "fit.json"
    assert main(["fit", "--in", str(tmp_path / "nope.csv"), "--out", str(out)]) == 1
    assert not out.parent.exists()
    assert "error" in capsys.readouterr().err


def test_malformed_input(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("Date,Close\n2009-03-02,x\n")
    assert main(["fit", "--in", str(bad)]) == 1


def test_config_error(workdir, tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"omega_step": -1}))
    assert main(["fit", "--in", str(workdir / "synth.csv"), "--config", str(cfg)]) == 2
    assert main(["fit", "--in", str(workdir / "synth.csv"), "--config", str(tmp_path / "none.json")]) == 2


def test_usage_error_exits_2():
    with pytest.raises(SystemExit) as info:
        main(["fit"])
    assert info.value.code == 2


def test_scan_stable(workdir):
    out = workdir / "scan.json"
    starts = "2009.25,2009.75,2010.25,2010.75,2011.25"
    assert main(["scan", "--in", str(workdir / "synth.csv"), "--starts", starts, "--out", str(out), "-v"]) == 0
    res = json.loads(out.read_text())["result"]
    assert res["stable"] and res["n_success"] == 5
    assert len(rows(workdir / "scan.windows.csv")) == 5
    assert (workdir / "scan.manifest.json").exists()


def test_scan_single_start(workdir, capsys):
    assert main(["scan", "--in", str(workdir / "synth.csv"), "--starts", "2011-01-01",
                 "--config", str(workdir / "small.json")]) == 0
    assert json.loads(capsys.readouterr().out)["result"]["tc_iqr"] == 0.0


def test_scan_all_short(workdir, capsys):
    code = main(["scan", "--in", str(workdir / "synth.csv"), "--starts", "2016.2,2016.22"])
    assert code == 3
    err = capsys.readouterr().err
    assert "2016.2" in err and "2016.22" in err


def test_forecast_anchor(tmp_path, capsys):
    p = tmp_path / "fit.json"
    p.write_text(json.dumps(fit_document(DJIA_2009_2016)))
    out = tmp_path / "fc.json"
    assert main(["forecast", "--in", str(p), "--out", str(out)]) == 0
    summary = (tmp_path / "fc.txt").read_text()
    assert "2017-10-19" in summary and "2017-09-06" in summary
    fc = json.loads(out.read_text())["forecast"]
    assert fc["tc_date"] == "2017-10-19" and fc["regime"] == "bubble"
    assert "2017-10-19" in capsys.readouterr().out


def test_forecast_far_tc(tmp_path, capsys):
    p = tmp_path / "fit.json"
    p.write_text(json.dumps(fit_document(LpplParams(2045.853, -2.047, 24.202, 31.2, 1.2e7, 1.0, 1.0))))
    assert main(["forecast", "--in", str(p)]) == 0
    assert json.loads(capsys.readouterr().out)["forecast"]["tc_date"] == "2045-11-07"


def test_forecast_refuses_unconverged(tmp_path):
    p = tmp_path / "fit.json"
    p.write_text(json.dumps(fit_document(DJIA_2009_2016, converged=False)))
    assert main(["forecast", "--in", str(p)]) == 3


def test_forecast_on_fit_output(fit_doc, capsys):
    assert main(["forecast", "--in", str(fit_doc)]) == 0
    assert json.loads(capsys.readouterr().out)["forecast"]["tc_date"].startswith("2017-10")


def test_synth_same_seed(tmp_path):
    spec = tmp_path / "noisy.json"
    spec.write_text(json.dumps(weekly_spec(sigma=70.0, seed=1).to_dict()))
    a, b, c = tmp_path / "a.csv", tmp_path / "b.csv", tmp_path / "c.csv"
    for out in (a, b):
        assert main(["synth", "--config", str(spec), "--seed", "42", "--out", str(out)]) == 0
    assert main(["synth", "--config", str(spec), "--out", str(c)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert a.read_bytes() != c.read_bytes()


def test_synth_noiseless_matches_curve(workdir):
    r = rows(workdir / "synth.csv")
    t = np.array([float(x["Time"]) for x in r])
    p = np.array([float(x["Price"]) for x in r])
    assert np.array_equal(p, evaluate(DJIA_2009_2016, t))


def test_synth_bad_spec(tmp_path):
    spec = tmp_path / "s.json"
    spec.write_text(json.dumps({**weekly_spec().to_dict(), "n_points": 1}))
    assert main(["synth", "--config", str(spec)]) == 2


def test_eval_dense_curve(fit_doc, tmp_path):
    out = tmp_path / "curve.csv"
    assert main(["eval", "--params", str(fit_doc), "--start", "2009.25", "--end", "2017.5",
                 "--out", str(out)]) == 0
    r = rows(out)
    assert len(r) == 1000 and float(r[0]["Time"]) == 2009.25
    assert main(["eval", "--params", str(fit_doc), "--start", "2017", "--end", "2018"]) == 1
