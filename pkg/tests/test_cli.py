import csv
import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from calibrix import report as rep
from calibrix.cli import EXIT_CONSTRAINT, EXIT_OK, RunConfig, build_parser, main
from calibrix.fields import Region
from calibrix.model_calibration import ModelField
from calibrix.params import derive_model_params

GOLDEN = Path(__file__).parent / "golden" / "verify_model_opposite.json"


@pytest.fixture(scope="module")
def model_run(tmp_path_factory):
    d = tmp_path_factory.mktemp("model")
    outs = []
    for name in ("a.json", "b.json"):
        assert main(["verify", "model", "--seed", "0", "--out", str(d / name)]) == EXIT_OK
        outs.append(json.loads((d / name).read_text()))
    return outs


def _close(a, b, path=""):
    if isinstance(a, dict):
        assert set(a) == set(b), path
        for k in a:
            _close(a[k], b[k], f"{path}/{k}")
    elif isinstance(a, list):
        assert len(a) == len(b), path
        for i, (x, y) in enumerate(zip(a, b)):
            _close(x, y, f"{path}[{i}]")
    elif isinstance(a, float) and not isinstance(b, bool):
        assert a == pytest.approx(b, rel=1e-6, abs=1e-12), path
    else:
        assert a == b, path


def test_model_report_matches_golden(model_run):
    got = rep.strip_timing(model_run[0])
    want = rep.strip_timing(json.loads(GOLDEN.read_text()))
    want["version"] = got["version"]
    _close(got, want)


def test_same_seed_is_byte_identical_modulo_timing(model_run):
    a, b = model_run
    assert rep.dumps(rep.strip_timing(a)) == rep.dumps(rep.strip_timing(b))


def test_report_validates_against_schema(model_run):
    rep.validate(model_run[0])
    bad = dict(model_run[0])
    del bad["verdict"]
    with pytest.raises(Exception):
        rep.validate(bad)


def test_constraint_violation_exit_code(capsys):
    assert main(["verify", "model", "--eps", "0.2"]) == EXIT_CONSTRAINT
    assert "0 < eps < x0/10" in capsys.readouterr().err


def test_hypothesis_failure_exit_code(capsys):
    assert main(["verify", "general", "--coeffs", "0,1"]) == EXIT_CONSTRAINT
    assert "u(0,0) != 0" in capsys.readouterr().err


def test_unknown_figure(tmp_path):
    assert main(["section", "--figure", "5", "--out", str(tmp_path)]) == EXIT_CONSTRAINT


def test_tolerance_override_and_csv(tmp_path, capsys):
    out = tmp_path / "r.csv"
    rc = main(["verify", "model", "--kind", "shifted", "--eps", "0.02", "--format", "csv", "--tol.graph_c", "1e-9", "--out", str(out)])
    assert rc == EXIT_OK
    rows = list(csv.reader(out.read_text().splitlines()))
    assert rows[0][:4] == ["condition", "passed", "residual", "tolerance"]
    by_name = {r[0]: r for r in rows[1:]}
    assert float(by_name["Graph_c"][3]) == 1e-9
    assert by_name["verdict"][1] == "CALIBRATION_VERIFIED"
    assert capsys.readouterr().err.strip() == "CALIBRATION_VERIFIED"


def test_counterexample_csv(tmp_path):
    out = tmp_path / "sweep.csv"
    assert main(["counterexample", "--eps", "0.01,0.1,1.0", "--format", "csv", "--out", str(out)]) == EXIT_OK
    rows = list(csv.DictReader(out.read_text().splitlines()))
    assert list(rows[0]) == ["eps", "ms_w", "ms_psi", "margin"]
    assert float(rows[0]["ms_w"]) == pytest.approx(0.0204)
    assert float(rows[-1]["margin"]) < 0 < float(rows[0]["margin"])


def test_config_round_trip_and_precedence(tmp_path):
    cfg = RunConfig(command="verify model", kind="shifted", x0=1.0, eps="0.02", seed=7, tolerances={"slice_d": 1e-8})
    assert RunConfig.from_text(cfg.to_text()) == cfg
    path = tmp_path / "run.cfg"
    path.write_text("# run\nkind = shifted\neps = 0.02\nseed = 7\ntol.slice_d = 1e-8\n")
    from calibrix.cli import _splice_config

    argv = _splice_config(["verify", "model", "--config", str(path), "--seed", "3"])
    args = build_parser().parse_args(argv)
    assert args.kind == "shifted" and args.eps == 0.02
    assert args.seed == 3  # command line wins
    assert args.tol_slice_d == 1e-8
    with pytest.raises(ValueError):
        RunConfig.from_text("bogus = 1\n")


def test_section_figure1_matches_classify(tmp_path):
    assert main(["section", "--figure", "1", "--out", str(tmp_path)]) == EXIT_OK
    for ext in ("csv", "json", "png"):
        assert (tmp_path / f"figure1.{ext}").stat().st_size > 0
    rows = list(csv.DictReader((tmp_path / "figure1.csv").read_text().splitlines()))
    fld = ModelField(derive_model_params(1.0, 0.025))
    regions = [Region.A1, Region.A2, Region.A3, Region.A4, Region.A5]
    for r in rows[::20]:
        y = float(r["y"])
        for k, reg in enumerate(regions, 1):
            lo, hi = float(r[f"A{k}_lo"]), float(r[f"A{k}_hi"])
            if hi > lo:
                assert fld.classify(1.0, y, 0.5 * (lo + hi)) == reg


def test_section_figure4_integrals(tmp_path):
    assert main(["section", "--figure", "4", "--out", str(tmp_path)]) == EXIT_OK
    meta = json.loads((tmp_path / "figure4.json").read_text())
    assert meta["top_integral"] == pytest.approx(meta["left_integral"], abs=1e-10)


def test_console_entry_point():
    r = subprocess.run([sys.executable, "-m", "calibrix", "--help"], capture_output=True, text=True)
    assert r.returncode == 0 and "verify" in r.stdout


def test_plain_converts_numpy_types():
    out = rep.plain({"a": np.float64(np.nan), "b": np.arange(2), "c": np.bool_(True)})
    assert out == {"a": None, "b": [0, 1], "c": True}
