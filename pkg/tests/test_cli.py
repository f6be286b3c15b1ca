import json
import subprocess
import sys

import numpy as np
import pytest

from minkolab import io
from minkolab.cli import RunConfig, main, run
from minkolab.errors import DimensionMismatch, InvalidMeasure
from minkolab.measure import DirectionalMeasure
from minkolab.polytope import box, regular_polygon
from minkolab.stability import SweepRecord, regular_measure

SQUARE = {"dim": 2, "atoms": [[1, 0, 1], [-1, 0, 1], [0, 1, 1], [0, -1, 1]]}


def write(path, obj):
    path.write_text(json.dumps(obj))
    return str(path)


# -- file formats


def test_measure_round_trip(tmp_path):
    rng = np.random.default_rng(0)
    U = rng.standard_normal((7, 3))
    mu = DirectionalMeasure(U, rng.uniform(0.1, 2, 7))
    io.save_measure(mu, tmp_path / "m.json")
    back = io.load_measure(tmp_path / "m.json")
    assert np.array_equal(back.directions, mu.directions)
    assert np.array_equal(back.weights, mu.weights)


def test_measure_unit_norm_checked(tmp_path):
    bad = {"dim": 2, "atoms": [[1, 0, 1], [0, 2, 1], [-1, 0, 1]]}
    with pytest.raises(InvalidMeasure):
        io.load_measure(write(tmp_path / "b.json", bad))
    with pytest.raises(DimensionMismatch):
        io.load_measure(write(tmp_path / "c.json", {"dim": 3, "atoms": [[1, 0, 1]]}))


def test_polytope_round_trip(tmp_path):
    P = regular_polygon(9, 1.3).translated([0.2, -0.1])
    io.save_polytope(P, tmp_path / "p.json")
    Q = io.load_polytope(tmp_path / "p.json")
    # facet order may rotate when the body is rebuilt; the halfspace set is identical
    rows = lambda B: sorted(map(tuple, np.column_stack([B.normals, B.offsets])))
    assert rows(Q) == rows(P)
    assert Q.volume == pytest.approx(P.volume, rel=1e-14)
    data = json.loads((tmp_path / "p.json").read_text())
    assert set(data) == {"dim", "halfspaces"}


def test_floats_use_17_digits():
    x = 0.1 + 0.2
    assert float(io.format_float(x)) == x
    assert io.format_float(float("nan")) == "NaN"
    assert json.loads(io.dumps({"a": [x, 1.0]}))["a"][0] == x


def test_csv_round_trip():
    recs = [SweepRecord(1e-2, i, 1.5, 0.7, 1e-3 * (i + 1), 2e-3, 0.01, 0.02, 3.0 + i / 7)
            for i in range(4)]
    text = io.records_to_csv(recs)
    assert text.splitlines()[0] == "epsilon,seed,theta,theta_plus,dc,w1,alpha,hausdorff,main_ratio"
    back = io.records_from_csv(text)
    for a, b in zip(recs, back):
        for name in io.CSV_FIELDS:
            assert getattr(a, name) == getattr(b, name)
    with pytest.raises(ValueError):
        io.records_from_csv("a,b\n1,2\n")


# -- commands


def test_solve_square(tmp_path, capsys):
    m = write(tmp_path / "sq.json", SQUARE)
    body, out = tmp_path / "body.json", tmp_path / "rep.json"
    assert main(["solve", "--measure", m, "--p", "1", "--body-out", str(body),
                 "--out", str(out)]) == 0
    line = capsys.readouterr().out
    assert float(line.split()[0].split("=")[1]) <= 1e-8
    P = io.load_polytope(body)
    assert np.allclose(np.sort(np.abs(P.vertices).ravel()), 0.5, atol=1e-8)
    rep = json.loads(out.read_text())
    assert rep["residual"] <= 1e-8 and rep["lambda"] == pytest.approx(2.0)


def test_solve_lp_to_stdout(tmp_path, capsys):
    m = write(tmp_path / "sq.json", SQUARE)
    assert main(["solve", "--measure", m, "--p", "3"]) == 0
    rep = json.loads(capsys.readouterr().out)
    offsets = np.array(rep["body"]["halfspaces"])[:, 2]
    assert np.allclose(offsets, 2.0, rtol=1e-8)


def test_distance_self(tmp_path, capsys):
    m = write(tmp_path / "sq.json", SQUARE)
    assert main(["distance", "--a", m, "--b", m]) == 0
    assert capsys.readouterr().out.strip() == "dc=0 w1=0"


def test_asymmetry_deficits_radii(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    io.save_polytope(box([-0.5, -0.5], [0.5, 0.5]), a)
    io.save_polytope(regular_polygon(64, np.sqrt(2 / (64 * np.sin(2 * np.pi / 64)))), b)
    assert main(["asymmetry", "--a", str(a), "--b", str(b)]) == 0
    alpha = float(capsys.readouterr().out.strip().split("=")[1])
    assert alpha == pytest.approx(0.1812, abs=5e-3)
    assert main(["deficits", "--a", str(a), "--b", str(b)]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["delta_bm"] >= -1e-10 and rep["alpha"] == pytest.approx(alpha)
    assert main(["radii", "--polytope", str(a)]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["lower_ok"] and rep["slack_lower"] == pytest.approx(0, abs=1e-9)


def test_domain_errors_exit_2(tmp_path, capsys):
    anti = write(tmp_path / "anti.json", {"dim": 2, "atoms": [[1, 0, .5], [-1, 0, .5]]})
    assert main(["solve", "--measure", anti]) == 2
    assert "DegenerateMeasure" in capsys.readouterr().err
    m = write(tmp_path / "sq.json", SQUARE)
    assert main(["solve", "--measure", m, "--p", "2"]) == 2
    assert "ExcludedExponent" in capsys.readouterr().err
    other = write(tmp_path / "o.json", {"dim": 2, "atoms": [[1, 0, 1], [0, 1, 1], [-1, 0, 1],
                                                           [0, -1, 2]]})
    assert main(["distance", "--a", m, "--b", other]) == 2
    assert "MassMismatch" in capsys.readouterr().err


def test_io_errors_exit_1(tmp_path, capsys):
    assert main(["solve", "--measure", str(tmp_path / "missing.json")]) == 1
    assert "FileNotFoundError" in capsys.readouterr().err
    junk = tmp_path / "junk.json"
    junk.write_text("{not json")
    assert main(["solve", "--measure", str(junk)]) == 1


def test_run_config_validation():
    with pytest.raises(ValueError):
        RunConfig(command="bogus")
    with pytest.raises(ValueError):
        RunConfig(command="solve", p=0.5)
    assert run(RunConfig(command="degeneracy", aspects=[1.0, 2.0], output="/nonexistent/x")) == 1


def test_sweep_csv(tmp_path, capsys):
    base = tmp_path / "oct.json"
    io.save_measure(regular_measure(8), base)
    out = tmp_path / "s.csv"
    assert main(["sweep", "--base", str(base), "--eps", "1e-1,1e-2", "--seeds", "4",
                 "--out", str(out)]) == 0
    assert capsys.readouterr().out.startswith("slope=")
    recs = io.records_from_csv(out.read_text())
    assert len(recs) == 8
    assert all(r.dc <= r.w1 + 1e-8 and r.alpha >= 0 for r in recs)


def test_degeneracy_json(capsys):
    assert main(["degeneracy", "--aspects", "1,2", "--format", "json"]) == 0
    recs = json.loads(capsys.readouterr().out)
    assert [r["epsilon"] for r in recs] == [1.0, 2.0]
    assert recs[0]["theta"] > recs[1]["theta"]


def test_module_entry_point_is_deterministic(tmp_path):
    m = write(tmp_path / "sq.json", SQUARE)
    outs = []
    for k in range(2):
        target = tmp_path / f"r{k}.json"
        subprocess.run([sys.executable, "-m", "minkolab", "solve", "--measure", m,
                        "--out", str(target)], check=True, capture_output=True)
        outs.append(target.read_bytes())
    assert outs[0] == outs[1]


def test_jobs_env_override(tmp_path, monkeypatch, capsys):
    base = tmp_path / "hex.json"
    io.save_measure(regular_measure(6), base)
    args = ["sweep", "--base", str(base), "--eps", "1e-2", "--seeds", "3"]
    assert main(args + ["--jobs", "1"]) == 0
    one = capsys.readouterr().out
    monkeypatch.setenv("MINKOLAB_JOBS", "2")
    assert main(args) == 0
    assert capsys.readouterr().out == one
