import csv
import subprocess
import sys

import numpy as np
import pytest

from sgdicp.cli import main
from sgdicp.geometry import PointCloud, RigidParams
from sgdicp.harness import rotational_error, translational_error
from sgdicp.io import read_cloud, read_pose, write_pose, write_xyz, PoseRecord
from sgdicp.synthetic import make_primitive


@pytest.fixture()
def clouds(tmp_path):
    src = make_primitive("room-corner", 2000, seed=1)
    write_xyz(tmp_path / "src.xyz", src)
    assert main(["perturb", "--in", str(tmp_path / "src.xyz"), "--out", str(tmp_path / "ref.xyz"),
                 "--max-t", "0.05", "--max-r", "0.05", "--seed", "7",
                 "--pose-out", str(tmp_path / "true.txt")]) == 0
    return tmp_path


def test_perturb_writes_cloud_and_pose(clouds):
    theta = read_pose(clouds / "true.txt").theta
    src, ref = read_cloud(clouds / "src.xyz"), read_cloud(clouds / "ref.xyz")
    R, t = theta.rotation(), theta.translation
    np.testing.assert_allclose(src.points @ R.T + t, ref.points, atol=1e-12)


def test_align_recovers_pose(clouds, capsys):
    code = main(["align", "--source", str(clouds / "src.xyz"), "--reference", str(clouds / "ref.xyz"),
                 "--out", str(clouds / "est.txt"), "--trace", str(clouds / "trace.csv"), "--seed", "1"])
    assert code == 0
    est = read_pose(clouds / "est.txt").theta
    true = read_pose(clouds / "true.txt").theta
    assert translational_error(est, true) < 1e-3
    assert rotational_error(est, true) < 1e-3
    rows = list(csv.reader(open(clouds / "trace.csv")))
    assert rows[0][:7] == ["iteration", "x", "y", "z", "roll", "pitch", "yaw"]
    assert RigidParams(*map(float, rows[-1][1:7])) == est
    assert capsys.readouterr().out.split() == [repr(v) for v in est.as_array().tolist()]


def test_align_with_initial_guess_and_adam(clouds):
    write_pose(clouds / "guess.txt", PoseRecord(read_pose(clouds / "true.txt").theta))
    code = main(["align", "--source", str(clouds / "src.xyz"), "--reference", str(clouds / "ref.xyz"),
                 "--theta0", str(clouds / "guess.txt"), "--optimizer", "adam", "--out", str(clouds / "est.txt")])
    assert code == 0
    # ADAM takes ~alpha-sized steps even on rounding-level gradients, so it wanders off the exact start
    assert translational_error(read_pose(clouds / "est.txt").theta, read_pose(clouds / "true.txt").theta) < 1e-3


def test_align_missing_file_is_input_error(tmp_path):
    assert main(["align", "--source", str(tmp_path / "nope.xyz"), "--reference", str(tmp_path / "nope.xyz")]) == 2


def test_align_parse_error_is_input_error(tmp_path, capsys):
    (tmp_path / "bad.xyz").write_text("0 0 0\n1 2\n")
    assert main(["align", "--source", str(tmp_path / "bad.xyz"), "--reference", str(tmp_path / "bad.xyz")]) == 2
    assert "line 2" in capsys.readouterr().err


def test_align_registration_failure_exit_code(tmp_path):
    src = make_primitive("box", 500, seed=2)
    write_xyz(tmp_path / "a.xyz", src)
    write_xyz(tmp_path / "b.xyz", PointCloud(src.points + [40.0, 0, 0]))
    code = main(["align", "--source", str(tmp_path / "a.xyz"), "--reference", str(tmp_path / "b.xyz"),
                 "--dmax", "0.001", "--out", str(tmp_path / "p.txt")])
    assert code == 1


def test_bench_writes_csv(tmp_path):
    (tmp_path / "spec.toml").write_text("trials = 2\nmethods = ['sgd-fixed', 'batch']\n[cloud]\npoints = 500\n")
    assert main(["bench", "--spec", str(tmp_path / "spec.toml"), "--out", str(tmp_path / "r.csv")]) == 0
    rows = list(csv.reader(open(tmp_path / "r.csv")))
    assert len(rows) == 5
    assert all(float(r[9]) > 0 for r in rows[1:])


def test_bench_bad_spec_is_input_error(tmp_path):
    (tmp_path / "spec.toml").write_text("unknown_key = 1\n")
    assert main(["bench", "--spec", str(tmp_path / "spec.toml"), "--out", str(tmp_path / "r.csv")]) == 2


def test_gradcheck_passes(capsys):
    assert main(["gradcheck", "--seed", "3", "--instances", "50"]) == 0
    assert capsys.readouterr().out.startswith("PASS")


def test_gradcheck_fails_on_impossible_tolerance():
    assert main(["gradcheck", "--instances", "20", "--tol", "1e-30"]) == 1


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "sgdicp", "--help"], capture_output=True, text=True)
    assert out.returncode == 0
    for cmd in ("align", "bench", "perturb", "gradcheck"):
        assert cmd in out.stdout
