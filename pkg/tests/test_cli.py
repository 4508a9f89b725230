import json

import pytest

from bembfem import harness
from bembfem.cli import main


@pytest.fixture(scope="module")
def cube_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("cli") / "cube.json"
    assert main(["mesh", "gen", "cube", "--n", "2", "-o", str(path)]) == 0
    return path


def test_mesh_gen_and_validate(tmp_path, cube_file, capsys):
    assert main(["mesh", "validate", str(cube_file)]) == 0
    out = capsys.readouterr().out
    assert json.loads(out.splitlines()[0])["elements"] == 48
    prisms = tmp_path / "prisms.json"
    assert main(["mesh", "gen", "prisms", "--layers", "1", "-o", str(prisms)]) == 0
    assert main(["mesh", "validate", str(prisms)]) == 0


def test_validate_reports_broken_mesh(tmp_path, cube_file, capsys):
    data = json.loads(cube_file.read_text())
    data["elements"][0][0][1] *= -1
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(data))
    assert main(["mesh", "validate", str(bad)]) == 1
    assert "FAIL" in capsys.readouterr().out


def test_missing_file_is_reported(tmp_path, capsys):
    assert main(["solve", "--mesh", str(tmp_path / "nope.json")]) == 2
    assert "IoError" in capsys.readouterr().err


def test_skel_build(tmp_path, cube_file, capsys):
    out, vtk = tmp_path / "skel.json", tmp_path / "skel.vtk"
    args = ["skel", "build", "--mesh", str(cube_file), "--level", "1", "--alpha", "1e-3", "-o", str(out), "--vtk", str(vtk)]
    assert main(args) == 0
    data = json.loads(out.read_text())
    assert any(data["face_centers_shifted"])
    assert vtk.read_text().startswith("# vtk DataFile Version 3.0")
    assert main(["skel", "build", "--mesh", str(cube_file), "--level", "1", "--coeff", "none", "-o", str(out)]) == 0
    assert not any(json.loads(out.read_text())["face_centers_shifted"])


def test_solve(tmp_path, cube_file, capsys):
    out = tmp_path / "u.json"
    args = ["solve", "--mesh", str(cube_file), "--level", "1", "--alpha", "1e-2", "--precond", "grs", "-o", str(out)]
    assert main(args) == 0
    text = capsys.readouterr().out
    assert "iterations 1" in text
    data = json.loads(out.read_text())
    assert len(data["coefficients"]) == 27 and data["precond"] == "grs"
    args = ["solve", "--mesh", str(cube_file), "--level", "0", "--coeff", "custom", "--A", "1", "--b", "0,0,0",
            "--trace-mode", "linear", "--vtk", str(tmp_path / "u.vtk")]  # fmt: skip
    assert main(args) == 0
    assert "u_min 0 u_max 3" in capsys.readouterr().out


def test_bench(tmp_path, monkeypatch, cube2, capsys):
    monkeypatch.setattr(harness, "experiment_mesh", lambda which: cube2)
    out = tmp_path / "t.csv"
    assert main(["bench", "exp1", "--alphas", "1e-1,1e-3", "--levels", "0", "--mode", "adapted,linear", "--out", str(out)]) == 0
    assert len(capsys.readouterr().out.splitlines()) == 4
    assert len(out.read_text().splitlines()) == 5


def test_bad_arguments(cube_file):
    with pytest.raises(SystemExit):
        main(["solve", "--mesh", str(cube_file), "--b", "1,2"])
    with pytest.raises(SystemExit):
        main(["bench", "exp9"])
