import json
import subprocess
import sys

import numpy as np
import pytest

from convexcore.cli import dumps, main
from convexcore.schemas import SCHEMA_NAMES, load_schema, validate


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def run_json(capsys, *argv):
    code, out, err = run(capsys, *argv)
    assert code == 0, err
    return json.loads(out)


def csv_rows(text):
    return [ln for ln in text.splitlines() if ln and not ln.startswith("#")][1:]


@pytest.fixture
def files(tmp_path, capsys):
    """Gallery JSON files emitted through the CLI."""
    out = {}
    for name in ("diagonal_torus", "schottky_so21", "cyclic_d"):
        code, text, err = run(capsys, "gallery", "emit", name, "--out", tmp_path)
        assert code == 0, err
        out[name] = text.strip()
    return out


@pytest.fixture
def cloud2(tmp_path):
    path = tmp_path / "two.csv"
    path.write_text("x1,x2,x3\n1,0,1\n-1,0,1\n")
    form = tmp_path / "form.json"
    form.write_text(json.dumps({"p": 2, "q": 1}))
    return str(form), str(path)


def test_schemas_are_valid_draft_2020_12():
    import jsonschema

    for name in SCHEMA_NAMES:
        schema = load_schema(name)
        jsonschema.Draft202012Validator.check_schema(schema)


def test_gallery_list_and_emit(capsys):
    listed = run_json(capsys, "gallery", "list")
    validate(listed, "gallery_list")
    assert {e["name"] for e in listed["examples"]} >= {"diagonal_torus", "schottky_so21", "cyclic_d"}
    emitted = run_json(capsys, "gallery", "emit", "diagonal_torus", "--param", "t=3")
    validate(emitted, "gallery_emit")
    assert emitted["params"]["t"] == 3.0


def test_gallery_emit_errors(capsys):
    assert run(capsys, "gallery", "emit")[0] == 2
    assert run(capsys, "gallery", "emit", "nope")[0] == 2
    assert run(capsys, "gallery", "emit", "diagonal_torus", "--param", "t")[0] == 2
    assert run(capsys, "gallery", "emit", "diagonal_torus", "--param", "t=1")[0] == 2


def test_orbit_row_count(capsys, files):
    g = files["diagonal_torus"]
    R = 10
    code, out, err = run(capsys, "orbit", g, g, "--radius", R, "--seeds", 2)
    assert code == 0, err
    assert len(csv_rows(out)) == (2 * R * R + 2 * R + 1) * 2
    assert out.startswith("# run_config: ")


def test_orbit_radius_zero_is_seeds_only(capsys, files):
    g = files["diagonal_torus"]
    code, out, _ = run(capsys, "orbit", g, g, "--radius", 0, "--seeds", 3)
    rows = csv_rows(out)
    assert code == 0 and len(rows) == 3
    assert all(r.endswith(",0") for r in rows)


def test_orbit_svg_only_in_dimension_three(capsys, files, tmp_path):
    g = files["diagonal_torus"]
    out_dir = tmp_path / "o3"
    assert run(capsys, "orbit", g, g, "--radius", 3, "--out", out_dir)[0] == 0
    svg = (out_dir / "orbit.svg").read_text()
    assert svg.startswith("<svg") and "<circle" in svg
    code, text, _ = run(capsys, "gallery", "emit", "diagonal_torus", "--param", "n=4", "--out", tmp_path / "g4")
    g4 = text.strip()
    out4 = tmp_path / "o4"
    assert run(capsys, "orbit", g4, g4, "--radius", 2, "--out", out4)[0] == 0
    assert sorted(p.name for p in out4.iterdir()) == ["orbit.csv"]


def test_malformed_json_exit_2(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    code, out, err = run(capsys, "orbit", bad, bad, "--radius", 2)
    assert code == 2 and out == "" and "InputError" in err
    assert run(capsys, "orbit", tmp_path / "missing.json", bad)[0] == 2


def test_bad_arguments_exit_2(capsys, files):
    g = files["diagonal_torus"]
    assert run(capsys, "orbit", g, g, "--radius", -1)[0] == 2
    assert run(capsys, "orbit", g, g, "--seeds", 0)[0] == 2
    with pytest.raises(SystemExit) as exc:
        main(["orbit"])
    assert exc.value.code == 2


def test_geometry_error_exit_3(capsys, tmp_path):
    form = tmp_path / "form.json"
    form.write_text(json.dumps({"p": 2, "q": 1}))
    cloud = tmp_path / "c.csv"
    cloud.write_text("x1,x2,x3\n0,0,1\n1,0,1\n")
    code, _, err = run(capsys, "negativity", form, cloud)
    assert code == 3 and "NotOnBoundary" in err


def test_limitset_kinds(capsys, files):
    s = files["schottky_so21"]
    code, out, _ = run(capsys, "limitset", s, "--kind", "proximal", "--radius", 4)
    assert code == 0
    P = np.array([[float(v) for v in r.split(",")[:3]] for r in csv_rows(out)])
    assert len(P) > 0
    assert np.max(np.abs(P[:, 0] ** 2 + P[:, 1] ** 2 - P[:, 2] ** 2)) < 1e-6
    for kind in ("orbital", "both"):
        code, out, _ = run(capsys, "limitset", s, "--domain", s, "--kind", kind, "--radius", 4)
        assert code == 0 and len(csv_rows(out)) > 0


def test_diagnose_schottky_strong(capsys, files):
    s = files["schottky_so21"]
    rep = run_json(capsys, "diagnose", s, "--domain", s, "--radius", 6)
    validate(rep, "diagnose")
    assert rep["verdict"] == "StronglyCCConsistent"
    assert rep["segments"] == [] and rep["pets"] == []
    assert rep["run_config"]["radius"] == 6


def test_diagnose_torus_nonhyperbolic_with_pets(capsys, files):
    g = files["diagonal_torus"]
    rep = run_json(capsys, "diagnose", g, "--domain", g, "--radius", 6)
    validate(rep, "diagnose")
    assert rep["verdict"] == "NonHyperbolicCCConsistent"
    assert len(rep["pets"]) >= 1
    assert rep["gap_profile"]["verdict"] == "NotAnosov"


def test_diagnose_cyclic_d_none_found(capsys, files):
    rep = run_json(capsys, "diagnose", files["cyclic_d"], "--radius", 6)
    validate(rep, "diagnose")
    assert rep["verdict"] == "NoInvariantConvexSetFound"
    assert rep["domain"] is None


def test_signature(capsys):
    rep = run_json(capsys, "signature", "--n", 7)
    validate(rep, "signature")
    assert (rep["k"], rep["l"]) == (4, 3)
    assert run(capsys, "signature", "--n", 4)[0] == 2


def test_dual_of_simplex(capsys, tmp_path):
    path = tmp_path / "simplex.json"
    path.write_text(json.dumps({"type": "halfspace", "data": np.eye(3).tolist()}))
    code, out, err = run(capsys, "dual", path)
    assert code == 0, err
    rep = json.loads(out)
    validate(rep, "dual")
    from convexcore.domains import domain_from_json

    D = domain_from_json(rep["domain"])
    for e in np.eye(3):
        assert D.contains(0.999 * e + 0.0005 * np.ones(3)).value == "Interior"
    assert D.contains(np.array([1.0, -0.1, 0.5])).value == "Exterior"


def test_negativity_two_points(capsys, cloud2):
    rep = run_json(capsys, "negativity", *cloud2)
    validate(rep, "negativity")
    assert rep["verdict"] == "Negative"
    assert rep["points"] == 2


def test_flatten(capsys, tmp_path):
    form = tmp_path / "f.json"
    form.write_text(json.dumps({"p": 2, "q": 2}))
    cloud = tmp_path / "c.csv"
    cloud.write_text("x1,x2,x3,x4\n0.6,0.8,0,1\n1,0,0.6,0.8\n")
    code, out, _ = run(capsys, "flatten", form, cloud, "--t", 1.0)
    assert code == 0
    Y = np.array([[float(v) for v in r.split(",")[:4]] for r in csv_rows(out)])
    assert np.max(np.abs(Y[:, 0] ** 2 + Y[:, 1] ** 2 - Y[:, 3] ** 2)) < 1e-9
    assert np.max(np.abs(Y[:, 2])) < 1e-12
    assert run(capsys, "flatten", form, cloud, "--t", 2.0)[0] == 2


def test_determinism_and_seed_override(capsys, files, monkeypatch, tmp_path):
    g = files["diagonal_torus"]
    a = run(capsys, "diagnose", g, "--domain", g, "--radius", 4, "--seed", 5)[1]
    b = run(capsys, "diagnose", g, "--domain", g, "--radius", 4, "--seed", 5)[1]
    assert a == b
    monkeypatch.setenv("CONVEXCORE_SEED", "11")
    c = run_json(capsys, "diagnose", g, "--domain", g, "--radius", 4, "--seed", 5)
    assert c["run_config"]["seed"] == 11


def test_out_directory_writes_file(capsys, tmp_path):
    code, out, _ = run(capsys, "signature", "--n", 5, "--out", tmp_path)
    assert code == 0
    path = out.strip()
    assert path.endswith("signature.json")
    assert json.loads(open(path).read())["l"] == 3


def test_dumps_cleans_non_finite():
    text = dumps({"a": float("nan"), "b": -0.0, "c": [float("inf"), np.float64(1.5)]})
    assert json.loads(text) == {"a": None, "b": 0.0, "c": [None, 1.5]}


def test_console_script_entry_point():
    res = subprocess.run(
        [sys.executable, "-m", "convexcore.cli", "signature", "--n", "3"], capture_output=True, text=True, check=False
    )
    assert res.returncode == 0
    assert json.loads(res.stdout)["k"] == 2
