import csv
import json

import numpy as np
import pytest

from dixlab.catalog import FIXTURES, fixture
from dixlab.cli import main
from dixlab.errors import SchemaError
from dixlab.io import dumps, emit_spec, jsonable, parse_spec, spec_document


def export(tmp_path, name, capsys=None):
    path = tmp_path / f"{name}.json"
    assert main(["catalog", "--fixture", name, "--export", str(path)]) == 0
    return path


def small_doc():
    return {"base": {"kind": "discrete", "points": 1},
            "fibers": [[{"dim": 2, "has_trace": True, "is_maximal": True}]],
            "elements": {"a": [[[[[1, 0], [0, 0]], [[0, 0], [0, 0]]]]]}}


@pytest.mark.parametrize("name", FIXTURES)
def test_catalog_round_trip_is_identity(tmp_path, name):
    path = export(tmp_path, name)
    text = path.read_text()
    algebra, elements = parse_spec(text)
    assert emit_spec(algebra, elements) == text
    fx = fixture(name)
    assert algebra.fibers == fx.algebra.fibers
    for k, el in fx.elements.items():
        assert elements[k].allclose(el, atol=0)


def test_canonical_output_has_no_negative_zero():
    assert dumps(jsonable({"x": -0.0, "z": complex(-0.0, 1)})) == '{\n "x": 0.0,\n "z": [\n  0.0,\n  1.0\n ]\n}\n'


def test_schema_errors_carry_pointers():
    doc = small_doc()
    del doc["fibers"][0][0]["dim"]
    with pytest.raises(SchemaError) as exc:
        parse_spec(doc)
    assert exc.value.path == "/fibers/0/0/dim"
    doc = small_doc()
    doc["elements"]["a"][0][0][0][0] = [1]
    with pytest.raises(SchemaError) as exc:
        parse_spec(doc)
    assert exc.value.path.startswith("/elements/a/0/0/0/0")
    doc = small_doc()
    doc["elements"]["a"][0][0] = [[[1, 0]]]
    with pytest.raises(SchemaError) as exc:
        parse_spec(doc)
    assert exc.value.path == "/elements/a/0/0"


def test_schema_rejects_non_finite_and_bad_json():
    with pytest.raises(SchemaError):
        parse_spec('{"base": NaN}')
    with pytest.raises(SchemaError):
        parse_spec("{")


def test_strict_and_lax_modes():
    doc = small_doc()
    doc["extra"] = 1
    doc["fibers"][0][0]["colour"] = "red"
    with pytest.raises(SchemaError):
        parse_spec(doc)
    algebra, elements = parse_spec(doc, lax=True)
    assert algebra.shape() == ((2,),) and "a" in elements


def test_spec_document_validates_itself():
    fx = fixture("FIX-D")
    doc = json.loads(json.dumps(spec_document(fx.algebra, fx.elements)))
    parse_spec(doc)


def test_cli_exit_codes(tmp_path, capsys):
    path = export(tmp_path, "FIX-A")
    assert main(["check", str(path), "--element", "e11", "--test", "dix-bar"]) == 0
    assert main(["check", str(path), "--element", "e11", "--test", "dix-bar", "--assert"]) == 3
    assert main(["check", str(path), "--element", "unit", "--test", "dix", "--assert"]) == 0
    assert main(["check", str(path), "--element", "nope", "--test", "mag"]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text('{"base": {}}')
    assert main(["check", str(bad), "--element", "a", "--test", "mag"]) == 2
    assert main(["catalog", "--fixture", "FIX-Z"]) == 2
    assert "dixlab: error" in capsys.readouterr().err


def test_cli_check_json_reports_conflict(tmp_path, capsys):
    path = export(tmp_path, "FIX-A")
    capsys.readouterr()
    assert main(["check", str(path), "--element", "e11", "--test", "dix-bar", "--json"]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["verdict"] is False
    last = rep["per_point"][-1]
    assert last["conflict"] == [0.5, 0.0] and last["f_trace"] is None


def test_cli_check_mag_certificate(tmp_path, capsys):
    path = export(tmp_path, "FIX-C")
    capsys.readouterr()
    assert main(["check", str(path), "--element", "c_eps", "--test", "mag", "--json"]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["verdict"] == "yes" and rep["diagnostics"]["certificate_valid"]


def test_cli_distance(tmp_path, capsys):
    path = export(tmp_path, "FIX-B")
    capsys.readouterr()
    assert main(["distance", str(path), "--element", "c", "--kind", "to-center"]) == 0
    assert json.loads(capsys.readouterr().out)["value"] <= 1e-6
    assert main(["distance", str(path), "--element", "c", "--kind", "magajna"]) == 2
    assert main(["distance", str(path), "--element", "c", "--element2", "unit",
                 "--kind", "magajna"]) == 0


def test_cli_average_writes_csv(tmp_path, capsys):
    path = export(tmp_path, "FIX-A")
    out = tmp_path / "curve.csv"
    assert main(["average", str(path), "--element", "e11", "--method", "descent",
                 "--target", "0.5", "--iters", "30", "--csv", str(out)]) == 0
    rep = json.loads(capsys.readouterr().out)
    rows = list(csv.reader(out.open()))
    assert rows[0] == ["step", "residual"]
    vals = [float(r[1]) for r in rows[1:]]
    assert len(vals) == rep["steps"] + 1 and np.all(np.diff(vals) <= 0)
    assert vals[0] == rep["initial_residual"]
    assert main(["average", str(path), "--element", "e11", "--method", "twirl"]) == 2


def test_cli_average_twirl_on_discrete(tmp_path, capsys):
    path = export(tmp_path, "FIX-D")
    capsys.readouterr()
    assert main(["average", str(path), "--element", "e12", "--method", "twirl"]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["scalarization_residual"] <= 1e-12 and rep["verify"]["max_violation"] <= 1e-12


def test_cli_structure(tmp_path, capsys):
    path = export(tmp_path, "FIX-D")
    capsys.readouterr()
    assert main(["structure", str(path), "--suite", "dixadd"]) == 0
    rep = json.loads(capsys.readouterr().out)["report"]
    assert rep["a"] is False and rep["witness"]["validated"]
    assert main(["structure", str(path), "--suite", "dixadd", "--assert"]) == 3
    assert main(["structure", str(path), "--suite", "magclosed", "--assert"]) == 0


def run_outputs(tmp_path, monkeypatch, threads, tag):
    monkeypatch.setenv("DIXLAB_THREADS", str(threads))
    spec = export(tmp_path, "FIX-A")
    files = {}
    for test in ("mag", "dix-bar", "mag-bar"):
        out = tmp_path / f"{tag}-{test}.json"
        main(["check", str(spec), "--element", "e11", "--test", test, "--json", "--out", str(out)])
        files[test] = out.read_bytes()
    out = tmp_path / f"{tag}.svg"
    assert main(["render", str(spec), "--element", "e12", "--out", str(out)]) == 0
    files["svg"] = out.read_bytes()
    return files


def test_reports_are_byte_identical_across_runs_and_threads(tmp_path, monkeypatch):
    a = run_outputs(tmp_path, monkeypatch, 1, "a")
    b = run_outputs(tmp_path, monkeypatch, 1, "b")
    c = run_outputs(tmp_path, monkeypatch, 4, "c")
    assert a == b == c
