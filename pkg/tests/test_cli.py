import csv
import io
import json

import jsonschema
import pytest

from plie import report as rp
from plie.cli import main


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def validate(doc):
    jsonschema.validate(doc, rp.load_schema(doc.get("kind", "error") if "error" not in doc else "error"))


# (argv, expected exit code); every command and the main failure modes
CASES = [
    (["roots", "--coeffs", "2,-3,0,1"], 0),
    (["roots", "--coeffs", "1,0,-3,2"], 0),
    (["roots", "--coeffs", "2,0,1"], 0),
    (["coeffs", "--n", "10"], 0),
    (["coeffs", "--n", "10", "--closed-form"], 0),
    (["iterate", "--g", "-2*x+1", "--interval", "R", "--x", "0.5", "--n", "8"], 0),
    (["iterate", "--g", "x+1", "--interval", "[0,inf)", "--x", "0", "--n", "3"], 0),
    (["verify", "--g", "x", "--interval", "(0,1)"], 0),
    (["verify", "--g", "x+0.1", "--interval", "[0,1]"], 1),
    (["verify", "--g", "x^2", "--interval", "[0,1]"], 1),
    (["verify", "--g", "-2*x+1", "--interval", "R", "--window", "-5,5"], 0),
    (["classify", "--g", "x + 0.001*exp(-x)", "--interval", "[0,inf)", "--window", "0,5"], 0),
    (["classify", "--g", "x^2", "--interval", "[0,1]"], 0),
    (["verify-boros", "--f", "3/x^2", "--interval", "(0,inf)", "--window", "0.01,100"], 0),
    (["verify-boros", "--f", "0.5*x", "--interval", "(0,1]"], 0),
    (["verify-boros", "--f", "x^2", "--interval", "(0,1]"], 1),
    (["conjugate", "--f", "3/x^2", "--interval", "(0,inf)"], 0),
    (["conjugate", "--g", "x+1", "--interval", "R"], 0),
    (["solve", "--interval", "[0,1]", "--grid", "33", "--seed", "42"], 0),
    (["falsify", "--interval", "[0,1]", "--runs", "3", "--seed", "7", "--grid", "33"], 0),
]


@pytest.mark.parametrize("argv,code", CASES, ids=[" ".join(a[:3]) for a, _ in CASES])
def test_documents_validate(argv, code, capsys):
    got, out, err = run(argv, capsys)
    assert got == code, err
    doc = json.loads(out)
    validate(doc)
    assert "generated_at" in doc


@pytest.mark.parametrize("argv,code", CASES, ids=[" ".join(a[:3]) for a, _ in CASES])
def test_byte_identical_without_timestamp(argv, code, capsys):
    _, a, _ = run(argv + ["--no-timestamp"], capsys)
    _, b, _ = run(argv + ["--no-timestamp"], capsys)
    assert a == b and "generated_at" not in json.loads(a)


class TestExamples:
    def test_roots(self, capsys):
        code, out, _ = run(["roots", "--coeffs", "2,-3,0,1"], capsys)
        rows = json.loads(out)["rows"]
        assert code == 0
        assert {(r["text"], r["multiplicity"]) for r in rows} == {("1", 2), ("-2", 1)}

    def test_verify_identity(self, capsys):
        code, out, _ = run(["verify", "--g", "x", "--interval", "(0,1)"], capsys)
        doc = json.loads(out)
        assert code == 0 and doc["residual_sup"] == 0 and doc["passed"]

    def test_verify_escape(self, capsys):
        code, out, _ = run(["verify", "--g", "x+0.1", "--interval", "[0,1]"], capsys)
        doc = json.loads(out)
        assert code == 1 and not doc["is_self_map"]
        assert doc["witness"] > 0.85 and doc["image"] > 1

    def test_conjugate_text(self, capsys):
        _, out, _ = run(["conjugate", "--f", "3/x^2", "--interval", "(0,inf)"], capsys)
        doc = json.loads(out)
        assert doc["output_interval"] == "R"
        assert doc["output"].startswith("-2*x + 1.0986122886")


class TestErrors:
    @pytest.mark.parametrize(
        "argv",
        [
            ["verify", "--g", "2/x^", "--interval", "(0,1)"],
            ["verify", "--g", "x", "--interval", "[0,inf]"],
            ["verify", "--g", "x", "--interval", "R"],
            ["roots", "--coeffs", "1,a"],
            ["solve", "--interval", "[0,1]", "--grid", "2"],
            ["bogus"],
            ["verify", "--interval", "[0,1]"],
        ],
    )
    def test_exit_2(self, argv, capsys):
        code, out, err = run(argv, capsys)
        assert code == 2 and out == ""
        doc = json.loads(err)
        jsonschema.validate(doc, rp.load_schema("error"))

    def test_parse_position(self, capsys):
        _, _, err = run(["verify", "--g", "2/x^", "--interval", "(0,1)"], capsys)
        doc = json.loads(err)
        assert doc["error"] == "ParseError" and doc["position"] == 5

    def test_escape_exit_1(self, capsys):
        code, _, err = run(["iterate", "--g", "x+0.4", "--interval", "[0,1]", "--x", "0.1", "--n", "5"], capsys)
        assert code == 1
        doc = json.loads(err)
        assert doc["error"] == "EscapeError"
        jsonschema.validate(doc, rp.load_schema("error"))


class TestCsv:
    def test_roots_rows(self, capsys):
        _, out, _ = run(["roots", "--coeffs", "2,-3,0,1", "--format", "csv"], capsys)
        rows = list(csv.DictReader(io.StringIO(out)))
        assert len(rows) == 2 and rows[0]["multiplicity"] == "2"

    def test_coeffs_rows(self, capsys):
        _, out, _ = run(["coeffs", "--n", "5", "--closed-form", "--format", "csv", "--no-timestamp"], capsys)
        rows = list(csv.DictReader(io.StringIO(out)))
        assert [int(r["b"]) for r in rows] == [3, -2, 9, -12, 31, -54]

    def test_flat_document(self, capsys):
        _, out, _ = run(["verify", "--g", "x", "--interval", "[0,1]", "--format", "csv"], capsys)
        keys = [r[0] for r in csv.reader(io.StringIO(out))]
        assert "residual_sup" in keys


class TestFiles:
    def test_out_and_trace(self, tmp_path, capsys):
        rep, tr = tmp_path / "r.json", tmp_path / "t.csv"
        argv = ["solve", "--interval", "[0,1]", "--grid", "33", "--seed", "1", "--no-timestamp"]
        code, out, _ = run(argv + ["--out", str(rep), "--trace", str(tr)], capsys)
        assert code == 0 and rep.read_text() == out
        rows = list(csv.reader(io.StringIO(tr.read_text())))
        assert rows[0][:2] == ["iteration", "objective"] and len(rows) > 1

    def test_falsify_threads(self, monkeypatch, capsys):
        monkeypatch.setenv("PLIE_THREADS", "1")
        argv = ["falsify", "--interval", "[0,1]", "--runs", "2", "--grid", "17", "--no-timestamp"]
        _, a, _ = run(argv, capsys)
        monkeypatch.setenv("PLIE_THREADS", "2")
        _, b, _ = run(argv, capsys)
        assert a == b
