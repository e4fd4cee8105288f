import cmath
import json
import shutil

import pytest

from admitcert.cli import main
from admitcert.matpower_io import network_to_json
from admitcert.netmodel import Branch, Network

from conftest import DATA, case_path

TAP = 1.05 * cmath.exp(0.1j)


@pytest.fixture
def transformer_json(tmp_path):
    path = tmp_path / "twobus_transformer.json"
    path.write_text(network_to_json(Network(2, (Branch(0, 1, -10j, TAP),), name="twobus_transformer")))
    return path


def test_certify_case118(capsys):
    assert main(["certify", str(case_path("case118_ieee")), "--format", "json"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["verdict"] == "INVERTIBLE" and doc["reactive_pct"] == 4.8
    assert (doc["n"], doc["l"], doc["rank"]) == (118, 186, 118)


def test_certify_transformer_witness(transformer_json, capsys):
    assert main(["certify", str(transformer_json), "--format", "json", "--oracle"]) == 1
    doc = json.loads(capsys.readouterr().out)
    assert doc["rank"] == 1 and len(doc["witness"]) == 2
    w0, w1 = (complex(*w) for w in doc["witness"])
    assert w0 / w1 == pytest.approx(TAP)
    assert doc["oracle"] == {"rank": 1, "agree": True}


def test_certify_inconclusive_exit_code(capsys):
    assert main(["certify", str(case_path("case14_ieee"))]) == 2
    assert "INCONCLUSIVE" in capsys.readouterr().out


def test_missing_file(capsys):
    assert main(["certify", "missing.m"]) == 3
    captured = capsys.readouterr()
    assert captured.out == "" and "missing.m" in captured.err


def test_json_output_is_byte_identical(transformer_json, capsys):
    outs = []
    for _ in range(2):
        main(["certify", str(transformer_json), "--format", "json"])
        outs.append(capsys.readouterr().out)
    assert outs[0] == outs[1]


def test_json_fields(capsys):
    main(["certify", str(case_path("case14_ieee")), "--format", "json"])
    doc = json.loads(capsys.readouterr().out)
    assert set(doc) == {"case", "verdict", "rank", "n", "l", "reactive_pct", "components", "witness", "tol"}
    assert all(set(c) == {"id", "condition", "root"} for c in doc["components"])


def test_batch_with_malformed_case(tmp_path, capsys):
    for name in ("case3_lmbd", "case5_pjm", "case14_ieee"):
        shutil.copy(case_path(name), tmp_path)
    (tmp_path / "broken.m").write_text("mpc.baseMVA = 100;\nmpc.bus = [1 3 0 0 0 0];\n")
    out_csv = tmp_path / "out.csv"
    assert main(["batch", str(tmp_path), "--csv", str(out_csv)]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    rows = lines[1:-1]
    assert len(rows) == 4 and sum("ERROR" in r for r in rows) == 1
    assert [r.split()[0] for r in rows] == sorted(r.split()[0] for r in rows)
    assert lines[-1] == "INVERTIBLE=2 SINGULAR=0 INCONCLUSIVE=1 ERROR=1"
    assert len(out_csv.read_text().strip().splitlines()) == 5


def test_batch_empty_dir(tmp_path, capsys):
    assert main(["batch", str(tmp_path)]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == 2 and lines[-1].endswith("ERROR=0")


def test_batch_table_pattern(capsys):
    assert main(["batch", str(DATA), "--format", "json"]) == 0
    doc = json.loads(capsys.readouterr().out)
    verdicts = {c["case"]: c["verdict"] for c in doc["cases"]}
    assert verdicts == {
        "case3_lmbd": "INVERTIBLE", "case5_pjm": "INVERTIBLE", "case14_ieee": "INCONCLUSIVE",
        "case24_ieee_rts": "INVERTIBLE", "case30_ieee": "INCONCLUSIVE", "case39_epri": "INVERTIBLE",
        "case57_ieee": "INCONCLUSIVE", "case118_ieee": "INVERTIBLE",
    }


def test_csv_format(capsys):
    assert main(["certify", str(case_path("case5_pjm")), "--format", "csv"]) == 0
    header, row = capsys.readouterr().out.strip().splitlines()
    assert header.startswith("case,n,l") and row.startswith("case5_pjm,5,6,0.0,INVERTIBLE,5,")


def test_bad_root_trials(capsys):
    assert main(["certify", str(case_path("case5_pjm")), "--max-root-trials", "0"]) == 3
