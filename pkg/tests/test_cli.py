import csv
import json
import math
import subprocess
import sys

import jsonschema
import pytest

from l2index.cli import main, parse_domain
from l2index.jsonio import CSV_COLUMNS, dumps, load_schema


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def index_doc(capsys, *argv):
    code, out, _ = run(capsys, "index", *argv)
    doc = json.loads(out)
    jsonschema.validate(doc, load_schema("index_result"))
    return code, doc


def test_index_flat(capsys):
    code, doc = index_doc(capsys, "--weight", "catalog:zero", "--domain", "ball:0:2", "--center", "0",
                          "--r", "1")
    assert code == 0 and doc["L"] == 1.0 and doc["converged"] and doc["weight"] == "catalog:zero"


def test_index_radial_anchor(capsys):
    code, doc = index_doc(capsys, "--weight", "abs2(z1)", "--domain", "ball:0:3", "--center", "0",
                          "--r", "1")
    assert code == 0 and doc["L"] == pytest.approx(0.632121, abs=1e-6)
    assert doc["weight"] == "abs2(z1)" and doc["class"] == "below_one" and not doc["unique"]


def test_index_pluriharmonic_unique(capsys):
    code, doc = index_doc(capsys, "--weight", "2*re(z1)", "--domain", "ball:0:3", "--center", "0.5",
                          "--r", "1")
    assert code == 0 and doc["L"] == pytest.approx(1.0, abs=5e-4) and doc["unique"]
    assert doc["kernel_diag"] == pytest.approx(1 / doc["norm_sq"], rel=1e-10)


def test_index_frames(capsys):
    base = ["--weight", "catalog:saddle", "--domain", "ball:0:1", "--r", "0.8", "--s", "0.2"]
    _, ident = index_doc(capsys, *base)
    _, swap = index_doc(capsys, *base, "--frame", "swap")
    assert ident["L"] < 1 - 1e-3 < 1 + 1e-3 < swap["L"]
    _, rnd = index_doc(capsys, *base, "--frame", "random", "--seed", "4")
    assert rnd["cylinder"]["A"] != ident["cylinder"]["A"]


def test_index_sampled_cylinder_is_deterministic(capsys):
    argv = ["index", "--weight", "catalog:gauss", "--domain", "polydisc:0:1,2", "--seed", "3"]
    assert run(capsys, *argv)[1] == run(capsys, *argv)[1]


def test_index_unconverged_exit_code(capsys):
    code, doc = index_doc(capsys, "--weight", "60*re(z1)", "--domain", "ball:0:2", "--center", "0",
                          "--r", "1")
    assert code == 2 and not doc["converged"]


def test_index_infinite_center(capsys):
    # a leading minus needs the --flag=value spelling
    code, doc = index_doc(capsys, "--weight=-log(abs2(z1))", "--domain", "ball:0:2", "--center", "0",
                          "--r", "1")
    assert code == 0 and doc["L"] == "inf" and doc["bound"] == 0.0


def test_dump_gram(capsys, tmp_path):
    path = tmp_path / "g.json"
    code, _ = index_doc(capsys, "--weight", "catalog:zero", "--domain", "ball:0:2", "--center", "0",
                        "--r", "1", "--degree", "2", "--dump-gram", str(path))
    art = json.loads(path.read_text())
    assert code == 0 and art["gram"]["G_re"][1][1] == pytest.approx(math.pi / 2)
    assert art["minimizer"]["coefficients"][0] == [1.0, 0.0]


@pytest.mark.parametrize("argv", [
    ["index", "--weight", "catalog:zero"],
    ["index", "--weight", "z1 +", "--domain", "ball:0:1"],
    ["index", "--weight", "catalog:zero", "--domain", "sphere:0:1"],
    ["index", "--weight", "catalog:zero", "--domain", "ball:0:1", "--r", "-1"],
    ["index", "--weight", "catalog:nope", "--domain", "ball:0:1"],
    ["index", "--weight", "catalog:zero", "--domain", "ball:0:1", "--frame", "diagonal"],
    ["classify", "--weight", "catalog:zero", "--domain", "ball:0:1", "--samples", "0"],
    ["classify", "--weight", "catalog:zero", "--domain", "ball:0:1", "--twist", "exp(z1)"],
    ["bogus"],
])
def test_bad_flags_exit_64(argv, capsys):
    with pytest.raises(SystemExit) as info:
        sys.exit(main(argv))
    assert info.value.code == 64
    assert "usage" in capsys.readouterr().err


def test_runtime_error_exit_1(capsys):
    code, out, err = run(capsys, "index", "--weight", "catalog:zero", "--domain", "ball:0:1",
                         "--center", "0.9", "--r", "0.5")
    assert code == 1 and out == "" and "not contained" in err


def test_parse_domain():
    assert parse_domain("ball:0:2").radius == 2.0
    assert parse_domain("ball:0:2", 3).n == 3
    d = parse_domain("polydisc:0,1j:1,0.5")
    assert d.n == 2 and list(d.radii) == [1.0, 0.5] and d.center[1] == 1j
    assert parse_domain("box:-1,1;0,2").center[0] == 1j
    assert parse_domain("box:-1,1;0,2", 2).n == 2


def test_classify_outputs(capsys, tmp_path):
    out_json, out_csv = tmp_path / "r.json", tmp_path / "r.csv"
    code, out, err = run(capsys, "classify", "--weight", "catalog:gauss", "--domain", "ball:0:1",
                         "--samples", "6", "--seed", "2", "--out", str(out_json), "--csv", str(out_csv),
                         "--twist", "z1^3")
    assert code == 0
    v = json.loads(out)
    jsonschema.validate(v, load_schema("verdict"))
    assert v["label"] == "psh_consistent_strict" and "verdict:" in err
    assert any(t["g"] == "z1^3" for t in v["twist"])
    doc = json.loads(out_json.read_text())
    jsonschema.validate(doc, load_schema("classify_output"))
    assert doc["verdict"] == v and len(doc["results"]) == 6
    for row in doc["results"]:
        jsonschema.validate({k: row[k] for k in row if k != "class"} | {"class": row["class"]},
                            load_schema("index_result"))
    rows = list(csv.reader(out_csv.open()))
    assert tuple(rows[0]) == CSV_COLUMNS and len(rows) == 7
    assert all(r[-1] == "below_one" for r in rows[1:])


def test_selftest_quick_cli(capsys):
    code, out, err = run(capsys, "selftest", "--quick")
    doc = json.loads(out)
    jsonschema.validate(doc, load_schema("selftest"))
    assert code == 0 and doc["passed"] and doc["quick"]


def test_selftest_fault_injection_cli(capsys):
    code, out, _ = run(capsys, "selftest", "--quick", "--inject-fault", "volume")
    doc = json.loads(out)
    assert code == 1 and not doc["passed"]
    assert [c["name"] for c in doc["checks"] if not c["passed"]] == ["volume"]


def test_inject_fault_is_hidden(capsys):
    with pytest.raises(SystemExit):
        main(["selftest", "--help"])
    assert "inject" not in capsys.readouterr().out


def test_oracle_subcommands(capsys):
    code, out, _ = run(capsys, "oracle", "radial", "--profile", "t2", "--r", "1")
    assert code == 0 and json.loads(out)["L"] == pytest.approx(1 - math.exp(-1), abs=1e-12)
    code, out, _ = run(capsys, "oracle", "mc", "--weight", "catalog:zero", "--domain", "ball:0:1",
                       "--r", "0.5", "--samples", "20000")
    assert code == 0 and json.loads(out)["ratio"] == pytest.approx(1.0, abs=1e-12)
    code, out, _ = run(capsys, "oracle", "extremal", "--weight", "2*re(z1^2)", "--h", "z1^2",
                       "--domain", "ball:0:1", "--center", "0.2", "--r", "0.5", "--samples", "20000")
    assert code == 0 and json.loads(out)["ratio"] == pytest.approx(1.0, abs=1e-12)


def test_dumps_is_stable():
    assert dumps({"x": 1 / 3, "y": math.inf, "z": math.nan}) == \
        '{\n  "x": 0.333333333333,\n  "y": "inf",\n  "z": "nan"\n}\n'


def _classify_bytes(tmp_path, jobs, tag):
    out = tmp_path / f"{tag}.json"
    proc = subprocess.run([sys.executable, "-m", "l2index", "classify", "--weight", "catalog:saddle",
                           "--domain", "ball:0:1", "--samples", "6", "--seed", "11", "--jobs", str(jobs),
                           "--out", str(out)], capture_output=True, check=True)
    return proc.stdout + out.read_bytes()


def test_classify_determinism_across_jobs(tmp_path):
    a = _classify_bytes(tmp_path, 1, "a")
    assert a == _classify_bytes(tmp_path, 1, "b")
    assert a == _classify_bytes(tmp_path, 4, "c")
