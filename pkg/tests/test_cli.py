import json

import pytest

from frobcheck.cli import EXIT_OK, EXIT_PARSE, EXIT_RESIDUAL, EXIT_VALIDATION, main

BROKEN = """\
name: broken
nvars: 2
prepotential: |
  1 0 | 2 2 | 0 0
euler_matrix: [[1, 0], [0, 1]]
euler_shift: [0, 0]
charge_d: 0
"""


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_validate_a3(capsys):
    code, out, _ = run(capsys, "validate", "--manifold", "A3")
    assert code == EXIT_OK and json.loads(out)["summary"]["passed"]


def test_validate_broken_file(capsys, tmp_path):
    path = tmp_path / "broken.fm"
    path.write_text(BROKEN)
    code, _, err = run(capsys, "validate", "--manifold", str(path))
    assert code == EXIT_VALIDATION and "validation failed" in err


def test_parse_error(capsys, tmp_path):
    path = tmp_path / "junk.fm"
    path.write_text("name: [\n")
    code, _, _ = run(capsys, "validate", "--manifold", str(path))
    assert code == EXIT_PARSE


def test_validate_deterministic(capsys):
    a = run(capsys, "validate", "--manifold", "A2", "--seed", "7")[1]
    b = run(capsys, "validate", "--manifold", "A2", "--seed", "7")[1]
    assert a == b


def test_g2_a2(capsys):
    code, out, _ = run(capsys, "g2", "--manifold", "A2", "--num-points", "20", "--seed", "1")
    doc = json.loads(out)
    assert code == EXIT_OK
    assert len(doc["rows"]) == 20
    assert max(doc["summary"]["max_residuals"].values()) < 1e-6


def test_g2_p1_exploratory(capsys):
    code, out, _ = run(capsys, "g2", "--manifold", "P1")
    assert code == EXIT_OK and json.loads(out)["summary"]["exploratory"] is True


def test_g2_asserted_tolerance_breach(capsys):
    code, out, _ = run(capsys, "g2", "--manifold", "A2", "--num-points", "2", "--tol", "g2=1e-300")
    assert code == EXIT_RESIDUAL and json.loads(out)["summary"]["passed"] is False


def test_zero_points_is_usage_error(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["g2", "--manifold", "A2", "--num-points", "0"])
    assert exc.value.code == 2


def test_bad_tolerance_is_usage_error(capsys):
    with pytest.raises(SystemExit):
        main(["identities", "--manifold", "A2", "--tol", "string=-1"])


def test_identities_a3(capsys):
    code, out, _ = run(capsys, "identities", "--manifold", "A3", "--num-points", "10")
    doc = json.loads(out)
    assert code == EXIT_OK and doc["summary"]["failures"] == 0
    assert all(r["passed"] for r in doc["rows"])
    for key in ("identity", "anchor", "residual", "scale", "tolerance"):
        assert key in doc["rows"][0]


def test_identities_p1(capsys):
    code, out, _ = run(capsys, "identities", "--manifold", "P1", "--num-points", "3")
    rows = json.loads(out)["rows"]
    assert code == EXIT_OK
    assert all(r["passed"] for r in rows if not r["conditional"] and r["identity"] != "QP-reduced")
    assert any(not r["passed"] for r in rows if r["conditional"])


def test_identities_only(capsys):
    code, out, _ = run(capsys, "identities", "--manifold", "A2", "--only", "string,theta")
    names = {r["identity"] for r in json.loads(out)["rows"]}
    assert code == EXIT_OK and names == {"string", "theta-symmetry", "theta-rv", "theta-three-sum"}


def test_identities_failure_lists_anchor(capsys):
    code, _, err = run(capsys, "identities", "--manifold", "A2", "--num-points", "1",
                       "--only", "string", "--tol", "string=1e-300")
    assert code == EXIT_RESIDUAL and "sum_j r_ij h_j = 0" in err


def test_conditions_a4(capsys):
    code, out, _ = run(capsys, "conditions", "--manifold", "A4")
    s = json.loads(out)["summary"]
    assert code == EXIT_OK and s["C1"] and s["C2"]
    assert s["certification"]["C2_certified"] and s["certification"]["C3_certified"]


def test_conditions_p1(capsys):
    code, out, _ = run(capsys, "conditions", "--manifold", "P1")
    s = json.loads(out)["summary"]
    assert code == EXIT_OK and s["C2"] is False and s["certification"] is None


def test_conditions_dimension_only(capsys):
    code, out, _ = run(capsys, "conditions", "--manifold", "E8", "--dimension-only")
    doc = json.loads(out)
    assert code == EXIT_OK and doc["manifold"] == "E8"
    assert all(r["admissible"] == 0 for r in doc["rows"])


def test_table_output_to_file(capsys, tmp_path):
    dest = tmp_path / "out.csv"
    code, out, _ = run(capsys, "g2", "--manifold", "A2", "--num-points", "2", "--format", "table",
                       "--output", str(dest))
    assert code == EXIT_OK and out == ""
    assert dest.read_text().startswith("# schema_version=")


def test_workers_do_not_change_output(capsys):
    argv = ["identities", "--manifold", "A3", "--num-points", "3", "--branch-flip"]
    a = run(capsys, *argv)[1]
    b = run(capsys, *argv, "--workers", "2")[1]
    assert a == b
