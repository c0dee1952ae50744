import json

import pytest

from lndeform import __version__
from lndeform.cli import (
    EXIT_INTERNAL,
    EXIT_INVALID,
    EXIT_IO,
    EXIT_MISMATCH,
    EXIT_NEGATIVE,
    EXIT_OK,
    EXIT_PARSE,
    EXIT_USAGE,
    dump_document,
    main,
)


@pytest.fixture
def demo(tmp_path):
    out = tmp_path / "demo"
    assert main(["demo", "--out", str(out), "--bound", "2"]) == EXIT_OK
    return out


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_exit_codes_are_distinct():
    codes = [EXIT_OK, EXIT_INVALID, EXIT_USAGE, EXIT_IO, EXIT_PARSE, EXIT_MISMATCH, EXIT_NEGATIVE, EXIT_INTERNAL]
    assert codes == list(range(8))


def test_validate_fixtures(demo, capsys):
    paths = sorted(str(p) for p in demo.glob("*.json"))
    code, out, _ = run(capsys, "validate", *paths)
    assert code == EXIT_OK
    assert "fail" not in out


def test_cohomology_h1_on_z_trivial(demo, capsys):
    code, out, _ = run(capsys, "cohomology", "--action", str(demo / "action_Z_trivial.json"), "--n", "1")
    assert code == EXIT_OK
    assert out.strip() == "H^1 rank=0 torsion=[]"


def test_constants_lines(capsys):
    code, out, _ = run(capsys, "constants", "--alpha", "[1]", "--beta", "[1]")
    assert code == EXIT_OK
    lines = out.strip().splitlines()
    assert lines == ["gamma [2] coeff 2", "gamma [0,1] coeff 2"]


def test_constants_degree_over_bound(capsys):
    code, _, err = run(capsys, "constants", "--alpha", "[2]", "--beta", "[0,1]", "--bound", "3")
    assert code == EXIT_MISMATCH
    assert "exceeds" in err


def test_extend_trivial_and_revalidate(demo, tmp_path, capsys):
    emit = tmp_path / "out" / "ext.json"
    code, out, _ = run(capsys, "extend", "--deformation", str(demo / "deformation_Zx2_trivial.json"),
                       "--to-order", "3", "--emit", str(emit))
    assert code == EXIT_OK
    assert "extended to order 3" in out
    code, out, _ = run(capsys, "validate", str(emit))
    assert code == EXIT_OK
    assert out.count("pass") == 3


def test_emitted_documents_are_byte_stable(demo, tmp_path, capsys):
    first = tmp_path / "a.json"
    second = tmp_path / "b.json"
    src = demo / "deformation_Zx2_trivial.json"
    assert run(capsys, "extend", "--deformation", str(src), "--to-order", "2", "--emit", str(first))[0] == EXIT_OK
    # the first copy sits in another directory, so its action reference was rewritten
    assert run(capsys, "extend", "--deformation", str(first), "--to-order", "2", "--emit", str(second))[0] == EXIT_OK
    assert first.read_bytes() == second.read_bytes()
    doc = json.loads(first.read_text())
    assert dump_document(doc) == first.read_text()


def test_demo_documents_are_canonical(demo):
    for p in demo.glob("*.json"):
        text = p.read_text()
        assert dump_document(json.loads(text)) == text


def test_corrupted_matrix_rank_is_a_parse_error(demo, capsys):
    path = demo / "action_Z_trivial.json"
    doc = json.loads(path.read_text())
    doc["action"][1]["matrix"] = [[0, 0], [0, 0]]
    path.write_text(dump_document(doc))
    code, _, err = run(capsys, "validate", str(path))
    assert code == EXIT_PARSE
    assert err.startswith("error:")


def test_injected_cartan_violation(demo, capsys):
    path = demo / "action_canonical2.json"
    doc = json.loads(path.read_text())
    # basis 1, c1, c1^2, c2: s_(1)(c1^2) should be 2 c1^3 = 0 in the quotient; perturb it
    entry = next(e for e in doc["action"] if e["alpha"] == [1])
    entry["matrix"][3][2] += 1
    path.write_text(dump_document(doc))
    code, out, _ = run(capsys, "validate", str(path))
    assert code == EXIT_INVALID
    assert "cartan" in out.lower()


def test_missing_file_is_io_error(tmp_path, capsys):
    code, _, err = run(capsys, "validate", str(tmp_path / "nope.json"))
    assert code == EXIT_IO
    assert "cannot read" in err


def test_malformed_json_is_parse_error(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(capsys, "validate", str(bad))[0] == EXIT_PARSE


def test_usage_error(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["cohomology"])
    assert exc.value.code == EXIT_USAGE
    capsys.readouterr()


def test_cohomology_needs_a_source(capsys):
    assert run(capsys, "cohomology", "--n", "1")[0] == EXIT_USAGE


def test_bound_above_table_is_a_mismatch(demo, capsys):
    code, _, _ = run(capsys, "cohomology", "--action", str(demo / "action_Z_trivial.json"), "--n", "1", "--bound", "3")
    assert code == EXIT_MISMATCH


def test_structured_output_is_self_describing(demo, capsys):
    code, out, _ = run(capsys, "cohomology", "--format", "json", "--seed", "7",
                       "--action", str(demo / "action_Zx2_trivial.json"), "--n", "1")
    assert code == EXIT_OK
    doc = json.loads(out)
    assert doc["tool"] == "lndeform"
    assert doc["version"] == __version__
    assert doc["seed"] == 7
    assert doc["bound"] == 2
    assert doc["base"] == "Z"
    assert doc["exit_code"] == EXIT_OK
    assert doc["result"]["rank"] == 2
    assert doc["result"]["torsion"] == []


def test_hochschild_from_ring(demo, capsys):
    code, out, _ = run(capsys, "cohomology", "--complex", "hochschild", "--ring", str(demo / "ring_Zx2.json"),
                       "--n", "2", "--base", "Zmod:2")
    assert code == EXIT_OK
    assert out.strip() == "HH^2 rank=2 torsion=[]"


def test_rigidity_verdicts(demo, capsys):
    code, out, _ = run(capsys, "rigidity", "--action", str(demo / "action_Z_trivial.json"), "--max-order", "2")
    assert code == EXIT_OK
    code, out, _ = run(capsys, "rigidity", "--action", str(demo / "action_Zx2_trivial.json"), "--max-order", "2")
    assert code == EXIT_NEGATIVE
    assert "H^1 representative" in out


def test_equivalence_of_identical_extensions(demo, tmp_path, capsys):
    ext = tmp_path / "ext.json"
    src = demo / "deformation_Zx2_trivial.json"
    assert run(capsys, "extend", "--deformation", str(src), "--to-order", "2", "--emit", str(ext))[0] == EXIT_OK
    code, out, _ = run(capsys, "equivalence", "--first", str(ext), "--second", str(ext))
    assert code == EXIT_OK
    assert out.startswith("equivalent")


def test_equivalence_across_actions_is_a_mismatch(demo, capsys):
    code, _, _ = run(capsys, "equivalence", "--first", str(demo / "deformation_Zx2_trivial.json"),
                     "--second", str(demo / "deformation_canonical2.json"))
    assert code == EXIT_MISMATCH


def test_console_script_entry_point():
    from importlib.metadata import entry_points

    (ep,) = [e for e in entry_points(group="console_scripts") if e.name == "lndeform"]
    assert ep.value == "lndeform.cli:main"
