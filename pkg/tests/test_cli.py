import csv
import json

import pytest

from confspace.cli import run


def call(capsys, *argv):
    code = run(list(argv))
    out = capsys.readouterr()
    return code, json.loads(out.out), out


@pytest.fixture(autouse=True)
def workdir(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    monkeypatch.delenv("CONFSPACE_SEED", raising=False)
    return tmp_path


# -- examples ---------------------------------------------------------------------------------

def test_check_member(capsys):
    code, out, _ = call(capsys, "check", "--ambient", "sphere", "--m", "2", "--k", "2",
                        "--config", "[[1,0,0],[0,1,0]]")
    assert code == 0 and out["member"] is True


def test_check_non_member_exits_one(capsys):
    code, out, _ = call(capsys, "check", "--ambient", "sphere", "--m", "2", "--k", "2",
                        "--config", "[[1,0,0],[-1,0,0]]")
    assert code == 1 and out["member"] is False


def test_check_exact(capsys):
    code, out, _ = call(capsys, "check", "--ambient", "rp", "--m", "2", "--k", "3", "--exact",
                        "--config", '[[1,0,0],[0,1,0],["1/2",3,0]]')
    assert code == 1 and out["member"] is False


def test_homotopy_example(capsys):
    code, out, _ = call(capsys, "homotopy", "--ambient", "rp", "--m", "3", "--k", "3", "--n", "3",
                        "--p", "1")
    assert code == 0
    assert out["answer"] == "Q8 + Z2" and out["confidence"] == "PAPER" and out["rule"] == "R6"


def test_group_example(capsys):
    code, out, _ = call(capsys, "group", "--m", "4", "--stats")
    assert code == 0
    assert out == {"order": 32, "orders": {"1": 1, "2": 11, "4": 20}, "name": "Q8*D8"}


def test_output_has_sorted_keys(capsys):
    run(["group", "--m", "4", "--stats"])
    text = capsys.readouterr().out
    assert text.strip() == json.dumps(json.loads(text), sort_keys=True, ensure_ascii=False)


# -- other commands ---------------------------------------------------------------------------

def test_monodromy_and_spin(capsys):
    _, out, _ = call(capsys, "monodromy", "--loop", "beta1*beta2")
    assert out["monodromy"] == "(+,-,+)"
    _, out, _ = call(capsys, "spin", "--loop", "alpha:3")
    assert out["lift"] == "-1"
    _, out, _ = call(capsys, "spin", "--loop", "alpha:3", "--power", "2")
    assert out["lift"] == "+1"
    _, out, _ = call(capsys, "spin", "--loop", "delta3")
    assert out["lift"] == "+e_{1,2,3,4}"


def test_retract_and_section(capsys):
    code, out, _ = call(capsys, "retract", "--ambient", "sphere", "--m", "2", "--k", "2",
                        "--config", "[[1,0,0],[0.6,0.8,0]]")
    assert code == 0 and out["member"]
    assert out["result"]["points"][1] == pytest.approx([0, 1, 0], abs=1e-12)
    code, out, _ = call(capsys, "retract", "--kind", "unitize", "--ambient", "euclidean", "--d", "2",
                        "--k", "2", "--config", "[[2,0],[0,3]]")
    assert out["result"]["points"] == [[1.0, 0.0], [0.0, 1.0]]
    code, out, _ = call(capsys, "section", "--ambient", "sphere", "--m", "2", "--k", "2",
                        "--config", "[[1,0,0],[0,1,0]]")
    assert code == 0 and out["projects_back"]
    assert out["result"]["points"][2] == pytest.approx([0, 0, 1])


def test_trivialize(capsys):
    code, out, _ = call(capsys, "trivialize", "--ambient", "sphere", "--m", "3", "--k", "3",
                        "--config", "[[1,0,0,0],[0,1,0,0],[0,0,1,0]]",
                        "--point", "[0.5,0.5,0.5,0.5]")
    assert code == 0 and out["point"] == pytest.approx([0.5] * 4)
    assert out["round_trip_error"] <= 1e-9
    code, out, _ = call(capsys, "trivialize", "--ambient", "sphere", "--m", "3", "--k", "3",
                        "--config", "[[1,0,0,0],[0,1,0,0],[0,0,1,0]]", "--point", "[1,0,0,0]")
    assert code == 2 and out["type"] == "BoundaryError"


def test_arrangement(capsys):
    _, out, _ = call(capsys, "arrangement", "--m", "3", "--graphs")
    assert out["free_rank"] == 7
    assert len(out["graph_model"]["adjacency"]) == 6
    _, out, _ = call(capsys, "arrangement", "--ambient", "rp", "--m", "1", "--k", "1",
                     "--config", "[[1,0],[0,1],[1,1]]", "--arity", "1", "--samples", "2000")
    assert out["components"] == out["sampled_components"] == 3


def test_identify_with_presentation(capsys):
    gens = json.dumps({"b1": "e34", "b2": "e23", "b3": "e1234"})
    rels = ["b1^4 = 1", "b2^2 = b1^2", "b2^-1 b1 b2 = b1^-1", "b3^2 = 1", "[b1,b3] = 1",
            "[b2,b3] = 1"]
    argv = ["identify", "--m", "3", "--gens", gens]
    for r in rels:
        argv += ["--relation", r]
    code, out, _ = call(capsys, *argv)
    assert code == 0 and out["name"] == "Q8 + Z2"
    assert out["presentation"]["verified"] and out["presentation"]["presented_order"] == 16
    bad = json.dumps({"b1": "e34", "b2": "e23", "b3": "e12"})
    argv[4] = bad
    code, out, _ = call(capsys, *argv)
    assert code == 1 and not out["presentation"]["verified"]


# -- errors -------------------------------------------------------------------------------------

@pytest.mark.parametrize("argv", [
    ["check", "--ambient", "torus", "--m", "2", "--k", "1", "--config", "[[1,0,0]]"],
    ["check", "--ambient", "sphere", "--m", "2", "--k", "1", "--config", "[[1,0"],
    ["check", "--ambient", "sphere", "--m", "2", "--k", "1", "--config", "[[2,0,0]]"],
    ["homotopy", "--ambient", "sphere", "--m", "3", "--k", "3"],
    ["group", "--m", "12"],
    ["nosuchcommand"],
    ["spin", "--loop", "gamma"],
    ["identify", "--table", "@missing.json"],
])
def test_input_errors_exit_two_with_json(capsys, argv):
    code, out, _ = call(capsys, *argv)
    assert code == 2 and "error" in out


# -- determinism, seeds, files --------------------------------------------------------------------

def test_sample_is_deterministic_and_seed_falls_back_to_env(capsys, monkeypatch):
    argv = ["sample", "--ambient", "sphere", "--m", "2", "--k", "2", "--n", "3", "--count", "3"]
    _, a, _ = call(capsys, *argv, "--seed", "11")
    _, b, _ = call(capsys, *argv, "--seed", "11")
    assert a == b and a["seed"] == 11
    monkeypatch.setenv("CONFSPACE_SEED", "11")
    _, c, _ = call(capsys, *argv)
    assert c == a
    monkeypatch.setenv("CONFSPACE_SEED", "twelve")
    code, _, _ = call(capsys, *argv)
    assert code == 2


def test_no_files_without_out(capsys, workdir):
    run(["sample", "--ambient", "sphere", "--m", "2", "--k", "2", "--count", "2"])
    run(["lift", "--loop", "beta1"])
    run(["group", "--m", "3", "--table"])
    run(["arrangement", "--m", "3"])
    capsys.readouterr()
    assert list(workdir.iterdir()) == []


def test_sample_csv_export(capsys, workdir):
    run(["sample", "--ambient", "sphere", "--m", "2", "--k", "2", "--count", "2", "--out", "s.csv"])
    capsys.readouterr()
    rows = list(csv.reader((workdir / "s.csv").open()))
    assert rows[0] == ["sample", "point", "x1", "x2", "x3"] and len(rows) == 5


def test_round_trip_group_table(capsys, workdir):
    run(["group", "--m", "3", "--out", "g.json"])
    capsys.readouterr()
    code, out, _ = call(capsys, "identify", "--table", "@g.json")
    assert code == 0 and out["name"] == "Q8 + Z2"


def test_round_trip_lift_path(capsys, workdir):
    run(["lift", "--loop", "beta3", "--out", "p.json"])
    capsys.readouterr()
    # the lift of beta3 is the delta3 path in W_{3,3}(S^3), read back by the spin command
    code, out, _ = call(capsys, "spin", "--loop", "@p.json")
    assert code == 0 and out["lift"] == "+e_{1,2,3,4}"
    code, out, _ = call(capsys, "monodromy", "--loop", "@p.json")
    assert code == 2 and out["type"] == "InputError"


def test_round_trip_sample_config(capsys, workdir):
    run(["sample", "--ambient", "rp", "--m", "3", "--k", "3", "--count", "1", "--out", "c.json"])
    capsys.readouterr()
    cfg = json.loads((workdir / "c.json").read_text())[0]
    code, out, _ = call(capsys, "check", "--config", json.dumps(cfg))
    assert code == 0 and out["member"]


def test_verify_all_subset_is_deterministic(capsys):
    code, a, first = call(capsys, "verify-all", "--only", "5", "--only", "11", "--seed", "3")
    _, b, second = call(capsys, "verify-all", "--only", "5", "--only", "11", "--seed", "3")
    assert code == 0 and first.out == second.out
    assert "[PASS]  5" in first.err and a["seed"] == 3
