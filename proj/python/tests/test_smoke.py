import os
import pathlib

import numpy as np
import pytest

import reallogic as rl

CORPUS = pathlib.Path(os.environ.get("RL_CORPUS_DIR", pathlib.Path(__file__).parents[2] / "corpus"))

PEOPLE = """
domain person[2]
const alice: person = [1, 0]
const bob: person = [0, 1]
var x: person = [[1, 0], [0, 1]]
pred Smokes: person = mlp(4 elu, 1 sigmoid)
axiom forall x: Smokes(x)
config epochs = 50
config lr = 0.05
"""


def test_demo_ids():
    ids = rl.demo_ids()
    assert "binary" in ids and "smokers" in ids


def test_refute_fixture():
    t = rl.Theory.load(str(CORPUS / "refute.rl"))
    assert t.axiom_labels == ["axiom1"]
    r = t.refute("A")
    assert r["not_entailed"]
    assert r["sat"] >= 0.95 and r["phi"] < 0.95
    assert set(r["atoms"]) == {"A", "B"}
    assert t.refute("A | B")["verdict"].startswith("entailed")


def test_learn_raises_satisfiability(tmp_path):
    t = rl.Theory.from_text(PEOPLE, seed=3)
    before = t.satisfiability()
    log = t.learn()
    assert len(log) == 51
    assert log[0]["epoch"] == 0
    assert log[-1]["sat"] > before
    assert abs(log[-1]["loss"] - (1 - log[-1]["sat"])) < 1e-12
    assert abs(t.satisfiability() - log[-1]["sat"]) < 0.05

    path = str(tmp_path / "params.bin")
    t.save_params(path)
    fresh = rl.Theory.from_text(PEOPLE, seed=4)
    fresh.load_params(path)
    assert fresh.satisfiability() == pytest.approx(t.satisfiability())
    saved = rl.read_params(path)
    assert set(saved) == set(t.params())


def test_query_shapes():
    t = rl.Theory.from_text(PEOPLE, seed=0)
    r = t.query("Smokes(x)")
    assert r["axes"] == ["x"]
    assert r["values"].shape == (2,)
    assert np.all((r["values"] >= 0) & (r["values"] <= 1))
    closed = rl.truth(t, "Smokes(alice) & Smokes(bob)")
    assert 0.0 <= closed <= 1.0
    unseen = t.query("Smokes(x)", {"x": np.eye(2)[[0, 0, 1]]})
    assert unseen["values"].shape == (3,)


def test_errors_are_translated():
    t = rl.Theory.from_text(PEOPLE)
    with pytest.raises(rl.LogicError):
        t.query("Smokes(")
    with pytest.raises(ValueError):
        t.set("no_such_key", "1")
    with pytest.raises(ValueError, match="missing.csv"):
        rl.Theory.from_text('domain d[1]\ndata "missing.csv" as var x: d\n')


def test_format_formula():
    assert rl.format_formula("forall x:(A(x)->B(x))") == rl.format_formula("forall x: A(x) -> B(x)")


def test_run_demo(tmp_path):
    r = rl.run_demo("refute", seed=0, out_dir=str(tmp_path))
    assert r["passed"]
    assert (tmp_path / "summary.csv").exists()
    assert r["summary"]["not_entailed"] == 1.0
