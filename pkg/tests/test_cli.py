import csv
import json
import shutil

import numpy as np
import pytest

import bsgames.instances as inst
from bsgames.cli import main, parse_range
from bsgames.io import load_report, reverify_report, save_scenario


@pytest.fixture
def work(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    for name in inst.BUNDLED:
        shutil.copy(inst.bundled_path(name), tmp_path / f"{name}.json")
    return tmp_path


def test_parse_range():
    assert parse_range("0.2:1.0:9") == [0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0]
    assert parse_range("10:10:1") == [10.0]
    with pytest.raises(Exception):
        parse_range("1:2")


def test_validate(work, capsys):
    assert main(["validate", "split_join.json"]) == 0
    assert "6 nodes, 6 edges" in capsys.readouterr().out
    rep = load_report(work / "split_join.validate.json")
    assert rep["result"]["valid"] and rep["report"] == "validate"


def test_best_response_split_join(work, capsys):
    assert main(["best-response", "split_join.json", "--defender", "D1"]) == 0
    out = capsys.readouterr().out
    lines = {l.split()[0]: float(l.split()[1]) for l in out.splitlines() if "->" in l}
    assert lines["vs->v1"] == pytest.approx(2.0, abs=1e-4)
    assert lines["v4->v5"] == pytest.approx(2.0, abs=1e-4)
    for e in ("v1->v2", "v1->v3", "v2->v4", "v3->v4"):
        assert lines[e] == pytest.approx(0.5, abs=1e-4)
    rep = load_report(work / "split_join.best-response.json")
    assert rep["result"]["best_response"]["true_cost"] == pytest.approx(np.exp(-5), rel=1e-4)


def test_best_response_fixed(work, capsys):
    s = inst.multi_pne()
    prof = inst.multi_pne_profiles(s)["a"]
    (work / "p.json").write_text(json.dumps({"profile": {"D1": prof[0].tolist()}}))
    assert main(["best-response", "multi_pne.json", "--defender", "D2", "--fixed", "p.json"]) == 0
    got = load_report(work / "multi_pne.best-response.json")["result"]["best_response"]["x"]
    np.testing.assert_allclose(got, prof[1], atol=1e-3)


def test_pne_multi(work):
    assert main(["pne", "multi_pne.json", "--restarts", "20", "--seed", "7"]) == 0
    rep = load_report(work / "multi_pne.pne.json")
    assert len(rep["result"]["equilibria"]) >= 2
    assert rep["metadata"]["seed"] == 7
    reverify_report(rep)


def test_pne_reproducible(work):
    for name in ("r1.json", "r2.json"):
        assert main(["pne", "multi_pne.json", "--restarts", "3", "--seed", "5", "--report", name]) == 0
    a, b = (load_report(work / n)["result"]["equilibria"] for n in ("r1.json", "r2.json"))
    assert [e["profile"] for e in a] == [e["profile"] for e in b]


def test_pne_start_from_report(work):
    assert main(["pne", "split_join.json", "--restarts", "0", "--start", "split_join.json"]) == 2
    assert main(["pne", "multi_pne.json", "--restarts", "2", "--report", "r.json"]) == 0
    assert main(["pne", "multi_pne.json", "--restarts", "0", "--start", "r.json"]) == 0


def test_social_opt_and_poba(work, capsys):
    assert main(["social-opt", "split_join.json"]) == 0
    so = load_report(work / "split_join.social-opt.json")["result"]["social_optimum"]
    assert so["cost"] == pytest.approx(np.exp(-6), rel=1e-4)
    assert main(["poba", "spillover.json", "--restarts", "2"]) == 0
    rep = load_report(work / "spillover.poba.json")["result"]["poba"]
    assert rep["poba_estimate"] >= 1 - 1e-9 and rep["poba_is_lower_bound"]


def test_sweep_der1(work):
    args = ["sweep", "der1.json", "--alpha", "0.2:1.0:9", "--budget", "10:10:1",
            "--out", "s.csv", "--restarts", "2"]
    assert main(args) == 0
    rows = list(csv.reader(open(work / "s.csv")))
    assert rows[0] == ["alpha", "budget", "pne_cost", "social_cost", "inefficiency"]
    assert len(rows) == 10
    assert [float(r[0]) for r in rows[1:]] == parse_range("0.2:1.0:9")


class TestExitCodes:
    def test_validation_error(self, work, capsys):
        text = (work / "split_join.json").read_text().replace('"alpha": 0.5', '"alpha": 0')
        (work / "bad.json").write_text(text)
        assert main(["validate", "bad.json"]) == 2
        err = capsys.readouterr().err
        assert "alpha out of (0,1]" in err and "bad.json:" in err

    def test_parse_error(self, work):
        (work / "bad.json").write_text("{")
        assert main(["validate", "bad.json"]) == 2

    def test_usage_error(self, work):
        assert main(["pne"]) == 2
        assert main(["best-response", "split_join.json", "--defender", "Nobody"]) == 2

    def test_missing_file(self, work):
        assert main(["validate", "missing.json"]) == 4

    def test_unwritable_report(self, work):
        assert main(["validate", "split_join.json", "--report", "no/such/dir/r.json"]) == 4

    def test_no_convergence(self, work):
        with pytest.warns(RuntimeWarning, match="no verified PNE"):
            assert main(["pne", "multi_pne.json", "--restarts", "1", "--max-rounds", "1"]) == 3

    def test_line_graph_file(self, work):
        save_scenario(inst.line_graph(3, 2.0), work / "line.json")
        assert main(["poba", "line.json", "--restarts", "2"]) == 0
