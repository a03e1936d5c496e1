import csv
import json
import subprocess
import sys

import pytest

from adversynth import automata, casestudy
from adversynth.cli import main, slinfer_main
from adversynth.game import GameAutomaton, dump_game
from adversynth.inference import SLGrammar, grammar_to_fsa, parse_factor

G_FACTORS = ["<aa", "<ab", "aab", "aaa", "aba", "ba>"]


def run_cli(capsys, *argv, entry=main):
    code = entry(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture
def opposite_json(tmp_path):
    path = tmp_path / "opposite.json"
    path.write_text(dump_game(casestudy.build_scenario("opposite")))
    return path


@pytest.fixture
def sl3_machine(tmp_path):
    g = SLGrammar(3, "ab", {parse_factor(f, "ab") for f in G_FACTORS})
    path = tmp_path / "fig.json"
    path.write_text(automata.dumps(grammar_to_fsa(g)))
    return path


def test_casestudy_winning_set(capsys):
    code, out, _ = run_cli(capsys, "casestudy", "--regime", "opposite")
    assert code == 0
    assert out.split() == ["(1,ad,1,1)", "(1,ce,1,1)", "(2,ad,1,2)", "(2,bf,1,2)", "(4,bf,1,4)", "(4,ce,1,4)"]
    code, out, _ = run_cli(capsys, "casestudy", "--regime", "general")
    assert out.strip() == "no winning initial states"


def test_casestudy_dot(capsys, tmp_path):
    target = tmp_path / "g.dot"
    assert run_cli(capsys, "casestudy", "--emit", "dot", "--out", str(target))[0] == 0
    assert target.read_text().startswith('digraph "game"')


def test_solve_report(capsys, opposite_json):
    code, out, _ = run_cli(capsys, "solve", "--game", str(opposite_json))
    assert code == 0
    assert "winning initial states: 6/24 (25.0%)" in out
    assert "(1,ad,1,1)  rank 7" in out
    assert "(1,ad,1,1) -> 4" in out
    again = run_cli(capsys, "solve", "--game", str(opposite_json))[1]
    assert again == out


def test_solve_without_targets(capsys, tmp_path):
    g = casestudy.build_scenario("opposite")
    empty = GameAutomaton(g.states, g.agent_alphabet, g.adversary_alphabet, g.edges, g.initial, frozenset(), g.sw)
    path = tmp_path / "empty.json"
    path.write_text(dump_game(empty))
    code, out, _ = run_cli(capsys, "solve", "--game", str(path))
    assert code == 0 and "no winning initial states" in out


def test_solve_rejects_malformed_files(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    code, out, err = run_cli(capsys, "solve", "--game", str(bad))
    assert code == 2 and out == ""
    assert len(err.strip().splitlines()) == 1 and "malformed" in err
    code, _, err = run_cli(capsys, "solve", "--game", str(tmp_path / "missing.json"))
    assert code == 2 and "cannot read" in err


def read_rows(text):
    return list(csv.DictReader(text.splitlines()))


def test_play_is_seeded(capsys):
    a = run_cli(capsys, "play", "--games", "30", "--seed", "4")[1]
    b = run_cli(capsys, "play", "--games", "30", "--seed", "4")[1]
    c = run_cli(capsys, "play", "--games", "30", "--seed", "5")[1]
    assert a == b and a != c
    rows = read_rows(a)
    assert list(rows[0]) == [
        "game_id", "seed", "initial_state", "outcome", "agent_turns",
        "adversary_turns", "cumulative_turns", "discovery_ratio",
    ]
    assert len(rows) == 31 and rows[-1]["game_id"] == "summary"


def test_play_seed_from_environment(capsys, monkeypatch):
    monkeypatch.setenv("ADVERSYNTH_SEED", "4")
    from_env = run_cli(capsys, "play", "--games", "10")[1]
    monkeypatch.delenv("ADVERSYNTH_SEED")
    assert from_env == run_cli(capsys, "play", "--games", "10", "--seed", "4")[1]
    monkeypatch.setenv("ADVERSYNTH_SEED", "four")
    assert run_cli(capsys, "play", "--games", "1")[0] == 2


def test_play_full_knowledge_band(capsys):
    out = run_cli(capsys, "play", "--agent", "full_knowledge", "--games", "300", "--seed", "0")[1]
    wins = sum(r["outcome"] == "WIN" for r in read_rows(out)[:-1])
    assert 61 <= wins <= 89


def test_play_no_learning(capsys):
    out = run_cli(capsys, "play", "--agent", "no_learning", "--games", "300", "--seed", "0")[1]
    rows = read_rows(out)
    assert rows[-1]["outcome"] == "wins=0/300"


def test_play_writes_files(capsys, tmp_path):
    out_csv, traces = tmp_path / "run.csv", tmp_path / "traces.json"
    code, out, _ = run_cli(capsys, "play", "--games", "5", "--csv", str(out_csv), "--traces", str(traces))
    assert code == 0 and out == ""
    assert len(read_rows(out_csv.read_text())) == 6
    doc = json.loads(traces.read_text())
    assert doc[0]["seed"] == 0 and len(doc[0]["games"]) == 5
    assert sorted(p.name for p in tmp_path.iterdir()) == ["run.csv", "traces.json"]


def test_play_replications_in_parallel_match_serial(capsys):
    serial = run_cli(capsys, "play", "--games", "20", "--replications", "3")[1]
    parallel = run_cli(capsys, "play", "--games", "20", "--replications", "3", "--jobs", "2")[1]
    assert serial == parallel
    assert [r["seed"] for r in read_rows(serial) if r["game_id"] == "summary"] == ["0", "1", "2"]


def test_play_usage_errors(capsys, tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["play", "--regime", "diagonal"])
    assert exc.value.code == 2
    code, _, err = run_cli(capsys, "play", "--games", "3", "--csv", str(tmp_path / "no" / "x.csv"))
    assert code == 2 and err
    assert not (tmp_path / "no").exists()


def test_learn_and_member(capsys, tmp_path):
    corpus = tmp_path / "corpus.txt"
    corpus.write_text("aaba\n#\naba\naaaba\n")
    code, out, _ = run_cli(capsys, "learn", "--k", "3", str(corpus), entry=slinfer_main)
    assert code == 0
    assert json.loads(out)["factors"] == ["<aa", "<ab", "aaa", "aab", "aba", "ba>"]
    gpath = tmp_path / "g.json"
    gpath.write_text(out)
    assert run_cli(capsys, "member", "--grammar", str(gpath), "aaba", entry=slinfer_main)[:2] == (0, "accept\n")
    assert run_cli(capsys, "member", "--grammar", str(gpath), "aababa")[:2] == (1, "reject\n")
    assert run_cli(capsys, "member", "--grammar", str(gpath), "abc")[0] == 2


def test_learn_empty_corpus(capsys, tmp_path):
    corpus = tmp_path / "empty.txt"
    corpus.write_text("")
    code, out, _ = run_cli(capsys, "learn", "--k", "2", "--alphabet", "a,b", str(corpus))
    assert code == 0
    assert json.loads(out) == {"k": 2, "alphabet": ["a", "b"], "factors": []}


def test_decide_sl(capsys, sl3_machine, tmp_path):
    code, out, _ = run_cli(capsys, "decide-sl", str(sl3_machine))
    assert code == 0 and out.startswith("SL, k ≤ 4")
    even = tmp_path / "even.json"
    even.write_text(automata.dumps(automata.make_fsa([0, 1], "a", {(0, "a"): 1, (1, "a"): 0}, [0], [0])))
    code, out, _ = run_cli(capsys, "decide-sl", str(even), entry=slinfer_main)
    assert code == 1 and out.startswith("not SL")


def test_weaksim(capsys, sl3_machine, tmp_path):
    code, out, _ = run_cli(capsys, "weaksim", "--left", str(sl3_machine), "--right", str(sl3_machine))
    assert code == 0 and "λ λ" in out.splitlines()
    lonely = tmp_path / "lonely.json"
    lonely.write_text(automata.dumps(automata.Semiautomaton(("x",), ("a", "b"), {})))
    code, out, _ = run_cli(capsys, "weaksim", "--left", str(sl3_machine), "--right", str(lonely))
    assert code == 1 and out == "none\n"
    code, _, err = run_cli(capsys, "weaksim", "--left", str(sl3_machine), "--right", str(lonely), "--silent", "z")
    assert code == 2 and err


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "adversynth.cli", "casestudy"], capture_output=True, text=True, check=False
    )
    assert proc.returncode == 0 and len(proc.stdout.split()) == 6
