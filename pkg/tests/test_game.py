import random

import pytest

import gamegen
from adversynth import casestudy
from adversynth.automata import Semiautomaton, make_fsa
from adversynth.game import (
    ADVERSARY,
    AGENT,
    EPSILON,
    TRAPPED,
    GameAutomaton,
    GameError,
    GameState,
    InteractionFunction,
    PlayerSpec,
    SwitchingFunction,
    attractor,
    classify,
    dump_game,
    export_game_dot,
    game_automaton,
    load_game,
    optimal_strategy,
    sw_update,
    turn_based_product,
    winning_initials,
    winning_strategy,
)


def tiny_players():
    agent = PlayerSpec(Semiautomaton(("p", "q"), ("go",), {("p", "go"): "q", ("q", "go"): "p"}), {"p"})
    adv = PlayerSpec(
        Semiautomaton(("x", "y"), ("sw", EPSILON), {("x", "sw"): "y", ("x", EPSILON): "x", ("y", EPSILON): "y"}),
        {"x"},
        can_pass=True,
    )
    return agent, adv


def test_product_shape_and_blocking():
    agent, adv = tiny_players()
    u2 = InteractionFunction({("y", "p"): {"go"}})
    prod = turn_based_product(agent, adv, None, u2)
    assert len(prod.states) == 8
    assert prod.initial == {GameState("p", "x", AGENT)}
    assert prod.final == set(prod.states) - prod.initial
    assert (GameState("p", "y", AGENT), "go") not in prod.transitions
    assert prod.transitions[(GameState("p", "x", AGENT), "go")] == GameState("q", "x", ADVERSARY)
    assert prod.transitions[(GameState("q", "x", ADVERSARY), "sw")] == GameState("q", "y", AGENT)


def test_product_rejects_bad_players():
    agent, adv = tiny_players()
    with pytest.raises(GameError):
        turn_based_product(adv, agent)
    with pytest.raises(GameError):
        turn_based_product(agent, agent)
    with pytest.raises(GameError):
        PlayerSpec(Semiautomaton(("x",), ("a",), {}), {"x"}, can_pass=True)
    with pytest.raises(GameError):
        PlayerSpec(Semiautomaton(("x", "y"), (EPSILON,), {("x", EPSILON): "y"}), {"x"}, can_pass=True)


def test_interaction_never_blocks_silence():
    u = InteractionFunction({("a", "b"): {"x", EPSILON}})
    assert u("a", "b") == {"x"}
    assert u("z", "z") == frozenset()


def test_switching_function():
    sw = SwitchingFunction()
    assert sw("x", EPSILON) == 1 and sw("x", "sw") == 0
    sw2 = sw_update(sw, "x", "sw")
    assert sw2("x", "sw") == 1 and sw("x", "sw") == 0
    assert sw_update(sw2, "x", "sw") is sw2
    assert sw_update(sw2, "x", EPSILON) is sw2


def tiny_game(**kw):
    agent, adv = tiny_players()
    prod = turn_based_product(agent, adv)
    spec = make_fsa(("s0", "s1"), ("go", "sw", EPSILON), {("s0", "go"): "s1", ("s1", "go"): "s1",
                                                           ("s0", "sw"): "s0", ("s1", "sw"): "s1",
                                                           ("s0", EPSILON): "s0", ("s1", EPSILON): "s1"},
                    ["s0"], ["s1"])
    return game_automaton(prod, spec, **kw)


def test_game_automaton_final_states_are_adversary_turns():
    g = tiny_game()
    assert all(g.states[i].turn == ADVERSARY and g.states[i].qs == "s1" for i in g.final)
    attr = attractor(g)
    q0 = g.states[g.initial[0]]
    assert classify(g, attr, q0).rank == 1
    assert str(classify(g, attr, q0)) == "WINNING(1)"


def test_game_automaton_needs_covering_spec():
    agent, adv = tiny_players()
    spec = make_fsa(("s",), ("go",), {}, ["s"], ["s"])
    with pytest.raises(GameError):
        game_automaton(turn_based_product(agent, adv), spec)


def test_empty_target_has_no_winners():
    g = casestudy.build_scenario("opposite")
    g = GameAutomaton(g.states, g.agent_alphabet, g.adversary_alphabet, g.edges, g.initial, frozenset(), g.sw)
    attr = attractor(g)
    assert not attr.rank and not winning_initials(g, attr)
    assert classify(g, attr, g.states[0]) == TRAPPED


def test_attractor_matches_oracles():
    for seed in range(150):
        g = gamegen.random_game(seed)
        rank = attractor(g).rank
        assert rank == gamegen.fixpoint_ranks(g), seed
        assert rank == gamegen.minimax_ranks(g), seed


def test_layers_partition_the_attractor():
    for seed in range(30):
        attr = attractor(gamegen.random_game(seed))
        for r, layer in enumerate(attr.layers):
            assert all(attr.rank[q] == r for q in layer)
        assert sum(len(layer) for layer in attr.layers) == len(attr.rank)


def test_stuck_adversary_loses():
    states = (GameState(0, "m", ADVERSARY), GameState(1, "m", AGENT))
    target = (GameState(2, "m", ADVERSARY),)
    edges = ((), (("x", 0),), ())
    g = GameAutomaton(states + target, ("x",), (EPSILON,), edges, (1,), frozenset({2}))
    # "every adversary move lands in the attractor" holds when there is none
    assert attractor(g).rank == {target[0]: 0, states[0]: 1, states[1]: 2}


def test_optimal_strategy_descends_one_layer():
    for seed in range(40):
        g = gamegen.random_game(seed)
        attr = attractor(g)
        strat = optimal_strategy(g, attr)
        for q, r in attr.rank.items():
            if q.turn != AGENT or r == 0:
                continue
            moves = strat.moves(q)
            assert moves
            for s in moves:
                assert attr.rank[g.successor(q, s)] == r - 1
        ws = winning_strategy(g, attr)
        for q in ws.table:
            assert all(g.successor(q, s) in attr for s in ws.moves(q))


def test_masked_game_matches_fresh_rebuild():
    """Switching moves off must agree with building the game from a smaller
    adversary."""
    rng = random.Random(0)
    masked_full = casestudy.build_scenario("opposite")
    true_pairs = sorted(casestudy.true_switching("opposite").on)
    pairs = casestudy.regime_pairs("opposite")
    for trial in range(8):
        on = frozenset(p for p in true_pairs if rng.random() < 0.5)
        sw = SwitchingFunction()
        for q2, s in on:
            sw = sw_update(sw, q2, s)
        masked = masked_full.with_sw(sw)
        trans = {(p, EPSILON): p for p in pairs}
        trans.update({(q2, s): s for q2, s in on})
        adv = PlayerSpec(Semiautomaton(pairs, pairs + (EPSILON,), trans), frozenset(pairs), can_pass=True)
        prod = turn_based_product(casestudy.build_agent_sa(), adv, None, casestudy.build_u2(pairs=pairs))
        fresh = game_automaton(prod, casestudy.build_spec_fsa(), lambda p: p.q1, agent_alphabet=casestudy.ROOMS)
        ra, rb = attractor(masked).rank, attractor(fresh).rank
        assert set(fresh.states) <= set(masked.states)
        for q in fresh.states:
            assert ra.get(q) == rb.get(q), (trial, q)
        assert winning_initials(masked, attractor(masked)) == winning_initials(fresh, attractor(fresh))


def test_json_round_trip_and_errors():
    g = gamegen.random_game(7)
    back = load_game(dump_game(g))
    assert back.states == tuple(GameState(*q) for q in g.states)
    assert attractor(back).rank == attractor(g).rank
    assert dump_game(back) == dump_game(g)
    with pytest.raises(GameError):
        load_game("{")
    with pytest.raises(GameError):
        load_game('{"states": []}')
    doc = '{"states": [[0, "m", 1, null]], "agent_alphabet": ["x"], "adversary_alphabet": [], '
    with pytest.raises(GameError):
        load_game(doc + '"initial": [0], "final": [], "transitions": [[0, "x", 4]], "sw": []}')


def test_dot_is_deterministic():
    g = casestudy.build_scenario("opposite")
    a = export_game_dot(g, attractor(g))
    assert a == export_game_dot(g, attractor(g))
    assert "rank 7" in a
