"""Random game automata and brute-force solvers used as oracles."""
from __future__ import annotations

import random
from functools import lru_cache

from adversynth.game import ADVERSARY, AGENT, EPSILON, GameAutomaton, GameState, SwitchingFunction


def random_game(seed, max_states=60, max_symbols=6, density=0.6, final_frac=0.15) -> GameAutomaton:
    rng = random.Random(seed)
    n = rng.randint(2, max_states)
    agent_syms = tuple(f"x{i}" for i in range(rng.randint(1, max_symbols)))
    adv_syms = tuple(f"y{i}" for i in range(rng.randint(1, max_symbols - 1))) + (EPSILON,)
    n_q2 = rng.randint(1, 4)
    states = tuple(GameState(i, f"m{rng.randrange(n_q2)}", rng.choice((AGENT, ADVERSARY))) for i in range(n))
    edges = []
    for q in states:
        alphabet = agent_syms if q.turn == AGENT else adv_syms
        edges.append(tuple((s, rng.randrange(n)) for s in alphabet if rng.random() < density))
    final = frozenset(i for i in range(n) if rng.random() < final_frac)
    initial = tuple(sorted(rng.sample(range(n), rng.randint(1, min(4, n)))))
    g = GameAutomaton(states, agent_syms, adv_syms, tuple(edges), initial, final)
    pairs = g.scaffold_pairs()
    return g.with_sw(SwitchingFunction(frozenset(p for p in pairs if rng.random() < 0.7)))


def large_game(n_states, out_degree=4, seed=0) -> GameAutomaton:
    """Random game with about ``n_states * out_degree`` transitions."""
    rng = random.Random(seed)
    agent_syms = tuple(f"x{i}" for i in range(out_degree))
    adv_syms = tuple(f"y{i}" for i in range(out_degree))
    states = tuple(GameState(i, "m", i % 2) for i in range(n_states))
    edges = tuple(
        tuple((s, rng.randrange(n_states)) for s in (agent_syms if q.turn == AGENT else adv_syms)) for q in states
    )
    final = frozenset(rng.sample(range(n_states), max(1, n_states // 50)))
    g = GameAutomaton(states, agent_syms, adv_syms, edges, (0,), final)
    return g.with_sw(SwitchingFunction(frozenset(("m", s) for s in adv_syms)))


def _enabled(g, i):
    q = g.states[i]
    out = []
    for s, j in g.edges[i]:
        if q.turn == AGENT or s == EPSILON or (q.q2, s) in g.sw.on:
            out.append(j)
    return out


def fixpoint_ranks(g) -> dict:
    """Iterate the one-step controllable predecessor until nothing changes."""
    n = len(g.states)
    rank = {i: 0 for i in g.final}
    r = 0
    while True:
        r += 1
        new = []
        for i in range(n):
            if i in rank:
                continue
            succ = _enabled(g, i)
            if g.states[i].turn == AGENT:
                ok = any(j in rank for j in succ)
            else:
                ok = all(j in rank for j in succ)
            if ok:
                new.append(i)
        if not new:
            return {g.states[i]: k for i, k in rank.items()}
        for i in new:
            rank[i] = r


def minimax_ranks(g) -> dict:
    """Shortest forced-win horizon by explicit game-tree search."""
    n = len(g.states)
    final = g.final

    @lru_cache(maxsize=None)
    def wins(i, depth):
        if i in final:
            return True
        if depth == 0:
            return False
        succ = _enabled(g, i)
        if g.states[i].turn == AGENT:
            return any(wins(j, depth - 1) for j in succ)
        return all(wins(j, depth - 1) for j in succ)

    ranks = {}
    for i in range(n):
        for d in range(n + 1):
            if wins(i, d):
                ranks[g.states[i]] = d
                break
    return ranks
