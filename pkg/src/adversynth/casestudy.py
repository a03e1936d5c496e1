"""The four-room apartment: a robot visits every room while an adversary
closes pairs of doors.

Rooms are the agent's states and its symbols (moving *into* room j is
symbol ``"j"``).  The adversary's states are the currently closed pair of
doors, written ``"ad"``; playing ``"af"`` means closing that pair.  The
visited-rooms specification tracks the set of rooms seen so far, written as
sorted digits (``"124"``).
"""
from __future__ import annotations

import itertools
from functools import lru_cache

from .automata import FSA, Semiautomaton, make_fsa
from .game import (
    EPSILON,
    GameAutomaton,
    GameState,
    InteractionFunction,
    PlayerSpec,
    SwitchingFunction,
    attractor,
    game_automaton,
    turn_based_product,
    winning_initials,
)

ROOMS = ("1", "2", "3", "4")
DOORS = ("a", "b", "c", "d", "e", "f")

REGIMES = {
    "opposite": ("ad", "ae", "af", "bf", "ce", "ef"),
    "adjacent": ("ab", "ac", "bc", "bd", "be", "cd", "cf", "de", "df"),
    "general": tuple(x + y for x, y in itertools.combinations(DOORS, 2)),
}

# a, b and f are pinned by the text; c, d, e were fixed by
# consistent_door_maps() (the only candidate passing every check).
DOOR_MAP = {
    "a": frozenset("12"),
    "b": frozenset("13"),
    "c": frozenset("23"),
    "d": frozenset("34"),
    "e": frozenset("14"),
    "f": frozenset("24"),
}

# every pair of the general regime, the superset of all adversary symbols
ALL_PAIRS = REGIMES["general"]


def regime_pairs(regime: str) -> tuple:
    try:
        return REGIMES[regime.lower()]
    except KeyError:
        raise ValueError(f"unknown regime {regime!r}; choose from {', '.join(REGIMES)}") from None


def build_agent_sa() -> PlayerSpec:
    trans = {(i, j): j for i in ROOMS for j in ROOMS if i != j}
    return PlayerSpec(Semiautomaton(ROOMS, ROOMS, trans), frozenset(ROOMS), can_pass=False)


def _adversary(pairs, allowed) -> PlayerSpec:
    trans = {(p, EPSILON): p for p in pairs}
    for p in pairs:
        for q in pairs:
            if allowed(p, q):
                trans[(p, q)] = q
    sa = Semiautomaton(pairs, pairs + (EPSILON,), trans)
    return PlayerSpec(sa, frozenset(pairs), can_pass=True)


def build_adversary_sa(regime: str) -> PlayerSpec:
    """True door dynamics: reopen one closed door and close one other."""
    return _adversary(regime_pairs(regime), lambda p, q: len(set(p) & set(q)) == 1)


def adversary_scaffold(regime: str) -> PlayerSpec:
    """The 2-local acceptor for the non-silent adversary symbols, without its
    start state, plus silent self-loops: from any pair, any pair may follow."""
    return _adversary(regime_pairs(regime), lambda p, q: True)


def true_switching(regime: str) -> SwitchingFunction:
    sa = build_adversary_sa(regime).sa
    return SwitchingFunction(frozenset((q, s) for q, s, _ in sa.edges() if s != EPSILON))


def _visited(rooms) -> str:
    return "".join(sorted(rooms))


def build_spec_fsa(adversary_symbols=ALL_PAIRS + (EPSILON,)) -> FSA:
    states = [_visited(c) for n in range(1, 5) for c in itertools.combinations(ROOMS, n)]
    alphabet = ROOMS + tuple(adversary_symbols)
    trans = {}
    for s in states:
        for j in ROOMS:
            trans[(s, j)] = _visited(set(s) | {j})
        for x in adversary_symbols:
            trans[(s, x)] = s
    return make_fsa(states, alphabet, trans, ROOMS, ["1234"])


def door_between(doors, r, j):
    pair = frozenset((r, j))
    for d, rooms in doors.items():
        if rooms == pair:
            return d
    return None


def build_u2(doors=DOOR_MAP, regime: str = "general", pairs=None) -> InteractionFunction:
    """Rooms the agent cannot enter from room r while the doors in q2 are shut."""
    pairs = pairs or regime_pairs(regime)
    table = {}
    for q2 in pairs:
        for r in ROOMS:
            blocked = frozenset(j for j in ROOMS if j != r and door_between(doors, r, j) in q2)
            if blocked:
                table[(q2, r)] = blocked
    return InteractionFunction(table)


def _link(p: GameState) -> str:
    return p.q1


def build_scenario(regime: str, doors=DOOR_MAP) -> GameAutomaton:
    """The true game, materialized over the adversary scaffold.

    Initial states put the robot in its room with that room already
    visited.  The switching function is the adversary's true rule set.
    """
    return _build(regime.lower(), tuple(sorted((d, "".join(sorted(r))) for d, r in doors.items())))


@lru_cache(maxsize=32)
def _build(regime, door_items) -> GameAutomaton:
    doors = {d: frozenset(r) for d, r in door_items}
    pairs = regime_pairs(regime)
    product = turn_based_product(build_agent_sa(), adversary_scaffold(regime), None, build_u2(doors, pairs=pairs))
    return game_automaton(product, build_spec_fsa(), _link, agent_alphabet=ROOMS, sw=true_switching(regime))


def state(q1, q2, turn, qs) -> GameState:
    return GameState(str(q1), q2, int(turn), str(qs))


# The winning play reported for the opposite regime, from (1,ad,1,1).
PAPER_PLAY = (
    (state(1, "ad", 1, 1), "4"),
    (state(4, "ad", 0, 14), "ae"),
    (state(4, "ae", 1, 14), "2"),
    (state(2, "ae", 0, 124), "ce"),
    (state(2, "ce", 1, 124), "1"),
    (state(1, "ce", 0, 124), "ef"),
    (state(1, "ef", 1, 124), "3"),
)
PAPER_PLAY_END = state(3, "ef", 0, 1234)

PAPER_WINNING_INITIALS = frozenset(
    {
        state(1, "ad", 1, 1),
        state(1, "ce", 1, 1),
        state(2, "ad", 1, 2),
        state(2, "bf", 1, 2),
        state(4, "ce", 1, 4),
        state(4, "bf", 1, 4),
    }
)


def candidate_door_maps():
    fixed = {"a": frozenset("12"), "b": frozenset("13"), "f": frozenset("24")}
    rest = [frozenset("14"), frozenset("23"), frozenset("34")]
    for perm in itertools.permutations(rest):
        yield {**fixed, **dict(zip("cde", perm))}


def door_map_consistent(doors) -> bool:
    """Check a door map against every reported fact of the opposite game."""
    g = build_scenario("opposite", doors)
    start = state(1, "ad", 1, 1)
    succ = {s: g.successor(start, s) for s in ROOMS if s != "1"}
    if succ["2"] is not None or succ["3"] is None or succ["4"] is None:
        return False
    if build_u2(doors)("ab", "1") != frozenset({"2", "3"}):
        return False
    q = start
    for expected, sym in PAPER_PLAY:
        if q != expected:
            return False
        q = g.successor(q, sym)
        if q is None:
            return False
    if q != PAPER_PLAY_END or g.index[q] not in g.final:
        return False
    return winning_initials(g, attractor(g)) == PAPER_WINNING_INITIALS


def consistent_door_maps() -> list:
    return [d for d in candidate_door_maps() if door_map_consistent(d)]
